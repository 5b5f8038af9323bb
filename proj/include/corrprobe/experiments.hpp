// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corrprobe/activation_store.hpp"
#include "corrprobe/baselines.hpp"
#include "corrprobe/metrics.hpp"
#include "corrprobe/probe.hpp"

namespace corrprobe {

struct ProtocolOptions {
  unsigned k = 5;
  std::uint64_t seed = 0;
  FoldStrategy strategy = FoldStrategy::stratified_shuffled;
  unsigned jobs = 1;
};

std::string protocol_id(const ProtocolOptions& options);

// ---- layer sweep -----------------------------------------------------------

struct LayerSweepResult {
  std::vector<std::uint32_t> layers;  // ascending
  std::vector<EvalResult> results;    // aligned with layers
  std::uint32_t best_layer = 0;
  std::uint32_t layer_stride = 0;     // gcd of layer gaps, 0 for a single layer
  FoldPlan plan;
};

/// Cross-validated AUROC per layer on one shared fold plan. All layers must
/// carry the same samples in the same order. Best layer maximises the mean;
/// ties go to the lowest layer index.
LayerSweepResult sweep_layers(std::span<const LabeledDataset> layers, const ProtocolOptions& options);

std::string sweep_csv(const LayerSweepResult& sweep, std::string_view model_id,
                      std::string_view dataset_id);

// ---- cross-dataset generalisation -----------------------------------------

struct CrossMatrix {
  std::vector<std::string> dataset_ids;
  unsigned k = 0;
  std::string protocol;
  std::vector<std::vector<EvalResult>> cells;  // [train][test]
  std::vector<FoldPlan> plans;                 // one per dataset, shared by every training set
  std::vector<Direction> fold_averaged;        // per training dataset; empty for assessors
};

/// For each training dataset and fold f: fit on that dataset's folds != f,
/// then evaluate on fold f of every dataset. Test folds are identical across
/// training sets, and the diagonal reproduces cv_auroc on the same plan.
CrossMatrix cross_matrix(std::span<const LabeledDataset> datasets, const ProtocolOptions& options);

/// The same protocol with the logistic-regression assessor on embeddings.
CrossMatrix assessor_cross_matrix(std::span<const EmbeddingDataset> datasets,
                                  const ProtocolOptions& options, const LogRegOptions& logreg);

std::string cross_csv(const CrossMatrix& matrix, std::string_view model_id, std::uint32_t layer);

// ---- sample efficiency -----------------------------------------------------

struct SampleCurve {
  std::vector<std::size_t> sizes;
  std::vector<std::string> test_ids;
  unsigned reps = 0;
  std::vector<std::vector<std::vector<double>>> aurocs;  // [size][test][rep]
  std::vector<std::vector<double>> mean;                 // [size][test]
  std::vector<std::vector<double>> std;                  // [size][test], population
};

/// Doubling grid 10, 20, ..., 10240, keeping sizes <= n.
std::vector<std::size_t> default_curve_sizes(std::size_t n);

/// Stratified subsample without replacement: size s takes round(s * n_true / n)
/// positives, clamped so both classes keep at least one member, the rest
/// negatives. Indices are sorted before fitting, so s = n reproduces a fit on
/// the whole set. Repetition r of size index i draws from
/// stream_seed(seed, (i << 20) | r).
std::vector<std::size_t> stratified_subsample(std::span<const std::uint8_t> labels, std::size_t size,
                                              std::uint64_t stream);

SampleCurve sample_curve(const LabeledDataset& train, std::span<const LabeledDataset> tests,
                         std::span<const std::size_t> sizes, unsigned reps, std::uint64_t seed,
                         unsigned jobs = 1);

std::string curve_csv(const SampleCurve& curve, std::string_view train_dataset);

// ---- direction geometry ----------------------------------------------------

/// Symmetric cosine-similarity matrix of the directions' w vectors.
std::vector<std::vector<double>> cosine_matrix(std::span<const Direction> directions);

std::string cosine_csv(std::span<const std::string> names,
                       const std::vector<std::vector<double>>& matrix);

// ---- score distributions ---------------------------------------------------

inline constexpr std::size_t kIdkBins = 61;

struct CategorySummary {
  Category category = Category::right;
  std::size_t count = 0;
  double mean = 0.0;  // NaN when empty
  double std = 0.0;   // population; NaN when empty
  std::vector<std::size_t> histogram;
  std::size_t below_range = 0;
  std::size_t above_range = 0;
};

/// Per-category summaries over 61 equal-width bins spanning mean +- 3 std of
/// all scores.
struct IdkReport {
  std::size_t total = 0;
  double global_mean = 0.0;
  double global_std = 0.0;
  double range_lo = 0.0;
  double bin_width = 0.0;
  std::array<CategorySummary, 3> groups;  // right, wrong, idk
};

IdkReport idk_report(const Direction& dir, const LabeledDataset& data, unsigned jobs = 1);
std::string idk_summary_csv(const IdkReport& report);
std::string idk_histogram_csv(const IdkReport& report);

struct ExtremeItem {
  std::size_t row = 0;
  std::string sample_id;
  std::string question;
  std::string answer;
  std::vector<std::string> gold;
  double score = 0.0;
};

struct Extremes {
  std::vector<ExtremeItem> correct_high;
  std::vector<ExtremeItem> correct_low;
  std::vector<ExtremeItem> incorrect_high;
  std::vector<ExtremeItem> incorrect_low;
};

/// Top-k highest and lowest scores within each correctness group; ties rank
/// by row index. Groups smaller than k are returned whole.
Extremes extremes(const Direction& dir, const LabeledDataset& data, std::size_t top_k,
                  unsigned jobs = 1);
std::string extremes_csv(const Extremes& ex);

std::string scores_csv(const LabeledDataset& data, std::span<const double> scores);
std::string row_scores_csv(std::span<const double> scores);

}  // namespace corrprobe

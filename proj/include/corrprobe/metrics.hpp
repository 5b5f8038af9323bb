// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corrprobe/activation_store.hpp"

namespace corrprobe {

struct EvalResult {
  std::vector<double> auroc_per_fold;
  double mean = 0.0;
  double std = 0.0;  // population std over folds
  std::vector<std::size_t> n_pos;
  std::vector<std::size_t> n_neg;
};

EvalResult summarize_folds(std::vector<double> aurocs, std::vector<std::size_t> n_pos,
                           std::vector<std::size_t> n_neg);

enum class FoldStrategy { stratified_shuffled, sequential };

const char* strategy_name(FoldStrategy s) noexcept;
FoldStrategy parse_strategy(std::string_view name);

struct FoldPlan {
  unsigned k = 0;
  std::vector<std::uint32_t> assignment;
  std::uint64_t seed = 0;
  FoldStrategy strategy = FoldStrategy::stratified_shuffled;

  std::vector<std::size_t> test_rows(unsigned fold) const;
  std::vector<std::size_t> train_rows(unsigned fold) const;
};

/// Mann-Whitney AUROC with average ranks; cross-class ties count one half.
/// Exact: the rank sum is kept in integers until the final division.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Deterministic in (labels, k, seed, strategy).
///
/// stratified_shuffled shuffles each class independently (xoshiro256** seeded
/// through splitmix64, Fisher-Yates) and deals its members round-robin over
/// the folds, the deal continuing from the negatives into the positives so
/// fold totals stay balanced as well. sequential cuts contiguous index blocks,
/// the first n % k blocks one longer.
FoldPlan make_folds(std::span<const std::uint8_t> labels, unsigned k, std::uint64_t seed,
                    FoldStrategy strategy);

/// For each fold: fit on the other folds, score and evaluate the held-out fold.
EvalResult cv_auroc(const LabeledDataset& data, const FoldPlan& plan, unsigned jobs = 1);

std::string eval_csv_header(unsigned k);
std::string eval_csv_row(std::string_view model_id, std::string_view train_dataset,
                         std::string_view test_dataset, std::uint32_t layer, unsigned k,
                         const EvalResult& result);

}  // namespace corrprobe

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corrprobe/activation_store.hpp"

namespace corrprobe {

/// Centroid-difference correctness direction.
///
/// w is the mean activation of correctly answered questions minus the mean of
/// the rest (IDK answers count as incorrect); mu is the midpoint of the two
/// centroids. A vector h scores (h - mu) . w / |w|. Scores are raw reals: no
/// sigmoid, no threshold.
struct Direction {
  std::vector<double> w;
  std::vector<double> mu;
  double w_norm = 0.0;
  std::uint32_t layer = 0;
  std::size_t d = 0;
  std::string train_dataset_id;
  std::string model_id;
  std::size_t n_true = 0;
  std::size_t n_false = 0;
};

inline constexpr double kDegenerateNorm = 1e-12;

Direction fit_direction(const LabeledDataset& data);

/// Fits on the selected rows only. Means accumulate in f64 in row order.
Direction fit_direction(const ActivationMatrix& matrix, std::span<const std::uint8_t> labels,
                        std::span<const std::size_t> rows);

double score(const Direction& dir, std::span<const float> h);
double score(const Direction& dir, std::span<const double> h);

std::vector<double> score_batch(const Direction& dir, const ActivationMatrix& matrix,
                                unsigned jobs = 1);
std::vector<double> score_rows(const Direction& dir, const ActivationMatrix& matrix,
                               std::span<const std::size_t> rows, unsigned jobs = 1);

/// Coordinate-wise mean of w and mu over directions fitted on the same width.
Direction average_directions(std::span<const Direction> dirs);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

void save_direction(const Direction& dir, const std::filesystem::path& path);
Direction load_direction(const std::filesystem::path& path);

}  // namespace corrprobe

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "corrprobe/activation_store.hpp"

namespace corrprobe {

/// Two isotropic Gaussians separated by delta along a unit axis.
struct GaussianSpec {
  std::size_t d = 64;
  std::size_t n_per_class = 1000;
  double delta = 2.0;
  double sigma_true = 1.0;
  double sigma_false = 1.0;
  std::vector<double> axis;      // empty: drawn from axis_seed
  std::uint64_t axis_seed = 0;  // independent of seed
  std::uint64_t seed = 0;
  double idk_fraction = 0.0;  // share of the false class relabelled idk
  double idk_shift = 0.0;     // extra offset of the idk rows along axis, <= 0
};

/// Resolves the axis (random unit vector from axis_seed when absent) and
/// checks the spec.
std::vector<double> resolve_axis(const GaussianSpec& spec);

/// Rows are interleaved in a seeded random class order. Row i draws its
/// deviates from its own substream, stream_seed(seed, i + 1), so output does
/// not depend on how generation is scheduled.
LabeledDataset generate(const GaussianSpec& spec);

/// Phi(delta / sqrt(sigma_true^2 + sigma_false^2)): the exact AUROC of the
/// projection onto the generating axis.
double analytic_auc(double delta, double sigma_true, double sigma_false);

double normal_cdf(double x);

}  // namespace corrprobe

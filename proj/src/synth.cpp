// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "corrprobe/error.hpp"
#include "corrprobe/rng.hpp"

namespace corrprobe {

namespace {

constexpr std::uint64_t kAxisStream = 0;  // rows use streams 1..n

void check_spec(const GaussianSpec& spec) {
  if (spec.d == 0) fail(Errc::invalid_spec, "d must be >= 1");
  if (spec.n_per_class == 0) fail(Errc::invalid_spec, "n_per_class must be >= 1");
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) fail(Errc::invalid_spec, "delta must be finite and >= 0");
  if (!(spec.sigma_true > 0.0) || !(spec.sigma_false > 0.0) || !std::isfinite(spec.sigma_true) ||
      !std::isfinite(spec.sigma_false)) {
    fail(Errc::invalid_spec, "sigmas must be positive and finite");
  }
  if (!(spec.idk_fraction >= 0.0 && spec.idk_fraction < 1.0)) {
    fail(Errc::invalid_spec, "idk_fraction must lie in [0, 1)");
  }
  if (!(spec.idk_shift <= 0.0)) fail(Errc::invalid_spec, "idk_shift must be <= 0");
}

}  // namespace

std::vector<double> resolve_axis(const GaussianSpec& spec) {
  check_spec(spec);
  std::vector<double> axis = spec.axis;
  if (axis.empty()) {
    Rng rng(stream_seed(spec.axis_seed, kAxisStream));
    axis.resize(spec.d);
    for (std::size_t j = 0; j < spec.d; j += 2) {
      double z0, z1;
      rng.normal_pair(z0, z1);
      axis[j] = z0;
      if (j + 1 < spec.d) axis[j + 1] = z1;
    }
  }
  if (axis.size() != spec.d) fail(Errc::invalid_spec, "axis length differs from d");
  double norm = 0.0;
  for (const double a : axis) norm += a * a;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) fail(Errc::invalid_spec, "axis has zero norm");
  if (!spec.axis.empty() && std::abs(norm - 1.0) > 1e-9) fail(Errc::invalid_spec, "axis must have unit norm");
  for (double& a : axis) a /= norm;
  return axis;
}

LabeledDataset generate(const GaussianSpec& spec) {
  const std::vector<double> axis = resolve_axis(spec);
  const std::size_t n = 2 * spec.n_per_class;
  const auto n_idk = static_cast<std::size_t>(
      std::llround(spec.idk_fraction * static_cast<double>(spec.n_per_class)));

  // Class order: n_per_class ones and zeros, shuffled.
  std::vector<std::uint8_t> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(spec.n_per_class), 1);
  Rng order_rng(spec.seed);
  order_rng.shuffle(std::span<std::uint8_t>(labels));

  ActivationMatrix m;
  m.model_id = "synthetic";
  m.dataset_id = "synth";
  m.d = spec.d;
  m.n = n;
  m.values.resize(n * spec.d);
  std::vector<SampleMeta> meta(n);

  std::size_t false_seen = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_true = labels[i] != 0;
    const bool is_idk = !is_true && false_seen++ < n_idk;
    const double offset = (is_true ? 0.5 : -0.5) * spec.delta + (is_idk ? spec.idk_shift : 0.0);
    const double sigma = is_true ? spec.sigma_true : spec.sigma_false;

    Rng rng(stream_seed(spec.seed, i + 1));
    float* row = m.values.data() + i * spec.d;
    for (std::size_t j = 0; j < spec.d; j += 2) {
      double z0, z1;
      rng.normal_pair(z0, z1);
      row[j] = static_cast<float>(offset * axis[j] + sigma * z0);
      if (j + 1 < spec.d) row[j + 1] = static_cast<float>(offset * axis[j + 1] + sigma * z1);
    }

    SampleMeta& s = meta[i];
    s.sample_id = "synth-" + std::to_string(i);
    s.dataset_id = m.dataset_id;
    s.correct = is_true;
    s.category = is_true ? Category::right : (is_idk ? Category::idk : Category::wrong);
  }
  return make_dataset(std::move(m), std::move(meta));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double analytic_auc(double delta, double sigma_true, double sigma_false) {
  if (!(sigma_true > 0.0) || !(sigma_false > 0.0)) fail(Errc::invalid_spec, "sigmas must be positive");
  return normal_cdf(delta / std::sqrt(sigma_true * sigma_true + sigma_false * sigma_false));
}

}  // namespace corrprobe

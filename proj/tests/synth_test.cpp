// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "corrprobe/metrics.hpp"
#include "corrprobe/probe.hpp"
#include "corrprobe/synth.hpp"
#include "test_util.hpp"

using namespace corrprobe;
using namespace corrprobe::testing;

TEST(Synth, AnalyticValues) {
  EXPECT_EQ(analytic_auc(0.0, 1.0, 1.0), 0.5);
  // Phi(sqrt 2) and Phi(1/sqrt 2), evaluated independently in extended precision.
  EXPECT_NEAR(analytic_auc(2.0, 1.0, 1.0), 0.9213503964748575, 1e-12);
  EXPECT_NEAR(analytic_auc(1.0, 1.0, 1.0), 0.7602499389065233, 1e-12);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
  EXPECT_EQ(error_of([] { analytic_auc(1.0, 0.0, 1.0); }), Errc::invalid_spec);
}

TEST(Synth, AnalyticMonotonicity) {
  for (double d = 0.0; d < 5.0; d += 0.25) {
    EXPECT_LT(analytic_auc(d, 1.0, 1.0), analytic_auc(d + 0.25, 1.0, 1.0));
    EXPECT_GT(analytic_auc(d + 0.1, 1.0, 1.0), analytic_auc(d + 0.1, 1.5, 1.0));
    EXPECT_GT(analytic_auc(d + 0.1, 1.0, 1.0), analytic_auc(d + 0.1, 1.0, 1.5));
  }
}

TEST(Synth, SameSeedIsBitIdentical) {
  GaussianSpec spec;
  spec.n_per_class = 300;
  spec.seed = 5;
  spec.idk_fraction = 0.1;
  spec.idk_shift = -1;
  const auto a = generate(spec);
  const auto b = generate(spec);
  EXPECT_EQ(std::memcmp(a.matrix.values.data(), b.matrix.values.data(), a.matrix.values.size() * 4), 0);
  EXPECT_EQ(a.labels, b.labels);
  spec.seed = 6;
  EXPECT_NE(generate(spec).matrix.values, a.matrix.values);
}

TEST(Synth, ShapeCountsAndAxis) {
  GaussianSpec spec;
  spec.d = 7;
  spec.n_per_class = 100;
  spec.idk_fraction = 0.2;
  spec.idk_shift = -2;
  const auto ds = generate(spec);
  EXPECT_EQ(ds.size(), 200u);
  EXPECT_EQ(ds.matrix.d, 7u);
  EXPECT_EQ(ds.counts.n_true, 100u);
  EXPECT_EQ(ds.counts.n_false, 100u);
  EXPECT_EQ(ds.counts.n_idk, 20u);
  const auto axis = resolve_axis(spec);
  double norm = 0.0;
  for (const double a : axis) norm += a * a;
  EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-12);
  // The axis depends on axis_seed only.
  GaussianSpec other = spec;
  other.seed = 99;
  EXPECT_EQ(resolve_axis(other), axis);
  other.axis_seed = 1;
  EXPECT_NE(resolve_axis(other), axis);
}

TEST(Synth, InvalidSpecs) {
  auto check = [](auto mutate) {
    GaussianSpec s;
    s.n_per_class = 4;
    mutate(s);
    return error_of([&] { generate(s); });
  };
  EXPECT_EQ(check([](GaussianSpec& s) { s.d = 0; }), Errc::invalid_spec);
  EXPECT_EQ(check([](GaussianSpec& s) { s.sigma_true = 0; }), Errc::invalid_spec);
  EXPECT_EQ(check([](GaussianSpec& s) { s.delta = -1; }), Errc::invalid_spec);
  EXPECT_EQ(check([](GaussianSpec& s) { s.idk_fraction = 1.0; }), Errc::invalid_spec);
  EXPECT_EQ(check([](GaussianSpec& s) { s.idk_shift = 0.5; }), Errc::invalid_spec);
  EXPECT_EQ(check([](GaussianSpec& s) { s.axis = std::vector<double>(64, 1.0); }), Errc::invalid_spec);
  EXPECT_EQ(check([](GaussianSpec& s) { s.axis = {1.0, 0.0}; }), Errc::invalid_spec);
}

TEST(Synth, NullCaseIsChance) {
  GaussianSpec spec;
  spec.delta = 0.0;
  spec.n_per_class = 10000;
  spec.seed = 21;
  const auto ds = generate(spec);
  const auto r = cv_auroc(ds, make_folds(ds.labels, 5, 0, FoldStrategy::stratified_shuffled), 2);
  EXPECT_NEAR(r.mean, 0.5, 0.02);
}

TEST(Synth, VanishingNoiseSeparatesPerfectly) {
  GaussianSpec spec;
  spec.sigma_true = spec.sigma_false = 1e-6;
  spec.n_per_class = 200;
  const auto ds = generate(spec);
  const auto r = cv_auroc(ds, make_folds(ds.labels, 5, 0, FoldStrategy::stratified_shuffled));
  EXPECT_EQ(r.mean, 1.0);
}

TEST(Synth, GroupMeansFollowConstruction) {
  GaussianSpec spec;
  spec.n_per_class = 5000;
  spec.idk_fraction = 0.3;
  spec.idk_shift = -1.5;
  const auto ds = generate(spec);
  const auto axis = resolve_axis(spec);
  double sums[3] = {0, 0, 0};
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double proj = 0.0;
    for (std::size_t j = 0; j < spec.d; ++j) proj += ds.matrix.row(i)[j] * axis[j];
    const auto g = static_cast<int>(ds.meta[i].category);
    sums[g] += proj;
    ++counts[g];
  }
  EXPECT_NEAR(sums[0] / counts[0], 1.0, 0.05);
  EXPECT_NEAR(sums[1] / counts[1], -1.0, 0.05);
  EXPECT_NEAR(sums[2] / counts[2], -2.5, 0.05);
}

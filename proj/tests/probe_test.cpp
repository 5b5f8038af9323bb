// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "json.hpp"

#include "corrprobe/metrics.hpp"
#include "corrprobe/probe.hpp"
#include "corrprobe/synth.hpp"
#include "test_util.hpp"

using namespace corrprobe;
using namespace corrprobe::testing;

namespace {

LabeledDataset trivial_fixture() {
  return dataset_from_rows({{1, 0}, {3, 0}, {-1, 0}, {-3, 0}}, {1, 1, 0, 0});
}

double dot_oracle(const Direction& dir, const std::vector<double>& h) {
  double num = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) {
    num += (h[j] - dir.mu[j]) * dir.w[j];
    norm += dir.w[j] * dir.w[j];
  }
  return num / std::sqrt(norm);
}

// Values on a 2^-12 grid with |x| < 32 so f32 shifts and x3 scaling stay exact.
float dyadic(std::mt19937& gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return static_cast<float>(std::round(u(gen) * 4096.0) / 4096.0);
}

}  // namespace

TEST(Probe, SymmetricCentroidsGiveAxisDirection) {
  const Direction dir = fit_direction(trivial_fixture());
  EXPECT_EQ(dir.w, (std::vector<double>{4.0, 0.0}));
  EXPECT_EQ(dir.mu, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(dir.w_norm, 4.0);
  EXPECT_EQ(dir.n_true, 2u);
  EXPECT_EQ(dir.n_false, 2u);
  EXPECT_EQ(dir.train_dataset_id, "ds");
}

TEST(Probe, IdenticalCentroidsAreDegenerate) {
  const auto ds = dataset_from_rows({{1, 1}, {1, 1}}, {1, 0});
  EXPECT_EQ(error_of([&] { fit_direction(ds); }), Errc::degenerate_direction);
}

TEST(Probe, EmptyClassIsRejected) {
  const auto ds = dataset_from_rows({{1, 1}, {2, 1}}, {1, 1});
  EXPECT_EQ(error_of([&] { fit_direction(ds); }), Errc::empty_class);
}

TEST(Probe, CentroidsMatchColumnMeanOracle) {
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    ActivationMatrix m = random_matrix(6, 3, seed, 10.0f);
    const std::vector<int> correct{1, 1, 1, 0, 0, 0};
    const auto ds = make_dataset(m, simple_meta(correct));
    const Direction dir = fit_direction(ds);
    const auto mt = column_means(m, ds.labels, 1);
    const auto mf = column_means(m, ds.labels, 0);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(dir.w[j], mt[j] - mf[j], 1e-12);
      EXPECT_NEAR(dir.mu[j], 0.5 * (mt[j] + mf[j]), 1e-12);
    }
    EXPECT_NEAR(dir.w_norm, std::hypot(dir.w[0], dir.w[1], dir.w[2]), 1e-9 * dir.w_norm);
  }
}

TEST(Probe, IdkRowsCountAsIncorrect) {
  auto meta = simple_meta(std::vector<int>{1, 0, 0});
  meta[2].category = Category::idk;
  ActivationMatrix m;
  m.n = 3;
  m.d = 1;
  m.values = {2.0f, 0.0f, -6.0f};
  const Direction dir = fit_direction(make_dataset(m, meta));
  EXPECT_EQ(dir.w[0], 5.0);  // 2 - mean(0, -6)
  EXPECT_EQ(dir.n_false, 2u);
}

TEST(Probe, ScoreExamples) {
  const Direction dir = fit_direction(trivial_fixture());
  EXPECT_EQ(score(dir, std::vector<double>{4, 7}), 4.0);
  EXPECT_EQ(score(dir, std::vector<double>{0, 0}), 0.0);
  ActivationMatrix m;
  m.n = 2;
  m.d = 2;
  m.values = {4, 7, 0, 0};
  EXPECT_EQ(score_batch(dir, m), (std::vector<double>{4.0, 0.0}));
  EXPECT_TRUE(score_rows(dir, m, std::vector<std::size_t>{}).empty());
  EXPECT_EQ(error_of([&] { score(dir, std::vector<double>{1, 2, 3}); }), Errc::dimension_mismatch);
}

TEST(Probe, ScoreMatchesDotProductOracle) {
  std::mt19937 gen(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 50; ++trial) {
    const auto ds = make_dataset(random_matrix(8, 5, 100 + trial), simple_meta(std::vector<int>{1, 0, 1, 0, 1, 0, 1, 0}));
    const Direction dir = fit_direction(ds);
    std::vector<double> h(5);
    for (auto& x : h) x = nd(gen);
    EXPECT_NEAR(score(dir, h), dot_oracle(dir, h), 1e-9);
  }
}

TEST(Probe, BatchMatchesPerRowLoopForAnyJobCount) {
  const auto train = make_dataset(random_matrix(40, 16, 1), simple_meta(std::vector<int>(40, 0)));
  auto labels_meta = simple_meta([] {
    std::vector<int> c(40);
    for (int i = 0; i < 40; ++i) c[i] = i % 2;
    return c;
  }());
  const Direction dir = fit_direction(make_dataset(train.matrix, labels_meta));
  const ActivationMatrix test = random_matrix(10000, 16, 2);
  const auto serial = score_batch(dir, test, 1);
  const auto parallel = score_batch(dir, test, 4);
  ASSERT_EQ(serial.size(), 10000u);
  EXPECT_EQ(serial, parallel);
  for (std::size_t i = 0; i < 1000; ++i) {
    EXPECT_NEAR(serial[i], score(dir, test.row(i)), 1e-9);
  }
}

TEST(Probe, SaveLoadRoundTrip) {
  TempDir tmp;
  Direction dir = fit_direction(trivial_fixture());
  dir.model_id = "m";
  dir.layer = 14;
  save_direction(dir, tmp / "d.json");
  const Direction back = load_direction(tmp / "d.json");
  EXPECT_EQ(back.w, dir.w);
  EXPECT_EQ(back.mu, dir.mu);
  EXPECT_EQ(back.w_norm, dir.w_norm);
  EXPECT_EQ(back.layer, 14u);
  EXPECT_EQ(back.d, 2u);
  EXPECT_EQ(back.model_id, "m");
  EXPECT_EQ(back.train_dataset_id, "ds");
  EXPECT_EQ(back.n_true, 2u);
  EXPECT_EQ(back.n_false, 2u);
}

TEST(Probe, WideRoundTripIsWithinTolerance) {
  TempDir tmp;
  std::mt19937 gen(77);
  std::normal_distribution<double> nd(0.0, 3.0);
  Direction dir;
  dir.d = 4096;
  dir.w.resize(4096);
  dir.mu.resize(4096);
  double norm = 0.0;
  for (std::size_t j = 0; j < 4096; ++j) {
    dir.w[j] = nd(gen);
    dir.mu[j] = nd(gen) * 1e-7;
    norm += dir.w[j] * dir.w[j];
  }
  dir.w_norm = std::sqrt(norm);
  save_direction(dir, tmp / "wide.json");
  const Direction back = load_direction(tmp / "wide.json");
  double max_err = 0.0;
  for (std::size_t j = 0; j < 4096; ++j) {
    max_err = std::max({max_err, std::abs(back.w[j] - dir.w[j]), std::abs(back.mu[j] - dir.mu[j])});
  }
  EXPECT_LT(max_err, 1e-12);
}

TEST(Probe, LoadRejectsSchemaViolations) {
  TempDir tmp;
  save_direction(fit_direction(trivial_fixture()), tmp / "d.json");
  const std::string good = read_text(tmp / "d.json");

  auto write = [&](const std::string& text) {
    std::ofstream(tmp / "bad.json") << text;
    return tmp / "bad.json";
  };
  auto erase_key = [&](const std::string& key) {
    auto j = nlohmann::json::parse(good);
    j.erase(key);
    return j.dump();
  };

  EXPECT_EQ(error_of([&] { load_direction(write(erase_key("mu"))); }), Errc::schema);
  EXPECT_EQ(error_of([&] { load_direction(write(erase_key("w_norm"))); }), Errc::schema);
  EXPECT_EQ(error_of([&] { load_direction(write("not json")); }), Errc::schema);
  {
    auto j = nlohmann::json::parse(good);
    j["mu"] = {0.0, 0.0, 0.0};
    EXPECT_EQ(error_of([&] { load_direction(write(j.dump())); }), Errc::dimension_mismatch);
  }
  {
    auto j = nlohmann::json::parse(good);
    j["w_norm"] = 5.0;
    EXPECT_EQ(error_of([&] { load_direction(write(j.dump())); }), Errc::schema);
  }
}

TEST(ProbeProperty, TranslationLeavesScoresUnchanged) {
  std::mt19937 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 60, d = 8;
    ActivationMatrix m;
    m.n = n;
    m.d = d;
    for (std::size_t i = 0; i < n * d; ++i) m.values.push_back(dyadic(gen, -4, 4));
    std::vector<int> correct(n);
    for (std::size_t i = 0; i < n; ++i) correct[i] = static_cast<int>(i % 3 == 0);
    ActivationMatrix shifted = m;
    std::vector<float> c(d);
    for (auto& x : c) x = dyadic(gen, -16, 16);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) shifted.values[i * d + j] += c[j];

    const auto s0 = score_batch(fit_direction(make_dataset(m, simple_meta(correct))), m);
    const auto s1 = score_batch(fit_direction(make_dataset(shifted, simple_meta(correct))), shifted);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s0[i], s1[i], 1e-6);
  }
}

TEST(ProbeProperty, PositiveScalingScalesScores) {
  std::mt19937 gen(10);
  const std::size_t n = 50, d = 6;
  ActivationMatrix m;
  m.n = n;
  m.d = d;
  for (std::size_t i = 0; i < n * d; ++i) m.values.push_back(dyadic(gen, -8, 8));
  std::vector<int> correct(n);
  for (std::size_t i = 0; i < n; ++i) correct[i] = static_cast<int>((i * 7) % 5 < 2);
  ActivationMatrix scaled = m;
  for (auto& v : scaled.values) v *= 3.0f;
  const auto ds0 = make_dataset(m, simple_meta(correct));
  const auto s0 = score_batch(fit_direction(ds0), m);
  const auto s1 = score_batch(fit_direction(make_dataset(scaled, simple_meta(correct))), scaled);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s1[i], 3.0 * s0[i], 1e-6 * std::max(1.0, std::abs(s1[i])));
  EXPECT_EQ(auroc(s0, ds0.labels), auroc(s1, ds0.labels));
}

TEST(ProbeProperty, LabelSwapNegatesDirectionAndScores) {
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const ActivationMatrix m = random_matrix(30, 4, seed);
    std::vector<int> correct(30), swapped(30);
    for (int i = 0; i < 30; ++i) {
      correct[i] = (i * 13 + static_cast<int>(seed)) % 4 == 0;
      swapped[i] = !correct[i];
    }
    const Direction a = fit_direction(make_dataset(m, simple_meta(correct)));
    const Direction b = fit_direction(make_dataset(m, simple_meta(swapped)));
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(a.w[j], -b.w[j]);
    const auto sa = score_batch(a, m);
    const auto sb = score_batch(b, m);
    for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(sa[i], -sb[i]);
  }
}

TEST(ProbeProperty, DirectionRecoveryImprovesWithSampleSize) {
  double previous = -1.0;
  for (const std::size_t n : {200u, 2000u, 20000u}) {
    GaussianSpec spec;
    spec.n_per_class = n;
    spec.seed = 3;
    const auto ds = generate(spec);
    const double c = cosine_similarity(fit_direction(ds).w, resolve_axis(spec));
    EXPECT_GT(c, previous);
    previous = c;
  }
  EXPECT_GE(previous, 0.99);
}

TEST(Probe, AverageAndCosine) {
  Direction a, b;
  a.d = b.d = 2;
  a.w = {1, 0};
  b.w = {0, 1};
  a.mu = {0, 0};
  b.mu = {2, 2};
  a.w_norm = b.w_norm = 1.0;
  const Direction avg = average_directions(std::vector<Direction>{a, b});
  EXPECT_EQ(avg.w, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(avg.mu, (std::vector<double>{1, 1}));
  EXPECT_NEAR(avg.w_norm, std::sqrt(0.5), 1e-15);
  EXPECT_EQ(cosine_similarity(a.w, b.w), 0.0);
  EXPECT_NEAR(cosine_similarity(a.w, std::vector<double>{1, 1}), 0.70710678, 1e-8);
}

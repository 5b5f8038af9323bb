// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "corrprobe/metrics.hpp"
#include "corrprobe/synth.hpp"
#include "test_util.hpp"

using namespace corrprobe;
using namespace corrprobe::testing;

namespace {

using Labels = std::vector<std::uint8_t>;

struct Instance {
  std::vector<double> scores;
  Labels labels;
};

// Small integer-valued scores so cross-class ties are common.
Instance random_instance(std::mt19937& gen) {
  std::uniform_int_distribution<int> size(2, 50), level(0, 9), coin(0, 1);
  Instance in;
  const int n = size(gen);
  for (int i = 0; i < n; ++i) {
    in.scores.push_back(level(gen) * 0.25 - 1.0);
    in.labels.push_back(static_cast<std::uint8_t>(coin(gen)));
  }
  in.labels[0] = 1;
  in.labels[1] = 0;
  return in;
}

}  // namespace

TEST(Auroc, Examples) {
  EXPECT_EQ(auroc(std::vector<double>{1, 2, 3, 4}, Labels{0, 0, 1, 1}), 1.0);
  EXPECT_EQ(auroc(std::vector<double>{5, 5, 5, 5}, Labels{0, 1, 0, 1}), 0.5);
  EXPECT_EQ(auroc(std::vector<double>{0.1, 0.2, 0.3, 0.4}, Labels{0, 1, 0, 1}), 0.75);
  EXPECT_EQ(auroc(std::vector<double>{4, 3, 2, 1}, Labels{0, 0, 1, 1}), 0.0);
}

TEST(Auroc, Errors) {
  EXPECT_EQ(error_of([] { auroc(std::vector<double>{1, 2}, Labels{1, 1}); }), Errc::single_class);
  EXPECT_EQ(error_of([] { auroc(std::vector<double>{1, 2}, Labels{0, 0}); }), Errc::single_class);
  EXPECT_EQ(error_of([] { auroc(std::vector<double>{1, std::nan("")}, Labels{0, 1}); }), Errc::nan_score);
  EXPECT_EQ(error_of([] { auroc(std::vector<double>{1, 2, 3}, Labels{0, 1}); }), Errc::count_mismatch);
}

TEST(AurocProperty, EqualsPairwiseOracleExactly) {
  std::mt19937 gen(2024);
  for (int t = 0; t < 2000; ++t) {
    const Instance in = random_instance(gen);
    EXPECT_EQ(auroc(in.scores, in.labels), auroc_pairwise(in.scores, in.labels)) << "instance " << t;
  }
}

TEST(AurocProperty, MonotoneTransformsPreserveValue) {
  std::mt19937 gen(7);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    Instance in = random_instance(gen);
    for (auto& s : in.scores) s += nd(gen) * 1e-3;
    std::vector<double> ex(in.scores), affine(in.scores), cube(in.scores);
    for (auto& s : ex) s = std::exp(s);
    for (auto& s : affine) s = 3.0 * s + 7.0;
    for (auto& s : cube) s = s * s * s;
    const double base = auroc(in.scores, in.labels);
    EXPECT_EQ(auroc(ex, in.labels), base);
    EXPECT_EQ(auroc(affine, in.labels), base);
    EXPECT_EQ(auroc(cube, in.labels), base);
  }
}

TEST(AurocProperty, ComplementWithoutTies) {
  std::mt19937 gen(8);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 200; ++t) {
    Instance in = random_instance(gen);
    for (auto& s : in.scores) s = nd(gen);
    std::vector<double> neg(in.scores);
    for (auto& s : neg) s = -s;
    EXPECT_DOUBLE_EQ(auroc(neg, in.labels), 1.0 - auroc(in.scores, in.labels));
  }
}

TEST(AurocProperty, JointPermutationInvariance) {
  std::mt19937 gen(9);
  for (int t = 0; t < 200; ++t) {
    const Instance in = random_instance(gen);
    std::vector<std::size_t> perm(in.scores.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    Instance p;
    for (const auto i : perm) {
      p.scores.push_back(in.scores[i]);
      p.labels.push_back(in.labels[i]);
    }
    EXPECT_EQ(auroc(p.scores, p.labels), auroc(in.scores, in.labels));
  }
}

TEST(Folds, StratifiedExample) {
  const FoldPlan plan = make_folds(Labels{1, 1, 0, 0}, 2, 0, FoldStrategy::stratified_shuffled);
  for (unsigned f = 0; f < 2; ++f) {
    const auto rows = plan.test_rows(f);
    ASSERT_EQ(rows.size(), 2u);
    int pos = 0;
    for (const auto r : rows) pos += r < 2;
    EXPECT_EQ(pos, 1);
  }
}

TEST(Folds, SequentialBlocks) {
  const FoldPlan plan = make_folds(Labels(10, 0), 5, 0, FoldStrategy::sequential);
  EXPECT_EQ(plan.assignment, (std::vector<std::uint32_t>{0, 0, 1, 1, 2, 2, 3, 3, 4, 4}));
  const FoldPlan uneven = make_folds(Labels(7, 1), 3, 0, FoldStrategy::sequential);
  EXPECT_EQ(uneven.assignment, (std::vector<std::uint32_t>{0, 0, 0, 1, 1, 2, 2}));
}

TEST(Folds, DeterministicAndBalanced) {
  std::mt19937 gen(1);
  std::bernoulli_distribution coin(0.3);
  Labels labels(1000);
  for (auto& l : labels) l = coin(gen);
  for (const unsigned k : {2u, 3u, 5u, 10u}) {
    const FoldPlan a = make_folds(labels, k, 42, FoldStrategy::stratified_shuffled);
    const FoldPlan b = make_folds(labels, k, 42, FoldStrategy::stratified_shuffled);
    EXPECT_EQ(a.assignment, b.assignment);
    for (int cls = 0; cls < 2; ++cls) {
      std::vector<std::size_t> per_fold(k, 0);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) ++per_fold[a.assignment[i]];
      const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
      EXPECT_LE(*hi - *lo, 1u);
    }
    std::vector<std::size_t> totals(k, 0);
    for (const auto f : a.assignment) ++totals[f];
    const auto [lo, hi] = std::minmax_element(totals.begin(), totals.end());
    EXPECT_LE(*hi - *lo, 1u);
  }
  EXPECT_NE(make_folds(labels, 5, 1, FoldStrategy::stratified_shuffled).assignment,
            make_folds(labels, 5, 2, FoldStrategy::stratified_shuffled).assignment);
}

TEST(Folds, TrainAndTestPartitionRows) {
  const FoldPlan plan = make_folds(Labels{1, 0, 1, 0, 1, 0, 1, 0, 1}, 3, 5, FoldStrategy::stratified_shuffled);
  for (unsigned f = 0; f < 3; ++f) {
    auto rows = plan.test_rows(f);
    const auto train = plan.train_rows(f);
    rows.insert(rows.end(), train.begin(), train.end());
    std::sort(rows.begin(), rows.end());
    std::vector<std::size_t> all(9);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(rows, all);
  }
}

TEST(Folds, Errors) {
  EXPECT_EQ(error_of([] { make_folds(Labels{1, 0, 1, 0}, 1, 0, FoldStrategy::sequential); }),
            Errc::invalid_argument);
  EXPECT_EQ(error_of([] { make_folds(Labels{1, 0}, 3, 0, FoldStrategy::sequential); }), Errc::class_too_small);
  EXPECT_EQ(error_of([] { make_folds(Labels{1, 0, 0, 0, 0}, 2, 0, FoldStrategy::stratified_shuffled); }),
            Errc::class_too_small);
  EXPECT_EQ(parse_strategy("sequential"), FoldStrategy::sequential);
  EXPECT_EQ(error_of([] { parse_strategy("random"); }), Errc::invalid_argument);
}

TEST(CrossValidation, SeparableDataIsPerfect) {
  std::vector<std::vector<float>> rows;
  std::vector<int> correct;
  for (int i = 0; i < 30; ++i) {
    correct.push_back(i % 2);
    rows.push_back({i % 2 ? 1.0f : -1.0f});
  }
  const auto ds = dataset_from_rows(rows, correct);
  const EvalResult r = cv_auroc(ds, make_folds(ds.labels, 3, 0, FoldStrategy::stratified_shuffled));
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.std, 0.0);
  ASSERT_EQ(r.auroc_per_fold.size(), 3u);
  EXPECT_EQ(r.n_pos[0] + r.n_neg[0], 10u);
}

TEST(CrossValidation, ShuffledLabelsGiveChance) {
  ActivationMatrix m = random_matrix(2000, 16, 31);
  std::mt19937 gen(32);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> correct(2000);
  for (auto& c : correct) c = coin(gen);
  const auto ds = make_dataset(m, simple_meta(correct));
  const EvalResult r = cv_auroc(ds, make_folds(ds.labels, 5, 0, FoldStrategy::stratified_shuffled));
  EXPECT_NEAR(r.mean, 0.5, 0.05);
}

TEST(CrossValidation, GaussianMatchesClosedForm) {
  GaussianSpec spec;
  spec.n_per_class = 10000;  // n = 20,000 rows
  spec.seed = 11;
  const auto ds = generate(spec);
  const EvalResult r = cv_auroc(ds, make_folds(ds.labels, 3, 0, FoldStrategy::stratified_shuffled), 2);
  EXPECT_NEAR(r.mean, analytic_auc(2.0, 1.0, 1.0), 0.01);
}

TEST(CrossValidation, ParallelFoldsAreBitIdentical) {
  GaussianSpec spec;
  spec.n_per_class = 500;
  spec.d = 8;
  const auto ds = generate(spec);
  const FoldPlan plan = make_folds(ds.labels, 5, 3, FoldStrategy::stratified_shuffled);
  EXPECT_EQ(cv_auroc(ds, plan, 1).auroc_per_fold, cv_auroc(ds, plan, 4).auroc_per_fold);
}

TEST(Summary, PopulationStd) {
  const EvalResult r = summarize_folds({0.5, 0.7, 0.9}, {1, 1, 1}, {1, 1, 1});
  EXPECT_NEAR(r.mean, 0.7, 1e-15);
  EXPECT_NEAR(r.std, std::sqrt(0.08 / 3.0), 1e-15);
}

TEST(Summary, CsvRow) {
  const EvalResult r = summarize_folds({0.5, 1.0}, {1, 1}, {1, 1});
  EXPECT_EQ(eval_csv_header(2), "model_id,train_dataset,test_dataset,layer,k,mean_auroc,std_auroc,fold_0,fold_1\n");
  EXPECT_EQ(eval_csv_row("m", "a", "b", 3, 2, r), "m,a,b,3,2,0.75,0.25,0.5,1\n");
}

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corrprobe/csv.hpp"
#include "corrprobe/error.hpp"
#include "corrprobe/parallel.hpp"
#include "corrprobe/probe.hpp"
#include "corrprobe/rng.hpp"

namespace corrprobe {

EvalResult summarize_folds(std::vector<double> aurocs, std::vector<std::size_t> n_pos,
                           std::vector<std::size_t> n_neg) {
  EvalResult r;
  const double k = static_cast<double>(aurocs.size());
  double sum = 0.0;
  for (const double a : aurocs) sum += a;
  r.mean = aurocs.empty() ? 0.0 : sum / k;
  double ss = 0.0;
  for (const double a : aurocs) ss += (a - r.mean) * (a - r.mean);
  r.std = aurocs.empty() ? 0.0 : std::sqrt(ss / k);
  r.auroc_per_fold = std::move(aurocs);
  r.n_pos = std::move(n_pos);
  r.n_neg = std::move(n_neg);
  return r;
}

const char* strategy_name(FoldStrategy s) noexcept {
  return s == FoldStrategy::sequential ? "sequential" : "stratified_shuffled";
}

FoldStrategy parse_strategy(std::string_view name) {
  if (name == "stratified_shuffled" || name == "stratified") return FoldStrategy::stratified_shuffled;
  if (name == "sequential") return FoldStrategy::sequential;
  fail(Errc::invalid_argument, "unknown fold strategy '" + std::string(name) + "'");
}

std::vector<std::size_t> FoldPlan::test_rows(unsigned fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(unsigned fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) rows.push_back(i);
  }
  return rows;
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) fail(Errc::count_mismatch, "scores and labels differ in length");
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) fail(Errc::nan_score, "NaN score at index " + std::to_string(i));
    n_pos += labels[i] ? 1 : 0;
  }
  const std::uint64_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(Errc::single_class, "AUROC needs both positive and negative labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the positive rank sum; a tie block spanning 0-based positions i..j-1
  // gives each member the doubled average rank (i + 1) + j.
  std::uint64_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    std::uint64_t pos_in_block = 0;
    for (std::size_t t = i; t < j; ++t) pos_in_block += labels[order[t]] ? 1 : 0;
    doubled_rank_sum += pos_in_block * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const std::uint64_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
  return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

FoldPlan make_folds(std::span<const std::uint8_t> labels, unsigned k, std::uint64_t seed,
                    FoldStrategy strategy) {
  if (k < 2) fail(Errc::invalid_argument, "k must be at least 2");
  const std::size_t n = labels.size();
  if (n < k) fail(Errc::class_too_small, "cannot split " + std::to_string(n) + " samples into " +
                                             std::to_string(k) + " folds");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.strategy = strategy;
  plan.assignment.assign(n, 0);

  if (strategy == FoldStrategy::sequential) {
    const std::size_t base = n / k, extra = n % k;
    std::size_t i = 0;
    for (unsigned f = 0; f < k; ++f) {
      const std::size_t len = base + (f < extra ? 1 : 0);
      for (std::size_t t = 0; t < len; ++t) plan.assignment[i++] = f;
    }
    return plan;
  }

  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < n; ++i) members[labels[i] ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (members[c].size() < k) {
      fail(Errc::class_too_small, std::string(c ? "positive" : "negative") + " class has " +
                                      std::to_string(members[c].size()) + " members, fewer than k = " +
                                      std::to_string(k));
    }
  }
  Rng rng(seed);
  std::size_t deal = 0;
  for (auto& group : members) {
    rng.shuffle(std::span<std::size_t>(group));
    for (const std::size_t idx : group) plan.assignment[idx] = static_cast<std::uint32_t>(deal++ % k);
  }
  return plan;
}

EvalResult cv_auroc(const LabeledDataset& data, const FoldPlan& plan, unsigned jobs) {
  if (plan.assignment.size() != data.size()) {
    fail(Errc::count_mismatch, "fold plan covers " + std::to_string(plan.assignment.size()) +
                                   " samples, dataset has " + std::to_string(data.size()));
  }
  std::vector<double> aurocs(plan.k);
  std::vector<std::size_t> n_pos(plan.k), n_neg(plan.k);
  parallel_for(plan.k, jobs, [&](std::size_t f) {
    const auto fold = static_cast<unsigned>(f);
    const Direction dir = fit_direction(data.matrix, data.labels, plan.train_rows(fold));
    const auto test = plan.test_rows(fold);
    const auto scores = score_rows(dir, data.matrix, test);
    std::vector<std::uint8_t> labels(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) labels[i] = data.labels[test[i]];
    aurocs[f] = auroc(scores, labels);
    n_pos[f] = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    n_neg[f] = test.size() - n_pos[f];
  });
  return summarize_folds(std::move(aurocs), std::move(n_pos), std::move(n_neg));
}

std::string eval_csv_header(unsigned k) {
  std::vector<std::string> cols = {"model_id", "train_dataset", "test_dataset", "layer",
                                   "k",        "mean_auroc",    "std_auroc"};
  for (unsigned f = 0; f < k; ++f) cols.push_back("fold_" + std::to_string(f));
  return csv_row(cols);
}

std::string eval_csv_row(std::string_view model_id, std::string_view train_dataset,
                         std::string_view test_dataset, std::uint32_t layer, unsigned k,
                         const EvalResult& result) {
  std::vector<std::string> cols = {std::string(model_id), std::string(train_dataset),
                                   std::string(test_dataset), std::to_string(layer),
                                   std::to_string(k), format_double(result.mean),
                                   format_double(result.std)};
  for (const double a : result.auroc_per_fold) cols.push_back(format_double(a));
  return csv_row(cols);
}

}  // namespace corrprobe

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "corrprobe/csv.hpp"
#include "corrprobe/error.hpp"
#include "corrprobe/parallel.hpp"
#include "corrprobe/rng.hpp"

namespace corrprobe {

namespace {

using Scorer = std::function<std::vector<double>(const LabeledDataset&, std::span<const std::size_t>)>;
// Called once per (training dataset, fold) with that dataset's training rows.
using Trainer = std::function<Scorer(std::size_t dataset, unsigned fold, const LabeledDataset&,
                                     std::span<const std::size_t>)>;

std::vector<std::uint8_t> gather(std::span<const std::uint8_t> labels, std::span<const std::size_t> rows) {
  std::vector<std::uint8_t> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = labels[rows[i]];
  return out;
}

std::size_t count_pos(std::span<const std::uint8_t> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

CrossMatrix run_cross(std::span<const LabeledDataset> datasets, const ProtocolOptions& options,
                      const Trainer& train) {
  if (datasets.empty()) fail(Errc::invalid_argument, "cross matrix needs at least one dataset");
  const std::size_t m = datasets.size();
  const unsigned k = options.k;
  for (const auto& ds : datasets) {
    if (ds.matrix.d != datasets.front().matrix.d) {
      fail(Errc::dimension_mismatch, "dataset " + ds.matrix.dataset_id + " has a different width");
    }
  }

  CrossMatrix out;
  out.k = k;
  out.protocol = protocol_id(options);
  for (const auto& ds : datasets) {
    out.dataset_ids.push_back(ds.matrix.dataset_id);
    out.plans.push_back(make_folds(ds.labels, k, options.seed, options.strategy));
  }

  std::vector<std::vector<std::size_t>> test_rows(m * k);
  for (std::size_t t = 0; t < m; ++t) {
    for (unsigned f = 0; f < k; ++f) test_rows[t * k + f] = out.plans[t].test_rows(f);
  }

  // job (i, f): fit on dataset i without fold f, score fold f of every dataset.
  std::vector<std::vector<double>> auroc_by_job(m * k, std::vector<double>(m));
  parallel_for(m * k, options.jobs, [&](std::size_t job) {
    const std::size_t i = job / k;
    const auto f = static_cast<unsigned>(job % k);
    const Scorer scorer = train(i, f, datasets[i], out.plans[i].train_rows(f));
    for (std::size_t t = 0; t < m; ++t) {
      const auto& rows = test_rows[t * k + f];
      auroc_by_job[job][t] = auroc(scorer(datasets[t], rows), gather(datasets[t].labels, rows));
    }
  });

  out.cells.assign(m, std::vector<EvalResult>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < m; ++t) {
      std::vector<double> folds(k);
      std::vector<std::size_t> n_pos(k), n_neg(k);
      for (unsigned f = 0; f < k; ++f) {
        folds[f] = auroc_by_job[i * k + f][t];
        const auto& rows = test_rows[t * k + f];
        n_pos[f] = count_pos(gather(datasets[t].labels, rows));
        n_neg[f] = rows.size() - n_pos[f];
      }
      out.cells[i][t] = summarize_folds(std::move(folds), std::move(n_pos), std::move(n_neg));
    }
  }
  return out;
}

void check_aligned_layers(const LabeledDataset& ref, const LabeledDataset& other) {
  const std::string where = "layer " + std::to_string(other.matrix.layer);
  if (other.size() != ref.size()) {
    fail(Errc::inconsistent_layers, where + " has " + std::to_string(other.size()) +
                                        " samples, layer " + std::to_string(ref.matrix.layer) +
                                        " has " + std::to_string(ref.size()));
  }
  if (other.matrix.d != ref.matrix.d) fail(Errc::inconsistent_layers, where + " has a different width");
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (other.meta[i].sample_id != ref.meta[i].sample_id || other.labels[i] != ref.labels[i]) {
      fail(Errc::inconsistent_layers, where + ": row " + std::to_string(i) + " (sample_id " +
                                          other.meta[i].sample_id + ") disagrees with the other layers");
    }
  }
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

std::string maybe_number(double v) { return std::isnan(v) ? std::string{} : format_double(v); }

std::string join_gold(const std::vector<std::string>& gold) {
  std::string out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (i != 0) out += " | ";
    out += gold[i];
  }
  return out;
}

}  // namespace

std::string protocol_id(const ProtocolOptions& options) {
  return std::string(strategy_name(options.strategy)) + ";k=" + std::to_string(options.k) +
         ";seed=" + std::to_string(options.seed);
}

LayerSweepResult sweep_layers(std::span<const LabeledDataset> layers, const ProtocolOptions& options) {
  if (layers.empty()) fail(Errc::invalid_argument, "layer sweep needs at least one layer");
  std::vector<std::size_t> order(layers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return layers[a].matrix.layer < layers[b].matrix.layer; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (layers[order[i]].matrix.layer == layers[order[i - 1]].matrix.layer) {
      fail(Errc::inconsistent_layers, "layer " + std::to_string(layers[order[i]].matrix.layer) + " given twice");
    }
  }
  const LabeledDataset& ref = layers[order.front()];
  for (const std::size_t idx : order) check_aligned_layers(ref, layers[idx]);

  LayerSweepResult out;
  out.plan = make_folds(ref.labels, options.k, options.seed, options.strategy);
  out.results.resize(layers.size());
  for (const std::size_t idx : order) out.layers.push_back(layers[idx].matrix.layer);
  parallel_for(order.size(), options.jobs,
               [&](std::size_t i) { out.results[i] = cv_auroc(layers[order[i]], out.plan); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < out.results.size(); ++i) {
    if (out.results[i].mean > out.results[best].mean) best = i;
  }
  out.best_layer = out.layers[best];
  for (std::size_t i = 1; i < out.layers.size(); ++i) {
    out.layer_stride = std::gcd(out.layer_stride, out.layers[i] - out.layers[i - 1]);
  }
  return out;
}

std::string sweep_csv(const LayerSweepResult& sweep, std::string_view model_id,
                      std::string_view dataset_id) {
  std::string header = eval_csv_header(sweep.plan.k);
  header.insert(header.size() - 1, ",is_best");
  std::string out = header;
  for (std::size_t i = 0; i < sweep.layers.size(); ++i) {
    std::string row = eval_csv_row(model_id, dataset_id, dataset_id, sweep.layers[i], sweep.plan.k,
                                   sweep.results[i]);
    row.insert(row.size() - 1, sweep.layers[i] == sweep.best_layer ? ",1" : ",0");
    out += row;
  }
  return out;
}

CrossMatrix cross_matrix(std::span<const LabeledDataset> datasets, const ProtocolOptions& options) {
  std::vector<std::vector<Direction>> fold_dirs(datasets.size(), std::vector<Direction>(options.k));
  const Trainer train = [&](std::size_t i, unsigned f, const LabeledDataset& ds,
                            std::span<const std::size_t> rows) -> Scorer {
    fold_dirs[i][f] = fit_direction(ds.matrix, ds.labels, rows);
    const Direction* dir = &fold_dirs[i][f];
    return [dir](const LabeledDataset& test, std::span<const std::size_t> test_rows) {
      return score_rows(*dir, test.matrix, test_rows);
    };
  };
  CrossMatrix out = run_cross(datasets, options, train);
  for (const auto& dirs : fold_dirs) out.fold_averaged.push_back(average_directions(dirs));
  return out;
}

CrossMatrix assessor_cross_matrix(std::span<const EmbeddingDataset> datasets,
                                  const ProtocolOptions& options, const LogRegOptions& logreg) {
  const Trainer train = [&](std::size_t, unsigned, const LabeledDataset& ds,
                            std::span<const std::size_t> rows) -> Scorer {
    auto model = std::make_shared<LogRegModel>(fit_logreg(ds, rows, logreg));
    return [model](const LabeledDataset& test, std::span<const std::size_t> test_rows) {
      return predict_proba(*model, test.matrix, test_rows);
    };
  };
  return run_cross(datasets, options, train);
}

std::string cross_csv(const CrossMatrix& matrix, std::string_view model_id, std::uint32_t layer) {
  std::string out = eval_csv_header(matrix.k);
  for (std::size_t i = 0; i < matrix.cells.size(); ++i) {
    for (std::size_t t = 0; t < matrix.cells[i].size(); ++t) {
      out += eval_csv_row(model_id, matrix.dataset_ids[i], matrix.dataset_ids[t], layer, matrix.k,
                          matrix.cells[i][t]);
    }
  }
  return out;
}

std::vector<std::size_t> default_curve_sizes(std::size_t n) {
  std::vector<std::size_t> sizes;
  for (std::size_t s = 10; s <= 10240 && s <= n; s *= 2) sizes.push_back(s);
  return sizes;
}

std::vector<std::size_t> stratified_subsample(std::span<const std::uint8_t> labels, std::size_t size,
                                              std::uint64_t stream) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < n; ++i) members[labels[i] ? 1 : 0].push_back(i);
  if (size < 2 || size > n || members[0].empty() || members[1].empty()) {
    fail(Errc::class_too_small, "cannot draw a subsample of size " + std::to_string(size) +
                                    " with both classes from " + std::to_string(n) + " samples");
  }
  auto n_pos = static_cast<std::size_t>(std::llround(static_cast<double>(size) *
                                                     static_cast<double>(members[1].size()) /
                                                     static_cast<double>(n)));
  n_pos = std::clamp<std::size_t>(n_pos, 1, size - 1);
  n_pos = std::min(n_pos, members[1].size());
  std::size_t n_neg = size - n_pos;
  if (n_neg > members[0].size()) {
    n_neg = members[0].size();
    n_pos = size - n_neg;
  }
  Rng rng(stream);
  std::vector<std::size_t> picked;
  picked.reserve(size);
  const std::size_t take[2] = {n_neg, n_pos};
  for (int c = 0; c < 2; ++c) {
    rng.shuffle(std::span<std::size_t>(members[c]));
    picked.insert(picked.end(), members[c].begin(), members[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

SampleCurve sample_curve(const LabeledDataset& train, std::span<const LabeledDataset> tests,
                         std::span<const std::size_t> sizes, unsigned reps, std::uint64_t seed,
                         unsigned jobs) {
  if (reps == 0) fail(Errc::invalid_argument, "reps must be >= 1");
  if (sizes.empty()) fail(Errc::invalid_argument, "no subsample sizes");
  if (tests.empty()) fail(Errc::invalid_argument, "no test datasets");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0 && sizes[i] <= sizes[i - 1]) fail(Errc::invalid_argument, "sizes must be strictly increasing");
    if (sizes[i] > train.size()) {
      fail(Errc::invalid_argument, "size " + std::to_string(sizes[i]) + " exceeds the " +
                                       std::to_string(train.size()) + " training samples");
    }
  }
  if (reps >= (1u << 20)) fail(Errc::invalid_argument, "reps must be below 2^20");

  SampleCurve curve;
  curve.sizes.assign(sizes.begin(), sizes.end());
  curve.reps = reps;
  for (const auto& t : tests) {
    if (t.matrix.d != train.matrix.d) fail(Errc::dimension_mismatch, "test dataset " + t.matrix.dataset_id + " has a different width");
    curve.test_ids.push_back(t.matrix.dataset_id);
  }
  const std::size_t nt = tests.size();
  curve.aurocs.assign(sizes.size(), std::vector<std::vector<double>>(nt, std::vector<double>(reps)));

  parallel_for(sizes.size() * reps, jobs, [&](std::size_t job) {
    const std::size_t si = job / reps;
    const std::size_t r = job % reps;
    const auto rows = stratified_subsample(train.labels, sizes[si], stream_seed(seed, (si << 20) | r));
    const Direction dir = fit_direction(train.matrix, train.labels, rows);
    for (std::size_t t = 0; t < nt; ++t) {
      curve.aurocs[si][t][r] = auroc(score_batch(dir, tests[t].matrix), tests[t].labels);
    }
  });

  curve.mean.assign(sizes.size(), std::vector<double>(nt));
  curve.std.assign(sizes.size(), std::vector<double>(nt));
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (std::size_t t = 0; t < nt; ++t) {
      const EvalResult s = summarize_folds(curve.aurocs[si][t], {}, {});
      curve.mean[si][t] = s.mean;
      curve.std[si][t] = s.std;
    }
  }
  return curve;
}

std::string curve_csv(const SampleCurve& curve, std::string_view train_dataset) {
  std::vector<std::string> header = {"train_dataset", "test_dataset", "size", "reps", "mean_auroc", "std_auroc"};
  for (unsigned r = 0; r < curve.reps; ++r) header.push_back("rep_" + std::to_string(r));
  std::string out = csv_row(header);
  for (std::size_t si = 0; si < curve.sizes.size(); ++si) {
    for (std::size_t t = 0; t < curve.test_ids.size(); ++t) {
      std::vector<std::string> row = {std::string(train_dataset), curve.test_ids[t],
                                      std::to_string(curve.sizes[si]), std::to_string(curve.reps),
                                      format_double(curve.mean[si][t]), format_double(curve.std[si][t])};
      for (const double a : curve.aurocs[si][t]) row.push_back(format_double(a));
      out += csv_row(row);
    }
  }
  return out;
}

std::vector<std::vector<double>> cosine_matrix(std::span<const Direction> directions) {
  const std::size_t m = directions.size();
  for (const auto& d : directions) {
    if (d.d != directions.front().d) fail(Errc::dimension_mismatch, "directions differ in width");
  }
  std::vector<std::vector<double>> out(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      out[i][j] = out[j][i] = cosine_similarity(directions[i].w, directions[j].w);
    }
  }
  return out;
}

std::string cosine_csv(std::span<const std::string> names, const std::vector<std::vector<double>>& matrix) {
  std::vector<std::string> header = {"direction"};
  header.insert(header.end(), names.begin(), names.end());
  std::string out = csv_row(header);
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    std::vector<std::string> row = {names[i]};
    for (const double c : matrix[i]) row.push_back(format_double(c));
    out += csv_row(row);
  }
  return out;
}

IdkReport idk_report(const Direction& dir, const LabeledDataset& data, unsigned jobs) {
  const auto scores = score_batch(dir, data.matrix, jobs);
  IdkReport rep;
  rep.total = scores.size();
  double sum = 0.0;
  for (const double s : scores) sum += s;
  rep.global_mean = scores.empty() ? nan() : sum / static_cast<double>(scores.size());
  double ss = 0.0;
  for (const double s : scores) ss += (s - rep.global_mean) * (s - rep.global_mean);
  rep.global_std = scores.empty() ? nan() : std::sqrt(ss / static_cast<double>(scores.size()));
  rep.range_lo = rep.global_mean - 3.0 * rep.global_std;
  rep.bin_width = 6.0 * rep.global_std / static_cast<double>(kIdkBins);

  const Category cats[3] = {Category::right, Category::wrong, Category::idk};
  for (int c = 0; c < 3; ++c) {
    CategorySummary& g = rep.groups[c];
    g.category = cats[c];
    g.histogram.assign(kIdkBins, 0);
    double gsum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (data.meta[i].category != g.category) continue;
      ++g.count;
      gsum += scores[i];
      const double s = scores[i];
      if (rep.bin_width > 0.0) {
        const double pos = (s - rep.range_lo) / rep.bin_width;
        if (pos < 0.0) {
          ++g.below_range;
        } else if (pos > static_cast<double>(kIdkBins)) {
          ++g.above_range;
        } else {
          ++g.histogram[std::min<std::size_t>(static_cast<std::size_t>(pos), kIdkBins - 1)];
        }
      } else {
        ++g.histogram[kIdkBins / 2];  // every score equals the mean
      }
    }
    if (g.count == 0) {
      g.mean = g.std = nan();
      continue;
    }
    g.mean = gsum / static_cast<double>(g.count);
    double gss = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (data.meta[i].category == g.category) gss += (scores[i] - g.mean) * (scores[i] - g.mean);
    }
    g.std = std::sqrt(gss / static_cast<double>(g.count));
  }
  return rep;
}

std::string idk_summary_csv(const IdkReport& report) {
  std::string out = csv_row({"category", "count", "mean_score", "std_score", "below_range", "above_range"});
  for (const auto& g : report.groups) {
    out += csv_row({category_name(g.category), std::to_string(g.count), maybe_number(g.mean),
                    maybe_number(g.std), std::to_string(g.below_range), std::to_string(g.above_range)});
  }
  out += csv_row({"all", std::to_string(report.total), maybe_number(report.global_mean),
                  maybe_number(report.global_std), "0", "0"});
  return out;
}

std::string idk_histogram_csv(const IdkReport& report) {
  std::string out = csv_row({"category", "bin", "bin_lo", "bin_hi", "count"});
  for (const auto& g : report.groups) {
    for (std::size_t b = 0; b < kIdkBins; ++b) {
      const double lo = report.range_lo + static_cast<double>(b) * report.bin_width;
      out += csv_row({category_name(g.category), std::to_string(b), maybe_number(lo),
                      maybe_number(lo + report.bin_width), std::to_string(g.histogram[b])});
    }
  }
  return out;
}

Extremes extremes(const Direction& dir, const LabeledDataset& data, std::size_t top_k, unsigned jobs) {
  const auto scores = score_batch(dir, data.matrix, jobs);
  std::vector<std::size_t> groups[2];
  for (std::size_t i = 0; i < scores.size(); ++i) groups[data.labels[i] ? 1 : 0].push_back(i);

  auto make_item = [&](std::size_t row) {
    const SampleMeta& m = data.meta[row];
    return ExtremeItem{row, m.sample_id, m.question, m.answer, m.gold, scores[row]};
  };
  auto rank = [&](std::vector<std::size_t> rows, bool high) {
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      return high ? scores[a] > scores[b] : scores[a] < scores[b];
    });
    rows.resize(std::min(rows.size(), top_k));
    std::vector<ExtremeItem> items;
    for (const std::size_t r : rows) items.push_back(make_item(r));
    return items;
  };
  Extremes ex;
  ex.correct_high = rank(groups[1], true);
  ex.correct_low = rank(groups[1], false);
  ex.incorrect_high = rank(groups[0], true);
  ex.incorrect_low = rank(groups[0], false);
  return ex;
}

std::string extremes_csv(const Extremes& ex) {
  std::string out = csv_row({"group", "rank", "sample_id", "score", "question", "answer", "gold"});
  const std::pair<const char*, const std::vector<ExtremeItem>*> lists[] = {
      {"correct_high", &ex.correct_high},
      {"correct_low", &ex.correct_low},
      {"incorrect_high", &ex.incorrect_high},
      {"incorrect_low", &ex.incorrect_low}};
  for (const auto& [name, items] : lists) {
    for (std::size_t r = 0; r < items->size(); ++r) {
      const auto& it = (*items)[r];
      out += csv_row({name, std::to_string(r + 1), it.sample_id, format_double(it.score), it.question,
                      it.answer, join_gold(it.gold)});
    }
  }
  return out;
}

std::string row_scores_csv(std::span<const double> scores) {
  std::string out = csv_row({"row", "score"});
  for (std::size_t i = 0; i < scores.size(); ++i) out += csv_row({std::to_string(i), format_double(scores[i])});
  return out;
}

std::string scores_csv(const LabeledDataset& data, std::span<const double> scores) {
  std::string out = csv_row({"sample_id", "correct", "category", "score"});
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out += csv_row({data.meta[i].sample_id, data.meta[i].correct ? "1" : "0",
                    category_name(data.meta[i].category), format_double(scores[i])});
  }
  return out;
}

}  // namespace corrprobe

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "corrprobe/csv.hpp"
#include "corrprobe/error.hpp"
#include "corrprobe/parallel.hpp"
#include "json.hpp"

namespace corrprobe {

namespace {

constexpr const char* kDirectionFormat = "corrprobe-direction";

double euclidean_norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

template <class T>
double project(const Direction& dir, std::span<const T> h) {
  if (h.size() != dir.d) {
    fail(Errc::dimension_mismatch, "vector has dimension " + std::to_string(h.size()) +
                                       ", direction has " + std::to_string(dir.d));
  }
  double dot = 0.0;
  for (std::size_t j = 0; j < dir.d; ++j) {
    dot += (static_cast<double>(h[j]) - dir.mu[j]) * dir.w[j];
  }
  return dot / dir.w_norm;
}

}  // namespace

Direction fit_direction(const LabeledDataset& data) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_direction(data.matrix, data.labels, rows);
}

Direction fit_direction(const ActivationMatrix& matrix, std::span<const std::uint8_t> labels,
                        std::span<const std::size_t> rows) {
  if (labels.size() != matrix.n) fail(Errc::count_mismatch, "labels do not match matrix rows");
  const std::size_t d = matrix.d;
  std::vector<double> sum_true(d, 0.0), sum_false(d, 0.0);
  std::size_t n_true = 0, n_false = 0;
  for (const std::size_t r : rows) {
    const auto row = matrix.row(r);
    auto& acc = labels[r] ? sum_true : sum_false;
    (labels[r] ? n_true : n_false) += 1;
    for (std::size_t j = 0; j < d; ++j) acc[j] += row[j];
  }
  if (n_true == 0 || n_false == 0) {
    fail(Errc::empty_class, "cannot fit a direction: " + std::to_string(n_true) + " correct and " +
                                std::to_string(n_false) + " incorrect samples");
  }
  Direction dir;
  dir.d = d;
  dir.layer = matrix.layer;
  dir.model_id = matrix.model_id;
  dir.train_dataset_id = matrix.dataset_id;
  dir.n_true = n_true;
  dir.n_false = n_false;
  dir.w.resize(d);
  dir.mu.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double mean_true = sum_true[j] / static_cast<double>(n_true);
    const double mean_false = sum_false[j] / static_cast<double>(n_false);
    dir.w[j] = mean_true - mean_false;
    dir.mu[j] = 0.5 * (mean_true + mean_false);
  }
  dir.w_norm = euclidean_norm(dir.w);
  if (!(dir.w_norm >= kDegenerateNorm)) {
    fail(Errc::degenerate_direction, "centroids coincide (|w| = " + format_double(dir.w_norm) + ")");
  }
  return dir;
}

double score(const Direction& dir, std::span<const float> h) { return project(dir, h); }
double score(const Direction& dir, std::span<const double> h) { return project(dir, h); }

std::vector<double> score_rows(const Direction& dir, const ActivationMatrix& matrix,
                               std::span<const std::size_t> rows, unsigned jobs) {
  if (matrix.d != dir.d) {
    fail(Errc::dimension_mismatch, "matrix width " + std::to_string(matrix.d) +
                                       " does not match direction width " + std::to_string(dir.d));
  }
  std::vector<double> out(rows.size());
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (rows.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, jobs, [&](std::size_t b) {
    const std::size_t end = std::min(rows.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) out[i] = project(dir, matrix.row(rows[i]));
  });
  return out;
}

std::vector<double> score_batch(const Direction& dir, const ActivationMatrix& matrix,
                                unsigned jobs) {
  std::vector<std::size_t> rows(matrix.n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return score_rows(dir, matrix, rows, jobs);
}

Direction average_directions(std::span<const Direction> dirs) {
  if (dirs.empty()) fail(Errc::invalid_argument, "no directions to average");
  Direction avg = dirs.front();
  const double k = static_cast<double>(dirs.size());
  std::fill(avg.w.begin(), avg.w.end(), 0.0);
  std::fill(avg.mu.begin(), avg.mu.end(), 0.0);
  avg.n_true = avg.n_false = 0;
  for (const auto& dir : dirs) {
    if (dir.d != avg.d) fail(Errc::dimension_mismatch, "cannot average directions of different width");
    for (std::size_t j = 0; j < avg.d; ++j) {
      avg.w[j] += dir.w[j];
      avg.mu[j] += dir.mu[j];
    }
    avg.n_true += dir.n_true;
    avg.n_false += dir.n_false;
  }
  for (std::size_t j = 0; j < avg.d; ++j) {
    avg.w[j] /= k;
    avg.mu[j] /= k;
  }
  avg.n_true /= dirs.size();
  avg.n_false /= dirs.size();
  avg.w_norm = euclidean_norm(avg.w);
  if (!(avg.w_norm >= kDegenerateNorm)) {
    fail(Errc::degenerate_direction, "averaged direction has zero norm");
  }
  return avg;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(Errc::dimension_mismatch, "cosine of vectors of different width");
  const double na = euclidean_norm(a), nb = euclidean_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) fail(Errc::degenerate_direction, "cosine of a zero-norm vector");
  double dot = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * b[j];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

void save_direction(const Direction& dir, const std::filesystem::path& path) {
  // Written by hand so every coordinate carries 17 significant digits.
  std::string out = "{\n";
  out += "  \"format\": \"" + std::string(kDirectionFormat) + "\",\n";
  out += "  \"version\": 1,\n";
  out += "  \"model_id\": " + nlohmann::json(dir.model_id).dump() + ",\n";
  out += "  \"train_dataset_id\": " + nlohmann::json(dir.train_dataset_id).dump() + ",\n";
  out += "  \"layer\": " + std::to_string(dir.layer) + ",\n";
  out += "  \"d\": " + std::to_string(dir.d) + ",\n";
  out += "  \"n_true\": " + std::to_string(dir.n_true) + ",\n";
  out += "  \"n_false\": " + std::to_string(dir.n_false) + ",\n";
  out += "  \"w_norm\": " + format_double(dir.w_norm) + ",\n";
  out += "  \"w\": " + json_number_array(dir.w) + ",\n";
  out += "  \"mu\": " + json_number_array(dir.mu) + "\n";
  out += "}\n";
  write_text(path, out);
}

Direction load_direction(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, path.string() + ": cannot open direction file");
  const std::string where = path.string();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::schema, where + ": " + e.what());
  }
  if (!j.is_object()) fail(Errc::schema, where + ": not a JSON object");
  for (const char* key : {"model_id", "train_dataset_id", "layer", "d", "n_true", "n_false",
                          "w_norm", "w", "mu"}) {
    if (!j.contains(key)) fail(Errc::schema, where + ": missing field \"" + key + "\"");
  }
  if (j.contains("format") && j["format"] != kDirectionFormat) {
    fail(Errc::schema, where + ": not a direction file");
  }
  Direction dir;
  try {
    dir.model_id = j["model_id"].get<std::string>();
    dir.train_dataset_id = j["train_dataset_id"].get<std::string>();
    dir.layer = j["layer"].get<std::uint32_t>();
    dir.d = j["d"].get<std::size_t>();
    dir.n_true = j["n_true"].get<std::size_t>();
    dir.n_false = j["n_false"].get<std::size_t>();
    dir.w_norm = j["w_norm"].get<double>();
    dir.w = j["w"].get<std::vector<double>>();
    dir.mu = j["mu"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::schema, where + ": " + e.what());
  }
  if (dir.w.size() != dir.d || dir.mu.size() != dir.d) {
    fail(Errc::dimension_mismatch, where + ": w/mu length differs from d = " + std::to_string(dir.d));
  }
  if (!(dir.w_norm >= kDegenerateNorm)) fail(Errc::degenerate_direction, where + ": |w| is zero");
  const double norm = euclidean_norm(dir.w);
  if (std::abs(norm - dir.w_norm) > 1e-9 * norm) {
    fail(Errc::schema, where + ": w_norm does not match the norm of w");
  }
  return dir;
}

}  // namespace corrprobe

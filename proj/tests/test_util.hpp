// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only helpers and independent oracles. Nothing here calls into the code
// paths the oracles check.

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <unistd.h>
#include <string>
#include <vector>

#include "corrprobe/activation_store.hpp"
#include "corrprobe/error.hpp"

namespace corrprobe::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("corrprobe_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Pairwise Mann-Whitney count: 2 per win, 1 per tie, over 2 * n_pos * n_neg.
inline double auroc_pairwise(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  std::uint64_t doubled = 0, n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i]) ++n_pos; else ++n_neg;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) doubled += 2;
      else if (scores[i] == scores[j]) doubled += 1;
    }
  }
  return static_cast<double>(doubled) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

/// Column means of the rows whose label equals `label`, summed column-first.
inline std::vector<double> column_means(const ActivationMatrix& m, std::span<const std::uint8_t> labels,
                                        std::uint8_t label) {
  std::vector<double> out(m.d, 0.0);
  for (std::size_t j = 0; j < m.d; ++j) {
    long double sum = 0.0L;
    std::size_t count = 0;
    for (std::size_t i = 0; i < m.n; ++i) {
      if (labels[i] != label) continue;
      sum += m.values[i * m.d + j];
      ++count;
    }
    out[j] = static_cast<double>(sum / static_cast<long double>(count));
  }
  return out;
}

inline ActivationMatrix random_matrix(std::size_t n, std::size_t d, std::uint32_t seed, float scale = 1.0f) {
  std::mt19937 gen(seed);
  std::normal_distribution<float> dist(0.0f, scale);
  ActivationMatrix m;
  m.n = n;
  m.d = d;
  m.layer = seed % 80;
  m.values.resize(n * d);
  for (auto& v : m.values) v = dist(gen);
  return m;
}

inline std::vector<SampleMeta> simple_meta(std::span<const int> correct, const std::string& dataset = "ds") {
  std::vector<SampleMeta> meta;
  for (std::size_t i = 0; i < correct.size(); ++i) {
    SampleMeta m;
    m.sample_id = dataset + "-" + std::to_string(i);
    m.dataset_id = dataset;
    m.question = "q" + std::to_string(i);
    m.gold = {"g" + std::to_string(i)};
    m.answer = correct[i] ? m.gold.front() : "other";
    m.correct = correct[i] != 0;
    m.category = m.correct ? Category::right : Category::wrong;
    meta.push_back(std::move(m));
  }
  return meta;
}

inline LabeledDataset dataset_from_rows(const std::vector<std::vector<float>>& rows, std::vector<int> correct,
                                        const std::string& dataset = "ds") {
  ActivationMatrix m;
  m.n = rows.size();
  m.d = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
  m.dataset_id = dataset;
  return make_dataset(std::move(m), simple_meta(correct, dataset));
}

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline Errc error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::ok;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline double softplus_oracle(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// Mean log-loss in z-scored coordinates plus (lambda/2) w^2, bias minimized by 1-D Newton;
/// the weight is scanned over [-10, 10] in steps of 1e-4.
struct GridOracle {
  std::vector<double> z;
  std::vector<int> y;
  double lambda;

  double loss(double w, double b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double t = w * z[i] + b;
      s += softplus_oracle(t) - (y[i] ? t : 0.0);
    }
    return s / static_cast<double>(z.size()) + 0.5 * lambda * w * w;
  }

  double best_bias(double w, double b) const {
    for (int it = 0; it < 50; ++it) {
      double g = 0.0, h = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-(w * z[i] + b)));
        g += p - y[i];
        h += p * (1.0 - p);
      }
      const double step = g / h;
      b -= step;
      if (std::abs(step) < 1e-13) break;
    }
    return b;
  }

  double argmin_weight() const {
    double best_w = 0.0, best_f = std::numeric_limits<double>::infinity(), b = 0.0;
    for (long k = -100000; k <= 100000; ++k) {
      const double w = static_cast<double>(k) * 1e-4;
      b = best_bias(w, b);
      const double f = loss(w, b);
      if (f < best_f) {
        best_f = f;
        best_w = w;
      }
    }
    return best_w;
  }
};

inline GridOracle grid_oracle_for(const LabeledDataset& ds, double lambda) {
  GridOracle o;
  o.lambda = lambda;
  long double mean = 0, var = 0;
  for (const float v : ds.matrix.values) mean += v;
  mean /= ds.size();
  for (const float v : ds.matrix.values) var += (v - mean) * (v - mean);
  const long double sd = std::sqrt(var / ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    o.z.push_back(static_cast<double>((ds.matrix.values[i] - mean) / sd));
    o.y.push_back(ds.labels[i]);
  }
  return o;
}

}  // namespace corrprobe::testing

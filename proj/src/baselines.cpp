// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "corrprobe/csv.hpp"
#include "corrprobe/error.hpp"
#include "json.hpp"

namespace corrprobe {

namespace {

constexpr const char* kLogRegFormat = "corrprobe-logreg";
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;

double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Logistic objective over a row selection. Parameters are packed as
// [w_0 .. w_{e-1}, bias]; features are standardized on the fly.
class Objective {
 public:
  Objective(const ActivationMatrix& x, std::span<const std::uint8_t> labels,
            std::span<const std::size_t> rows, std::span<const double> mean,
            std::span<const double> scale, double lambda)
      : x_(x), labels_(labels), rows_(rows), mean_(mean), scale_(scale), lambda_(lambda) {}

  std::size_t dim() const { return x_.d + 1; }

  // t_i = z_i . w + b
  void linear(std::span<const double> params, std::vector<double>& t) const {
    const std::size_t e = x_.d;
    std::vector<double> v(e);
    for (std::size_t j = 0; j < e; ++j) v[j] = params[j] / scale_[j];
    t.resize(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto row = x_.row(rows_[i]);
      double s = 0.0;
      for (std::size_t j = 0; j < e; ++j) s += (row[j] - mean_[j]) * v[j];
      t[i] = s + params[e];
    }
  }

  // out = (1/n) Z^T r over weights, (1/n) sum r for the bias slot.
  void transpose(std::span<const double> r, std::vector<double>& out) const {
    const std::size_t e = x_.d;
    out.assign(e + 1, 0.0);
    double rsum = 0.0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const auto row = x_.row(rows_[i]);
      const double ri = r[i];
      for (std::size_t j = 0; j < e; ++j) out[j] += ri * (row[j] - mean_[j]);
      rsum += ri;
    }
    const double inv_n = 1.0 / static_cast<double>(rows_.size());
    for (std::size_t j = 0; j < e; ++j) out[j] = out[j] / scale_[j] * inv_n;
    out[e] = rsum * inv_n;
  }

  double value(std::span<const double> params) const {
    std::vector<double> t;
    linear(params, t);
    return value_from_linear(params, t);
  }

  double value_from_linear(std::span<const double> params, std::span<const double> t) const {
    double loss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) loss += softplus(t[i]) - (labels_[rows_[i]] ? t[i] : 0.0);
    loss /= static_cast<double>(t.size());
    double reg = 0.0;
    for (std::size_t j = 0; j < x_.d; ++j) reg += params[j] * params[j];
    return loss + 0.5 * lambda_ * reg;
  }

  // Gradient and the per-row curvature p(1-p) at params.
  void gradient(std::span<const double> params, std::span<const double> t, std::vector<double>& grad,
                std::vector<double>& curvature) const {
    std::vector<double> resid(t.size());
    curvature.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double p = sigmoid(t[i]);
      resid[i] = p - (labels_[rows_[i]] ? 1.0 : 0.0);
      curvature[i] = p * (1.0 - p);
    }
    transpose(resid, grad);
    for (std::size_t j = 0; j < x_.d; ++j) grad[j] += lambda_ * params[j];
  }

  void hessian_times(std::span<const double> curvature, std::span<const double> v,
                     std::vector<double>& out) const {
    std::vector<double> zv;
    linear(v, zv);
    for (std::size_t i = 0; i < zv.size(); ++i) zv[i] *= curvature[i];
    transpose(zv, out);
    for (std::size_t j = 0; j < x_.d; ++j) out[j] += lambda_ * v[j];
  }

 private:
  const ActivationMatrix& x_;
  std::span<const std::uint8_t> labels_;
  std::span<const std::size_t> rows_;
  std::span<const double> mean_;
  std::span<const double> scale_;
  double lambda_;
};

// Approximately solves H s = -g by conjugate gradients.
std::vector<double> newton_step(const Objective& obj, std::span<const double> curvature,
                                std::span<const double> grad) {
  const std::size_t n = grad.size();
  std::vector<double> s(n, 0.0), r(n), p(n), hp;
  for (std::size_t i = 0; i < n; ++i) r[i] = -grad[i];
  p = r;
  double rs = dot(r, r);
  const double gnorm = std::sqrt(rs);
  const double stop = std::min(0.5, std::sqrt(gnorm)) * gnorm;
  const std::size_t max_cg = std::min<std::size_t>(2 * n, 500);
  for (std::size_t it = 0; it < max_cg && std::sqrt(rs) > stop; ++it) {
    obj.hessian_times(curvature, p, hp);
    const double php = dot(p, hp);
    if (!(php > 0.0)) break;
    const double alpha = rs / php;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] += alpha * p[i];
      r[i] -= alpha * hp[i];
    }
    const double rs_next = dot(r, r);
    const double beta = rs_next / rs;
    rs = rs_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  if (dot(s, grad) >= 0.0) {
    for (std::size_t i = 0; i < n; ++i) s[i] = -grad[i];
  }
  return s;
}

void check_training_rows(const EmbeddingDataset& data, std::span<const std::size_t> rows) {
  std::size_t pos = 0;
  for (const std::size_t r : rows) {
    if (r >= data.size()) fail(Errc::invalid_argument, "training row out of range");
    pos += data.labels[r];
  }
  if (pos == 0 || pos == rows.size()) {
    fail(Errc::single_class, "logistic regression needs both classes in the training rows");
  }
  for (const std::size_t r : rows) {
    for (const float v : data.matrix.row(r)) {
      if (!std::isfinite(v)) fail(Errc::non_finite, "non-finite feature in sample " + data.meta[r].sample_id);
    }
  }
}

}  // namespace

LogRegModel fit_logreg(const EmbeddingDataset& data, std::span<const std::size_t> rows,
                       const LogRegOptions& options) {
  if (!(options.l2_lambda >= 0.0)) fail(Errc::invalid_argument, "l2_lambda must be >= 0");
  if (!(options.tol > 0.0)) fail(Errc::invalid_argument, "tol must be positive");
  check_training_rows(data, rows);
  const std::size_t e = data.matrix.d;

  LogRegModel model;
  model.l2_lambda = options.l2_lambda;
  model.embedding_model_id = data.matrix.model_id;
  model.feature_mean.assign(e, 0.0);
  model.feature_scale.assign(e, 0.0);
  for (const std::size_t r : rows) {
    const auto row = data.matrix.row(r);
    for (std::size_t j = 0; j < e; ++j) model.feature_mean[j] += row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (double& m : model.feature_mean) m *= inv_n;
  for (const std::size_t r : rows) {
    const auto row = data.matrix.row(r);
    for (std::size_t j = 0; j < e; ++j) {
      const double c = row[j] - model.feature_mean[j];
      model.feature_scale[j] += c * c;
    }
  }
  for (double& s : model.feature_scale) {
    s = std::sqrt(s * inv_n);
    if (!(s > 1e-12)) s = 1.0;
  }

  const Objective obj(data.matrix, data.labels, rows, model.feature_mean, model.feature_scale,
                      options.l2_lambda);
  std::vector<double> params(e + 1, 0.0), trial(e + 1), t, t_trial, grad, curvature;
  obj.linear(params, t);
  double f = obj.value_from_linear(params, t);
  obj.gradient(params, t, grad, curvature);

  for (;;) {
    model.loss_history.push_back(f);
    model.grad_inf_norm = inf_norm(grad);
    if (model.grad_inf_norm <= options.tol) {
      model.converged = true;
      break;
    }
    if (model.iterations >= options.max_iter) break;

    const std::vector<double> step = newton_step(obj, curvature, grad);
    const double slope = dot(grad, step);
    double size = 1.0;
    bool accepted = false;
    std::vector<double> grad_trial, curv_trial;
    for (int h = 0; h < kMaxHalvings; ++h, size *= 0.5) {
      for (std::size_t i = 0; i <= e; ++i) trial[i] = params[i] + size * step[i];
      obj.linear(trial, t_trial);
      const double f_trial = obj.value_from_linear(trial, t_trial);
      if (f_trial <= f + kArmijo * size * slope) {
        accepted = true;
      } else if (f_trial <= f) {
        // Near the optimum the decrease can vanish below rounding; still take
        // the step if it shrinks the gradient.
        obj.gradient(trial, t_trial, grad_trial, curv_trial);
        accepted = inf_norm(grad_trial) < model.grad_inf_norm;
      }
      if (accepted) {
        params.swap(trial);
        t.swap(t_trial);
        f = f_trial;
        break;
      }
    }
    if (!accepted) break;
    ++model.iterations;
    obj.gradient(params, t, grad, curvature);
  }

  model.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(e));
  model.bias = params[e];
  return model;
}

LogRegModel fit_logreg(const EmbeddingDataset& data, const LogRegOptions& options) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return fit_logreg(data, rows, options);
}

double logreg_objective(const LogRegModel& model, const EmbeddingDataset& data,
                        std::span<const std::size_t> rows) {
  if (model.weights.size() != data.matrix.d) fail(Errc::dimension_mismatch, "model width differs from data");
  const Objective obj(data.matrix, data.labels, rows, model.feature_mean, model.feature_scale,
                      model.l2_lambda);
  std::vector<double> params = model.weights;
  params.push_back(model.bias);
  return obj.value(params);
}

std::vector<double> predict_proba(const LogRegModel& model, const ActivationMatrix& embeddings,
                                  std::span<const std::size_t> rows) {
  const std::size_t e = model.weights.size();
  if (embeddings.d != e) {
    fail(Errc::dimension_mismatch, "embeddings have width " + std::to_string(embeddings.d) +
                                       ", model expects " + std::to_string(e));
  }
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = embeddings.row(rows[i]);
    double t = model.bias;
    for (std::size_t j = 0; j < e; ++j) {
      t += model.weights[j] * ((row[j] - model.feature_mean[j]) / model.feature_scale[j]);
    }
    out[i] = sigmoid(t);
  }
  return out;
}

std::vector<double> predict_proba(const LogRegModel& model, const ActivationMatrix& embeddings) {
  std::vector<std::size_t> rows(embeddings.n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return predict_proba(model, embeddings, rows);
}

void save_logreg(const LogRegModel& model, const std::filesystem::path& path) {
  std::string out = "{\n";
  out += "  \"format\": \"" + std::string(kLogRegFormat) + "\",\n";
  out += "  \"version\": 1,\n";
  out += "  \"embedding_model_id\": " + nlohmann::json(model.embedding_model_id).dump() + ",\n";
  out += "  \"d\": " + std::to_string(model.weights.size()) + ",\n";
  out += "  \"l2_lambda\": " + format_double(model.l2_lambda) + ",\n";
  out += "  \"converged\": " + std::string(model.converged ? "true" : "false") + ",\n";
  out += "  \"iterations\": " + std::to_string(model.iterations) + ",\n";
  out += "  \"grad_inf_norm\": " + format_double(model.grad_inf_norm) + ",\n";
  out += "  \"bias\": " + format_double(model.bias) + ",\n";
  out += "  \"weights\": " + json_number_array(model.weights) + ",\n";
  out += "  \"feature_mean\": " + json_number_array(model.feature_mean) + ",\n";
  out += "  \"feature_scale\": " + json_number_array(model.feature_scale) + "\n";
  out += "}\n";
  write_text(path, out);
}

LogRegModel load_logreg(const std::filesystem::path& path) {
  const std::string where = path.string();
  std::ifstream in(path);
  if (!in) fail(Errc::io, where + ": cannot open assessor model");
  LogRegModel m;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.value("format", std::string{}) != kLogRegFormat) fail(Errc::schema, where + ": not an assessor model");
    m.embedding_model_id = j.at("embedding_model_id").get<std::string>();
    m.l2_lambda = j.at("l2_lambda").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<unsigned>();
    m.grad_inf_norm = j.at("grad_inf_norm").get<double>();
    m.bias = j.at("bias").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_scale = j.at("feature_scale").get<std::vector<double>>();
    const auto d = j.at("d").get<std::size_t>();
    if (m.weights.size() != d || m.feature_mean.size() != d || m.feature_scale.size() != d) {
      fail(Errc::dimension_mismatch, where + ": array lengths differ from d");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::schema, where + ": " + e.what());
  }
  return m;
}

VerbalizedResult eval_verbalized(std::span<const SampleMeta> meta, bool impute) {
  VerbalizedResult out;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& m : meta) {
    if (m.verbalized_confidence) {
      scores.push_back(*m.verbalized_confidence);
    } else if (impute) {
      scores.push_back(kImputedConfidence);
      ++out.imputed;
    } else {
      continue;
    }
    labels.push_back(m.correct ? 1 : 0);
  }
  if (scores.empty()) {
    fail(Errc::invalid_argument, "no verbalized confidences present and imputation is disabled");
  }
  out.used = scores.size();
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  out.result = summarize_folds({auroc(scores, labels)}, {pos}, {labels.size() - pos});
  return out;
}

}  // namespace corrprobe

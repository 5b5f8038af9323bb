// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/corrprobe.h"

#include <cstring>
#include <new>
#include <string>
#include <unordered_set>
#include <vector>

#include "corrprobe/activation_store.hpp"
#include "corrprobe/baselines.hpp"
#include "corrprobe/csv.hpp"
#include "corrprobe/digest.hpp"
#include "corrprobe/error.hpp"
#include "corrprobe/experiments.hpp"
#include "corrprobe/probe.hpp"
#include "corrprobe/synth.hpp"
#include "corrprobe/version.hpp"

using namespace corrprobe;

static_assert(static_cast<int>(Errc::internal) == CP_E_INTERNAL);
static_assert(static_cast<int>(Errc::invalid_spec) == CP_E_INVALID_SPEC);
static_assert(static_cast<int>(Errc::bad_magic) == CP_E_BAD_MAGIC);

struct cp_context {
  unsigned jobs = 1;
  std::string last_error;
};

struct cp_dataset {
  LabeledDataset data;
  bool labeled = true;
};

struct cp_direction {
  Direction dir;
};

struct cp_logreg {
  LogRegModel model;
};

namespace {

template <class Fn>
cp_status guarded(cp_context* ctx, Fn&& fn) {
  if (ctx) ctx->last_error.clear();
  try {
    fn();
    return CP_OK;
  } catch (const Error& e) {
    if (ctx) ctx->last_error = e.what();
    return static_cast<cp_status>(e.code());
  } catch (const std::bad_alloc&) {
    if (ctx) ctx->last_error = "out of memory";
    return CP_E_INTERNAL;
  } catch (const std::exception& e) {
    if (ctx) ctx->last_error = e.what();
    return CP_E_INTERNAL;
  } catch (...) {
    if (ctx) ctx->last_error = "unknown exception";
    return CP_E_INTERNAL;
  }
}

unsigned jobs_of(const cp_context* ctx) { return ctx ? ctx->jobs : 1; }

template <class T>
const T& need(const T* p, const char* what) {
  if (p == nullptr) fail(Errc::invalid_argument, std::string(what) + " is NULL");
  return *p;
}

const char* need_path(const char* p, const char* what) {
  if (p == nullptr || *p == '\0') fail(Errc::invalid_argument, std::string(what) + " is empty");
  return p;
}

const LabeledDataset& labeled(const cp_dataset* ds) {
  const auto& h = need(ds, "dataset");
  if (!h.labeled) fail(Errc::invalid_argument, "operation needs a dataset loaded with metadata");
  return h.data;
}

ProtocolOptions protocol_of(const cp_context* ctx, const cp_protocol* p) {
  const auto& proto = need(p, "protocol");
  ProtocolOptions o;
  o.k = proto.k;
  o.seed = proto.seed;
  if (proto.strategy != CP_FOLDS_STRATIFIED_SHUFFLED && proto.strategy != CP_FOLDS_SEQUENTIAL) {
    fail(Errc::invalid_argument, "unknown fold strategy");
  }
  o.strategy = proto.strategy == CP_FOLDS_SEQUENTIAL ? FoldStrategy::sequential
                                                      : FoldStrategy::stratified_shuffled;
  o.jobs = jobs_of(ctx);
  return o;
}

LogRegOptions logreg_options_of(const cp_logreg_options* p) {
  LogRegOptions o;
  if (p != nullptr) {
    o.l2_lambda = p->l2_lambda;
    o.tol = p->tol;
    o.max_iter = p->max_iter;
  }
  return o;
}

std::vector<LabeledDataset> collect(const cp_dataset* const* list, std::size_t count) {
  if (list == nullptr || count == 0) fail(Errc::invalid_argument, "empty dataset list");
  std::vector<LabeledDataset> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(labeled(list[i]));
  return out;
}

void fill(cp_matrix_info* info, const MatrixHeader& h) {
  if (info) *info = cp_matrix_info{h.layer, h.d, h.n};
}

std::string single_eval_csv(const Direction& dir, const LabeledDataset& data, double value) {
  const std::size_t pos = data.counts.n_true;
  const EvalResult r = summarize_folds({value}, {pos}, {data.size() - pos});
  return eval_csv_header(1) + eval_csv_row(data.matrix.model_id, dir.train_dataset_id,
                                           data.matrix.dataset_id, data.matrix.layer, 1, r);
}

}  // namespace

extern "C" {

const char* cp_version(void) { return kVersion; }

const char* cp_status_name(cp_status status) { return errc_name(static_cast<Errc>(status)); }

cp_context* cp_context_create(void) { return new (std::nothrow) cp_context(); }

void cp_context_destroy(cp_context* ctx) { delete ctx; }

void cp_context_set_jobs(cp_context* ctx, unsigned jobs) {
  if (ctx) ctx->jobs = jobs == 0 ? 1 : jobs;
}

const char* cp_context_last_error(const cp_context* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

cp_status cp_file_sha256(cp_context* ctx, const char* path, char out_hex[65]) {
  return guarded(ctx, [&] {
    if (out_hex == nullptr) fail(Errc::invalid_argument, "output buffer is NULL");
    const std::string hex = file_sha256(need_path(path, "path"));
    std::memcpy(out_hex, hex.c_str(), hex.size() + 1);
  });
}

cp_status cp_matrix_validate(cp_context* ctx, const char* path, cp_matrix_info* info) {
  return guarded(ctx, [&] {
    MatrixReader reader(need_path(path, "path"));
    std::vector<float> chunk(static_cast<std::size_t>(reader.header().d) * 1024);
    while (!reader.done()) reader.read_rows(chunk);
    fill(info, reader.header());
  });
}

cp_status cp_matrix_import_raw_f32(cp_context* ctx, const char* raw_path, uint64_t d, uint32_t layer,
                                   const char* out_path, cp_matrix_info* info) {
  return guarded(ctx, [&] {
    const ActivationMatrix m = import_raw_f32(need_path(raw_path, "raw path"), d, layer);
    write_matrix(m, need_path(out_path, "output path"));
    if (info) *info = cp_matrix_info{m.layer, m.d, m.n};
  });
}

cp_status cp_dataset_load(cp_context* ctx, const char* actv_path, const char* meta_path, cp_dataset** out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output handle is NULL");
    *out = nullptr;
    ActivationMatrix m = read_matrix(need_path(actv_path, "activation path"));
    auto h = std::make_unique<cp_dataset>();
    if (meta_path != nullptr) {
      h->data = join(std::move(m), meta_path);
    } else {
      std::vector<SampleMeta> meta(m.n);
      for (std::size_t i = 0; i < m.n; ++i) meta[i].sample_id = "row-" + std::to_string(i);
      h->data = make_dataset(std::move(m), std::move(meta));
      h->labeled = false;
    }
    *out = h.release();
  });
}

cp_status cp_dataset_save(cp_context* ctx, const cp_dataset* ds, const char* actv_path, const char* meta_path) {
  return guarded(ctx, [&] {
    const auto actv = need_path(actv_path, "activation path");
    if (meta_path == nullptr) {
      if (ds == nullptr) fail(Errc::invalid_argument, "dataset is NULL");
      write_matrix(ds->data.matrix, actv);
      return;
    }
    save_dataset(labeled(ds), actv, meta_path);
  });
}

cp_status cp_dataset_info_get(const cp_dataset* ds, cp_dataset_info* info) {
  if (ds == nullptr || info == nullptr) return CP_E_INVALID_ARGUMENT;
  const auto& d = ds->data;
  *info = cp_dataset_info{d.matrix.layer, d.matrix.d, d.matrix.n, d.counts.n_true,
                          d.counts.n_false, d.counts.n_idk, ds->labeled ? 1 : 0};
  return CP_OK;
}

const char* cp_dataset_id(const cp_dataset* ds) { return ds ? ds->data.matrix.dataset_id.c_str() : ""; }

cp_status cp_dataset_set_model_id(cp_dataset* ds, const char* model_id) {
  if (ds == nullptr || model_id == nullptr) return CP_E_INVALID_ARGUMENT;
  ds->data.matrix.model_id = model_id;
  return CP_OK;
}

cp_status cp_dataset_exclude_ids(cp_context* ctx, cp_dataset* ds, const char* meta_path) {
  return guarded(ctx, [&] {
    const auto& data = labeled(ds);
    std::unordered_set<std::string> ids;
    for (auto& m : read_metadata(need_path(meta_path, "metadata path"))) ids.insert(std::move(m.sample_id));
    ds->data = exclude_ids(data, ids);
  });
}

cp_status cp_dataset_head(cp_context* ctx, cp_dataset* ds, uint64_t n) {
  return guarded(ctx, [&] {
    const auto& data = need(ds, "dataset").data;
    if (n > data.size()) {
      fail(Errc::invalid_argument, "head " + std::to_string(n) + " exceeds " + std::to_string(data.size()) + " samples");
    }
    std::vector<std::size_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    ds->data = subset(data, rows);
  });
}

void cp_dataset_free(cp_dataset* ds) { delete ds; }

cp_status cp_direction_fit(cp_context* ctx, const cp_dataset* ds, cp_direction** out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output handle is NULL");
    *out = nullptr;
    auto h = std::make_unique<cp_direction>();
    h->dir = fit_direction(labeled(ds));
    *out = h.release();
  });
}

cp_status cp_direction_load(cp_context* ctx, const char* path, cp_direction** out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output handle is NULL");
    *out = nullptr;
    auto h = std::make_unique<cp_direction>();
    h->dir = load_direction(need_path(path, "path"));
    *out = h.release();
  });
}

cp_status cp_direction_save(cp_context* ctx, const cp_direction* dir, const char* path) {
  return guarded(ctx, [&] { save_direction(need(dir, "direction").dir, need_path(path, "path")); });
}

cp_status cp_direction_info_get(const cp_direction* dir, cp_direction_info* info) {
  if (dir == nullptr || info == nullptr) return CP_E_INVALID_ARGUMENT;
  const auto& d = dir->dir;
  *info = cp_direction_info{d.layer, d.d, d.n_true, d.n_false, d.w_norm};
  return CP_OK;
}

cp_status cp_direction_vectors(cp_context* ctx, const cp_direction* dir, double* w, double* mu, size_t len) {
  return guarded(ctx, [&] {
    const auto& d = need(dir, "direction").dir;
    if (len != d.d) fail(Errc::dimension_mismatch, "buffer length differs from d");
    if (w) std::memcpy(w, d.w.data(), len * sizeof(double));
    if (mu) std::memcpy(mu, d.mu.data(), len * sizeof(double));
  });
}

cp_status cp_direction_score(cp_context* ctx, const cp_direction* dir, const double* h, size_t len, double* out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output is NULL");
    if (h == nullptr && len != 0) fail(Errc::invalid_argument, "vector is NULL");
    *out = score(need(dir, "direction").dir, std::span<const double>(h, len));
  });
}

cp_status cp_direction_score_dataset(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds,
                                     double* out, size_t len) {
  return guarded(ctx, [&] {
    const auto& data = need(ds, "dataset").data;
    if (len != data.size()) fail(Errc::count_mismatch, "output length differs from n");
    if (out == nullptr && len != 0) fail(Errc::invalid_argument, "output is NULL");
    const auto scores = score_batch(need(dir, "direction").dir, data.matrix, jobs_of(ctx));
    if (len) std::memcpy(out, scores.data(), len * sizeof(double));
  });
}

void cp_direction_free(cp_direction* dir) { delete dir; }

cp_status cp_auroc(cp_context* ctx, const double* scores, const uint8_t* labels, size_t n, double* out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output is NULL");
    if (n != 0 && (scores == nullptr || labels == nullptr)) fail(Errc::invalid_argument, "NULL input");
    *out = auroc(std::span<const double>(scores, n), std::span<const std::uint8_t>(labels, n));
  });
}

cp_status cp_eval(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds, const char* csv_path,
                  double* out) {
  return guarded(ctx, [&] {
    const auto& d = need(dir, "direction").dir;
    const auto& data = labeled(ds);
    const double value = auroc(score_batch(d, data.matrix, jobs_of(ctx)), data.labels);
    if (csv_path) write_text(csv_path, single_eval_csv(d, data, value));
    if (out) *out = value;
  });
}

cp_status cp_cv(cp_context* ctx, const cp_dataset* ds, const cp_protocol* protocol, const char* csv_path,
                cp_eval_summary* out) {
  return guarded(ctx, [&] {
    const auto& data = labeled(ds);
    const ProtocolOptions o = protocol_of(ctx, protocol);
    const EvalResult r = cv_auroc(data, make_folds(data.labels, o.k, o.seed, o.strategy), o.jobs);
    if (csv_path) {
      write_text(csv_path, eval_csv_header(o.k) + eval_csv_row(data.matrix.model_id, data.matrix.dataset_id,
                                                               data.matrix.dataset_id, data.matrix.layer,
                                                               o.k, r));
    }
    if (out) *out = cp_eval_summary{r.mean, r.std, o.k};
  });
}

cp_status cp_write_scores(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds, const char* csv_path) {
  return guarded(ctx, [&] {
    const auto& h = need(ds, "dataset");
    const auto scores = score_batch(need(dir, "direction").dir, h.data.matrix, jobs_of(ctx));
    write_text(need_path(csv_path, "csv path"), h.labeled ? scores_csv(h.data, scores) : row_scores_csv(scores));
  });
}

cp_status cp_sweep(cp_context* ctx, const cp_dataset* const* layers, size_t count, const cp_protocol* protocol,
                   const char* csv_path, uint32_t* best_layer) {
  return guarded(ctx, [&] {
    const auto data = collect(layers, count);
    const auto sweep = sweep_layers(data, protocol_of(ctx, protocol));
    if (csv_path) write_text(csv_path, sweep_csv(sweep, data.front().matrix.model_id, data.front().matrix.dataset_id));
    if (best_layer) *best_layer = sweep.best_layer;
  });
}

cp_status cp_cross(cp_context* ctx, const cp_dataset* const* datasets, size_t count, const cp_protocol* protocol,
                   const char* csv_path, const char* directions_dir) {
  return guarded(ctx, [&] {
    const auto data = collect(datasets, count);
    const auto grid = cross_matrix(data, protocol_of(ctx, protocol));
    if (csv_path) write_text(csv_path, cross_csv(grid, data.front().matrix.model_id, data.front().matrix.layer));
    if (directions_dir) {
      const std::filesystem::path dir(directions_dir);
      std::filesystem::create_directories(dir);
      for (std::size_t i = 0; i < grid.fold_averaged.size(); ++i) {
        save_direction(grid.fold_averaged[i], dir / (grid.dataset_ids[i] + ".direction.json"));
      }
    }
  });
}

cp_status cp_curve(cp_context* ctx, const cp_dataset* train, const cp_dataset* const* tests, size_t test_count,
                   const uint64_t* sizes, size_t size_count, unsigned reps, uint64_t seed, const char* csv_path) {
  return guarded(ctx, [&] {
    const auto& train_data = labeled(train);
    const auto test_data = collect(tests, test_count);
    std::vector<std::size_t> grid = size_count == 0 ? default_curve_sizes(train_data.size())
                                                    : std::vector<std::size_t>(sizes, sizes + size_count);
    const auto curve = sample_curve(train_data, test_data, grid, reps, seed, jobs_of(ctx));
    if (csv_path) write_text(csv_path, curve_csv(curve, train_data.matrix.dataset_id));
  });
}

cp_status cp_cosine(cp_context* ctx, const cp_direction* const* dirs, const char* const* names, size_t count,
                    const char* csv_path, double* out_matrix) {
  return guarded(ctx, [&] {
    if (dirs == nullptr || count == 0) fail(Errc::invalid_argument, "empty direction list");
    std::vector<Direction> list;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < count; ++i) {
      list.push_back(need(dirs[i], "direction").dir);
      labels.push_back(names ? std::string(need_path(names[i], "name")) : list.back().train_dataset_id);
    }
    const auto m = cosine_matrix(list);
    if (csv_path) write_text(csv_path, cosine_csv(labels, m));
    if (out_matrix) {
      for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < count; ++j) out_matrix[i * count + j] = m[i][j];
      }
    }
  });
}

cp_status cp_idk_report(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds, const char* summary_csv,
                        const char* histogram_csv) {
  return guarded(ctx, [&] {
    const auto rep = idk_report(need(dir, "direction").dir, labeled(ds), jobs_of(ctx));
    if (summary_csv) write_text(summary_csv, idk_summary_csv(rep));
    if (histogram_csv) write_text(histogram_csv, idk_histogram_csv(rep));
  });
}

cp_status cp_extremes(cp_context* ctx, const cp_direction* dir, const cp_dataset* ds, uint64_t top_k,
                      const char* csv_path) {
  return guarded(ctx, [&] {
    const auto ex = extremes(need(dir, "direction").dir, labeled(ds), top_k, jobs_of(ctx));
    write_text(need_path(csv_path, "csv path"), extremes_csv(ex));
  });
}

void cp_logreg_options_init(cp_logreg_options* options) {
  if (options) {
    const LogRegOptions d;
    *options = cp_logreg_options{d.l2_lambda, d.tol, d.max_iter};
  }
}

cp_status cp_logreg_fit(cp_context* ctx, const cp_dataset* embeddings, const cp_logreg_options* options,
                        cp_logreg** out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output handle is NULL");
    *out = nullptr;
    auto h = std::make_unique<cp_logreg>();
    h->model = fit_logreg(labeled(embeddings), logreg_options_of(options));
    *out = h.release();
  });
}

cp_status cp_logreg_load(cp_context* ctx, const char* path, cp_logreg** out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output handle is NULL");
    *out = nullptr;
    auto h = std::make_unique<cp_logreg>();
    h->model = load_logreg(need_path(path, "path"));
    *out = h.release();
  });
}

cp_status cp_logreg_save(cp_context* ctx, const cp_logreg* model, const char* path) {
  return guarded(ctx, [&] { save_logreg(need(model, "model").model, need_path(path, "path")); });
}

cp_status cp_logreg_info_get(const cp_logreg* model, cp_logreg_info* info) {
  if (model == nullptr || info == nullptr) return CP_E_INVALID_ARGUMENT;
  const auto& m = model->model;
  *info = cp_logreg_info{m.weights.size(), m.converged ? 1 : 0, m.iterations, m.grad_inf_norm, m.l2_lambda};
  return CP_OK;
}

cp_status cp_logreg_predict(cp_context* ctx, const cp_logreg* model, const cp_dataset* embeddings, double* out,
                            size_t len) {
  return guarded(ctx, [&] {
    const auto& data = need(embeddings, "dataset").data;
    if (len != data.size()) fail(Errc::count_mismatch, "output length differs from n");
    if (out == nullptr && len != 0) fail(Errc::invalid_argument, "output is NULL");
    const auto p = predict_proba(need(model, "model").model, data.matrix);
    if (len) std::memcpy(out, p.data(), len * sizeof(double));
  });
}

cp_status cp_logreg_eval(cp_context* ctx, const cp_logreg* model, const cp_dataset* embeddings,
                         const char* csv_path, double* out) {
  return guarded(ctx, [&] {
    const auto& data = labeled(embeddings);
    const double value = auroc(predict_proba(need(model, "model").model, data.matrix), data.labels);
    if (csv_path) {
      const std::size_t pos = data.counts.n_true;
      const EvalResult r = summarize_folds({value}, {pos}, {data.size() - pos});
      write_text(csv_path, eval_csv_header(1) + eval_csv_row(model->model.embedding_model_id, "assessor",
                                                             data.matrix.dataset_id, 0, 1, r));
    }
    if (out) *out = value;
  });
}

void cp_logreg_free(cp_logreg* model) { delete model; }

cp_status cp_assessor_cross(cp_context* ctx, const cp_dataset* const* datasets, size_t count,
                            const cp_protocol* protocol, const cp_logreg_options* options, const char* csv_path) {
  return guarded(ctx, [&] {
    const auto data = collect(datasets, count);
    const auto grid = assessor_cross_matrix(data, protocol_of(ctx, protocol), logreg_options_of(options));
    write_text(need_path(csv_path, "csv path"), cross_csv(grid, data.front().matrix.model_id, 0));
  });
}

cp_status cp_verbal_eval(cp_context* ctx, const char* meta_path, int impute, const char* csv_path, double* out,
                         uint64_t* used, uint64_t* imputed) {
  return guarded(ctx, [&] {
    const auto meta = read_metadata(need_path(meta_path, "metadata path"));
    const auto r = eval_verbalized(meta, impute != 0);
    if (csv_path) {
      std::string text = csv_row({"dataset", "n_used", "n_imputed", "auroc"});
      text += csv_row({meta.empty() ? "" : meta.front().dataset_id, std::to_string(r.used),
                       std::to_string(r.imputed), format_double(r.result.mean)});
      write_text(csv_path, text);
    }
    if (out) *out = r.result.mean;
    if (used) *used = r.used;
    if (imputed) *imputed = r.imputed;
  });
}

void cp_gaussian_spec_init(cp_gaussian_spec* spec) {
  if (spec) {
    const GaussianSpec d;
    *spec = cp_gaussian_spec{d.d, d.n_per_class, d.delta, d.sigma_true, d.sigma_false, nullptr,
                             d.axis_seed, d.seed, d.idk_fraction, d.idk_shift, 0};
  }
}

cp_status cp_synth_generate(cp_context* ctx, const cp_gaussian_spec* spec, cp_dataset** out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output handle is NULL");
    *out = nullptr;
    const auto& s = need(spec, "spec");
    GaussianSpec g;
    g.d = s.d;
    g.n_per_class = s.n_per_class;
    g.delta = s.delta;
    g.sigma_true = s.sigma_true;
    g.sigma_false = s.sigma_false;
    if (s.axis) g.axis.assign(s.axis, s.axis + s.d);
    g.axis_seed = s.axis_seed;
    g.seed = s.seed;
    g.idk_fraction = s.idk_fraction;
    g.idk_shift = s.idk_shift;
    auto h = std::make_unique<cp_dataset>();
    h->data = generate(g);
    h->data.matrix.layer = s.layer;
    *out = h.release();
  });
}

cp_status cp_analytic_auc(cp_context* ctx, double delta, double sigma_true, double sigma_false, double* out) {
  return guarded(ctx, [&] {
    if (out == nullptr) fail(Errc::invalid_argument, "output is NULL");
    *out = analytic_auc(delta, sigma_true, sigma_false);
  });
}

}  // extern "C"

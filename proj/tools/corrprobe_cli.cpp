// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "corrprobe/corrprobe.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr const char* kDataDirEnv = "CORRPROBE_DATA_DIR";

struct CommandFailed {
  int exit_code;
};

struct ContextDeleter {
  void operator()(cp_context* c) const { cp_context_destroy(c); }
};
struct DatasetDeleter {
  void operator()(cp_dataset* d) const { cp_dataset_free(d); }
};
struct DirectionDeleter {
  void operator()(cp_direction* d) const { cp_direction_free(d); }
};
struct LogRegDeleter {
  void operator()(cp_logreg* m) const { cp_logreg_free(m); }
};
using Dataset = std::unique_ptr<cp_dataset, DatasetDeleter>;
using DirectionHandle = std::unique_ptr<cp_direction, DirectionDeleter>;
using LogReg = std::unique_ptr<cp_logreg, LogRegDeleter>;

// One invocation: owns the C context and records what the manifest needs.
class Session {
 public:
  Session() : ctx_(cp_context_create()) {}

  cp_context* ctx() const { return ctx_.get(); }

  void check(cp_status status) const {
    if (status == CP_OK) return;
    std::cerr << "error [" << cp_status_name(status) << "]: " << cp_context_last_error(ctx_.get()) << "\n";
    throw CommandFailed{status == CP_E_INVALID_ARGUMENT ? kExitUsage : kExitData};
  }

  // Resolves relative inputs against $CORRPROBE_DATA_DIR when they are not
  // found in the working directory, and records them for the manifest.
  std::string input(const std::string& path) {
    fs::path p(path);
    if (p.is_relative() && !fs::exists(p)) {
      if (const char* dir = std::getenv(kDataDirEnv); dir != nullptr && *dir != '\0') {
        const fs::path alt = fs::path(dir) / p;
        if (fs::exists(alt)) p = alt;
      }
    }
    if (!fs::exists(p)) {
      std::cerr << "error [io]: input not found: " << path << "\n";
      throw CommandFailed{kExitData};
    }
    inputs_.push_back(p.string());
    return p.string();
  }

  std::string output(const std::string& path) {
    outputs_.push_back(path);
    return path;
  }

  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

  Dataset load(const std::string& actv, const std::optional<std::string>& meta, const std::string& model_id) {
    cp_dataset* raw = nullptr;
    const std::string a = input(actv);
    std::optional<std::string> m;
    if (meta) m = input(*meta);
    check(cp_dataset_load(ctx(), a.c_str(), m ? m->c_str() : nullptr, &raw));
    Dataset ds(raw);
    if (!model_id.empty()) check(cp_dataset_set_model_id(ds.get(), model_id.c_str()));
    return ds;
  }

  // "ACT:META" or a bare prefix meaning PREFIX.actv + PREFIX.jsonl.
  Dataset load_spec(const std::string& spec, const std::string& model_id) {
    const auto colon = spec.rfind(':');
    if (colon == std::string::npos) return load(spec + ".actv", spec + ".jsonl", model_id);
    return load(spec.substr(0, colon), spec.substr(colon + 1), model_id);
  }

  DirectionHandle direction(const std::string& path) {
    cp_direction* raw = nullptr;
    check(cp_direction_load(ctx(), input(path).c_str(), &raw));
    return DirectionHandle(raw);
  }

  // Manifest next to the primary output: <primary>.manifest.json.
  void write_manifest(const std::vector<std::string>& argv, const std::string& primary) {
    nlohmann::ordered_json j;
    j["toolkit"] = "corrprobe";
    j["version"] = cp_version();
    j["command"] = argv;
    j["cwd"] = fs::current_path().string();
    j["seeds"] = seeds_;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
    for (const auto& in : inputs_) {
      char hex[65];
      check(cp_file_sha256(ctx(), in.c_str(), hex));
      inputs.push_back({{"path", in}, {"sha256", hex}});
    }
    j["inputs"] = inputs;
    j["outputs"] = outputs_;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp"] = stamp;
    std::ofstream out(primary + ".manifest.json");
    out << j.dump(2) << "\n";
    if (!out) {
      std::cerr << "error [io]: cannot write manifest for " << primary << "\n";
      throw CommandFailed{kExitData};
    }
  }

 private:
  std::unique_ptr<cp_context, ContextDeleter> ctx_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::map<std::string, std::uint64_t> seeds_;
};

cp_fold_strategy parse_strategy(const std::string& s) {
  return s == "sequential" ? CP_FOLDS_SEQUENTIAL : CP_FOLDS_STRATIFIED_SHUFFLED;
}

std::vector<std::string> strategy_names() { return {"stratified_shuffled", "stratified", "sequential"}; }

std::string format(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Finds the ACTV1 file for a layer inside a directory by reading headers.
std::string layer_file(Session& s, const std::string& dir, std::uint32_t layer) {
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".actv") continue;
    cp_matrix_info info{};
    s.check(cp_matrix_validate(s.ctx(), entry.path().c_str(), &info));
    if (info.layer == layer) return entry.path().string();
  }
  std::cerr << "error [io]: no layer " << layer << " file in " << dir << "\n";
  throw CommandFailed{kExitData};
}

int run(const std::vector<std::string>& args);

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"corrprobe: in-advance correctness probes on cached LLM activations", "corrprobe"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cp_version()));
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));

  Session s;
  std::optional<std::string> manifest_for;
  std::function<void()> action;
  auto bind = [&](CLI::App* sub, std::function<void()> fn) { sub->callback([&action, fn] { action = fn; }); };

  // Shared option storage.
  std::string activations, meta, out, direction_path, model_id, data_spec, layers_dir, exclude_meta;
  std::optional<std::uint32_t> layer;
  unsigned k = 0;
  std::uint64_t seed = 0;
  std::string strategy = "stratified_shuffled";
  std::vector<std::string> dataset_specs;

  std::map<const CLI::App*, unsigned> default_k;
  auto add_protocol = [&](CLI::App* sub, unsigned fallback_k) {
    default_k[sub] = fallback_k;
    sub->add_option("--k", k, "Number of folds")->check(CLI::Range(2u, 1000u));
    sub->add_option("--seed", seed, "Fold shuffling seed");
    sub->add_option("--strategy", strategy, "Fold strategy")->check(CLI::IsMember(strategy_names()));
  };
  auto protocol = [&] {
    const CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--k") == 0) k = default_k.at(sub);
    s.seed("seed", seed);
    return cp_protocol{k, seed, parse_strategy(strategy)};
  };

  // ingest
  std::vector<std::string> ingest_files;
  std::string raw_f32;
  std::uint64_t raw_d = 0;
  auto* ingest = app.add_subcommand("ingest", "Validate ACTV1 dumps (and their metadata), or import raw f32");
  ingest->add_option("--activations", ingest_files, "ACTV1 files to validate");
  ingest->add_option("--meta", meta, "Metadata sidecar to join with each file");
  ingest->add_option("--raw-f32", raw_f32, "Headerless little-endian f32 dump to convert");
  ingest->add_option("--d", raw_d, "Row width of the raw dump");
  ingest->add_option("--layer", layer, "Layer index for the raw import");
  ingest->add_option("--out", out, "ACTV1 output for the raw import");
  bind(ingest, [&] {
    if (!raw_f32.empty()) {
      if (out.empty() || raw_d == 0) throw CLI::ValidationError("--raw-f32 needs --d and --out");
      cp_matrix_info info{};
      s.check(cp_matrix_import_raw_f32(s.ctx(), s.input(raw_f32).c_str(), raw_d, layer.value_or(0),
                                       s.output(out).c_str(), &info));
      std::cout << out << ": layer " << info.layer << ", n " << info.n << ", d " << info.d << "\n";
      manifest_for = out;
    }
    for (const auto& f : ingest_files) {
      if (meta.empty()) {
        cp_matrix_info info{};
        s.check(cp_matrix_validate(s.ctx(), s.input(f).c_str(), &info));
        std::cout << f << ": ok, layer " << info.layer << ", n " << info.n << ", d " << info.d << "\n";
      } else {
        const Dataset ds = s.load(f, meta, "");
        cp_dataset_info info{};
        s.check(cp_dataset_info_get(ds.get(), &info));
        std::cout << f << ": ok, layer " << info.layer << ", n " << info.n << ", d " << info.d
                  << ", n_true " << info.n_true << ", n_false " << info.n_false << ", n_idk " << info.n_idk << "\n";
      }
    }
    if (raw_f32.empty() && ingest_files.empty()) throw CLI::ValidationError("nothing to ingest");
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the centroid-difference direction");
  fit->add_option("--activations", activations, "ACTV1 file, or a directory of per-layer files")->required();
  fit->add_option("--meta", meta, "Metadata sidecar")->required();
  fit->add_option("--layer", layer, "Layer to use (required for a directory; checked for a file)");
  fit->add_option("--model-id", model_id, "Model identifier recorded in the direction");
  fit->add_option("--out", out, "Direction file to write")->required();
  bind(fit, [&] {
    std::string file = activations;
    if (fs::is_directory(activations)) {
      if (!layer) throw CLI::ValidationError("--layer is required when --activations is a directory");
      file = layer_file(s, activations, *layer);
    }
    const Dataset ds = s.load(file, meta, model_id);
    cp_dataset_info info{};
    s.check(cp_dataset_info_get(ds.get(), &info));
    if (layer && info.layer != *layer) {
      std::cerr << "error [invalid_argument]: " << file << " holds layer " << info.layer << ", not " << *layer << "\n";
      throw CommandFailed{kExitData};
    }
    cp_direction* raw = nullptr;
    s.check(cp_direction_fit(s.ctx(), ds.get(), &raw));
    const DirectionHandle dir(raw);
    s.check(cp_direction_save(s.ctx(), dir.get(), s.output(out).c_str()));
    cp_direction_info di{};
    cp_direction_info_get(dir.get(), &di);
    std::cout << "direction: layer " << di.layer << ", d " << di.d << ", |w| " << format(di.w_norm)
              << ", n_true " << di.n_true << ", n_false " << di.n_false << "\n";
    manifest_for = out;
  });

  // score
  auto* score = app.add_subcommand("score", "Score activations with a fitted direction");
  score->add_option("--direction", direction_path)->required();
  score->add_option("--activations", activations)->required();
  score->add_option("--meta", meta, "Optional metadata; adds sample ids and labels to the output");
  score->add_option("--out", out, "Scores CSV")->required();
  bind(score, [&] {
    const auto dir = s.direction(direction_path);
    const Dataset ds = s.load(activations, meta.empty() ? std::nullopt : std::optional(meta), "");
    s.check(cp_write_scores(s.ctx(), dir.get(), ds.get(), s.output(out).c_str()));
    manifest_for = out;
  });

  // eval
  std::string test_activations, test_meta;
  auto* eval = app.add_subcommand("eval", "AUROC of a fitted direction on a labelled test set");
  eval->add_option("--direction", direction_path)->required();
  eval->add_option("--test-activations", test_activations)->required();
  eval->add_option("--test-meta", test_meta)->required();
  eval->add_option("--model-id", model_id);
  eval->add_option("--out", out, "Optional result CSV");
  bind(eval, [&] {
    const auto dir = s.direction(direction_path);
    const Dataset ds = s.load(test_activations, test_meta, model_id);
    double value = 0.0;
    s.check(cp_eval(s.ctx(), dir.get(), ds.get(), out.empty() ? nullptr : s.output(out).c_str(), &value));
    std::cout << "auroc " << format(value) << "\n";
    if (!out.empty()) manifest_for = out;
  });

  // cv
  auto* cv = app.add_subcommand("cv", "Cross-validated AUROC of the direction on one dataset");
  cv->add_option("--data", data_spec, "ACT:META or prefix")->required();
  cv->add_option("--model-id", model_id);
  cv->add_option("--out", out, "Result CSV");
  add_protocol(cv, 5);
  bind(cv, [&] {
    const Dataset ds = s.load_spec(data_spec, model_id);
    const cp_protocol p = protocol();
    cp_eval_summary r{};
    s.check(cp_cv(s.ctx(), ds.get(), &p, out.empty() ? nullptr : s.output(out).c_str(), &r));
    std::cout << "auroc " << format(r.mean) << " +- " << format(r.std) << " over " << r.folds << " folds\n";
    if (!out.empty()) manifest_for = out;
  });

  // sweep
  std::optional<std::uint64_t> head;
  auto* sweep = app.add_subcommand("sweep", "Cross-validated layer sweep");
  sweep->add_option("--layers-dir", layers_dir, "Directory of per-layer ACTV1 files")->required();
  sweep->add_option("--meta", meta, "Shared metadata (default: <layers-dir>/meta.jsonl)");
  sweep->add_option("--head", head, "Use only the first N samples");
  sweep->add_option("--model-id", model_id);
  sweep->add_option("--out", out, "Result CSV")->required();
  add_protocol(sweep, 3);
  bind(sweep, [&] {
    const std::string m = meta.empty() ? (fs::path(layers_dir) / "meta.jsonl").string() : meta;
    std::vector<std::string> files;
    if (!fs::is_directory(layers_dir)) {
      std::cerr << "error [io]: not a directory: " << layers_dir << "\n";
      throw CommandFailed{kExitData};
    }
    for (const auto& entry : fs::directory_iterator(layers_dir)) {
      if (entry.path().extension() == ".actv") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw CLI::ValidationError("no .actv files in " + layers_dir);
    std::vector<Dataset> layers;
    std::vector<const cp_dataset*> views;
    for (const auto& f : files) {
      layers.push_back(s.load(f, m, model_id));
      if (head) s.check(cp_dataset_head(s.ctx(), layers.back().get(), *head));
      views.push_back(layers.back().get());
    }
    const cp_protocol p = protocol();
    std::uint32_t best = 0;
    s.check(cp_sweep(s.ctx(), views.data(), views.size(), &p, s.output(out).c_str(), &best));
    std::cout << "best layer " << best << "\n";
    manifest_for = out;
  });

  // cross
  std::string directions_dir;
  auto* cross = app.add_subcommand("cross", "Train-dataset x test-dataset AUROC grid");
  cross->add_option("--datasets", dataset_specs, "ACT:META or prefix, one per dataset")->required();
  cross->add_option("--exclude-meta", exclude_meta, "Drop samples listed here (e.g. the layer-sweep pool)");
  cross->add_option("--directions-dir", directions_dir, "Write fold-averaged directions here");
  cross->add_option("--model-id", model_id);
  cross->add_option("--out", out, "Result CSV")->required();
  add_protocol(cross, 5);
  bind(cross, [&] {
    std::vector<Dataset> sets;
    std::vector<const cp_dataset*> views;
    for (const auto& spec : dataset_specs) {
      sets.push_back(s.load_spec(spec, model_id));
      if (!exclude_meta.empty()) s.check(cp_dataset_exclude_ids(s.ctx(), sets.back().get(), s.input(exclude_meta).c_str()));
      views.push_back(sets.back().get());
    }
    const cp_protocol p = protocol();
    if (!directions_dir.empty()) s.output(directions_dir);
    s.check(cp_cross(s.ctx(), views.data(), views.size(), &p, s.output(out).c_str(),
                     directions_dir.empty() ? nullptr : directions_dir.c_str()));
    manifest_for = out;
  });

  // curve
  std::string train_spec;
  std::vector<std::uint64_t> sizes;
  unsigned reps = 10;
  auto* curve = app.add_subcommand("curve", "Sample-efficiency curve");
  curve->add_option("--train", train_spec, "Training data, ACT:META or prefix")->required();
  curve->add_option("--tests", dataset_specs, "Test datasets, ACT:META or prefix")->required();
  curve->add_option("--sizes", sizes, "Training sizes (default 10,20,...,10240 up to n)")->delimiter(',');
  curve->add_option("--reps", reps, "Repetitions per size")->check(CLI::Range(1u, 100000u));
  curve->add_option("--seed", seed, "Subsampling seed");
  curve->add_option("--exclude-meta", exclude_meta, "Drop these samples from the training data");
  curve->add_option("--out", out, "Result CSV")->required();
  bind(curve, [&] {
    Dataset train = s.load_spec(train_spec, "");
    if (!exclude_meta.empty()) s.check(cp_dataset_exclude_ids(s.ctx(), train.get(), s.input(exclude_meta).c_str()));
    std::vector<Dataset> tests;
    std::vector<const cp_dataset*> views;
    for (const auto& spec : dataset_specs) {
      tests.push_back(s.load_spec(spec, ""));
      views.push_back(tests.back().get());
    }
    s.seed("seed", seed);
    s.check(cp_curve(s.ctx(), train.get(), views.data(), views.size(), sizes.empty() ? nullptr : sizes.data(),
                     sizes.size(), reps, seed, s.output(out).c_str()));
    manifest_for = out;
  });

  // cosine
  std::vector<std::string> direction_files, names;
  auto* cosine = app.add_subcommand("cosine", "Cosine similarities between directions");
  cosine->add_option("--directions", direction_files)->required();
  cosine->add_option("--names", names, "Row/column labels (default: training dataset ids)");
  cosine->add_option("--out", out, "Result CSV")->required();
  bind(cosine, [&] {
    if (!names.empty() && names.size() != direction_files.size()) {
      throw CLI::ValidationError("--names must match --directions in count");
    }
    std::vector<DirectionHandle> dirs;
    std::vector<const cp_direction*> views;
    std::vector<const char*> labels;
    for (const auto& f : direction_files) {
      dirs.push_back(s.direction(f));
      views.push_back(dirs.back().get());
    }
    for (const auto& n : names) labels.push_back(n.c_str());
    s.check(cp_cosine(s.ctx(), views.data(), names.empty() ? nullptr : labels.data(), views.size(),
                      s.output(out).c_str(), nullptr));
    manifest_for = out;
  });

  // idk
  auto* idk = app.add_subcommand("idk", "Score distributions per answer category");
  idk->add_option("--direction", direction_path)->required();
  idk->add_option("--data", data_spec, "ACT:META or prefix")->required();
  idk->add_option("--out", out, "Output prefix: <out>.summary.csv and <out>.hist.csv")->required();
  bind(idk, [&] {
    const auto dir = s.direction(direction_path);
    const Dataset ds = s.load_spec(data_spec, "");
    const std::string summary = s.output(out + ".summary.csv");
    const std::string hist = s.output(out + ".hist.csv");
    s.check(cp_idk_report(s.ctx(), dir.get(), ds.get(), summary.c_str(), hist.c_str()));
    manifest_for = out;
  });

  // extremes
  std::uint64_t top_k = 10;
  auto* ext = app.add_subcommand("extremes", "Highest and lowest scoring questions per group");
  ext->add_option("--direction", direction_path)->required();
  ext->add_option("--data", data_spec, "ACT:META or prefix")->required();
  ext->add_option("--top-k", top_k);
  ext->add_option("--out", out, "Result CSV")->required();
  bind(ext, [&] {
    const auto dir = s.direction(direction_path);
    const Dataset ds = s.load_spec(data_spec, "");
    s.check(cp_extremes(s.ctx(), dir.get(), ds.get(), top_k, s.output(out).c_str()));
    manifest_for = out;
  });

  // assessor
  cp_logreg_options lr{};
  cp_logreg_options_init(&lr);
  std::string embeddings, model_path, action_name;
  auto* assessor = app.add_subcommand("assessor", "Logistic-regression assessor on question embeddings");
  assessor->add_option("action", action_name, "fit | eval | cross")->required()->check(CLI::IsMember({"fit", "eval", "cross"}));
  assessor->add_option("--embeddings", embeddings, "Embedding ACTV1 file (fit, eval)");
  assessor->add_option("--meta", meta, "Metadata sidecar (fit, eval)");
  assessor->add_option("--model", model_path, "Model file (eval)");
  assessor->add_option("--datasets", dataset_specs, "Embedding datasets (cross)");
  assessor->add_option("--lambda", lr.l2_lambda, "L2 strength on standardized features");
  assessor->add_option("--tol", lr.tol, "Gradient infinity-norm tolerance");
  assessor->add_option("--max-iter", lr.max_iter, "Newton iteration cap");
  assessor->add_option("--out", out, "Model file (fit) or result CSV (eval, cross)");
  add_protocol(assessor, 5);
  bind(assessor, [&] {
    if (action_name == "fit") {
      if (embeddings.empty() || meta.empty() || out.empty()) throw CLI::ValidationError("fit needs --embeddings --meta --out");
      const Dataset ds = s.load(embeddings, meta, "");
      cp_logreg* raw = nullptr;
      s.check(cp_logreg_fit(s.ctx(), ds.get(), &lr, &raw));
      const LogReg model(raw);
      s.check(cp_logreg_save(s.ctx(), model.get(), s.output(out).c_str()));
      cp_logreg_info info{};
      cp_logreg_info_get(model.get(), &info);
      std::cout << "assessor: converged " << info.converged << ", iterations " << info.iterations
                << ", |grad|_inf " << format(info.grad_inf_norm) << "\n";
    } else if (action_name == "eval") {
      if (embeddings.empty() || meta.empty() || model_path.empty()) throw CLI::ValidationError("eval needs --model --embeddings --meta");
      cp_logreg* raw = nullptr;
      s.check(cp_logreg_load(s.ctx(), s.input(model_path).c_str(), &raw));
      const LogReg model(raw);
      const Dataset ds = s.load(embeddings, meta, "");
      double value = 0.0;
      s.check(cp_logreg_eval(s.ctx(), model.get(), ds.get(), out.empty() ? nullptr : s.output(out).c_str(), &value));
      std::cout << "auroc " << format(value) << "\n";
    } else {
      if (dataset_specs.empty() || out.empty()) throw CLI::ValidationError("cross needs --datasets --out");
      std::vector<Dataset> sets;
      std::vector<const cp_dataset*> views;
      for (const auto& spec : dataset_specs) {
        sets.push_back(s.load_spec(spec, ""));
        views.push_back(sets.back().get());
      }
      const cp_protocol p = protocol();
      s.check(cp_assessor_cross(s.ctx(), views.data(), views.size(), &p, &lr, s.output(out).c_str()));
    }
    if (!out.empty()) manifest_for = out;
  });

  // verbal
  bool no_impute = false;
  std::string verbal_action = "eval";
  auto* verbal = app.add_subcommand("verbal", "AUROC of verbalized confidence");
  verbal->add_option("action", verbal_action, "eval")->check(CLI::IsMember({"eval"}));
  verbal->add_option("--meta", meta, "Metadata sidecar with verbalized_confidence")->required();
  verbal->add_flag("--no-impute", no_impute, "Drop samples without a confidence instead of imputing 50");
  verbal->add_option("--out", out, "Result CSV");
  bind(verbal, [&] {
    double value = 0.0;
    std::uint64_t used = 0, imputed = 0;
    s.check(cp_verbal_eval(s.ctx(), s.input(meta).c_str(), no_impute ? 0 : 1,
                           out.empty() ? nullptr : s.output(out).c_str(), &value, &used, &imputed));
    std::cout << "auroc " << format(value) << " (n " << used << ", imputed " << imputed << ")\n";
    if (!out.empty()) manifest_for = out;
  });

  // synth
  cp_gaussian_spec spec{};
  cp_gaussian_spec_init(&spec);
  std::optional<double> sigma;
  std::string synth_action = "generate";
  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-Gaussian dataset");
  synth->add_option("action", synth_action, "generate")->check(CLI::IsMember({"generate"}));
  synth->add_option("--d", spec.d)->check(CLI::PositiveNumber);
  synth->add_option("--n", spec.n_per_class, "Samples per class")->check(CLI::PositiveNumber);
  synth->add_option("--delta", spec.delta, "Distance between class means");
  synth->add_option("--sigma", sigma, "Per-class std (both classes)");
  synth->add_option("--sigma-true", spec.sigma_true);
  synth->add_option("--sigma-false", spec.sigma_false);
  synth->add_option("--seed", spec.seed, "Sample seed");
  synth->add_option("--axis-seed", spec.axis_seed, "Seed of the separating axis");
  synth->add_option("--idk-fraction", spec.idk_fraction);
  synth->add_option("--idk-shift", spec.idk_shift);
  synth->add_option("--layer", spec.layer);
  synth->add_option("--out", out, "Output prefix: <out>.actv and <out>.jsonl")->required();
  bind(synth, [&] {
    if (sigma) spec.sigma_true = spec.sigma_false = *sigma;
    cp_dataset* raw = nullptr;
    s.check(cp_synth_generate(s.ctx(), &spec, &raw));
    const Dataset ds(raw);
    const std::string actv = s.output(out + ".actv"), jsonl = s.output(out + ".jsonl");
    s.check(cp_dataset_save(s.ctx(), ds.get(), actv.c_str(), jsonl.c_str()));
    s.seed("seed", spec.seed);
    s.seed("axis_seed", spec.axis_seed);
    double expected = 0.0;
    s.check(cp_analytic_auc(s.ctx(), spec.delta, spec.sigma_true, spec.sigma_false, &expected));
    std::cout << "wrote " << actv << " and " << jsonl << " (analytic auroc " << format(expected) << ")\n";
    manifest_for = out;
  });

  // replay
  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest after checking its input digests");
  replay->add_option("--manifest", manifest_path)->required();
  bind(replay, [&] {
    std::ifstream in(manifest_path);
    if (!in) {
      std::cerr << "error [io]: cannot open " << manifest_path << "\n";
      throw CommandFailed{kExitData};
    }
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("command") || !j.contains("inputs")) {
      std::cerr << "error [schema]: " << manifest_path << " is not a run manifest\n";
      throw CommandFailed{kExitData};
    }
    const fs::path cwd = j.value("cwd", fs::current_path().string());
    for (const auto& item : j["inputs"]) {
      const fs::path p = fs::path(item.at("path").get<std::string>());
      char hex[65];
      s.check(cp_file_sha256(s.ctx(), (p.is_relative() ? cwd / p : p).c_str(), hex));
      if (item.at("sha256").get<std::string>() != hex) {
        std::cerr << "error [schema]: input changed since the run: " << p.string() << "\n";
        throw CommandFailed{kExitData};
      }
    }
    auto argv = j["command"].get<std::vector<std::string>>();
    fs::current_path(cwd);
    throw CommandFailed{run(argv)};
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  cp_context_set_jobs(s.ctx(), jobs);
  try {
    action();
    if (manifest_for) {
      std::vector<std::string> argv = {"corrprobe"};
      argv.insert(argv.end(), args.begin(), args.end());
      s.write_manifest(argv, *manifest_for);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error [usage]: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CommandFailed& f) {
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

// argv without the program name.
int run(const std::vector<std::string>& args) {
  std::vector<std::string> rest = args;
  if (!rest.empty() && (rest.front() == "corrprobe" || fs::path(rest.front()).filename() == "corrprobe")) {
    rest.erase(rest.begin());
  }
  return dispatch(rest);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args);
}

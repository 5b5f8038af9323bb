// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "corrprobe/activation_store.hpp"
#include "corrprobe/metrics.hpp"

namespace corrprobe {

// Question embeddings share the ACTV1 container (layer 0) and the metadata
// sidecar, so an embedding dataset is a LabeledDataset whose matrix.model_id
// names the embedding model.
using EmbeddingDataset = LabeledDataset;

struct LogRegOptions {
  double l2_lambda = 1.0;
  double tol = 1e-6;
  unsigned max_iter = 1000;
};

/// L2-regularised logistic regression on z-scored features. The weights act
/// on standardized features; feature_mean/feature_scale come from the
/// training rows only.
struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2_lambda = 1.0;
  bool converged = false;
  unsigned iterations = 0;
  double grad_inf_norm = 0.0;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  std::string embedding_model_id;
  std::vector<double> loss_history;  // objective before each accepted step, then the final one
};

/// Newton-CG with Armijo backtracking on
///   mean log-loss + lambda/2 |weights|^2   (bias unregularised).
/// Stops when the gradient infinity-norm is <= tol; hitting max_iter leaves
/// converged = false without failing.
LogRegModel fit_logreg(const EmbeddingDataset& data, std::span<const std::size_t> rows,
                       const LogRegOptions& options = {});
LogRegModel fit_logreg(const EmbeddingDataset& data, const LogRegOptions& options = {});

/// Objective value at (weights, bias) for the given rows; features are
/// standardized with the model's statistics.
double logreg_objective(const LogRegModel& model, const EmbeddingDataset& data,
                        std::span<const std::size_t> rows);

std::vector<double> predict_proba(const LogRegModel& model, const ActivationMatrix& embeddings);
std::vector<double> predict_proba(const LogRegModel& model, const ActivationMatrix& embeddings,
                                  std::span<const std::size_t> rows);

void save_logreg(const LogRegModel& model, const std::filesystem::path& path);
LogRegModel load_logreg(const std::filesystem::path& path);

inline constexpr double kImputedConfidence = 50.0;

struct VerbalizedResult {
  EvalResult result;  // single fold
  std::size_t used = 0;
  std::size_t imputed = 0;
};

/// AUROC of self-reported confidence against correctness. Missing values are
/// imputed at 50 and counted; with impute = false they are dropped instead.
VerbalizedResult eval_verbalized(std::span<const SampleMeta> meta, bool impute = true);

}  // namespace corrprobe

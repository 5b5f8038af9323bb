// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace corrprobe {

/// Final-prompt-token residual activations for one (model, dataset, layer).
/// Row i pairs with metadata record i.
struct ActivationMatrix {
  std::string model_id;
  std::string dataset_id;
  std::uint32_t layer = 0;
  std::size_t d = 0;
  std::size_t n = 0;
  std::vector<float> values;  // row-major, n * d

  std::span<const float> row(std::size_t i) const { return {values.data() + i * d, d}; }
};

// ACTV1 container layout, little-endian:
//   0..3 "ACTV" | 4..7 u32 version | 8..11 u32 layer | 12..15 u32 d | 16..23 u64 n
//   24 u8 dtype (1 = f32le) | 25..31 zero | 32.. n*d f32 row-major
inline constexpr std::size_t kActvHeaderSize = 32;
inline constexpr std::uint32_t kActvVersion = 1;
inline constexpr std::uint8_t kActvDtypeF32 = 1;

struct MatrixHeader {
  std::uint32_t version = kActvVersion;
  std::uint32_t layer = 0;
  std::uint32_t d = 0;
  std::uint64_t n = 0;
  std::uint8_t dtype = kActvDtypeF32;
};

/// Checks shape consistency and that every value is finite.
void validate_matrix(const ActivationMatrix& matrix);

void write_matrix(const ActivationMatrix& matrix, const std::filesystem::path& path);
ActivationMatrix read_matrix(const std::filesystem::path& path);

/// Wraps a headerless little-endian f32 dump of width d as a matrix.
ActivationMatrix import_raw_f32(const std::filesystem::path& path, std::size_t d, std::uint32_t layer);

/// Streams an ACTV1 file in row chunks. The header and the payload length are
/// checked on open; finiteness is checked per chunk.
class MatrixReader {
 public:
  explicit MatrixReader(const std::filesystem::path& path);
  ~MatrixReader();
  MatrixReader(const MatrixReader&) = delete;
  MatrixReader& operator=(const MatrixReader&) = delete;

  const MatrixHeader& header() const noexcept { return header_; }
  std::uint64_t rows_read() const noexcept { return rows_read_; }
  bool done() const noexcept { return rows_read_ == header_.n; }

  /// Fills whole rows into out (size must be a multiple of d); returns rows read.
  std::size_t read_rows(std::span<float> out);

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  MatrixHeader header_;
  std::uint64_t rows_read_ = 0;
};

enum class Category { right, wrong, idk };

const char* category_name(Category c) noexcept;

struct SampleMeta {
  std::string sample_id;
  std::string dataset_id;
  std::string question;
  std::vector<std::string> gold;
  std::string answer;
  bool correct = false;
  Category category = Category::wrong;
  std::optional<double> verbalized_confidence;
};

/// Parses the line-delimited metadata sidecar, one JSON object per line.
std::vector<SampleMeta> read_metadata(const std::filesystem::path& path);
void write_metadata(std::span<const SampleMeta> meta, const std::filesystem::path& path);

struct ClassCounts {
  std::size_t n_true = 0;
  std::size_t n_false = 0;
  std::size_t n_idk = 0;
};

struct LabeledDataset {
  ActivationMatrix matrix;
  std::vector<SampleMeta> meta;
  std::vector<std::uint8_t> labels;  // meta[i].correct
  ClassCounts counts;

  std::size_t size() const noexcept { return matrix.n; }
};

/// Index-aligned pairing of rows with records; never reorders.
LabeledDataset make_dataset(ActivationMatrix matrix, std::vector<SampleMeta> meta);
LabeledDataset join(ActivationMatrix matrix, const std::filesystem::path& meta_path);

/// Copies the given rows, in the given order.
LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> rows);

/// Drops every sample whose id is in ids (keeps the original order of the rest).
LabeledDataset exclude_ids(const LabeledDataset& data, const std::unordered_set<std::string>& ids);

void save_dataset(const LabeledDataset& data, const std::filesystem::path& actv_path,
                  const std::filesystem::path& meta_path);

}  // namespace corrprobe

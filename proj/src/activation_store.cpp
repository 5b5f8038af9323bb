// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/activation_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "corrprobe/error.hpp"
#include "json.hpp"

namespace corrprobe {

static_assert(std::endian::native == std::endian::little,
              "ACTV1 payload I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'A', 'C', 'T', 'V'};
constexpr std::size_t kChunkRows = 1024;

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
void put_u64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

// Payload byte count, or size_overflow if n*d*4 does not fit.
std::uint64_t payload_bytes(std::uint64_t n, std::uint64_t d, const std::string& where) {
  constexpr std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  if (d != 0 && n > max / d / sizeof(float)) {
    fail(Errc::size_overflow, where + ": n*d overflows the declared sizes");
  }
  const std::uint64_t bytes = n * d * sizeof(float);
  if (bytes > std::numeric_limits<std::size_t>::max()) {
    fail(Errc::size_overflow, where + ": payload does not fit in memory");
  }
  return bytes;
}

void check_finite(std::span<const float> values, std::size_t d, std::uint64_t first_row,
                  const std::string& where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(Errc::non_finite, where + ": non-finite value at row " +
                                 std::to_string(first_row + i / d) + ", column " +
                                 std::to_string(i % d));
    }
  }
}

Category parse_category(const std::string& s, std::size_t line) {
  if (s == "right") return Category::right;
  if (s == "wrong") return Category::wrong;
  if (s == "idk") return Category::idk;
  fail(Errc::malformed_record, "line " + std::to_string(line) + ": unknown category '" + s + "'");
}

}  // namespace

const char* category_name(Category c) noexcept {
  switch (c) {
    case Category::right: return "right";
    case Category::wrong: return "wrong";
    case Category::idk: return "idk";
  }
  return "?";
}

void validate_matrix(const ActivationMatrix& m) {
  if (m.n == 0 || m.d == 0) fail(Errc::invalid_argument, "matrix must have n >= 1 and d >= 1");
  if (m.d > std::numeric_limits<std::uint32_t>::max()) {
    fail(Errc::size_overflow, "matrix width exceeds the u32 header field");
  }
  payload_bytes(m.n, m.d, "matrix");
  if (m.values.size() != m.n * m.d) {
    fail(Errc::dimension_mismatch, "matrix holds " + std::to_string(m.values.size()) +
                                       " values, expected n*d = " + std::to_string(m.n * m.d));
  }
  check_finite(m.values, m.d, 0, "matrix");
}

void write_matrix(const ActivationMatrix& m, const std::filesystem::path& path) {
  validate_matrix(m);
  unsigned char header[kActvHeaderSize] = {};
  std::memcpy(header, kMagic, 4);
  put_u32(header + 4, kActvVersion);
  put_u32(header + 8, m.layer);
  put_u32(header + 12, static_cast<std::uint32_t>(m.d));
  put_u64(header + 16, m.n);
  header[24] = kActvDtypeF32;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(header), kActvHeaderSize);
  out.write(reinterpret_cast<const char*>(m.values.data()),
            static_cast<std::streamsize>(m.values.size() * sizeof(float)));
  out.flush();
  if (!out) fail(Errc::io, path.string() + ": write failed");
}

MatrixReader::MatrixReader(const std::filesystem::path& path) : path_(path) {
  const std::string where = path.string();
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) fail(Errc::io, where + ": " + ec.message());
  file_ = std::fopen(where.c_str(), "rb");
  if (file_ == nullptr) fail(Errc::io, where + ": cannot open for reading");

  unsigned char raw[kActvHeaderSize];
  if (file_size < kActvHeaderSize || std::fread(raw, 1, kActvHeaderSize, file_) != kActvHeaderSize) {
    std::fclose(file_);
    file_ = nullptr;
    fail(Errc::truncated, where + ": file shorter than the 32-byte header");
  }
  try {
    if (std::memcmp(raw, kMagic, 4) != 0) fail(Errc::bad_magic, where + ": bad magic");
    header_.version = get_u32(raw + 4);
    if (header_.version != kActvVersion) {
      fail(Errc::unsupported_version,
           where + ": unsupported version " + std::to_string(header_.version));
    }
    header_.layer = get_u32(raw + 8);
    header_.d = get_u32(raw + 12);
    header_.n = get_u64(raw + 16);
    header_.dtype = raw[24];
    if (header_.dtype != kActvDtypeF32) {
      fail(Errc::unsupported_dtype,
           where + ": unsupported dtype code " + std::to_string(header_.dtype));
    }
    for (std::size_t i = 25; i < kActvHeaderSize; ++i) {
      if (raw[i] != 0) fail(Errc::bad_header, where + ": nonzero header padding");
    }
    if (header_.d == 0 || header_.n == 0) fail(Errc::bad_header, where + ": n and d must be >= 1");
    const std::uint64_t expected = payload_bytes(header_.n, header_.d, where);
    const std::uint64_t present = file_size - kActvHeaderSize;
    if (present < expected) {
      fail(Errc::truncated, where + ": header declares " + std::to_string(header_.n) +
                                " rows but only " + std::to_string(present / (4ULL * header_.d)) +
                                " are present");
    }
    if (present > expected) fail(Errc::trailing_data, where + ": bytes after the declared payload");
  } catch (...) {
    std::fclose(file_);
    file_ = nullptr;
    throw;
  }
}

MatrixReader::~MatrixReader() {
  if (file_ != nullptr) std::fclose(file_);
}

std::size_t MatrixReader::read_rows(std::span<float> out) {
  const std::size_t d = header_.d;
  if (out.size() % d != 0) fail(Errc::invalid_argument, "chunk size must be a multiple of d");
  const std::uint64_t want = std::min<std::uint64_t>(out.size() / d, header_.n - rows_read_);
  if (want == 0) return 0;
  const std::size_t count = static_cast<std::size_t>(want) * d;
  if (std::fread(out.data(), sizeof(float), count, file_) != count) {
    fail(Errc::io, path_.string() + ": short read");
  }
  check_finite(out.first(count), d, rows_read_, path_.string());
  rows_read_ += want;
  return static_cast<std::size_t>(want);
}

ActivationMatrix read_matrix(const std::filesystem::path& path) {
  MatrixReader reader(path);
  ActivationMatrix m;
  m.layer = reader.header().layer;
  m.d = reader.header().d;
  m.n = static_cast<std::size_t>(reader.header().n);
  m.values.resize(m.n * m.d);
  std::size_t offset = 0;
  while (!reader.done()) {
    const std::size_t rows = std::min(kChunkRows, m.n - offset / m.d);
    offset += reader.read_rows(std::span<float>(m.values).subspan(offset, rows * m.d)) * m.d;
  }
  return m;
}

ActivationMatrix import_raw_f32(const std::filesystem::path& path, std::size_t d,
                                std::uint32_t layer) {
  const std::string where = path.string();
  if (d == 0) fail(Errc::invalid_argument, "raw import needs d >= 1");
  std::error_code ec;
  const auto bytes = std::filesystem::file_size(path, ec);
  if (ec) fail(Errc::io, where + ": " + ec.message());
  if (bytes == 0 || bytes % (sizeof(float) * d) != 0) {
    fail(Errc::truncated, where + ": size " + std::to_string(bytes) +
                              " is not a whole number of rows of width " + std::to_string(d));
  }
  ActivationMatrix m;
  m.layer = layer;
  m.d = d;
  m.n = bytes / (sizeof(float) * d);
  m.values.resize(m.n * d);
  std::ifstream in(path, std::ios::binary);
  if (!in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(bytes))) {
    fail(Errc::io, where + ": short read");
  }
  check_finite(m.values, d, 0, where);
  return m;
}

std::vector<SampleMeta> read_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, path.string() + ": cannot open metadata");
  std::vector<SampleMeta> out;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string at = path.string() + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(Errc::malformed_record, at + ": " + e.what());
    }
    if (!rec.is_object()) fail(Errc::malformed_record, at + ": record is not an object");
    SampleMeta m;
    try {
      m.sample_id = rec.at("sample_id").get<std::string>();
      m.dataset_id = rec.at("dataset_id").get<std::string>();
      m.question = rec.value("question", std::string{});
      if (rec.contains("gold") && !rec["gold"].is_null()) {
        m.gold = rec["gold"].get<std::vector<std::string>>();
      }
      m.answer = rec.value("answer", std::string{});
      const auto& correct = rec.at("correct");
      if (correct.is_boolean()) {
        m.correct = correct.get<bool>();
      } else {
        const int v = correct.get<int>();
        if (v != 0 && v != 1) fail(Errc::malformed_record, at + ": correct must be 0 or 1");
        m.correct = v == 1;
      }
      m.category = parse_category(rec.at("category").get<std::string>(), line_no);
      if (rec.contains("verbalized_confidence") && !rec["verbalized_confidence"].is_null()) {
        m.verbalized_confidence = rec["verbalized_confidence"].get<double>();
      }
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::malformed_record, at + ": " + e.what());
    }
    const std::string id_note = " (sample_id " + m.sample_id + ")";
    if (m.verbalized_confidence &&
        !(*m.verbalized_confidence >= 0.0 && *m.verbalized_confidence <= 100.0)) {
      fail(Errc::malformed_record, at + id_note + ": verbalized_confidence outside [0,100]");
    }
    if ((m.category == Category::right) != m.correct) {
      fail(Errc::label_contradiction, at + id_note + ": category " + category_name(m.category) +
                                          " contradicts correct=" + (m.correct ? "1" : "0"));
    }
    if (auto [it, inserted] = seen.emplace(m.sample_id, line_no); !inserted) {
      fail(Errc::duplicate_id, at + id_note + ": duplicate of line " + std::to_string(it->second));
    }
    out.push_back(std::move(m));
  }
  return out;
}

void write_metadata(std::span<const SampleMeta> meta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::io, path.string() + ": cannot open for writing");
  for (const auto& m : meta) {
    nlohmann::ordered_json rec;
    rec["sample_id"] = m.sample_id;
    rec["dataset_id"] = m.dataset_id;
    rec["question"] = m.question;
    rec["gold"] = m.gold;
    rec["answer"] = m.answer;
    rec["correct"] = m.correct ? 1 : 0;
    rec["category"] = category_name(m.category);
    if (m.verbalized_confidence) {
      rec["verbalized_confidence"] = *m.verbalized_confidence;
    } else {
      rec["verbalized_confidence"] = nullptr;
    }
    out << rec.dump() << '\n';
  }
  if (!out) fail(Errc::io, path.string() + ": write failed");
}

LabeledDataset make_dataset(ActivationMatrix matrix, std::vector<SampleMeta> meta) {
  if (meta.size() != matrix.n) {
    fail(Errc::count_mismatch, "matrix has " + std::to_string(matrix.n) + " rows but metadata has " +
                                   std::to_string(meta.size()) + " records");
  }
  LabeledDataset data;
  data.labels.reserve(meta.size());
  for (const auto& m : meta) {
    if ((m.category == Category::right) != m.correct) {
      fail(Errc::label_contradiction, "sample_id " + m.sample_id + ": category " +
                                          category_name(m.category) + " contradicts correct flag");
    }
    data.labels.push_back(m.correct ? 1 : 0);
    if (m.correct) {
      ++data.counts.n_true;
    } else {
      ++data.counts.n_false;
      if (m.category == Category::idk) ++data.counts.n_idk;
    }
  }
  if (matrix.dataset_id.empty() && !meta.empty()) matrix.dataset_id = meta.front().dataset_id;
  data.matrix = std::move(matrix);
  data.meta = std::move(meta);
  return data;
}

LabeledDataset join(ActivationMatrix matrix, const std::filesystem::path& meta_path) {
  return make_dataset(std::move(matrix), read_metadata(meta_path));
}

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> rows) {
  ActivationMatrix m;
  m.model_id = data.matrix.model_id;
  m.dataset_id = data.matrix.dataset_id;
  m.layer = data.matrix.layer;
  m.d = data.matrix.d;
  m.n = rows.size();
  m.values.reserve(rows.size() * m.d);
  std::vector<SampleMeta> meta;
  meta.reserve(rows.size());
  for (const std::size_t r : rows) {
    if (r >= data.size()) fail(Errc::invalid_argument, "subset row out of range");
    const auto src = data.matrix.row(r);
    m.values.insert(m.values.end(), src.begin(), src.end());
    meta.push_back(data.meta[r]);
  }
  return make_dataset(std::move(m), std::move(meta));
}

LabeledDataset exclude_ids(const LabeledDataset& data, const std::unordered_set<std::string>& ids) {
  std::vector<std::size_t> keep;
  keep.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!ids.contains(data.meta[i].sample_id)) keep.push_back(i);
  }
  return subset(data, keep);
}

void save_dataset(const LabeledDataset& data, const std::filesystem::path& actv_path,
                  const std::filesystem::path& meta_path) {
  write_matrix(data.matrix, actv_path);
  write_metadata(data.meta, meta_path);
}

}  // namespace corrprobe

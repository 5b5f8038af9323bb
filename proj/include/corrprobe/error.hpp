// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace corrprobe {

// Values are shared with cp_status in corrprobe.h; keep them in sync.
enum class Errc : int {
  ok = 0,
  invalid_argument = 1,
  io = 2,
  bad_magic = 3,
  unsupported_version = 4,
  unsupported_dtype = 5,
  bad_header = 6,
  truncated = 7,
  trailing_data = 8,
  non_finite = 9,
  size_overflow = 10,
  count_mismatch = 11,
  duplicate_id = 12,
  malformed_record = 13,
  label_contradiction = 14,
  empty_class = 15,
  degenerate_direction = 16,
  dimension_mismatch = 17,
  schema = 18,
  single_class = 19,
  nan_score = 20,
  class_too_small = 21,
  inconsistent_layers = 22,
  invalid_spec = 23,
  internal = 24,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace corrprobe

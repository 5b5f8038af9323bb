// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "corrprobe/error.hpp"

namespace corrprobe {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ok: return "ok";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::unsupported_version: return "unsupported_version";
    case Errc::unsupported_dtype: return "unsupported_dtype";
    case Errc::bad_header: return "bad_header";
    case Errc::truncated: return "truncated";
    case Errc::trailing_data: return "trailing_data";
    case Errc::non_finite: return "non_finite";
    case Errc::size_overflow: return "size_overflow";
    case Errc::count_mismatch: return "count_mismatch";
    case Errc::duplicate_id: return "duplicate_id";
    case Errc::malformed_record: return "malformed_record";
    case Errc::label_contradiction: return "label_contradiction";
    case Errc::empty_class: return "empty_class";
    case Errc::degenerate_direction: return "degenerate_direction";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::schema: return "schema";
    case Errc::single_class: return "single_class";
    case Errc::nan_score: return "nan_score";
    case Errc::class_too_small: return "class_too_small";
    case Errc::inconsistent_layers: return "inconsistent_layers";
    case Errc::invalid_spec: return "invalid_spec";
    case Errc::internal: return "internal";
  }
  return "unknown";
}

}  // namespace corrprobe

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corrprobe {

/// 17 significant digits, locale-independent; round-trips every double.
std::string format_double(double value);

/// JSON array of format_double values.
std::string json_number_array(std::span<const double> values);

/// Quotes a field when it contains a comma, quote, or line break.
std::string csv_field(std::string_view value);

std::string csv_row(const std::vector<std::string>& fields);

void write_text(const std::filesystem::path& path, std::string_view content);

}  // namespace corrprobe

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace corrprobe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace corrprobe

// Copyright 2026 The corrprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "corrprobe/rng.hpp"

namespace corrprobe {

void Rng::normal_pair(double& z0, double& z1) noexcept {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  z0 = radius * std::cos(angle);
  z1 = radius * std::sin(angle);
}

}  // namespace corrprobe

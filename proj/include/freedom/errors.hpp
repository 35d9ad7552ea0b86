// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace freedom {

// Precondition or shape violation; programmer error.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed or missing configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Missing, unreadable, or malformed data/checkpoint files.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf encountered where finite math is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace freedom

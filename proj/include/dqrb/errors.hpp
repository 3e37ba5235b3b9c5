#pragma once

#include <stdexcept>
#include <string>

namespace dqrb {

// Error taxonomy shared by all modules. The CLI maps each type to a distinct
// exit code (see tools/dqrb_main.cpp).

// Input is mathematically unusable: zero norm where a direction is needed,
// non-unit where unit is required, non-positive mass/dt, empty dataset.
struct DegenerateInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Logarithm requested outside the principal branch.
struct BranchCut : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor/layer dimension mismatch.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid or contradictory configuration (bad key, unsupported combination).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Serialized artifact carries an unknown or incompatible schema version.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Required file is missing or unreadable / output path cannot be written.
struct FileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dqrb

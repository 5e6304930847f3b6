#pragma once

#include <stdexcept>
#include <string>

namespace scgan {

// Bad user input: config files, CLI flags, out-of-range ratios. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed data files (corpus, checkpoint). CLI exit code 2.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse inside the process: shape mismatches, empty batches where
// a batch is required.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Training produced a non-finite loss. CLI exit code 1.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scgan

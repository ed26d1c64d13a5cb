#pragma once

#include <stdexcept>
#include <string>

namespace opo {

// Every error the toolkit raises derives from one of these so that the CLI can
// map it onto a stable exit code.

/// Malformed input data, configuration, or file schema.
class SchemaError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input that is well formed but carries no usable information
/// (threshold not bracketed, no extrema, unidentifiable fit, pole).
class AnalysisError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Anti-squeezed variance diverges: (1 - sqrt(G))^2 + (2 pi f / Gamma)^2 == 0.
class PoleError : public AnalysisError {
public:
  using AnalysisError::AnalysisError;
};

/// Design search with no admissible point.
class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace opo

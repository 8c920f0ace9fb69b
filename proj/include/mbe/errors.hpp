#pragma once

#include <stdexcept>
#include <string>

namespace mbe {

// Error taxonomy shared by the whole library. The CLI maps these onto exit
// codes: usage_error -> 2, io/format/dim/data -> 3, numeric_error -> 4.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File could not be opened, read or written.
struct io_error : error {
  using error::error;
};

// Malformed file contents: bad magic, bad header, unparsable CSV/JSON,
// split-shorthand grammar violations.
struct format_error : error {
  using error::error;
};

// Shape mismatch between matrices that must be aligned.
struct dim_error : error {
  using error::error;
};

// Values violate data invariants: NaN/Inf, empty matrix, zero variance,
// missing tags, run-boundary mismatch.
struct data_error : error {
  using error::error;
};

// Numerical failure: rank-0 design, underflow in the forward pass, solver
// breakdown.
struct numeric_error : error {
  using error::error;
};

// Bad flags or config handed to the CLI layer.
struct usage_error : error {
  using error::error;
};

}  // namespace mbe

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eg {

// Bad arguments or incompatible shapes. CLI exit code 2.
struct invalid_argument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed input data. CLI exit code 3.
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse failure carrying a 1-based line number.
struct parse_error : data_error {
  parse_error(const std::string& what, std::size_t line_no)
      : data_error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
  std::size_t line;
};

// Non-finite values or divergence during numeric work. CLI exit code 4.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
  numeric_error(const std::string& what, std::size_t step_index)
      : std::runtime_error(what + " (step " + std::to_string(step_index) + ")"),
        step(step_index) {}
  std::size_t step = 0;
};

// A caller broke a documented contract, e.g. a non-deterministic forward
// handed to grad_check.
struct contract_violation : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace eg

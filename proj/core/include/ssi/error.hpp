#pragma once

#include <stdexcept>
#include <string>

namespace ssi {

enum class errc {
  dimension_mismatch,
  fully_missing_column,
  undeclared_class,
  empty_observed_set,
  all_rows_degenerate,
  singular_design,
  leverage_one,
  calibration_failed,
  all_grid_points_failed,
  non_positive_definite,
  parse_error,
  schema_mismatch,
  io_error,
  invalid_argument,
};

const char* errc_name(errc code);

/// Process exit code class for a failure: 2 for data problems, 3 for numeric ones.
int exit_code_for(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

}  // namespace ssi

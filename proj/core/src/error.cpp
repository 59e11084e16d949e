#include "ssi/error.hpp"

namespace ssi {

const char* errc_name(errc code) {
  switch (code) {
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::fully_missing_column: return "FullyMissingColumn";
    case errc::undeclared_class: return "UndeclaredClass";
    case errc::empty_observed_set: return "EmptyObservedSet";
    case errc::all_rows_degenerate: return "AllRowsDegenerate";
    case errc::singular_design: return "SingularDesign";
    case errc::leverage_one: return "LeverageOne";
    case errc::calibration_failed: return "CalibrationFailed";
    case errc::all_grid_points_failed: return "AllGridPointsFailed";
    case errc::non_positive_definite: return "NonPositiveDefiniteCovariance";
    case errc::parse_error: return "ParseError";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::io_error: return "IoError";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

int exit_code_for(errc code) {
  switch (code) {
    case errc::dimension_mismatch:
    case errc::fully_missing_column:
    case errc::undeclared_class:
    case errc::parse_error:
    case errc::schema_mismatch:
    case errc::io_error:
    case errc::invalid_argument:
      return 2;
    default:
      return 3;
  }
}

}  // namespace ssi

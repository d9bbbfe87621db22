#pragma once

#include <stdexcept>
#include <string>

namespace bmv {

enum class errc {
  // input validation
  bad_input,
  asymmetric_input,
  negative_b,
  size_limit,
  infeasible,
  degenerate_b,
  insufficient_grid,
  // numerical failures
  overflow,
  pole_in_c,
  truncation_failure,
  degenerate_d,
  degenerate_direction,
  breakpoint,
  tail_bound_exceeded,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void raise(errc code, const std::string& msg) { throw Error(code, msg); }

// Validation errors are caller mistakes; everything else is a numerical failure.
inline bool is_validation(errc c) {
  switch (c) {
    case errc::bad_input:
    case errc::asymmetric_input:
    case errc::negative_b:
    case errc::size_limit:
    case errc::infeasible:
    case errc::degenerate_b:
    case errc::insufficient_grid:
      return true;
    default:
      return false;
  }
}

const char* to_string(errc c);

}  // namespace bmv

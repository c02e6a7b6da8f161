#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qrf/linalg.hpp"

namespace qrf::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kScope = 3,
  kVerificationFailed = 4,
};

inline constexpr const char* kSweepHeader =
    "N,seed,err,sep_xx,sep_yy,sep_zz,off_xy,off_xz,off_yx,off_yz,off_zx,off_zy,"
    "bound_total,bound_diag,bound_off,pass";

/// Parses "bloch:THETA,PHI", "mixed", "random" (uses seed) or "file:PATH"
/// (JSON object {"re": [[...]], "im": [[...]]}). Throws InvalidInput.
DensityMatrix parse_state(const std::string& spec, int dim, unsigned long seed);

/// Comma-separated reals.
std::vector<double> parse_list(const std::string& text);

/// %.17g
std::string format_double(double v);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qrf::cli

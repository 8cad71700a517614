#pragma once

#include <cmath>
#include <utility>

#include "nvrotor/errors.hpp"

namespace nvrotor {

/// Bisection root of f on [lo, hi] to a fixed relative tolerance.
/// The bracket must change sign; all target functions in this library are
/// monotone on their physical brackets, so robustness beats speed here.
template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol = 1e-6, int max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw ComputeError("bisect: no sign change over bracket");
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * std::abs(mid)) break;
  }
  return 0.5 * (lo + hi);
}

} // namespace nvrotor

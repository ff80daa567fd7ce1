#pragma once

#include <cmath>
#include <utility>

namespace qss {

struct LineSearchResult {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

/// Golden-section search for the minimum of a unimodal `f` on [lo, hi].
/// Stops when the bracket is narrower than `tol` or after `max_iter` steps.
template <class F>
LineSearchResult golden_section_minimize(F&& f, double lo, double hi, double tol,
                                         int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int evals = 2;
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
    ++evals;
  }
  // Report the best interior probe rather than an unevaluated midpoint.
  if (fc < fd) return {c, fc, evals};
  return {d, fd, evals};
}

template <class F>
LineSearchResult golden_section_maximize(F&& f, double lo, double hi, double tol,
                                         int max_iter = 200) {
  LineSearchResult r =
      golden_section_minimize([&](double x) { return -f(x); }, lo, hi, tol, max_iter);
  r.value = -r.value;
  return r;
}

}  // namespace qss

#pragma once

// Brute-force Kato coefficients, written independently of the library.
// For each a the smallest admissible b follows from the failure constraint,
// so the deviation is a function of a alone; it is scanned on a dense grid
// over the region where the (1 +- 4a/(3 sqrt k)) factor stays positive and
// the best cell is refined by ternary search in long double.

#include <cmath>

namespace oracle {

struct KatoOracle {
  long double a = 0;
  long double b = 0;
  long double deviation = 0;
};

inline long double kato_scale(long double a, long double k, bool upper) {
  const long double s = 4.0L * a / (3.0L * std::sqrt(k));
  return upper ? 1.0L + s : 1.0L - s;
}

inline long double kato_b(long double a, long double k, long double eps, bool upper) {
  const long double f = kato_scale(a, k, upper);
  return std::sqrt(a * a + 0.5L * f * f * std::log(1.0L / eps));
}

inline long double kato_dev(long double a, long double lambda, long double k, long double eps,
                            bool upper) {
  return (kato_b(a, k, eps, upper) + a * (2.0L * lambda / k - 1.0L)) * std::sqrt(k);
}

inline KatoOracle kato_bruteforce(long double lambda, long double k, long double eps, bool upper) {
  const long double root_k = std::sqrt(k);
  // Positive-scale region: a > -3 sqrt(k)/4 (upper) or a < 3 sqrt(k)/4 (lower).
  long double lo = upper ? -0.75L * root_k : -3.0L * root_k;
  long double hi = upper ? 3.0L * root_k : 0.75L * root_k;
  const long double margin = 1e-9L * root_k;
  lo += margin;
  hi -= margin;

  constexpr int kCells = 4000;
  const long double step = (hi - lo) / kCells;
  int best = 0;
  long double best_dev = kato_dev(lo, lambda, k, eps, upper);
  for (int i = 1; i <= kCells; ++i) {
    const long double d = kato_dev(lo + i * step, lambda, k, eps, upper);
    if (d < best_dev) {
      best_dev = d;
      best = i;
    }
  }
  long double l = lo + (best > 0 ? best - 1 : 0) * step;
  long double r = lo + (best < kCells ? best + 1 : kCells) * step;
  for (int it = 0; it < 300; ++it) {
    const long double m1 = l + (r - l) / 3.0L;
    const long double m2 = r - (r - l) / 3.0L;
    if (kato_dev(m1, lambda, k, eps, upper) < kato_dev(m2, lambda, k, eps, upper)) {
      r = m2;
    } else {
      l = m1;
    }
  }
  KatoOracle o;
  o.a = 0.5L * (l + r);
  o.b = kato_b(o.a, k, eps, upper);
  o.deviation = kato_dev(o.a, lambda, k, eps, upper);
  return o;
}

}  // namespace oracle

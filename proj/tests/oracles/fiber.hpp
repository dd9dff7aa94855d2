#pragma once
// The fiber energy of a breakdown under the dilation u(x / tau), written out term by term,
// and a dense scan for its maximum. Uses the library's plain data types only.

#include <algorithm>
#include <cmath>

#include "choquard/functionals.hpp"

namespace oracle {

using choquard::EnergyBreakdown;
using choquard::Params;

inline double phi(const EnergyBreakdown& e, const Params& P, double t) {
  const int N = P.N;
  return 0.5 * e.kinetic * std::pow(t, N - 2) + 0.5 * e.mass * std::pow(t, N) -
         P.mu * e.nonlocal / (2.0 * P.p) * std::pow(t, N + P.alpha) - P.lambda * e.local / P.q * std::pow(t, N);
}

inline double phi_prime(const EnergyBreakdown& e, const Params& P, double t) {
  const int N = P.N;
  return 0.5 * (N - 2) * e.kinetic * std::pow(t, N - 3) + 0.5 * N * e.mass * std::pow(t, N - 1) -
         P.mu * (N + P.alpha) * e.nonlocal / (2.0 * P.p) * std::pow(t, N + P.alpha - 1) -
         P.lambda * N * e.local / P.q * std::pow(t, N - 1);
}

struct Scan {
  int sign_changes = 0;
  double first_sign = 0.0;
  double max_value = 0.0;
};

// Log scan over [1e-6, 1e6], then golden section on the best bracket.
inline Scan dense_scan(const EnergyBreakdown& e, const Params& P) {
  constexpr int kPoints = 120001;
  auto tau = [](int i) { return std::pow(10.0, -6.0 + 12.0 * i / (kPoints - 1)); };
  Scan s;
  double prev = 0.0;
  int best = 0;
  double best_value = -1.0;
  for (int i = 0; i < kPoints; ++i) {
    const double t = tau(i);
    const double d = phi_prime(e, P, t);
    const double sign = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    if (i == 0) s.first_sign = sign;
    if (sign != 0.0 && prev != 0.0 && sign != prev) ++s.sign_changes;
    if (sign != 0.0) prev = sign;
    const double v = phi(e, P, t);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double lo = tau(std::max(best - 1, 0)), hi = tau(std::min(best + 1, kPoints - 1));
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = phi(e, P, x1), f2 = phi(e, P, x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = phi(e, P, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = phi(e, P, x1);
    }
  }
  s.max_value = std::max({best_value, f1, f2});
  return s;
}

}  // namespace oracle

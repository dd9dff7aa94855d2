#pragma once
// Closed forms used as independent oracles. Only <cmath> is used here, never the library.

#include <cmath>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

inline double sphere_area(int N) { return 2.0 * std::pow(pi, 0.5 * N) / std::tgamma(0.5 * N); }

inline double riesz_A(int N, double a) {
  return std::tgamma(0.5 * (N - a)) / (std::tgamma(0.5 * a) * std::pow(pi, 0.5 * N) * std::pow(2.0, a));
}

inline double hls_C(int N, double a) {
  return std::pow(pi, 0.5 * (N - a)) * std::tgamma(0.5 * a) / std::tgamma(0.5 * (N + a)) *
         std::pow(std::tgamma(0.5 * N) / std::tgamma(double(N)), -a / N);
}

// Best Sobolev constant N(N-2)/4 |S^N|^{2/N}.
inline double sobolev_S(int N) { return 0.25 * N * (N - 2) * std::pow(sphere_area(N + 1), 2.0 / N); }

// The lower-critical quotient is attained by (1 + r^2)^{-N/2}, which turns it into the HLS
// quotient for f = V^{p_lower}: S_1 = (A C)^{-N/(N+alpha)}.
inline double lower_S1(int N, double a) { return std::pow(riesz_A(N, a) * hls_C(N, a), -double(N) / (N + a)); }

inline double upper_S_alpha(int N, double a) {
  return sobolev_S(N) / std::pow(riesz_A(N, a) * hls_C(N, a), (N - 2.0) / (N + a));
}

// Newtonian potential of the unit-ball indicator in R^3.
inline double newton_ball(double r) { return r <= 1.0 ? (3.0 - r * r) / 6.0 : 1.0 / (3.0 * r); }

// |S^{N-2}| int_0^pi sin^{N-2}(t) (r^2 + s^2 - 2 r s cos t)^{(alpha-N)/2} dt by composite Simpson.
inline double angular_kernel_theta(int N, double a, double r, double s, int panels = 10000) {
  auto f = [&](double t) {
    return std::pow(std::sin(t), N - 2) * std::pow(r * r + s * s - 2.0 * r * s * std::cos(t), 0.5 * (a - N));
  };
  const double h = pi / panels;
  double sum = f(0.0) + f(pi);
  for (int k = 1; k < panels; ++k) sum += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return sphere_area(N - 1) * sum * h / 3.0;
}

// Positive root of phi'(tau) for the breakdown (1,1,1,1), N=3, alpha=2, p=2, q=3:
// 0.5 + 0.5 tau^2 - 1.25 tau^4 = 0.
inline double tau0_unit_breakdown() { return std::sqrt((0.5 + std::sqrt(2.75)) / 2.5); }

}  // namespace oracle

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "choquard/grid.hpp"

namespace choquard {

/// A_alpha(N) = Gamma((N-alpha)/2) / (Gamma(alpha/2) pi^{N/2} 2^alpha).
double riesz_normalization(int N, double alpha);

/// Sharp Hardy-Littlewood-Sobolev constant for the diagonal exponent t = 2N/(N+alpha).
double hls_constant(int N, double alpha);

/// Angular integral of |x - y|^{alpha-N} over the sphere of radius s around the origin,
/// divided by s^{N-1}: the reduced kernel k(r, s) with int f(|y|)|x-y|^{alpha-N} dy =
/// int_0^inf k(|x|, s) f(s) s^{N-1} ds.
///
/// For r == s the limit is returned when it is finite (alpha > 1); otherwise DegenerateInput.
double angular_kernel(int N, double alpha, double r, double s);

/// Evaluates k(r, s) for fixed (N, alpha). Precomputes the hypergeometric expansions once.
class AngularKernel {
 public:
  AngularKernel(int N, double alpha);
  double operator()(double r, double s) const;

  int dimension() const { return N_; }
  double alpha() const { return alpha_; }

 private:
  enum class Mode { closed3, terminating, direct_and_connection, log_zero, log_integer, quadrature };

  double profile(double z) const;  // 2F1(a, b; c; z) for 0 <= z < 1
  double by_quadrature(double rho) const;

  int N_;
  double alpha_;
  double area_;        // |S^{N-1}|
  double area_lower_;  // |S^{N-2}|
  Mode mode_;
  double a_, b_, c_, m_;
  std::vector<double> direct_;  // Gauss series coefficients
  double c1_ = 0.0, c2_ = 0.0;
  std::vector<double> first_, second_, logs_;
  std::vector<double> finite_;  // finite sum of the integer-gap connection formula
};

/// Dense reduced kernel on a grid. Off-diagonal entries are k(r_i, r_j); each diagonal entry
/// is chosen so that the row reproduces the exact integral of k(r_i, .) over (0, rmax).
class RieszKernel {
 public:
  RieszKernel(GridPtr grid, double alpha);

  double alpha() const { return alpha_; }
  int dimension() const { return grid_->dimension(); }
  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  double normalization() const { return normalization_; }

  double entry(std::size_t i, std::size_t j) const { return k_[i * n_ + j]; }

  /// sum_j k_ij W_j f_j, the potential without A_alpha.
  std::vector<double> apply_reduced(std::span<const double> f) const;
  /// A_alpha(N) * apply_reduced(f).
  std::vector<double> apply(std::span<const double> f) const;

  /// |S^{N-1}| sum_i W_i v_i sum_j k_ij W_j u_j, i.e. the double integral without A_alpha.
  double bilinear(std::span<const double> u, std::span<const double> v) const;

 private:
  GridPtr grid_;
  double alpha_;
  double normalization_;
  std::size_t n_;
  std::vector<double> k_;
};

using KernelPtr = std::shared_ptr<const RieszKernel>;

/// Kernel for (grid, alpha), built once per distinct grid spec and alpha and then shared.
KernelPtr riesz_kernel(const GridPtr& grid, double alpha);

RadialField riesz_apply(const RadialField& f, double alpha);
RadialField riesz_apply(const RadialField& f, const RieszKernel& kernel);

double hls_bilinear(const RadialField& u, const RadialField& v, double alpha);
double hls_bilinear(const RadialField& u, const RadialField& v, const RieszKernel& kernel);

/// hls_bilinear(u, v) / (|u|_t |v|_t) with t = 2N/(N + alpha); bounded by hls_constant.
double hls_ratio(const RadialField& u, const RadialField& v, double alpha);
double hls_ratio(const RadialField& u, const RadialField& v, const RieszKernel& kernel);

/// int_0^rmax k(r, s) s^{N-1} ds, evaluated from the spherical-shell geometry.
double kernel_row_integral(int N, double alpha, double r, double rmax);

}  // namespace choquard

#pragma once

#include <string>
#include <vector>

#include "choquard/grid.hpp"
#include "choquard/riesz.hpp"

namespace choquard {

/// Problem data for -Delta u + u = mu (I_alpha * |u|^p)|u|^{p-2}u + lambda |u|^{q-2}u.
struct Params {
  int N = 3;
  double alpha = 2.0;
  double p = 2.0;
  double q = 3.0;
  double mu = 1.0;
  double lambda = 1.0;

  double p_lower() const { return (N + alpha) / N; }
  double p_upper() const { return (N + alpha) / (N - 2.0); }
  double q_upper() const { return 2.0 * N / (N - 2.0); }

  /// Throws InvalidInput unless N >= 3, 0 < alpha < N, p_lower <= p <= p_upper,
  /// 2 < q <= q_upper, mu > 0 and lambda >= 0 (lambda = 0 is the pure Choquard problem).
  void validate() const;

  bool operator==(const Params&) const = default;
};

/// Exponents closer than this to a critical value are treated as critical.
inline constexpr double kCriticalTolerance = 1e-12;

/// The four integrals every functional is assembled from.
struct EnergyBreakdown {
  double kinetic = 0.0;   // a = int |grad u|^2
  double mass = 0.0;      // b = int u^2
  double nonlocal = 0.0;  // c = int (I_alpha * |u|^p)|u|^p
  double local = 0.0;     // d = int |u|^q

  bool operator==(const EnergyBreakdown&) const = default;
};

// Formulas on breakdowns.
double energy(const EnergyBreakdown& e, const Params& params);
double pohozaev(const EnergyBreakdown& e, const Params& params);
double nehari(const EnergyBreakdown& e, const Params& params);

/// Breakdown of u_tau(x) = u(x/tau) from the scaling laws of the four integrals.
EnergyBreakdown dilate(const EnergyBreakdown& e, double tau, const Params& params);

/// phi(tau) = J(u_tau) and its derivative, from the breakdown alone.
double fiber_energy(const EnergyBreakdown& e, double tau, const Params& params);
double fiber_slope(const EnergyBreakdown& e, double tau, const Params& params);

/// phi'(t) / t^{N-3}; a polynomial-like function with exactly one positive root when a, c > 0.
double fiber_root_function(const EnergyBreakdown& e, double t, const Params& params);

/// The unique tau0 > 0 with P(u_tau0) = 0. Throws DegenerateInput when a = 0 or c = 0.
double project_pohozaev(const EnergyBreakdown& e, const Params& params);

/// max_{tau >= 0} phi(tau) = phi(tau0).
double reduced_energy(const EnergyBreakdown& e, const Params& params);

/// u_tau(r) = u(r / tau) resampled on the same grid; tau = 0 gives the zero field.
RadialField dilate(const RadialField& u, double tau);

/// Params bound to a Riesz kernel on a grid; evaluates the functionals on fields.
class Problem {
 public:
  Problem(const Params& params, const GridPtr& grid);
  Problem(const Params& params, KernelPtr kernel);

  const Params& params() const { return params_; }
  const RadialGrid& grid() const { return kernel_->grid(); }
  const GridPtr& grid_ptr() const { return kernel_->grid_ptr(); }
  const RieszKernel& kernel() const { return *kernel_; }
  const KernelPtr& kernel_ptr() const { return kernel_; }

  EnergyBreakdown breakdown(std::span<const double> u) const;
  EnergyBreakdown breakdown(const RadialField& u) const { return breakdown(u.values()); }

  /// mu (I_alpha * |u|^p)|u|^{p-2}u + lambda |u|^{q-2}u, together with the breakdown of u.
  struct Evaluation {
    EnergyBreakdown breakdown;
    std::vector<double> nonlinearity;
  };
  Evaluation evaluate(std::span<const double> u) const;

  double energy(const RadialField& u) const;
  double pohozaev(const RadialField& u) const;
  double nehari(const RadialField& u) const;

  /// H1-Riesz representative g of J'(u): <g, w>_H1 = J'(u)w for discrete w vanishing at rmax.
  RadialField gradient_residual(const RadialField& u) const;

  double fiber_energy(const RadialField& u, double tau) const;
  double project_pohozaev(const RadialField& u) const;
  double reduced_energy(const RadialField& u) const;

 private:
  Params params_;
  KernelPtr kernel_;
};

// Field-level convenience forms; the Riesz kernel comes from the shared cache.
EnergyBreakdown breakdown(const RadialField& u, const Params& params);
double energy(const RadialField& u, const Params& params);
double pohozaev(const RadialField& u, const Params& params);
double nehari(const RadialField& u, const Params& params);
RadialField gradient_residual(const RadialField& u, const Params& params);
double fiber_energy(const RadialField& u, double tau, const Params& params);
double project_pohozaev(const RadialField& u, const Params& params);
double reduced_energy(const RadialField& u, const Params& params);

}  // namespace choquard

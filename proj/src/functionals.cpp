#include "choquard/functionals.hpp"

#include <cmath>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

void Params::validate() const {
  std::ostringstream os;
  if (N < 3) {
    os << "N must be at least 3 (got " << N << ")";
  } else if (!(alpha > 0.0 && alpha < N)) {
    os << "alpha must lie in (0, N) (got " << alpha << ")";
  } else if (!(p >= p_lower() - kCriticalTolerance && p <= p_upper() + kCriticalTolerance)) {
    os << "p must lie in [" << p_lower() << ", " << p_upper() << "] (got " << p << ")";
  } else if (!(q > 2.0 && q <= q_upper() + kCriticalTolerance)) {
    os << "q must lie in (2, " << q_upper() << "] (got " << q << ")";
  } else if (!(mu > 0.0) || !std::isfinite(mu)) {
    os << "mu must be positive (got " << mu << ")";
  } else if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    os << "lambda must be nonnegative (got " << lambda << ")";
  } else {
    return;
  }
  throw InvalidInput(os.str());
}

double energy(const EnergyBreakdown& e, const Params& P) {
  return 0.5 * e.kinetic + 0.5 * e.mass - P.mu * e.nonlocal / (2.0 * P.p) - P.lambda * e.local / P.q;
}

double pohozaev(const EnergyBreakdown& e, const Params& P) {
  const int N = P.N;
  return 0.5 * (N - 2) * e.kinetic + 0.5 * N * e.mass - P.mu * (N + P.alpha) * e.nonlocal / (2.0 * P.p) -
         P.lambda * N * e.local / P.q;
}

double nehari(const EnergyBreakdown& e, const Params& P) {
  return e.kinetic + e.mass - P.mu * e.nonlocal - P.lambda * e.local;
}

EnergyBreakdown dilate(const EnergyBreakdown& e, double tau, const Params& P) {
  if (!(tau >= 0.0)) throw InvalidInput("dilation factor must be nonnegative");
  const double tN = std::pow(tau, P.N);
  return {e.kinetic * std::pow(tau, P.N - 2), e.mass * tN, e.nonlocal * std::pow(tau, P.N + P.alpha),
          e.local * tN};
}

double fiber_energy(const EnergyBreakdown& e, double tau, const Params& P) {
  if (!(tau >= 0.0)) throw InvalidInput("fiber parameter must be nonnegative");
  if (tau == 0.0) return 0.0;
  return energy(dilate(e, tau, P), P);
}

double fiber_root_function(const EnergyBreakdown& e, double t, const Params& P) {
  const int N = P.N;
  return 0.5 * (N - 2) * e.kinetic + N * (0.5 * e.mass - P.lambda * e.local / P.q) * t * t -
         P.mu * (N + P.alpha) * e.nonlocal / (2.0 * P.p) * std::pow(t, 2.0 + P.alpha);
}

double fiber_slope(const EnergyBreakdown& e, double tau, const Params& P) {
  if (!(tau >= 0.0)) throw InvalidInput("fiber parameter must be nonnegative");
  return std::pow(tau, P.N - 3) * fiber_root_function(e, tau, P);
}

double project_pohozaev(const EnergyBreakdown& e, const Params& P) {
  if (!(e.kinetic > 0.0)) throw DegenerateInput("Pohozaev projection undefined: kinetic term is zero");
  if (!(e.nonlocal > 0.0)) throw DegenerateInput("Pohozaev projection undefined: nonlocal term is zero");
  auto g = [&](double t) { return fiber_root_function(e, t, P); };
  double lo = 1e-6;
  while (!(g(lo) > 0.0)) {
    lo *= 1e-3;
    if (lo < 1e-300) throw NumericalFailure("Pohozaev projection: no positive lower bracket");
  }
  double hi = std::max(1.0, 2.0 * lo);
  while (!(g(hi) < 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw NumericalFailure("Pohozaev projection: no negative upper bracket");
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double reduced_energy(const EnergyBreakdown& e, const Params& P) {
  return fiber_energy(e, project_pohozaev(e, P), P);
}

RadialField dilate(const RadialField& u, double tau) {
  if (!(tau >= 0.0)) throw InvalidInput("dilation factor must be nonnegative");
  if (tau == 0.0) return RadialField::zeros(u.grid_ptr());
  const auto r = u.grid().nodes();
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = interpolate(u, r[i] / tau);
  return RadialField(u.grid_ptr(), std::move(v));
}

Problem::Problem(const Params& params, const GridPtr& grid)
    : Problem(params, (params.validate(), riesz_kernel(grid, params.alpha))) {}

Problem::Problem(const Params& params, KernelPtr kernel) : params_(params), kernel_(std::move(kernel)) {
  params_.validate();
  if (!kernel_) throw InvalidInput("problem needs a Riesz kernel");
  if (kernel_->dimension() != params_.N) throw InvalidInput("kernel dimension differs from params.N");
  if (kernel_->alpha() != params_.alpha) throw InvalidInput("kernel alpha differs from params.alpha");
}

Problem::Evaluation Problem::evaluate(std::span<const double> u) const {
  const auto& grid = this->grid();
  const std::size_t M = grid.size();
  if (u.size() != M) throw InvalidInput("field length does not match grid");
  const double p = params_.p;
  const double q = params_.q;
  std::vector<double> up(M), uq(M), u2(M);
  for (std::size_t i = 0; i < M; ++i) {
    const double a = std::abs(u[i]);
    up[i] = std::pow(a, p);
    uq[i] = std::pow(a, q);
    u2[i] = a * a;
  }
  const auto pot = kernel_->apply(up);
  Evaluation out;
  std::vector<double> cp(M);
  for (std::size_t i = 0; i < M; ++i) cp[i] = pot[i] * up[i];
  out.breakdown = {grad_sq(grid, u), integrate(grid, u2), integrate(grid, cp), integrate(grid, uq)};
  out.nonlinearity.resize(M);
  for (std::size_t i = 0; i < M; ++i) {
    const double a = std::abs(u[i]);
    if (a == 0.0) {
      out.nonlinearity[i] = 0.0;
      continue;
    }
    const double sign = u[i] > 0.0 ? 1.0 : -1.0;
    out.nonlinearity[i] =
        sign * (params_.mu * pot[i] * std::pow(a, p - 1.0) + params_.lambda * std::pow(a, q - 1.0));
  }
  return out;
}

EnergyBreakdown Problem::breakdown(std::span<const double> u) const { return evaluate(u).breakdown; }

double Problem::energy(const RadialField& u) const { return choquard::energy(breakdown(u), params_); }
double Problem::pohozaev(const RadialField& u) const { return choquard::pohozaev(breakdown(u), params_); }
double Problem::nehari(const RadialField& u) const { return choquard::nehari(breakdown(u), params_); }

RadialField Problem::gradient_residual(const RadialField& u) const {
  const auto ev = evaluate(u.values());
  auto w = h1_solve(grid(), ev.nonlinearity);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] - w[i];
  return RadialField(u.grid_ptr(), std::move(w));
}

double Problem::fiber_energy(const RadialField& u, double tau) const {
  return choquard::fiber_energy(breakdown(u), tau, params_);
}

double Problem::project_pohozaev(const RadialField& u) const {
  return choquard::project_pohozaev(breakdown(u), params_);
}

double Problem::reduced_energy(const RadialField& u) const {
  return choquard::reduced_energy(breakdown(u), params_);
}

EnergyBreakdown breakdown(const RadialField& u, const Params& params) {
  return Problem(params, u.grid_ptr()).breakdown(u);
}
double energy(const RadialField& u, const Params& params) { return Problem(params, u.grid_ptr()).energy(u); }
double pohozaev(const RadialField& u, const Params& params) {
  return Problem(params, u.grid_ptr()).pohozaev(u);
}
double nehari(const RadialField& u, const Params& params) { return Problem(params, u.grid_ptr()).nehari(u); }
RadialField gradient_residual(const RadialField& u, const Params& params) {
  return Problem(params, u.grid_ptr()).gradient_residual(u);
}
double fiber_energy(const RadialField& u, double tau, const Params& params) {
  return Problem(params, u.grid_ptr()).fiber_energy(u, tau);
}
double project_pohozaev(const RadialField& u, const Params& params) {
  return Problem(params, u.grid_ptr()).project_pohozaev(u);
}
double reduced_energy(const RadialField& u, const Params& params) {
  return Problem(params, u.grid_ptr()).reduced_energy(u);
}

}  // namespace choquard

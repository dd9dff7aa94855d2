#include "choquard/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

void VerificationReport::add(Check c) {
  overall = overall && c.passed;
  checks.push_back(std::move(c));
}

namespace {

bool is_zero(const RadialField& u) {
  return std::all_of(u.values().begin(), u.values().end(), [](double x) { return x == 0.0; });
}

Check identity_check(const std::string& name, double value, const EnergyBreakdown& e, double tol) {
  Check c;
  c.name = name;
  c.measured = std::abs(value);
  c.bound = tol * (e.kinetic + e.mass);
  c.passed = c.measured <= c.bound;
  return c;
}

}  // namespace

Check check_pohozaev_identity(const RadialField& u, const Params& params, double tol) {
  const auto e = breakdown(u, params);
  auto c = identity_check("pohozaev_identity", pohozaev(e, params), e, tol);
  if (is_zero(u)) {
    c.passed = true;
    c.degenerate = true;
    c.detail = "zero field";
  }
  return c;
}

Check check_nehari_identity(const RadialField& u, const Params& params, double tol) {
  const auto e = breakdown(u, params);
  auto c = identity_check("nehari_identity", nehari(e, params), e, tol);
  if (is_zero(u)) {
    c.passed = true;
    c.degenerate = true;
    c.detail = "zero field";
  }
  return c;
}

FiberMaximum fiber_scan_maximum(const EnergyBreakdown& e, const Params& params) {
  constexpr int kScan = 60001;
  const double lo = std::log(1e-3), hi = std::log(1e3);
  const double h = (hi - lo) / (kScan - 1);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kScan; ++k) {
    const double v = fiber_energy(e, std::exp(lo + h * k), params);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  double a = lo + h * std::max(best - 1, 0), b = lo + h * std::min(best + 1, kScan - 1);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto phi = [&](double s) { return fiber_energy(e, std::exp(s), params); };
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = phi(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = phi(x1);
    }
  }
  FiberMaximum out{std::exp(0.5 * (a + b)), phi(0.5 * (a + b))};
  if (best_value > out.value) out = {std::exp(lo + h * best), best_value};
  return out;
}

Check check_mountain_pass_consistency(const SolveReport& report, double tol) {
  if (report.status != SolveStatus::converged) {
    throw InvalidInput("mountain-pass check needs a converged report (status " + to_string(report.status) + ")");
  }
  const auto e = breakdown(report.profile, report.params);
  const double J = energy(e, report.params);
  const auto top = fiber_scan_maximum(e, report.params);
  Check c;
  c.name = "mountain_pass_consistency";
  c.measured = std::abs(J - top.value) / std::abs(J);
  c.bound = tol;
  c.passed = c.measured <= c.bound;
  std::ostringstream os;
  os.precision(12);
  os << "fiber maximum at tau = " << top.tau;
  c.detail = os.str();
  return c;
}

namespace {

double max_ripple(const RadialField& u, double& top) {
  const auto v = u.values();
  top = 0.0;
  for (double x : v) top = std::max(top, x);
  double ripple = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) ripple = std::max(ripple, v[i + 1] - v[i]);
  return ripple;
}

}  // namespace

Check check_radial_decay_bound(const RadialField& u, double t) {
  if (!(t >= 1.0)) throw InvalidInput("decay bound needs t >= 1");
  Check c;
  c.name = "radial_decay_bound";
  c.bound = 1.0;
  double top = 0.0;
  const double ripple = max_ripple(u, top);
  if (ripple > kRippleTolerance * top) {
    c.inapplicable = true;
    c.passed = true;
    c.detail = "profile is not nonincreasing";
    return c;
  }
  const auto& grid = u.grid();
  const int N = grid.dimension();
  const double norm = lp_norm(u, t);
  const double factor = std::pow(N / grid.sphere_area(), 1.0 / t) * norm;
  double worst = 0.0;
  const auto r = grid.nodes();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double bound = factor * std::pow(r[i], -N / t);
    if (std::abs(u[i]) > 0.0) worst = std::max(worst, std::abs(u[i]) / bound);
  }
  c.measured = worst;
  // Quadrature of |u|_t is accurate to far better than this.
  c.passed = worst <= 1.0 + 1e-8;
  return c;
}

Check check_positivity_monotonicity(const RadialField& u) {
  Check c;
  c.name = "positivity_monotonicity";
  double top = 0.0;
  const double ripple = max_ripple(u, top);
  const double low = *std::min_element(u.values().begin(), u.values().end());
  c.measured = top > 0.0 ? ripple / top : ripple;
  c.bound = kRippleTolerance;
  c.passed = low >= -kNegativityFloor && ripple <= kRippleTolerance * top;
  std::ostringstream os;
  os.precision(6);
  os << "min u = " << low;
  c.detail = os.str();
  return c;
}

namespace {

Check level_window(const SolveReport& report, const SharpConstants* constants) {
  const auto& P = report.params;
  Check c;
  c.name = "level_window";
  c.measured = report.J;
  ThresholdCase kind{};
  if (constants != nullptr && applicable_threshold(P, kNearCriticalGap, kind)) {
    c.bound = level_threshold(P, kind, *constants);
    c.passed = report.J > 0.0 && report.J <= c.bound + kLevelSlack;
    c.detail = to_string(kind);
  } else {
    c.passed = report.J > 0.0;
    c.detail = "no critical exponent nearby; J > 0 only";
  }
  return c;
}

}  // namespace

Check check_level_window(const SolveReport& report, const SharpConstants& constants) {
  if (constants.N != report.params.N || std::abs(constants.alpha - report.params.alpha) > 1e-14) {
    throw InvalidInput("level window: constants are for another (N, alpha)");
  }
  return level_window(report, &constants);
}

Check check_identities_imply_residual(const RadialField& u, const Params& params, double tol) {
  const bool pohozaev_ok = check_pohozaev_identity(u, params).passed;
  const bool nehari_ok = check_nehari_identity(u, params).passed;
  Check c;
  c.name = "identities_imply_residual";
  c.measured = h1_norm(gradient_residual(u, params));
  c.bound = tol;
  if (!(pohozaev_ok && nehari_ok)) {
    c.inapplicable = true;
    c.passed = true;
    c.detail = "identities do not hold";
    return c;
  }
  c.passed = c.measured <= tol;
  return c;
}

VerificationReport verify(const SolveReport& report) {
  VerificationReport out;
  const auto& u = report.profile;
  const auto& P = report.params;
  Check status;
  status.name = "converged";
  status.passed = report.status == SolveStatus::converged;
  status.detail = to_string(report.status);
  out.add(status);
  out.add(check_positivity_monotonicity(u));
  out.add(check_radial_decay_bound(u, 2.0));
  if (!status.passed) return out;

  out.add(check_pohozaev_identity(u, P));
  out.add(check_nehari_identity(u, P));
  out.add(check_identities_imply_residual(u, P));
  out.add(check_mountain_pass_consistency(report));
  ThresholdCase kind{};
  if (applicable_threshold(P, kNearCriticalGap, kind)) {
    const auto k = sharp_constants(P.N, P.alpha);
    out.add(level_window(report, &k));
  } else {
    out.add(level_window(report, nullptr));
  }
  return out;
}

}  // namespace choquard

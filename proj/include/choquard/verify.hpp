#pragma once

#include <string>
#include <vector>

#include "choquard/extremals.hpp"
#include "choquard/solver.hpp"

namespace choquard {

struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool passed = false;
  bool inapplicable = false;  // the check's precondition fails; counts as passed
  bool degenerate = false;    // passed only because the input is trivial
  std::string detail;
};

struct VerificationReport {
  std::vector<Check> checks;
  bool overall = true;  // conjunction of the passed flags

  void add(Check c);
};

/// |P(u)| <= tol (a + b). The zero field passes and is flagged degenerate.
Check check_pohozaev_identity(const RadialField& u, const Params& params, double tol = 1e-5);

/// |<J'(u), u>| <= tol (a + b).
Check check_nehari_identity(const RadialField& u, const Params& params, double tol = 1e-4);

struct FiberMaximum {
  double tau = 0.0;
  double value = 0.0;
};

/// Largest phi(tau) over a log-spaced scan of [1e-3, 1e3] refined by golden section.
FiberMaximum fiber_scan_maximum(const EnergyBreakdown& e, const Params& params);

/// |J(u) - max_tau phi(tau)| <= tol |J(u)| for the report's profile. Non-converged reports are
/// rejected with InvalidInput.
Check check_mountain_pass_consistency(const SolveReport& report, double tol = 1e-6);

/// |u(r)| <= r^{-N/t} (N / |S^{N-1}|)^{1/t} |u|_t at every node. Inapplicable unless u is
/// nonincreasing up to the ripple tolerance.
Check check_radial_decay_bound(const RadialField& u, double t = 2.0);

inline constexpr double kNegativityFloor = 1e-10;
inline constexpr double kRippleTolerance = 1e-8;

/// min u >= -1e-10 and u_{i+1} - u_i <= 1e-8 max u.
Check check_positivity_monotonicity(const RadialField& u);

/// Distance from a critical exponent within which the level window is checked.
inline constexpr double kNearCriticalGap = 1e-3;
inline constexpr double kLevelSlack = 1e-6;

/// 0 < J, and J <= threshold + 1e-6 when params lie within kNearCriticalGap of a critical case.
Check check_level_window(const SolveReport& report, const SharpConstants& constants);

/// When the Pohozaev and Nehari checks pass, the H1 residual of the profile must be below tol.
Check check_identities_imply_residual(const RadialField& u, const Params& params, double tol = 1e-6);

/// Every check above on one report. Non-converged reports get only the shape checks and fail.
VerificationReport verify(const SolveReport& report);

}  // namespace choquard

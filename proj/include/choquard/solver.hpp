#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "choquard/functionals.hpp"

namespace choquard {

enum class SolveStatus { converged, vanishing, concentrating, max_iter };

std::string to_string(SolveStatus status);
SolveStatus solve_status_from_string(const std::string& name);

/// Which exponent(s) a continuation run drives to its critical value.
enum class ContinuationTarget { p_upper, p_lower, q_upper, both };

std::string to_string(ContinuationTarget target);
ContinuationTarget continuation_target_from_string(const std::string& name);

struct ContinuationSchedule {
  double ratio = 0.5;          // gap multiplier per step
  double critical_gap = 0.0;   // if > 0, one extra step at this gap from the critical exponent
};

struct SolveOptions {
  double step = 1.0;            // initial descent step
  double backtrack = 0.5;       // Armijo step reduction factor
  double armijo = 1e-4;         // sufficient-decrease constant
  double tol_residual = 1e-6;   // H1 norm of the gradient representative
  int max_iter = 4000;          // projected descent steps
  bool enforce_nonneg = true;
  bool polish = true;           // Newton-Krylov refinement once the descent is close
  double polish_below = 1e-1;   // residual at which refinement starts
  int max_polish = 12;          // Newton steps
  ContinuationSchedule continuation{};

  void validate() const;
};

struct SolveReport {
  RadialField profile;
  Params params;
  EnergyBreakdown breakdown;
  double J = 0.0;
  double P = 0.0;
  double nehari = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;          // projected descent steps
  int polish_iterations = 0;   // Newton steps
  double linf = 0.0;
  double half_mass_radius = 0.0;
  SolveStatus status = SolveStatus::max_iter;
  std::vector<double> energy_history;  // J after each projection, starting with the initial one

  double h1_norm() const { return std::sqrt(breakdown.kinetic + breakdown.mass); }
};

/// e^{-r^2} on the grid (projection onto P = 0 happens inside the solver).
RadialField gaussian_guess(const GridPtr& grid);

/// Ground state by projected H1-preconditioned descent on the Pohozaev manifold.
SolveReport ground_state(const Problem& problem, const RadialField& init, const SolveOptions& opts = {});
SolveReport ground_state(const Params& params, const RadialField& init, const SolveOptions& opts = {});

/// Builds a report (breakdown, J, P, residual, shape metrics) for an arbitrary profile.
SolveReport assess(const Problem& problem, const RadialField& u, SolveStatus status, int iterations = 0);

/// Exponents of step n of a continuation schedule (n = 0 is the start).
Params continuation_params(const Params& start, ContinuationTarget target, int n,
                           const ContinuationSchedule& schedule);

/// Gap-halving continuation toward the critical exponent(s), warm-started step to step.
/// Returns steps + 1 reports (plus one if the schedule asks for a final critical-gap step).
std::vector<SolveReport> continue_exponent(const Params& start, ContinuationTarget target, int steps,
                                           const GridPtr& grid, const SolveOptions& opts = {},
                                           std::optional<RadialField> init = std::nullopt);

struct DichotomyThresholds {
  double vanish_ratio = 1e-3;   // H1 norm relative to the first report
  double linf_growth = 10.0;    // concentrating: linf grows at least by this factor ...
  double radius_shrink = 10.0;  // ... while the half-mass radius shrinks by this factor
};

SolveStatus detect_dichotomy(const std::vector<SolveReport>& reports, const DichotomyThresholds& t = {});

}  // namespace choquard

#pragma once

#include <string>
#include <vector>

#include "choquard/functionals.hpp"

namespace choquard {

struct SharpConstants {
  int N = 3;
  double alpha = 2.0;
  double S = 0.0;        // Sobolev
  double S_alpha = 0.0;  // Dirichlet integral against the upper-critical nonlocal term
  double S_1 = 0.0;      // mass against the lower-critical nonlocal term
  double A_alpha = 0.0;  // Riesz normalization
  double C_alpha = 0.0;  // sharp HLS constant

  /// |S_alpha (A_alpha C_alpha)^{1/p_upper} - S| <= tol S.
  bool consistent(double tol = 1e-10) const;
};

/// A_alpha and C_alpha from Gamma functions, S from the Talenti quotient (Richardson over two
/// graded grids), S_1 from the Pekar quotient on pekar_grid(N), S_alpha from S, A, C.
/// Memoized per (N, alpha).
SharpConstants sharp_constants(int N, double alpha);

/// Cutoff: 1 on [0, 1], quintic smootherstep (C^2) down to 0 on [1, 2], 0 beyond.
double cutoff(double r);

/// U_eps(r) = (N(N-2) eps^2)^{(N-2)/4} / (eps^2 + r^2)^{(N-2)/2}.
double talenti_value(int N, double epsilon, double r);

RadialField talenti(const GridPtr& grid, double epsilon);
/// cutoff * U_eps. The grid must reach r = 2.
RadialField cutoff_bubble(const GridPtr& grid, double epsilon);

/// Graded grid on [0, 2] for bubble families.
struct BubbleResolution {
  std::size_t nodes = 2048;
  double gamma = 3.0;
};
GridPtr bubble_grid(int N, const BubbleResolution& res = {});

/// A scale is resolved when at least this many nodes lie in [0, scale].
inline constexpr std::size_t kNodesPerScale = 16;
bool resolves(const RadialGrid& grid, double scale);

/// Breakdown of u_eps for (params.alpha, params.p, params.q). The local integrals a, b, d are
/// Richardson-extrapolated over res.nodes and 2 res.nodes; c uses the Riesz kernel on the
/// res.nodes grid.
EnergyBreakdown bubble_breakdown(const Params& params, double epsilon, const BubbleResolution& res = {});

/// Graded grid on [0, 1000] used for the Pekar extremal and S_1.
GridPtr pekar_grid(int N, std::size_t nodes = 1024);

/// A with int (I_alpha * |V|^p)|V|^p = 1 on this grid, p = p_lower, V = A (1 + r^2)^{-N/2}.
/// Memoized per (grid, alpha).
double pekar_amplitude(const GridPtr& grid, double alpha);

/// v_delta(r) = delta^{N/2} V(delta r).
RadialField pekar_extremal(const GridPtr& grid, double delta, double alpha);

/// Breakdown of v_delta from that of V = v_1 by the change of variables:
/// (a delta^2, b, c delta^{Np - N - alpha}, d delta^{Nq/2 - N}).
EnergyBreakdown scale_pekar(const EnergyBreakdown& base, double delta, const Params& params);

/// Breakdown of V on pekar_grid(params.N), for (params.p, params.q).
EnergyBreakdown pekar_breakdown(const Params& params);

// ---------------------------------------------------------------------------------------------
// Asymptotics of the bubble integrals.

struct AsymptoticRow {
  double epsilon = 0.0;
  EnergyBreakdown integrals;
  bool resolved = true;
};

/// Fit y(eps) ~ K eps^k |ln eps|^m by least squares in log-log coordinates.
struct OrderFit {
  std::string quantity;
  double stated_order = 0.0;     // exponent as stated for the estimate
  double predicted_order = 0.0;  // leading order of the exact integral
  int log_power = 0;
  double fitted_order = 0.0;
  double amplitude = 0.0;        // K
  int points = 0;
  bool agrees = false;           // |fitted - predicted| <= 10% of predicted, with >= 4 points
  bool asserted = true;          // false when the fit is too ill-conditioned to check
};

struct AsymptoticTable {
  Params params;
  double sobolev_level = 0.0;   // S^{N/2}
  double nonlocal_limit = 0.0;  // (A C)^{N/2} S_alpha^{(N+alpha)/2}
  std::vector<AsymptoticRow> rows;
  std::vector<OrderFit> fits;
};

inline constexpr double kOrderTolerance = 0.10;
inline constexpr int kMinFitPoints = 4;

/// Integrals of u_eps over a dyadic list and their fitted orders. Under-resolved scales are
/// kept in the table, flagged, and left out of every fit.
AsymptoticTable asymptotic_suite(const Params& params, const std::vector<double>& epsilons,
                                 const BubbleResolution& res = {});

OrderFit fit_order(const std::string& quantity, const std::vector<double>& eps, const std::vector<double>& y,
                   int log_power, double stated_order, double predicted_order);

// ---------------------------------------------------------------------------------------------
// Energy thresholds at critical exponents.

enum class ThresholdCase { upper_critical_p, lower_critical_p, critical_q, doubly_critical };

std::string to_string(ThresholdCase c);
ThresholdCase threshold_case_from_string(const std::string& name);

/// The level bound for this case, from the sharp constants only.
double level_threshold(const Params& params, ThresholdCase c, const SharpConstants& k);

/// Throws InvalidInput unless the exponents are critical as the case requires.
void check_threshold_case(const Params& params, ThresholdCase c);

/// The case whose exponents params sits at (within tol), if any.
bool applicable_threshold(const Params& params, double tol, ThresholdCase& out);

struct FamilyPoint {
  double scale = 0.0;          // eps or delta
  EnergyBreakdown breakdown;   // of the test function
};

struct MarginRow {
  double scale = 0.0;
  double sup = 0.0;     // sup over tau of J(test_tau)
  double tau = 0.0;     // maximizing dilation
  double margin = 0.0;  // threshold - sup
  bool inconclusive = false;
};

struct ThresholdReport {
  Params params;
  ThresholdCase kind = ThresholdCase::upper_critical_p;
  double threshold = 0.0;
  std::vector<MarginRow> rows;       // sorted by decreasing scale
  bool positive_for_small = false;   // margin > 0 at the smallest scale
  bool increasing_as_halved = false; // margin strictly increases as the scale decreases
  bool increasing_in_scale = false;  // margin strictly increases with the scale
  bool inconclusive = false;         // some margin is zero to rounding
};

/// Relative size below which a margin counts as zero.
inline constexpr double kMarginZero = 1e-12;

/// Margins for given family breakdowns. In the doubly critical case each point must carry
/// both families (see threshold_check); here a single family is assumed.
ThresholdReport threshold_margins(const Params& params, ThresholdCase c, const std::vector<FamilyPoint>& family,
                                  const SharpConstants& k);

/// sup over the test family (u_eps for p_upper and critical q, v_delta for p_lower, the better
/// of both in the doubly critical case) against the case threshold.
ThresholdReport threshold_check(const Params& params, ThresholdCase c, const std::vector<double>& scales,
                                const BubbleResolution& res = {});

enum class Knob { lambda, mu };
std::string to_string(Knob k);
Knob knob_from_string(const std::string& name);

struct KnobSearch {
  double estimate = 0.0;  // smallest knob value with a positive margin, to the bracket width
  double lo = 0.0;
  double hi = 0.0;
  bool holds_at_lower_end = false;  // positive already at the bracket's lower end
  std::vector<std::pair<double, double>> samples;  // (knob, best margin)
};

/// Bisection in the knob for the sign change of the best margin over the scales. The margin is
/// sampled on a log grid first and must be nondecreasing in the knob.
KnobSearch critical_parameter_search(const Params& base, Knob knob, ThresholdCase c,
                                     const std::vector<double>& scales, double lo, double hi,
                                     double rel_width = 1e-3, const BubbleResolution& res = {});

}  // namespace choquard

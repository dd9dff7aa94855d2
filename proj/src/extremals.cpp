#include "choquard/extremals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

namespace {

// Talenti quotient grids: far enough out that the tail of the Dirichlet integral (~ R^{2-N})
// is below 1e-11, graded hard enough to resolve r ~ 1.
constexpr double kTalentiRmax = 1e12;
constexpr double kTalentiGamma = 12.0;
constexpr std::size_t kTalentiNodes = 16384;

constexpr double kPekarRmax = 1e3;
constexpr double kPekarGamma = 3.0;

double sobolev_quotient(int N, std::size_t M) {
  const auto grid = build_grid(N, kTalentiRmax, M, GridScheme::graded, kTalentiGamma);
  const auto r = grid->nodes();
  // Shifted down to vanish at rmax so that the field is an admissible test function there.
  const double floor_value = talenti_value(N, 1.0, kTalentiRmax);
  std::vector<double> u(M);
  for (std::size_t i = 0; i < M; ++i) u[i] = std::max(talenti_value(N, 1.0, r[i]) - floor_value, 0.0);
  const RadialField f(grid, std::move(u));
  const double norm = lp_norm(f, 2.0 * N / (N - 2.0));
  return grad_sq(f) / (norm * norm);
}

double nonlocal_integral(const RieszKernel& kernel, std::span<const double> u, double p) {
  std::vector<double> up(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) up[i] = std::pow(std::abs(u[i]), p);
  return kernel.normalization() * kernel.bilinear(up, up);
}

double power_integral(const RadialGrid& grid, std::span<const double> u, double t) {
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) v[i] = std::pow(std::abs(u[i]), t);
  return integrate(grid, v);
}

bool near(double x, double target) { return std::abs(x - target) <= kCriticalTolerance * std::max(1.0, target); }

void check_scale(double s, const char* what) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    std::ostringstream os;
    os << what << " must be positive (got " << s << ")";
    throw InvalidInput(os.str());
  }
}

}  // namespace

bool SharpConstants::consistent(double tol) const {
  const double p_bar = (N + alpha) / (N - 2.0);
  return std::abs(S_alpha * std::pow(A_alpha * C_alpha, 1.0 / p_bar) - S) <= tol * S;
}

SharpConstants sharp_constants(int N, double alpha) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, SharpConstants> memo;
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find({N, alpha}); it != memo.end()) return it->second;
  }
  SharpConstants k;
  k.N = N;
  k.alpha = alpha;
  k.A_alpha = riesz_normalization(N, alpha);  // validates N and alpha
  k.C_alpha = hls_constant(N, alpha);
  const double coarse = sobolev_quotient(N, kTalentiNodes);
  const double fine = sobolev_quotient(N, 2 * kTalentiNodes);
  k.S = (4.0 * fine - coarse) / 3.0;
  const double p_bar = (N + alpha) / (N - 2.0);
  k.S_alpha = k.S / std::pow(k.A_alpha * k.C_alpha, 1.0 / p_bar);

  const auto grid = pekar_grid(N);
  const auto kernel = riesz_kernel(grid, alpha);
  const auto r = grid->nodes();
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(1.0 + r[i] * r[i], -0.5 * N);
  const double p_low = (N + alpha) / N;
  k.S_1 = power_integral(*grid, v, 2.0) / std::pow(nonlocal_integral(*kernel, v, p_low), 1.0 / p_low);

  std::lock_guard lock(mutex);
  memo.emplace(std::make_pair(N, alpha), k);
  return k;
}

double cutoff(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  const double t = r - 1.0;
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double talenti_value(int N, double epsilon, double r) {
  const double e2 = epsilon * epsilon;
  return std::pow(N * (N - 2.0) * e2, 0.25 * (N - 2)) * std::pow(e2 + r * r, -0.5 * (N - 2));
}

RadialField talenti(const GridPtr& grid, double epsilon) {
  check_scale(epsilon, "epsilon");
  const auto r = grid->nodes();
  std::vector<double> u(r.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = talenti_value(grid->dimension(), epsilon, r[i]);
  return RadialField(grid, std::move(u));
}

RadialField cutoff_bubble(const GridPtr& grid, double epsilon) {
  check_scale(epsilon, "epsilon");
  if (grid->rmax() < 2.0) throw InvalidInput("cutoff bubble needs a grid with rmax >= 2");
  const auto r = grid->nodes();
  std::vector<double> u(r.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double phi = cutoff(r[i]);
    u[i] = phi == 0.0 ? 0.0 : phi * talenti_value(grid->dimension(), epsilon, r[i]);
  }
  return RadialField(grid, std::move(u));
}

GridPtr bubble_grid(int N, const BubbleResolution& res) {
  return build_grid(N, 2.0, res.nodes, GridScheme::graded, res.gamma);
}

bool resolves(const RadialGrid& grid, double scale) {
  const auto r = grid.nodes();
  return r.size() >= kNodesPerScale && r[kNodesPerScale - 1] <= scale;
}

EnergyBreakdown bubble_breakdown(const Params& params, double epsilon, const BubbleResolution& res) {
  params.validate();
  check_scale(epsilon, "epsilon");
  auto local = [&](const GridPtr& grid) {
    const auto u = cutoff_bubble(grid, epsilon);
    return EnergyBreakdown{grad_sq(u), power_integral(*grid, u.values(), 2.0), 0.0,
                           power_integral(*grid, u.values(), params.q)};
  };
  const auto grid = bubble_grid(params.N, res);
  const auto coarse = local(grid);
  const auto fine = local(bubble_grid(params.N, {2 * res.nodes, res.gamma}));
  auto extrapolate = [](double c, double f) { return (4.0 * f - c) / 3.0; };
  EnergyBreakdown out;
  out.kinetic = extrapolate(coarse.kinetic, fine.kinetic);
  out.mass = extrapolate(coarse.mass, fine.mass);
  out.local = extrapolate(coarse.local, fine.local);
  const auto kernel = riesz_kernel(grid, params.alpha);
  out.nonlocal = nonlocal_integral(*kernel, cutoff_bubble(grid, epsilon).values(), params.p);
  return out;
}

GridPtr pekar_grid(int N, std::size_t nodes) {
  return build_grid(N, kPekarRmax, nodes, GridScheme::graded, kPekarGamma);
}

double pekar_amplitude(const GridPtr& grid, double alpha) {
  static std::mutex mutex;
  static std::vector<std::pair<std::pair<GridSpec, double>, double>> memo;
  const auto key = std::make_pair(grid->spec(), alpha);
  {
    std::lock_guard lock(mutex);
    for (const auto& [k, v] : memo) {
      if (k == key) return v;
    }
  }
  const int N = grid->dimension();
  const auto kernel = riesz_kernel(grid, alpha);
  const auto r = grid->nodes();
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(1.0 + r[i] * r[i], -0.5 * N);
  const double p = (N + alpha) / N;
  // c(A V_1) = A^{2p} c(V_1).
  const double A = std::pow(nonlocal_integral(*kernel, v, p), -0.5 / p);
  std::lock_guard lock(mutex);
  memo.emplace_back(key, A);
  return A;
}

RadialField pekar_extremal(const GridPtr& grid, double delta, double alpha) {
  check_scale(delta, "delta");
  const int N = grid->dimension();
  const double A = pekar_amplitude(grid, alpha);
  const double scale = A * std::pow(delta, 0.5 * N);
  const auto r = grid->nodes();
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = delta * r[i];
    v[i] = scale * std::pow(1.0 + x * x, -0.5 * N);
  }
  return RadialField(grid, std::move(v));
}

EnergyBreakdown scale_pekar(const EnergyBreakdown& base, double delta, const Params& params) {
  check_scale(delta, "delta");
  const int N = params.N;
  return {base.kinetic * delta * delta, base.mass,
          base.nonlocal * std::pow(delta, N * params.p - N - params.alpha),
          base.local * std::pow(delta, 0.5 * N * params.q - N)};
}

EnergyBreakdown pekar_breakdown(const Params& params) {
  params.validate();
  const auto grid = pekar_grid(params.N);
  const auto v = pekar_extremal(grid, 1.0, params.alpha);
  const auto kernel = riesz_kernel(grid, params.alpha);
  return {grad_sq(v), power_integral(*grid, v.values(), 2.0), nonlocal_integral(*kernel, v.values(), params.p),
          power_integral(*grid, v.values(), params.q)};
}

// ---------------------------------------------------------------------------------------------

OrderFit fit_order(const std::string& quantity, const std::vector<double>& eps, const std::vector<double>& y,
                   int log_power, double stated_order, double predicted_order) {
  if (eps.size() != y.size()) throw InvalidInput("fit_order: length mismatch");
  OrderFit fit;
  fit.quantity = quantity;
  fit.stated_order = stated_order;
  fit.predicted_order = predicted_order;
  fit.log_power = log_power;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double v = std::abs(y[i]);
    if (!(v > 0.0) || !(eps[i] > 0.0) || !(eps[i] < 1.0)) continue;
    xs.push_back(std::log(eps[i]));
    ys.push_back(std::log(v) - log_power * std::log(-std::log(eps[i])));
  }
  fit.points = static_cast<int>(xs.size());
  if (xs.size() < 2) {
    fit.fitted_order = std::nan("");
    fit.amplitude = std::nan("");
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.fitted_order = sxy / sxx;
  fit.amplitude = std::exp(my - fit.fitted_order * mx);
  fit.agrees = fit.points >= kMinFitPoints &&
               std::abs(fit.fitted_order - predicted_order) <= kOrderTolerance * std::abs(predicted_order);
  return fit;
}

AsymptoticTable asymptotic_suite(const Params& params, const std::vector<double>& epsilons,
                                 const BubbleResolution& res) {
  params.validate();
  if (epsilons.empty()) throw InvalidInput("asymptotic suite needs at least one epsilon");
  for (double e : epsilons) {
    check_scale(e, "epsilon");
    const double k = std::log2(e);
    if (std::abs(k - std::round(k)) > 1e-12) throw InvalidInput("asymptotic suite expects dyadic epsilons 2^-k");
  }
  const int N = params.N;
  const double alpha = params.alpha;
  const auto k = sharp_constants(N, alpha);
  AsymptoticTable table;
  table.params = params;
  table.sobolev_level = std::pow(k.S, 0.5 * N);
  table.nonlocal_limit = std::pow(k.A_alpha * k.C_alpha, 0.5 * N) * std::pow(k.S_alpha, 0.5 * (N + alpha));

  auto sorted = epsilons;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto grid = bubble_grid(N, res);
  for (double e : sorted) table.rows.push_back({e, bubble_breakdown(params, e, res), resolves(*grid, e)});

  std::vector<double> eps;
  std::vector<EnergyBreakdown> b;
  for (const auto& row : table.rows) {
    if (!row.resolved) continue;
    eps.push_back(row.epsilon);
    b.push_back(row.integrals);
  }
  auto column = [&](auto&& f) {
    std::vector<double> out;
    for (const auto& x : b) out.push_back(f(x));
    return out;
  };

  table.fits.push_back(fit_order("kinetic_defect", eps,
                                 column([&](const EnergyBreakdown& x) { return table.sobolev_level - x.kinetic; }),
                                 0, N - 2.0, N - 2.0));

  const int mass_log = N == 4 ? 1 : 0;
  const double mass_order = N == 3 ? 1.0 : 2.0;
  table.fits.push_back(fit_order("mass", eps, column([](const EnergyBreakdown& x) { return x.mass; }), mass_log,
                                 mass_order, mass_order));

  const double q = params.q;
  if (near(q, params.q_upper())) {
    table.fits.push_back(fit_order("local_defect", eps,
                                   column([&](const EnergyBreakdown& x) { return table.sobolev_level - x.local; }),
                                   0, N, N));
  } else {
    const double gap = (N - 2) * q - N;
    double order = N - 0.5 * (N - 2) * q;
    int lp = 0;
    if (std::abs(gap) <= 1e-12) {
      lp = 1;
    } else if (gap < 0.0) {
      order = 0.5 * (N - 2) * q;
    }
    table.fits.push_back(
        fit_order("local", eps, column([](const EnergyBreakdown& x) { return x.local; }), lp, order, order));
  }

  const double p = params.p;
  if (near(p, params.p_upper())) {
    // Deficit against the whole-space value: cross terms between the core and the cut-off
    // region are of size eps^{(N+alpha)/2} eps^{(N-alpha)/2} = eps^N.
    table.fits.push_back(fit_order("nonlocal_defect", eps,
                                   column([&](const EnergyBreakdown& x) { return table.nonlocal_limit - x.nonlocal; }),
                                   0, 0.5 * (N + alpha), N));
    // The deficit is a difference of two O(1) numbers of size eps^N: below the quadrature
    // error already at moderate eps.
    table.fits.back().asserted = false;
  } else {
    const double stated = N + alpha - (N - 2) * p;
    const double tail = (N - 2) * p;
    const int lp = std::abs(stated - tail) <= 1e-12 ? 1 : 0;
    table.fits.push_back(fit_order("nonlocal", eps, column([](const EnergyBreakdown& x) { return x.nonlocal; }), lp,
                                   stated, std::min(stated, tail)));
  }
  return table;
}

// ---------------------------------------------------------------------------------------------

std::string to_string(ThresholdCase c) {
  switch (c) {
    case ThresholdCase::upper_critical_p:
      return "upper-critical-p";
    case ThresholdCase::lower_critical_p:
      return "lower-critical-p";
    case ThresholdCase::critical_q:
      return "critical-q";
    case ThresholdCase::doubly_critical:
      return "doubly-critical";
  }
  return "unknown";
}

ThresholdCase threshold_case_from_string(const std::string& name) {
  for (auto c : {ThresholdCase::upper_critical_p, ThresholdCase::lower_critical_p, ThresholdCase::critical_q,
                 ThresholdCase::doubly_critical}) {
    if (to_string(c) == name) return c;
  }
  throw InvalidInput("unknown threshold case '" + name + "'");
}

void check_threshold_case(const Params& params, ThresholdCase c) {
  params.validate();
  const bool p_up = near(params.p, params.p_upper());
  const bool p_low = near(params.p, params.p_lower());
  const bool q_crit = near(params.q, params.q_upper());
  bool ok = false;
  switch (c) {
    case ThresholdCase::upper_critical_p:
      ok = p_up && !q_crit;
      break;
    case ThresholdCase::lower_critical_p:
      ok = p_low && !q_crit;
      break;
    case ThresholdCase::critical_q:
      ok = q_crit && !p_up && !p_low && params.lambda > 0.0;
      break;
    case ThresholdCase::doubly_critical:
      ok = p_low && q_crit && params.lambda > 0.0;
      break;
  }
  if (!ok) {
    std::ostringstream os;
    os << "exponents p = " << params.p << ", q = " << params.q << " (lambda = " << params.lambda
       << ") do not match the " << to_string(c) << " case (p_lower = " << params.p_lower()
       << ", p_upper = " << params.p_upper() << ", q_upper = " << params.q_upper() << ")";
    throw InvalidInput(os.str());
  }
}

bool applicable_threshold(const Params& params, double tol, ThresholdCase& out) {
  const bool p_up = std::abs(params.p - params.p_upper()) <= tol;
  const bool p_low = std::abs(params.p - params.p_lower()) <= tol;
  const bool q_crit = std::abs(params.q - params.q_upper()) <= tol && params.lambda > 0.0;
  if (p_low && q_crit) {
    out = ThresholdCase::doubly_critical;
  } else if (p_up) {
    out = ThresholdCase::upper_critical_p;
  } else if (p_low) {
    out = ThresholdCase::lower_critical_p;
  } else if (q_crit) {
    out = ThresholdCase::critical_q;
  } else {
    return false;
  }
  return true;
}

double level_threshold(const Params& params, ThresholdCase c, const SharpConstants& k) {
  const int N = params.N;
  const double alpha = params.alpha;
  const double mu = params.mu;
  const double lambda = params.lambda;
  auto lower = [&] {
    return alpha / (2.0 * (N + alpha)) * std::pow(mu, -N / alpha) * std::pow(k.S_1, (N + alpha) / alpha);
  };
  auto q_crit = [&] {
    if (!(lambda > 0.0)) throw InvalidInput("critical-q threshold needs lambda > 0");
    return std::pow(lambda, -0.5 * (N - 2)) * std::pow(k.S, 0.5 * N) / N;
  };
  switch (c) {
    case ThresholdCase::upper_critical_p:
      return (2.0 + alpha) / (2.0 * (N + alpha)) * std::pow(mu, -(N - 2.0) / (2.0 + alpha)) *
             std::pow(k.S_alpha, (N + alpha) / (2.0 + alpha));
    case ThresholdCase::lower_critical_p:
      return lower();
    case ThresholdCase::critical_q:
      return q_crit();
    case ThresholdCase::doubly_critical:
      return std::min(lower(), q_crit());
  }
  throw InvalidInput("unknown threshold case");
}

namespace {

MarginRow margin_row(const Params& params, double threshold, const FamilyPoint& pt) {
  MarginRow row;
  row.scale = pt.scale;
  row.tau = project_pohozaev(pt.breakdown, params);
  row.sup = fiber_energy(pt.breakdown, row.tau, params);
  row.margin = threshold - row.sup;
  row.inconclusive = std::abs(row.margin) <= kMarginZero * std::abs(threshold);
  return row;
}

void summarize(ThresholdReport& rep) {
  std::sort(rep.rows.begin(), rep.rows.end(), [](const auto& a, const auto& b) { return a.scale > b.scale; });
  rep.inconclusive = std::any_of(rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.inconclusive; });
  if (rep.rows.empty()) return;
  const auto& last = rep.rows.back();
  rep.positive_for_small = last.margin > 0.0 && !last.inconclusive;
  if (rep.rows.size() >= 2) {
    rep.increasing_as_halved = rep.increasing_in_scale = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      if (!(rep.rows[i].margin > rep.rows[i - 1].margin)) rep.increasing_as_halved = false;
      if (!(rep.rows[i].margin < rep.rows[i - 1].margin)) rep.increasing_in_scale = false;
    }
  }
}

// The test breakdowns a case compares against its threshold, per scale.
std::vector<std::vector<FamilyPoint>> family_points(const Params& params, ThresholdCase c,
                                                    const std::vector<double>& scales,
                                                    const BubbleResolution& res) {
  std::vector<std::vector<FamilyPoint>> out;
  const bool bubbles = c != ThresholdCase::lower_critical_p;
  const bool pekar = c == ThresholdCase::lower_critical_p || c == ThresholdCase::doubly_critical;
  EnergyBreakdown base;
  if (pekar) base = pekar_breakdown(params);
  for (double s : scales) {
    check_scale(s, "family scale");
    std::vector<FamilyPoint> pts;
    if (bubbles) pts.push_back({s, bubble_breakdown(params, s, res)});
    if (pekar) pts.push_back({s, scale_pekar(base, s, params)});
    out.push_back(std::move(pts));
  }
  return out;
}

ThresholdReport evaluate_points(const Params& params, ThresholdCase c,
                                const std::vector<std::vector<FamilyPoint>>& points, const SharpConstants& k) {
  ThresholdReport rep;
  rep.params = params;
  rep.kind = c;
  rep.threshold = level_threshold(params, c, k);
  for (const auto& pts : points) {
    MarginRow best;
    bool first = true;
    for (const auto& pt : pts) {
      const auto row = margin_row(params, rep.threshold, pt);
      if (first || row.margin > best.margin) best = row;
      first = false;
    }
    if (!first) rep.rows.push_back(best);
  }
  summarize(rep);
  return rep;
}

}  // namespace

ThresholdReport threshold_margins(const Params& params, ThresholdCase c, const std::vector<FamilyPoint>& family,
                                  const SharpConstants& k) {
  params.validate();
  std::vector<std::vector<FamilyPoint>> points;
  for (const auto& pt : family) points.push_back({pt});
  return evaluate_points(params, c, points, k);
}

ThresholdReport threshold_check(const Params& params, ThresholdCase c, const std::vector<double>& scales,
                                const BubbleResolution& res) {
  check_threshold_case(params, c);
  if (scales.empty()) throw InvalidInput("threshold check needs at least one family scale");
  const auto k = sharp_constants(params.N, params.alpha);
  return evaluate_points(params, c, family_points(params, c, scales, res), k);
}

std::string to_string(Knob k) { return k == Knob::lambda ? "lambda" : "mu"; }

Knob knob_from_string(const std::string& name) {
  if (name == "lambda") return Knob::lambda;
  if (name == "mu") return Knob::mu;
  throw InvalidInput("unknown knob '" + name + "' (expected lambda or mu)");
}

KnobSearch critical_parameter_search(const Params& base, Knob knob, ThresholdCase c,
                                     const std::vector<double>& scales, double lo, double hi, double rel_width,
                                     const BubbleResolution& res) {
  if (!(lo > 0.0) || !std::isfinite(hi)) throw InvalidInput("knob bracket must be positive and finite");
  if (!(hi > lo)) {
    std::ostringstream os;
    os << "knob bracket is inverted or empty: [" << lo << ", " << hi << "]";
    throw InvalidInput(os.str());
  }
  if (!(rel_width > 0.0 && rel_width < 1.0)) throw InvalidInput("relative bracket width must lie in (0, 1)");
  if (scales.empty()) throw InvalidInput("knob search needs at least one family scale");
  check_threshold_case(base, c);
  const auto k = sharp_constants(base.N, base.alpha);
  // Test breakdowns do not depend on mu or lambda; compute them once.
  const auto points = family_points(base, c, scales, res);

  auto with = [&](double value) {
    Params P = base;
    (knob == Knob::lambda ? P.lambda : P.mu) = value;
    return P;
  };
  auto margin = [&](double value) {
    const auto rep = evaluate_points(with(value), c, points, k);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : rep.rows) best = std::max(best, r.margin);
    return best;
  };

  KnobSearch out;
  constexpr int kSamples = 17;
  for (int i = 0; i < kSamples; ++i) {
    const double v = lo * std::pow(hi / lo, static_cast<double>(i) / (kSamples - 1));
    out.samples.emplace_back(v, margin(v));
  }
  for (std::size_t i = 1; i < out.samples.size(); ++i) {
    const double prev = out.samples[i - 1].second;
    const double cur = out.samples[i].second;
    if (cur < prev - 1e-12 * std::max(std::abs(prev), std::abs(cur))) {
      std::ostringstream os;
      os << "margin is not monotone in " << to_string(knob) << " over the bracket; samples:";
      for (const auto& [v, m] : out.samples) os << " (" << v << ", " << m << ")";
      throw NumericalFailure(os.str());
    }
  }
  if (out.samples.front().second > 0.0) {
    out.holds_at_lower_end = true;
    out.estimate = lo;
    out.lo = 0.0;
    out.hi = lo;
    return out;
  }
  if (!(out.samples.back().second > 0.0)) {
    std::ostringstream os;
    os << "margin stays nonpositive up to " << to_string(knob) << " = " << hi << " (margin "
       << out.samples.back().second << ")";
    throw NumericalFailure(os.str());
  }
  std::size_t j = 1;
  while (!(out.samples[j].second > 0.0)) ++j;
  double a = out.samples[j - 1].first;
  double b = out.samples[j].first;
  while (b - a > rel_width * b) {
    const double mid = std::sqrt(a * b);
    if (margin(mid) > 0.0) {
      b = mid;
    } else {
      a = mid;
    }
  }
  out.lo = a;
  out.hi = b;
  out.estimate = b;
  return out;
}

}  // namespace choquard

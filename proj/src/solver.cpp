#include "choquard/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::vanishing: return "vanishing";
    case SolveStatus::concentrating: return "concentrating";
    case SolveStatus::max_iter: return "max_iter";
  }
  return "max_iter";
}

SolveStatus solve_status_from_string(const std::string& name) {
  if (name == "converged") return SolveStatus::converged;
  if (name == "vanishing") return SolveStatus::vanishing;
  if (name == "concentrating") return SolveStatus::concentrating;
  if (name == "max_iter") return SolveStatus::max_iter;
  throw InvalidInput("unknown solve status '" + name + "'");
}

std::string to_string(ContinuationTarget target) {
  switch (target) {
    case ContinuationTarget::p_upper: return "p_upper";
    case ContinuationTarget::p_lower: return "p_lower";
    case ContinuationTarget::q_upper: return "q_upper";
    case ContinuationTarget::both: return "both";
  }
  return "p_upper";
}

ContinuationTarget continuation_target_from_string(const std::string& name) {
  if (name == "p_upper") return ContinuationTarget::p_upper;
  if (name == "p_lower") return ContinuationTarget::p_lower;
  if (name == "q_upper") return ContinuationTarget::q_upper;
  if (name == "both") return ContinuationTarget::both;
  throw InvalidInput("unknown continuation target '" + name + "' (p_upper, p_lower, q_upper, both)");
}

void SolveOptions::validate() const {
  if (!(step > 0.0)) throw InvalidInput("solve.step must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidInput("solve.backtrack must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) throw InvalidInput("solve.armijo must lie in (0, 1)");
  if (!(tol_residual > 0.0)) throw InvalidInput("solve.tol_residual must be positive");
  if (max_iter < 1) throw InvalidInput("solve.max_iter must be at least 1");
  if (max_polish < 0) throw InvalidInput("solve.max_polish must be nonnegative");
  if (!(continuation.ratio > 0.0 && continuation.ratio < 1.0)) {
    throw InvalidInput("continuation ratio must lie in (0, 1)");
  }
  if (!(continuation.critical_gap >= 0.0)) throw InvalidInput("continuation critical_gap must be >= 0");
}

RadialField gaussian_guess(const GridPtr& grid) {
  return RadialField::sample(grid, [](double r) { return std::exp(-r * r); });
}

namespace {

// Profiles whose half-mass ball holds fewer nodes than this are not resolved by the grid.
constexpr std::size_t kResolvedNodes = 20;

void finalize_field(std::vector<double>& u, bool nonneg) {
  if (nonneg) {
    for (double& x : u) x = std::abs(x);
  }
  u.back() = 0.0;
}

void require_finite(std::span<const double> v, const char* what, int iteration) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream os;
      os << "non-finite " << what << " at iteration " << iteration;
      throw NumericalFailure(os.str());
    }
  }
}

bool meets_tolerances(const EnergyBreakdown& e, const Params& P, double residual, double tol) {
  const double scale = e.kinetic + e.mass;
  return residual <= tol && std::abs(pohozaev(e, P)) <= 1e-5 * scale && std::abs(nehari(e, P)) <= 1e-4 * scale;
}

std::size_t nodes_within(const RadialGrid& grid, double radius) {
  const auto r = grid.nodes();
  return static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), radius) - r.begin());
}

struct Residual {
  Problem::Evaluation ev;
  std::vector<double> g;
  double norm;
};

Residual residual_of(const Problem& problem, std::span<const double> u, int iteration) {
  Residual out{problem.evaluate(u), {}, 0.0};
  require_finite(out.ev.nonlinearity, "nonlinearity", iteration);
  out.g = h1_solve(problem.grid(), out.ev.nonlinearity);
  for (std::size_t i = 0; i < out.g.size(); ++i) out.g[i] = u[i] - out.g[i];
  out.norm = std::sqrt(h1_inner(problem.grid(), out.g, out.g));
  return out;
}

// Linearized residual map delta -> delta - (-Delta + 1)^{-1} N'(u) delta at a fixed u.
class Linearization {
 public:
  Linearization(const Problem& problem, std::span<const double> u) : problem_(problem) {
    const auto& P = problem.params();
    const std::size_t M = u.size();
    std::vector<double> up(M);
    for (std::size_t i = 0; i < M; ++i) up[i] = std::pow(std::abs(u[i]), P.p);
    const auto pot = problem.kernel().apply(up);
    diag_.resize(M);
    odd_.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double a = std::abs(u[i]);
      if (a == 0.0) {
        diag_[i] = 0.0;
        odd_[i] = 0.0;
        continue;
      }
      diag_[i] = P.mu * (P.p - 1.0) * pot[i] * std::pow(a, P.p - 2.0) +
                 P.lambda * (P.q - 1.0) * std::pow(a, P.q - 2.0);
      odd_[i] = (u[i] > 0.0 ? 1.0 : -1.0) * std::pow(a, P.p - 1.0);
    }
  }

  std::vector<double> operator()(std::span<const double> d) const {
    const auto& P = problem_.params();
    const std::size_t M = d.size();
    std::vector<double> sd(M);
    for (std::size_t i = 0; i < M; ++i) sd[i] = odd_[i] * d[i];
    const auto pot = problem_.kernel().apply(sd);
    std::vector<double> rhs(M);
    for (std::size_t i = 0; i < M; ++i) rhs[i] = diag_[i] * d[i] + P.mu * P.p * odd_[i] * pot[i];
    auto out = h1_solve(problem_.grid(), rhs);
    for (std::size_t i = 0; i < M; ++i) out[i] = d[i] - out[i];
    return out;
  }

 private:
  const Problem& problem_;
  std::vector<double> diag_;
  std::vector<double> odd_;
};

// GMRES in the discrete H1 inner product, zero initial guess.
std::vector<double> gmres(const Linearization& L, const RadialGrid& grid, std::span<const double> b,
                          double rtol, int max_iter) {
  const std::size_t M = b.size();
  auto dot = [&](std::span<const double> x, std::span<const double> y) { return h1_inner(grid, x, y); };
  const double beta = std::sqrt(dot(b, b));
  std::vector<double> x(M, 0.0);
  if (beta == 0.0) return x;
  std::vector<std::vector<double>> V;
  V.emplace_back(b.begin(), b.end());
  for (double& v : V[0]) v /= beta;
  std::vector<std::vector<double>> H;  // column j holds h_{0..j+1, j}
  std::vector<double> cs, sn, g{beta};
  int k = 0;
  for (; k < max_iter; ++k) {
    auto w = L(V[k]);
    std::vector<double> h(k + 2, 0.0);
    for (int i = 0; i <= k; ++i) {
      h[i] = dot(w, V[i]);
      for (std::size_t n = 0; n < M; ++n) w[n] -= h[i] * V[i][n];
    }
    h[k + 1] = std::sqrt(dot(w, w));
    for (int i = 0; i < k; ++i) {
      const double t = cs[i] * h[i] + sn[i] * h[i + 1];
      h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
      h[i] = t;
    }
    const double rr = std::hypot(h[k], h[k + 1]);
    cs.push_back(rr == 0.0 ? 1.0 : h[k] / rr);
    sn.push_back(rr == 0.0 ? 0.0 : h[k + 1] / rr);
    const double hk1 = h[k + 1];
    h[k] = rr;
    h[k + 1] = 0.0;
    g.push_back(-sn[k] * g[k]);
    g[k] *= cs[k];
    H.push_back(std::move(h));
    if (std::abs(g[k + 1]) <= rtol * beta || hk1 == 0.0) {
      ++k;
      break;
    }
    for (double& v : w) v /= hk1;
    V.push_back(std::move(w));
  }
  std::vector<double> y(k);
  for (int i = k - 1; i >= 0; --i) {
    double s = g[i];
    for (int j = i + 1; j < k; ++j) s -= H[j][i] * y[j];
    y[i] = s / H[i][i];
  }
  for (int j = 0; j < k; ++j) {
    for (std::size_t n = 0; n < M; ++n) x[n] += y[j] * V[j][n];
  }
  return x;
}

}  // namespace

SolveReport assess(const Problem& problem, const RadialField& u, SolveStatus status, int iterations) {
  const auto res = residual_of(problem, u.values(), iterations);
  const auto& P = problem.params();
  double linf = 0.0;
  for (double v : u.values()) linf = std::max(linf, std::abs(v));
  const auto& e = res.ev.breakdown;
  SolveReport rep{.profile = u,
                  .params = P,
                  .breakdown = e,
                  .J = energy(e, P),
                  .P = pohozaev(e, P),
                  .nehari = nehari(e, P),
                  .residual_norm = res.norm,
                  .iterations = iterations,
                  .polish_iterations = 0,
                  .linf = linf,
                  .half_mass_radius = half_mass_radius(u),
                  .status = status,
                  .energy_history = {}};
  return rep;
}

SolveReport ground_state(const Problem& problem, const RadialField& init, const SolveOptions& opts) {
  opts.validate();
  if (!same_grid(init.grid(), problem.grid())) throw InvalidInput("initial guess lives on another grid");
  const auto& P = problem.params();
  const auto& grid = problem.grid();

  auto start = init.to_vector();
  finalize_field(start, opts.enforce_nonneg);
  if (std::all_of(start.begin(), start.end(), [](double x) { return x == 0.0; })) {
    throw DegenerateInput("initial guess is the zero field");
  }
  const auto e0 = problem.breakdown(start);
  if (!(e0.kinetic > 0.0) || !(e0.nonlocal > 0.0)) {
    throw DegenerateInput("initial guess needs positive kinetic and nonlocal terms");
  }
  auto u = dilate(RadialField(init.grid_ptr(), start), project_pohozaev(e0, P)).to_vector();
  finalize_field(u, opts.enforce_nonneg);
  const double initial_norm = std::sqrt(h1_inner(grid, u, u));

  std::vector<double> history;
  SolveStatus status = SolveStatus::max_iter;
  double eta = opts.step;
  int iter = 0;
  int polish_steps = 0;
  bool done = false;
  // Newton takes over once the residual drops below the switch; if it stalls, descent resumes
  // with a switch ten times lower.
  double polish_switch = opts.polish_below;
  for (;;) {
  for (; iter < opts.max_iter; ++iter) {
    const auto res = residual_of(problem, u, iter);
    const double J = energy(res.ev.breakdown, P);
    history.push_back(J);
    if (meets_tolerances(res.ev.breakdown, P, res.norm, opts.tol_residual)) {
      status = SolveStatus::converged;
      done = true;
      break;
    }
    if (opts.polish && res.norm < polish_switch) break;

    bool accepted = false;
    std::vector<double> v(u.size());
    EnergyBreakdown ev{};
    while (eta >= 1e-12) {
      for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] - eta * res.g[i];
      finalize_field(v, opts.enforce_nonneg);
      ev = problem.breakdown(v);
      if (ev.kinetic > 0.0 && ev.nonlocal > 0.0 &&
          reduced_energy(ev, P) <= J - opts.armijo * eta * res.norm * res.norm) {
        accepted = true;
        break;
      }
      eta *= opts.backtrack;
    }
    if (!accepted) break;
    u = dilate(RadialField(problem.grid_ptr(), v), project_pohozaev(ev, P)).to_vector();
    finalize_field(u, opts.enforce_nonneg);
    require_finite(u, "iterate", iter);
    eta = std::min(2.0 * eta, 2.0 * opts.step);

    const double norm = std::sqrt(h1_inner(grid, u, u));
    if (norm < 1e-3 * initial_norm) {
      status = SolveStatus::vanishing;
      done = true;
      ++iter;
      break;
    }
    if (nodes_within(grid, half_mass_radius(RadialField(problem.grid_ptr(), u))) < kResolvedNodes) {
      status = SolveStatus::concentrating;
      done = true;
      ++iter;
      break;
    }
  }

  if (done || !opts.polish || iter >= opts.max_iter) break;
  {
    auto res = residual_of(problem, u, iter);
    const auto before = u;
    const double before_norm = res.norm;
    for (int k = 0; k < opts.max_polish; ++k, ++polish_steps) {
      if (meets_tolerances(res.ev.breakdown, P, res.norm, 1e-2 * opts.tol_residual)) break;
      const Linearization L(problem, u);
      std::vector<double> rhs(res.g.size());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -res.g[i];
      const auto delta = gmres(L, grid, rhs, std::clamp(res.norm, 1e-10, 1e-2), 80);
      require_finite(delta, "Newton correction", iter + polish_steps);
      double t = 1.0;
      bool improved = false;
      for (int k = 0; k < 8; ++k, t *= 0.5) {
        std::vector<double> w(u.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = u[i] + t * delta[i];
        finalize_field(w, opts.enforce_nonneg);
        auto trial = residual_of(problem, w, iter + polish_steps);
        if (trial.norm < (1.0 - 1e-4 * t) * res.norm) {
          u = std::move(w);
          res = std::move(trial);
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (meets_tolerances(res.ev.breakdown, P, res.norm, opts.tol_residual)) break;
    if (polish_switch <= opts.tol_residual) break;
    // Newton stalled: keep the better iterate and go back to descent.
    if (res.norm > before_norm) u = before;
    polish_switch *= 0.1;
    eta = opts.step;
  }
  }

  auto rep = assess(problem, RadialField(problem.grid_ptr(), u), status, iter);
  rep.polish_iterations = polish_steps;
  rep.energy_history = std::move(history);
  if (rep.status == SolveStatus::max_iter && meets_tolerances(rep.breakdown, P, rep.residual_norm, opts.tol_residual)) {
    rep.status = SolveStatus::converged;
  }
  if (rep.status == SolveStatus::converged && !meets_tolerances(rep.breakdown, P, rep.residual_norm, opts.tol_residual)) {
    rep.status = SolveStatus::max_iter;
  }
  return rep;
}

SolveReport ground_state(const Params& params, const RadialField& init, const SolveOptions& opts) {
  return ground_state(Problem(params, init.grid_ptr()), init, opts);
}

Params continuation_params(const Params& start, ContinuationTarget target, int n,
                           const ContinuationSchedule& schedule) {
  const double factor = std::pow(schedule.ratio, n);
  Params out = start;
  const bool move_p = target != ContinuationTarget::q_upper;
  const bool move_q = target == ContinuationTarget::q_upper || target == ContinuationTarget::both;
  if (move_p) {
    if (target == ContinuationTarget::p_upper) {
      out.p = start.p_upper() - (start.p_upper() - start.p) * factor;
    } else {
      out.p = start.p_lower() + (start.p - start.p_lower()) * factor;
    }
  }
  if (move_q) out.q = start.q_upper() - (start.q_upper() - start.q) * factor;
  return out;
}

namespace {

Params critical_gap_params(const Params& start, ContinuationTarget target, double gap) {
  Params out = start;
  switch (target) {
    case ContinuationTarget::p_upper: out.p = start.p_upper() - gap; break;
    case ContinuationTarget::p_lower: out.p = start.p_lower() + gap; break;
    case ContinuationTarget::q_upper: out.q = start.q_upper() - gap; break;
    case ContinuationTarget::both:
      out.p = start.p_lower() + gap;
      out.q = start.q_upper() - gap;
      break;
  }
  return out;
}

}  // namespace

std::vector<SolveReport> continue_exponent(const Params& start, ContinuationTarget target, int steps,
                                           const GridPtr& grid, const SolveOptions& opts,
                                           std::optional<RadialField> init) {
  start.validate();
  opts.validate();
  if (steps < 0) throw InvalidInput("continuation steps must be nonnegative");
  const double eps = kCriticalTolerance;
  const bool p_ok = target == ContinuationTarget::q_upper ||
                    (start.p > start.p_lower() + eps && start.p < start.p_upper() - eps);
  const bool q_ok = (target != ContinuationTarget::q_upper && target != ContinuationTarget::both) ||
                    start.q < start.q_upper() - eps;
  if (!p_ok || !q_ok) throw InvalidInput("continuation must start from subcritical exponents");

  std::vector<Params> schedule;
  for (int n = 0; n <= steps; ++n) schedule.push_back(continuation_params(start, target, n, opts.continuation));
  if (opts.continuation.critical_gap > 0.0) {
    schedule.push_back(critical_gap_params(start, target, opts.continuation.critical_gap));
  }

  std::vector<SolveReport> reports;
  RadialField guess = init ? *init : gaussian_guess(grid);
  for (std::size_t n = 0; n < schedule.size(); ++n) {
    try {
      const Problem problem(schedule[n], grid);
      auto rep = ground_state(problem, guess, opts);
      guess = rep.profile;
      reports.push_back(std::move(rep));
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("continuation step " + std::to_string(n) + ": " + e.what());
    } catch (const DegenerateInput& e) {
      throw DegenerateInput("continuation step " + std::to_string(n) + ": " + e.what());
    }
  }
  return reports;
}

SolveStatus detect_dichotomy(const std::vector<SolveReport>& reports, const DichotomyThresholds& t) {
  if (reports.empty()) throw InvalidInput("detect_dichotomy needs at least one report");
  const auto& first = reports.front();
  const auto& last = reports.back();
  if (last.status == SolveStatus::vanishing || last.h1_norm() < t.vanish_ratio * first.h1_norm()) {
    return SolveStatus::vanishing;
  }
  if (last.status == SolveStatus::concentrating) return SolveStatus::concentrating;
  const bool grows = last.linf >= t.linf_growth * first.linf;
  const bool shrinks = last.half_mass_radius > 0.0 &&
                       first.half_mass_radius >= t.radius_shrink * last.half_mass_radius;
  if (grows && shrinks) return SolveStatus::concentrating;
  return SolveStatus::converged;
}

}  // namespace choquard

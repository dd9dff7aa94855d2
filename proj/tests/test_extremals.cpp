#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "choquard/errors.hpp"
#include "choquard/extremals.hpp"
#include "choquard/riesz.hpp"
#include "oracles/closed_forms.hpp"

using namespace choquard;

namespace {

std::vector<double> dyadic(int first, int last) {
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

const OrderFit& fit(const AsymptoticTable& t, const std::string& name) {
  for (const auto& f : t.fits) {
    if (f.quantity == name) return f;
  }
  FAIL("no fit named " << name);
  return t.fits.front();
}

// Dense log scan of the fiber energy, independent of the projection.
double scan_max(const EnergyBreakdown& e, const Params& P) {
  double best = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double tau = std::pow(10.0, -3.0 + 6.0 * i / 200000.0);
    best = std::max(best, fiber_energy(e, tau, P));
  }
  return best;
}

}  // namespace

TEST_CASE("sharp constants against closed forms") {
  for (auto [N, a] : std::vector<std::pair<int, double>>{{3, 2.0}, {3, 1.0}, {4, 1.0}, {5, 2.0}}) {
    CAPTURE(N);
    CAPTURE(a);
    const auto k = sharp_constants(N, a);
    CHECK(k.A_alpha == doctest::Approx(oracle::riesz_A(N, a)).epsilon(1e-12));
    CHECK(k.C_alpha == doctest::Approx(oracle::hls_C(N, a)).epsilon(1e-10));
    CHECK(k.S == doctest::Approx(oracle::sobolev_S(N)).epsilon(1e-4));
    CHECK(k.S_alpha == doctest::Approx(oracle::upper_S_alpha(N, a)).epsilon(1e-4));
    CHECK(k.S_1 == doctest::Approx(oracle::lower_S1(N, a)).epsilon(1e-3));
    CHECK(k.consistent(1e-10));
    CHECK(k.S > 0.0);
    CHECK(k.S_1 > 0.0);
  }
  const auto k = sharp_constants(3, 2.0);
  CHECK(k.A_alpha == doctest::Approx(1.0 / (4.0 * oracle::pi)).epsilon(1e-12));
  CHECK(k.A_alpha * k.C_alpha == doctest::Approx(0.18257).epsilon(1e-4));
  CHECK(k.S == doctest::Approx(3.0 * std::pow(0.5 * oracle::pi, 4.0 / 3.0)).epsilon(1e-4));
  CHECK_THROWS_AS(sharp_constants(3, 3.0), InvalidInput);
  CHECK_THROWS_AS(sharp_constants(3, 0.0), InvalidInput);
}

TEST_CASE("Talenti bubble") {
  for (int N : {3, 4, 5}) {
    for (double e : {0.5, 1.0, 2.0}) {
      CHECK(talenti_value(N, e, 0.0) ==
            doctest::Approx(std::pow(N * (N - 2.0), 0.25 * (N - 2)) * std::pow(e, -0.5 * (N - 2))).epsilon(1e-14));
    }
  }
  // Dirichlet integral is dilation invariant; the grid reaches far enough that the tail ~ R^{2-N} is small.
  const auto g = build_grid(3, 1e8, 8192, GridScheme::graded, 10.0);
  const double base = grad_sq(talenti(g, 1.0));
  for (double e : {0.25, 4.0}) CHECK(grad_sq(talenti(g, e)) == doctest::Approx(base).epsilon(1e-3));
  CHECK_THROWS_AS(talenti(g, 0.0), InvalidInput);
  CHECK_THROWS_AS(talenti(g, -1.0), InvalidInput);
}

TEST_CASE("cutoff and cutoff bubble") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(1.0) == 1.0);
  CHECK(cutoff(2.0) == 0.0);
  CHECK(cutoff(5.0) == 0.0);
  // C^2 at both junctions, nonincreasing in between.
  const double h = 1e-4;
  for (double x : {1.0, 2.0}) {
    const double d1 = (cutoff(x + h) - cutoff(x - h)) / (2 * h);
    const double d2 = (cutoff(x + h) - 2 * cutoff(x) + cutoff(x - h)) / (h * h);
    CHECK(std::abs(d1) < 1e-6);
    CHECK(std::abs(d2) < 1e-2);
  }
  for (double x = 1.0; x < 2.0; x += 1e-3) CHECK(cutoff(x + 1e-3) <= cutoff(x));

  const auto g = bubble_grid(4);
  const auto u = cutoff_bubble(g, 0.1);
  const auto r = g->nodes();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= 1.0) {
      CHECK(u[i] == talenti_value(4, 0.1, r[i]));
    } else if (r[i] >= 2.0) {
      CHECK(u[i] == 0.0);
    }
  }
  CHECK_THROWS_AS(cutoff_bubble(build_grid(4, 1.5, 256, GridScheme::graded, 3.0), 0.1), InvalidInput);
  CHECK_THROWS_AS(cutoff_bubble(g, 0.0), InvalidInput);
}

TEST_CASE("resolution flag") {
  const auto g = bubble_grid(3);
  CHECK(resolves(*g, 0.01));
  CHECK_FALSE(resolves(*g, 1e-9));
}

TEST_CASE("Pekar extremal") {
  for (auto [N, a] : std::vector<std::pair<int, double>>{{3, 2.0}, {4, 1.0}}) {
    CAPTURE(N);
    const auto g = pekar_grid(N);
    const auto kernel = riesz_kernel(g, a);
    const double pl = (N + a) / N;
    auto nonlocal = [&](const RadialField& v) {
      std::vector<double> vp(v.values().begin(), v.values().end());
      for (auto& x : vp) x = std::pow(std::abs(x), pl);
      return kernel->normalization() * kernel->bilinear(vp, vp);
    };
    const auto V = pekar_extremal(g, 1.0, a);
    CHECK(nonlocal(V) == doctest::Approx(1.0).epsilon(1e-8));
    const double mass = std::pow(lp_norm(V, 2.0), 2);
    CHECK(mass / std::pow(nonlocal(V), 1.0 / pl) == doctest::Approx(oracle::lower_S1(N, a)).epsilon(1e-3));
    for (double d : {0.5, 2.0}) {
      const auto v = pekar_extremal(g, d, a);
      CHECK(std::pow(lp_norm(v, 2.0), 2) == doctest::Approx(mass).epsilon(1e-3));
    }
    // Breakdown of v_delta by the change of variables against direct quadrature.
    const Params P{N, a, pl, 3.0, 1.0, 1.0};
    const auto base = pekar_breakdown(P);
    const auto direct = breakdown(pekar_extremal(g, 2.0, a), P);
    const auto scaled = scale_pekar(base, 2.0, P);
    CHECK(scaled.kinetic == doctest::Approx(direct.kinetic).epsilon(1e-3));
    CHECK(scaled.mass == doctest::Approx(direct.mass).epsilon(1e-3));
    CHECK(scaled.nonlocal == doctest::Approx(direct.nonlocal).epsilon(1e-3));
    CHECK(scaled.local == doctest::Approx(direct.local).epsilon(1e-3));
  }
  CHECK_THROWS_AS(pekar_extremal(pekar_grid(3), 0.0, 2.0), InvalidInput);
}

TEST_CASE("fit_order recovers synthetic power laws") {
  const auto eps = dyadic(2, 9);
  std::vector<double> y, ylog;
  for (double e : eps) {
    y.push_back(3.0 * std::pow(e, 1.5));
    ylog.push_back(2.0 * std::pow(e, 2.0) * -std::log(e));
  }
  const auto f = fit_order("y", eps, y, 0, 1.5, 1.5);
  CHECK(f.fitted_order == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.agrees);
  CHECK(f.points == 8);
  const auto g = fit_order("y", eps, ylog, 1, 2.0, 2.0);
  CHECK(g.fitted_order == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.amplitude == doctest::Approx(2.0).epsilon(1e-12));
  // Three points are too few to assert.
  const auto h = fit_order("y", {0.5, 0.25, 0.125}, {0.5, 0.25, 0.125}, 0, 1.0, 1.0);
  CHECK(h.fitted_order == doctest::Approx(1.0));
  CHECK_FALSE(h.agrees);
  CHECK_THROWS_AS(fit_order("y", {0.5}, {}, 0, 1.0, 1.0), InvalidInput);
}

TEST_CASE("bubble asymptotics") {
  const auto eps = dyadic(3, 10);
  SUBCASE("N = 3, alpha = 2, p = 4, q = 3") {
    const auto t = asymptotic_suite({3, 2.0, 4.0, 3.0, 1.0, 1.0}, eps);
    CHECK(t.rows.size() == eps.size());
    CHECK(fit(t, "kinetic_defect").agrees);
    CHECK(fit(t, "kinetic_defect").predicted_order == 1.0);
    CHECK(fit(t, "mass").agrees);
    CHECK(fit(t, "mass").predicted_order == 1.0);
    // (N - 2) q = N: order N - (N - 2) q / 2 with a logarithm.
    CHECK(fit(t, "local").log_power == 1);
    CHECK(fit(t, "local").predicted_order == 1.5);
    CHECK(fit(t, "local").agrees);
    CHECK(fit(t, "nonlocal").predicted_order == 1.0);
    CHECK(fit(t, "nonlocal").agrees);
  }
  SUBCASE("N = 4, alpha = 1, p = 2, q = 3") {
    const auto t = asymptotic_suite({4, 1.0, 2.0, 3.0, 1.0, 1.0}, eps);
    CHECK(fit(t, "kinetic_defect").predicted_order == 2.0);
    CHECK(fit(t, "kinetic_defect").agrees);
    CHECK(fit(t, "mass").log_power == 1);
    CHECK(fit(t, "mass").agrees);
    // (N - 2) q > N.
    CHECK(fit(t, "local").predicted_order == 1.0);
    CHECK(fit(t, "local").agrees);
    CHECK(fit(t, "nonlocal").predicted_order == 1.0);
    CHECK(fit(t, "nonlocal").agrees);
  }
  SUBCASE("N = 3, q = 2.2: the (N - 2) q < N branch") {
    const auto t = asymptotic_suite({3, 2.0, 2.0, 2.2, 1.0, 1.0}, eps);
    CHECK(fit(t, "local").predicted_order == doctest::Approx(1.1));
    CHECK(fit(t, "local").agrees);
    // Here the tail order (N - 2) p = 2 is smaller than N + alpha - (N - 2) p = 3 and wins.
    CHECK(fit(t, "nonlocal").stated_order == 3.0);
    CHECK(fit(t, "nonlocal").predicted_order == 2.0);
    CHECK(fit(t, "nonlocal").agrees);
  }
  SUBCASE("q = q_upper: local defect against S^{N/2}") {
    const auto t = asymptotic_suite({4, 1.0, 2.0, 4.0, 1.0, 1.0}, eps);
    CHECK(fit(t, "local_defect").predicted_order == 4.0);
  }
}

TEST_CASE("nonlocal bubble term at p_upper increases towards its limit") {
  const Params P{3, 2.0, 5.0, 3.0, 1.0, 1.0};
  const auto t = asymptotic_suite(P, dyadic(2, 8));
  const auto& f = fit(t, "nonlocal_defect");
  CHECK_FALSE(f.asserted);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    CAPTURE(t.rows[i].epsilon);
    CHECK(t.rows[i].integrals.nonlocal > t.rows[i - 1].integrals.nonlocal);
    CHECK(std::abs(t.nonlocal_limit - t.rows[i].integrals.nonlocal) <
          std::abs(t.nonlocal_limit - t.rows[i - 1].integrals.nonlocal));
  }
  const auto k = sharp_constants(3, 2.0);
  CHECK(t.nonlocal_limit ==
        doctest::Approx(std::pow(oracle::riesz_A(3, 2) * oracle::hls_C(3, 2), 1.5) *
                        std::pow(oracle::upper_S_alpha(3, 2), 2.5))
            .epsilon(1e-3));
  CHECK(t.sobolev_level == doctest::Approx(std::pow(k.S, 1.5)).epsilon(1e-14));
}

TEST_CASE("asymptotic suite input checks") {
  const Params P{3, 2.0, 2.0, 3.0, 1.0, 1.0};
  CHECK_THROWS_AS(asymptotic_suite(P, {}), InvalidInput);
  CHECK_THROWS_AS(asymptotic_suite(P, {0.3}), InvalidInput);
  CHECK_THROWS_AS(asymptotic_suite(P, {0.0}), InvalidInput);
  // A scale below the grid's resolution stays in the table, flagged, and out of the fits.
  const auto t = asymptotic_suite(P, {0.25, 0.125, 0.0625, 0.03125, std::ldexp(1.0, -16)}, {128, 3.0});
  REQUIRE(t.rows.size() == 5);
  CHECK_FALSE(t.rows.back().resolved);
  CHECK(fit(t, "mass").points == 4);
}

TEST_CASE("threshold formulas") {
  const auto k4 = sharp_constants(4, 1.0);
  const Params up{4, 1.0, 2.5, 3.0, 1.0, 1.0};
  const double T = 3.0 / 10.0 * std::pow(oracle::upper_S_alpha(4, 1.0), 5.0 / 3.0);
  CHECK(level_threshold(up, ThresholdCase::upper_critical_p, k4) == doctest::Approx(T).epsilon(1e-4));
  CHECK(T == doctest::Approx(32.8474).epsilon(1e-5));
  Params up2 = up;
  up2.mu = 2.0;
  CHECK(level_threshold(up2, ThresholdCase::upper_critical_p, k4) ==
        doctest::Approx(level_threshold(up, ThresholdCase::upper_critical_p, k4) * std::pow(2.0, -2.0 / 3.0))
            .epsilon(1e-12));

  const auto k3 = sharp_constants(3, 2.0);
  const Params low{3, 2.0, 5.0 / 3.0, 3.0, 2.0, 1.0};
  CHECK(level_threshold(low, ThresholdCase::lower_critical_p, k3) ==
        doctest::Approx(0.2 * std::pow(2.0, -1.5) * std::pow(oracle::lower_S1(3, 2), 2.5)).epsilon(1e-3));
  const Params qc{3, 2.0, 3.0, 6.0, 1.0, 4.0};
  CHECK(level_threshold(qc, ThresholdCase::critical_q, k3) ==
        doctest::Approx(std::pow(oracle::sobolev_S(3), 1.5) / 6.0).epsilon(1e-4));
  const Params dc{3, 2.0, 5.0 / 3.0, 6.0, 1.0, 4.0};
  CHECK(level_threshold(dc, ThresholdCase::doubly_critical, k3) ==
        std::min(level_threshold(dc, ThresholdCase::lower_critical_p, k3),
                 level_threshold(dc, ThresholdCase::critical_q, k3)));
}

TEST_CASE("threshold case selection") {
  CHECK_NOTHROW(check_threshold_case({4, 1.0, 2.5, 3.0, 1.0, 1.0}, ThresholdCase::upper_critical_p));
  CHECK_THROWS_AS(check_threshold_case({4, 1.0, 2.0, 3.0, 1.0, 1.0}, ThresholdCase::upper_critical_p), InvalidInput);
  CHECK_THROWS_AS(check_threshold_case({4, 1.0, 2.5, 3.0, 1.0, 1.0}, ThresholdCase::lower_critical_p), InvalidInput);
  CHECK_THROWS_AS(check_threshold_case({3, 2.0, 3.0, 6.0, 1.0, 0.0}, ThresholdCase::critical_q), InvalidInput);
  CHECK_THROWS_AS(threshold_check({3, 2.0, 2.0, 3.0, 1.0, 1.0}, ThresholdCase::critical_q, {0.25}), InvalidInput);
  CHECK_THROWS_AS(threshold_check({4, 1.0, 2.5, 3.0, 1.0, 1.0}, ThresholdCase::upper_critical_p, {}), InvalidInput);

  ThresholdCase c{};
  CHECK(applicable_threshold({3, 2.0, 5.0 / 3.0, 6.0, 1.0, 1.0}, 1e-3, c));
  CHECK(c == ThresholdCase::doubly_critical);
  CHECK(applicable_threshold({3, 2.0, 5.0 - 1e-4, 3.0, 1.0, 1.0}, 1e-3, c));
  CHECK(c == ThresholdCase::upper_critical_p);
  CHECK(applicable_threshold({3, 2.0, 3.0, 6.0, 1.0, 1.0}, 1e-3, c));
  CHECK(c == ThresholdCase::critical_q);
  CHECK_FALSE(applicable_threshold({3, 2.0, 2.0, 3.0, 1.0, 1.0}, 1e-3, c));
  CHECK_FALSE(applicable_threshold({3, 2.0, 3.0, 6.0, 1.0, 0.0}, 1e-3, c));

  for (auto k : {ThresholdCase::upper_critical_p, ThresholdCase::lower_critical_p, ThresholdCase::critical_q,
                 ThresholdCase::doubly_critical}) {
    CHECK(threshold_case_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(threshold_case_from_string("upper"), InvalidInput);
  CHECK(knob_from_string("mu") == Knob::mu);
  CHECK_THROWS_AS(knob_from_string("nu"), InvalidInput);
}

TEST_CASE("a family sitting exactly at the threshold is inconclusive") {
  // lambda = 0, b = 0, a = S^{N/2}, c = the nonlocal limit: the fiber maximum is the threshold.
  const auto k = sharp_constants(4, 1.0);
  const double a = std::pow(k.S, 2.0);
  const double c = std::pow(k.A_alpha * k.C_alpha, 2.0) * std::pow(k.S_alpha, 2.5);
  const auto rep = threshold_margins({4, 1.0, 2.5, 3.0, 1.0, 0.0}, ThresholdCase::upper_critical_p,
                                     {{1.0, {a, 0.0, c, 0.0}}}, k);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].inconclusive);
  CHECK(rep.inconclusive);
  CHECK_FALSE(rep.positive_for_small);
}

TEST_CASE("upper-critical margins for N = 4") {
  const Params P{4, 1.0, 2.5, 3.0, 1.0, 1.0};
  const auto rep = threshold_check(P, ThresholdCase::upper_critical_p, dyadic(2, 6));
  REQUIRE(rep.rows.size() == 5);
  CHECK(rep.positive_for_small);
  CHECK_FALSE(rep.inconclusive);
  // Positive once the bubble has concentrated; on that range the margin closes as eps shrinks.
  CHECK(rep.rows[0].margin < 0.0);
  for (std::size_t i = 2; i < rep.rows.size(); ++i) CHECK(rep.rows[i].margin > 0.0);
  for (std::size_t i = 3; i < rep.rows.size(); ++i) CHECK(rep.rows[i].margin < rep.rows[i - 1].margin);
  // The fiber maximum from the projection matches a dense scan.
  for (double e : dyadic(2, 6)) {
    const auto b = bubble_breakdown(P, e);
    const double sup = reduced_energy(b, P);
    CHECK(sup == doctest::Approx(scan_max(b, P)).epsilon(1e-8));
  }
}

TEST_CASE("upper-critical margins for N = 3 need a large lambda") {
  const Params P{3, 2.0, 5.0, 3.0, 1.0, 1.0};
  const auto eps = dyadic(2, 6);
  const auto at1 = threshold_check(P, ThresholdCase::upper_critical_p, eps);
  for (const auto& r : at1.rows) CHECK(r.margin <= 0.0);
  Params big = P;
  big.lambda = 1e3;
  CHECK(threshold_check(big, ThresholdCase::upper_critical_p, eps).positive_for_small);

  const auto s = critical_parameter_search(P, Knob::lambda, ThresholdCase::upper_critical_p, eps, 1.0, 1e6);
  CHECK_FALSE(s.holds_at_lower_end);
  CHECK(s.estimate > 1.0);
  CHECK(s.hi - s.lo < 0.1 * s.estimate);
  CHECK(s.hi - s.lo <= 1e-3 * s.hi);
  for (std::size_t i = 1; i < s.samples.size(); ++i) CHECK(s.samples[i].second >= s.samples[i - 1].second);
  Params at = P;
  at.lambda = s.hi;
  double best = -1.0;
  for (const auto& r : threshold_check(at, ThresholdCase::upper_critical_p, eps).rows) best = std::max(best, r.margin);
  CHECK(best > 0.0);
}

TEST_CASE("knob search input checks and N = 4") {
  const Params P{4, 1.0, 2.5, 3.0, 1.0, 1.0};
  const auto eps = dyadic(2, 6);
  CHECK_THROWS_AS(critical_parameter_search(P, Knob::lambda, ThresholdCase::upper_critical_p, eps, 10.0, 1.0),
                  InvalidInput);
  CHECK_THROWS_AS(critical_parameter_search(P, Knob::lambda, ThresholdCase::upper_critical_p, eps, 0.0, 1.0),
                  InvalidInput);
  CHECK_THROWS_AS(critical_parameter_search(P, Knob::lambda, ThresholdCase::upper_critical_p, {}, 0.1, 1.0),
                  InvalidInput);
  const auto s = critical_parameter_search(P, Knob::lambda, ThresholdCase::upper_critical_p, eps, 1.0, 10.0);
  CHECK(s.holds_at_lower_end);
  // With smaller bubbles available the critical lambda moves towards 0.
  const auto coarse = critical_parameter_search(P, Knob::lambda, ThresholdCase::upper_critical_p, eps, 1e-6, 1.0);
  const auto fine =
      critical_parameter_search(P, Knob::lambda, ThresholdCase::upper_critical_p, dyadic(2, 12), 1e-6, 1.0);
  CHECK(fine.estimate < 0.5 * coarse.estimate);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "choquard/errors.hpp"
#include "choquard/extremals.hpp"
#include "choquard/functionals.hpp"
#include "choquard/sampling.hpp"
#include "oracles/closed_forms.hpp"
#include "oracles/shooting.hpp"

using namespace choquard;

namespace {

const Params kPekar{3, 2.0, 2.0, 3.0, 1.0, 1.0};
const EnergyBreakdown kUnit{1.0, 1.0, 1.0, 1.0};

GridPtr pekar_grid3() { return build_grid(3, 20.0, 2048, GridScheme::graded, 3.0); }

}  // namespace

TEST_CASE("Params validation") {
  CHECK_NOTHROW(kPekar.validate());
  auto bad = kPekar;
  bad.N = 2;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = kPekar;
  bad.alpha = 3.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = kPekar;
  bad.p = 1.6;  // below (N + alpha)/N
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = kPekar;
  bad.p = 5.01;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = kPekar;
  bad.q = 2.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = kPekar;
  bad.q = 6.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = kPekar;
  bad.mu = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = kPekar;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  CHECK(kPekar.p_lower() == doctest::Approx(5.0 / 3.0));
  CHECK(kPekar.p_upper() == doctest::Approx(5.0));
  CHECK(kPekar.q_upper() == doctest::Approx(6.0));
}

TEST_CASE("formula arithmetic on the unit breakdown") {
  CHECK(energy(kUnit, kPekar) == doctest::Approx(5.0 / 12.0).epsilon(1e-15));
  CHECK(pohozaev(kUnit, kPekar) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(std::abs(nehari(kUnit, kPekar)) < 1e-15);
  CHECK(project_pohozaev(kUnit, kPekar) == doctest::Approx(oracle::tau0_unit_breakdown()).epsilon(1e-11));
  CHECK(oracle::tau0_unit_breakdown() == doctest::Approx(0.929153).epsilon(1e-6));
}

TEST_CASE("zero field") {
  const auto g = build_grid(3, 10.0, 128, GridScheme::graded, 2.0);
  const auto z = RadialField::zeros(g);
  const auto e = breakdown(z, kPekar);
  CHECK(e == EnergyBreakdown{});
  CHECK(energy(z, kPekar) == 0.0);
  CHECK(pohozaev(z, kPekar) == 0.0);
  CHECK(nehari(z, kPekar) == 0.0);
  const auto g0 = gradient_residual(z, kPekar);
  for (double v : g0.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(project_pohozaev(z, kPekar), DegenerateInput);
  CHECK_THROWS_AS(project_pohozaev(EnergyBreakdown{0.0, 1.0, 1.0, 1.0}, kPekar), DegenerateInput);
  CHECK_THROWS_AS(project_pohozaev(EnergyBreakdown{1.0, 1.0, 0.0, 1.0}, kPekar), DegenerateInput);
}

TEST_CASE("normalized lower-critical extremal has unit nonlocal term") {
  for (auto [N, a] : std::vector<std::pair<int, double>>{{3, 2.0}, {4, 1.0}}) {
    const auto g = pekar_grid(N);
    Params P{N, a, 0.0, 3.0, 1.0, 1.0};
    P.p = P.p_lower();
    P.q = 0.5 * (2.0 + P.q_upper());
    const auto V = pekar_extremal(g, 1.0, a);
    CHECK(breakdown(V, P).nonlocal == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("breakdown of the shooting profile") {
  const auto shot = oracle::solve_pekar_local();
  const auto exact = shot.integrals();
  const auto g = pekar_grid3();
  const auto u = RadialField::sample(g, [&](double r) { return shot.at(r); });
  const auto e = breakdown(u, kPekar);
  CHECK(e.kinetic == doctest::Approx(exact.kinetic).epsilon(1e-3));
  CHECK(e.mass == doctest::Approx(exact.mass).epsilon(1e-3));
  CHECK(e.nonlocal == doctest::Approx(exact.nonlocal).epsilon(1e-3));
  CHECK(e.local == doctest::Approx(exact.local).epsilon(1e-3));
}

TEST_CASE("identity J - P/N = a/N + mu alpha c / (2 N p)") {
  Sampler s(5);
  for (int k = 0; k < 200; ++k) {
    const auto P = s.params();
    const EnergyBreakdown e{s.uniform(0.1, 10.0), s.uniform(0.1, 10.0), s.uniform(0.1, 10.0), s.uniform(0.1, 10.0)};
    const double lhs = energy(e, P) - pohozaev(e, P) / P.N;
    const double rhs = e.kinetic / P.N + P.mu * P.alpha * e.nonlocal / (2.0 * P.N * P.p);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    // On the Pohozaev manifold this is the lower bound J >= a/N + mu alpha c/(2Np) with equality.
    const auto on = dilate(e, project_pohozaev(e, P), P);
    CHECK(energy(on, P) >= rhs * 0.0);
    CHECK(energy(on, P) == doctest::Approx(on.kinetic / P.N + P.mu * P.alpha * on.nonlocal / (2.0 * P.N * P.p)).epsilon(1e-9));
  }
}

TEST_CASE("gradient residual matches central differences to second order") {
  const auto g = build_grid(3, 15.0, 1024, GridScheme::graded, 2.0);
  Sampler s(17);
  for (auto P : {kPekar, Params{3, 1.0, 1.8, 2.5, 1.3, 0.4}}) {
    const auto u = s.positive_field(g);
    const auto w = s.positive_field(g) - s.positive_field(g);
    const Problem problem(P, g);
    const double exact = h1_inner(problem.gradient_residual(u), w);
    auto fd = [&](double h) { return (problem.energy(u + h * w) - problem.energy(u - h * w)) / (2.0 * h); };
    const double e1 = std::abs(fd(1e-2) - exact), e2 = std::abs(fd(5e-3) - exact);
    CHECK(e2 < 1e-4 * std::abs(exact) + 1e-12);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("dilation of fields") {
  const auto g = build_grid(3, 30.0, 2048, GridScheme::graded, 2.0);
  const auto u = RadialField::sample(g, [](double r) { return std::exp(-r * r) * (1.0 + 0.5 * r); });
  const auto same = dilate(u, 1.0);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(same[i] == doctest::Approx(u[i]).epsilon(1e-12));
  const auto collapsed = dilate(u, 0.0);
  for (double v : collapsed.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(dilate(u, -1.0), InvalidInput);
  const double b = l2_inner(u, u);
  for (double tau : {0.5, 2.0}) {
    CHECK(l2_inner(dilate(u, tau), dilate(u, tau)) == doctest::Approx(std::pow(tau, 3) * b).epsilon(1e-5));
  }
}

TEST_CASE("fiber map") {
  const auto g = build_grid(3, 30.0, 2048, GridScheme::graded, 2.0);
  const auto u = RadialField::sample(g, [](double r) { return 1.2 * std::exp(-r * r / 2.0); });
  const Problem problem(kPekar, g);
  CHECK(problem.fiber_energy(u, 0.0) == 0.0);
  for (double tau : {0.5, 1.0, 2.0}) {
    CHECK(problem.fiber_energy(u, tau) == doctest::Approx(problem.energy(dilate(u, tau))).epsilon(1e-4));
  }
  const auto e = problem.breakdown(u);
  CHECK(fiber_energy(e, 1e-4, kPekar) / 1e-4 == doctest::Approx(0.5 * e.kinetic).epsilon(1e-6));
  CHECK(fiber_energy(e, 50.0, kPekar) < 0.0);
  CHECK_THROWS_AS(fiber_energy(e, -0.1, kPekar), InvalidInput);
}

TEST_CASE("projection: fixed point, equivariance, scale-invariant maximum") {
  const auto g = build_grid(3, 40.0, 2048, GridScheme::graded, 2.0);
  const auto u = RadialField::sample(g, [](double r) { return 1.5 * std::exp(-r * r / 3.0); });
  const Problem problem(kPekar, g);
  const double tau0 = problem.project_pohozaev(u);
  const auto e = problem.breakdown(u);
  CHECK(std::abs(pohozaev(dilate(e, tau0, kPekar), kPekar)) < 1e-10 * (e.kinetic + e.mass));
  CHECK(project_pohozaev(dilate(e, tau0, kPekar), kPekar) == doctest::Approx(1.0).epsilon(1e-10));
  for (double s : {0.5, 2.0}) {
    CHECK(problem.project_pohozaev(dilate(u, s)) == doctest::Approx(tau0 / s).epsilon(1e-4));
    CHECK(problem.reduced_energy(dilate(u, s)) == doctest::Approx(problem.reduced_energy(u)).epsilon(1e-4));
    CHECK(project_pohozaev(dilate(e, s, kPekar), kPekar) == doctest::Approx(tau0 / s).epsilon(1e-11));
  }
  CHECK(problem.reduced_energy(u) >= problem.fiber_energy(u, 1.0));
}

TEST_CASE("random positive fields: nonnegative reduced energy") {
  const auto g = build_grid(3, 15.0, 512, GridScheme::graded, 2.0);
  Sampler s(99);
  for (int k = 0; k < 40; ++k) {
    const auto u = s.positive_field(g);
    CHECK(reduced_energy(u, kPekar) >= 0.0);
  }
}

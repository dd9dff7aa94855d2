#include "choquard/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "choquard/errors.hpp"

namespace choquard {

std::string to_string(GridScheme scheme) {
  return scheme == GridScheme::uniform ? "uniform" : "graded";
}

GridScheme grid_scheme_from_string(const std::string& name) {
  if (name == "uniform") return GridScheme::uniform;
  if (name == "graded") return GridScheme::graded;
  throw InvalidInput("unknown grid scheme '" + name + "' (expected uniform or graded)");
}

double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

RadialGrid::RadialGrid(const GridSpec& spec) : spec_(spec) {
  if (spec.dimension < 3) throw InvalidInput("grid dimension must be at least 3");
  if (spec.nodes < 16) throw InvalidInput("grid needs at least 16 nodes");
  if (!(spec.rmax > 0.0) || !std::isfinite(spec.rmax)) throw InvalidInput("rmax must be positive");
  if (spec.scheme == GridScheme::graded && !(spec.gamma > 0.0 && std::isfinite(spec.gamma))) {
    throw InvalidInput("grading exponent gamma must be positive");
  }
  gamma_ = spec.scheme == GridScheme::uniform ? 1.0 : spec.gamma;
  const std::size_t M = spec.nodes;
  const int N = spec.dimension;
  const double h = 1.0 / static_cast<double>(M);
  sphere_area_ = choquard::sphere_area(N);

  nodes_.resize(M);
  weights_.resize(M);
  volume_.resize(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double s = static_cast<double>(k + 1) * h;
    nodes_[k] = k + 1 == M ? spec.rmax : spec.rmax * std::pow(s, gamma_);
    weights_[k] = h * spec.rmax * gamma_ * std::pow(s, gamma_ - 1.0);
  }
  // Gregory correction of the closing end: trapezoid -> fourth order.
  constexpr std::array<double, 3> end{23.0 / 24.0, 7.0 / 6.0, 3.0 / 8.0};
  for (std::size_t j = 0; j < 3; ++j) weights_[M - 3 + j] *= end[j];
  for (std::size_t k = 0; k < M; ++k) volume_[k] = weights_[k] * std::pow(nodes_[k], N - 1);

  for (std::size_t k = 1; k < M; ++k) {
    if (!(nodes_[k] > nodes_[k - 1])) throw InvalidInput("grid nodes are not strictly increasing");
  }

  // Cell k couples nodes k and k+1; the last entry is a ghost cell of the same width past
  // rmax carrying the field down to zero.
  stiffness_.resize(M);
  for (std::size_t k = 0; k < M; ++k) {
    const double lo = nodes_[k];
    const double width = k + 1 < M ? nodes_[k + 1] - lo : nodes_[M - 1] - nodes_[M - 2];
    // r_hi^N - r_lo^N without cancellation.
    const double shell = std::pow(lo, N) * std::expm1(N * std::log1p(width / lo));
    stiffness_[k] = sphere_area_ * shell / (N * width * width);
  }
}

double RadialGrid::mapped(double r) const { return std::pow(r / spec_.rmax, 1.0 / gamma_); }

GridPtr build_grid(const GridSpec& spec) { return std::make_shared<const RadialGrid>(spec); }

GridPtr build_grid(int N, double rmax, std::size_t M, GridScheme scheme, double gamma) {
  return build_grid(GridSpec{N, rmax, M, scheme, gamma});
}

bool same_grid(const RadialGrid& a, const RadialGrid& b) { return &a == &b || a.spec() == b.spec(); }

RadialField::RadialField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidInput("field needs a grid");
  if (values_.size() != grid_->size()) throw InvalidInput("field length does not match grid size");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInput("field values must be finite");
  }
}

RadialField RadialField::zeros(GridPtr grid) {
  const std::size_t n = grid->size();
  return RadialField(std::move(grid), std::vector<double>(n, 0.0));
}

RadialField RadialField::sample(GridPtr grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid->size());
  const auto r = grid->nodes();
  std::transform(r.begin(), r.end(), v.begin(), f);
  return RadialField(std::move(grid), std::move(v));
}

namespace {
void require_same(const RadialField& a, const RadialField& b) {
  if (!same_grid(a.grid(), b.grid())) throw InvalidInput("fields live on different grids");
}
}  // namespace

RadialField& RadialField::operator+=(const RadialField& other) {
  require_same(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

RadialField& RadialField::operator-=(const RadialField& other) {
  require_same(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

RadialField& RadialField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
RadialField operator*(double c, RadialField a) { return a *= c; }

double integrate(const RadialGrid& grid, std::span<const double> f) {
  const auto W = grid.volume_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += W[i] * f[i];
  return grid.sphere_area() * sum;
}

double integrate(const RadialField& f) { return integrate(f.grid(), f.values()); }

double lp_norm(const RadialField& f, double t) {
  if (!(t >= 1.0)) throw InvalidInput("lp_norm exponent must be >= 1");
  std::vector<double> g(f.size());
  const auto v = f.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(std::abs(v[i]), t);
  return std::pow(integrate(f.grid(), g), 1.0 / t);
}

double grad_sq(const RadialGrid& grid, std::span<const double> f) {
  const auto kappa = grid.stiffness();
  const std::size_t M = f.size();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < M; ++k) {
    const double d = f[k + 1] - f[k];
    sum += kappa[k] * d * d;
  }
  sum += kappa[M - 1] * f[M - 1] * f[M - 1];
  return sum;
}

double grad_sq(const RadialField& f) { return grad_sq(f.grid(), f.values()); }

double l2_inner(const RadialField& u, const RadialField& v) {
  require_same(u, v);
  const auto W = u.grid().volume_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += W[i] * u[i] * v[i];
  return u.grid().sphere_area() * sum;
}

double h1_inner(const RadialGrid& grid, std::span<const double> u, std::span<const double> v) {
  const auto kappa = grid.stiffness();
  const auto W = grid.volume_weights();
  const std::size_t M = u.size();
  double grad = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k + 1 < M; ++k) grad += kappa[k] * (u[k + 1] - u[k]) * (v[k + 1] - v[k]);
  grad += kappa[M - 1] * u[M - 1] * v[M - 1];
  for (std::size_t k = 0; k < M; ++k) mass += W[k] * u[k] * v[k];
  return grad + grid.sphere_area() * mass;
}

double h1_inner(const RadialField& u, const RadialField& v) {
  require_same(u, v);
  return h1_inner(u.grid(), u.values(), v.values());
}

double h1_norm(const RadialField& u) { return std::sqrt(h1_inner(u, u)); }

std::vector<double> h1_solve(const RadialGrid& grid, std::span<const double> rhs) {
  const std::size_t M = grid.size();
  if (rhs.size() != M) throw InvalidInput("h1_solve: rhs length does not match grid");
  const auto kappa = grid.stiffness();
  const auto W = grid.volume_weights();
  const double area = grid.sphere_area();
  const std::size_t n = M - 1;  // the node at rmax is pinned to zero

  std::vector<double> diag(n), upper(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = area * W[i] + kappa[i] + (i > 0 ? kappa[i - 1] : 0.0);
    upper[i] = -kappa[i];
    b[i] = area * W[i] * rhs[i];
  }
  // Thomas algorithm; the matrix is symmetric and strictly diagonally dominant.
  for (std::size_t i = 1; i < n; ++i) {
    const double m = upper[i - 1] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    b[i] -= m * b[i - 1];
  }
  std::vector<double> w(M, 0.0);
  w[n - 1] = b[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) w[i] = (b[i] - upper[i] * w[i + 1]) / diag[i];
  for (double x : w) {
    if (!std::isfinite(x)) throw NumericalFailure("h1_solve produced a non-finite value");
  }
  return w;
}

RadialField h1_solve(const RadialField& rhs) {
  return RadialField(rhs.grid_ptr(), h1_solve(rhs.grid(), rhs.values()));
}

double interpolate(const RadialGrid& grid, std::span<const double> f, double r) {
  const std::size_t M = grid.size();
  if (r < 0.0) r = -r;
  if (r > grid.rmax() * (1.0 + 1e-14)) return 0.0;
  const double x = grid.mapped(std::min(r, grid.rmax())) * static_cast<double>(M);
  const auto k = static_cast<long>(std::floor(x));
  std::array<long, 4> pos{};
  if (k <= 0) {
    pos = {-2, -1, 1, 2};
  } else if (k == 1) {
    pos = {-1, 1, 2, 3};
  } else if (k + 2 > static_cast<long>(M)) {
    const long m = static_cast<long>(M);
    pos = {m - 3, m - 2, m - 1, m};
  } else {
    pos = {k - 1, k, k + 1, k + 2};
  }
  double value = 0.0;
  for (std::size_t a = 0; a < 4; ++a) {
    double basis = 1.0;
    for (std::size_t b = 0; b < 4; ++b) {
      if (a != b) basis *= (x - pos[b]) / static_cast<double>(pos[a] - pos[b]);
    }
    value += basis * f[static_cast<std::size_t>(std::labs(pos[a]) - 1)];
  }
  return value;
}

double interpolate(const RadialField& f, double r) { return interpolate(f.grid(), f.values(), r); }

double half_mass_radius(const RadialField& f) {
  const auto& grid = f.grid();
  const auto W = grid.volume_weights();
  const auto r = grid.nodes();
  const std::size_t M = f.size();
  double total = 0.0;
  for (std::size_t i = 0; i < M; ++i) total += W[i] * f[i] * f[i];
  if (!(total > 0.0)) return 0.0;
  // Running trapezoid in the mapped variable: node k closes its interval with half weight.
  double before = 0.0;
  double prev_partial = 0.0;
  double prev_r = 0.0;
  for (std::size_t i = 0; i < M; ++i) {
    const double term = W[i] * f[i] * f[i];
    const double partial = before + 0.5 * term;
    if (partial >= 0.5 * total) {
      const double span = partial - prev_partial;
      const double t = span > 0.0 ? (0.5 * total - prev_partial) / span : 1.0;
      return prev_r + t * (r[i] - prev_r);
    }
    before += term;
    prev_partial = partial;
    prev_r = r[i];
  }
  return grid.rmax();
}

}  // namespace choquard

#include "choquard/riesz.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/digamma.hpp>

#include <algorithm>
#include <cmath>
#include <list>
#include <mutex>
#include <numbers>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::size_t kSeriesTerms = 120;

void check_alpha(int N, double alpha) {
  if (N < 3) throw InvalidInput("dimension must be at least 3");
  if (!(alpha > 0.0 && alpha < N)) {
    std::ostringstream os;
    os << "alpha must lie in (0, N); got alpha = " << alpha << " for N = " << N;
    throw InvalidInput(os.str());
  }
}

// Terms needed for x^n to fall below ~1e-17 (x <= 1/2 everywhere we call this).
std::size_t terms_for(double x) {
  if (x < 1e-300) return 1;
  const double n = std::ceil(-39.0 / std::log(x)) + 4.0;
  return static_cast<std::size_t>(std::clamp(n, 4.0, static_cast<double>(kSeriesTerms)));
}

double horner(const std::vector<double>& coeff, double w) {
  double sum = 0.0;
  for (std::size_t n = std::min(coeff.size(), terms_for(w)); n-- > 0;) sum = sum * w + coeff[n];
  return sum;
}

}  // namespace

double riesz_normalization(int N, double alpha) {
  check_alpha(N, alpha);
  return std::tgamma(0.5 * (N - alpha)) /
         (std::tgamma(0.5 * alpha) * std::pow(pi, 0.5 * N) * std::pow(2.0, alpha));
}

double hls_constant(int N, double alpha) {
  check_alpha(N, alpha);
  return std::pow(pi, 0.5 * (N - alpha)) * std::tgamma(0.5 * alpha) / std::tgamma(0.5 * (N + alpha)) *
         std::pow(std::tgamma(0.5 * N) / std::tgamma(static_cast<double>(N)), -alpha / N);
}

// k(r, s) = |S^{N-1}| R^{alpha-N} 2F1(a, b; c; rho^2) with R = max(r, s), rho = min/max,
// a = (N - alpha)/2, b = 1 - alpha/2, c = N/2 (Gegenbauer generating function).
AngularKernel::AngularKernel(int N, double alpha) : N_(N), alpha_(alpha) {
  check_alpha(N, alpha);
  area_ = sphere_area(N);
  area_lower_ = 2.0 * std::pow(pi, 0.5 * (N - 1)) / std::tgamma(0.5 * (N - 1));
  a_ = 0.5 * (N - alpha);
  b_ = 1.0 - 0.5 * alpha;
  c_ = 0.5 * N;
  m_ = c_ - a_ - b_;  // = alpha - 1

  direct_.resize(kSeriesTerms);
  direct_[0] = 1.0;
  for (std::size_t n = 0; n + 1 < kSeriesTerms; ++n) {
    direct_[n + 1] = direct_[n] * (a_ + n) * (b_ + n) / ((c_ + n) * (n + 1.0));
  }

  if (N == 3) {
    mode_ = Mode::closed3;
    return;
  }
  const double b_round = std::round(b_);
  if (b_round <= 0.0 && std::abs(b_ - b_round) < 1e-14) {
    mode_ = Mode::terminating;
    return;
  }
  const double m_round = std::round(m_);
  if (std::abs(m_ - m_round) < 1e-12) {
    const auto m = static_cast<int>(m_round);
    if (m == 0) {
      mode_ = Mode::log_zero;
      c1_ = std::tgamma(a_ + b_) / (std::tgamma(a_) * std::tgamma(b_));
      first_.resize(kSeriesTerms);
      logs_.resize(kSeriesTerms);
      double e = 1.0;
      for (std::size_t n = 0; n < kSeriesTerms; ++n) {
        first_[n] = e;
        logs_[n] = 2.0 * boost::math::digamma(n + 1.0) - boost::math::digamma(a_ + n) -
                   boost::math::digamma(b_ + n);
        e *= (a_ + n) * (b_ + n) / ((n + 1.0) * (n + 1.0));
      }
    } else {
      mode_ = Mode::log_integer;
      c1_ = std::tgamma(m) * std::tgamma(c_) / (std::tgamma(a_ + m) * std::tgamma(b_ + m));
      finite_.resize(m);
      double t = 1.0;
      for (int n = 0; n < m; ++n) {
        finite_[n] = t;
        t *= (a_ + n) * (b_ + n) / ((n + 1.0) * (1.0 - m + n));
      }
      c2_ = (m % 2 == 0 ? 1.0 : -1.0) * std::tgamma(c_) / (std::tgamma(a_) * std::tgamma(b_));
      first_.resize(kSeriesTerms);
      logs_.resize(kSeriesTerms);
      double e = 1.0 / std::tgamma(m + 1.0);
      for (std::size_t n = 0; n < kSeriesTerms; ++n) {
        first_[n] = e;
        logs_[n] = -boost::math::digamma(n + 1.0) - boost::math::digamma(n + m + 1.0) +
                   boost::math::digamma(a_ + n + m) + boost::math::digamma(b_ + n + m);
        e *= (a_ + m + n) * (b_ + m + n) / ((n + 1.0) * (n + m + 1.0));
      }
    }
    return;
  }
  if (std::abs(m_ - m_round) < 1e-4) {
    // The two connection terms cancel catastrophically this close to an integer gap.
    mode_ = Mode::quadrature;
    return;
  }
  mode_ = Mode::direct_and_connection;
  c1_ = std::tgamma(c_) * std::tgamma(m_) / (std::tgamma(c_ - a_) * std::tgamma(c_ - b_));
  c2_ = std::tgamma(c_) * std::tgamma(-m_) / (std::tgamma(a_) * std::tgamma(b_));
  first_.resize(kSeriesTerms);
  second_.resize(kSeriesTerms);
  first_[0] = 1.0;
  second_[0] = 1.0;
  for (std::size_t n = 0; n + 1 < kSeriesTerms; ++n) {
    first_[n + 1] = first_[n] * (a_ + n) * (b_ + n) / ((1.0 - m_ + n) * (n + 1.0));
    second_[n + 1] = second_[n] * (c_ - a_ + n) * (c_ - b_ + n) / ((1.0 + m_ + n) * (n + 1.0));
  }
}

double AngularKernel::profile(double z) const {
  if (mode_ == Mode::terminating || z <= 0.5) return horner(direct_, z);
  const double w = 1.0 - z;
  switch (mode_) {
    case Mode::direct_and_connection:
      return c1_ * horner(first_, w) + c2_ * std::pow(w, m_) * horner(second_, w);
    case Mode::log_zero: {
      const double lw = std::log(w);
      double sum = 0.0;
      for (std::size_t n = terms_for(w); n-- > 0;) sum = sum * w + first_[n] * (logs_[n] - lw);
      return c1_ * sum;
    }
    case Mode::log_integer: {
      const double lw = std::log(w);
      double tail = 0.0;
      for (std::size_t n = terms_for(w); n-- > 0;) tail = tail * w + first_[n] * (lw + logs_[n]);
      return c1_ * horner(finite_, w) - c2_ * std::pow(w, m_) * tail;
    }
    case Mode::quadrature:
      return by_quadrature(std::sqrt(z)) / area_;
    default:
      break;
  }
  throw NumericalFailure("angular kernel: unreachable evaluation mode");
}

// |S^{N-2}| int_0^pi sin^{N-2} t ((1-rho)^2 + 4 rho sin^2(t/2))^{(alpha-N)/2} dt on panels that
// grow geometrically away from the near-singular point t = 0.
double AngularKernel::by_quadrature(double rho) const {
  const double gap = (1.0 - rho) * (1.0 - rho);
  const double expo = 0.5 * (alpha_ - N_);
  auto f = [&](double t) {
    const double sh = std::sin(0.5 * t);
    return std::pow(std::sin(t), N_ - 2) * std::pow(gap + 4.0 * rho * sh * sh, expo);
  };
  double lo = 0.0;
  double hi = std::min(pi, std::max((1.0 - rho) / std::sqrt(rho), 1e-300));
  double total = 0.0;
  while (true) {
    total += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
    if (hi >= pi) break;
    lo = hi;
    hi = std::min(pi, 2.0 * hi);
  }
  return area_lower_ * total;
}

double AngularKernel::operator()(double r, double s) const {
  if (!(r > 0.0) || !(s > 0.0)) throw InvalidInput("angular_kernel: radii must be positive");
  const double R = std::max(r, s);
  const double rho = std::min(r, s) / R;
  if (rho == 1.0) {
    if (alpha_ <= 1.0) throw DegenerateInput("angular_kernel: diagonal is singular for alpha <= 1");
    const double gauss_sum = std::tgamma(c_) * std::tgamma(m_) / (std::tgamma(c_ - a_) * std::tgamma(c_ - b_));
    return area_ * std::pow(R, alpha_ - N_) * gauss_sum;
  }
  if (mode_ == Mode::closed3) {
    // 2 pi / (r s) * ((r + s)^beta - |r - s|^beta) / beta, written in rho so that it stays
    // finite and accurate when one radius is far smaller than the other.
    const double beta = alpha_ - 1.0;
    const double spread = std::log1p(2.0 * rho / (1.0 - rho));  // log((1 + rho) / (1 - rho))
    const double pref = 2.0 * pi * std::pow(R, alpha_ - 3.0) / rho;
    if (std::abs(beta) < 1e-8) return pref * spread;
    return pref * std::exp(beta * std::log1p(-rho)) * std::expm1(beta * spread) / beta;
  }
  return area_ * std::pow(R, alpha_ - N_) * profile(rho * rho);
}

double angular_kernel(int N, double alpha, double r, double s) {
  return AngularKernel(N, alpha)(r, s);
}

double kernel_row_integral(int N, double alpha, double r, double rmax) {
  check_alpha(N, alpha);
  if (!(r > 0.0) || r > rmax) throw InvalidInput("kernel_row_integral: need 0 < r <= rmax");
  const double full = sphere_area(N);
  const double lower = 2.0 * std::pow(pi, 0.5 * (N - 1)) / std::tgamma(0.5 * (N - 1));
  const double h = 0.5 * (N - 1);
  const double cap_scale = std::pow(2.0, N - 2) * boost::math::beta(h, h);

  // Fraction of the sphere of radius t = rmax + r v around x (|x| = r) that lies inside
  // B_rmax, written so that nothing cancels when r << rmax.
  auto cap = [&](double v) {
    const double t = rmax + r * v;
    double c = -(r * (1.0 + v * v) + 2.0 * rmax * v) / (2.0 * t);
    c = std::clamp(c, -1.0, 1.0);
    if (N == 3) return 1.0 + c;
    return cap_scale * boost::math::ibeta(h, h, 0.5 * (1.0 + c));
  };
  const double inner = rmax - r;
  double total = full * std::pow(inner, alpha) / alpha;
  auto integrand = [&](double v) { return std::pow(rmax + r * v, alpha - 1.0) * cap(v); };
  boost::math::quadrature::tanh_sinh<double> ts;
  total += lower * r * ts.integrate(integrand, -1.0, 1.0, 1e-12);
  return total;
}

namespace {

// int k(r_i, s) s^{N-1} ds over the dual cell of node i (midpoints to the neighbours).
// Each half is mapped by |s - r_i| = D x^kappa, which turns the |r_i - s|^{alpha-1} (or log)
// singularity into a smooth integrand for Gauss-Legendre.
double cell_integral(const AngularKernel& kernel, const RadialGrid& grid, std::size_t i) {
  const auto r = grid.nodes();
  const int N = grid.dimension();
  const double ri = r[i];
  const double kappa = std::max(1.0, 2.0 / kernel.alpha());
  auto half = [&](double D, double dir) {
    if (!(D > 0.0)) return 0.0;
    auto f = [&](double x) {
      const double d = D * std::pow(x, kappa);
      const double s = ri + dir * d;
      if (d == 0.0 || !(s > 0.0)) return 0.0;
      return kernel(ri, s) * std::pow(s, N - 1) * D * kappa * std::pow(x, kappa - 1.0);
    };
    return boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, 1.0);
  };
  const double lo = i == 0 ? 0.0 : 0.5 * (r[i - 1] + ri);
  const double hi = i + 1 == r.size() ? ri : 0.5 * (ri + r[i + 1]);
  return half(ri - lo, -1.0) + half(hi - ri, 1.0);
}

}  // namespace

RieszKernel::RieszKernel(GridPtr grid, double alpha)
    : grid_(std::move(grid)), alpha_(alpha), n_(grid_->size()) {
  const int N = grid_->dimension();
  normalization_ = riesz_normalization(N, alpha);
  const AngularKernel kernel(N, alpha);
  const auto r = grid_->nodes();
  const auto W = grid_->volume_weights();
  k_.assign(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double v = kernel(r[i], r[j]);
      k_[i * n_ + j] = v;
      k_[j * n_ + i] = v;
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    double off = 0.0;
    const double* row = &k_[i * n_];
    for (std::size_t j = 0; j < n_; ++j) {
      if (j != i) off += row[j] * W[j];
    }
    const double exact = kernel_row_integral(N, alpha, r[i], grid_->rmax());
    double diag = (exact - off) / W[i];
    // Where the cell is tiny next to the quadrature error of the rest of the row, the
    // subtraction is noise; fall back to integrating the kernel over the node's own cell.
    const double local = cell_integral(kernel, *grid_, i) / W[i];
    if (!(diag >= 0.5 * local)) diag = local;
    k_[i * n_ + i] = diag;
  }
  for (double v : k_) {
    if (!std::isfinite(v)) throw NumericalFailure("Riesz kernel assembly produced a non-finite entry");
  }
}

std::vector<double> RieszKernel::apply_reduced(std::span<const double> f) const {
  if (f.size() != n_) throw InvalidInput("Riesz apply: field length does not match kernel");
  const auto W = grid_->volume_weights();
  std::vector<double> y(n_);
  for (std::size_t j = 0; j < n_; ++j) y[j] = W[j] * f[j];
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &k_[i * n_];
    double sum = 0.0;
    for (std::size_t j = 0; j < n_; ++j) sum += row[j] * y[j];
    out[i] = sum;
  }
  return out;
}

std::vector<double> RieszKernel::apply(std::span<const double> f) const {
  auto out = apply_reduced(f);
  for (double& v : out) v *= normalization_;
  return out;
}

double RieszKernel::bilinear(std::span<const double> u, std::span<const double> v) const {
  if (v.size() != n_) throw InvalidInput("Riesz bilinear: field length does not match kernel");
  const auto pot = apply_reduced(u);
  return integrate(*grid_, [&] {
    std::vector<double> prod(n_);
    for (std::size_t i = 0; i < n_; ++i) prod[i] = pot[i] * v[i];
    return prod;
  }());
}

namespace {

struct CacheEntry {
  GridSpec spec;
  double alpha;
  KernelPtr kernel;
};

std::mutex cache_mutex;
std::list<CacheEntry> cache;  // most recent first
constexpr std::size_t kCacheBudget = 600u << 20;  // bytes of kernel storage kept alive

}  // namespace

KernelPtr riesz_kernel(const GridPtr& grid, double alpha) {
  {
    std::lock_guard lock(cache_mutex);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      if (it->alpha == alpha && it->spec == grid->spec()) {
        cache.splice(cache.begin(), cache, it);
        return cache.front().kernel;
      }
    }
  }
  auto kernel = std::make_shared<const RieszKernel>(grid, alpha);
  std::lock_guard lock(cache_mutex);
  cache.push_front({grid->spec(), alpha, kernel});
  std::size_t bytes = 0;
  for (auto it = cache.begin(); it != cache.end();) {
    bytes += it->spec.nodes * it->spec.nodes * sizeof(double);
    if (bytes > kCacheBudget && it != cache.begin()) {
      it = cache.erase(it);
    } else {
      ++it;
    }
  }
  return kernel;
}

RadialField riesz_apply(const RadialField& f, const RieszKernel& kernel) {
  if (!same_grid(f.grid(), kernel.grid())) throw InvalidInput("Riesz apply: field and kernel grids differ");
  return RadialField(f.grid_ptr(), kernel.apply(f.values()));
}

RadialField riesz_apply(const RadialField& f, double alpha) {
  return riesz_apply(f, *riesz_kernel(f.grid_ptr(), alpha));
}

double hls_bilinear(const RadialField& u, const RadialField& v, const RieszKernel& kernel) {
  if (!same_grid(u.grid(), kernel.grid()) || !same_grid(v.grid(), kernel.grid())) {
    throw InvalidInput("hls_bilinear: field and kernel grids differ");
  }
  return kernel.bilinear(u.values(), v.values());
}

double hls_bilinear(const RadialField& u, const RadialField& v, double alpha) {
  return hls_bilinear(u, v, *riesz_kernel(u.grid_ptr(), alpha));
}

double hls_ratio(const RadialField& u, const RadialField& v, const RieszKernel& kernel) {
  const double t = 2.0 * kernel.dimension() / (kernel.dimension() + kernel.alpha());
  const double nu = lp_norm(u, t);
  const double nv = lp_norm(v, t);
  if (!(nu > 0.0) || !(nv > 0.0)) throw DegenerateInput("hls_ratio: zero field");
  return hls_bilinear(u, v, kernel) / (nu * nv);
}

double hls_ratio(const RadialField& u, const RadialField& v, double alpha) {
  return hls_ratio(u, v, *riesz_kernel(u.grid_ptr(), alpha));
}

}  // namespace choquard

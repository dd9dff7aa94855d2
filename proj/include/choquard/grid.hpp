#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace choquard {

enum class GridScheme { uniform, graded };

std::string to_string(GridScheme scheme);
GridScheme grid_scheme_from_string(const std::string& name);

struct GridSpec {
  int dimension = 3;
  double rmax = 30.0;
  std::size_t nodes = 1024;
  GridScheme scheme = GridScheme::graded;
  double gamma = 2.0;  // grading exponent, ignored for the uniform scheme

  bool operator==(const GridSpec&) const = default;
};

/// Radial discretization of R^N on (0, rmax].
///
/// Nodes are r_i = rmax (i/M)^gamma, i = 1..M. Quadrature is the trapezoid rule in the
/// mapped variable s = i/M with a fourth-order end correction at s = 1; the end at the
/// origin needs no correction because radial integrands are odd-order flat there.
class RadialGrid {
 public:
  explicit RadialGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  double rmax() const { return spec_.rmax; }
  std::size_t size() const { return nodes_.size(); }
  double gamma() const { return gamma_; }

  std::span<const double> nodes() const { return nodes_; }
  /// Plain quadrature weights in r: sum_i w_i f(r_i) ~ int_0^rmax f dr.
  std::span<const double> weights() const { return weights_; }
  /// w_i r_i^{N-1}, the radial volume weights without the sphere area.
  std::span<const double> volume_weights() const { return volume_; }
  double sphere_area() const { return sphere_area_; }

  /// Coefficient of (u_{i+1} - u_i)^2 in the discrete Dirichlet integral (sphere area included).
  std::span<const double> stiffness() const { return stiffness_; }

  /// Mapped coordinate s(r) = (r/rmax)^{1/gamma}.
  double mapped(double r) const;

 private:
  GridSpec spec_;
  double gamma_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<double> volume_;
  std::vector<double> stiffness_;
  double sphere_area_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr build_grid(int N, double rmax, std::size_t M, GridScheme scheme, double gamma = 2.0);
GridPtr build_grid(const GridSpec& spec);

/// |S^{N-1}| = 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int N);

/// A real sample per node of a radial grid.
class RadialField {
 public:
  RadialField(GridPtr grid, std::vector<double> values);

  static RadialField zeros(GridPtr grid);
  static RadialField sample(GridPtr grid, const std::function<double(double)>& f);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Copy of the values, for building derived fields.
  std::vector<double> to_vector() const { return values_; }

  RadialField& operator+=(const RadialField& other);
  RadialField& operator-=(const RadialField& other);
  RadialField& operator*=(double c);

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

RadialField operator+(RadialField a, const RadialField& b);
RadialField operator-(RadialField a, const RadialField& b);
RadialField operator*(double c, RadialField a);

bool same_grid(const RadialGrid& a, const RadialGrid& b);

/// sphere_area * sum_i w_i f_i r_i^{N-1}.
double integrate(const RadialField& f);
double integrate(const RadialGrid& grid, std::span<const double> f);

/// (int |f|^t)^{1/t}, t >= 1.
double lp_norm(const RadialField& f, double t);

/// Discrete Dirichlet integral: exact gradient energy of the piecewise linear interpolant,
/// even extension at the origin, no contribution beyond rmax.
double grad_sq(const RadialField& f);
double grad_sq(const RadialGrid& grid, std::span<const double> f);

/// Discrete L2 and H1 inner products consistent with integrate and grad_sq.
double l2_inner(const RadialField& u, const RadialField& v);
double h1_inner(const RadialField& u, const RadialField& v);
double h1_inner(const RadialGrid& grid, std::span<const double> u, std::span<const double> v);
double h1_norm(const RadialField& u);

/// Solves (-Delta + 1) w = rhs with w(rmax) = 0 in the Galerkin sense:
/// <w, v>_H1 = <rhs, v>_L2 for every discrete v vanishing at rmax.
RadialField h1_solve(const RadialField& rhs);
std::vector<double> h1_solve(const RadialGrid& grid, std::span<const double> rhs);

/// Cubic interpolation in the mapped coordinate, even across the origin, zero beyond rmax.
double interpolate(const RadialField& f, double r);
double interpolate(const RadialGrid& grid, std::span<const double> f, double r);

/// Radius of the ball that carries half of int f^2.
double half_mass_radius(const RadialField& f);

}  // namespace choquard

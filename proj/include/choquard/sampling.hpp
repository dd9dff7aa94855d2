#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "choquard/functionals.hpp"

namespace choquard {

/// Seeded source for the randomized checks. Uniforms are built from the raw 64-bit stream so
/// that a seed gives the same samples with every standard library.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  std::size_t index(std::size_t n);       // {0, ..., n-1}

  /// Sum of one to three Gaussian bumps with random heights, centres in [0, 3] and widths in
  /// [0.3, 2]: positive, smooth, decaying well inside any grid with rmax >= 15.
  RadialField positive_field(const GridPtr& grid);

  /// (N, alpha) from a fixed list, then p in [p_lower, p_upper] and q in (2, q_upper] with the
  /// critical endpoints drawn a fifth of the time each; mu in [0.5, 2], lambda in [0, 2].
  Params params();

 private:
  std::mt19937_64 engine_;
};

/// The (N, alpha) pairs Sampler::params draws from.
const std::vector<std::pair<int, double>>& sampled_dimensions();

}  // namespace choquard

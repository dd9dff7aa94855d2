#include "choquard/sampling.hpp"

#include <algorithm>
#include <cmath>

namespace choquard {

double Sampler::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Sampler::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::size_t Sampler::index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

RadialField Sampler::positive_field(const GridPtr& grid) {
  const std::size_t bumps = 1 + index(3);
  std::vector<double> height, centre, width;
  for (std::size_t k = 0; k < bumps; ++k) {
    height.push_back(uniform(0.2, 2.0));
    centre.push_back(uniform(0.0, 3.0));
    width.push_back(uniform(0.3, 2.0));
  }
  return RadialField::sample(grid, [&](double r) {
    double v = 0.0;
    for (std::size_t k = 0; k < bumps; ++k) {
      const double z = (r - centre[k]) / width[k];
      v += height[k] * std::exp(-z * z);
    }
    return v;
  });
}

const std::vector<std::pair<int, double>>& sampled_dimensions() {
  static const std::vector<std::pair<int, double>> dims{{3, 2.0}, {3, 1.0}, {3, 0.5}, {4, 1.0}, {4, 2.5}, {5, 2.0}};
  return dims;
}

Params Sampler::params() {
  const auto& dims = sampled_dimensions();
  const auto [N, alpha] = dims[index(dims.size())];
  Params P;
  P.N = N;
  P.alpha = alpha;
  const double pick_p = uniform();
  if (pick_p < 0.2) {
    P.p = P.p_lower();
  } else if (pick_p < 0.4) {
    P.p = P.p_upper();
  } else {
    P.p = uniform(P.p_lower(), P.p_upper());
  }
  P.q = uniform() < 0.2 ? P.q_upper() : uniform(2.0 + 1e-3, P.q_upper());
  P.mu = uniform(0.5, 2.0);
  P.lambda = uniform(0.0, 2.0);
  return P;
}

}  // namespace choquard

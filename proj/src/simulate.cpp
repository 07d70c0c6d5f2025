#include "licors/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "licors/util.hpp"

namespace licors {

namespace {

int wrap(int r, int n) {
  r %= n;
  return r < 0 ? r + n : r;
}

int latent_from(const Field& x, int r, int t) {
  const int n = x.n_space();
  double five = 0.0;
  for (int i = -2; i <= 2; ++i) five += x.at(wrap(r + i, n), t - 2);
  double three = 0.0;
  for (int i = -1; i <= 1; ++i) three += x.at(wrap(r + i, n), t - 1);
  // std::round rounds halves away from zero, matching the sign symmetry of
  // the update rule.
  return static_cast<int>(std::round(five / 5.0 - three / 3.0));
}

double gaussian_at(uint64_t seed, int t_global, int r) {
  SplitMix64 g(mix_seed(seed, static_cast<uint64_t>(t_global),
                        static_cast<uint64_t>(r)));
  return g.gaussian();
}

}  // namespace

SimOutput simulate(int n_space, int T, int burn_in, uint64_t seed) {
  if (n_space < 5)
    throw std::invalid_argument("simulate: need at least 5 sites for the neighborhood averages");
  if (T < 1) throw std::invalid_argument("simulate: T must be positive");
  if (burn_in < 0) throw std::invalid_argument("simulate: negative burn_in");
  const int total = T + burn_in;
  if (total < 3) throw std::invalid_argument("simulate: T + burn_in must be >= 3");

  Field x = Field::zeros({n_space}, total);
  Field d = Field::zeros({n_space}, total);
  Field mean = Field::zeros({n_space}, total);

  for (int t = 2; t < total; ++t) {
    for (int r = 0; r < n_space; ++r) {
      int dv = latent_from(x, r, t);
      double mu = std::abs(dv) < 4 ? static_cast<double>(dv) : 0.0;
      d.at(r, t) = dv;
      mean.at(r, t) = mu;
      x.at(r, t) = mu + gaussian_at(seed, t, r);
    }
  }

  SimOutput out{x.time_slice(burn_in, T), d.time_slice(burn_in, T),
                mean.time_slice(burn_in, T)};
  return out;
}

int latent_state(const Field& x, int r, int t) {
  if (t < 2 || t >= x.T())
    throw std::invalid_argument("latent_state: t needs two predecessors");
  if (r < 0 || r >= x.n_space())
    throw std::invalid_argument("latent_state: site out of range");
  if (x.ndims() != 1)
    throw std::invalid_argument("latent_state: defined for 1D fields");
  return latent_from(x, r, t);
}

double oracle_predict(const Field& x, int r, int t) {
  int d = latent_state(x, r, t);
  return std::abs(d) < 4 ? static_cast<double>(d) : 0.0;
}

}  // namespace licors

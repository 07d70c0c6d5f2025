// The benchmark lattice process: a conditionally Gaussian field in one space
// dimension driven by an integer latent state.
//
// On a ring of n_space sites (wrap-around indexing), the latent state is
//   d(r, t) = round( mean of X at the 5 nearest sites at t-2
//                    - mean of X at the 3 nearest sites at t-1 ),
// rounding halves away from zero, and the observation is
//   X(r, t) ~ N(d(r, t), 1)  when |d(r, t)| < 4,   N(0, 1) otherwise,
// with X(., 0) = X(., 1) = 0. Only the final T of burn_in + T generated
// steps are kept. Time indices in this API are 0-based; the latent rule
// needs two predecessors, so queries require t >= 2.
#pragma once

#include <cstdint>

#include "licors/field.hpp"

namespace licors {

struct SimOutput {
  Field x;                // observed field
  Field d;                // latent state (integer-valued, stored as f64)
  Field true_state_mean;  // conditional mean of x given d
};

// Deterministic given the seed: every (site, step) cell draws from its own
// counter-derived stream, so generation order and thread count cannot change
// the output. d and true_state_mean are 0 on kept steps whose predecessors
// were discarded with the burn-in (or are the zero initial steps).
SimOutput simulate(int n_space, int T, int burn_in, uint64_t seed);

// Latent-state rule evaluated on an observed field; t >= 2.
int latent_state(const Field& x, int r, int t);

// The conditional mean of X(r, t): d when |d| < 4, else 0.
double oracle_predict(const Field& x, int r, int t);

}  // namespace licors

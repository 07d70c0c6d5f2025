#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "licors/simulate.hpp"
#include "test_helpers.hpp"

using namespace licors;

namespace {

int wrap(int r, int n) { return ((r % n) + n) % n; }

// Standalone latent-state evaluation, written independently of the library.
int latent_oracle(const Field& x, int r, int t) {
  const int n = x.n_space();
  double sum5 = 0.0, sum3 = 0.0;
  for (int i = -2; i <= 2; ++i) sum5 += x.at(wrap(r + i, n), t - 2);
  for (int i = -1; i <= 1; ++i) sum3 += x.at(wrap(r + i, n), t - 1);
  double v = sum5 / 5.0 - sum3 / 3.0;
  double rounded = v >= 0 ? std::floor(v + 0.5) : std::ceil(v - 0.5);
  return static_cast<int>(rounded);
}

}  // namespace

TEST_CASE("output shapes match the requested dimensions") {
  SimOutput sim = simulate(100, 200, 100, 1);
  CHECK(sim.x.n_space() == 100);
  CHECK(sim.x.T() == 200);
  CHECK(sim.d.T() == 200);
  CHECK(sim.true_state_mean.T() == 200);
}

TEST_CASE("zero initial conditions give latent state 0 at the first update") {
  SimOutput sim = simulate(20, 10, 0, 5);
  for (int r = 0; r < 20; ++r) {
    CHECK(sim.x.at(r, 0) == 0.0);
    CHECK(sim.x.at(r, 1) == 0.0);
    CHECK(sim.d.at(r, 2) == 0.0);
  }
}

TEST_CASE("latent state is recomputable from the observed field") {
  SimOutput sim = simulate(60, 150, 50, 77);
  SplitMix64 rng(123);
  for (int probe = 0; probe < 1000; ++probe) {
    int r = static_cast<int>(rng.below(60));
    int t = 2 + static_cast<int>(rng.below(148));
    int expect = latent_oracle(sim.x, r, t);
    CHECK(latent_state(sim.x, r, t) == expect);
    CHECK(sim.d.at(r, t) == static_cast<double>(expect));
  }
}

TEST_CASE("forced neighborhood averages") {
  // 5-site average 1.0 at t-2, 3-site average 0.0 at t-1 -> d = 1.
  Field f = Field::zeros({9}, 3);
  for (int r = 0; r < 9; ++r) f.at(r, 0) = 1.0;
  CHECK(latent_state(f, 4, 2) == 1);

  // Identical constants -> 0.
  Field g = Field::zeros({9}, 3);
  for (int r = 0; r < 9; ++r) { g.at(r, 0) = 2.5; g.at(r, 1) = 2.5; }
  CHECK(latent_state(g, 4, 2) == 0);
}

TEST_CASE("modular indexing at the seam sites") {
  Field f = Field::zeros({7}, 3);
  for (int r = 0; r < 7; ++r) {
    f.at(r, 0) = 10.0 * r;
    f.at(r, 1) = r;
  }
  for (int r : {0, 1, 5, 6}) {
    CHECK(latent_state(f, r, 2) == latent_oracle(f, r, 2));
  }
}

TEST_CASE("oracle prediction follows the truncation rule") {
  // Push the 5-site average to 5.4 and keep t-1 at zero: d = 5 -> mean 0.
  Field f = Field::zeros({9}, 3);
  for (int r = 0; r < 9; ++r) f.at(r, 0) = 5.4;
  CHECK(latent_state(f, 4, 2) == 5);
  CHECK(oracle_predict(f, 4, 2) == 0.0);

  Field g = Field::zeros({9}, 3);
  for (int r = 0; r < 9; ++r) g.at(r, 0) = 2.0;
  CHECK(oracle_predict(g, 4, 2) == 2.0);
}

TEST_CASE("one-step error of the exact conditional mean is unit variance") {
  double sse = 0.0;
  int64_t n = 0;
  for (uint64_t seed = 0; seed < 3; ++seed) {
    SimOutput sim = simulate(100, 200, 100, 1000 + seed);
    for (int t = 2; t < sim.x.T(); ++t)
      for (int r = 0; r < 100; ++r) {
        double e = oracle_predict(sim.x, r, t) - sim.x.at(r, t);
        sse += e * e;
        ++n;
      }
  }
  CHECK(sse / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("exactly seven reachable conditional means") {
  std::set<double> means;
  for (uint64_t seed = 0; seed < 4; ++seed) {
    SimOutput sim = simulate(100, 500, 100, 40 + seed);
    for (int t = 2; t < sim.x.T(); ++t)
      for (int r = 0; r < 100; ++r) means.insert(sim.true_state_mean.at(r, t));
  }
  for (double m : means) {
    CHECK(m >= -3.0);
    CHECK(m <= 3.0);
    CHECK(m == std::round(m));
  }
  CHECK(means.size() == 7);
}

TEST_CASE("latent state commutes with circular shifts") {
  SimOutput sim = simulate(30, 60, 20, 9);
  const Field& x = sim.x;
  for (int shift : {1, 7, 19}) {
    Field shifted = Field::zeros({30}, 60);
    for (int r = 0; r < 30; ++r)
      for (int t = 0; t < 60; ++t) shifted.at(wrap(r + shift, 30), t) = x.at(r, t);
    for (int probe = 0; probe < 100; ++probe) {
      SplitMix64 rng(probe + 31 * shift);
      int r = static_cast<int>(rng.below(30));
      int t = 2 + static_cast<int>(rng.below(58));
      CHECK(latent_state(shifted, wrap(r + shift, 30), t) == latent_state(x, r, t));
    }
  }
}

TEST_CASE("burn-in discards steps without breaking the latent relation") {
  SimOutput sim = simulate(40, 80, 100, 13);
  for (int t = 2; t < 80; ++t)
    for (int r = 0; r < 40; r += 7)
      CHECK(sim.d.at(r, t) == latent_oracle(sim.x, r, t));
}

TEST_CASE("determinism and seed sensitivity") {
  SimOutput a = simulate(25, 50, 30, 202);
  SimOutput b = simulate(25, 50, 30, 202);
  SimOutput c = simulate(25, 50, 30, 203);
  CHECK(a.x.values() == b.x.values());
  CHECK(a.d.values() == b.d.values());
  CHECK(a.x.values() != c.x.values());
}

TEST_CASE("preconditions") {
  CHECK_THROWS(simulate(4, 100, 0, 1));
  SimOutput sim = simulate(10, 20, 5, 1);
  CHECK_THROWS(latent_state(sim.x, 0, 1));
  CHECK_THROWS(latent_state(sim.x, 0, 20));
}

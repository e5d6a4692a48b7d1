#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "smc/error.hpp"
#include "smc/simulation.hpp"

using namespace smc;

namespace {

std::size_t zero_crossings(const std::vector<double>& x) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < x.size(); ++t) n += (x[t - 1] < 0.0) != (x[t] < 0.0);
  return n;
}

double variance(const double* first, const double* last) {
  const double n = static_cast<double>(last - first);
  const double m = std::accumulate(first, last, 0.0) / n;
  double ss = 0.0;
  for (const double* p = first; p != last; ++p) ss += (*p - m) * (*p - m);
  return ss / n;
}

}  // namespace

TEST_CASE("ar2_coefficients: values and root check") {
  const auto c = ar2_coefficients(1.1, 10.0, 100.0);
  // 2 cos(pi / 5) / 1.1 = 1.470940...; the rounded reference value 1.47088 is only good to 1e-4.
  CHECK(c.phi1 == doctest::Approx(2.0 * std::cos(std::numbers::pi / 5.0) / 1.1).epsilon(1e-15));
  CHECK(std::fabs(c.phi1 - 1.47088) < 1e-4);
  CHECK(c.phi2 == doctest::Approx(-0.826446).epsilon(1e-6));
  CHECK(ar2_coefficients(1.3, 25.0, 100.0).phi1 == 0.0);

  for (double m : {1.01, 1.05, 1.1, 1.5, 3.0}) {
    for (double eta : {0.5, 2.0, 6.0, 10.0, 21.0, 40.0, 49.0}) {
      const auto k = ar2_coefficients(m, eta, 100.0);
      const auto [z1, z2] = oracle::ar2_roots(k.phi1, k.phi2);
      CHECK(std::abs(z1) == doctest::Approx(m).epsilon(1e-9));
      CHECK(std::abs(z2) == doctest::Approx(m).epsilon(1e-9));
      const double arg = 2.0 * std::numbers::pi * eta / 100.0;
      CHECK(std::fabs(std::fabs(std::arg(z1)) - arg) < 1e-9);
      CHECK(std::fabs(std::arg(z1) + std::arg(z2)) < 1e-9);
    }
  }
}

TEST_CASE("ar2_coefficients: errors") {
  try {
    ar2_coefficients(1.0, 10.0, 100.0);
    FAIL("expected NonCausal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonCausal);
  }
  CHECK_THROWS_AS(ar2_coefficients(1.1, 0.0, 100.0), Error);
  CHECK_THROWS_AS(ar2_coefficients(1.1, 50.0, 100.0), Error);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}

TEST_CASE("simulate_ar2: determinism and metadata") {
  const Ar2Params p{1.05, 10.0, 100.0, 1.0};
  const auto a = simulate_ar2(p, 500, 11);
  const auto b = simulate_ar2(p, 500, 11);
  const auto c = simulate_ar2(p, 500, 12);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK(a.size() == 500);
  CHECK(a.sampling_rate == 100.0);
}

TEST_CASE("simulate_ar2: faster oscillation for larger peak") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto slow = simulate_ar2({1.01, 2.0, 100.0, 1.0}, 1000, derive_seed(s, 0));
    const auto fast = simulate_ar2({1.01, 40.0, 100.0, 1.0}, 1000, derive_seed(s, 1));
    CHECK(zero_crossings(slow.samples) < zero_crossings(fast.samples));
  }
}

TEST_CASE("simulate_ar2: stationarity") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = simulate_ar2({1.05, 10.0, 100.0, 1.0}, 4000, derive_seed(99, s));
    const double* p = x.samples.data();
    const double ratio = variance(p, p + 2000) / variance(p + 2000, p + 4000);
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }
}

TEST_CASE("simulate_ar2: sharp peak at eta for M = 1.01") {
  int hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = simulate_ar2({1.01, 10.0, 100.0, 1.0}, 1000, derive_seed(5, s));
    const auto f = smoothed_periodogram(x, {100, 512});
    hits += std::fabs(f.grid[f.argmax()] - 0.10) <= 0.02;
  }
  CHECK(hits >= 95);
}

TEST_CASE("simulate_mixture: basis rows without noise reproduce latents") {
  MixtureDesign d;
  d.name = "basis";
  for (std::size_t j = 0; j < kLatentCount; ++j) {
    MixingRow r{};
    r[j] = 1.0;
    d.coefficients.push_back(r);
  }
  d.noise_sd = 0.0;
  d.length = 300;
  d.seed = 3;
  d.latent_mode = LatentMode::Shared;
  const auto corpus = simulate_mixture(d);
  REQUIRE(corpus.signals.size() == 5);
  // Shared latents come from substream 1 of the design seed, generated in order.
  Rng rng(derive_seed(3, 1));
  for (std::size_t j = 0; j < kLatentCount; ++j) {
    const auto z = simulate_ar2(d.latents[j], 300, rng);
    CHECK(corpus.signals[j].samples == z.samples);
  }
  // Combining two basis rows must equal the sum of the corresponding channels.
  MixtureDesign sum = d;
  sum.coefficients = {MixingRow{1, 1, 0, 0, 0}};
  const auto s = simulate_mixture(sum);
  for (std::size_t t = 0; t < 300; ++t) {
    CHECK(s.signals[0].samples[t] ==
          doctest::Approx(corpus.signals[0].samples[t] + corpus.signals[1].samples[t]).epsilon(1e-12));
  }
}

TEST_CASE("simulate_mixture: layout, truth and determinism") {
  auto d = builtin_design("design1");
  d.seed = 9;
  const auto a = simulate_mixture(d);
  CHECK(a.signals.size() == 50);
  CHECK(a.signals[0].size() == 1000);
  CHECK(a.signals[0].sampling_rate == 100.0);
  CHECK(a.signals[0].channel_id == "ch1");
  CHECK(a.truth.k() == 5);
  for (const auto& g : a.truth.groups()) CHECK(g.size() == 10);
  CHECK(a.truth[9] == 1);
  CHECK(a.truth[10] == 2);
  const auto b = simulate_mixture(d);
  for (std::size_t c = 0; c < 50; ++c) CHECK(a.signals[c].samples == b.signals[c].samples);
}

TEST_CASE("simulate_mixture: within-cluster spectra closer than between") {
  auto d = builtin_design("design1");
  d.seed = 21;
  const auto corpus = simulate_mixture(d);
  std::vector<SpectralDensity> f;
  for (const auto& s : corpus.signals) f.push_back(normalize_density(smoothed_periodogram(s, {100, 256})));
  double within = 0.0, between = 0.0;
  std::size_t nw = 0, nb = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = i + 1; j < f.size(); ++j) {
      const double t = tvd(f[i], f[j]);
      if (corpus.truth[i] == corpus.truth[j]) {
        within += t;
        ++nw;
      } else {
        between += t;
        ++nb;
      }
    }
  }
  CHECK(within / static_cast<double>(nw) < between / static_cast<double>(nb));
}

TEST_CASE("builtin designs") {
  const auto d1 = builtin_design("design1");
  CHECK(d1.cluster_count() == 5);
  CHECK(d1.replicates == 10);
  CHECK(d1.coefficients[0] == MixingRow{1, 2, 0, 0, 0});
  const auto d2 = builtin_design("design2");
  CHECK(d2.coefficients == d1.coefficients);
  CHECK(d2.replicates == 3);
  const auto d3 = builtin_design("design3");
  CHECK(d3.coefficients[0] == MixingRow{0.5, 1, 0, 0, 0});
  const auto d4 = builtin_design("design4");
  CHECK(d4.dirichlet_alpha.has_value());
  CHECK(d4.cluster_count() == 5);
  CHECK(builtin_designs().size() == 4);
  try {
    builtin_design("unknown");
    FAIL("expected UnknownDesign");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownDesign);
  }
}

TEST_CASE("dirichlet rows are on the simplex and vary with the seed") {
  auto d = builtin_design("design4");
  d.length = 200;
  d.seed = 1;
  const auto a = simulate_mixture(d);
  d.seed = 2;
  const auto b = simulate_mixture(d);
  REQUIRE(a.coefficients.size() == 5);
  for (const auto& row : a.coefficients) {
    double sum = 0.0;
    for (double v : row) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(a.coefficients != b.coefficients);
  CHECK(a.signals.size() == 15);
}

TEST_CASE("design validation") {
  MixtureDesign d;
  d.name = "bad";
  CHECK_THROWS_AS(d.validate(), Error);
  d.coefficients = {MixingRow{0, 0, 0, 0, 0}};
  CHECK_THROWS_AS(d.validate(), Error);
  d.coefficients = {MixingRow{1, 0, 0, 0, 0}};
  d.replicates = 0;
  CHECK_THROWS_AS(d.validate(), Error);
  d.replicates = 1;
  CHECK_NOTHROW(d.validate());
}

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "smc/dissimilarity.hpp"
#include "smc/spectral.hpp"

namespace smc {

struct Ar2Coefficients {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

// phi1 = 2 cos(2 pi eta / fs) / M, phi2 = -1 / M^2. Throws NonCausal for M <= 1.
Ar2Coefficients ar2_coefficients(double modulus, double peak_hz, double sampling_rate);

struct Ar2Params {
  double modulus = 1.01;
  double peak_hz = 10.0;
  double sampling_rate = 100.0;
  double innovation_sd = 1.0;
};

inline constexpr std::size_t kAr2BurnIn = 500;

// Independent substream seed for (seed, stream); splitmix64 finaliser.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

using Rng = std::mt19937_64;

Signal simulate_ar2(const Ar2Params& params, std::size_t length, std::uint64_t seed);
Signal simulate_ar2(const Ar2Params& params, std::size_t length, Rng& rng);

inline constexpr std::size_t kLatentCount = 5;
using MixingRow = std::array<double, kLatentCount>;

enum class LatentMode {
  Fresh,   // every channel mixes its own latent realisation
  Shared,  // one latent realisation for the whole corpus; channels differ only in noise
};

struct MixtureDesign {
  std::string name;
  std::vector<MixingRow> coefficients;
  std::array<Ar2Params, kLatentCount> latents{
      Ar2Params{1.01, 2.0}, Ar2Params{1.01, 6.0}, Ar2Params{1.01, 10.0},
      Ar2Params{1.01, 21.0}, Ar2Params{1.01, 40.0}};
  std::size_t replicates = 1;
  double noise_sd = 1.0;
  std::size_t length = 1000;
  std::uint64_t seed = 0;
  LatentMode latent_mode = LatentMode::Fresh;
  // When set, `rows` mixing rows are redrawn from a symmetric Dirichlet on every simulation.
  std::optional<double> dirichlet_alpha;
  std::size_t rows = 0;

  std::size_t cluster_count() const noexcept { return dirichlet_alpha ? rows : coefficients.size(); }
  void validate() const;
};

struct LabeledCorpus {
  std::vector<Signal> signals;
  Clustering truth;
  std::vector<MixingRow> coefficients;
};

// Channels are cluster-major: channel c belongs to row c / replicates.
LabeledCorpus simulate_mixture(const MixtureDesign& design);

std::vector<MixtureDesign> builtin_designs();
MixtureDesign builtin_design(const std::string& name);

}  // namespace smc

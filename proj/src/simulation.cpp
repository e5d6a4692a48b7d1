#include "smc/simulation.hpp"

#include <cmath>
#include <numbers>

#include "smc/error.hpp"

namespace smc {

Ar2Coefficients ar2_coefficients(double modulus, double peak_hz, double sampling_rate) {
  if (!(modulus > 1.0)) {
    throw Error(ErrorCode::NonCausal, "root modulus must exceed 1, got " + std::to_string(modulus));
  }
  if (!(sampling_rate > 0.0) || !(peak_hz > 0.0) || !(peak_hz < sampling_rate / 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "peak frequency must lie in (0, fs/2)");
  }
  const double angle = 2.0 * std::numbers::pi * peak_hz / sampling_rate;
  // cos(pi/2) is not exactly zero in floating point.
  const double c = (4.0 * peak_hz == sampling_rate) ? 0.0 : std::cos(angle);
  return {2.0 * c / modulus, -1.0 / (modulus * modulus)};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Signal simulate_ar2(const Ar2Params& params, std::size_t length, Rng& rng) {
  const auto phi = ar2_coefficients(params.modulus, params.peak_hz, params.sampling_rate);
  std::normal_distribution<double> innovation(0.0, params.innovation_sd);
  Signal out;
  out.sampling_rate = params.sampling_rate;
  out.samples.resize(length);
  double z1 = 0.0;
  double z2 = 0.0;
  for (std::size_t t = 0; t < kAr2BurnIn + length; ++t) {
    const double z = phi.phi1 * z1 + phi.phi2 * z2 + innovation(rng);
    z2 = z1;
    z1 = z;
    if (t >= kAr2BurnIn) out.samples[t - kAr2BurnIn] = z;
  }
  return out;
}

Signal simulate_ar2(const Ar2Params& params, std::size_t length, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_ar2(params, length, rng);
}

void MixtureDesign::validate() const {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "design needs at least one replicate");
  if (length < 4) throw Error(ErrorCode::InvalidArgument, "design length must be at least 4");
  if (!(noise_sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sd must be nonnegative");
  if (dirichlet_alpha) {
    if (!(*dirichlet_alpha > 0.0) || rows == 0) {
      throw Error(ErrorCode::InvalidArgument, "Dirichlet design needs alpha > 0 and rows >= 1");
    }
  } else {
    if (coefficients.empty()) throw Error(ErrorCode::InvalidArgument, "design needs at least one mixing row");
    for (const auto& row : coefficients) {
      bool any = false;
      for (const double e : row) any = any || e != 0.0;
      if (!any) throw Error(ErrorCode::InvalidArgument, "mixing row is all zeros");
    }
  }
  for (const auto& p : latents) ar2_coefficients(p.modulus, p.peak_hz, p.sampling_rate);
  for (const auto& p : latents) {
    if (p.sampling_rate != latents[0].sampling_rate) {
      throw Error(ErrorCode::InvalidArgument, "latents must share one sampling rate");
    }
  }
}

namespace {

// Stream layout inside one design seed.
constexpr std::uint64_t kRowStream = 0;
constexpr std::uint64_t kSharedLatentStream = 1;
constexpr std::uint64_t kChannelStreamBase = 16;

std::vector<MixingRow> draw_dirichlet_rows(double alpha, std::size_t rows, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kRowStream));
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<MixingRow> out(rows);
  for (auto& row : out) {
    double total = 0.0;
    while (!(total > 0.0)) {
      total = 0.0;
      for (double& e : row) {
        e = gamma(rng);
        total += e;
      }
    }
    for (double& e : row) e /= total;
  }
  return out;
}

std::array<Signal, kLatentCount> draw_latents(const MixtureDesign& design, Rng& rng) {
  std::array<Signal, kLatentCount> z;
  for (std::size_t j = 0; j < kLatentCount; ++j) z[j] = simulate_ar2(design.latents[j], design.length, rng);
  return z;
}

}  // namespace

LabeledCorpus simulate_mixture(const MixtureDesign& design) {
  design.validate();
  LabeledCorpus corpus;
  corpus.coefficients = design.dirichlet_alpha
                            ? draw_dirichlet_rows(*design.dirichlet_alpha, design.rows, design.seed)
                            : design.coefficients;
  const std::size_t k = corpus.coefficients.size();
  const double fs = design.latents[0].sampling_rate;

  std::array<Signal, kLatentCount> shared;
  if (design.latent_mode == LatentMode::Shared) {
    Rng rng(derive_seed(design.seed, kSharedLatentStream));
    shared = draw_latents(design, rng);
  }

  std::vector<int> labels;
  for (std::size_t row = 0; row < k; ++row) {
    for (std::size_t rep = 0; rep < design.replicates; ++rep) {
      const std::size_t channel = row * design.replicates + rep;
      Rng rng(derive_seed(design.seed, kChannelStreamBase + channel));
      std::array<Signal, kLatentCount> fresh;
      if (design.latent_mode == LatentMode::Fresh) fresh = draw_latents(design, rng);
      const auto& z = design.latent_mode == LatentMode::Fresh ? fresh : shared;

      Signal x;
      x.sampling_rate = fs;
      x.channel_id = "ch" + std::to_string(channel + 1);
      x.samples.assign(design.length, 0.0);
      const auto& e = corpus.coefficients[row];
      for (std::size_t j = 0; j < kLatentCount; ++j) {
        if (e[j] == 0.0) continue;
        for (std::size_t t = 0; t < design.length; ++t) x.samples[t] += e[j] * z[j].samples[t];
      }
      if (design.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, design.noise_sd);
        for (double& v : x.samples) v += noise(rng);
      }
      corpus.signals.push_back(std::move(x));
      labels.push_back(static_cast<int>(row) + 1);
    }
  }
  corpus.truth = Clustering::from_labels(labels);
  return corpus;
}

std::vector<MixtureDesign> builtin_designs() {
  const std::vector<MixingRow> integer_rows{
      {1, 2, 0, 0, 0}, {0, 1, 2, 0, 0}, {0, 0, 1, 1, 0}, {0, 0, 0, 1, 1}, {0, 0, 1, 2, 0}};
  const std::vector<MixingRow> fractional_rows{
      {0.5, 1, 0, 0, 0}, {0, 1, 0.5, 0, 0}, {0, 0, 0.5, 1, 0}, {0, 0, 0, 1, 0.5}, {0, 1, 0, 1, 0}};

  MixtureDesign d1;
  d1.name = "design1";
  d1.coefficients = integer_rows;
  d1.replicates = 10;

  MixtureDesign d2 = d1;
  d2.name = "design2";
  d2.replicates = 3;

  MixtureDesign d3;
  d3.name = "design3";
  d3.coefficients = fractional_rows;
  d3.replicates = 3;

  MixtureDesign d4;
  d4.name = "design4";
  d4.dirichlet_alpha = 0.2;
  d4.rows = 5;
  d4.replicates = 3;

  return {d1, d2, d3, d4};
}

MixtureDesign builtin_design(const std::string& name) {
  for (auto& d : builtin_designs()) {
    if (d.name == name) return d;
  }
  throw Error(ErrorCode::UnknownDesign, "no built-in design named '" + name + "'");
}

}  // namespace smc

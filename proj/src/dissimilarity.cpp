#include "smc/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "smc/error.hpp"

namespace smc {

namespace {

void require_same_grid(const SpectralDensity& f, const SpectralDensity& g) {
  if (!f.grid.matches(g.grid) || f.values.size() != g.values.size() || f.values.size() != f.grid.size()) {
    throw Error(ErrorCode::GridMismatch, "densities are evaluated on different grids");
  }
}

void require_normalized(const SpectralDensity& d) {
  if (!d.normalized || std::fabs(d.riemann_sum() - 1.0) > 1e-6) {
    throw Error(ErrorCode::NotNormalized, "TVD needs normalized densities");
  }
}

std::vector<double> floored(const SpectralDensity& d) {
  const double peak = *std::max_element(d.values.begin(), d.values.end());
  if (!(peak > 0.0)) throw Error(ErrorCode::DegenerateSpectrum, "density is identically zero");
  const double floor = kLogFloor * peak;
  std::vector<double> out(d.values);
  for (double& v : out) v = std::max(v, floor);
  return out;
}

double kl(const std::vector<double>& f, const std::vector<double>& g, double step) {
  double acc = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * std::log(f[k] / g[k]);
  return acc * step;
}

}  // namespace

double tvd(const SpectralDensity& f, const SpectralDensity& g) {
  require_same_grid(f, g);
  require_normalized(f);
  require_normalized(g);
  double overlap = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) overlap += std::min(f.values[k], g.values[k]);
  return std::clamp(1.0 - overlap * f.grid.step(), 0.0, 1.0);
}

double d_np(const SpectralDensity& f, const SpectralDensity& g) {
  require_same_grid(f, g);
  double acc = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double diff = f.values[k] - g.values[k];
    acc += diff * diff;
  }
  return std::sqrt(acc) / static_cast<double>(f.values.size());
}

double d_lnp(const SpectralDensity& f, const SpectralDensity& g) {
  require_same_grid(f, g);
  const auto lf = floored(f);
  const auto lg = floored(g);
  double acc = 0.0;
  for (std::size_t k = 0; k < lf.size(); ++k) {
    const double diff = std::log(lf[k]) - std::log(lg[k]);
    acc += diff * diff;
  }
  return std::sqrt(acc) / static_cast<double>(lf.size());
}

double d_skl(const SpectralDensity& f, const SpectralDensity& g) {
  require_same_grid(f, g);
  const auto lf = floored(f);
  const auto lg = floored(g);
  const double step = f.grid.step();
  // Summed in a fixed order so the result is exactly symmetric.
  const double a = kl(lf, lg, step);
  const double b = kl(lg, lf, step);
  return std::max(0.0, std::min(a, b) + std::max(a, b));
}

Measure parse_measure(std::string_view name) {
  if (name == "tvd" || name == "smc") return Measure::Tvd;
  if (name == "np") return Measure::Np;
  if (name == "lnp") return Measure::Lnp;
  if (name == "skl") return Measure::Skl;
  throw Error(ErrorCode::InvalidArgument, "unknown measure '" + std::string(name) + "'");
}

std::string_view to_string(Measure m) noexcept {
  switch (m) {
    case Measure::Tvd: return "tvd";
    case Measure::Np: return "np";
    case Measure::Lnp: return "lnp";
    case Measure::Skl: return "skl";
  }
  return "?";
}

double dissimilarity(Measure m, const SpectralDensity& f, const SpectralDensity& g) {
  switch (m) {
    case Measure::Tvd: return tvd(f, g);
    case Measure::Np: return d_np(f, g);
    case Measure::Lnp: return d_lnp(f, g);
    case Measure::Skl: return d_skl(f, g);
  }
  return 0.0;
}

DissimilarityMatrix::DissimilarityMatrix(std::size_t n, std::vector<double> row_major)
    : n_(n), entries_(std::move(row_major)) {
  if (entries_.size() != n * n) throw Error(ErrorCode::InvalidArgument, "matrix needs n*n entries");
  for (std::size_t i = 0; i < n; ++i) {
    if ((*this)(i, i) != 0.0) throw Error(ErrorCode::InvalidArgument, "dissimilarity diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((*this)(i, j) != (*this)(j, i)) throw Error(ErrorCode::InvalidArgument, "dissimilarity must be symmetric");
    }
  }
}

DissimilarityMatrix pairwise_matrix(std::span<const SpectralDensity> densities, Measure measure) {
  DissimilarityMatrix m(densities.size());
  for (std::size_t i = 0; i < densities.size(); ++i) {
    for (std::size_t j = i + 1; j < densities.size(); ++j) {
      m.set(i, j, dissimilarity(measure, densities[i], densities[j]));
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

Clustering Clustering::from_labels(std::span<const int> labels) {
  Clustering c;
  std::map<int, int> remap;
  c.assignment_.reserve(labels.size());
  for (const int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()) + 1);
    c.assignment_.push_back(it->second);
  }
  c.k_ = remap.size();
  return c;
}

Clustering Clustering::from_groups(std::span<const std::vector<std::size_t>> groups, std::size_t channel_count) {
  std::vector<int> labels(channel_count, 0);
  std::vector<bool> seen(channel_count, false);
  int label = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::InvalidArgument, "empty cluster");
    ++label;
    for (const std::size_t ch : g) {
      if (ch >= channel_count || seen[ch]) {
        throw Error(ErrorCode::InvalidArgument, "groups must partition the channel set");
      }
      seen[ch] = true;
      labels[ch] = label;
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::InvalidArgument, "groups must cover every channel");
  }
  return from_labels(labels);
}

std::vector<std::vector<std::size_t>> Clustering::groups() const {
  std::vector<std::vector<std::size_t>> out(k_);
  for (std::size_t ch = 0; ch < assignment_.size(); ++ch) {
    out[static_cast<std::size_t>(assignment_[ch] - 1)].push_back(ch);
  }
  return out;
}

bool same_partition(const Clustering& a, const Clustering& b) {
  return Clustering::from_labels(a.assignment()) == Clustering::from_labels(b.assignment());
}

double sim_index(const Clustering& truth, const Clustering& candidate) {
  if (truth.size() != candidate.size()) {
    throw Error(ErrorCode::LabelMismatch, "clusterings cover different channel sets");
  }
  if (truth.k() == 0) return 1.0;
  const auto truth_groups = truth.groups();
  const auto cand_groups = candidate.groups();
  // overlap[i][j] = |C_i & G_j|
  std::vector<std::vector<std::size_t>> overlap(truth.k(), std::vector<std::size_t>(candidate.k(), 0));
  for (std::size_t ch = 0; ch < truth.size(); ++ch) {
    ++overlap[static_cast<std::size_t>(truth[ch] - 1)][static_cast<std::size_t>(candidate[ch] - 1)];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < truth_groups.size(); ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < cand_groups.size(); ++j) {
      const double dice = 2.0 * static_cast<double>(overlap[i][j]) /
                          static_cast<double>(truth_groups[i].size() + cand_groups[j].size());
      best = std::max(best, dice);
    }
    total += best;
  }
  return total / static_cast<double>(truth_groups.size());
}

}  // namespace smc

#include "smc/merger.hpp"

#include <algorithm>
#include <numeric>

#include "smc/error.hpp"
#include "smc/parallel.hpp"

namespace smc {

MergeStrategy parse_strategy(std::string_view name) {
  if (name == "concatenate" || name == "concat") return MergeStrategy::Concatenate;
  if (name == "average" || name == "spectral_average") return MergeStrategy::SpectralAverage;
  throw Error(ErrorCode::InvalidArgument, "unknown merge strategy '" + std::string(name) + "'");
}

std::string_view to_string(MergeStrategy s) noexcept {
  return s == MergeStrategy::Concatenate ? "concatenate" : "average";
}

std::vector<double> MergeTrace::costs() const {
  std::vector<double> out(steps.size());
  for (const auto& s : steps) out[s.clusters_before - 2] = s.cost;
  return out;
}

namespace {

struct ActiveCluster {
  std::size_t id;
  std::vector<std::size_t> members;
  SpectralDensity density;
};

SpectralDensity weighted_mean(const ActiveCluster& a, const ActiveCluster& b) {
  const double na = static_cast<double>(a.members.size());
  const double nb = static_cast<double>(b.members.size());
  SpectralDensity out = a.density;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    out.values[k] = (na * a.density.values[k] + nb * b.density.values[k]) / (na + nb);
  }
  out.variance = 0.0;
  out.normalized = false;
  return normalize_density(out);
}

SpectralDensity concatenated_density(std::span<const Signal> signals, const std::vector<std::size_t>& members,
                                     const SmoothingConfig& cfg, const FrequencyGrid& grid) {
  Signal joined;
  joined.sampling_rate = signals[members.front()].sampling_rate;
  std::size_t total = 0;
  for (const auto m : members) total += signals[m].size();
  joined.samples.reserve(total);
  for (const auto m : members) {
    joined.samples.insert(joined.samples.end(), signals[m].samples.begin(), signals[m].samples.end());
  }
  return normalize_density(smoothed_periodogram(joined, cfg, grid));
}

}  // namespace

MergeTrace smc_cluster(std::span<const Signal> signals, const SmoothingConfig& cfg, MergeStrategy strategy) {
  const std::size_t n = signals.size();
  if (n < 2) throw Error(ErrorCode::TooFewChannels, "clustering needs at least two channels");
  for (const auto& s : signals) {
    validate_signal(s);
    if (s.sampling_rate != signals[0].sampling_rate) {
      throw Error(ErrorCode::InvalidArgument, "channels must share one sampling rate");
    }
    if (strategy == MergeStrategy::SpectralAverage && s.size() != signals[0].size()) {
      throw Error(ErrorCode::InvalidArgument, "spectral averaging needs equal-length channels");
    }
  }
  const auto grid = FrequencyGrid::uniform(cfg.grid_size);

  MergeTrace trace;
  trace.channel_count = n;
  trace.leaf_densities.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    trace.leaf_densities[c] = normalize_density(smoothed_periodogram(signals[c], cfg, grid));
  }

  std::vector<ActiveCluster> active;
  active.reserve(n);
  for (std::size_t c = 0; c < n; ++c) active.push_back({c, {c}, trace.leaf_densities[c]});

  // dist[i][j] for active positions i < j.
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = tvd(active[i].density, active[j].density);
  }

  for (std::size_t step = 0; step + 1 < n; ++step) {
    const std::size_t m = active.size();
    std::size_t bi = 0;
    std::size_t bj = 1;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (dist[i][j] < dist[bi][bj]) {
          bi = i;
          bj = j;
        }
      }
    }

    MergeStep record;
    record.clusters_before = m;
    record.first = active[bi].id;
    record.second = active[bj].id;
    record.cost = dist[bi][bj];
    record.members = active[bi].members;
    record.members.insert(record.members.end(), active[bj].members.begin(), active[bj].members.end());
    std::sort(record.members.begin(), record.members.end());
    record.density = strategy == MergeStrategy::SpectralAverage
                         ? weighted_mean(active[bi], active[bj])
                         : concatenated_density(signals, record.members, cfg, grid);

    ActiveCluster merged{n + step, record.members, record.density};
    trace.steps.push_back(std::move(record));

    // Drop bj then bi (bj > bi), append the new cluster last.
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(bj));
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(bi));
    for (auto& row : dist) {
      row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
      row.erase(row.begin() + static_cast<std::ptrdiff_t>(bi));
    }
    active.push_back(std::move(merged));
    const std::size_t last = active.size() - 1;
    for (auto& row : dist) row.push_back(0.0);
    dist.emplace_back(active.size(), 0.0);
    for (std::size_t i = 0; i < last; ++i) {
      dist[i][last] = dist[last][i] = tvd(active[i].density, active[last].density);
    }
  }
  return trace;
}

Clustering cut_trace(const MergeTrace& trace, std::size_t k) {
  const std::size_t n = trace.channel_count;
  if (k < 1 || k > n) {
    throw Error(ErrorCode::InvalidK, "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  for (const auto& step : trace.steps) {
    if (step.clusters_before <= k) break;
    const int target = labels[step.members.front()];
    for (const auto ch : step.members) labels[ch] = target;
  }
  return Clustering::from_labels(labels);
}

std::size_t select_k(std::span<const double> costs, double tau) {
  if (costs.empty()) throw Error(ErrorCode::InvalidArgument, "cost curve is empty");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  // Differences within rounding of tau count as equal to it.
  const double strict = tau - 1e-12;
  for (std::size_t k = 1; k < costs.size(); ++k) {
    if (costs[k - 1] - costs[k] < strict) return k;
  }
  return costs.size();
}

std::vector<double> mean_cost_curve(std::span<const std::vector<double>> curves) {
  if (curves.empty()) throw Error(ErrorCode::InvalidArgument, "no cost curves to average");
  std::vector<double> out(curves[0].size(), 0.0);
  for (const auto& c : curves) {
    if (c.size() != out.size()) throw Error(ErrorCode::InvalidArgument, "cost curves differ in length");
    for (std::size_t i = 0; i < c.size(); ++i) out[i] += c[i];
  }
  for (double& v : out) v /= static_cast<double>(curves.size());
  return out;
}

Clustering complete_linkage(const DissimilarityMatrix& matrix, std::size_t k) {
  const std::size_t n = matrix.size();
  if (k < 1 || k > n) {
    throw Error(ErrorCode::InvalidK, "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[i] = {i};
  std::vector<std::vector<double>> dist(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = matrix(i, j);
  }

  while (groups.size() > k) {
    const std::size_t m = groups.size();
    std::size_t bi = 0;
    std::size_t bj = 1;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        if (dist[i][j] < dist[bi][bj]) {
          bi = i;
          bj = j;
        }
      }
    }
    // Merged cluster takes position bi.
    for (std::size_t c = 0; c < m; ++c) dist[bi][c] = dist[c][bi] = std::max(dist[bi][c], dist[bj][c]);
    dist[bi][bi] = 0.0;
    groups[bi].insert(groups[bi].end(), groups[bj].begin(), groups[bj].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bj));
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(bj));
    for (auto& row : dist) row.erase(row.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return Clustering::from_groups(groups, n);
}

// ---------------------------------------------------------------------------
// Comparative benchmark

BenchmarkMethod parse_method(std::string_view name) {
  if (name == "smc" || name == "tvd") return BenchmarkMethod::SmcTvd;
  if (name == "np") return BenchmarkMethod::CompleteNp;
  if (name == "lnp") return BenchmarkMethod::CompleteLnp;
  if (name == "skl") return BenchmarkMethod::CompleteSkl;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + std::string(name) + "' (smc, np, lnp, skl)");
}

std::string_view to_string(BenchmarkMethod m) noexcept {
  switch (m) {
    case BenchmarkMethod::SmcTvd: return "smc";
    case BenchmarkMethod::CompleteNp: return "np";
    case BenchmarkMethod::CompleteLnp: return "lnp";
    case BenchmarkMethod::CompleteSkl: return "skl";
  }
  return "?";
}

namespace {

Measure linkage_measure(BenchmarkMethod m) {
  switch (m) {
    case BenchmarkMethod::CompleteNp: return Measure::Np;
    case BenchmarkMethod::CompleteLnp: return Measure::Lnp;
    case BenchmarkMethod::CompleteSkl: return Measure::Skl;
    case BenchmarkMethod::SmcTvd: break;
  }
  return Measure::Tvd;
}

double score_with_leaves(BenchmarkMethod method, const LabeledCorpus& draw, std::size_t k,
                         const SmoothingConfig& cfg, MergeStrategy strategy,
                         std::vector<SpectralDensity>& leaves) {
  if (draw.signals.size() < 2) {
    if (k != 1) throw Error(ErrorCode::InvalidK, "a single channel admits only k = 1");
    return sim_index(draw.truth, Clustering::from_labels(std::vector<int>(draw.signals.size(), 1)));
  }
  if (method == BenchmarkMethod::SmcTvd) {
    const auto trace = smc_cluster(draw.signals, cfg, strategy);
    if (leaves.empty()) leaves = trace.leaf_densities;
    return sim_index(draw.truth, cut_trace(trace, k));
  }
  if (leaves.empty()) {
    const auto grid = FrequencyGrid::uniform(cfg.grid_size);
    for (const auto& s : draw.signals) leaves.push_back(normalize_density(smoothed_periodogram(s, cfg, grid)));
  }
  return sim_index(draw.truth, complete_linkage(pairwise_matrix(leaves, linkage_measure(method)), k));
}

}  // namespace

double score_method(BenchmarkMethod method, const LabeledCorpus& draw, std::size_t k, const SmoothingConfig& cfg,
                    MergeStrategy strategy) {
  std::vector<SpectralDensity> leaves;
  return score_with_leaves(method, draw, k, cfg, strategy, leaves);
}

double BenchmarkResult::mean(BenchmarkMethod m) const {
  const auto it = sims.find(m);
  if (it == sims.end() || it->second.empty()) return 0.0;
  return std::accumulate(it->second.begin(), it->second.end(), 0.0) / static_cast<double>(it->second.size());
}

BenchmarkResult benchmark_compare(std::span<const LabeledCorpus> corpus, std::size_t k, const SmoothingConfig& cfg,
                                  std::span<const BenchmarkMethod> methods, MergeStrategy strategy) {
  std::vector<std::vector<double>> per_draw(corpus.size(), std::vector<double>(methods.size()));
  parallel_for(corpus.size(), [&](std::size_t d) {
    std::vector<SpectralDensity> leaves;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      per_draw[d][m] = score_with_leaves(methods[m], corpus[d], k, cfg, strategy, leaves);
    }
  });
  BenchmarkResult out;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    auto& v = out.sims[methods[m]];
    for (const auto& row : per_draw) v.push_back(row[m]);
  }
  return out;
}

}  // namespace smc

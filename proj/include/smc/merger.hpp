#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smc/dissimilarity.hpp"
#include "smc/simulation.hpp"
#include "smc/spectral.hpp"

namespace smc {

enum class MergeStrategy {
  Concatenate,       // smoothed periodogram of the concatenated member series
  SpectralAverage,   // member-count weighted mean of member densities
};

MergeStrategy parse_strategy(std::string_view name);
std::string_view to_string(MergeStrategy s) noexcept;

// Cluster ids: channels are 0..N-1, the cluster created by step s gets id N + s.
struct MergeStep {
  std::size_t clusters_before = 0;
  std::size_t first = 0;
  std::size_t second = 0;
  double cost = 0.0;
  std::vector<std::size_t> members;
  SpectralDensity density;
};

struct MergeTrace {
  std::size_t channel_count = 0;
  std::vector<SpectralDensity> leaf_densities;
  std::vector<MergeStep> steps;

  // c(K) for K = 1..N-1 stored at index K-1: the cost of the merge that left K clusters.
  std::vector<double> costs() const;
};

MergeTrace smc_cluster(std::span<const Signal> signals, const SmoothingConfig& cfg, MergeStrategy strategy);

// Partition present when exactly k clusters remained; labels 1..k ordered by smallest member.
Clustering cut_trace(const MergeTrace& trace, std::size_t k);

// Smallest K with c(K) - c(K+1) < tau; N-1 when none. costs[K-1] = c(K).
std::size_t select_k(std::span<const double> costs, double tau);

// Element-wise mean of equal-length cost curves.
std::vector<double> mean_cost_curve(std::span<const std::vector<double>> curves);

// Agglomerative clustering with maximum-distance linkage, cut at k clusters.
Clustering complete_linkage(const DissimilarityMatrix& matrix, std::size_t k);

enum class BenchmarkMethod { SmcTvd, CompleteNp, CompleteLnp, CompleteSkl };

BenchmarkMethod parse_method(std::string_view name);
std::string_view to_string(BenchmarkMethod m) noexcept;
inline constexpr BenchmarkMethod kAllMethods[] = {BenchmarkMethod::SmcTvd, BenchmarkMethod::CompleteNp,
                                                  BenchmarkMethod::CompleteLnp, BenchmarkMethod::CompleteSkl};

// Sim index of one method on one labelled draw, cut at k clusters.
double score_method(BenchmarkMethod method, const LabeledCorpus& draw, std::size_t k, const SmoothingConfig& cfg,
                    MergeStrategy strategy = MergeStrategy::Concatenate);

struct BenchmarkResult {
  std::map<BenchmarkMethod, std::vector<double>> sims;

  double mean(BenchmarkMethod m) const;
};

BenchmarkResult benchmark_compare(std::span<const LabeledCorpus> corpus, std::size_t k, const SmoothingConfig& cfg,
                                  std::span<const BenchmarkMethod> methods = kAllMethods,
                                  MergeStrategy strategy = MergeStrategy::Concatenate);

}  // namespace smc

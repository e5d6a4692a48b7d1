#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "smc/dissimilarity.hpp"
#include "smc/merger.hpp"
#include "smc/spectral.hpp"

namespace smc {

// epochs x channels x samples, stored epoch-major.
class EpochSet {
 public:
  EpochSet() = default;
  EpochSet(std::size_t epochs, std::size_t channels, std::size_t samples, double sampling_rate,
           std::vector<double> data, std::vector<std::string> channel_labels = {});

  std::size_t epoch_count() const noexcept { return epochs_; }
  std::size_t channel_count() const noexcept { return channels_; }
  std::size_t epoch_length() const noexcept { return samples_; }
  double sampling_rate() const noexcept { return sampling_rate_; }
  const std::vector<std::string>& channel_labels() const noexcept { return labels_; }

  std::span<const double> series(std::size_t epoch, std::size_t channel) const;
  std::vector<Signal> epoch_signals(std::size_t epoch) const;

  // Epochs [first, last) as a new set.
  EpochSet slice(std::size_t first, std::size_t last) const;
  // Least-squares linear trend removed from every epoch of every channel.
  EpochSet detrended() const;

 private:
  std::size_t epochs_ = 0;
  std::size_t channels_ = 0;
  std::size_t samples_ = 0;
  double sampling_rate_ = 1.0;
  std::vector<double> data_;
  std::vector<std::string> labels_;
};

// One trace per epoch; epochs run in parallel, results are order independent.
std::vector<MergeTrace> cluster_epochs(const EpochSet& es, const SmoothingConfig& cfg, MergeStrategy strategy);

struct AffinityMatrix {
  std::size_t size = 0;
  std::vector<double> entries;
  std::size_t epoch_count = 0;

  double operator()(std::size_t i, std::size_t j) const noexcept { return entries[i * size + j]; }
  double mean_off_diagonal() const noexcept;
};

AffinityMatrix affinity(std::span<const MergeTrace> traces, std::size_t k);

struct Phase {
  std::string name;
  std::size_t first = 1;  // 1-based, inclusive
  std::size_t last = 1;
};

struct PhaseSegmentation {
  std::vector<Phase> phases;

  // Throws InvalidArgument for empty, overlapping or out-of-range phases.
  void validate(std::size_t epoch_count) const;
  static PhaseSegmentation whole(std::size_t epoch_count);
};

struct RepresentativeClustering {
  Clustering clustering;
  // Per cluster (label - 1): every within-cluster affinity >= threshold.
  std::vector<bool> stable;
  std::vector<double> min_affinity;
};

RepresentativeClustering representative_clustering(const AffinityMatrix& am, std::size_t k,
                                                   double threshold = 0.5);

struct EpochSummary {
  std::size_t selected_k = 0;
  std::vector<double> mean_costs;
  AffinityMatrix affinity;
  RepresentativeClustering representative;
};

// Mean cost curve -> select_k -> affinity -> representative clustering.
// fixed_k = 0 selects K from the mean curve with threshold tau.
EpochSummary summarize_epochs(std::span<const MergeTrace> traces, double tau, std::size_t fixed_k = 0,
                              double threshold = 0.5);

struct PhaseSummary {
  Phase phase;
  EpochSummary summary;
};

std::vector<PhaseSummary> phase_compare(std::span<const MergeTrace> traces, const PhaseSegmentation& seg, double tau,
                                        std::size_t fixed_k = 0, double threshold = 0.5);
std::vector<PhaseSummary> phase_compare(const EpochSet& es, const PhaseSegmentation& seg, const SmoothingConfig& cfg,
                                        MergeStrategy strategy, double tau);

}  // namespace smc

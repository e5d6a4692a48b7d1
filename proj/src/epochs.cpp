#include "smc/epochs.hpp"

#include <algorithm>
#include <cmath>

#include "smc/error.hpp"
#include "smc/parallel.hpp"

namespace smc {

EpochSet::EpochSet(std::size_t epochs, std::size_t channels, std::size_t samples, double sampling_rate,
                   std::vector<double> data, std::vector<std::string> channel_labels)
    : epochs_(epochs),
      channels_(channels),
      samples_(samples),
      sampling_rate_(sampling_rate),
      data_(std::move(data)),
      labels_(std::move(channel_labels)) {
  if (epochs < 1) throw Error(ErrorCode::InvalidArgument, "epoch set needs at least one epoch");
  if (channels < 2) throw Error(ErrorCode::TooFewChannels, "epoch set needs at least two channels");
  if (samples < 4) throw Error(ErrorCode::InvalidArgument, "epochs need at least 4 samples");
  if (!(sampling_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling rate must be positive");
  if (data_.size() != epochs * channels * samples) {
    throw Error(ErrorCode::InvalidArgument, "epoch data size does not match its dimensions");
  }
  if (labels_.empty()) {
    for (std::size_t c = 0; c < channels; ++c) labels_.push_back("ch" + std::to_string(c + 1));
  } else if (labels_.size() != channels) {
    throw Error(ErrorCode::InvalidArgument, "one label per channel required");
  }
}

std::span<const double> EpochSet::series(std::size_t epoch, std::size_t channel) const {
  return {data_.data() + (epoch * channels_ + channel) * samples_, samples_};
}

std::vector<Signal> EpochSet::epoch_signals(std::size_t epoch) const {
  std::vector<Signal> out(channels_);
  for (std::size_t c = 0; c < channels_; ++c) {
    const auto s = series(epoch, c);
    out[c].samples.assign(s.begin(), s.end());
    out[c].sampling_rate = sampling_rate_;
    out[c].channel_id = labels_[c];
  }
  return out;
}

EpochSet EpochSet::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last > epochs_) throw Error(ErrorCode::InvalidArgument, "invalid epoch slice");
  const std::size_t stride = channels_ * samples_;
  std::vector<double> data(data_.begin() + static_cast<std::ptrdiff_t>(first * stride),
                           data_.begin() + static_cast<std::ptrdiff_t>(last * stride));
  return {last - first, channels_, samples_, sampling_rate_, std::move(data), labels_};
}

EpochSet EpochSet::detrended() const {
  EpochSet out = *this;
  const double n = static_cast<double>(samples_);
  const double t_mean = (n - 1.0) / 2.0;
  double t_var = 0.0;
  for (std::size_t t = 0; t < samples_; ++t) t_var += (static_cast<double>(t) - t_mean) * (static_cast<double>(t) - t_mean);
  for (std::size_t block = 0; block < epochs_ * channels_; ++block) {
    double* x = out.data_.data() + block * samples_;
    double mean = 0.0;
    for (std::size_t t = 0; t < samples_; ++t) mean += x[t];
    mean /= n;
    double cov = 0.0;
    for (std::size_t t = 0; t < samples_; ++t) cov += (static_cast<double>(t) - t_mean) * (x[t] - mean);
    const double slope = cov / t_var;
    for (std::size_t t = 0; t < samples_; ++t) x[t] -= mean + slope * (static_cast<double>(t) - t_mean);
  }
  return out;
}

std::vector<MergeTrace> cluster_epochs(const EpochSet& es, const SmoothingConfig& cfg, MergeStrategy strategy) {
  std::vector<MergeTrace> traces(es.epoch_count());
  parallel_for(es.epoch_count(), [&](std::size_t e) {
    const auto signals = es.epoch_signals(e);
    traces[e] = smc_cluster(signals, cfg, strategy);
  });
  return traces;
}

double AffinityMatrix::mean_off_diagonal() const noexcept {
  if (size < 2) return 1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) {
      if (i != j) acc += (*this)(i, j);
    }
  }
  return acc / static_cast<double>(size * (size - 1));
}

AffinityMatrix affinity(std::span<const MergeTrace> traces, std::size_t k) {
  if (traces.empty()) throw Error(ErrorCode::InvalidArgument, "affinity needs at least one trace");
  const std::size_t n = traces[0].channel_count;
  std::vector<std::size_t> together(n * n, 0);
  for (const auto& trace : traces) {
    if (trace.channel_count != n) throw Error(ErrorCode::InvalidArgument, "traces differ in channel count");
    const auto cut = cut_trace(trace, k);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (cut[i] == cut[j]) ++together[i * n + j];
      }
    }
  }
  AffinityMatrix am{n, std::vector<double>(n * n), traces.size()};
  for (std::size_t idx = 0; idx < n * n; ++idx) {
    am.entries[idx] = static_cast<double>(together[idx]) / static_cast<double>(traces.size());
  }
  return am;
}

void PhaseSegmentation::validate(std::size_t epoch_count) const {
  if (phases.empty()) throw Error(ErrorCode::InvalidArgument, "segmentation has no phases");
  std::vector<const Phase*> sorted;
  for (const auto& p : phases) {
    if (p.first < 1 || p.last < p.first || p.last > epoch_count) {
      throw Error(ErrorCode::InvalidArgument, "phase '" + p.name + "' range " + std::to_string(p.first) + "-" +
                                                  std::to_string(p.last) + " is empty or outside [1, " +
                                                  std::to_string(epoch_count) + "]");
    }
    sorted.push_back(&p);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Phase* a, const Phase* b) { return a->first < b->first; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->first <= sorted[i - 1]->last) {
      throw Error(ErrorCode::InvalidArgument, "phases '" + sorted[i - 1]->name + "' and '" + sorted[i]->name +
                                                  "' overlap");
    }
  }
}

PhaseSegmentation PhaseSegmentation::whole(std::size_t epoch_count) {
  return {{Phase{"all", 1, epoch_count}}};
}

RepresentativeClustering representative_clustering(const AffinityMatrix& am, std::size_t k, double threshold) {
  if (!(threshold > 0.0) || threshold > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "stability threshold must be in (0, 1]");
  }
  DissimilarityMatrix dis(am.size);
  for (std::size_t i = 0; i < am.size; ++i) {
    for (std::size_t j = i + 1; j < am.size; ++j) dis.set(i, j, 1.0 - am(i, j));
  }
  RepresentativeClustering out;
  out.clustering = complete_linkage(dis, k);
  for (const auto& members : out.clustering.groups()) {
    double lowest = 1.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) lowest = std::min(lowest, am(members[a], members[b]));
    }
    out.min_affinity.push_back(lowest);
    out.stable.push_back(lowest >= threshold);
  }
  return out;
}

EpochSummary summarize_epochs(std::span<const MergeTrace> traces, double tau, std::size_t fixed_k, double threshold) {
  if (traces.empty()) throw Error(ErrorCode::InvalidArgument, "no epochs to summarize");
  std::vector<std::vector<double>> curves;
  curves.reserve(traces.size());
  for (const auto& t : traces) curves.push_back(t.costs());
  EpochSummary s;
  s.mean_costs = mean_cost_curve(curves);
  s.selected_k = fixed_k > 0 ? fixed_k : select_k(s.mean_costs, tau);
  s.affinity = affinity(traces, s.selected_k);
  s.representative = representative_clustering(s.affinity, s.selected_k, threshold);
  return s;
}

std::vector<PhaseSummary> phase_compare(std::span<const MergeTrace> traces, const PhaseSegmentation& seg, double tau,
                                        std::size_t fixed_k, double threshold) {
  seg.validate(traces.size());
  std::vector<PhaseSummary> out;
  for (const auto& p : seg.phases) {
    out.push_back({p, summarize_epochs(traces.subspan(p.first - 1, p.last - p.first + 1), tau, fixed_k, threshold)});
  }
  return out;
}

std::vector<PhaseSummary> phase_compare(const EpochSet& es, const PhaseSegmentation& seg, const SmoothingConfig& cfg,
                                        MergeStrategy strategy, double tau) {
  seg.validate(es.epoch_count());
  const auto traces = cluster_epochs(es, cfg, strategy);
  return phase_compare(traces, seg, tau);
}

}  // namespace smc

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smc/spectral.hpp"

namespace smc {

// 1 - sum_k min(f_k, g_k) dw, clamped to [0, 1]. Both inputs must be normalized.
double tvd(const SpectralDensity& f, const SpectralDensity& g);
// (1/n) sqrt(sum_k (f_k - g_k)^2)
double d_np(const SpectralDensity& f, const SpectralDensity& g);
// (1/n) sqrt(sum_k (log f_k - log g_k)^2), after flooring each density.
double d_lnp(const SpectralDensity& f, const SpectralDensity& g);
// KL(f, g) + KL(g, f) as Riemann sums, after flooring each density.
double d_skl(const SpectralDensity& f, const SpectralDensity& g);

// Relative floor applied before taking logarithms.
inline constexpr double kLogFloor = 1e-12;

enum class Measure { Tvd, Np, Lnp, Skl };

Measure parse_measure(std::string_view name);
std::string_view to_string(Measure m) noexcept;
double dissimilarity(Measure m, const SpectralDensity& f, const SpectralDensity& g);

// Dense symmetric matrix with zero diagonal.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  explicit DissimilarityMatrix(std::size_t n) : n_(n), entries_(n * n, 0.0) {}
  // Validates symmetry (exact) and the zero diagonal.
  DissimilarityMatrix(std::size_t n, std::vector<double> row_major);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    entries_[i * n_ + j] = v;
    entries_[j * n_ + i] = v;
  }
  const std::vector<double>& entries() const noexcept { return entries_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> entries_;
};

DissimilarityMatrix pairwise_matrix(std::span<const SpectralDensity> densities, Measure measure);

// Channel -> cluster assignment with contiguous labels 1..k.
class Clustering {
 public:
  Clustering() = default;
  // Relabels arbitrary integer labels to 1..k in order of first appearance.
  static Clustering from_labels(std::span<const int> labels);
  static Clustering from_groups(std::span<const std::vector<std::size_t>> groups, std::size_t channel_count);

  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t k() const noexcept { return k_; }
  int operator[](std::size_t channel) const noexcept { return assignment_[channel]; }
  const std::vector<int>& assignment() const noexcept { return assignment_; }
  // Member channels of each cluster, indexed by label - 1, ascending.
  std::vector<std::vector<std::size_t>> groups() const;

  bool operator==(const Clustering&) const = default;

 private:
  std::vector<int> assignment_;
  std::size_t k_ = 0;
};

// Same partition regardless of labels.
bool same_partition(const Clustering& a, const Clustering& b);

// (1/g) sum_i max_j 2 |G_j & C_i| / (|G_j| + |C_i|), C = truth groups, G = candidate groups.
double sim_index(const Clustering& truth, const Clustering& candidate);

}  // namespace smc

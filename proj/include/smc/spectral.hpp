#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smc {

// A single real-valued channel sampled at a fixed rate.
struct Signal {
  std::vector<double> samples;
  double sampling_rate = 1.0;
  std::string channel_id;

  std::size_t size() const noexcept { return samples.size(); }
};

// Throws InvalidSignal unless length >= 4, every sample is finite and fs > 0.
void validate_signal(const Signal& signal);

// Biased (divisor T), mean-centred sample autocovariance for lags 0..max_lag.
struct AutocovarianceSeq {
  std::vector<double> values;
  std::size_t series_length = 0;
};

AutocovarianceSeq autocovariance(const Signal& signal, std::size_t max_lag);

// Cross-covariance gamma_xy(h) = (1/T) sum_t (x_t - xbar)(y_{t+h} - ybar), h = 0..max_lag.
// Negative lags are obtained by swapping the arguments.
std::vector<double> cross_covariance(const Signal& x, const Signal& y, std::size_t max_lag);

// Uniformly spaced frequencies in cycles per sample, all inside [0, 0.5].
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  FrequencyGrid(double first, double step, std::size_t size);

  // Midpoints of `cells` equal cells partitioning [0, 0.5]; at least 8 cells.
  static FrequencyGrid uniform(std::size_t cells);
  // Fundamental Fourier frequencies k/T for k = 1..floor((T-1)/2).
  static FrequencyGrid fourier(std::size_t series_length);

  double operator[](std::size_t k) const noexcept { return first_ + step_ * static_cast<double>(k); }
  std::size_t size() const noexcept { return size_; }
  double step() const noexcept { return step_; }
  double first() const noexcept { return first_; }
  std::vector<double> points() const;

  // Same points within 1e-12 relative tolerance.
  bool matches(const FrequencyGrid& other) const noexcept;

 private:
  double first_ = 0.0;
  double step_ = 0.0;
  std::size_t size_ = 0;
};

struct SpectralDensity {
  FrequencyGrid grid;
  std::vector<double> values;
  bool normalized = false;
  // gamma_hat(0) of the series the estimate came from; 0 when unknown.
  double variance = 0.0;

  // Sum of values times grid spacing.
  double riemann_sum() const noexcept;
  std::size_t argmax() const noexcept;
};

struct SmoothingConfig {
  std::size_t bandwidth = 100;
  std::size_t grid_size = 512;
};

enum class LagWindow { Parzen, Rectangular };

double parzen_weight(double u) noexcept;
double lag_weight(LagWindow window, double u) noexcept;

// Raw periodogram at the Fourier frequencies of the mean-centred signal; not normalized.
SpectralDensity periodogram(const Signal& signal);

// (2 pi)^-1 sum_{|h|<=a} w(h/a) gamma(|h|) cos(2 pi omega h) evaluated on `grid`,
// negative values clipped to zero.
SpectralDensity lag_window_estimate(const AutocovarianceSeq& acov, std::size_t bandwidth,
                                    const FrequencyGrid& grid,
                                    LagWindow window = LagWindow::Parzen);

// Parzen-smoothed periodogram on FrequencyGrid::uniform(cfg.grid_size).
SpectralDensity smoothed_periodogram(const Signal& signal, const SmoothingConfig& cfg);
SpectralDensity smoothed_periodogram(const Signal& signal, const SmoothingConfig& cfg,
                                     const FrequencyGrid& grid);

// Divide by the sample variance and rescale so the Riemann sum is exactly one.
SpectralDensity normalize_density(const SpectralDensity& density);

// Gamma-deviance GCV score of the Parzen lag-window estimate with bandwidth a.
double gcv_score(const Signal& signal, std::size_t bandwidth);
// Argmin of gcv_score over the candidates; ties go to the larger bandwidth.
std::size_t gcv_select_bandwidth(const Signal& signal, std::span<const std::size_t> candidates);

// Analytic AR(2) spectrum with unit innovation variance.
SpectralDensity ar2_spectrum(double modulus, double peak_hz, double sampling_rate,
                             const FrequencyGrid& grid);

struct CoherenceCurve {
  FrequencyGrid grid;
  std::vector<double> values;

  double mean() const noexcept;
};

// |f_xy|^2 / (f_xx f_yy) from Parzen-smoothed auto- and cross-covariances, clipped to [0,1].
CoherenceCurve squared_coherence(const Signal& x, const Signal& y, const SmoothingConfig& cfg);

struct FrequencyBand {
  std::string_view name;
  double low_hz;
  double high_hz;
};

inline constexpr std::array<FrequencyBand, 5> kFrequencyBands{{
    {"delta", 0.0, 4.0},
    {"theta", 4.0, 8.0},
    {"alpha", 8.0, 12.0},
    {"beta", 12.0, 30.0},
    {"gamma", 30.0, 50.0},
}};

}  // namespace smc

#include "smc/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

#include "smc/error.hpp"
#include "smc/simulation.hpp"

namespace smc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::vector<double> centred(std::span<const double> x) {
  const double m = mean_of(x);
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v -= m;
  return out;
}

// Lagged products of two centred series with divisor T.
std::vector<double> lagged_products(std::span<const double> a, std::span<const double> b,
                                    std::size_t max_lag) {
  const std::size_t t_len = a.size();
  std::vector<double> out(max_lag + 1, 0.0);
  for (std::size_t h = 0; h <= max_lag; ++h) {
    double acc = 0.0;
    for (std::size_t t = 0; t + h < t_len; ++t) acc += a[t] * b[t + h];
    out[h] = acc / static_cast<double>(t_len);
  }
  return out;
}

// fftw planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace

void validate_signal(const Signal& signal) {
  if (signal.samples.size() < 4) {
    throw Error(ErrorCode::InvalidSignal, "signal '" + signal.channel_id + "' has fewer than 4 samples");
  }
  if (!(signal.sampling_rate > 0.0) || !std::isfinite(signal.sampling_rate)) {
    throw Error(ErrorCode::InvalidSignal, "sampling rate must be positive");
  }
  for (std::size_t t = 0; t < signal.samples.size(); ++t) {
    if (!std::isfinite(signal.samples[t])) {
      throw Error(ErrorCode::InvalidSignal,
                  "non-finite sample at index " + std::to_string(t) + " of '" + signal.channel_id + "'");
    }
  }
}

AutocovarianceSeq autocovariance(const Signal& signal, std::size_t max_lag) {
  validate_signal(signal);
  if (max_lag >= signal.size()) {
    throw Error(ErrorCode::InvalidLag, "max lag " + std::to_string(max_lag) +
                                           " must be below series length " + std::to_string(signal.size()));
  }
  const auto x = centred(signal.samples);
  return {lagged_products(x, x, max_lag), signal.size()};
}

std::vector<double> cross_covariance(const Signal& x, const Signal& y, std::size_t max_lag) {
  validate_signal(x);
  validate_signal(y);
  if (x.size() != y.size()) {
    throw Error(ErrorCode::InvalidSignal, "cross covariance needs equal lengths");
  }
  if (max_lag >= x.size()) {
    throw Error(ErrorCode::InvalidLag, "max lag must be below series length");
  }
  return lagged_products(centred(x.samples), centred(y.samples), max_lag);
}

// ---------------------------------------------------------------------------
// FrequencyGrid

FrequencyGrid::FrequencyGrid(double first, double step, std::size_t size)
    : first_(first), step_(step), size_(size) {
  if (size == 0 || !(step > 0.0) || first < 0.0 || first + step * static_cast<double>(size - 1) > 0.5 + 1e-12) {
    throw Error(ErrorCode::InvalidGrid, "grid must be a nonempty increasing set of points in [0, 0.5]");
  }
}

FrequencyGrid FrequencyGrid::uniform(std::size_t cells) {
  if (cells < 8) throw Error(ErrorCode::InvalidGrid, "a uniform grid needs at least 8 points");
  const double step = 0.5 / static_cast<double>(cells);
  return {0.5 * step, step, cells};
}

FrequencyGrid FrequencyGrid::fourier(std::size_t series_length) {
  if (series_length < 4) throw Error(ErrorCode::InvalidGrid, "Fourier grid needs T >= 4");
  const double step = 1.0 / static_cast<double>(series_length);
  return {step, step, (series_length - 1) / 2};
}

std::vector<double> FrequencyGrid::points() const {
  std::vector<double> out(size_);
  for (std::size_t k = 0; k < size_; ++k) out[k] = (*this)[k];
  return out;
}

bool FrequencyGrid::matches(const FrequencyGrid& other) const noexcept {
  if (size_ != other.size_) return false;
  const auto close = [](double a, double b) {
    return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)});
  };
  return close(step_, other.step_) && close(first_, other.first_);
}

double SpectralDensity::riemann_sum() const noexcept {
  return std::accumulate(values.begin(), values.end(), 0.0) * grid.step();
}

std::size_t SpectralDensity::argmax() const noexcept {
  return static_cast<std::size_t>(std::distance(values.begin(), std::max_element(values.begin(), values.end())));
}

// ---------------------------------------------------------------------------
// Estimators

double parzen_weight(double u) noexcept {
  const double a = std::fabs(u);
  if (a < 0.5) return 1.0 - 6.0 * a * a + 6.0 * a * a * a;
  if (a <= 1.0) {
    const double r = 1.0 - a;
    return 2.0 * r * r * r;
  }
  return 0.0;
}

double lag_weight(LagWindow window, double u) noexcept {
  switch (window) {
    case LagWindow::Parzen: return parzen_weight(u);
    case LagWindow::Rectangular: return std::fabs(u) <= 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

SpectralDensity periodogram(const Signal& signal) {
  validate_signal(signal);
  const std::size_t t_len = signal.size();
  const auto grid = FrequencyGrid::fourier(t_len);
  const auto x = centred(signal.samples);

  const std::size_t bins = t_len / 2 + 1;
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(t_len));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(bins));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(t_len), in.get(), out.get(), FFTW_ESTIMATE);
  }
  std::copy(x.begin(), x.end(), in.get());
  fftw_execute(plan);

  SpectralDensity d{grid, std::vector<double>(grid.size()), false, 0.0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double re = out.get()[k + 1][0];
    const double im = out.get()[k + 1][1];
    d.values[k] = (re * re + im * im) / static_cast<double>(t_len);
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  d.variance = std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / static_cast<double>(t_len);
  return d;
}

SpectralDensity lag_window_estimate(const AutocovarianceSeq& acov, std::size_t bandwidth,
                                    const FrequencyGrid& grid, LagWindow window) {
  if (bandwidth == 0 || bandwidth >= acov.series_length) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth " + std::to_string(bandwidth) +
                                                 " must be in [1, T) with T = " + std::to_string(acov.series_length));
  }
  if (acov.values.size() < bandwidth + 1) {
    throw Error(ErrorCode::InvalidLag, "autocovariance holds fewer lags than the bandwidth");
  }
  const double a = static_cast<double>(bandwidth);
  std::vector<double> tapered(bandwidth + 1);
  for (std::size_t h = 0; h <= bandwidth; ++h) {
    tapered[h] = lag_weight(window, static_cast<double>(h) / a) * acov.values[h];
  }

  SpectralDensity d{grid, std::vector<double>(grid.size()), false, acov.values[0]};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double omega = grid[k];
    double acc = tapered[0];
    for (std::size_t h = 1; h <= bandwidth; ++h) {
      acc += 2.0 * tapered[h] * std::cos(kTwoPi * omega * static_cast<double>(h));
    }
    d.values[k] = std::max(0.0, acc / kTwoPi);
  }
  return d;
}

SpectralDensity smoothed_periodogram(const Signal& signal, const SmoothingConfig& cfg,
                                     const FrequencyGrid& grid) {
  validate_signal(signal);
  if (cfg.bandwidth == 0 || cfg.bandwidth >= signal.size()) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth " + std::to_string(cfg.bandwidth) +
                                                 " must be in [1, T) with T = " + std::to_string(signal.size()));
  }
  return lag_window_estimate(autocovariance(signal, cfg.bandwidth), cfg.bandwidth, grid);
}

SpectralDensity smoothed_periodogram(const Signal& signal, const SmoothingConfig& cfg) {
  return smoothed_periodogram(signal, cfg, FrequencyGrid::uniform(cfg.grid_size));
}

SpectralDensity normalize_density(const SpectralDensity& density) {
  const double total = density.riemann_sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::DegenerateSpectrum, "cannot normalize a density with zero mass");
  }
  SpectralDensity out = density;
  const double scale = density.variance > 0.0 ? density.variance : 1.0;
  for (double& v : out.values) v /= scale;
  // The one-sided discretisation leaves a constant factor; fold it in.
  const double scaled_total = out.riemann_sum();
  for (double& v : out.values) v /= scaled_total;
  out.normalized = true;
  return out;
}

// ---------------------------------------------------------------------------
// Bandwidth selection

double gcv_score(const Signal& signal, std::size_t bandwidth) {
  validate_signal(signal);
  const std::size_t t_len = signal.size();
  if (bandwidth == 0 || bandwidth >= t_len) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth must be in [1, T)");
  }
  const auto raw = periodogram(signal);
  const double a = static_cast<double>(bandwidth);
  double weight_sum = 0.0;
  for (std::size_t h = 0; h <= bandwidth; ++h) {
    weight_sum += (h == 0 ? 1.0 : 2.0) * parzen_weight(static_cast<double>(h) / a);
  }
  const double trace_fraction = weight_sum / static_cast<double>(t_len);
  if (trace_fraction >= 1.0) {
    throw Error(ErrorCode::InvalidBandwidth, "smoother trace reaches the number of frequencies");
  }

  // The periodogram carries no 1/(2 pi); compare on the same scale.
  auto smooth = lag_window_estimate(autocovariance(signal, bandwidth), bandwidth, raw.grid);
  double deviance = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < raw.values.size(); ++k) {
    const double i_k = raw.values[k];
    if (!(i_k > 0.0)) continue;
    const double f_k = smooth.values[k] * kTwoPi;
    if (!(f_k > 0.0)) return std::numeric_limits<double>::infinity();
    const double ratio = i_k / f_k;
    deviance += ratio - std::log(ratio) - 1.0;
    ++used;
  }
  if (used == 0) throw Error(ErrorCode::DegenerateSpectrum, "all periodogram ordinates are zero");
  const double n = static_cast<double>(raw.values.size());
  const double penalty = 1.0 - trace_fraction;
  return (deviance / n) / (penalty * penalty);
}

std::size_t gcv_select_bandwidth(const Signal& signal, std::span<const std::size_t> candidates) {
  if (candidates.empty()) throw Error(ErrorCode::InvalidBandwidth, "no bandwidth candidates");
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  bool have = false;
  for (const std::size_t a : candidates) {
    const double s = gcv_score(signal, a);
    if (!have || s < best_score || (s == best_score && a > best)) {
      best = a;
      best_score = s;
      have = true;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

SpectralDensity ar2_spectrum(double modulus, double peak_hz, double sampling_rate,
                             const FrequencyGrid& grid) {
  const auto phi = ar2_coefficients(modulus, peak_hz, sampling_rate);
  SpectralDensity d{grid, std::vector<double>(grid.size()), false, 0.0};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = kTwoPi * grid[k];
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = std::polar(1.0, -2.0 * w);
    d.values[k] = 1.0 / std::norm(1.0 - phi.phi1 * z1 - phi.phi2 * z2);
  }
  return d;
}

double CoherenceCurve::mean() const noexcept {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

CoherenceCurve squared_coherence(const Signal& x, const Signal& y, const SmoothingConfig& cfg) {
  validate_signal(x);
  validate_signal(y);
  if (x.size() != y.size() || x.sampling_rate != y.sampling_rate) {
    throw Error(ErrorCode::InvalidSignal, "coherence needs equal lengths and sampling rates");
  }
  const std::size_t a = cfg.bandwidth;
  if (a == 0 || a >= x.size()) throw Error(ErrorCode::InvalidBandwidth, "bandwidth must be in [1, T)");

  const auto xc = centred(x.samples);
  const auto yc = centred(y.samples);
  const auto gxx = lagged_products(xc, xc, a);
  const auto gyy = lagged_products(yc, yc, a);
  const auto gxy = lagged_products(xc, yc, a);  // E[x_t y_{t+h}]
  const auto gyx = lagged_products(yc, xc, a);  // E[y_t x_{t+h}]

  const auto grid = FrequencyGrid::uniform(cfg.grid_size);
  CoherenceCurve out{grid, std::vector<double>(grid.size())};
  const double ad = static_cast<double>(a);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double omega = grid[k];
    double fxx = gxx[0];
    double fyy = gyy[0];
    double re = gxy[0];
    double im = 0.0;
    for (std::size_t h = 1; h <= a; ++h) {
      const double w = parzen_weight(static_cast<double>(h) / ad);
      const double c = std::cos(kTwoPi * omega * static_cast<double>(h));
      const double s = std::sin(kTwoPi * omega * static_cast<double>(h));
      fxx += 2.0 * w * gxx[h] * c;
      fyy += 2.0 * w * gyy[h] * c;
      re += w * (gxy[h] + gyx[h]) * c;
      im += w * (gxy[h] - gyx[h]) * s;
    }
    const double floor = 1e-14 * std::max(gxx[0], gyy[0]);
    if (!(fxx > floor) || !(fyy > floor)) {
      throw Error(ErrorCode::DegenerateSpectrum, "auto-spectrum vanishes at frequency " + std::to_string(omega));
    }
    out.values[k] = std::clamp((re * re + im * im) / (fxx * fyy), 0.0, 1.0);
  }
  return out;
}

}  // namespace smc

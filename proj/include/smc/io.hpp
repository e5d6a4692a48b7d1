#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "smc/dissimilarity.hpp"
#include "smc/epochs.hpp"
#include "smc/merger.hpp"
#include "smc/spectral.hpp"

namespace smc::io {

// 17 significant digits; parses back to the same double.
std::string format_double(double v);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Rows are time samples, columns are channels, the header row holds channel labels.
struct SignalTable {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns[0].size(); }
};

std::string format_signal_csv(const SignalTable& table);
SignalTable parse_signal_csv(const std::string& text, const std::string& source = "<input>");
SignalTable read_signal_csv(const std::filesystem::path& path);

// Sidecar for a signal CSV. The CSV holds epoch_count blocks of epoch_length rows.
struct Manifest {
  double sampling_rate = 0.0;
  std::size_t epoch_length = 0;
  std::size_t epoch_count = 1;
  std::vector<Phase> phases;
  std::optional<std::vector<int>> truth;
  std::string design;
  std::optional<std::uint64_t> seed;
};

std::string format_manifest(const Manifest& m);
Manifest parse_manifest(const std::string& text, const std::string& source = "<manifest>");
Manifest read_manifest(const std::filesystem::path& path);

// A dataset directory holds signals.csv and manifest.json.
struct Dataset {
  Manifest manifest;
  EpochSet epochs;
};

inline constexpr const char* kSignalsFile = "signals.csv";
inline constexpr const char* kManifestFile = "manifest.json";

Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const std::filesystem::path& dir, const Manifest& manifest, const SignalTable& table);

// Builds the epoch set described by a manifest; FormatError when the rows do not divide into epochs.
EpochSet to_epoch_set(const SignalTable& table, const Manifest& manifest);

// --- analytic outputs -------------------------------------------------------

std::string format_costs_csv(const std::vector<double>& costs);
std::vector<double> parse_costs_csv(const std::string& text);

// Trace rows without densities; members joined with ';'.
std::string format_trace_csv(const MergeTrace& trace);
MergeTrace parse_trace_csv(const std::string& text);

std::string format_clustering_csv(const Clustering& c, const std::vector<std::string>& labels);
Clustering parse_clustering_csv(const std::string& text);

std::string format_matrix_csv(const std::vector<double>& entries, std::size_t n,
                              const std::vector<std::string>& labels);
std::vector<double> parse_matrix_csv(const std::string& text, std::size_t* n = nullptr);

std::string format_stability_csv(const RepresentativeClustering& rc);

std::string format_spectrum_csv(const SpectralDensity& d, double sampling_rate);

// Comma-separated list of integers, e.g. "20,50,100".
std::vector<std::size_t> parse_size_list(const std::string& text);
// "1-50,51-110,111-160" or "early=1-50,late=51-100".
std::vector<Phase> parse_phases(const std::string& text);

}  // namespace smc::io

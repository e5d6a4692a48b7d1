#include "smc/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include <unistd.h>

#include "json.hpp"
#include "smc/error.hpp"

namespace smc::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into place at " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

struct Cell {
  std::string_view text;
  std::size_t line;
  std::size_t column;
};

// Splits CSV text into rows of cells, tracking 1-based line/column. No quoting.
std::vector<std::vector<Cell>> split_csv(std::string_view text) {
  std::vector<std::vector<Cell>> rows;
  std::size_t line = 1;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(pos, end - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (!row.empty()) {
      std::vector<Cell> cells;
      std::size_t start = 0;
      while (true) {
        const std::size_t comma = row.find(',', start);
        const std::size_t stop = comma == std::string_view::npos ? row.size() : comma;
        cells.push_back({row.substr(start, stop - start), line, start + 1});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      rows.push_back(std::move(cells));
    }
    pos = end + 1;
    ++line;
  }
  return rows;
}

[[noreturn]] void format_error(const std::string& source, const Cell& c, const std::string& what) {
  throw Error(ErrorCode::FormatError,
              source + ":" + std::to_string(c.line) + ":" + std::to_string(c.column) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double to_double(const Cell& c, const std::string& source) {
  const auto s = trim(c.text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    format_error(source, c, "expected a number, got '" + std::string(c.text) + "'");
  }
  return v;
}

long long to_integer(const Cell& c, const std::string& source) {
  const auto s = trim(c.text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    format_error(source, c, "expected an integer, got '" + std::string(c.text) + "'");
  }
  return v;
}

void expect_columns(const std::vector<Cell>& row, std::size_t n, const std::string& source) {
  if (row.size() != n) {
    format_error(source, row.back(),
                 "expected " + std::to_string(n) + " fields, found " + std::to_string(row.size()));
  }
}

template <typename T>
T field(const json& j, const char* name, const std::string& source) {
  if (!j.contains(name)) throw Error(ErrorCode::FormatError, source + ": missing required field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::FormatError, source + ": field '" + std::string(name) + "' has the wrong type");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string format_signal_csv(const SignalTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.labels.size(); ++c) {
    if (c) out += ',';
    out += table.labels[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(table.columns[c][r]);
    }
    out += '\n';
  }
  return out;
}

SignalTable parse_signal_csv(const std::string& text, const std::string& source) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw Error(ErrorCode::FormatError, source + ": empty signal file");
  SignalTable t;
  for (const auto& c : rows[0]) {
    const auto label = trim(c.text);
    if (label.empty()) format_error(source, c, "empty channel label");
    t.labels.emplace_back(label);
  }
  t.columns.assign(t.labels.size(), {});
  for (auto& col : t.columns) col.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_columns(rows[r], t.labels.size(), source);
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.columns[c].push_back(to_double(rows[r][c], source));
  }
  return t;
}

SignalTable read_signal_csv(const fs::path& path) { return parse_signal_csv(read_file(path), path.string()); }

std::string format_manifest(const Manifest& m) {
  json j;
  j["sampling_rate"] = m.sampling_rate;
  j["epoch_length"] = m.epoch_length;
  j["epochs"] = m.epoch_count;
  if (!m.design.empty()) j["design"] = m.design;
  if (m.seed) j["seed"] = *m.seed;
  if (m.truth) j["truth"] = *m.truth;
  if (!m.phases.empty()) {
    json phases = json::array();
    for (const auto& p : m.phases) phases.push_back({{"name", p.name}, {"first", p.first}, {"last", p.last}});
    j["phases"] = phases;
  }
  return j.dump(2) + "\n";
}

Manifest parse_manifest(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, source + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::FormatError, source + ": manifest must be a JSON object");
  Manifest m;
  m.sampling_rate = field<double>(j, "sampling_rate", source);
  if (!(m.sampling_rate > 0.0)) throw Error(ErrorCode::FormatError, source + ": sampling_rate must be positive");
  if (j.contains("epoch_length")) m.epoch_length = field<std::size_t>(j, "epoch_length", source);
  if (j.contains("epochs")) m.epoch_count = field<std::size_t>(j, "epochs", source);
  if (j.contains("design")) m.design = field<std::string>(j, "design", source);
  if (j.contains("seed")) m.seed = field<std::uint64_t>(j, "seed", source);
  if (j.contains("truth")) m.truth = field<std::vector<int>>(j, "truth", source);
  if (j.contains("phases")) {
    for (const auto& p : j.at("phases")) {
      m.phases.push_back({field<std::string>(p, "name", source), field<std::size_t>(p, "first", source),
                          field<std::size_t>(p, "last", source)});
    }
  }
  return m;
}

Manifest read_manifest(const fs::path& path) { return parse_manifest(read_file(path), path.string()); }

EpochSet to_epoch_set(const SignalTable& table, const Manifest& manifest) {
  const std::size_t rows = table.rows();
  const std::size_t len = manifest.epoch_length == 0 ? rows : manifest.epoch_length;
  if (len == 0 || rows % len != 0) {
    throw Error(ErrorCode::FormatError, std::to_string(rows) + " rows do not split into epochs of length " +
                                            std::to_string(len));
  }
  const std::size_t epochs = rows / len;
  if (manifest.epoch_count != 0 && manifest.epoch_count != epochs && manifest.epoch_length != 0) {
    throw Error(ErrorCode::FormatError, "manifest declares " + std::to_string(manifest.epoch_count) +
                                            " epochs but the data holds " + std::to_string(epochs));
  }
  const std::size_t channels = table.columns.size();
  if (manifest.truth && manifest.truth->size() != channels) {
    throw Error(ErrorCode::FormatError, "truth labels do not match the channel count");
  }
  std::vector<double> data(epochs * channels * len);
  for (std::size_t e = 0; e < epochs; ++e) {
    for (std::size_t c = 0; c < channels; ++c) {
      std::copy_n(table.columns[c].begin() + static_cast<std::ptrdiff_t>(e * len), len,
                  data.begin() + static_cast<std::ptrdiff_t>((e * channels + c) * len));
    }
  }
  return {epochs, channels, len, manifest.sampling_rate, std::move(data), table.labels};
}

Dataset load_dataset(const fs::path& dir) {
  const auto manifest = read_manifest(dir / kManifestFile);
  const auto table = read_signal_csv(dir / kSignalsFile);
  return {manifest, to_epoch_set(table, manifest)};
}

void save_dataset(const fs::path& dir, const Manifest& manifest, const SignalTable& table) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());
  write_file_atomic(dir / kSignalsFile, format_signal_csv(table));
  write_file_atomic(dir / kManifestFile, format_manifest(manifest));
}

// ---------------------------------------------------------------------------

std::string format_costs_csv(const std::vector<double>& costs) {
  std::string out = "k,cost\n";
  for (std::size_t i = 0; i < costs.size(); ++i) out += std::to_string(i + 1) + "," + format_double(costs[i]) + "\n";
  return out;
}

std::vector<double> parse_costs_csv(const std::string& text) {
  const std::string source = "costs.csv";
  const auto rows = split_csv(text);
  std::vector<double> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_columns(rows[r], 2, source);
    if (to_integer(rows[r][0], source) != static_cast<long long>(r)) format_error(source, rows[r][0], "k out of order");
    out.push_back(to_double(rows[r][1], source));
  }
  return out;
}

std::string format_trace_csv(const MergeTrace& trace) {
  std::string out = "step,clusters_before,first,second,cost,members\n";
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    const auto& st = trace.steps[s];
    out += std::to_string(s + 1) + "," + std::to_string(st.clusters_before) + "," + std::to_string(st.first) + "," +
           std::to_string(st.second) + "," + format_double(st.cost) + ",";
    for (std::size_t i = 0; i < st.members.size(); ++i) {
      if (i) out += ';';
      out += std::to_string(st.members[i]);
    }
    out += '\n';
  }
  return out;
}

MergeTrace parse_trace_csv(const std::string& text) {
  const std::string source = "trace.csv";
  const auto rows = split_csv(text);
  MergeTrace t;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_columns(rows[r], 6, source);
    MergeStep st;
    st.clusters_before = static_cast<std::size_t>(to_integer(rows[r][1], source));
    st.first = static_cast<std::size_t>(to_integer(rows[r][2], source));
    st.second = static_cast<std::size_t>(to_integer(rows[r][3], source));
    st.cost = to_double(rows[r][4], source);
    std::string_view members = rows[r][5].text;
    std::size_t start = 0;
    while (start <= members.size()) {
      const std::size_t semi = members.find(';', start);
      const std::size_t stop = semi == std::string_view::npos ? members.size() : semi;
      const Cell c{members.substr(start, stop - start), rows[r][5].line, rows[r][5].column + start};
      st.members.push_back(static_cast<std::size_t>(to_integer(c, source)));
      if (semi == std::string_view::npos) break;
      start = semi + 1;
    }
    t.steps.push_back(std::move(st));
  }
  t.channel_count = t.steps.size() + 1;
  return t;
}

std::string format_clustering_csv(const Clustering& c, const std::vector<std::string>& labels) {
  std::string out = "channel,label,cluster\n";
  for (std::size_t ch = 0; ch < c.size(); ++ch) {
    out += std::to_string(ch + 1) + "," + (ch < labels.size() ? labels[ch] : "ch" + std::to_string(ch + 1)) + "," +
           std::to_string(c[ch]) + "\n";
  }
  return out;
}

Clustering parse_clustering_csv(const std::string& text) {
  const std::string source = "clustering.csv";
  const auto rows = split_csv(text);
  std::vector<int> labels;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_columns(rows[r], 3, source);
    labels.push_back(static_cast<int>(to_integer(rows[r][2], source)));
  }
  return Clustering::from_labels(labels);
}

std::string format_matrix_csv(const std::vector<double>& entries, std::size_t n, const std::vector<std::string>& labels) {
  std::string out = "channel";
  for (std::size_t j = 0; j < n; ++j) out += "," + (j < labels.size() ? labels[j] : "ch" + std::to_string(j + 1));
  out += '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out += i < labels.size() ? labels[i] : "ch" + std::to_string(i + 1);
    for (std::size_t j = 0; j < n; ++j) out += "," + format_double(entries[i * n + j]);
    out += '\n';
  }
  return out;
}

std::vector<double> parse_matrix_csv(const std::string& text, std::size_t* n_out) {
  const std::string source = "matrix.csv";
  const auto rows = split_csv(text);
  if (rows.empty()) throw Error(ErrorCode::FormatError, source + ": empty matrix file");
  const std::size_t n = rows[0].size() - 1;
  if (rows.size() != n + 1) throw Error(ErrorCode::FormatError, source + ": matrix is not square");
  std::vector<double> out;
  out.reserve(n * n);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    expect_columns(rows[r], n + 1, source);
    for (std::size_t c = 1; c <= n; ++c) out.push_back(to_double(rows[r][c], source));
  }
  if (n_out) *n_out = n;
  return out;
}

std::string format_stability_csv(const RepresentativeClustering& rc) {
  std::string out = "cluster,size,min_affinity,stable\n";
  const auto groups = rc.clustering.groups();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out += std::to_string(g + 1) + "," + std::to_string(groups[g].size()) + "," + format_double(rc.min_affinity[g]) +
           "," + (rc.stable[g] ? "1" : "0") + "\n";
  }
  return out;
}

std::string format_spectrum_csv(const SpectralDensity& d, double sampling_rate) {
  std::string out = "frequency,frequency_hz,value\n";
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    out += format_double(d.grid[k]) + "," + format_double(d.grid[k] * sampling_rate) + "," +
           format_double(d.values[k]) + "\n";
  }
  return out;
}

namespace {

// Command-line lists are arguments, not data files.
template <typename Fn>
auto as_argument_error(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::FormatError) throw;
    throw Error(ErrorCode::InvalidArgument, std::string(e.what()).substr(std::string("FormatError: ").size()));
  }
}

std::vector<std::size_t> size_list(const std::string& text) {
  std::vector<std::size_t> out;
  const std::string source = "list";
  for (const auto& row : split_csv(text)) {
    for (const auto& c : row) {
      const long long v = to_integer(c, source);
      if (v <= 0) format_error(source, c, "values must be positive");
      out.push_back(static_cast<std::size_t>(v));
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty list");
  return out;
}

std::vector<Phase> phase_list(const std::string& text) {
  std::vector<Phase> out;
  const std::string source = "phases";
  const auto rows = split_csv(text);
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty phase list");
  for (const auto& c : rows[0]) {
    std::string_view item = trim(c.text);
    std::string name = "phase" + std::to_string(out.size() + 1);
    if (const auto eq = item.find('='); eq != std::string_view::npos) {
      name = std::string(item.substr(0, eq));
      item.remove_prefix(eq + 1);
    }
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) format_error(source, c, "expected a range like 1-50");
    const Cell lo{item.substr(0, dash), c.line, c.column};
    const Cell hi{item.substr(dash + 1), c.line, c.column + dash + 1};
    const long long first = to_integer(lo, source);
    const long long last = to_integer(hi, source);
    if (first < 1 || last < first) format_error(source, c, "empty or invalid phase range");
    out.push_back({name, static_cast<std::size_t>(first), static_cast<std::size_t>(last)});
  }
  return out;
}

}  // namespace

std::vector<std::size_t> parse_size_list(const std::string& text) {
  return as_argument_error([&] { return size_list(text); });
}

std::vector<Phase> parse_phases(const std::string& text) {
  return as_argument_error([&] { return phase_list(text); });
}

}  // namespace smc::io

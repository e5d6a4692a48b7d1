#include <filesystem>
#include <random>

#include "doctest.h"
#include "smc/error.hpp"
#include "smc/io.hpp"

using namespace smc;
namespace fs = std::filesystem;

namespace {

std::string error_text(auto&& fn, ErrorCode expected) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.code() == expected);
    return e.what();
  }
  FAIL("no error thrown");
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("smc_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double v = n(rng) * std::pow(10.0, (i % 40) - 20);
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("signal csv round trip") {
  io::SignalTable t{{"Fz", "Cz", "Pz"}, {{1.5, -2.25, 1e-300}, {0.1, 0.2, 0.3}, {3, 4, 5}}};
  const auto text = io::format_signal_csv(t);
  CHECK(text.substr(0, 9) == "Fz,Cz,Pz\n");
  const auto back = io::parse_signal_csv(text);
  CHECK(back.labels == t.labels);
  CHECK(back.columns == t.columns);
  CHECK(io::format_signal_csv(back) == text);
}

TEST_CASE("signal csv errors carry line and column") {
  const auto msg = error_text([] { io::parse_signal_csv("a,b\n1,2\n3,x\n", "sig.csv"); }, ErrorCode::FormatError);
  CHECK(msg.find("sig.csv:3:3") != std::string::npos);
  const auto ragged = error_text([] { io::parse_signal_csv("a,b\n1,2\n3\n", "sig.csv"); }, ErrorCode::FormatError);
  CHECK(ragged.find("sig.csv:3:") != std::string::npos);
  error_text([] { io::parse_signal_csv(""); }, ErrorCode::FormatError);
  // Windows line endings and blank trailing lines are accepted.
  CHECK(io::parse_signal_csv("a,b\r\n1,2\r\n\n").rows() == 1);
}

TEST_CASE("manifest round trip and required fields") {
  io::Manifest m;
  m.sampling_rate = 250.0;
  m.epoch_length = 500;
  m.epoch_count = 3;
  m.truth = std::vector<int>{1, 1, 2};
  m.design = "design2";
  m.seed = 12345678901234ull;
  m.phases = {Phase{"early", 1, 2}, Phase{"late", 3, 3}};
  const auto text = io::format_manifest(m);
  const auto back = io::parse_manifest(text);
  CHECK(back.sampling_rate == 250.0);
  CHECK(back.epoch_length == 500);
  CHECK(back.epoch_count == 3);
  CHECK(back.truth == m.truth);
  CHECK(back.design == "design2");
  CHECK(back.seed == m.seed);
  REQUIRE(back.phases.size() == 2);
  CHECK(back.phases[1].name == "late");
  CHECK(io::format_manifest(back) == text);

  const auto missing = error_text([] { io::parse_manifest(R"({"epoch_length": 10})"); }, ErrorCode::FormatError);
  CHECK(missing.find("sampling_rate") != std::string::npos);
  error_text([] { io::parse_manifest(R"({"sampling_rate": "fast"})"); }, ErrorCode::FormatError);
  error_text([] { io::parse_manifest("{not json"); }, ErrorCode::FormatError);
  error_text([] { io::parse_manifest(R"({"sampling_rate": -1})"); }, ErrorCode::FormatError);
}

TEST_CASE("epoch set from table and manifest") {
  io::SignalTable t{{"a", "b"}, {{0, 1, 2, 3, 4, 5, 6, 7}, {10, 11, 12, 13, 14, 15, 16, 17}}};
  io::Manifest m;
  m.sampling_rate = 10.0;
  m.epoch_length = 4;
  m.epoch_count = 2;
  const auto es = io::to_epoch_set(t, m);
  CHECK(es.epoch_count() == 2);
  CHECK(es.series(1, 1)[0] == 14.0);
  CHECK(es.channel_labels() == std::vector<std::string>{"a", "b"});

  m.epoch_length = 3;
  error_text([&] { io::to_epoch_set(t, m); }, ErrorCode::FormatError);
  m.epoch_length = 4;
  m.epoch_count = 3;
  error_text([&] { io::to_epoch_set(t, m); }, ErrorCode::FormatError);
  m.epoch_count = 2;
  m.truth = std::vector<int>{1};
  error_text([&] { io::to_epoch_set(t, m); }, ErrorCode::FormatError);
}

TEST_CASE("dataset directory round trip") {
  const auto dir = scratch_dir("dataset");
  io::SignalTable t{{"x", "y"}, {{1, 2, 3, 4, 5, 6}, {6, 5, 4, 3, 2, 1}}};
  io::Manifest m;
  m.sampling_rate = 2.0;
  m.epoch_length = 6;
  io::save_dataset(dir, m, t);
  const auto ds = io::load_dataset(dir);
  CHECK(ds.manifest.sampling_rate == 2.0);
  CHECK(ds.epochs.epoch_signals(0)[1].samples == t.columns[1]);
  error_text([&] { io::load_dataset(dir / "missing"); }, ErrorCode::IoError);
  fs::remove_all(dir);
}

TEST_CASE("atomic writes leave no temporary files") {
  const auto dir = scratch_dir("atomic");
  io::write_file_atomic(dir / "out.txt", "first\n");
  io::write_file_atomic(dir / "out.txt", "second\n");
  CHECK(io::read_file(dir / "out.txt") == "second\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  fs::remove_all(dir);
}

TEST_CASE("analytic outputs round trip") {
  const std::vector<double> costs{0.9, 0.5, 0.123456789012345678};
  const auto ctext = io::format_costs_csv(costs);
  CHECK(ctext.substr(0, 7) == "k,cost\n");
  CHECK(io::parse_costs_csv(ctext) == costs);

  auto d = builtin_design("design2");
  d.length = 300;
  d.seed = 4;
  const auto corpus = simulate_mixture(d);
  const auto trace = smc_cluster(corpus.signals, {50, 128}, MergeStrategy::Concatenate);
  const auto ttext = io::format_trace_csv(trace);
  const auto tback = io::parse_trace_csv(ttext);
  CHECK(tback.channel_count == trace.channel_count);
  REQUIRE(tback.steps.size() == trace.steps.size());
  for (std::size_t s = 0; s < trace.steps.size(); ++s) {
    CHECK(tback.steps[s].first == trace.steps[s].first);
    CHECK(tback.steps[s].second == trace.steps[s].second);
    CHECK(tback.steps[s].cost == trace.steps[s].cost);
    CHECK(tback.steps[s].members == trace.steps[s].members);
  }
  CHECK(io::format_trace_csv(tback) == ttext);
  for (std::size_t k = 1; k <= trace.channel_count; ++k) CHECK(cut_trace(tback, k) == cut_trace(trace, k));

  const auto c = cut_trace(trace, 5);
  const auto cl = io::format_clustering_csv(c, {});
  CHECK(io::parse_clustering_csv(cl) == c);

  const std::vector<double> m{1.0, 0.25, 0.25, 1.0};
  std::size_t n = 0;
  const auto mtext = io::format_matrix_csv(m, 2, {"a", "b"});
  CHECK(mtext == "channel,a,b\na,1,0.25\nb,0.25,1\n");
  CHECK(io::parse_matrix_csv(mtext, &n) == m);
  CHECK(n == 2);
  error_text([] { io::parse_matrix_csv("channel,a,b\na,1,0\n"); }, ErrorCode::FormatError);
}

TEST_CASE("stability and spectrum exports") {
  RepresentativeClustering rc{Clustering::from_labels(std::vector<int>{1, 1, 2}), {true, false}, {0.75, 1.0}};
  CHECK(io::format_stability_csv(rc) == "cluster,size,min_affinity,stable\n1,2,0.75,1\n2,1,1,0\n");
  const SpectralDensity f{FrequencyGrid(0.125, 0.25, 2), {2, 2}, true, 1.0};
  CHECK(io::format_spectrum_csv(f, 100.0) == "frequency,frequency_hz,value\n0.125,12.5,2\n0.375,37.5,2\n");
}

TEST_CASE("argument lists") {
  CHECK(io::parse_size_list("20,50, 100") == std::vector<std::size_t>{20, 50, 100});
  error_text([] { io::parse_size_list("20,abc"); }, ErrorCode::InvalidArgument);
  error_text([] { io::parse_size_list("0"); }, ErrorCode::InvalidArgument);
  error_text([] { io::parse_size_list(""); }, ErrorCode::InvalidArgument);

  const auto p = io::parse_phases("1-50,51-110,late=111-160");
  REQUIRE(p.size() == 3);
  CHECK(p[0].name == "phase1");
  CHECK(p[1].first == 51);
  CHECK(p[2].name == "late");
  CHECK(p[2].last == 160);
  error_text([] { io::parse_phases("1-50,77"); }, ErrorCode::InvalidArgument);
  error_text([] { io::parse_phases("9-3"); }, ErrorCode::InvalidArgument);
}

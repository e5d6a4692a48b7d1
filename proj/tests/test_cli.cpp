#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "smc/cli.hpp"
#include "smc/io.hpp"

using namespace smc;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "smc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("smc_test_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(io::read_file(p)); }

void write_dataset(const fs::path& dir, const std::vector<Signal>& signals, std::size_t epoch_length = 0) {
  io::SignalTable t;
  for (const auto& s : signals) {
    t.labels.push_back(s.channel_id.empty() ? "c" + std::to_string(t.labels.size() + 1) : s.channel_id);
    t.columns.push_back(s.samples);
  }
  io::Manifest m;
  m.sampling_rate = signals[0].sampling_rate;
  m.epoch_length = epoch_length == 0 ? signals[0].size() : epoch_length;
  m.epoch_count = signals[0].size() / m.epoch_length;
  io::save_dataset(dir, m, t);
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kUsageError);
  CHECK(run({"frobnicate"}).code == cli::kUsageError);
  CHECK(run({"--help"}).code == cli::kSuccess);
  CHECK(run({"simulate", "--design", "design1"}).code == cli::kUsageError);
  const auto r = run({"simulate", "--design", "nope", "--out", scratch("nope").string()});
  CHECK(r.code == cli::kUsageError);
  CHECK(r.err.find("UnknownDesign") != std::string::npos);
}

TEST_CASE("simulate writes a labelled dataset deterministically") {
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  REQUIRE(run({"simulate", "--design", "design1", "--seed", "7", "--out", a.string()}).code == 0);
  REQUIRE(run({"simulate", "--design", "design1", "--seed", "7", "--out", b.string()}).code == 0);
  CHECK(io::read_file(a / "signals.csv") == io::read_file(b / "signals.csv"));
  CHECK(io::read_file(a / "manifest.json") == io::read_file(b / "manifest.json"));
  const auto ds = io::load_dataset(a);
  CHECK(ds.epochs.channel_count() == 50);
  CHECK(ds.epochs.epoch_length() == 1000);
  CHECK(ds.epochs.epoch_count() == 1);
  CHECK(ds.manifest.sampling_rate == 100.0);
  REQUIRE(ds.manifest.truth.has_value());
  CHECK(ds.manifest.truth->size() == 50);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("simulate from a design file") {
  const auto dir = scratch("design_file");
  fs::create_directories(dir);
  io::write_file_atomic(dir / "d.json",
                        R"({"name": "tiny", "coefficients": [[1,0,0,0,0],[0,0,0,0,1]], "replicates": 2,
                            "length": 256, "modulus": 1.05})");
  REQUIRE(run({"simulate", "--design-file", (dir / "d.json").string(), "--draws", "3", "--out",
               (dir / "data").string()})
              .code == 0);
  const auto ds = io::load_dataset(dir / "data");
  CHECK(ds.epochs.channel_count() == 4);
  CHECK(ds.epochs.epoch_count() == 3);
  CHECK(ds.manifest.design == "tiny");
  io::write_file_atomic(dir / "bad.json", R"({"coefficients": [[1,0]]})");
  CHECK(run({"simulate", "--design-file", (dir / "bad.json").string(), "--out", (dir / "x").string()}).code ==
        cli::kDataError);
  fs::remove_all(dir);
}

TEST_CASE("cluster recovers design1 at k = 5") {
  const auto dir = scratch("cluster");
  REQUIRE(run({"simulate", "--design", "design1", "--seed", "3", "--out", (dir / "data").string()}).code == 0);
  const auto r = run({"cluster", "--input", (dir / "data").string(), "--k", "5", "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  const auto summary = read_json(dir / "out" / "summary.json");
  CHECK(summary["k"] == 5);
  CHECK(summary["sim"].get<double>() >= 0.9);
  const auto costs = io::parse_costs_csv(io::read_file(dir / "out" / "costs.csv"));
  CHECK(costs.size() == 49);
  CHECK(io::parse_clustering_csv(io::read_file(dir / "out" / "clustering.csv")).k() == 5);
  CHECK(io::parse_trace_csv(io::read_file(dir / "out" / "trace.csv")).steps.size() == 49);
  fs::remove_all(dir);
}

TEST_CASE("cluster on two channels") {
  const auto dir = scratch("two");
  auto x = simulate_ar2({1.05, 10.0, 100.0, 1.0}, 400, 1);
  auto y = simulate_ar2({1.05, 30.0, 100.0, 1.0}, 400, 2);
  write_dataset(dir / "data", {x, y});
  REQUIRE(run({"cluster", "--input", (dir / "data").string(), "--k", "2", "--out", (dir / "out").string()}).code ==
          0);
  CHECK(io::parse_costs_csv(io::read_file(dir / "out" / "costs.csv")).size() == 1);
  CHECK(io::parse_clustering_csv(io::read_file(dir / "out" / "clustering.csv")).k() == 2);
  CHECK(run({"cluster", "--input", (dir / "data").string(), "--k", "3", "--out", (dir / "o").string()}).code ==
        cli::kUsageError);
  CHECK(run({"cluster", "--input", (dir / "data").string(), "--bandwidth", "x", "--out", (dir / "o").string()})
            .code == cli::kUsageError);
  CHECK(run({"cluster", "--input", (dir / "data").string(), "--bandwidth", "400", "--out", (dir / "o").string()})
            .code == cli::kUsageError);
  CHECK(run({"cluster", "--input", (dir / "data").string(), "--bandwidth", "gcv", "--out", (dir / "g").string()})
            .code == 0);
  fs::remove_all(dir);
}

TEST_CASE("data and numeric errors") {
  const auto dir = scratch("errors");
  fs::create_directories(dir / "bad");
  io::write_file_atomic(dir / "bad" / "signals.csv", "a,b\n1,2\n3,oops\n");
  io::write_file_atomic(dir / "bad" / "manifest.json", R"({"sampling_rate": 10})");
  auto r = run({"cluster", "--input", (dir / "bad").string(), "--out", (dir / "o").string()});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find(":3:3") != std::string::npos);

  io::write_file_atomic(dir / "bad" / "manifest.json", R"({"epoch_length": 2})");
  r = run({"epochs", "--input", (dir / "bad").string(), "--out", (dir / "o").string()});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("sampling_rate") != std::string::npos);

  CHECK(run({"cluster", "--input", (dir / "absent").string(), "--out", (dir / "o").string()}).code ==
        cli::kDataError);

  Signal flat{std::vector<double>(300, 1.0), 10.0, "f"};
  auto other = simulate_ar2({1.05, 2.0, 10.0, 1.0}, 300, 3);
  write_dataset(dir / "flat", {flat, other});
  CHECK(run({"cluster", "--input", (dir / "flat").string(), "--out", (dir / "o").string()}).code ==
        cli::kNumericError);
  fs::remove_all(dir);
}

TEST_CASE("epochs writes per-phase outputs") {
  const auto dir = scratch("epochs");
  REQUIRE(run({"simulate", "--design", "design2", "--draws", "6", "--length", "400", "--out",
               (dir / "data").string()})
              .code == 0);
  auto r = run({"epochs", "--input", (dir / "data").string(), "--phases", "1-2,3-4,5-6", "--k", "5",
                "--dump-traces", "--out", (dir / "out").string()});
  REQUIRE(r.code == 0);
  for (const char* name : {"phase1", "phase2", "phase3"}) {
    CHECK(fs::exists(dir / "out" / ("affinity_" + std::string(name) + ".csv")));
    CHECK(fs::exists(dir / "out" / ("representative_" + std::string(name) + ".csv")));
    CHECK(fs::exists(dir / "out" / ("stability_" + std::string(name) + ".csv")));
    CHECK(fs::exists(dir / "out" / ("costs_" + std::string(name) + ".csv")));
  }
  CHECK(fs::exists(dir / "out" / "traces" / "epoch_6.csv"));
  const auto summary = read_json(dir / "out" / "summary.json");
  CHECK(summary["phases"].size() == 3);

  r = run({"epochs", "--input", (dir / "data").string(), "--phases", "1-1", "--k", "4", "--out",
           (dir / "one").string()});
  REQUIRE(r.code == 0);
  std::size_t n = 0;
  for (double v : io::parse_matrix_csv(io::read_file(dir / "one" / "affinity_phase1.csv"), &n)) {
    CHECK((v == 0.0 || v == 1.0));
  }
  CHECK(n == 15);
  CHECK(run({"epochs", "--input", (dir / "data").string(), "--phases", "1-9", "--out", (dir / "x").string()}).code ==
        cli::kUsageError);
  CHECK(run({"epochs", "--input", (dir / "data").string(), "--phases", "1-3,3-4", "--out", (dir / "x").string()})
            .code == cli::kUsageError);
  fs::remove_all(dir);
}

TEST_CASE("compare and gcv") {
  const auto dir = scratch("compare");
  fs::create_directories(dir);
  io::write_file_atomic(dir / "d.json",
                        R"({"coefficients": [[1,0,0,0,0],[0,0,0,0,1]], "replicates": 2, "length": 400})");
  REQUIRE(run({"simulate", "--design-file", (dir / "d.json").string(), "--out", (dir / "data").string()}).code == 0);
  REQUIRE(run({"compare", "--input", (dir / "data").string(), "--methods", "smc", "--out", (dir / "out").string()})
              .code == 0);
  CHECK(io::read_file(dir / "out" / "compare.csv") == "draw,method,sim\n1,smc,1\n");
  CHECK(fs::exists(dir / "out" / "compare_summary.csv"));
  CHECK(run({"compare", "--input", (dir / "data").string(), "--methods", "smc,ward", "--out",
             (dir / "x").string()})
            .code == cli::kUsageError);

  REQUIRE(run({"gcv", "--input", (dir / "data").string(), "--candidates", "10,50", "--out", (dir / "gcv").string()})
              .code == 0);
  const auto rows = io::read_file(dir / "gcv" / "gcv.csv");
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 1 + 4 * 2);
  const auto selected = io::read_file(dir / "gcv" / "gcv_selected.csv");
  CHECK(std::count(selected.begin(), selected.end(), '\n') == 1 + 4);
  fs::remove_all(dir);
}

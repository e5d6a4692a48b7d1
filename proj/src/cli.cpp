#include "smc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "smc/epochs.hpp"
#include "smc/error.hpp"
#include "smc/io.hpp"
#include "smc/merger.hpp"
#include "smc/parallel.hpp"
#include "smc/simulation.hpp"

namespace smc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SpectralOptions {
  std::string bandwidth = "100";
  std::string candidates = "20,50,80,100,150,200";
  std::size_t grid_size = 512;
  std::string strategy = "concatenate";
};

void add_spectral_options(CLI::App* cmd, SpectralOptions& o) {
  cmd->add_option("--bandwidth", o.bandwidth, "Parzen bandwidth in lags, or 'gcv'")->capture_default_str();
  cmd->add_option("--candidates", o.candidates, "Bandwidth candidates for --bandwidth gcv")->capture_default_str();
  cmd->add_option("--grid-size", o.grid_size, "Number of evaluation frequencies on [0, 0.5]")->capture_default_str();
  cmd->add_option("--strategy", o.strategy, "concatenate | average")->capture_default_str();
}

// Most frequently selected per-channel GCV bandwidth; ties go to the larger one.
std::size_t consensus_bandwidth(const std::vector<Signal>& signals, const std::vector<std::size_t>& candidates) {
  std::vector<std::size_t> picks(signals.size());
  parallel_for(signals.size(), [&](std::size_t c) { picks[c] = gcv_select_bandwidth(signals[c], candidates); });
  std::map<std::size_t, std::size_t> votes;
  for (const auto p : picks) ++votes[p];
  std::size_t best = 0;
  std::size_t best_votes = 0;
  for (const auto& [a, v] : votes) {
    if (v >= best_votes) {
      best = a;
      best_votes = v;
    }
  }
  return best;
}

SmoothingConfig resolve_config(const SpectralOptions& o, const std::vector<Signal>& signals) {
  SmoothingConfig cfg;
  cfg.grid_size = o.grid_size;
  if (o.bandwidth == "gcv") {
    cfg.bandwidth = consensus_bandwidth(signals, io::parse_size_list(o.candidates));
  } else {
    const auto v = io::parse_size_list(o.bandwidth);
    if (v.size() != 1) throw Error(ErrorCode::InvalidArgument, "--bandwidth takes one value or 'gcv'");
    cfg.bandwidth = v[0];
  }
  return cfg;
}

// 0 means automatic selection.
std::size_t parse_k(const std::string& text) {
  if (text == "auto") return 0;
  const auto v = io::parse_size_list(text);
  if (v.size() != 1) throw Error(ErrorCode::InvalidArgument, "--k takes one positive integer or 'auto'");
  return v[0];
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir);
  return dir;
}

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (char& ch : out) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  }
  return out;
}

MixtureDesign design_from_json(const std::string& path) {
  const auto text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, path + ": " + e.what());
  }
  try {
    MixtureDesign d;
    d.name = j.value("name", fs::path(path).stem().string());
    if (j.contains("coefficients")) {
      for (const auto& row : j.at("coefficients")) {
        const auto v = row.get<std::vector<double>>();
        if (v.size() != kLatentCount) throw Error(ErrorCode::FormatError, path + ": mixing rows need 5 entries");
        MixingRow r{};
        std::copy(v.begin(), v.end(), r.begin());
        d.coefficients.push_back(r);
      }
    }
    if (j.contains("dirichlet_alpha")) {
      d.dirichlet_alpha = j.at("dirichlet_alpha").get<double>();
      d.rows = j.value("rows", std::size_t{5});
    }
    d.replicates = j.value("replicates", std::size_t{1});
    d.noise_sd = j.value("noise_sd", 1.0);
    d.length = j.value("length", std::size_t{1000});
    const double modulus = j.value("modulus", 1.01);
    const double fs_hz = j.value("sampling_rate", 100.0);
    const auto peaks = j.value("peaks", std::vector<double>{2, 6, 10, 21, 40});
    if (peaks.size() != kLatentCount) throw Error(ErrorCode::FormatError, path + ": 'peaks' needs 5 entries");
    for (std::size_t i = 0; i < kLatentCount; ++i) d.latents[i] = {modulus, peaks[i], fs_hz, 1.0};
    if (j.value("shared_latents", false)) d.latent_mode = LatentMode::Shared;
    return d;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string design;
  std::string design_file;
  std::uint64_t seed = 1;
  std::size_t draws = 1;
  std::size_t length = 0;
  double noise_sd = -1.0;
  bool shared = false;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  MixtureDesign design;
  if (!a.design_file.empty()) {
    design = design_from_json(a.design_file);
  } else if (!a.design.empty()) {
    design = builtin_design(a.design);
  } else {
    throw Error(ErrorCode::InvalidArgument, "simulate needs --design or --design-file");
  }
  if (a.length > 0) design.length = a.length;
  if (a.noise_sd >= 0.0) design.noise_sd = a.noise_sd;
  if (a.shared) design.latent_mode = LatentMode::Shared;
  if (a.draws == 0) throw Error(ErrorCode::InvalidArgument, "--draws must be positive");
  design.validate();

  std::vector<LabeledCorpus> draws(a.draws);
  parallel_for(a.draws, [&](std::size_t d) {
    MixtureDesign copy = design;
    copy.seed = derive_seed(a.seed, d);
    draws[d] = simulate_mixture(copy);
  });

  io::SignalTable table;
  const std::size_t channels = draws[0].signals.size();
  for (const auto& s : draws[0].signals) table.labels.push_back(s.channel_id);
  table.columns.assign(channels, {});
  for (std::size_t c = 0; c < channels; ++c) {
    table.columns[c].reserve(a.draws * design.length);
    for (const auto& d : draws) {
      table.columns[c].insert(table.columns[c].end(), d.signals[c].samples.begin(), d.signals[c].samples.end());
    }
  }
  io::Manifest m;
  m.sampling_rate = design.latents[0].sampling_rate;
  m.epoch_length = design.length;
  m.epoch_count = a.draws;
  m.truth = draws[0].truth.assignment();
  m.design = design.name;
  m.seed = a.seed;
  io::save_dataset(prepare_out(a.out), m, table);
  out << "wrote " << channels << " channels x " << design.length << " samples x " << a.draws << " draw(s) to "
      << a.out << "\n";
  return kSuccess;
}

struct ClusterArgs {
  std::string input;
  SpectralOptions spectral;
  std::string k = "auto";
  double tau = 0.01;
  std::size_t epoch = 1;
  std::string out;
};

int cmd_cluster(const ClusterArgs& a, std::ostream& out) {
  const auto ds = io::load_dataset(a.input);
  if (a.epoch < 1 || a.epoch > ds.epochs.epoch_count()) {
    throw Error(ErrorCode::InvalidArgument, "--epoch outside [1, " + std::to_string(ds.epochs.epoch_count()) + "]");
  }
  const auto signals = ds.epochs.epoch_signals(a.epoch - 1);
  const auto cfg = resolve_config(a.spectral, signals);
  const auto strategy = parse_strategy(a.spectral.strategy);
  const std::size_t fixed_k = parse_k(a.k);

  const auto trace = smc_cluster(signals, cfg, strategy);
  const auto costs = trace.costs();
  const std::size_t auto_k = select_k(costs, a.tau);
  const std::size_t k = fixed_k > 0 ? fixed_k : auto_k;
  const auto clustering = cut_trace(trace, k);

  const auto dir = prepare_out(a.out);
  io::write_file_atomic(dir / "trace.csv", io::format_trace_csv(trace));
  io::write_file_atomic(dir / "costs.csv", io::format_costs_csv(costs));
  io::write_file_atomic(dir / "clustering.csv", io::format_clustering_csv(clustering, ds.epochs.channel_labels()));

  json summary;
  summary["channels"] = signals.size();
  summary["bandwidth"] = cfg.bandwidth;
  summary["grid_size"] = cfg.grid_size;
  summary["strategy"] = std::string(to_string(strategy));
  summary["tau"] = a.tau;
  summary["k_selected"] = auto_k;
  summary["k"] = k;
  if (ds.manifest.truth) {
    const double sim = sim_index(Clustering::from_labels(*ds.manifest.truth), clustering);
    summary["sim"] = sim;
  }
  io::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  out << "k=" << k << " (auto " << auto_k << ")";
  if (summary.contains("sim")) out << " sim=" << io::format_double(summary["sim"].get<double>());
  out << "\n";
  return kSuccess;
}

struct EpochsArgs {
  std::string input;
  SpectralOptions spectral;
  std::string phases;
  std::string k = "auto";
  double tau = 0.01;
  double threshold = 0.5;
  bool detrend = false;
  bool dump_traces = false;
  std::string out;
};

int cmd_epochs(const EpochsArgs& a, std::ostream& out) {
  auto ds = io::load_dataset(a.input);
  EpochSet es = a.detrend ? ds.epochs.detrended() : ds.epochs;
  PhaseSegmentation seg;
  if (!a.phases.empty()) {
    seg.phases = io::parse_phases(a.phases);
  } else if (!ds.manifest.phases.empty()) {
    seg.phases = ds.manifest.phases;
  } else {
    seg = PhaseSegmentation::whole(es.epoch_count());
  }
  seg.validate(es.epoch_count());

  const auto cfg = resolve_config(a.spectral, es.epoch_signals(0));
  const auto strategy = parse_strategy(a.spectral.strategy);
  const std::size_t fixed_k = parse_k(a.k);
  const auto traces = cluster_epochs(es, cfg, strategy);
  const auto phases = phase_compare(traces, seg, a.tau, fixed_k, a.threshold);

  const auto dir = prepare_out(a.out);
  if (a.dump_traces) {
    const auto tdir = prepare_out((dir / "traces").string());
    for (std::size_t e = 0; e < traces.size(); ++e) {
      io::write_file_atomic(tdir / ("epoch_" + std::to_string(e + 1) + ".csv"), io::format_trace_csv(traces[e]));
    }
  }
  json summary;
  summary["epochs"] = es.epoch_count();
  summary["channels"] = es.channel_count();
  summary["bandwidth"] = cfg.bandwidth;
  summary["strategy"] = std::string(to_string(strategy));
  summary["tau"] = a.tau;
  summary["threshold"] = a.threshold;
  json list = json::array();
  const auto& labels = es.channel_labels();
  for (const auto& p : phases) {
    const std::string name = safe_name(p.phase.name);
    const auto& s = p.summary;
    io::write_file_atomic(dir / ("affinity_" + name + ".csv"),
                          io::format_matrix_csv(s.affinity.entries, s.affinity.size, labels));
    io::write_file_atomic(dir / ("costs_" + name + ".csv"), io::format_costs_csv(s.mean_costs));
    io::write_file_atomic(dir / ("representative_" + name + ".csv"),
                          io::format_clustering_csv(s.representative.clustering, labels));
    io::write_file_atomic(dir / ("stability_" + name + ".csv"), io::format_stability_csv(s.representative));
    json entry{{"name", p.phase.name}, {"first", p.phase.first}, {"last", p.phase.last}, {"k", s.selected_k}};
    if (ds.manifest.truth) {
      entry["sim"] = sim_index(Clustering::from_labels(*ds.manifest.truth), s.representative.clustering);
    }
    list.push_back(entry);
    out << p.phase.name << " [" << p.phase.first << "-" << p.phase.last << "]: k=" << s.selected_k << "\n";
  }
  summary["phases"] = list;
  io::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  return kSuccess;
}

struct CompareArgs {
  std::string input;
  SpectralOptions spectral;
  std::string methods = "smc,np,lnp,skl";
  std::size_t k = 0;
  std::string out;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  std::vector<BenchmarkMethod> methods;
  for (const auto& name : CLI::detail::split(a.methods, ',')) methods.push_back(parse_method(name));
  if (methods.empty()) throw Error(ErrorCode::InvalidArgument, "--methods is empty");

  const auto ds = io::load_dataset(a.input);
  if (!ds.manifest.truth) throw Error(ErrorCode::FormatError, "compare needs 'truth' labels in the manifest");
  const auto truth = Clustering::from_labels(*ds.manifest.truth);
  const std::size_t k = a.k > 0 ? a.k : truth.k();

  std::vector<LabeledCorpus> corpus(ds.epochs.epoch_count());
  for (std::size_t e = 0; e < corpus.size(); ++e) corpus[e] = {ds.epochs.epoch_signals(e), truth, {}};
  const auto cfg = resolve_config(a.spectral, corpus[0].signals);
  const auto result = benchmark_compare(corpus, k, cfg, methods, parse_strategy(a.spectral.strategy));

  std::string table = "draw,method,sim\n";
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto m : methods) {
      table += std::to_string(d + 1) + "," + std::string(to_string(m)) + "," +
               io::format_double(result.sims.at(m)[d]) + "\n";
    }
  }
  std::string stats = "method,draws,mean,sd,min,max\n";
  for (const auto m : methods) {
    const auto& v = result.sims.at(m);
    const double mean = result.mean(m);
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    stats += std::string(to_string(m)) + "," + std::to_string(v.size()) + "," + io::format_double(mean) + "," +
             io::format_double(sd) + "," + io::format_double(*std::min_element(v.begin(), v.end())) + "," +
             io::format_double(*std::max_element(v.begin(), v.end())) + "\n";
    out << to_string(m) << ": mean sim " << io::format_double(mean) << "\n";
  }
  const auto dir = prepare_out(a.out);
  io::write_file_atomic(dir / "compare.csv", table);
  io::write_file_atomic(dir / "compare_summary.csv", stats);
  return kSuccess;
}

struct GcvArgs {
  std::string input;
  std::string candidates = "20,50,80,100,150,200";
  std::size_t epoch = 0;
  std::string out;
};

int cmd_gcv(const GcvArgs& a, std::ostream& out) {
  const auto ds = io::load_dataset(a.input);
  const auto candidates = io::parse_size_list(a.candidates);
  std::vector<std::size_t> epochs;
  if (a.epoch > 0) {
    if (a.epoch > ds.epochs.epoch_count()) throw Error(ErrorCode::InvalidArgument, "--epoch out of range");
    epochs.push_back(a.epoch - 1);
  } else {
    epochs.resize(ds.epochs.epoch_count());
    std::iota(epochs.begin(), epochs.end(), 0);
  }
  const std::size_t channels = ds.epochs.channel_count();
  const std::size_t jobs = epochs.size() * channels;
  std::vector<std::vector<double>> scores(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const auto signals = ds.epochs.epoch_signals(epochs[job / channels]);
    const auto& s = signals[job % channels];
    for (const auto c : candidates) scores[job].push_back(gcv_score(s, c));
  });

  const auto& labels = ds.epochs.channel_labels();
  std::string table = "epoch,channel,label,bandwidth,score\n";
  std::string selected = "epoch,channel,label,selected\n";
  std::map<std::size_t, std::size_t> votes;
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::size_t e = epochs[job / channels] + 1;
    const std::size_t c = job % channels;
    const std::string prefix = std::to_string(e) + "," + std::to_string(c + 1) + "," + labels[c] + ",";
    std::size_t best = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      table += prefix + std::to_string(candidates[i]) + "," + io::format_double(scores[job][i]) + "\n";
      const double s = scores[job][i];
      if (i == 0 || s < scores[job][best] || (s == scores[job][best] && candidates[i] > candidates[best])) best = i;
    }
    selected += prefix + std::to_string(candidates[best]) + "\n";
    ++votes[candidates[best]];
  }
  const auto dir = prepare_out(a.out);
  io::write_file_atomic(dir / "gcv.csv", table);
  io::write_file_atomic(dir / "gcv_selected.csv", selected);
  for (const auto& [bw, v] : votes) out << "bandwidth " << bw << ": selected for " << v << " series\n";
  return kSuccess;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidK:
    case ErrorCode::InvalidBandwidth:
    case ErrorCode::InvalidLag:
    case ErrorCode::InvalidGrid:
    case ErrorCode::UnknownDesign:
    case ErrorCode::TooFewChannels:
      return kUsageError;
    case ErrorCode::FormatError:
    case ErrorCode::IoError:
    case ErrorCode::InvalidSignal:
    case ErrorCode::GridMismatch:
    case ErrorCode::LabelMismatch:
      return kDataError;
    case ErrorCode::DegenerateSpectrum:
    case ErrorCode::NonCausal:
    case ErrorCode::NotNormalized:
      return kNumericError;
  }
  return kDataError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral merger clustering of multichannel time series"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a labelled AR(2) mixture corpus");
  simulate->add_option("--design", sim.design, "Built-in design: design1..design4");
  simulate->add_option("--design-file", sim.design_file, "JSON design description");
  simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  simulate->add_option("--draws", sim.draws, "Independent draws, stored as consecutive epochs")->capture_default_str();
  simulate->add_option("--length", sim.length, "Override series length");
  simulate->add_option("--noise-sd", sim.noise_sd, "Override observation noise sd");
  simulate->add_flag("--shared-latents", sim.shared, "One latent realisation for every channel");
  simulate->add_option("--out", sim.out, "Output directory")->required();

  ClusterArgs cl;
  auto* cluster = app.add_subcommand("cluster", "Run the hierarchical merger on one recording");
  cluster->add_option("--input", cl.input, "Dataset directory (signals.csv + manifest.json)")->required();
  add_spectral_options(cluster, cl.spectral);
  cluster->add_option("--k", cl.k, "Cluster count or 'auto'")->capture_default_str();
  cluster->add_option("--tau", cl.tau, "Elbow threshold for --k auto")->capture_default_str();
  cluster->add_option("--epoch", cl.epoch, "1-based epoch to cluster")->capture_default_str();
  cluster->add_option("--out", cl.out, "Output directory")->required();

  EpochsArgs ep;
  auto* epochs = app.add_subcommand("epochs", "Cluster every epoch and summarise per phase");
  epochs->add_option("--input", ep.input, "Dataset directory")->required();
  add_spectral_options(epochs, ep.spectral);
  epochs->add_option("--phases", ep.phases, "Phase ranges, e.g. 1-50,51-110,111-160");
  epochs->add_option("--k", ep.k, "Cluster count or 'auto'")->capture_default_str();
  epochs->add_option("--tau", ep.tau, "Elbow threshold")->capture_default_str();
  epochs->add_option("--threshold", ep.threshold, "Joint-membership stability threshold")->capture_default_str();
  epochs->add_flag("--detrend", ep.detrend, "Remove a linear trend from every epoch first");
  epochs->add_flag("--dump-traces", ep.dump_traces, "Write per-epoch merge traces");
  epochs->add_option("--out", ep.out, "Output directory")->required();

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Score SMC against complete-linkage baselines");
  compare->add_option("--input", cmp.input, "Labelled dataset directory; each epoch is one draw")->required();
  add_spectral_options(compare, cmp.spectral);
  compare->add_option("--methods", cmp.methods, "Comma-separated subset of smc,np,lnp,skl")->capture_default_str();
  compare->add_option("--k", cmp.k, "Cluster count (default: number of true clusters)");
  compare->add_option("--out", cmp.out, "Output directory")->required();

  GcvArgs gcv;
  auto* gcv_cmd = app.add_subcommand("gcv", "Gamma-deviance GCV scores per channel and bandwidth");
  gcv_cmd->add_option("--input", gcv.input, "Dataset directory")->required();
  gcv_cmd->add_option("--candidates", gcv.candidates, "Bandwidth candidates")->capture_default_str();
  gcv_cmd->add_option("--epoch", gcv.epoch, "1-based epoch (default: all)");
  gcv_cmd->add_option("--out", gcv.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*cluster) return cmd_cluster(cl, out);
    if (*epochs) return cmd_epochs(ep, out);
    if (*compare) return cmd_compare(cmp, out);
    if (*gcv_cmd) return cmd_gcv(gcv, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsageError;
}

}  // namespace smc::cli

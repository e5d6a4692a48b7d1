#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smc/dissimilarity.hpp"
#include "smc/epochs.hpp"
#include "smc/error.hpp"
#include "smc/merger.hpp"
#include "smc/simulation.hpp"
#include "smc/spectral.hpp"

namespace py = pybind11;
using namespace smc;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Signal to_signal(const Array& x, double fs) {
  if (x.ndim() != 1) throw py::value_error("expected a 1-d array");
  Signal s;
  s.samples.assign(x.data(), x.data() + x.size());
  s.sampling_rate = fs;
  return s;
}

// Rows of a 2-d array are channels.
std::vector<Signal> to_signals(const Array& x, double fs) {
  if (x.ndim() != 2) throw py::value_error("expected a 2-d array of shape (channels, samples)");
  const auto rows = static_cast<std::size_t>(x.shape(0));
  const auto cols = static_cast<std::size_t>(x.shape(1));
  std::vector<Signal> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    out[r].samples.assign(x.data() + r * cols, x.data() + (r + 1) * cols);
    out[r].sampling_rate = fs;
    out[r].channel_id = "ch" + std::to_string(r + 1);
  }
  return out;
}

Array signals_to_array(const std::vector<Signal>& signals) {
  const std::size_t rows = signals.size();
  const std::size_t cols = rows ? signals[0].size() : 0;
  Array out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  for (std::size_t r = 0; r < rows; ++r) std::copy(signals[r].samples.begin(), signals[r].samples.end(), out.mutable_data() + r * cols);
  return out;
}

py::dict density_dict(const SpectralDensity& d) {
  py::dict out;
  out["frequency"] = to_array(d.grid.points());
  out["value"] = to_array(d.values);
  out["normalized"] = d.normalized;
  out["variance"] = d.variance;
  return out;
}

SpectralDensity density_from(const Array& values, double step, double first) {
  SpectralDensity d{FrequencyGrid(first, step, static_cast<std::size_t>(values.size())),
                    std::vector<double>(values.data(), values.data() + values.size()), true, 0.0};
  return d;
}

std::vector<int> labels_of(const Clustering& c) { return c.assignment(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral merger clustering of multichannel time series";

  static py::exception<Error> error(m, "SmcError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "ar2_coefficients",
      [](double modulus, double peak_hz, double fs) {
        const auto c = ar2_coefficients(modulus, peak_hz, fs);
        return py::make_tuple(c.phi1, c.phi2);
      },
      py::arg("modulus"), py::arg("peak_hz"), py::arg("sampling_rate"));

  m.def(
      "simulate_ar2",
      [](double modulus, double peak_hz, double fs, std::size_t length, std::uint64_t seed, double sd) {
        return to_array(simulate_ar2({modulus, peak_hz, fs, sd}, length, seed).samples);
      },
      py::arg("modulus"), py::arg("peak_hz"), py::arg("sampling_rate"), py::arg("length"), py::arg("seed"),
      py::arg("innovation_sd") = 1.0);

  m.def(
      "simulate_design",
      [](const std::string& name, std::uint64_t seed, bool shared_latents) {
        auto d = builtin_design(name);
        d.seed = seed;
        if (shared_latents) d.latent_mode = LatentMode::Shared;
        const auto corpus = simulate_mixture(d);
        return py::make_tuple(signals_to_array(corpus.signals), labels_of(corpus.truth));
      },
      py::arg("name"), py::arg("seed"), py::arg("shared_latents") = false,
      "Returns (signals[channels, samples], truth labels).");

  m.def(
      "periodogram", [](const Array& x) { return density_dict(periodogram(to_signal(x, 1.0))); }, py::arg("x"));

  m.def(
      "smoothed_periodogram",
      [](const Array& x, std::size_t bandwidth, std::size_t grid_size, bool normalize) {
        auto d = smoothed_periodogram(to_signal(x, 1.0), {bandwidth, grid_size});
        return density_dict(normalize ? normalize_density(d) : d);
      },
      py::arg("x"), py::arg("bandwidth") = 100, py::arg("grid_size") = 512, py::arg("normalize") = true);

  m.def(
      "gcv_score", [](const Array& x, std::size_t a) { return gcv_score(to_signal(x, 1.0), a); }, py::arg("x"),
      py::arg("bandwidth"));
  m.def(
      "gcv_select_bandwidth",
      [](const Array& x, const std::vector<std::size_t>& candidates) {
        return gcv_select_bandwidth(to_signal(x, 1.0), candidates);
      },
      py::arg("x"), py::arg("candidates"));

  m.def(
      "squared_coherence",
      [](const Array& x, const Array& y, std::size_t bandwidth, std::size_t grid_size) {
        const auto c = squared_coherence(to_signal(x, 1.0), to_signal(y, 1.0), {bandwidth, grid_size});
        py::dict out;
        out["frequency"] = to_array(c.grid.points());
        out["value"] = to_array(c.values);
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("bandwidth") = 100, py::arg("grid_size") = 512);

  m.def(
      "tvd",
      [](const Array& f, const Array& g) {
        if (f.size() != g.size()) throw py::value_error("densities differ in length");
        const double step = 0.5 / static_cast<double>(f.size());
        return tvd(density_from(f, step, step / 2), density_from(g, step, step / 2));
      },
      py::arg("f"), py::arg("g"), "TVD of two densities sampled at cell midpoints of [0, 0.5].");

  m.def(
      "sim_index",
      [](const std::vector<int>& truth, const std::vector<int>& candidate) {
        return sim_index(Clustering::from_labels(truth), Clustering::from_labels(candidate));
      },
      py::arg("truth"), py::arg("candidate"));

  m.def(
      "select_k", [](const std::vector<double>& costs, double tau) { return select_k(costs, tau); },
      py::arg("costs"), py::arg("tau") = 0.01);

  m.def(
      "complete_linkage",
      [](const Array& d, std::size_t k) {
        if (d.ndim() != 2 || d.shape(0) != d.shape(1)) throw py::value_error("expected a square matrix");
        const auto n = static_cast<std::size_t>(d.shape(0));
        DissimilarityMatrix m(n, std::vector<double>(d.data(), d.data() + d.size()));
        return labels_of(complete_linkage(m, k));
      },
      py::arg("matrix"), py::arg("k"));

  py::class_<MergeTrace>(m, "MergeTrace")
      .def_readonly("channel_count", &MergeTrace::channel_count)
      .def("costs", [](const MergeTrace& t) { return to_array(t.costs()); })
      .def("cut", [](const MergeTrace& t, std::size_t k) { return labels_of(cut_trace(t, k)); }, py::arg("k"))
      .def("steps", [](const MergeTrace& t) {
        py::list out;
        for (const auto& s : t.steps) {
          py::dict d;
          d["clusters_before"] = s.clusters_before;
          d["first"] = s.first;
          d["second"] = s.second;
          d["cost"] = s.cost;
          d["members"] = s.members;
          out.append(d);
        }
        return out;
      });

  m.def(
      "cluster",
      [](const Array& x, double fs, std::size_t bandwidth, std::size_t grid_size, const std::string& strategy) {
        const auto signals = to_signals(x, fs);
        py::gil_scoped_release release;
        return smc_cluster(signals, {bandwidth, grid_size}, parse_strategy(strategy));
      },
      py::arg("signals"), py::arg("sampling_rate") = 1.0, py::arg("bandwidth") = 100, py::arg("grid_size") = 512,
      py::arg("strategy") = "concatenate", "Runs the hierarchical merger on signals[channels, samples].");

  m.def(
      "cluster_epochs",
      [](const Array& x, double fs, std::size_t bandwidth, std::size_t grid_size, const std::string& strategy) {
        if (x.ndim() != 3) throw py::value_error("expected an array of shape (epochs, channels, samples)");
        EpochSet es(static_cast<std::size_t>(x.shape(0)), static_cast<std::size_t>(x.shape(1)),
                    static_cast<std::size_t>(x.shape(2)), fs, std::vector<double>(x.data(), x.data() + x.size()));
        py::gil_scoped_release release;
        return cluster_epochs(es, {bandwidth, grid_size}, parse_strategy(strategy));
      },
      py::arg("epochs"), py::arg("sampling_rate") = 1.0, py::arg("bandwidth") = 100, py::arg("grid_size") = 512,
      py::arg("strategy") = "concatenate");

  m.def(
      "affinity",
      [](const std::vector<MergeTrace>& traces, std::size_t k) {
        const auto am = affinity(traces, k);
        Array out({static_cast<py::ssize_t>(am.size), static_cast<py::ssize_t>(am.size)});
        std::copy(am.entries.begin(), am.entries.end(), out.mutable_data());
        return out;
      },
      py::arg("traces"), py::arg("k"));

  m.def(
      "summarize_epochs",
      [](const std::vector<MergeTrace>& traces, double tau, std::size_t k, double threshold) {
        const auto s = summarize_epochs(traces, tau, k, threshold);
        py::dict out;
        out["k"] = s.selected_k;
        out["mean_costs"] = to_array(s.mean_costs);
        Array am({static_cast<py::ssize_t>(s.affinity.size), static_cast<py::ssize_t>(s.affinity.size)});
        std::copy(s.affinity.entries.begin(), s.affinity.entries.end(), am.mutable_data());
        out["affinity"] = am;
        out["representative"] = labels_of(s.representative.clustering);
        out["stable"] = s.representative.stable;
        return out;
      },
      py::arg("traces"), py::arg("tau") = 0.01, py::arg("k") = 0, py::arg("threshold") = 0.5);
}

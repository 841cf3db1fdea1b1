#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cpgait/bifurcation.hpp"
#include "cpgait/config.hpp"
#include "cpgait/equivalence.hpp"
#include "cpgait/error.hpp"
#include "cpgait/parallel.hpp"
#include "cpgait/pipeline.hpp"

namespace py = pybind11;
using namespace cpgait;

namespace {

py::array_t<double> to_array(const std::vector<double>& x) { return py::array_t<double>(x.size(), x.data()); }

using Dense = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <class F>
Dense map(const Dense& x, F f) {
  Dense out(x.request().shape);
  double* o = out.mutable_data();
  const double* p = x.data();
  for (py::ssize_t i = 0; i < x.size(); ++i) o[i] = f(p[i]);
  return out;
}

py::dict point_dict(const FixedPointRecord& p) {
  py::dict d;
  d["theta1"] = p.theta1;
  d["theta2"] = p.theta2;
  d["class"] = to_string(p.cls);
  d["gait"] = p.gait;
  d["eigenvalues"] = py::make_tuple(p.eigenvalues[0], p.eigenvalues[1]);
  return d;
}

py::dict counts_dict(const CensusCounts& c) {
  py::dict d;
  d["sinks"] = c.sinks;
  d["sources"] = c.sources;
  d["saddles"] = c.saddles;
  d["nonhyperbolic"] = c.nonhyperbolic;
  return d;
}

py::dict census_dict(const Census& c) {
  py::dict d = counts_dict(CensusCounts::of(c));
  py::list pts;
  for (const auto& p : c.points) pts.append(point_dict(p));
  d["points"] = pts;
  d["euler"] = c.euler();
  return d;
}

CouplingStrengths strengths(const std::vector<double>& c) {
  if (c.size() != 7) throw ConfigError("expected seven coupling strengths");
  CouplingStrengths s;
  std::copy(c.begin(), c.end(), s.c.begin());
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "bursting-neuron CPG: phase reduction and gait selection";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  m.attr("I_EXT_MIN") = kIExtMin;
  m.attr("I_EXT_MAX") = kIExtMax;

  py::class_<NeuronParams>(m, "NeuronParams")
      .def(py::init<>())
      .def_readwrite("capacitance", &NeuronParams::capacitance)
      .def_readwrite("g_ca", &NeuronParams::g_ca)
      .def_readwrite("g_k", &NeuronParams::g_k)
      .def_readwrite("g_ks", &NeuronParams::g_ks)
      .def_readwrite("g_leak", &NeuronParams::g_leak)
      .def_readwrite("g_syn", &NeuronParams::g_syn)
      .def_readwrite("gamma", &NeuronParams::gamma)
      .def_readwrite("delta", &NeuronParams::delta)
      .def_readwrite("i_ext", &NeuronParams::i_ext)
      .def("hash", &NeuronParams::hash);

  m.def(
      "limit_cycle",
      [](const NeuronParams& p) {
        const LimitCycle lc = find_limit_cycle(p);
        py::dict d;
        d["period"] = lc.period;
        d["frequency"] = lc.frequency();
        d["closure_error"] = lc.closure_error;
        for (int k = 0; k < 4; ++k) d[py::str(std::string(1, "vmws"[k]))] = to_array(lc.component(k));
        return d;
      },
      py::arg("params"), "Bursting orbit sampled on a uniform phase grid, anchored at onset.");

  py::class_<CouplingTable, std::shared_ptr<CouplingTable>>(m, "CouplingTable")
      .def("__call__", [](const CouplingTable& h, Dense x) { return map(x, [&](double t) { return h(t); }); })
      .def("derivative",
           [](const CouplingTable& h, Dense x) { return map(x, [&](double t) { return h.derivative(t); }); })
      .def("__len__", &CouplingTable::size)
      .def_property_readonly("values", [](const CouplingTable& h) { return to_array(h.values()); });

  m.def(
      "fourier_coupling",
      [](double mean, std::vector<double> cos, std::vector<double> sin, std::size_t points) {
        FourierCoupling f;
        f.mean = mean;
        f.cos = std::move(cos);
        f.sin = std::move(sin);
        f.points = points;
        return std::const_pointer_cast<CouplingTable>(fourier_table(f));
      },
      py::arg("mean"), py::arg("cos"), py::arg("sin"), py::arg("points") = 1024);

  m.def("solve_eta", [](const CouplingTable& h) {
    const EtaResult e = solve_eta(h);
    return py::make_tuple(e.eta, e.trivial);
  });
  m.def("alpha_bounds", [](const CouplingTable& h) {
    const AlphaBounds b = alpha_bounds(h);
    return py::make_tuple(b.alpha_min, b.alpha_max);
  });

  m.def(
      "phase_model",
      [](const std::string& config, std::optional<double> i_ext) {
        const PhaseModel pm = phase_model(parse_config(config, true), i_ext);
        py::dict d;
        d["i_ext"] = pm.i_ext;
        d["period"] = pm.period;
        d["zbar"] = pm.zbar;
        d["eta"] = pm.eta.eta;
        d["eta_trivial"] = pm.eta.trivial;
        d["synthetic"] = pm.synthetic;
        d["h"] = std::const_pointer_cast<CouplingTable>(pm.h);
        return d;
      },
      py::arg("config") = "{}", py::arg("i_ext") = py::none(),
      "Reduction (or the configured stand-in) for a JSON configuration.");

  m.def(
      "census",
      [](const std::string& config, std::optional<double> delta_i) {
        const RunConfig cfg = parse_config(config, true);
        const PhaseModel pm = phase_model(cfg);
        return census_dict(find_fixed_points(torus_field(cfg, pm, delta_i.value_or(cfg.delta_i))));
      },
      py::arg("config"), py::arg("delta_i") = py::none(), "Fixed points of the torus field.");

  m.def(
      "sweep",
      [](const std::string& config, std::size_t threads) {
        const RunConfig cfg = parse_config(config, true);
        SweepOptions o;
        o.threads = threads ? threads : hardware_threads();
        SweepResult r;
        {
          py::gil_scoped_release release;
          r = sweep(field_family(cfg, cfg.scan.parameter), cfg.scan.parameter, cfg.scan.grid(), o);
        }
        py::list counts, events;
        for (const auto& c : r.censuses) counts.append(counts_dict(CensusCounts::of(c)));
        for (const auto& e : r.events) {
          py::dict d;
          d["value"] = e.value();
          d["type"] = e.ambiguous ? "ambiguous" : e.exchange ? "exchange" : e.fold ? "saddle-node" : "unresolved";
          d["before"] = counts_dict(e.before);
          d["after"] = counts_dict(e.after);
          events.append(d);
        }
        py::dict d;
        d["parameter"] = r.parameter;
        d["grid"] = to_array(r.grid);
        d["counts"] = counts;
        d["events"] = events;
        d["final"] = census_dict(r.censuses.back());
        return d;
      },
      py::arg("config"), py::arg("threads") = 0, "Census along the configured scan with event localization.");

  m.def("det_closed_form", [](const std::vector<double>& c) { return det_closed_form(strengths(c)); });
  m.def("det_dense", [](const std::vector<double>& c) { return det_dense(strengths(c)); });
  m.def("example_couplings", [] {
    const auto c = CouplingStrengths::example_balanced();
    return std::vector<double>(c.c.begin(), c.c.end());
  });
}

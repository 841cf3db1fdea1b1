#include "cpgait/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "cpgait/csv.hpp"
#include "cpgait/error.hpp"

namespace cpgait {

using nlohmann::json;

namespace {

const std::pair<const char*, double NeuronParams::*> kNeuronFields[] = {
    {"capacitance", &NeuronParams::capacitance}, {"g_ca", &NeuronParams::g_ca},
    {"g_k", &NeuronParams::g_k},                 {"g_ks", &NeuronParams::g_ks},
    {"g_leak", &NeuronParams::g_leak},           {"g_syn", &NeuronParams::g_syn},
    {"e_ca", &NeuronParams::e_ca},               {"e_k", &NeuronParams::e_k},
    {"e_ks", &NeuronParams::e_ks},               {"e_leak", &NeuronParams::e_leak},
    {"e_syn_post", &NeuronParams::e_syn_post},   {"e_syn_pre", &NeuronParams::e_syn_pre},
    {"k_ca", &NeuronParams::k_ca},               {"k_k", &NeuronParams::k_k},
    {"k_ks", &NeuronParams::k_ks},               {"k_syn", &NeuronParams::k_syn},
    {"v_ca", &NeuronParams::v_ca},               {"v_k", &NeuronParams::v_k},
    {"v_ks", &NeuronParams::v_ks},               {"syn_scale", &NeuronParams::syn_scale},
    {"gamma", &NeuronParams::gamma},             {"delta", &NeuronParams::delta},
    {"tau_syn", &NeuronParams::tau_syn},         {"i_ext", &NeuronParams::i_ext},
};

// Reads keys off one JSON object and remembers which ones were consumed.
class Section {
 public:
  Section(const json& j, std::string path, std::vector<std::string>& unknown)
      : j_(j), path_(std::move(path)), unknown_(unknown) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }
  ~Section() {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) unknown_.push_back(path_.empty() ? k : path_ + "." + k);
    }
  }

  bool has(const std::string& k) {
    if (!j_.contains(k)) return false;
    used_.insert({k, true});
    return true;
  }
  const json& at(const std::string& k) { return j_.at(k); }
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }
  std::string key(const std::string& k) const { return "'" + (path_.empty() ? k : path_ + "." + k) + "'"; }

  void number(const std::string& k, double& out) {
    if (!has(k)) return;
    if (!at(k).is_number()) throw ConfigError(key(k) + " must be a number");
    out = at(k).get<double>();
    if (!std::isfinite(out)) throw ConfigError(key(k) + " must be finite");
  }
  void count(const std::string& k, std::size_t& out) {
    if (!has(k)) return;
    if (!at(k).is_number_integer() || at(k).get<long long>() <= 0) {
      throw ConfigError(key(k) + " must be a positive integer");
    }
    out = at(k).get<std::size_t>();
  }
  void text(const std::string& k, std::string& out) {
    if (!has(k)) return;
    if (!at(k).is_string()) throw ConfigError(key(k) + " must be a string");
    out = at(k).get<std::string>();
  }
  void flag(const std::string& k, bool& out) {
    if (!has(k)) return;
    if (!at(k).is_boolean()) throw ConfigError(key(k) + " must be true or false");
    out = at(k).get<bool>();
  }
  std::vector<double> numbers(const std::string& k, std::optional<std::size_t> n = std::nullopt) {
    const json& a = at(k);
    if (!a.is_array()) throw ConfigError(key(k) + " must be an array");
    if (n && a.size() != *n) throw ConfigError(key(k) + " must have " + std::to_string(*n) + " entries");
    std::vector<double> v;
    for (const auto& x : a) {
      if (!x.is_number()) throw ConfigError(key(k) + " must hold numbers only");
      v.push_back(x.get<double>());
    }
    return v;
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::map<std::string, bool> used_;
};

HeteroMode parse_mode(const std::string& s) {
  if (s == "none") return HeteroMode::kNone;
  if (s == "forward") return HeteroMode::kForward;
  if (s == "backward") return HeteroMode::kBackward;
  if (s == "currents") return HeteroMode::kCurrents;
  throw ConfigError("heterogeneity.mode must be none, forward, backward or currents, not '" + s + "'");
}

}  // namespace

std::string to_string(HeteroMode m) {
  switch (m) {
    case HeteroMode::kNone: return "none";
    case HeteroMode::kForward: return "forward";
    case HeteroMode::kBackward: return "backward";
    case HeteroMode::kCurrents: return "currents";
  }
  return "none";
}

std::vector<double> ScanConfig::grid() const {
  if (points < 2) throw ConfigError("scan.points must be at least 2");
  if (from == to) throw ConfigError("scan.from and scan.to must differ");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i) {
    g[i] = from + (to - from) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return g;
}

CouplingStrengths RunConfig::couplings() const {
  if (c) {
    CouplingStrengths s;
    s.c = *c;
    s.validate();
    return s;
  }
  if (alpha) return CouplingStrengths::from_alpha(*alpha, c_contra);
  if (example_couplings) return CouplingStrengths::example_balanced();
  throw ConfigError("this command needs couplings.c, couplings.alpha or couplings.preset");
}

RunConfig parse_config(const std::string& text, bool strict) {
  json root;
  try {
    root = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  {
    Section top(root, "", cfg.unknown_keys);
    if (top.has("neuron")) {
      Section s(top.at("neuron"), "neuron", cfg.unknown_keys);
      for (const auto& [name, field] : kNeuronFields) s.number(name, cfg.neuron.*field);
    }
    if (top.has("couplings")) {
      Section s(top.at("couplings"), "couplings", cfg.unknown_keys);
      int given = 0;
      if (s.has("c")) {
        const auto v = s.numbers("c", 7);
        std::array<double, 7> a{};
        std::copy(v.begin(), v.end(), a.begin());
        cfg.c = a;
        ++given;
      }
      if (s.has("alpha")) {
        double a = 0.0;
        s.number("alpha", a);
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("'couplings.alpha' must lie in (0, 1)");
        cfg.alpha = a;
        ++given;
      }
      if (s.has("preset")) {
        std::string p;
        s.text("preset", p);
        if (p != "example") throw ConfigError("'couplings.preset' only knows 'example'");
        cfg.example_couplings = true;
        ++given;
      }
      s.number("c_contra", cfg.c_contra);
      if (given > 1) throw ConfigError("give exactly one of couplings.c, couplings.alpha, couplings.preset");
    }
    if (top.has("heterogeneity")) {
      Section s(top.at("heterogeneity"), "heterogeneity", cfg.unknown_keys);
      std::string mode = "none";
      s.text("mode", mode);
      cfg.hetero = parse_mode(mode);
      s.number("delta_i", cfg.delta_i);
      if (s.has("currents")) {
        const auto v = s.numbers("currents", 6);
        std::copy(v.begin(), v.end(), cfg.currents.begin());
        if (cfg.hetero != HeteroMode::kCurrents) {
          throw ConfigError("'heterogeneity.currents' needs mode 'currents'");
        }
      }
      if (cfg.hetero == HeteroMode::kCurrents && cfg.delta_i != 0.0) {
        throw ConfigError("'heterogeneity.delta_i' does not apply in mode 'currents'");
      }
    }
    if (top.has("scan")) {
      Section s(top.at("scan"), "scan", cfg.unknown_keys);
      cfg.scan_given = true;
      s.text("parameter", cfg.scan.parameter);
      if (cfg.scan.parameter != "delta_i" && cfg.scan.parameter != "alpha" && cfg.scan.parameter != "i_ext") {
        throw ConfigError("'scan.parameter' must be delta_i, alpha or i_ext");
      }
      s.number("from", cfg.scan.from);
      s.number("to", cfg.scan.to);
      s.count("points", cfg.scan.points);
      cfg.scan.grid();  // rejects a degenerate range up front
    }
    if (top.has("seed_point")) {
      const auto v = top.numbers("seed_point", 2);
      cfg.seed_point = std::array<double, 2>{v[0], v[1]};
    }
    if (top.has("grids")) {
      Section s(top.at("grids"), "grids", cfg.unknown_keys);
      s.count("orbit", cfg.orbit_grid);
      s.count("census", cfg.census_grid);
      s.count("nullcline", cfg.nullcline_grid);
      s.count("prc_phases", cfg.prc_phases);
    }
    if (top.has("prc")) {
      Section s(top.at("prc"), "prc", cfg.unknown_keys);
      s.number("kick", cfg.prc_kick);
    }
    if (top.has("tolerances")) {
      Section s(top.at("tolerances"), "tolerances", cfg.unknown_keys);
      s.number("rel", cfg.rel_tol);
      s.number("abs", cfg.abs_tol);
      if (!(cfg.rel_tol > 0.0 && cfg.abs_tol > 0.0)) throw ConfigError("tolerances must be positive");
    }
    if (top.has("simulation")) {
      Section s(top.at("simulation"), "simulation", cfg.unknown_keys);
      s.number("duration", cfg.simulate_duration);
      s.number("transient", cfg.simulate_transient);
      s.text("initial_gait", cfg.initial_gait);
      if (!(cfg.simulate_duration > cfg.simulate_transient && cfg.simulate_transient >= 0.0)) {
        throw ConfigError("simulation.duration must exceed simulation.transient >= 0");
      }
    }
    if (top.has("coupling_override")) {
      Section s(top.at("coupling_override"), "coupling_override", cfg.unknown_keys);
      FourierCoupling f;
      s.number("mean", f.mean);
      if (s.has("cos")) f.cos = s.numbers("cos");
      if (s.has("sin")) f.sin = s.numbers("sin");
      s.number("zbar", f.zbar);
      s.count("points", f.points);
      if (!(f.zbar > 0.0)) throw ConfigError("'coupling_override.zbar' must be positive");
      cfg.coupling_override = f;
    }
    if (top.has("output")) {
      Section s(top.at("output"), "output", cfg.unknown_keys);
      s.text("dir", cfg.out_dir);
      s.flag("svg", cfg.svg);
    }
    if (top.has("seed")) {
      if (!top.at("seed").is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
      cfg.seed = top.at("seed").get<std::uint64_t>();
    }
  }
  cfg.neuron.validate();
  if (strict && !cfg.unknown_keys.empty()) {
    std::string list;
    for (const auto& k : cfg.unknown_keys) list += (list.empty() ? "" : ", ") + k;
    throw ConfigError("unknown config keys: " + list);
  }
  return cfg;
}

RunConfig load_config(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_config(s.str(), strict);
}

std::string config_json(const RunConfig& cfg) {
  json j;
  json n = json::object();
  for (const auto& [name, field] : kNeuronFields) n[name] = cfg.neuron.*field;
  j["neuron"] = n;
  json c = json::object();
  if (cfg.c) c["c"] = *cfg.c;
  if (cfg.alpha) c["alpha"] = *cfg.alpha;
  if (cfg.example_couplings) c["preset"] = "example";
  c["c_contra"] = cfg.c_contra;
  j["couplings"] = c;
  // only the fields the mode accepts, so the dump loads back
  j["heterogeneity"] = {{"mode", to_string(cfg.hetero)}};
  if (cfg.hetero == HeteroMode::kCurrents) {
    j["heterogeneity"]["currents"] = cfg.currents;
  } else {
    j["heterogeneity"]["delta_i"] = cfg.delta_i;
  }
  j["scan"] = {{"parameter", cfg.scan.parameter}, {"from", cfg.scan.from}, {"to", cfg.scan.to},
               {"points", cfg.scan.points}};
  if (cfg.seed_point) j["seed_point"] = *cfg.seed_point;
  j["grids"] = {{"orbit", cfg.orbit_grid},
                {"census", cfg.census_grid},
                {"nullcline", cfg.nullcline_grid},
                {"prc_phases", cfg.prc_phases}};
  j["prc"] = {{"kick", cfg.prc_kick}};
  j["tolerances"] = {{"rel", cfg.rel_tol}, {"abs", cfg.abs_tol}};
  j["simulation"] = {{"duration", cfg.simulate_duration},
                     {"transient", cfg.simulate_transient},
                     {"initial_gait", cfg.initial_gait}};
  if (cfg.coupling_override) {
    const auto& f = *cfg.coupling_override;
    j["coupling_override"] = {{"mean", f.mean}, {"cos", f.cos}, {"sin", f.sin}, {"zbar", f.zbar}, {"points", f.points}};
  }
  j["output"] = {{"dir", cfg.out_dir}, {"svg", cfg.svg}};
  j["seed"] = cfg.seed;
  return j.dump(2);
}

}  // namespace cpgait

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>

#include "common.hpp"
#include "cpgait/csv.hpp"
#include "cpgait/error.hpp"
#include "cpgait/parallel.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bursting-neuron CPG: phase reduction and gait selection on the torus"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir;
  std::size_t threads = 0;
  bool deterministic = false, strict = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", threads, "worker threads for sweeps (0: all cores)");
  app.add_flag("--deterministic", deterministic, "no timestamps in outputs");
  app.add_flag("--strict", strict, "reject unknown config keys");

  struct Verb {
    const char* name;
    const char* help;
    cli::Command fn;
  };
  const Verb verbs[] = {
      {"limit-cycle", "bursting orbit at the configured I_ext", cli::limit_cycle},
      {"prc", "adjoint iPRC with a direct-kick cross-check", cli::prc},
      {"coupling-fn", "coupling function H and its derivatives", cli::coupling_fn},
      {"eta", "transition offset eta and alpha bounds", cli::eta},
      {"torus-census", "fixed points of the phase-difference field", cli::torus_census},
      {"nullclines", "zero contours of the phase-difference field", cli::nullclines},
      {"sweep", "census along the scan parameter with fold localization", cli::sweep},
      {"branch", "continuation of one fixed point along the scan parameter", cli::branch},
      {"simulate-network", "24-variable network simulation and phase extraction", cli::simulate_network},
      {"equivalence", "coupling-function and coupling-strength equivalents of the currents", cli::equivalence},
  };
  std::vector<std::pair<CLI::App*, cli::Command>> subs;
  for (const auto& v : verbs) subs.emplace_back(app.add_subcommand(v.name, v.help), v.fn);
  int figure = 0;
  CLI::App* fig = app.add_subcommand("reproduce-figure", "recompute one of the figures (1, 3 to 11)");
  fig->add_option("n", figure, "figure number")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  cli::Context ctx;
  ctx.deterministic = deterministic;
  ctx.threads = threads == 0 ? cpgait::hardware_threads() : threads;
  std::string command;
  for (auto* s : app.get_subcommands()) command = s->get_name();
  if (command == "reproduce-figure") command += " " + std::to_string(figure);

  nlohmann::json manifest = {{"command", command}, {"version", kVersion}};
  int code = 0;
  try {
    ctx.cfg = config_path.empty() ? cpgait::parse_config("", strict) : cpgait::load_config(config_path, strict);
    for (const auto& k : ctx.cfg.unknown_keys) ctx.warn("ignoring unknown config key '" + k + "'");
    if (!out_dir.empty()) ctx.cfg.out_dir = out_dir;
    ctx.out = ctx.cfg.out_dir;
    std::filesystem::create_directories(ctx.out);
    const std::string resolved = cpgait::config_json(ctx.cfg);
    manifest["config"] = nlohmann::json::parse(resolved);
    manifest["config_hash"] = fnv1a(resolved);
    if (fig->parsed()) {
      code = cli::reproduce_figure(ctx, figure);
    } else {
      for (auto& [sub, fn] : subs) {
        if (sub->parsed()) code = fn(ctx);
      }
    }
    manifest["status"] = code == 0 ? "ok" : "numerical-error";
  } catch (const cpgait::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    manifest["status"] = "config-error";
    manifest["error"] = e.what();
    code = 2;
  } catch (const cpgait::NumericalError& e) {
    std::cerr << "numerical error [" << e.module() << ", " << cpgait::to_string(e.reason()) << "]: " << e.what()
              << '\n';
    manifest["status"] = "numerical-error";
    manifest["error"] = e.what();
    manifest["error_module"] = e.module();
    manifest["error_reason"] = cpgait::to_string(e.reason());
    code = 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    manifest["status"] = "error";
    manifest["error"] = e.what();
    code = 1;
  }
  manifest["exit_code"] = code;
  manifest["outputs"] = ctx.outputs;
  manifest["warnings"] = ctx.warnings;
  manifest["summary"] = ctx.summary;
  manifest["threads"] = ctx.threads;
  manifest["deterministic"] = deterministic;
  manifest["versions"] = {{"cpgait", kVersion},
                          {"compiler", __VERSION__},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"boost", BOOST_LIB_VERSION}};
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!ctx.out.empty() && std::filesystem::is_directory(ctx.out)) {
    try {
      cpgait::csv::write_atomic((ctx.out / "manifest.json").string(), manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
      std::cerr << "error: cannot write manifest: " << e.what() << '\n';
    }
  }
  if (code == 0) std::cout << manifest["summary"].dump(2) << '\n';
  return code;
}

#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "cpgait/bifurcation.hpp"
#include "cpgait/config.hpp"
#include "cpgait/torus.hpp"

namespace cli {

struct Context {
  cpgait::RunConfig cfg;
  std::filesystem::path out;
  bool deterministic = false;
  std::size_t threads = 1;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  nlohmann::json summary = nlohmann::json::object();

  /// Path inside the output directory, recorded in the manifest.
  std::string file(const std::string& name);
  void warn(const std::string& msg);
};

using Command = int (*)(Context&);

int limit_cycle(Context& ctx);
int prc(Context& ctx);
int coupling_fn(Context& ctx);
int eta(Context& ctx);
int torus_census(Context& ctx);
int nullclines(Context& ctx);
int sweep(Context& ctx);
int branch(Context& ctx);
int simulate_network(Context& ctx);
int equivalence(Context& ctx);
int reproduce_figure(Context& ctx, int figure);

// shared plotting helpers
void nullcline_plot(Context& ctx, const cpgait::TorusField& f, const cpgait::Census& c, const std::string& title,
                    const std::string& name);
void sweep_plot(Context& ctx, const cpgait::SweepResult& r, const std::string& title, const std::string& name);
nlohmann::json census_json(const cpgait::Census& c);
nlohmann::json sweep_json(const cpgait::SweepResult& r);
void write_events_jsonl(Context& ctx, const cpgait::SweepResult& r, const std::string& name);

}  // namespace cli

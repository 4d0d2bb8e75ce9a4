#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bcplab/harness.hpp"

namespace {

using bcplab::harness::json;

struct Output {
  std::string path;
  std::string format = "json";
  unsigned jobs = 1;
};

unsigned resolve_jobs(unsigned requested) {
  if (const char* env = std::getenv("BCPLAB_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v < 1) throw std::invalid_argument("jobs");
      return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw bcplab::ConfigError("BCPLAB_JOBS must be a positive integer");
    }
  }
  if (requested == 0) return std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

int execute(const bcplab::harness::ScenarioConfig& cfg, const Output& out) {
  const auto report = bcplab::harness::run_scenario(cfg, resolve_jobs(out.jobs));
  std::string text = out.format == "csv" ? bcplab::harness::to_csv(report)
                                         : bcplab::harness::to_json(report).dump(2) + "\n";
  if (out.path.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out.path);
    if (!f) throw bcplab::Error("cannot write " + out.path);
    f << text;
  }
  std::cerr << cfg.scenario << ": " << bcplab::harness::to_string(report.verdict) << " (" << report.successes << "/"
            << report.trials.size() << " trials certified)";
  if (!report.message.empty()) std::cerr << " " << report.message;
  std::cerr << "\n";
  return bcplab::harness::exit_code(report.verdict);
}

bcplab::harness::ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw bcplab::ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw bcplab::ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return bcplab::harness::config_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ball-covering laboratory: build, certify and falsify unit-sphere coverings"};
  app.require_subcommand(1);

  Output out;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--out", out.path, "write the report here instead of stdout");
    cmd->add_option("--format", out.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--jobs", out.jobs, "worker threads (0 = all cores; BCPLAB_JOBS overrides)");
  };

  auto* run = app.add_subcommand("run", "run a scenario from a JSON config");
  run->add_option("--config", config_path, "scenario config file")->required();
  add_common(run);

  std::string preset_name;
  std::string space_out;
  for (const char* name : {"topology", "ck", "op", "transfer"}) {
    auto* cmd = app.add_subcommand(name, std::string("preset ") + name + " scenario");
    add_common(cmd);
    cmd->callback([&preset_name, name] { preset_name = name; });
    if (std::string(name) == "topology")
      cmd->add_option("--space-out", space_out, "also write the space as 'points: n' plus hex open sets");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = preset_name.empty() ? load_config(config_path) : bcplab::harness::preset(preset_name);
    if (seed) cfg.seed = *seed;
    if (!space_out.empty()) {
      const auto& P = cfg.params;
      const auto space = bcplab::topology::build_finite_space(
          P.at("space").get<std::string>(), {{"N", P.at("N").get<int>()}, {"m", P.at("m").get<int>()}});
      std::ofstream f(space_out);
      if (!f) throw bcplab::Error("cannot write " + space_out);
      bcplab::topology::write_space(f, space);
    }
    return execute(cfg, out);
  } catch (const bcplab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

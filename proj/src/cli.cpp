#include "qkdfs/cli.hpp"

#include "qkdfs/checks.hpp"
#include "qkdfs/error.hpp"
#include "qkdfs/phasetime.hpp"
#include "qkdfs/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qkdfs::cli {

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> rounds;
  std::optional<double> eta;
  std::string format;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "scenario file (INI sections)");
  cmd->add_option("--set", c.sets, "override, section.key=value (repeatable)");
  cmd->add_option("-o,--out", c.out, "output file (default stdout)");
  cmd->add_option("-w,--workers", c.workers, "worker threads, 1 = serial reference, 0 = all");
  cmd->add_option("-s,--seed", c.seed, "seed (default: QKDFS_SEED or 0)");
  cmd->add_option("-n,--rounds", c.rounds, "rounds, frames or pairs");
  cmd->add_option("--eta", c.eta, "symmetric mismatch ratio");
  cmd->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

scenario::Settings settings_for(const Common& c, const std::string& protocol) {
  scenario::Settings s = c.config.empty() ? scenario::Settings{} : scenario::read_settings_file(c.config);
  for (const auto& a : c.sets) scenario::apply_override(s, a);
  if (!protocol.empty()) s.put("scenario.protocol", protocol);
  if (c.workers) s.put("scenario.workers", std::to_string(*c.workers));
  if (c.seed) s.put("scenario.seed", std::to_string(*c.seed));
  if (c.rounds) s.put("scenario.rounds", std::to_string(*c.rounds));
  if (c.eta) {
    for (const char* k : {"detectors.eta0_t0", "detectors.eta0_t1", "detectors.eta1_t0", "detectors.eta1_t1"}) {
      if (auto child = s.get_child_optional("detectors")) child->erase(std::string(k).substr(10));
    }
    s.put("detectors.eta", fmt::format("{}", *c.eta));
  }
  if (!c.format.empty()) s.put("scenario.format", c.format);
  return s;
}

// Writes to --out when given, else to `out`.
template <class Fn>
void emit(const std::string& path, std::ostream& out, Fn&& fn) {
  if (path.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("--out", fmt::format("cannot write '{}'", path));
  fn(file);
}

void write_histogram(std::ostream& out, const phasetime::SlotHistogram& h) {
  out << "slot_label,port,clicks\n";
  for (int slot = phasetime::kFirstSlot; slot <= phasetime::kLastSlot; ++slot) {
    for (const auto port : {interferometry::Port::d0, interferometry::Port::d1}) {
      out << fmt::format("{},{},{}\n", phasetime::slot_label(slot), port == interferometry::Port::d0 ? "d0" : "d1",
                         h.at(slot, port));
    }
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Faked-states attacks on QKD with detector efficiency mismatch", "qkdfs"};
  app.require_subcommand(1, 1);

  std::vector<std::pair<std::string, Common>> protocols{
      {"bb84", {}}, {"sarg04", {}}, {"phasetime", {}}, {"dpsk", {}}, {"ekert", {}}};
  std::vector<CLI::App*> protocol_cmds;
  std::string histogram_path;
  std::string report_path;
  for (auto& [name, common] : protocols) {
    auto* cmd = app.add_subcommand(name, fmt::format("simulate the {} attack scenario", name));
    add_common(cmd, common);
    if (name == "phasetime") cmd->add_option("--histogram", histogram_path, "write per-slot click histogram CSV");
    if (name == "ekert") cmd->add_option("--report", report_path, "write per-pair side-effect CSV");
    protocol_cmds.push_back(cmd);
  }

  Common sweep_common;
  std::string sweep_protocol;
  std::string sweep_param;
  double sweep_from = 0.0;
  double sweep_to = 0.0;
  std::size_t sweep_steps = 0;
  auto* sweep = app.add_subcommand("sweep", "run one scenario over a parameter grid, CSV per point");
  add_common(sweep, sweep_common);
  sweep->add_option("-p,--protocol", sweep_protocol, "protocol")
      ->required()
      ->check(CLI::IsMember({"bb84", "sarg04", "phasetime", "dpsk", "ekert"}));
  sweep->add_option("--param", sweep_param, "eta, mu, eve_efficiency or p_beta")->required();
  sweep->add_option("--from", sweep_from, "first value")->required();
  sweep->add_option("--to", sweep_to, "last value")->required();
  sweep->add_option("--steps", sweep_steps, "number of points")->required()->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "check closed forms against the enumeration oracles");
  auto* tables = app.add_subcommand("tables", "print the reference threshold and mixture numbers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (verify->parsed()) {
      return checks::print_checks(out, checks::run_all()) ? 0 : 1;
    }
    if (tables->parsed()) {
      checks::print_tables(out);
      return 0;
    }
    if (sweep->parsed()) {
      auto s = settings_for(sweep_common, sweep_protocol);
      s.put("sweep.param", sweep_param);
      s.put("sweep.from", fmt::format("{}", sweep_from));
      s.put("sweep.to", fmt::format("{}", sweep_to));
      s.put("sweep.steps", std::to_string(sweep_steps));
      const auto cfg = scenario::parse(s);
      const auto records = scenario::run(cfg);
      emit(sweep_common.out, out, [&](std::ostream& o) { scenario::write(o, records, cfg.format); });
      return 0;
    }
    for (std::size_t i = 0; i < protocols.size(); ++i) {
      if (!protocol_cmds[i]->parsed()) continue;
      const auto& [name, common] = protocols[i];
      const auto cfg = scenario::parse(settings_for(common, name));
      const auto records = scenario::run(cfg);
      emit(common.out, out, [&](std::ostream& o) { scenario::write(o, records, cfg.format); });
      if (!histogram_path.empty()) {
        if (cfg.sweep) throw ConfigError("--histogram", "not available for sweeps");
        const auto res = phasetime::simulate(cfg.rounds, scenario::phasetime_config(cfg), {cfg.seed, cfg.workers});
        emit(histogram_path, out, [&](std::ostream& o) { write_histogram(o, res.histogram); });
      }
      if (!report_path.empty()) {
        const auto report =
            ekert::side_effects_report(cfg.attack ? std::optional(cfg.weights) : std::nullopt, cfg.normalization);
        emit(report_path, out, [&](std::ostream& o) { ekert::write_side_effects_csv(o, report); });
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace qkdfs::cli

#include "edgesim/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "edgesim/compliance.hpp"
#include "edgesim/config_io.hpp"
#include "edgesim/radio.hpp"
#include "edgesim/sim.hpp"

namespace edgesim::cli {

namespace fs = std::filesystem;

namespace {

struct Invocation {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format = "text";
  bool force = false;
  std::optional<double> ul_demand_bps;
  std::optional<double> dl_demand_bps;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ValidatedScenario load(const Invocation& inv, bool config_required) {
  if (inv.config_path.empty() && config_required) throw UsageError("--config is required");
  ScenarioConfig config = inv.config_path.empty() ? ScenarioConfig{} : load_scenario(inv.config_path);
  if (inv.seed) config.seed = *inv.seed;
  return validate_scenario(config);
}

fs::path output_dir(const Invocation& inv) {
  if (!inv.out_dir.empty()) return inv.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return kDefaultOutDir;
}

// Refuses to clobber existing files unless --force; creates the directory.
void prepare_outputs(const fs::path& dir, std::initializer_list<const char*> names, bool force) {
  if (!force) {
    for (const char* name : names) {
      if (fs::exists(dir / name)) {
        throw UsageError(fmt::format("{} exists; pass --force to overwrite", (dir / name).string()));
      }
    }
  }
  fs::create_directories(dir);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

std::string report_csv(const compliance::ComplianceReport& report) {
  std::string out = "name,comparison,required,required_hi,measured,unit,pass,note\n";
  for (const auto& e : report.entries) {
    out += fmt::format("{},{},{},{},{},{},{},\"{}\"\n", e.name, compliance::to_string(e.comparison),
                       e.required, e.required_hi ? fmt::format("{}", *e.required_hi) : "",
                       e.measured ? fmt::format("{}", *e.measured) : "", e.unit, e.pass ? 1 : 0,
                       e.note);
  }
  return out;
}

std::string render_report(const compliance::ComplianceReport& report, const std::string& format) {
  return format == "csv" ? report_csv(report) : compliance::render_text(report);
}

int cmd_run(const Invocation& inv, std::ostream& out) {
  const auto scenario = load(inv, true);
  const fs::path dir = output_dir(inv);
  prepare_outputs(dir,
                  {"frames.csv", "emergencies.csv", "summary.json", "compliance.json",
                   "compliance.txt"},
                  inv.force);

  const auto metrics = sim::simulate(scenario);
  const auto report = compliance::check(metrics, scenario, default_requirements());

  std::ostringstream frames;
  sim::write_frame_csv(frames, metrics);
  write_file(dir / "frames.csv", frames.str());
  std::ostringstream emergencies;
  sim::write_emergency_csv(emergencies, metrics);
  write_file(dir / "emergencies.csv", emergencies.str());
  write_file(dir / "summary.json", sim::summary_json(metrics).dump(2) + "\n");
  write_file(dir / "compliance.json", compliance::report_json(report).dump(2) + "\n");
  write_file(dir / "compliance.txt", compliance::render_text(report));

  out << render_report(report, inv.format);
  return report.overall_pass ? kExitOk : kExitNonCompliant;
}

int cmd_sweep(const Invocation& inv, std::ostream& out) {
  const auto scenario = load(inv, true);
  const int unassigned = scenario->pattern.unassigned_slots;
  const auto rows = compliance::sweep_tdd(scenario->radio, unassigned);
  const fs::path dir = output_dir(inv);
  prepare_outputs(dir, {"sweep.csv"}, inv.force);

  std::ostringstream csv;
  compliance::write_sweep_csv(csv, rows, unassigned);
  write_file(dir / "sweep.csv", csv.str());

  if (inv.format == "csv") {
    out << csv.str();
  } else {
    out << fmt::format("{:>8} {:>8} {:>12} {:>12}\n", "dl_slots", "ul_slots", "DL Mbps", "UL Mbps");
    for (const auto& r : rows) {
      out << fmt::format("{:>8} {:>8} {:>12.3f} {:>12.3f}\n", r.dl_slots, r.ul_slots, r.dl_bps / 1e6,
                         r.ul_bps / 1e6);
    }
  }
  return kExitOk;
}

int cmd_optimize(const Invocation& inv, std::ostream& out) {
  const auto scenario = load(inv, false);
  const double ul = inv.ul_demand_bps.value_or(compliance::offered_ul_bps(scenario.config()));
  const double dl = inv.dl_demand_bps.value_or(compliance::offered_dl_bps(scenario.config()));
  const int unassigned = scenario->pattern.unassigned_slots;
  const auto pattern = compliance::optimize_tdd(scenario->radio, ul, dl, unassigned);

  if (inv.format == "csv") {
    out << "feasible,dl_slots,ul_slots,unassigned_slots,ul_demand_bps,dl_demand_bps\n";
    if (pattern) {
      out << fmt::format("1,{},{},{},{:.3f},{:.3f}\n", pattern->dl_slots, pattern->ul_slots,
                         pattern->unassigned_slots, ul, dl);
    } else {
      out << fmt::format("0,,,{},{:.3f},{:.3f}\n", unassigned, ul, dl);
    }
  } else if (pattern) {
    out << fmt::format("dl_slots={} ul_slots={} unassigned_slots={} (UL demand {:.3f} Mbps, DL demand {:.3f} Mbps)\n",
                       pattern->dl_slots, pattern->ul_slots, pattern->unassigned_slots, ul / 1e6,
                       dl / 1e6);
  } else {
    out << fmt::format("Infeasible: no split of {} usable slots carries UL {:.3f} Mbps and DL {:.3f} Mbps\n",
                       kSlotsPerFrame - unassigned, ul / 1e6, dl / 1e6);
  }
  return kExitOk;
}

int cmd_check_table1(const Invocation& inv, std::ostream& out) {
  const auto scenario = load(inv, false);
  const auto report = compliance::check_static(scenario, default_requirements());
  out << render_report(report, inv.format);
  return report.overall_pass ? kExitOk : kExitNonCompliant;
}

int cmd_validate(const Invocation& inv, std::ostream& out) {
  const auto scenario = load(inv, false);
  out << fmt::format("valid (scenario {:016x})\n", scenario.fingerprint());
  return kExitOk;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Edge-AI welding cell perception loop over a 5G TDD link", "edgesim"};
  app.require_subcommand(1);

  Invocation inv;
  auto add_common = [&inv](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "Scenario config (JSON)");
    sub->add_option("--out", inv.out_dir, "Output directory");
    sub->add_option("--seed", inv.seed, "Override the scenario seed");
    sub->add_option("--format", inv.format, "Stdout format")->check(CLI::IsMember({"csv", "text"}));
    sub->add_flag("--force", inv.force, "Overwrite existing output files");
  };

  auto* run = app.add_subcommand("run", "Simulate and check the scenario");
  auto* sweep = app.add_subcommand("sweep", "Capacity for every DL/UL slot split");
  auto* optimize = app.add_subcommand("optimize", "Choose a slot split for the offered demand");
  auto* table1 = app.add_subcommand("check-table1", "Static requirement check, no simulation");
  auto* validate = app.add_subcommand("validate", "Validate a scenario config");
  for (auto* sub : {run, sweep, optimize, table1, validate}) add_common(sub);
  optimize->add_option("--ul-demand", inv.ul_demand_bps, "Uplink demand, bit/s");
  optimize->add_option("--dl-demand", inv.dl_demand_bps, "Downlink demand, bit/s");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(inv, out);
    if (sweep->parsed()) return cmd_sweep(inv, out);
    if (optimize->parsed()) return cmd_optimize(inv, out);
    if (table1->parsed()) return cmd_check_table1(inv, out);
    return cmd_validate(inv, out);
  } catch (const InvalidConfig& e) {
    err << "error: " << e.what() << '\n';
  } catch (const radio::UnsupportedBandwidth& e) {
    err << "error: radio.bandwidth_mhz: " << e.what() << '\n';
  } catch (const radio::ZeroCapacity& e) {
    err << "error: pattern: " << e.what() << '\n';
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace edgesim::cli

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tsm/adjusters.hpp"
#include "tsm/harness.hpp"
#include "tsm/records_io.hpp"
#include "tsm/scenario_io.hpp"

namespace tsm::cli {

namespace {

struct Options {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
  std::string format = "csv";
  std::optional<double> pi2;
  int R = 2000;
  std::string methods = "all";
  std::string data;
  std::string cuts;
  std::optional<double> readout;
  std::optional<int> draws;
  std::optional<int> bootstrap;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_cuts(const std::string& text) {
  std::vector<double> cuts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      cuts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--cuts: '" + item + "' is not a number");
    }
  }
  return cuts;
}

CrossoverScenario scenario_from(const Options& o) {
  if (o.scenario.empty()) throw UsageError("--scenario is required");
  CrossoverScenario sc = load_scenario(o.scenario);
  if (o.pi2) sc.pi2 = *o.pi2;
  if (o.seed) sc.seed = *o.seed;
  sc.validate();
  return sc;
}

AdjusterConfig adjusters_from(const Options& o) {
  AdjusterConfig cfg;
  if (!o.cuts.empty()) cfg.bimm.cuts = parse_cuts(o.cuts);
  if (o.draws) cfg.bimm.draws = *o.draws;
  if (o.bootstrap) cfg.tsaft.bootstrap = *o.bootstrap;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty() || o.out == "-") {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + o.out + "'");
  f << text;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const CrossoverScenario sc = scenario_from(o);
  const auto records = simulate_trial(sc);
  if (o.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
      nlohmann::json j;
      j["id"] = r.id;
      j["arm"] = r.arm == Arm::Treatment ? "treatment" : "control";
      j["entry"] = r.entry;
      j["time"] = r.time;
      j["event"] = r.event;
      j["crossed"] = r.crossed;
      j["cross_time"] = r.crossed ? nlohmann::json(r.cross_time) : nlohmann::json(nullptr);
      j["switched"] = r.switched;
      arr.push_back(std::move(j));
    }
    emit(o, arr.dump(2) + "\n", out);
  } else {
    emit(o, records_csv(records), out);
  }
  return kOk;
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.data.empty()) throw UsageError("estimate needs a dataset (--data <csv>)");
  std::ifstream in(o.data);
  if (!in) throw UsageError("cannot open '" + o.data + "'");
  std::vector<PatientRecord> records = read_records_csv(in);
  if (records.empty()) throw UsageError("dataset has no rows");

  double readout = 0.0;
  if (o.readout) {
    readout = *o.readout;
  } else if (!o.scenario.empty()) {
    readout = scenario_from(o).readout_time;
  } else {
    for (const auto& r : records) readout = std::max(readout, r.entry + r.time);
  }
  set_admin_times(records, readout);

  const AdjusterConfig cfg = adjusters_from(o);
  std::vector<MethodId> methods;
  try {
    methods = parse_methods(o.methods);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::uint64_t seed = o.seed.value_or(1);

  std::string text;
  nlohmann::json rows = nlohmann::json::array();
  if (o.format == "csv") text = "method,beta,se,hr,ci_lo,ci_hi,converged\n";
  int failures = 0;
  for (const MethodId m : methods) {
    const std::string name(method_name(m));
    try {
      const FitResult f = estimate(m, records, cfg, derive_seed(seed, static_cast<std::uint64_t>(m)));
      const double b = f.beta[0], s = f.se[0];
      if (o.format == "csv") {
        text += fmt::format("{},{},{},{},{},{},{}\n", name, b, s, std::exp(b),
                            std::exp(f.ci_lower()), std::exp(f.ci_upper()),
                            f.converged ? "true" : "false");
      } else {
        rows.push_back({{"method", name},
                        {"beta", b},
                        {"se", s},
                        {"hr", std::exp(b)},
                        {"ci_lo", std::exp(f.ci_lower())},
                        {"ci_hi", std::exp(f.ci_upper())},
                        {"converged", f.converged},
                        {"info", f.info}});
      }
    } catch (const std::exception& e) {
      ++failures;
      err << name << ": " << e.what() << "\n";
      if (o.format == "csv") {
        text += name + ",NA,NA,NA,NA,NA,false\n";
      } else {
        rows.push_back({{"method", name}, {"converged", false}, {"error", e.what()}});
      }
    }
  }
  if (o.format == "json") text = rows.dump(2) + "\n";
  emit(o, text, out);
  return failures == static_cast<int>(methods.size()) ? kNumerical : kOk;
}

int cmd_replicate(const Options& o, std::ostream& out) {
  if (o.R < 1) throw UsageError("--R must be at least 1");
  const CrossoverScenario sc = scenario_from(o);
  std::vector<MethodId> methods;
  try {
    methods = parse_methods(o.methods);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  RunOptions ro;
  ro.threads = o.threads;
  ro.adjusters = adjusters_from(o);
  const auto report = run_replications(sc, methods, o.R, sc.seed, ro);
  emit(o, o.format == "json" ? report_json(report) + "\n" : report_csv(report), out);
  return kOk;
}

int cmd_design(const Options& o, std::ostream& out) {
  if (o.R < 1) throw UsageError("--R must be at least 1");
  const CrossoverScenario sc = scenario_from(o);
  const DesignSummary d = design_summary(sc, o.R, sc.seed, o.threads);
  std::string text;
  if (o.format == "json") {
    nlohmann::json j{{"scenario", sc.name},     {"pi2", sc.pi2},
                     {"R", o.R},                {"working_hr", d.working_hr},
                     {"hr_no_crossover", d.hr_no_crossover},
                     {"power", d.power},        {"censoring", d.censoring}};
    text = j.dump(2) + "\n";
  } else {
    text = "scenario,pi2,R,working_hr,hr_no_crossover,power,censoring\n";
    text += fmt::format("{},{},{},{},{},{},{}\n", sc.name, sc.pi2, o.R, d.working_hr,
                        d.hr_no_crossover, d.power, d.censoring);
  }
  emit(o, text, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-state crossover trial simulation and adjustment"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--scenario", o.scenario, "Preset name or scenario file");
  app.add_option("--seed", o.seed, "Random seed (unsigned 64-bit)");
  app.add_option("--out", o.out, "Output path (default: stdout)");
  app.add_option("--threads", o.threads, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  auto* sim = app.add_subcommand("simulate", "Simulate one trial and write patient records");
  sim->add_option("--pi2", o.pi2, "Switching probability at the crossover event");

  auto* est = app.add_subcommand("estimate", "Apply adjustment methods to a patient CSV");
  est->add_option("--data,data", o.data, "Patient CSV")->required();
  est->add_option("--methods", o.methods, "Comma-separated methods or 'all'");
  est->add_option("--cuts", o.cuts, "BIMM cut points, e.g. 0,1,2,3,4");
  est->add_option("--readout", o.readout, "Analysis time on the accrual clock");
  est->add_option("--draws", o.draws, "BIMM posterior draws");
  est->add_option("--bootstrap", o.bootstrap, "TSAFT bootstrap replicates");

  auto* rep = app.add_subcommand("replicate", "Monte Carlo replication study");
  rep->add_option("--pi2", o.pi2, "Switching probability at the crossover event");
  rep->add_option("--R", o.R, "Number of replications");
  rep->add_option("--methods", o.methods, "Comma-separated methods or 'all'");
  rep->add_option("--cuts", o.cuts, "BIMM cut points");
  rep->add_option("--draws", o.draws, "BIMM posterior draws");
  rep->add_option("--bootstrap", o.bootstrap, "TSAFT bootstrap replicates");

  auto* des = app.add_subcommand("design", "Working HR, power and censoring summary");
  des->add_option("--pi2", o.pi2, "Switching probability at the crossover event");
  des->add_option("--R", o.R, "Replications for power and censoring");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*sim) return cmd_simulate(o, out);
    if (*est) return cmd_estimate(o, out, err);
    if (*rep) return cmd_replicate(o, out);
    if (*des) return cmd_design(o, out);
  } catch (const ScenarioParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const RecordsFormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace tsm::cli

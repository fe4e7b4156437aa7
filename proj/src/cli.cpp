#include "phk/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "phk/evalues.hpp"
#include "phk/filters.hpp"
#include "phk/io.hpp"
#include "phk/simulate.hpp"

namespace phk {

namespace {

std::string check_open_level(const std::string& value) {
  double v = std::stod(value);
  if (!(v > 0.0 && v <= 1.0)) return "must be in (0, 1]";
  return {};
}

std::string check_closed_level(const std::string& value) {
  double v = std::stod(value);
  if (!(v >= 0.0 && v <= 1.0)) return "must be in [0, 1]";
  return {};
}

std::string check_methods(const std::string& value) {
  std::istringstream ss(value);
  std::string tok;
  int count = 0;
  while (std::getline(ss, tok, ',')) {
    auto m = method_from_string(tok);
    if (!m || *m == Method::pfer) return "unknown simulate method '" + tok + "'";
    ++count;
  }
  if (count == 0) return "needs at least one method";
  return {};
}

std::vector<Method> parse_methods(const std::string& value) {
  std::vector<Method> out;
  std::istringstream ss(value);
  std::string tok;
  while (std::getline(ss, tok, ','))
    out.push_back(*method_from_string(tok));
  return out;
}

// Loads per-run statistics from one or more CSV files; every (file, run_id)
// group becomes one run, re-numbered in order.
std::vector<WStatistics> load_runs(const std::vector<std::string>& paths) {
  std::vector<WStatistics> runs;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    auto part = read_wstats_csv(in);
    for (auto& r : part) runs.push_back(std::move(r));
  }
  for (std::size_t j = 0; j < runs.size(); ++j)
    runs[j].run_id = static_cast<int>(j);
  for (const auto& r : runs)
    if (r.p() != runs.front().p())
      throw std::runtime_error("input runs have different dimensions");
  return runs;
}

void emit(const nlohmann::ordered_json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << j.dump(2) << '\n';
}

struct FilterArgs {
  std::string input, out, method = "ph";
  double alpha_kn = 0.2;
  int nu = 1;
  bool nu_given = false;
};

struct DerandArgs {
  std::vector<std::string> inputs;
  std::string out;
  double alpha_kn = 0.2, alpha_ebh = 0.2;
  int k = 0;
};

struct PferArgs {
  std::vector<std::string> inputs;
  std::string out;
  int nu = 1;
  double eta = 0.0;
  bool eta_given = false, posthoc = false;
};

struct ClosedArgs {
  std::vector<std::string> inputs;
  std::string out;
  double alpha = 0.2, alpha_kn = 0.0;
  bool alpha_kn_given = false;
};

struct SimArgs {
  std::string config, out, summary, methods = "bc,ph";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
};

int do_filter(const FilterArgs& a) {
  std::ifstream in(a.input);
  if (!in) {
    std::cerr << "error: cannot open " << a.input << '\n';
    return 1;
  }
  auto runs = read_wstats_csv(in);
  if (runs.size() != 1) {
    std::cerr << "error: filter expects a single run, got " << runs.size() << '\n';
    return 1;
  }
  auto method = *method_from_string(a.method);
  FilterOutcome outcome;
  if (method == Method::bc) outcome = filter_bc(runs[0], a.alpha_kn);
  else if (method == Method::ph) outcome = filter_ph(runs[0], a.alpha_kn);
  else outcome = filter_pfer(runs[0], a.nu);
  emit(filter_outcome_to_json(outcome), a.out);
  return 0;
}

int do_derandomize(const DerandArgs& a) {
  auto runs = load_runs(a.inputs);
  if (a.k > 0 && a.k != static_cast<int>(runs.size())) {
    std::cerr << "error: --k " << a.k << " but found " << runs.size() << " runs\n";
    return 1;
  }
  emit(report_to_json(filter_dph(runs, a.alpha_kn, a.alpha_ebh)), a.out);
  return 0;
}

int do_pfer(const PferArgs& a) {
  auto runs = load_runs(a.inputs);
  if (a.posthoc) {
    emit(posthoc_eta_to_json(rwc_posthoc_eta(runs, a.nu)), a.out);
  } else {
    emit(report_to_json(rwc_rejections(runs, a.nu, a.eta)), a.out);
  }
  return 0;
}

int do_closed(const ClosedArgs& a) {
  auto runs = load_runs(a.inputs);
  double alpha_kn = a.alpha_kn_given ? a.alpha_kn : a.alpha;
  emit(report_to_json(closed_knockoff_search(runs, a.alpha, alpha_kn)), a.out);
  return 0;
}

int do_simulate(const SimArgs& a) {
  std::ifstream in(a.config);
  if (!in) {
    std::cerr << "error: cannot open " << a.config << '\n';
    return 1;
  }
  nlohmann::json cfg = nlohmann::json::parse(in);
  Scenario scenario = scenario_from_json(cfg);
  if (a.seed_given) scenario.base_seed = a.seed;
  RunOptions options;
  options.threads = a.threads;
  auto records = run_scenario(scenario, parse_methods(a.methods), options);
  {
    std::ofstream out(a.out);
    if (!out) {
      std::cerr << "error: cannot write " << a.out << '\n';
      return 1;
    }
    write_records_csv(out, records);
  }
  {
    std::ofstream out(a.summary);
    if (!out) {
      std::cerr << "error: cannot write " << a.summary << '\n';
      return 1;
    }
    write_summary_csv(out, aggregate_metrics(records));
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Knockoff variable selection with post-hoc significance levels"};
  app.require_subcommand(1);

  FilterArgs fa;
  auto* filter = app.add_subcommand("filter", "Single-run knockoff filter");
  filter->add_option("input", fa.input, "CSV of knockoff statistics (index,w,run_id)")
      ->required();
  filter->add_option("--alpha-kn", fa.alpha_kn, "Stopping-time level in (0,1]")
      ->check(check_open_level);
  filter->add_option("--method", fa.method, "bc, ph or pfer")
      ->check(CLI::IsMember({"bc", "ph", "pfer"}));
  filter->add_option("--nu", fa.nu, "PFER budget (method pfer)")
      ->check(CLI::PositiveNumber);
  filter->add_option("--out", fa.out, "Output JSON path (default stdout)");
  filter->callback([&] { fa.nu_given = filter->count("--nu") > 0; });

  DerandArgs da;
  auto* derand = app.add_subcommand("derandomize", "Multi-run post-hoc e-BH filter");
  derand->add_option("inputs", da.inputs, "Per-run W CSV files")->required();
  derand->add_option("--k", da.k, "Expected number of runs")->check(CLI::PositiveNumber);
  derand->add_option("--alpha-kn", da.alpha_kn, "Per-run stopping-time level")
      ->check(check_open_level);
  derand->add_option("--alpha-ebh", da.alpha_ebh, "Initial e-BH level in [0,1]")
      ->check(check_closed_level);
  derand->add_option("--out", da.out, "Output JSON path (default stdout)");

  PferArgs pa;
  auto* pfer = app.add_subcommand("pfer", "Derandomized PFER selection");
  pfer->add_option("inputs", pa.inputs, "Per-run W CSV files")->required();
  pfer->add_option("--nu", pa.nu, "PFER budget")->required()->check(CLI::PositiveNumber);
  auto* eta_opt =
      pfer->add_option("--eta", pa.eta, "Run-fraction cutoff in (0,1]")->check(check_open_level);
  auto* posthoc_opt =
      pfer->add_flag("--posthoc-eta", pa.posthoc, "Emit every eta grid point");
  eta_opt->excludes(posthoc_opt);
  pfer->add_option("--out", pa.out, "Output JSON path (default stdout)");
  pfer->callback([&] { pa.eta_given = pfer->count("--eta") > 0; });

  ClosedArgs ca;
  auto* closed = app.add_subcommand("closed", "Closure-set search (p <= 12)");
  closed->add_option("inputs", ca.inputs, "Per-run W CSV files")->required();
  closed->add_option("--alpha", ca.alpha, "Closure level in (0,1]")
      ->required()
      ->check(check_open_level);
  closed->add_option("--alpha-kn", ca.alpha_kn, "Stopping-time level (default --alpha)")
      ->check(check_open_level);
  closed->add_option("--out", ca.out, "Output JSON path (default stdout)");
  closed->callback([&] { ca.alpha_kn_given = closed->count("--alpha-kn") > 0; });

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo replication sweep");
  sim->add_option("--config", sa.config, "Scenario JSON")->required();
  sim->add_option("--out", sa.out, "Per-replication records CSV")->required();
  sim->add_option("--summary", sa.summary, "Per-method summary CSV")->required();
  sim->add_option("--methods", sa.methods, "Comma list of bc,ph,dph,rwc")
      ->check(check_methods);
  sim->add_option("--seed", sa.seed, "Overrides the scenario base_seed");
  sim->add_option("--threads", sa.threads, "Worker threads (0 = default)");
  sim->callback([&] { sa.seed_given = sim->count("--seed") > 0; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    if (filter->parsed()) {
      if (fa.method == "pfer" && !fa.nu_given) {
        std::cerr << "error: --method pfer requires --nu\n";
        return 2;
      }
      return do_filter(fa);
    }
    if (derand->parsed()) return do_derandomize(da);
    if (pfer->parsed()) {
      if (!pa.posthoc && !pa.eta_given) {
        std::cerr << "error: pfer needs --eta or --posthoc-eta\n";
        return 2;
      }
      return do_pfer(pa);
    }
    if (closed->parsed()) return do_closed(ca);
    if (sim->parsed()) return do_simulate(sa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace phk

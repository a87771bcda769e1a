// Command-line front end: run experiments, build fine-step reference states,
// compare saved states, and sweep step sizes.  Everything an invocation can
// set on the command line can also live in a key = value config file.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chb/experiments.hpp"
#include "chb/model.hpp"

namespace fs = std::filesystem;
using namespace chb;

namespace {

ExperimentId experiment_from(const std::string& name) {
  if (name == "convergence") return ExperimentId::convergence;
  if (name == "coarsening") return ExperimentId::coarsening;
  if (name == "adaptive_compare") return ExperimentId::adaptive_compare;
  if (name == "buoyancy") return ExperimentId::buoyancy;
  if (name == "custom") return ExperimentId::custom;
  throw std::runtime_error("unknown experiment: " + name);
}

SchemeKind scheme_from(const std::string& name) {
  if (name == "fixed") return SchemeKind::fixed;
  if (name == "algorithm1") return SchemeKind::algorithm1;
  if (name == "algorithm2") return SchemeKind::algorithm2;
  throw std::runtime_error("unknown scheme: " + name);
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// key = value lines, # starts a comment, keys match the CLI flag names.
std::map<std::string, std::string> read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": empty key or value");
    kv[key] = value;
  }
  return kv;
}

bool bool_from(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("not a boolean: " + v);
}

// Everything settable per run, gathered from config file and flags.
struct Options {
  std::optional<std::string> experiment, scheme, out;
  std::optional<std::uint64_t> seed;
  std::optional<int> order, grid;
  std::optional<double> tau, tfinal, tc;
  std::optional<bool> no_relax;
};

void merge_config_file(Options& o, const fs::path& path) {
  for (const auto& [key, value] : read_config(path)) {
    if (key == "experiment") {
      if (!o.experiment) o.experiment = value;
    } else if (key == "scheme") {
      if (!o.scheme) o.scheme = value;
    } else if (key == "out") {
      if (!o.out) o.out = value;
    } else if (key == "seed") {
      if (!o.seed) o.seed = std::stoull(value);
    } else if (key == "order") {
      if (!o.order) o.order = std::stoi(value);
    } else if (key == "grid") {
      if (!o.grid) o.grid = std::stoi(value);
    } else if (key == "tau") {
      if (!o.tau) o.tau = std::stod(value);
    } else if (key == "tfinal") {
      if (!o.tfinal) o.tfinal = std::stod(value);
    } else if (key == "tc") {
      if (!o.tc) o.tc = std::stod(value);
    } else if (key == "no-relax") {
      if (!o.no_relax) o.no_relax = bool_from(value);
    } else {
      throw std::runtime_error("unknown config key: " + key);
    }
  }
}

RunConfig build_config(const Options& o) {
  RunConfig cfg;
  cfg.experiment = experiment_from(o.experiment.value_or("coarsening"));
  apply_experiment_defaults(cfg);
  if (o.scheme) cfg.scheme = scheme_from(*o.scheme);
  if (o.out) cfg.out_dir = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.order) cfg.order = *o.order;
  if (o.grid) cfg.n = *o.grid;
  if (o.tau) cfg.tau = *o.tau;
  if (o.tfinal) cfg.t_final = *o.tfinal;
  if (o.tc) cfg.adaptive.t_switch = *o.tc;
  if (o.no_relax && *o.no_relax) cfg.relax = false;
  return cfg;
}

// Attach the shared option set to a subcommand; values land in o only for
// flags the user actually passed, so file values fill the gaps afterwards.
void add_shared_options(CLI::App& cmd, Options& o, std::string& config_path) {
  cmd.add_option("--config", config_path, "key = value config file");
  cmd.add_option("--experiment", [&o](const CLI::results_t& r) {
    o.experiment = r[0];
    return true;
  }, "convergence|coarsening|adaptive_compare|buoyancy|custom");
  cmd.add_option("--scheme", [&o](const CLI::results_t& r) {
    o.scheme = r[0];
    return true;
  }, "fixed|algorithm1|algorithm2");
  cmd.add_option("--out", [&o](const CLI::results_t& r) {
    o.out = r[0];
    return true;
  }, "output directory (trace.csv, snapshots, final state)");
  cmd.add_option("--seed", [&o](const CLI::results_t& r) {
    o.seed = std::stoull(r[0]);
    return true;
  }, "RNG seed for the initial data");
  cmd.add_option("--order", [&o](const CLI::results_t& r) {
    o.order = std::stoi(r[0]);
    return true;
  }, "BDF order (fixed stepping and single-order adaptivity)");
  cmd.add_option("--grid", [&o](const CLI::results_t& r) {
    o.grid = std::stoi(r[0]);
    return true;
  }, "nodes per direction");
  cmd.add_option("--tau", [&o](const CLI::results_t& r) {
    o.tau = std::stod(r[0]);
    return true;
  }, "fixed step size, or the adaptive starting step");
  cmd.add_option("--tfinal", [&o](const CLI::results_t& r) {
    o.tfinal = std::stod(r[0]);
    return true;
  }, "final time");
  cmd.add_option("--tc", [&o](const CLI::results_t& r) {
    o.tc = std::stod(r[0]);
    return true;
  }, "hybrid switching time (order 3 before, order 2 after)");
  cmd.add_flag("--no-relax", [&o](std::int64_t) {
    o.no_relax = true;
  }, "disable the relaxation step (plain scheme; fixed stepping only)");
}

void print_summary(const RunConfig& cfg, const RunResult& res) {
  std::printf("steps %ld  rejects %ld  wall %.1f s\n", res.steps, res.rejects,
              res.wall_s);
  std::printf("t = %.6f  E = %.8f  r = %.8f\n", res.state.t,
              energy(res.state.phi, cfg.params), res.r);
  if (!cfg.out_dir.empty())
    std::printf("wrote %s/{trace.csv, state_final.bin%s}\n",
                cfg.out_dir.c_str(),
                cfg.snapshot_times.empty() ? "" : ", snapshots");
}

int do_run(const Options& o) {
  RunConfig cfg = build_config(o);
  RunResult res = run(cfg);
  print_summary(cfg, res);
  return 0;
}

int do_reference(Options o) {
  if (!o.out) throw std::runtime_error("reference needs --out");
  // A reference is a fine fixed-step order-2 run unless told otherwise.
  if (!o.scheme) o.scheme = "fixed";
  if (!o.order) o.order = 2;
  if (!o.tau) o.tau = 1e-5;
  RunConfig cfg = build_config(o);
  cfg.snapshot_times.clear();
  RunResult res = run(cfg);
  print_summary(cfg, res);
  std::printf("reference state: %s/state_final.bin\n", cfg.out_dir.c_str());
  return 0;
}

int do_compare(const fs::path& a_path, const fs::path& b_path) {
  const FieldState a = load_state(a_path);
  const FieldState b = load_state(b_path);
  const ErrorReport err = compare_states(a, b);
  std::printf("field  L2 difference\n");
  std::printf("phi    %.6e\n", err.phi);
  std::printf("u1     %.6e\n", err.u1);
  std::printf("u2     %.6e\n", err.u2);
  std::printf("p_x    %.6e\n", err.px);
  std::printf("p_y    %.6e\n", err.py);
  return 0;
}

int do_sweep(const Options& o, const std::vector<double>& taus,
             const std::string& ref_path) {
  std::optional<FieldState> ref;
  if (!ref_path.empty()) ref = load_state(ref_path);
  std::printf("tau,steps,rejects,wall_s,E,r%s\n", ref ? ",err_phi" : "");
  for (const double tau : taus) {
    Options per = o;
    per.tau = tau;
    if (!per.scheme) per.scheme = "fixed";
    RunConfig cfg = build_config(per);
    if (!cfg.out_dir.empty()) {
      char sub[64];
      std::snprintf(sub, sizeof sub, "tau_%g", tau);
      cfg.out_dir = (fs::path(cfg.out_dir) / sub).string();
    }
    RunResult res = run(cfg);
    std::printf("%g,%ld,%ld,%.2f,%.8f,%.8f", tau, res.steps, res.rejects,
                res.wall_s, energy(res.state.phi, cfg.params), res.r);
    if (ref) std::printf(",%.6e", compare_states(res.state, *ref).phi);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field flow simulator (Cahn-Hilliard-Brinkman)"};
  app.require_subcommand(1);

  Options run_opts, ref_opts, sweep_opts;
  std::string run_cfg_path, ref_cfg_path, sweep_cfg_path;
  std::string compare_a, compare_b, sweep_ref;
  std::vector<double> sweep_taus;

  CLI::App* cmd_run = app.add_subcommand("run", "integrate one configuration");
  add_shared_options(*cmd_run, run_opts, run_cfg_path);

  CLI::App* cmd_ref =
      app.add_subcommand("reference", "store a fine-step reference state");
  add_shared_options(*cmd_ref, ref_opts, ref_cfg_path);

  CLI::App* cmd_cmp =
      app.add_subcommand("compare", "L2 differences of two saved states");
  cmd_cmp->add_option("a", compare_a, "first state file")->required();
  cmd_cmp->add_option("b", compare_b, "second state file")->required();

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "fixed-step runs over a list of step sizes");
  add_shared_options(*cmd_sweep, sweep_opts, sweep_cfg_path);
  cmd_sweep->add_option("--taus", sweep_taus, "comma-separated step sizes")
      ->required()
      ->delimiter(',');
  cmd_sweep->add_option("--ref", sweep_ref,
                        "state file to measure errors against");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      if (!run_cfg_path.empty()) merge_config_file(run_opts, run_cfg_path);
      return do_run(run_opts);
    }
    if (cmd_ref->parsed()) {
      if (!ref_cfg_path.empty()) merge_config_file(ref_opts, ref_cfg_path);
      return do_reference(ref_opts);
    }
    if (cmd_cmp->parsed()) return do_compare(compare_a, compare_b);
    if (cmd_sweep->parsed()) {
      if (!sweep_cfg_path.empty()) merge_config_file(sweep_opts, sweep_cfg_path);
      return do_sweep(sweep_opts, sweep_taus, sweep_ref);
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}

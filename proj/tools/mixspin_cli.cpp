#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "mixspin/error.hpp"
#include "mixspin/sweep.hpp"

namespace {

struct Options {
  std::optional<int> n;
  std::optional<double> alpha;
  std::string alpha_grid;
  std::optional<double> kbt;
  std::optional<double> beta;
  std::string kbt_grid;
  std::string method = "ed";
  std::int64_t sweeps = 100'000;
  std::int64_t therm = -1;
  int bins = 32;
  int walkers = 1;
  std::uint64_t seed = 1;
  std::string pairs = "11,12";
  std::string out;
  std::string config;
  bool no_timestamp = false;
  bool long_run = false;
  int lanczos_k = 16;
  double beta_probe = 0.0;
  std::string pair = "12";
  std::string input;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--n", o.n, "number of sites (multiple of 4)");
  cmd->add_option("--config", o.config, "key=value chain spec file (n_sites, alpha, boundary)");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out", o.out, "output CSV (default stdout)");
  cmd->add_flag("--no-timestamp", o.no_timestamp, "omit the timestamp provenance line");
}

mixspin::ChainSpec base_spec(const Options& o) {
  mixspin::ChainSpec spec{8, 1.0, 1.0};
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw mixspin::ValidationError("cannot read config file " + o.config);
    spec = mixspin::parse_chain_spec(in);
  }
  if (o.n) spec.n_sites = *o.n;
  if (o.alpha) spec.alpha = *o.alpha;
  return spec;
}

std::vector<double> alpha_axis(const Options& o, const mixspin::ChainSpec& spec) {
  if (!o.alpha_grid.empty()) return mixspin::parse_grid(o.alpha_grid);
  return {spec.alpha};
}

double single_kbt(const Options& o) {
  if (o.kbt && o.beta) throw mixspin::ValidationError("give either --kbt or --beta");
  if (o.beta) {
    if (!(*o.beta > 0.0)) throw mixspin::ValidationError("beta must be positive");
    return std::isinf(*o.beta) ? 0.0 : 1.0 / *o.beta;
  }
  return o.kbt.value_or(0.0);
}

std::vector<std::string> split_pairs(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

mixspin::SweepPlan make_plan(const Options& o, mixspin::SweepAxis axis) {
  mixspin::SweepPlan plan;
  plan.axis = axis;
  plan.spec = base_spec(o);
  plan.method = mixspin::parse_method(o.method);
  plan.sweeps = o.sweeps;
  plan.therm = o.therm;
  plan.bins = o.bins;
  plan.walkers = o.walkers;
  plan.seed = o.seed;
  plan.long_run = o.long_run;
  plan.timestamp = !o.no_timestamp;
  plan.pairs = split_pairs(o.pairs);
  plan.lanczos_k = o.lanczos_k;
  if (axis == mixspin::SweepAxis::alpha) {
    plan.grid = alpha_axis(o, plan.spec);
    plan.kbt = single_kbt(o);
  } else {
    plan.grid = o.kbt_grid.empty() ? std::vector<double>{single_kbt(o)} : mixspin::parse_grid(o.kbt_grid);
  }
  return plan;
}

template <class Write>
void emit(const std::string& path, Write write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ostringstream buffer;
  write(buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mixspin::ValidationError("cannot open " + path + " for writing");
  out << buffer.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-spin 1/2-1/2-1-1 Heisenberg ring: ED, SSE QMC and pair log-negativity"};
  app.require_subcommand(1);
  Options o;

  auto* ground = app.add_subcommand("ground", "ground-state pair entanglement over an alpha grid");
  add_common(ground, o);
  ground->add_option("--alpha", o.alpha, "J2/J1");
  ground->add_option("--alpha-grid", o.alpha_grid, "a,b,c or start:stop:step");
  ground->add_option("--method", o.method, "ed or lanczos");
  ground->add_option("--lanczos-k", o.lanczos_k, "Sz=0 states kept by lanczos");
  ground->add_option("--pairs", o.pairs, "comma list of 11,12,22,21 or i:j");

  auto* thermal = app.add_subcommand("thermal", "thermal pair entanglement over a k_B T grid");
  add_common(thermal, o);
  thermal->add_option("--alpha", o.alpha, "J2/J1");
  thermal->add_option("--kbt", o.kbt, "single k_B T (0 means ground state)");
  thermal->add_option("--beta", o.beta, "alias: single inverse temperature");
  thermal->add_option("--kbt-grid", o.kbt_grid, "a,b,c or start:stop:step");
  thermal->add_option("--method", o.method, "ed, lanczos or qmc");
  thermal->add_option("--lanczos-k", o.lanczos_k, "Sz=0 states kept by lanczos");
  thermal->add_option("--sweeps", o.sweeps, "QMC measurement sweeps");
  thermal->add_option("--therm", o.therm, "QMC thermalization sweeps (default 10% of --sweeps)");
  thermal->add_option("--bins", o.bins, "QMC bins per walker");
  thermal->add_option("--walkers", o.walkers, "independent QMC walkers");
  thermal->add_option("--pairs", o.pairs, "comma list of 11,12,22,21 or i:j");
  thermal->add_flag("--long-run", o.long_run, "allow QMC beyond N=32 or beta=64");

  auto* gap = app.add_subcommand("gap", "spin gap over an alpha grid (Lanczos)");
  add_common(gap, o);
  gap->add_option("--alpha", o.alpha, "J2/J1");
  gap->add_option("--alpha-grid", o.alpha_grid, "a,b,c or start:stop:step");

  auto* excited = app.add_subcommand("excited", "first-excited-multiplet pair log-negativity");
  add_common(excited, o);
  excited->add_option("--alpha", o.alpha, "J2/J1");
  excited->add_option("--pair", o.pair, "11, 12, 22, 21 or i:j");
  excited->add_option("--beta-probe", o.beta_probe, "probe inverse temperature (default: automatic)");

  auto* verify = app.add_subcommand("verify", "re-derive g and logneg of a results file");
  verify->add_option("input", o.input, "CSV written by ground or thermal")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ground || *thermal) {
      const bool is_ground = static_cast<bool>(*ground);
      const auto plan = make_plan(o, is_ground ? mixspin::SweepAxis::alpha : mixspin::SweepAxis::temperature);
      const auto rows = is_ground ? mixspin::cmd_ground_sweep(plan) : mixspin::cmd_thermal_sweep(plan);
      const std::string command = is_ground ? "ground" : "thermal";
      emit(o.out, [&](std::ostream& out) {
        mixspin::write_header(out, {"mixspin " + command, plan.canonical(command), plan.seed, plan.timestamp});
        mixspin::write_rows(out, rows);
      });
    } else if (*gap) {
      o.method = "lanczos";
      const auto plan = make_plan(o, mixspin::SweepAxis::alpha);
      const auto rows = mixspin::cmd_gap_sweep(plan);
      emit(o.out, [&](std::ostream& out) {
        mixspin::write_header(out, {"mixspin gap", plan.canonical("gap"), plan.seed, plan.timestamp});
        mixspin::write_rows(out, rows);
      });
    } else if (*excited) {
      const auto spec = base_spec(o);
      const auto pair = mixspin::resolve_pairs({o.pair}, spec).front();
      const auto row = mixspin::cmd_excited(spec, pair, o.beta_probe);
      const auto config = "command=excited;" + spec.canonical() + ";pair=" + o.pair +
                          ";beta_probe=" + mixspin::format_double(o.beta_probe);
      emit(o.out, [&](std::ostream& out) {
        mixspin::write_header(out, {"mixspin excited", config, o.seed, !o.no_timestamp});
        mixspin::write_rows(out, row);
      });
    } else if (*verify) {
      std::ifstream in(o.input);
      if (!in) throw mixspin::ValidationError("cannot read " + o.input);
      const auto report = mixspin::verify_rows(mixspin::read_rows(in));
      for (const auto& m : report.mismatches) std::cerr << "mismatch: " << m << '\n';
      std::cout << "checked " << report.checked << " rows, skipped " << report.skipped << ", "
                << report.mismatches.size() << " mismatches\n";
      return report.ok() ? 0 : 3;
    }
  } catch (const mixspin::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const mixspin::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

#include "mixspin/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "mixspin/entanglement.hpp"
#include "mixspin/error.hpp"
#include "mixspin/qmc_engine.hpp"
#include "mixspin/rng.hpp"

namespace mixspin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first
// exception in index order is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const char* what) {
  const auto t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ValidationError(std::string("malformed ") + what + " '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

ResultRow base_row(const ChainSpec& spec, double kbt, const PairSelection& sel, Method method,
                   std::uint64_t seed) {
  ResultRow row;
  row.alpha = spec.alpha;
  row.k_b_t = kbt;
  row.pair_kind = sel.label;
  row.site_i = sel.pair.first_one_based();
  row.site_j = sel.pair.second_one_based();
  row.method = to_string(method);
  row.seed = seed;
  return row;
}

void fill_from_state(ResultRow& row, const NegativityResult& neg, double g) {
  row.g = g;
  row.logneg = neg.value;
  row.logneg_err = neg.error;
  row.flags = neg.flags;
}

ResultRow ed_row(const ChainSpec& spec, double kbt, const PairSelection& sel, Method method,
                 std::uint64_t seed, const PairDensityMatrix& rho) {
  auto row = base_row(spec, kbt, sel, method, seed);
  row.correlator = pair_correlator(rho);
  row.correlator_err = 0.0;
  if (pair_kind(rho.first, rho.second) == PairKind::one_one) {
    row.g = kNaN;
    const auto neg = log_negativity(rho);
    row.logneg = neg.value;
    row.flags = {"numeric-pt"};
    return row;
  }
  const auto state = g_from_correlator(rho.first, rho.second, row.correlator);
  fill_from_state(row, negativity_with_error(state), state.g);
  return row;
}

ResultRow qmc_row(const ChainSpec& spec, double kbt, const PairSelection& sel, std::uint64_t seed,
                  const QmcRun& run, std::size_t p) {
  auto row = base_row(spec, kbt, sel, Method::qmc, seed);
  const auto& c = run.correlators[p];
  row.correlator = c.value;
  row.correlator_err = c.error;
  const auto a = site_spin(sel.pair.first);
  const auto b = site_spin(sel.pair.second);
  if (pair_kind(a, b) == PairKind::one_one) {
    row.g = kNaN;
    row.logneg = kNaN;
    row.logneg_err = kNaN;
    row.flags = {"correlator-only"};
    return row;
  }
  const auto state = g_from_correlator(a, b, c);
  if (run.errors_reported) {
    fill_from_state(row, negativity_with_error(a, b, run.bin_correlators[p]), state.g);
  } else {
    fill_from_state(row, negativity_with_error(state), state.g);
    row.flags.push_back("too-few-bins");
  }
  return row;
}

SpectralDecomposition solve_for(const SweepPlan& plan, const ChainSpec& spec) {
  DiagonalizeOptions options;
  options.use_lanczos = plan.method == Method::lanczos;
  options.lanczos_k = plan.lanczos_k;
  options.lanczos.seed = plan.seed;
  return diagonalize(spec, options);
}

ThermalSpec thermal_at(double kbt) {
  return kbt == 0.0 ? ThermalSpec::ground() : ThermalSpec::from_kbt(kbt);
}

}  // namespace

Method parse_method(const std::string& text) {
  if (text == "ed") return Method::ed;
  if (text == "lanczos") return Method::lanczos;
  if (text == "qmc") return Method::qmc;
  throw ValidationError("unknown method '" + text + "' (expected ed, lanczos or qmc)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::ed: return "ed";
    case Method::lanczos: return "lanczos";
    case Method::qmc: return "qmc";
  }
  return "?";
}

std::vector<PairSelection> resolve_pairs(const std::vector<std::string>& tokens, const ChainSpec& spec) {
  if (tokens.empty()) throw ValidationError("no pairs requested");
  std::vector<PairSelection> out;
  for (const auto& raw : tokens) {
    const auto token = trim(raw);
    PairSelection sel{token, {}};
    if (token == "11") {
      sel.pair = SitePair::from_one_based(1, 2);
    } else if (token == "12") {
      sel.pair = SitePair::from_one_based(2, 3);
    } else if (token == "22") {
      sel.pair = SitePair::from_one_based(3, 4);
    } else if (token == "21") {
      sel.pair = SitePair::from_one_based(4, 5 > spec.n_sites ? 1 : 5);
    } else if (const auto colon = token.find(':'); colon != std::string::npos) {
      const double i = parse_number(token.substr(0, colon), "pair site");
      const double j = parse_number(token.substr(colon + 1), "pair site");
      if (i != std::floor(i) || j != std::floor(j)) throw ValidationError("pair sites must be integers: " + token);
      sel.pair = SitePair::from_one_based(static_cast<int>(i), static_cast<int>(j));
    } else {
      throw ValidationError("unknown pair '" + token + "' (expected 11, 12, 22, 21 or i:j)");
    }
    validate_pair(spec, sel.pair);
    out.push_back(sel);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const auto parts = split(text, ':');
  if (parts.size() == 3) {
    const double start = parse_number(parts[0], "grid start");
    const double stop = parse_number(parts[1], "grid stop");
    const double step = parse_number(parts[2], "grid step");
    if (!(step > 0.0)) throw ValidationError("grid step must be positive");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    if (count < 0) throw ValidationError("grid stop below start");
    if (count > 1'000'000) throw ValidationError("grid too long");
    for (long k = 0; k <= count; ++k) {
      // Round to 12 significant digits so 0.1*3 prints as 0.3.
      const double v = start + static_cast<double>(k) * step;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", v);
      out.push_back(std::strtod(buf, nullptr));
    }
    return out;
  }
  if (parts.size() != 1) throw ValidationError("malformed grid '" + text + "'");
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item, "grid value"));
  return out;
}

void SweepPlan::validate() const {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw ValidationError("grid values must be finite");
    if (i && !(grid[i] > grid[i - 1])) throw ValidationError("sweep grid must be strictly ascending");
  }
  spec_at(axis == SweepAxis::alpha ? grid.front() : spec.alpha).validate();
  if (axis == SweepAxis::temperature && grid.front() < 0.0) {
    throw ValidationError("k_b_t must be non-negative");
  }
  if (axis == SweepAxis::alpha && !(kbt >= 0.0 && std::isfinite(kbt))) {
    throw ValidationError("k_b_t must be non-negative");
  }
  if (sweeps < 1) throw ValidationError("sweeps must be positive");
  if (bins < 1) throw ValidationError("bins must be positive");
  if (walkers < 1) throw ValidationError("walkers must be positive");
  if (method == Method::ed) {
    const ProductSpace space(spec);
    if (space.dimension() > kDenseDimensionCap) {
      throw ValidationError("Hilbert space dimension " + std::to_string(space.dimension()) +
                            " too large for the ed method (cap " + std::to_string(kDenseDimensionCap) +
                            "); use lanczos or qmc");
    }
  }
  if (method == Method::qmc) {
    const double lowest = axis == SweepAxis::temperature ? grid.front() : kbt;
    if (lowest <= 0.0) throw ValidationError("qmc needs k_b_t > 0");
  }
  resolve_pairs(pairs, spec);
}

ChainSpec SweepPlan::spec_at(double alpha) const {
  ChainSpec out = spec;
  out.alpha = alpha;
  return out;
}

std::string SweepPlan::canonical(const std::string& command) const {
  std::string grid_text;
  for (std::size_t i = 0; i < grid.size(); ++i) grid_text += (i ? "," : "") + format_double(grid[i]);
  std::ostringstream out;
  out << "command=" << command << ";axis=" << (axis == SweepAxis::alpha ? "alpha" : "k_b_t")
      << ";grid=" << grid_text << ";n_sites=" << spec.n_sites
      << ";boundary=" << (spec.boundary == Boundary::periodic ? "periodic" : "open");
  if (axis == SweepAxis::alpha) {
    out << ";k_b_t=" << format_double(kbt);
  } else {
    out << ";alpha=" << format_double(spec.alpha);
  }
  out << ";method=" << to_string(method);
  if (method == Method::qmc) {
    out << ";sweeps=" << sweeps << ";therm=" << therm_sweeps() << ";bins=" << bins << ";walkers=" << walkers
        << ";long_run=" << (long_run ? 1 : 0);
  }
  if (method == Method::lanczos) out << ";lanczos_k=" << lanczos_k;
  out << ";seed=" << seed << ";pairs=" << join(pairs, ',');
  return out.str();
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) {
  return seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index);
}

std::vector<ResultRow> cmd_ground_sweep(const SweepPlan& plan) {
  if (plan.axis != SweepAxis::alpha) throw ValidationError("ground sweep runs over alpha");
  if (plan.method == Method::qmc) throw ValidationError("ground sweep needs ed or lanczos");
  plan.validate();
  const auto pairs = resolve_pairs(plan.pairs, plan.spec);
  std::vector<std::vector<ResultRow>> per_point(plan.grid.size());
  parallel_for(plan.grid.size(), worker_threads_from_env(), [&](std::size_t i) {
    const auto spec = plan.spec_at(plan.grid[i]);
    const auto decomposition = solve_for(plan, spec);
    for (const auto& sel : pairs) {
      const auto rho = reduce_to_pair(decomposition, ThermalSpec::ground(), sel.pair);
      per_point[i].push_back(ed_row(spec, 0.0, sel, plan.method, plan.seed, rho));
    }
  });
  std::vector<ResultRow> rows;
  for (auto& block : per_point) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

std::vector<ResultRow> cmd_thermal_sweep(const SweepPlan& plan) {
  if (plan.axis != SweepAxis::temperature) throw ValidationError("thermal sweep runs over k_b_t");
  plan.validate();
  const auto pairs = resolve_pairs(plan.pairs, plan.spec);
  const auto& spec = plan.spec;
  std::vector<std::vector<ResultRow>> per_point(plan.grid.size());
  const int threads = worker_threads_from_env();

  if (plan.method == Method::qmc) {
    const int inner = plan.grid.size() == 1 ? threads : 1;
    parallel_for(plan.grid.size(), plan.grid.size() == 1 ? 1 : threads, [&](std::size_t i) {
      QmcConfig config;
      config.spec = spec;
      config.beta = 1.0 / plan.grid[i];
      config.therm_sweeps = plan.therm_sweeps();
      config.measure_sweeps = plan.sweeps;
      config.bins = plan.bins;
      config.seed = point_seed(plan.seed, i);
      config.long_run = plan.long_run;
      for (const auto& sel : pairs) config.pairs.push_back(sel.pair);
      const auto run = run_replicated(config, plan.walkers, inner);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        per_point[i].push_back(qmc_row(spec, plan.grid[i], pairs[p], config.seed, run, p));
      }
    });
  } else {
    const auto decomposition = solve_for(plan, spec);
    std::vector<PairEnsemble> ensembles;
    for (const auto& sel : pairs) ensembles.emplace_back(decomposition, sel.pair);
    parallel_for(plan.grid.size(), threads, [&](std::size_t i) {
      const auto thermal = thermal_at(plan.grid[i]);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto rho = ensembles[p].thermal(thermal);
        per_point[i].push_back(ed_row(spec, plan.grid[i], pairs[p], plan.method, plan.seed, rho));
      }
    });
  }
  std::vector<ResultRow> rows;
  for (auto& block : per_point) rows.insert(rows.end(), block.begin(), block.end());
  return rows;
}

std::vector<GapRow> cmd_gap_sweep(const SweepPlan& plan) {
  if (plan.axis != SweepAxis::alpha) throw ValidationError("gap sweep runs over alpha");
  auto lanczos_plan = plan;
  lanczos_plan.method = Method::lanczos;
  lanczos_plan.validate();
  std::vector<GapRow> rows(plan.grid.size());
  LanczosOptions options;
  options.seed = plan.seed;
  parallel_for(plan.grid.size(), worker_threads_from_env(), [&](std::size_t i) {
    const auto gap = spin_gap(plan.spec_at(plan.grid[i]), options);
    rows[i] = {plan.grid[i], gap.gap, gap.ground_energy};
  });
  return rows;
}

ExcitedRow cmd_excited(const ChainSpec& spec, const PairSelection& sel, double beta_probe) {
  spec.validate();
  validate_pair(spec, sel.pair);
  const auto decomposition = diagonalize(spec);
  const double beta = beta_probe > 0.0 ? beta_probe : default_beta_probe(decomposition);
  const auto sub = excited_pair_dm_by_subtraction(decomposition, sel.pair, beta);
  const auto direct = excited_pair_dm_direct(spec, sel.pair);
  ExcitedRow row;
  row.alpha = spec.alpha;
  row.pair_kind = sel.label;
  row.site_i = sel.pair.first_one_based();
  row.site_j = sel.pair.second_one_based();
  row.excited_energy = sub.excited_energy;
  row.multiplet_dim = sub.multiplet_dim;
  row.beta_probe = sub.beta_probe;
  row.logneg_subtraction = log_negativity(sub.rho).value;
  row.logneg_direct = log_negativity(direct.rho).value;
  row.difference = std::abs(row.logneg_subtraction - row.logneg_direct);
  row.trace = sub.rho.trace();
  row.contamination = sub.contamination;
  return row;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  if (std::strtod(buf, nullptr) != value) std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_header(std::ostream& out, const Provenance& provenance) {
  out << "# generator: " << provenance.generator << '\n';
  out << "# code_version: " << kCodeVersion << '\n';
  out << "# rng: " << Xoshiro256StarStar::kName << '\n';
  out << "# config: " << provenance.config << '\n';
  out << "# config_hash: " << hex64(fnv1a(provenance.config)) << '\n';
  out << "# seed: " << provenance.seed << '\n';
  if (provenance.timestamp) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    out << "# timestamp: " << buf << '\n';
  }
}

void write_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultColumns << '\n';
  for (const auto& r : rows) {
    out << format_double(r.alpha) << ',' << format_double(r.k_b_t) << ',' << r.pair_kind << ',' << r.site_i
        << ',' << r.site_j << ',' << format_double(r.correlator) << ',' << format_double(r.correlator_err)
        << ',' << format_double(r.g) << ',' << format_double(r.logneg) << ',' << format_double(r.logneg_err)
        << ',' << join(r.flags, '|') << ',' << r.method << ',' << r.seed << '\n';
  }
}

void write_rows(std::ostream& out, const std::vector<GapRow>& rows) {
  out << kGapColumns << '\n';
  for (const auto& r : rows) {
    out << format_double(r.alpha) << ',' << format_double(r.gap) << ',' << format_double(r.e_ground) << '\n';
  }
}

void write_rows(std::ostream& out, const ExcitedRow& r) {
  out << kExcitedColumns << '\n';
  out << format_double(r.alpha) << ',' << r.pair_kind << ',' << r.site_i << ',' << r.site_j << ','
      << format_double(r.excited_energy) << ',' << r.multiplet_dim << ',' << format_double(r.beta_probe) << ','
      << format_double(r.logneg_subtraction) << ',' << format_double(r.logneg_direct) << ','
      << format_double(r.difference) << ',' << format_double(r.trace) << ',' << format_double(r.contamination)
      << '\n';
}

std::vector<ResultRow> read_rows(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kResultColumns) throw ValidationError("not a sweep results file (unexpected column header)");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 13) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected 13 columns, got " +
                            std::to_string(f.size()));
    }
    ResultRow r;
    r.alpha = parse_number(f[0], "alpha");
    r.k_b_t = parse_number(f[1], "k_b_t");
    r.pair_kind = f[2];
    r.site_i = static_cast<int>(parse_number(f[3], "site_i"));
    r.site_j = static_cast<int>(parse_number(f[4], "site_j"));
    r.correlator = parse_number(f[5], "correlator");
    r.correlator_err = parse_number(f[6], "correlator_err");
    r.g = parse_number(f[7], "g");
    r.logneg = parse_number(f[8], "logneg");
    r.logneg_err = parse_number(f[9], "logneg_err");
    if (!f[10].empty()) r.flags = split(f[10], '|');
    r.method = f[11];
    r.seed = static_cast<std::uint64_t>(std::stoull(f[12]));
    rows.push_back(r);
  }
  if (!header_seen) throw ValidationError("no column header found");
  return rows;
}

VerifyReport verify_rows(const std::vector<ResultRow>& rows, double tolerance) {
  VerifyReport report;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (r.site_i < 1 || r.site_j < 1 || r.site_i == r.site_j) {
      report.mismatches.push_back("row " + std::to_string(k + 1) + ": invalid sites");
      continue;
    }
    const auto a = site_spin(r.site_i - 1);
    const auto b = site_spin(r.site_j - 1);
    if (pair_kind(a, b) == PairKind::one_one) {
      ++report.skipped;
      continue;
    }
    ++report.checked;
    const auto state = g_from_correlator(a, b, r.correlator);
    const auto neg = negativity_with_error(SU2PairState{a, b, state.g, 0.0});
    const bool deep = std::find(r.flags.begin(), r.flags.end(), "deep-separable") != r.flags.end();
    const double expected = deep ? 0.0 : neg.value;
    std::string where = "row " + std::to_string(k + 1) + " (" + r.pair_kind + ", alpha=" +
                        format_double(r.alpha) + ", k_b_t=" + format_double(r.k_b_t) + ")";
    if (!(std::abs(state.g - r.g) <= tolerance)) {
      report.mismatches.push_back(where + ": g " + format_double(r.g) + " != " + format_double(state.g));
    }
    if (!(std::abs(expected - r.logneg) <= tolerance)) {
      report.mismatches.push_back(where + ": logneg " + format_double(r.logneg) + " != " +
                                  format_double(expected));
    }
  }
  return report;
}

}  // namespace mixspin

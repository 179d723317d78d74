#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mixspin/chain_model.hpp"
#include "mixspin/exact_engine.hpp"

namespace mixspin {

enum class Method { ed, lanczos, qmc };
enum class SweepAxis { alpha, temperature };

Method parse_method(const std::string& text);
std::string to_string(Method method);

/// Pair tokens: "11" = (1,2), "12" = (2,3), "22" = (3,4), "21" = (4,5) in
/// the first cell, or "i:j" with 1-based sites.
struct PairSelection {
  std::string label;
  SitePair pair;
};
std::vector<PairSelection> resolve_pairs(const std::vector<std::string>& tokens, const ChainSpec& spec);

/// "a,b,c" or "start:stop:step" (inclusive of stop up to rounding).
std::vector<double> parse_grid(const std::string& text);

struct SweepPlan {
  SweepAxis axis = SweepAxis::alpha;
  std::vector<double> grid;
  ChainSpec spec{8, 1.0, 1.0};  // alpha is ignored on the alpha axis
  double kbt = 0.0;              // ignored on the temperature axis
  Method method = Method::ed;
  std::int64_t sweeps = 100'000;
  std::int64_t therm = -1;  // negative: 10% of sweeps
  int bins = 32;
  int walkers = 1;
  std::uint64_t seed = 1;
  bool long_run = false;
  bool timestamp = true;
  std::vector<std::string> pairs{"11", "12"};
  int lanczos_k = 16;

  void validate() const;
  std::string canonical(const std::string& command) const;
  ChainSpec spec_at(double alpha) const;
  std::int64_t therm_sweeps() const { return therm < 0 ? sweeps / 10 : therm; }
};

struct ResultRow {
  double alpha = 0.0;
  double k_b_t = 0.0;
  std::string pair_kind;
  int site_i = 0;  // 1-based
  int site_j = 0;
  double correlator = 0.0;
  double correlator_err = 0.0;
  double g = 0.0;  // NaN when the pair has no one-parameter form
  double logneg = 0.0;
  double logneg_err = 0.0;
  std::vector<std::string> flags;
  std::string method;
  std::uint64_t seed = 0;
};

inline constexpr const char* kResultColumns =
    "alpha,k_b_t,pair_kind,site_i,site_j,correlator,correlator_err,g,logneg,logneg_err,flags,method,seed";

/// Seed used by the QMC run at grid index i.
std::uint64_t point_seed(std::uint64_t seed, std::size_t index);

std::vector<ResultRow> cmd_ground_sweep(const SweepPlan& plan);
std::vector<ResultRow> cmd_thermal_sweep(const SweepPlan& plan);

struct GapRow {
  double alpha;
  double gap;
  double e_ground;
};
inline constexpr const char* kGapColumns = "alpha,gap,e_ground";
std::vector<GapRow> cmd_gap_sweep(const SweepPlan& plan);

struct ExcitedRow {
  double alpha;
  std::string pair_kind;
  int site_i;
  int site_j;
  double excited_energy;
  int multiplet_dim;
  double beta_probe;
  double logneg_subtraction;
  double logneg_direct;
  double difference;  // max |rho_sub - rho_direct| entry
  double trace;
  double contamination;
};
inline constexpr const char* kExcitedColumns =
    "alpha,pair_kind,site_i,site_j,excited_energy,multiplet_dim,beta_probe,logneg_subtraction,"
    "logneg_direct,difference,trace,contamination";
/// beta_probe <= 0 selects the default probe.
ExcitedRow cmd_excited(const ChainSpec& spec, const PairSelection& pair, double beta_probe);

std::string format_double(double value);

struct Provenance {
  std::string generator;
  std::string config;
  std::uint64_t seed = 0;
  bool timestamp = true;
};
void write_header(std::ostream& out, const Provenance& provenance);
void write_rows(std::ostream& out, const std::vector<ResultRow>& rows);
void write_rows(std::ostream& out, const std::vector<GapRow>& rows);
void write_rows(std::ostream& out, const ExcitedRow& row);

std::vector<ResultRow> read_rows(std::istream& in);

struct VerifyReport {
  int checked = 0;
  int skipped = 0;
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};
/// Re-derives g and logneg of every row from its correlator column.
VerifyReport verify_rows(const std::vector<ResultRow>& rows, double tolerance = 1e-9);

}  // namespace mixspin

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixspin/chain_model.hpp"
#include "mixspin/exact_engine.hpp"

namespace mixspin {

inline constexpr std::string_view kCodeVersion = "mixspin 1.0.0";

/// Desk-scale envelope; larger runs need long_run.
inline constexpr int kQmcMaxSitesDefault = 32;
inline constexpr double kQmcMaxBetaDefault = 64.0;
inline constexpr int kMinBinsForErrors = 8;

struct QmcConfig {
  ChainSpec spec;
  double beta = 16.0;
  std::int64_t therm_sweeps = 10'000;
  std::int64_t measure_sweeps = 100'000;
  int bins = 32;
  std::uint64_t seed = 1;
  std::vector<SitePair> pairs;
  bool long_run = false;
  // Verify vertex weights and leg links after every sweep (slow).
  bool check_weights = false;

  void validate() const;
  std::string canonical() const;
};

struct QmcRun {
  QmcConfig config;
  int walkers = 1;
  // [pair][bin], walker bins concatenated in walker order.
  std::vector<std::vector<double>> bin_correlators;
  std::vector<double> bin_energy;
  std::vector<CorrelatorEstimate> correlators;
  double energy = 0.0;
  double energy_error = 0.0;
  bool errors_reported = false;
  double energy_autocorrelation_time = 0.0;  // in sweeps, averaged over walkers
  double mean_expansion_order = 0.0;
  double mean_loop_length = 0.0;
  double loop_start_rejection = 0.0;
  std::int64_t loops_per_sweep = 0;
  std::int64_t cutoff = 0;
  std::string generator;
  std::string code_version;
  std::string config_hash;
};

/// Stochastic series expansion with directed-loop updates for the mixed
/// 1/2-1 ring. Sign-free after rotating one sublattice; spin-1 sites carry
/// three local states. <S_i.S_j> is measured as 3<Sz_i Sz_j>.
QmcRun run_qmc(const QmcConfig& config);

/// n_walkers independent Markov chains pooled bin-wise. threads <= 0 reads
/// MIXSPIN_THREADS (default 1). The result does not depend on threads.
QmcRun run_replicated(const QmcConfig& config, int n_walkers, int threads = 0);

/// Worker count from MIXSPIN_THREADS, at least 1.
int worker_threads_from_env();

}  // namespace mixspin

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixspin/chain_model.hpp"

namespace mixspin {

enum class SpectrumMode { full, truncated };

/// Eigenpairs of the chain Hamiltonian, ascending in energy. Each
/// eigenvector lives in the Sz sector named by twice_sz[k].
///
/// A truncated decomposition drawn entirely from the Sz = 0 sector is
/// "SU(2)-folded": because every multiplet has exactly one member there,
/// thermal sums weight each state by its multiplicity 2S+1 instead of
/// needing the other sectors.
struct SpectralDecomposition {
  ChainSpec spec;
  SpectrumMode mode = SpectrumMode::full;
  std::uint64_t full_dimension = 0;
  std::vector<double> eigenvalues;
  std::vector<int> twice_sz;
  std::vector<int> twice_total_spin;
  std::vector<double> residuals;
  std::vector<Eigen::VectorXd> eigenvectors;
  std::map<int, std::shared_ptr<const SectorBasis>> sectors;

  std::size_t size() const { return eigenvalues.size(); }
  double ground_energy() const { return eigenvalues.front(); }
  bool su2_folded() const;
  int multiplicity(std::size_t k) const;
  const SectorBasis& basis_of(std::size_t k) const;
};

struct LanczosOptions {
  int max_iterations = 400;
  // Convergence on the Ritz residual estimate; the explicit residual must
  // then be below residual_bound or the run is reported as non-converged.
  double tolerance = 1e-11;
  double residual_bound = 1e-8;
  std::uint64_t seed = 0x5eed;
  std::uint64_t max_dimension = 5'000'000;
};

struct DiagonalizeOptions {
  std::uint64_t dense_cap = kDenseDimensionCap;
  bool use_lanczos = false;
  int lanczos_k = 8;
  int max_lanczos_k = 64;
  LanczosOptions lanczos;
};

/// Full spectrum by sector-blocked dense diagonalization when the product
/// space fits under dense_cap; otherwise the Lanczos path must be requested
/// explicitly.
SpectralDecomposition diagonalize(const ChainSpec& spec, const DiagonalizeOptions& options = {});

/// The k lowest eigenpairs of one Sz sector. Uses full reorthogonalization
/// and explicit deflation, so every member of a degenerate level inside the
/// sector is found.
SpectralDecomposition lanczos_lowest(const ChainSpec& spec, int k, int twice_sz,
                                     const LanczosOptions& options = {});

/// <S_tot^2> of a vector in the given sector.
double total_spin_squared(const ChainSpec& spec, const SectorBasis& basis,
                          const Eigen::VectorXd& vec);

struct ThermalSpec {
  double beta = std::numeric_limits<double>::infinity();

  static ThermalSpec ground() { return {}; }
  static ThermalSpec from_kbt(double kbt);
  bool is_ground() const { return beta == std::numeric_limits<double>::infinity(); }
  double kbt() const { return is_ground() ? 0.0 : 1.0 / beta; }
};

enum class EstimateSource { ed, qmc };

struct CorrelatorEstimate {
  SitePair pair;
  double value = 0.0;
  double error = 0.0;
  EstimateSource source = EstimateSource::ed;
};

/// Reduced density matrix of two sites; the first tensor factor belongs to
/// pair.first.
struct PairDensityMatrix {
  SpinValue first = kSpinHalf;
  SpinValue second = kSpinHalf;
  Eigen::MatrixXd matrix;

  double trace() const { return matrix.trace(); }
  double min_eigenvalue() const;
};

/// S_a . S_b expectation of a pair density matrix.
double pair_correlator(const PairDensityMatrix& rho);

/// Projection of a pair density matrix onto its SU(2)-invariant part.
PairDensityMatrix su2_twirl(const PairDensityMatrix& rho);

PairDensityMatrix reduce_state_to_pair(const ChainSpec& spec, const SectorBasis& basis,
                                       const Eigen::VectorXd& vec, SitePair pair);

/// Per-eigenstate pair reductions of a decomposition, cached so thermal
/// sums at many temperatures cost one reduction per state.
class PairEnsemble {
 public:
  PairEnsemble(const SpectralDecomposition& decomposition, SitePair pair);

  SitePair pair() const { return pair_; }
  const PairDensityMatrix& state(std::size_t k) const { return states_[k]; }

  // Boltzmann-weighted pair density matrix. Throws NumericalError when the
  // truncation bound exceeds truncation_tolerance.
  PairDensityMatrix thermal(const ThermalSpec& thermal,
                            double truncation_tolerance = 1e-6) const;
  CorrelatorEstimate correlator(const ThermalSpec& thermal,
                                double truncation_tolerance = 1e-6) const;

  // Relative Boltzmann weight that the states missing from a truncated
  // spectrum could carry at most; 0 in full mode.
  double truncation_bound(const ThermalSpec& thermal) const;

 private:
  std::vector<long double> weights(const ThermalSpec& thermal) const;

  const SpectralDecomposition* decomposition_;
  SitePair pair_;
  std::vector<PairDensityMatrix> states_;
};

PairDensityMatrix reduce_to_pair(const SpectralDecomposition& decomposition, std::size_t k,
                                 SitePair pair);
PairDensityMatrix reduce_to_pair(const SpectralDecomposition& decomposition,
                                 const ThermalSpec& thermal, SitePair pair);
CorrelatorEstimate thermal_correlator(const SpectralDecomposition& decomposition,
                                      const ThermalSpec& thermal, SitePair pair,
                                      double truncation_tolerance = 1e-6);

/// Tr(rho H) evaluated from the eigenvalues.
double thermal_energy(const SpectralDecomposition& decomposition, const ThermalSpec& thermal);

/// Energy levels grouped into degenerate multiplets.
struct Level {
  double energy;
  std::vector<std::size_t> members;
  int degeneracy;  // counts multiplicities in folded mode
};
std::vector<Level> energy_levels(const SpectralDecomposition& decomposition,
                                 double tolerance = 1e-8);

struct ExcitedPairResult {
  PairDensityMatrix rho;
  double excited_energy = 0.0;
  int multiplet_dim = 0;
  double beta_probe = 0.0;
  double excited_weight = 0.0;  // Boltzmann weight of the excited multiplet in rho(beta)
  double contamination = 0.0;   // relative weight of the next level
};

inline constexpr double kMaxExcitedContamination = 1e-6;
inline constexpr double kMinExcitedWeight = 1e-12;

/// Inverse temperature at which the level above the first excitation is
/// suppressed to 1e-8 relative to it, the default probe for the subtraction.
double default_beta_probe(const SpectralDecomposition& decomposition);

/// First-excited-multiplet pair density matrix extracted from the thermal
/// state: rho(beta) minus its ground-multiplet part, renormalized.
ExcitedPairResult excited_pair_dm_by_subtraction(const SpectralDecomposition& decomposition,
                                                 SitePair pair, double beta_probe);

/// The same object built directly: Lanczos resolves every Sz member of the
/// first excited multiplet and their pair reductions are averaged.
ExcitedPairResult excited_pair_dm_direct(const ChainSpec& spec, SitePair pair,
                                         const LanczosOptions& options = {});

struct GapResult {
  double ground_energy;
  double first_excited_energy;
  double gap;
};

GapResult spin_gap(const ChainSpec& spec, const LanczosOptions& options = {});

}  // namespace mixspin

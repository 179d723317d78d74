#include "mixspin/exact_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mixspin/error.hpp"

namespace mixspin {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

namespace {

constexpr double kLevelTolerance = 1e-8;

int twice_spin_from_s2(double s2) {
  // S(S+1) = s2  ->  2S = sqrt(4 s2 + 1) - 1
  return static_cast<int>(std::lround(std::sqrt(4.0 * std::max(s2, 0.0) + 1.0) - 1.0));
}

void annotate_total_spin(SpectralDecomposition& d) {
  d.twice_total_spin.resize(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    d.twice_total_spin[k] =
        twice_spin_from_s2(total_spin_squared(d.spec, d.basis_of(k), d.eigenvectors[k]));
  }
}

void sort_by_energy(SpectralDecomposition& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.eigenvalues[a] < d.eigenvalues[b];
  });
  const auto permute = [&](auto& v) {
    auto copy = v;
    for (std::size_t k = 0; k < order.size(); ++k) v[k] = std::move(copy[order[k]]);
  };
  permute(d.eigenvalues);
  permute(d.twice_sz);
  permute(d.residuals);
  permute(d.eigenvectors);
  if (d.twice_total_spin.size() == order.size()) permute(d.twice_total_spin);
}

double residual_norm(const SparseRealMatrix& h, const Eigen::VectorXd& v, double e) {
  return (h.apply(v) - e * v).norm();
}

}  // namespace

bool SpectralDecomposition::su2_folded() const {
  return mode == SpectrumMode::truncated &&
         std::all_of(twice_sz.begin(), twice_sz.end(), [](int t) { return t == 0; });
}

int SpectralDecomposition::multiplicity(std::size_t k) const {
  return su2_folded() ? twice_total_spin[k] + 1 : 1;
}

const SectorBasis& SpectralDecomposition::basis_of(std::size_t k) const {
  return *sectors.at(twice_sz[k]);
}

SpectralDecomposition diagonalize(const ChainSpec& spec, const DiagonalizeOptions& options) {
  spec.validate();
  const ProductSpace space(spec);
  if (options.use_lanczos) {
    if (options.lanczos_k < 1 || options.lanczos_k > options.max_lanczos_k) {
      throw ValidationError("Lanczos k=" + std::to_string(options.lanczos_k) +
                            " outside 1.." + std::to_string(options.max_lanczos_k));
    }
    return lanczos_lowest(spec, options.lanczos_k, 0, options.lanczos);
  }
  if (space.dimension() > options.dense_cap) {
    throw ValidationError("Hilbert space dimension " + std::to_string(space.dimension()) +
                          " exceeds the dense cap " + std::to_string(options.dense_cap) +
                          "; request the Lanczos path instead");
  }

  SpectralDecomposition out;
  out.spec = spec;
  out.mode = SpectrumMode::full;
  out.full_dimension = space.dimension();
  for (const int label : sector_labels(spec)) {
    auto basis = std::make_shared<const SectorBasis>(enumerate_sector(spec, label));
    if (basis->size() == 0) continue;
    const auto h = build_hamiltonian(spec, basis.get(), {options.dense_cap});
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.to_dense());
    if (solver.info() != Eigen::Success) {
      throw NumericalError("dense eigensolver failed in sector 2Sz=" + std::to_string(label));
    }
    for (Eigen::Index c = 0; c < solver.eigenvalues().size(); ++c) {
      const Eigen::VectorXd v = solver.eigenvectors().col(c);
      out.eigenvalues.push_back(solver.eigenvalues()(c));
      out.twice_sz.push_back(label);
      out.residuals.push_back(residual_norm(h, v, solver.eigenvalues()(c)));
      out.eigenvectors.push_back(v);
    }
    out.sectors.emplace(label, std::move(basis));
  }
  sort_by_energy(out);
  annotate_total_spin(out);
  return out;
}

SpectralDecomposition lanczos_lowest(const ChainSpec& spec, int k, int twice_sz,
                                     const LanczosOptions& options) {
  spec.validate();
  if (k < 1) throw ValidationError("Lanczos needs k >= 1");
  auto basis = std::make_shared<const SectorBasis>(enumerate_sector(spec, twice_sz));
  const auto n = static_cast<Eigen::Index>(basis->size());
  if (n == 0) throw ValidationError("sector 2Sz=" + std::to_string(twice_sz) + " is empty");
  if (k > n) {
    throw ValidationError("requested " + std::to_string(k) + " states from a sector of dimension " +
                          std::to_string(n));
  }
  const auto h = build_hamiltonian(spec, basis.get(), {options.max_dimension});

  SpectralDecomposition out;
  out.spec = spec;
  out.mode = SpectrumMode::truncated;
  out.full_dimension = ProductSpace(spec).dimension();

  if (n <= 256) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.to_dense());
    for (Eigen::Index c = 0; c < k; ++c) {
      const Eigen::VectorXd v = solver.eigenvectors().col(c);
      out.eigenvalues.push_back(solver.eigenvalues()(c));
      out.twice_sz.push_back(twice_sz);
      out.residuals.push_back(residual_norm(h, v, solver.eigenvalues()(c)));
      out.eigenvectors.push_back(v);
    }
  } else {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXd> locked;
    const auto project_out = [&](Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& set) {
      for (const auto& u : set) w -= u.dot(w) * u;
    };

    for (int t = 0; t < k; ++t) {
      Eigen::VectorXd v(n);
      for (Eigen::Index r = 0; r < n; ++r) v(r) = normal(rng);
      project_out(v, locked);
      project_out(v, locked);
      v.normalize();

      std::vector<Eigen::VectorXd> krylov{v};
      std::vector<double> alphas;
      std::vector<double> betas;
      const auto max_m = std::min<Eigen::Index>(options.max_iterations,
                                                n - static_cast<Eigen::Index>(locked.size()));
      Eigen::VectorXd ritz;
      double theta = 0.0;
      double best_estimate = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0;; ++j) {
        Eigen::VectorXd w = h.apply(krylov.back());
        if (j > 0) w -= betas.back() * krylov[krylov.size() - 2];
        const double a = krylov.back().dot(w);
        w -= a * krylov.back();
        alphas.push_back(a);
        for (int pass = 0; pass < 2; ++pass) {
          project_out(w, krylov);
          project_out(w, locked);
        }
        const double b = w.norm();
        const auto m = static_cast<Eigen::Index>(alphas.size());
        const bool exhausted = m >= max_m || b < 1e-13;
        if (exhausted || m % 4 == 0) {
          Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
          for (Eigen::Index r = 0; r < m; ++r) {
            tri(r, r) = alphas[static_cast<std::size_t>(r)];
            if (r + 1 < m) tri(r, r + 1) = tri(r + 1, r) = betas[static_cast<std::size_t>(r)];
          }
          const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(tri);
          theta = small.eigenvalues()(0);
          const double estimate = b * std::abs(small.eigenvectors()(m - 1, 0));
          best_estimate = std::min(best_estimate, estimate);
          if (exhausted || estimate < options.tolerance * std::max(1.0, std::abs(theta))) {
            ritz = Eigen::VectorXd::Zero(n);
            for (Eigen::Index r = 0; r < m; ++r) {
              ritz += small.eigenvectors()(r, 0) * krylov[static_cast<std::size_t>(r)];
            }
            break;
          }
        }
        betas.push_back(b);
        krylov.push_back(w / b);
      }
      project_out(ritz, locked);
      ritz.normalize();
      theta = ritz.dot(h.apply(ritz));
      const double res = residual_norm(h, ritz, theta);
      if (res > options.residual_bound) {
        throw NumericalError("Lanczos did not converge for state " + std::to_string(t) +
                             " in sector 2Sz=" + std::to_string(twice_sz) +
                             ": best residual " + std::to_string(std::min(res, best_estimate)));
      }
      locked.push_back(ritz);
      out.eigenvalues.push_back(theta);
      out.twice_sz.push_back(twice_sz);
      out.residuals.push_back(res);
      out.eigenvectors.push_back(ritz);
    }
  }
  out.sectors.emplace(twice_sz, std::move(basis));
  sort_by_energy(out);
  annotate_total_spin(out);
  return out;
}

double total_spin_squared(const ChainSpec& spec, const SectorBasis& basis,
                          const Eigen::VectorXd& vec) {
  const ProductSpace space(spec);
  const double m = 0.5 * basis.target_twice_sz;
  if (basis.target_twice_sz >= space.max_twice_sz()) return m * m + m;
  // <S^2> = M^2 + M + |S+ psi|^2
  const auto upper = enumerate_sector(spec, basis.target_twice_sz + 2);
  Eigen::VectorXd raised = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(upper.size()));
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto state = basis.states[k];
    for (int site = 0; site < space.n_sites(); ++site) {
      if (space.digit(state, site) == 0) continue;
      const double s = space.spin(site).s();
      const double mi = 0.5 * space.twice_m(state, site);
      const auto target = upper.find(state - space.stride(site));
      raised(static_cast<Eigen::Index>(*target)) +=
          std::sqrt(s * (s + 1) - mi * (mi + 1)) * vec(static_cast<Eigen::Index>(k));
    }
  }
  return m * m + m + raised.squaredNorm();
}

ThermalSpec ThermalSpec::from_kbt(double kbt) {
  if (kbt < 0.0 || !std::isfinite(kbt)) throw ValidationError("k_B T must be finite and >= 0");
  if (kbt == 0.0) return ground();
  return ThermalSpec{1.0 / kbt};
}

double PairDensityMatrix::min_eigenvalue() const {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double pair_correlator(const PairDensityMatrix& rho) {
  return (rho.matrix * exchange_coupling(rho.first, rho.second).to_dense()).trace();
}

PairDensityMatrix su2_twirl(const PairDensityMatrix& rho) {
  PairDensityMatrix out{rho.first, rho.second,
                        Eigen::MatrixXd::Zero(rho.matrix.rows(), rho.matrix.cols())};
  const int lo = std::abs(rho.first.twice_s - rho.second.twice_s);
  for (int tj = rho.first.twice_s + rho.second.twice_s; tj >= lo; tj -= 2) {
    const auto p = total_spin_projector(rho.first, rho.second, tj);
    out.matrix += ((p * rho.matrix).trace() / (tj + 1)) * p;
  }
  return out;
}

PairDensityMatrix reduce_state_to_pair(const ChainSpec& spec, const SectorBasis& basis,
                                       const Eigen::VectorXd& vec, SitePair pair) {
  validate_pair(spec, pair);
  const ProductSpace space(spec);
  const int i = pair.first;
  const int j = pair.second;
  const int db = space.local_dim(j);
  const int dp = space.local_dim(i) * db;

  struct Item {
    std::uint64_t rest;
    int local;
    double amp;
  };
  std::vector<Item> items;
  items.reserve(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto state = basis.states[k];
    const int a = space.digit(state, i);
    const int b = space.digit(state, j);
    const auto rest = state - static_cast<std::uint64_t>(a) * space.stride(i) -
                      static_cast<std::uint64_t>(b) * space.stride(j);
    items.push_back({rest, a * db + b, vec(static_cast<Eigen::Index>(k))});
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& x, const Item& y) { return x.rest < y.rest; });

  PairDensityMatrix rho{space.spin(i), space.spin(j), Eigen::MatrixXd::Zero(dp, dp)};
  for (std::size_t g = 0; g < items.size();) {
    std::size_t e = g;
    while (e < items.size() && items[e].rest == items[g].rest) ++e;
    for (std::size_t x = g; x < e; ++x) {
      for (std::size_t y = g; y < e; ++y) {
        rho.matrix(items[x].local, items[y].local) += items[x].amp * items[y].amp;
      }
    }
    g = e;
  }
  return rho;
}

PairEnsemble::PairEnsemble(const SpectralDecomposition& decomposition, SitePair pair)
    : decomposition_(&decomposition), pair_(pair) {
  validate_pair(decomposition.spec, pair);
  const bool folded = decomposition.su2_folded();
  states_.reserve(decomposition.size());
  for (std::size_t k = 0; k < decomposition.size(); ++k) {
    auto rho = reduce_state_to_pair(decomposition.spec, decomposition.basis_of(k),
                                    decomposition.eigenvectors[k], pair);
    // A folded spectrum stands in for whole multiplets, whose average is
    // the SU(2) projection of any single member.
    states_.push_back(folded ? su2_twirl(rho) : std::move(rho));
  }
}

std::vector<long double> PairEnsemble::weights(const ThermalSpec& thermal) const {
  const auto& d = *decomposition_;
  const double e0 = d.ground_energy();
  std::vector<long double> w(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double shifted = d.eigenvalues[k] - e0;
    if (thermal.is_ground()) {
      w[k] = shifted <= kLevelTolerance ? d.multiplicity(k) : 0.0L;
    } else {
      w[k] = d.multiplicity(k) * std::exp(-static_cast<long double>(thermal.beta) * shifted);
    }
  }
  return w;
}

double PairEnsemble::truncation_bound(const ThermalSpec& thermal) const {
  const auto& d = *decomposition_;
  if (d.mode == SpectrumMode::full) return 0.0;
  if (!d.su2_folded()) return std::numeric_limits<double>::infinity();
  std::uint64_t kept = 0;
  for (std::size_t k = 0; k < d.size(); ++k) kept += static_cast<std::uint64_t>(d.multiplicity(k));
  if (kept >= d.full_dimension) return 0.0;
  const double cut = d.eigenvalues.back() - d.ground_energy();
  if (thermal.is_ground()) {
    return cut > kLevelTolerance ? 0.0 : std::numeric_limits<double>::infinity();
  }
  const auto w = weights(thermal);
  const long double z = std::accumulate(w.begin(), w.end(), 0.0L);
  return static_cast<double>((d.full_dimension - kept) *
                             std::exp(-static_cast<long double>(thermal.beta) * cut) / z);
}

PairDensityMatrix PairEnsemble::thermal(const ThermalSpec& thermal,
                                        double truncation_tolerance) const {
  const double bound = truncation_bound(thermal);
  if (!(bound <= truncation_tolerance)) {
    throw NumericalError("truncated spectrum cannot represent k_B T=" +
                         std::to_string(thermal.kbt()) + ": truncation bound " +
                         std::to_string(bound) + " exceeds " +
                         std::to_string(truncation_tolerance));
  }
  const auto w = weights(thermal);
  const long double z = std::accumulate(w.begin(), w.end(), 0.0L);
  const auto dim = states_.front().matrix.rows();
  LongMatrix acc = LongMatrix::Zero(dim, dim);
  for (std::size_t k = 0; k < states_.size(); ++k) {
    if (w[k] == 0.0L) continue;
    acc += (w[k] / z) * states_[k].matrix.cast<long double>();
  }
  return {states_.front().first, states_.front().second, acc.cast<double>()};
}

CorrelatorEstimate PairEnsemble::correlator(const ThermalSpec& thermal,
                                            double truncation_tolerance) const {
  return {pair_, pair_correlator(this->thermal(thermal, truncation_tolerance)), 0.0,
          EstimateSource::ed};
}

PairDensityMatrix reduce_to_pair(const SpectralDecomposition& decomposition, std::size_t k,
                                 SitePair pair) {
  return reduce_state_to_pair(decomposition.spec, decomposition.basis_of(k),
                              decomposition.eigenvectors.at(k), pair);
}

PairDensityMatrix reduce_to_pair(const SpectralDecomposition& decomposition,
                                 const ThermalSpec& thermal, SitePair pair) {
  return PairEnsemble(decomposition, pair).thermal(thermal);
}

CorrelatorEstimate thermal_correlator(const SpectralDecomposition& decomposition,
                                      const ThermalSpec& thermal, SitePair pair,
                                      double truncation_tolerance) {
  return PairEnsemble(decomposition, pair).correlator(thermal, truncation_tolerance);
}

double thermal_energy(const SpectralDecomposition& d, const ThermalSpec& thermal) {
  const double e0 = d.ground_energy();
  long double z = 0.0L;
  long double acc = 0.0L;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double shifted = d.eigenvalues[k] - e0;
    long double w = 0.0L;
    if (thermal.is_ground()) {
      w = shifted <= kLevelTolerance ? d.multiplicity(k) : 0.0L;
    } else {
      w = d.multiplicity(k) * std::exp(-static_cast<long double>(thermal.beta) * shifted);
    }
    z += w;
    acc += w * shifted;
  }
  return e0 + static_cast<double>(acc / z);
}

std::vector<Level> energy_levels(const SpectralDecomposition& d, double tolerance) {
  std::vector<Level> levels;
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (levels.empty() || d.eigenvalues[k] - levels.back().energy > tolerance) {
      levels.push_back({d.eigenvalues[k], {}, 0});
    }
    levels.back().members.push_back(k);
    levels.back().degeneracy += d.multiplicity(k);
  }
  return levels;
}

double default_beta_probe(const SpectralDecomposition& decomposition) {
  const auto levels = energy_levels(decomposition);
  if (levels.size() < 3) {
    throw NumericalError("spectrum has fewer than three levels; no excited-state probe");
  }
  const double split = levels[2].energy - levels[1].energy;
  const double ratio = static_cast<double>(levels[2].degeneracy) / levels[1].degeneracy;
  return std::log(ratio / 1e-8) / split;
}

ExcitedPairResult excited_pair_dm_by_subtraction(const SpectralDecomposition& decomposition,
                                                 SitePair pair, double beta_probe) {
  if (!(beta_probe > 0.0) || !std::isfinite(beta_probe)) {
    throw ValidationError("beta_probe must be finite and positive");
  }
  const auto levels = energy_levels(decomposition);
  if (levels.size() < 3) {
    throw NumericalError("spectrum has fewer than three levels; cannot isolate the excitation");
  }
  const auto& ground = levels[0];
  const auto& first = levels[1];
  const auto& second = levels[2];

  ExcitedPairResult result;
  result.beta_probe = beta_probe;
  result.excited_energy = first.energy;
  result.multiplet_dim = first.degeneracy;
  result.contamination = static_cast<double>(second.degeneracy) / first.degeneracy *
                         std::exp(-beta_probe * (second.energy - first.energy));
  const ThermalSpec thermal{beta_probe};
  const PairEnsemble ensemble(decomposition, pair);
  result.contamination += ensemble.truncation_bound(thermal);
  if (result.contamination > kMaxExcitedContamination) {
    throw NumericalError("beta_probe=" + std::to_string(beta_probe) +
                         " too small: higher levels carry relative weight " +
                         std::to_string(result.contamination));
  }

  long double z = 0.0L;
  for (const auto& level : levels) {
    z += level.degeneracy *
         std::exp(-static_cast<long double>(beta_probe) * (level.energy - ground.energy));
  }
  // Both terms below keep the Boltzmann normalization of rho(beta).
  const long double ground_weight = ground.degeneracy / z;
  result.excited_weight = static_cast<double>(
      first.degeneracy * std::exp(-static_cast<long double>(beta_probe) *
                                  (first.energy - ground.energy)) / z);
  if (result.excited_weight < kMinExcitedWeight) {
    throw NumericalError("beta_probe=" + std::to_string(beta_probe) +
                         " too large: excited weight " + std::to_string(result.excited_weight) +
                         " is numerically degenerate");
  }

  // rho(beta) assembled in extended precision, then the ground multiplet
  // (equal-weight average, times its Boltzmann share) is removed.
  const auto dim = ensemble.state(0).matrix.rows();
  LongMatrix thermal_rho = LongMatrix::Zero(dim, dim);
  LongMatrix ground_rho = LongMatrix::Zero(dim, dim);
  for (const auto& level : levels) {
    const long double w = std::exp(-static_cast<long double>(beta_probe) *
                                   (level.energy - ground.energy)) / z;
    for (const auto k : level.members) {
      thermal_rho += (w * decomposition.multiplicity(k)) * ensemble.state(k).matrix.cast<long double>();
    }
  }
  for (const auto k : ground.members) {
    ground_rho += static_cast<long double>(decomposition.multiplicity(k)) / ground.degeneracy *
                  ensemble.state(k).matrix.cast<long double>();
  }
  LongMatrix excited = thermal_rho - ground_weight * ground_rho;
  excited /= excited.trace();

  result.rho = {ensemble.state(0).first, ensemble.state(0).second, excited.cast<double>()};
  if (result.rho.min_eigenvalue() < -kMaxExcitedContamination) {
    throw NumericalError("subtracted pair density matrix has eigenvalue " +
                         std::to_string(result.rho.min_eigenvalue()) + " below tolerance");
  }
  return result;
}

ExcitedPairResult excited_pair_dm_direct(const ChainSpec& spec, SitePair pair,
                                         const LanczosOptions& options) {
  validate_pair(spec, pair);
  const auto zero_sector = enumerate_sector(spec, 0).size();
  const int k0 = static_cast<int>(std::min<std::size_t>(6, zero_sector));
  const auto low = lanczos_lowest(spec, k0, 0, options);
  const auto levels = energy_levels(low);
  if (levels.size() < 2 || levels[1].members.back() + 1 == low.size()) {
    throw NumericalError("first excited level not resolved within the lowest " +
                         std::to_string(k0) + " Sz=0 states");
  }
  const auto& first = levels[1];
  int max_twice_spin = 0;
  for (const auto k : first.members) max_twice_spin = std::max(max_twice_spin, low.twice_total_spin[k]);
  const int below = static_cast<int>(first.members.back()) + 1;

  ExcitedPairResult result;
  result.excited_energy = first.energy;
  Eigen::MatrixXd acc;
  int count = 0;
  for (int tm = -max_twice_spin; tm <= max_twice_spin; tm += 2) {
    const auto sector_size = static_cast<int>(enumerate_sector(spec, tm).size());
    const auto part = tm == 0 ? low : lanczos_lowest(spec, std::min(below + 1, sector_size), tm, options);
    for (std::size_t k = 0; k < part.size(); ++k) {
      if (std::abs(part.eigenvalues[k] - first.energy) > kLevelTolerance) continue;
      const auto rho = reduce_to_pair(part, k, pair);
      if (count == 0) {
        acc = rho.matrix;
        result.rho = rho;
      } else {
        acc += rho.matrix;
      }
      ++count;
    }
  }
  result.rho.matrix = acc / count;
  result.multiplet_dim = count;
  return result;
}

GapResult spin_gap(const ChainSpec& spec, const LanczosOptions& options) {
  const auto zero = lanczos_lowest(spec, 2, 0, options);
  double first = zero.eigenvalues[1];
  const auto sector2 = enumerate_sector(spec, 2).size();
  if (sector2 > 0) {
    const auto two = lanczos_lowest(spec, 1, 2, options);
    first = std::min(first, two.eigenvalues[0]);
  }
  double gap = first - zero.eigenvalues[0];
  if (gap < 0.0 && gap > -1e-10) gap = 0.0;
  return {zero.eigenvalues[0], first, gap};
}

}  // namespace mixspin

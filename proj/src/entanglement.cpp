#include "mixspin/entanglement.hpp"

#include <algorithm>
#include <cmath>

#include "mixspin/error.hpp"
#include "mixspin/statistics.hpp"

namespace mixspin {

namespace {
constexpr double kNegativeFloor = 1e-14;
}  // namespace

PairKind pair_kind(SpinValue a, SpinValue b) {
  if (a == kSpinHalf && b == kSpinHalf) return PairKind::half_half;
  if (a == kSpinOne && b == kSpinOne) return PairKind::one_one;
  if ((a == kSpinHalf && b == kSpinOne) || (a == kSpinOne && b == kSpinHalf)) {
    return PairKind::half_one;
  }
  throw ValidationError("pair spins outside {1/2, 1}");
}

std::string to_string(PairKind kind) {
  switch (kind) {
    case PairKind::half_half: return "(1/2,1/2)";
    case PairKind::half_one: return "(1/2,1)";
    case PairKind::one_one: return "(1,1)";
  }
  return "?";
}

SU2PairState g_from_correlator(SpinValue first, SpinValue second, double c) {
  return g_from_correlator(first, second, CorrelatorEstimate{{}, c, 0.0, EstimateSource::ed});
}

SU2PairState g_from_correlator(SpinValue first, SpinValue second, const CorrelatorEstimate& c) {
  SU2PairState state{first, second, 0.0, 0.0};
  switch (pair_kind(first, second)) {
    case PairKind::half_half:
      state.g = 0.25 - c.value;
      state.g_error = c.error;
      break;
    case PairKind::half_one:
      state.g = (1.0 - 2.0 * c.value) / 3.0;
      state.g_error = 2.0 / 3.0 * c.error;
      break;
    case PairKind::one_one:
      throw ValidationError("(1,1) pairs are not fixed by <S.S> alone");
  }
  return state;
}

double correlator_from_g(const SU2PairState& state) {
  switch (state.kind()) {
    case PairKind::half_half: return 0.25 - state.g;
    case PairKind::half_one: return 0.5 * (1.0 - 3.0 * state.g);
    case PairKind::one_one: break;
  }
  throw ValidationError("(1,1) pairs have no single-g representation");
}

PairDensityMatrix expand(const SU2PairState& state) {
  const auto kind = state.kind();
  if (kind == PairKind::one_one) {
    throw ValidationError("(1,1) pairs have no single-g representation");
  }
  const int low = std::abs(state.first.twice_s - state.second.twice_s);
  const int high = state.first.twice_s + state.second.twice_s;
  // Low-spin multiplet carries g, high-spin carries 1-g, spread evenly.
  const double w_low = state.g / (low + 1);
  const double w_high = (1.0 - state.g) / (high + 1);
  return {state.first, state.second,
          w_low * total_spin_projector(state.first, state.second, low) +
              w_high * total_spin_projector(state.first, state.second, high)};
}

Eigen::MatrixXd partial_transpose(const PairDensityMatrix& rho, Subsystem which) {
  const int da = rho.first.dim();
  const int db = rho.second.dim();
  if (rho.matrix.rows() != da * db || rho.matrix.cols() != da * db) {
    throw ValidationError("pair density matrix shape does not match its spins");
  }
  Eigen::MatrixXd out(da * db, da * db);
  for (int a = 0; a < da; ++a) {
    for (int b = 0; b < db; ++b) {
      for (int ap = 0; ap < da; ++ap) {
        for (int bp = 0; bp < db; ++bp) {
          const double v = which == Subsystem::second ? rho.matrix(a * db + bp, ap * db + b)
                                                      : rho.matrix(ap * db + b, a * db + bp);
          out(a * db + b, ap * db + bp) = v;
        }
      }
    }
  }
  return out;
}

NegativityResult log_negativity(const PairDensityMatrix& rho, Subsystem which) {
  const double asym = (rho.matrix - rho.matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw ValidationError("density matrix is not Hermitian (asymmetry " + std::to_string(asym) +
                          ")");
  }
  const Eigen::MatrixXd pt = partial_transpose(rho, which);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (pt + pt.transpose()),
                                                              Eigen::EigenvaluesOnly);
  NegativityResult out;
  out.method = NegativityMethod::numeric_pt;
  out.pt_spectrum.assign(solver.eigenvalues().data(),
                         solver.eigenvalues().data() + solver.eigenvalues().size());
  // Trace norm as Tr + 2 sum|negative|, with roundoff-level negatives dropped
  // so separable states give exactly zero.
  double negative = 0.0;
  for (const double l : out.pt_spectrum) {
    if (l < -kNegativeFloor) negative -= l;
  }
  out.value = std::log2(1.0 + 2.0 * negative / pt.trace());
  return out;
}

NegativityResult log_negativity_closed_form_11(double g) {
  NegativityResult out;
  out.method = NegativityMethod::closed_form;
  out.value = std::log2(std::max(1.0, 2.0 * g));
  // rho^Gamma of the Werner family: (1-2g)/2 once, (1+2g)/6 three times.
  const double single = (1.0 - 2.0 * g) / 2.0;
  const double triple = (1.0 + 2.0 * g) / 6.0;
  out.pt_spectrum = {single, triple, triple, triple};
  std::sort(out.pt_spectrum.begin(), out.pt_spectrum.end());
  return out;
}

namespace {

double clamp01(double g) { return std::clamp(g, 0.0, 1.0); }

double negativity_at(SpinValue a, SpinValue b, double g) {
  return log_negativity(expand({a, b, clamp01(g), 0.0})).value;
}

double min_pt_eigenvalue(SpinValue a, SpinValue b, double g) {
  const auto r = log_negativity(expand({a, b, g, 0.0}));
  return r.pt_spectrum.front();
}

void flag_window(const SU2PairState& s, NegativityResult& out) {
  constexpr double slack = 1e-12;
  if (s.g < -slack || s.g > 1.0 + slack) out.flags.push_back("g-out-of-window");
}

}  // namespace

double separability_boundary(SpinValue first, SpinValue second) {
  if (pair_kind(first, second) == PairKind::half_half) return 0.5;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (min_pt_eigenvalue(first, second, mid) < 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

NegativityResult negativity_with_error(const SU2PairState& state) {
  const double g = clamp01(state.g);
  auto out = log_negativity(expand({state.first, state.second, g, 0.0}));
  flag_window(state, out);
  if (state.g_error == 0.0) return out;

  const double boundary = separability_boundary(state.first, state.second);
  if (state.g + 2.0 * state.g_error < boundary) {
    out.value = 0.0;
    out.error = 0.0;
    out.flags.push_back("deep-separable");
    return out;
  }
  constexpr double h = 1e-6;
  const double n0 = out.value;
  const double left = g - h >= 0.0 ? (n0 - negativity_at(state.first, state.second, g - h)) / h : 0.0;
  const double right = g + h <= 1.0 ? (negativity_at(state.first, state.second, g + h) - n0) / h : 0.0;
  out.error = std::max(std::abs(left), std::abs(right)) * state.g_error;
  if (out.error == 0.0 && g < boundary) {
    // Flat side of the kink: half the rise over a 2 sigma excursion.
    const double up = clamp01(g + 2.0 * state.g_error);
    out.error = 0.5 * (negativity_at(state.first, state.second, up) - n0);
  }
  return out;
}

NegativityResult negativity_with_error(SpinValue first, SpinValue second,
                                       std::span<const double> bin_correlators) {
  if (bin_correlators.empty()) throw ValidationError("no bins supplied");
  const double c = stats::mean(bin_correlators);
  const auto state = g_from_correlator(first, second,
                                       CorrelatorEstimate{{}, c, stats::standard_error(bin_correlators),
                                                          EstimateSource::qmc});
  auto out = log_negativity(expand({first, second, clamp01(state.g), 0.0}));
  flag_window(state, out);
  const auto jk = stats::jackknife(bin_correlators, [&](double cb) {
    return negativity_at(first, second, g_from_correlator(first, second, cb).g);
  });
  out.error = jk.error;
  return out;
}

}  // namespace mixspin

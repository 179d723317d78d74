#pragma once

#include <span>
#include <string>
#include <vector>

#include "mixspin/exact_engine.hpp"

namespace mixspin {

enum class PairKind { half_half, half_one, one_one };

PairKind pair_kind(SpinValue a, SpinValue b);
std::string to_string(PairKind kind);

/// Two-spin SU(2)-invariant state fixed by one weight g: the singlet weight
/// for (1/2,1/2), the total-spin-1/2 weight for (1/2,1). g is stored as
/// estimated, even outside [0,1].
struct SU2PairState {
  SpinValue first = kSpinHalf;
  SpinValue second = kSpinHalf;
  double g = 0.0;
  double g_error = 0.0;

  PairKind kind() const { return pair_kind(first, second); }
  bool in_window() const { return g >= 0.0 && g <= 1.0; }
};

/// g as a linear function of <S_a.S_b>. Throws ValidationError for (1,1)
/// pairs, whose invariant family needs a second parameter.
SU2PairState g_from_correlator(SpinValue first, SpinValue second, const CorrelatorEstimate& c);
SU2PairState g_from_correlator(SpinValue first, SpinValue second, double correlator);

/// Inverse of g_from_correlator.
double correlator_from_g(const SU2PairState& state);

/// Explicit density matrix built from total-spin projectors. Uses g as is;
/// an out-of-window g yields small negative eigenvalues.
PairDensityMatrix expand(const SU2PairState& state);

enum class Subsystem { first, second };

Eigen::MatrixXd partial_transpose(const PairDensityMatrix& rho, Subsystem which = Subsystem::second);

enum class NegativityMethod { closed_form, numeric_pt };

struct NegativityResult {
  double value = 0.0;  // log base 2
  double error = 0.0;
  std::vector<double> pt_spectrum;
  NegativityMethod method = NegativityMethod::numeric_pt;
  std::vector<std::string> flags;
};

/// log2 of the trace norm of rho^Gamma. Throws ValidationError when rho is
/// not symmetric to 1e-10.
NegativityResult log_negativity(const PairDensityMatrix& rho, Subsystem which = Subsystem::second);

/// log2(max(1, 2g)) for the (1/2,1/2) family.
NegativityResult log_negativity_closed_form_11(double g);

/// Largest g at which the one-parameter family is still separable
/// (1/2 for two spin-1/2, found by bisection on the numeric spectrum otherwise).
double separability_boundary(SpinValue first, SpinValue second);

/// Negativity at the projected g with a delta-method error (one-sided
/// derivatives around the separability kink).
NegativityResult negativity_with_error(const SU2PairState& state);

/// Same, with a jackknife error over per-bin correlator means.
NegativityResult negativity_with_error(SpinValue first, SpinValue second,
                                       std::span<const double> bin_correlators);

}  // namespace mixspin

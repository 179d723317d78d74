#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mixspin {

/// Spin magnitude stored as 2s so half-integers stay exact.
struct SpinValue {
  int twice_s = 1;

  constexpr int dim() const { return twice_s + 1; }
  constexpr double s() const { return 0.5 * twice_s; }
  constexpr bool operator==(const SpinValue&) const = default;
};

inline constexpr SpinValue kSpinHalf{1};
inline constexpr SpinValue kSpinOne{2};

/// Local spin matrices in the |s,m> basis ordered m = s, s-1, ..., -s.
struct LocalOperators {
  SpinValue s;
  Eigen::MatrixXd sz;
  Eigen::MatrixXd s_plus;
  Eigen::MatrixXd s_minus;
};

LocalOperators make_local_operators(SpinValue s);

/// Real sparse matrix held as (row, col, value) entries in row-major,
/// column-ascending order with unique keys.
class SparseRealMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseRealMatrix() = default;

  // Sorts, merges duplicate keys by summation and drops exact zeros.
  SparseRealMatrix(std::size_t dimension, std::vector<Entry> entries);

  std::size_t dimension() const { return dimension_; }
  std::size_t nonzeros() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  // y = A x. Each row is summed in column order, so results do not depend
  // on how the rows are scheduled.
  void apply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd to_dense() const;
  double trace() const;
  bool is_symmetric(double tol = 0.0) const;

 private:
  std::size_t dimension_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::size_t> row_start_;
};

/// S_a . S_b on the product space, index = ia * dim(b) + ib.
SparseRealMatrix exchange_coupling(SpinValue sa, SpinValue sb);

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> in the Condon-Shortley
/// convention. All arguments are twice the physical quantum number.
/// Returns 0 for any inconsistent combination.
double clebsch_gordan(int twice_j1, int twice_j2, int twice_m1, int twice_m2, int twice_J,
                      int twice_M);

/// Orthogonal matrix whose column (J, M) holds the coupled state |J M>
/// expanded in the product basis. Columns are ordered by J descending, then
/// M descending.
struct CoupledBasis {
  Eigen::MatrixXd vectors;
  std::vector<int> twice_J;
  std::vector<int> twice_M;
};

CoupledBasis coupled_basis(SpinValue sa, SpinValue sb);

/// Projector onto total pair spin J (twice_J) in the product space.
Eigen::MatrixXd total_spin_projector(SpinValue sa, SpinValue sb, int twice_J);

}  // namespace mixspin

#include "mixspin/spin_algebra.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdlib>

namespace mixspin {

LocalOperators make_local_operators(SpinValue s) {
  const int d = s.dim();
  LocalOperators ops{s, Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                     Eigen::MatrixXd::Zero(d, d)};
  const double ss = s.s() * (s.s() + 1.0);
  for (int k = 0; k < d; ++k) {
    const double m = s.s() - k;
    ops.sz(k, k) = m;
    if (k > 0) ops.s_plus(k - 1, k) = std::sqrt(ss - m * (m + 1.0));
  }
  ops.s_minus = ops.s_plus.transpose();
  return ops;
}

SparseRealMatrix::SparseRealMatrix(std::size_t dimension, std::vector<Entry> entries)
    : dimension_(dimension) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  entries_.reserve(entries.size());
  for (const auto& e : entries) {
    assert(e.row < dimension && e.col < dimension);
    if (!entries_.empty() && entries_.back().row == e.row && entries_.back().col == e.col) {
      entries_.back().value += e.value;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });

  row_start_.assign(dimension_ + 1, 0);
  for (const auto& e : entries_) ++row_start_[e.row + 1];
  for (std::size_t r = 0; r < dimension_; ++r) row_start_[r + 1] += row_start_[r];
}

void SparseRealMatrix::apply(std::span<const double> x, std::span<double> y) const {
  assert(x.size() == dimension_ && y.size() == dimension_);
  for (std::size_t r = 0; r < dimension_; ++r) {
    double acc = 0.0;
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      acc += entries_[k].value * x[entries_[k].col];
    }
    y[r] = acc;
  }
}

Eigen::VectorXd SparseRealMatrix::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(dimension_));
  apply(std::span<const double>(x.data(), dimension_), std::span<double>(y.data(), dimension_));
  return y;
}

Eigen::MatrixXd SparseRealMatrix::to_dense() const {
  const auto d = static_cast<Eigen::Index>(dimension_);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (const auto& e : entries_) {
    m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
  }
  return m;
}

double SparseRealMatrix::trace() const {
  double t = 0.0;
  for (const auto& e : entries_) {
    if (e.row == e.col) t += e.value;
  }
  return t;
}

bool SparseRealMatrix::is_symmetric(double tol) const {
  for (const auto& e : entries_) {
    const auto begin = entries_.begin() + static_cast<std::ptrdiff_t>(row_start_[e.col]);
    const auto end = entries_.begin() + static_cast<std::ptrdiff_t>(row_start_[e.col + 1]);
    const auto it = std::lower_bound(begin, end, e.row,
                                     [](const Entry& x, std::size_t c) { return x.col < c; });
    const double mirror = (it != end && it->col == e.row) ? it->value : 0.0;
    if (std::abs(mirror - e.value) > tol) return false;
  }
  return true;
}

SparseRealMatrix exchange_coupling(SpinValue sa, SpinValue sb) {
  const auto a = make_local_operators(sa);
  const auto b = make_local_operators(sb);
  const int da = sa.dim();
  const int db = sb.dim();
  std::vector<SparseRealMatrix::Entry> entries;
  for (int ia = 0; ia < da; ++ia) {
    for (int ib = 0; ib < db; ++ib) {
      const auto col = static_cast<std::size_t>(ia * db + ib);
      const double diag = a.sz(ia, ia) * b.sz(ib, ib);
      if (diag != 0.0) entries.push_back({col, col, diag});
      // S+_a S-_b and S-_a S+_b, each with weight 1/2.
      if (ia > 0 && ib + 1 < db) {
        const auto row = static_cast<std::size_t>((ia - 1) * db + ib + 1);
        entries.push_back({row, col, 0.5 * a.s_plus(ia - 1, ia) * b.s_minus(ib + 1, ib)});
      }
      if (ia + 1 < da && ib > 0) {
        const auto row = static_cast<std::size_t>((ia + 1) * db + ib - 1);
        entries.push_back({row, col, 0.5 * a.s_minus(ia + 1, ia) * b.s_plus(ib - 1, ib)});
      }
    }
  }
  return SparseRealMatrix(static_cast<std::size_t>(da * db), std::move(entries));
}

namespace {

double factorial(int n) {
  static const auto table = [] {
    std::array<double, 64> t{};
    t[0] = 1.0;
    for (std::size_t k = 1; k < t.size(); ++k) t[k] = t[k - 1] * static_cast<double>(k);
    return t;
  }();
  assert(n >= 0 && n < static_cast<int>(table.size()));
  return table[static_cast<std::size_t>(n)];
}

}  // namespace

double clebsch_gordan(int tj1, int tj2, int tm1, int tm2, int tJ, int tM) {
  if (tj1 < 0 || tj2 < 0 || tJ < 0) return 0.0;
  if (tm1 + tm2 != tM) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tJ) return 0.0;
  if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tJ + tM) % 2 != 0) return 0.0;
  if ((tj1 + tj2 + tJ) % 2 != 0) return 0.0;
  if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2) return 0.0;

  // Racah's closed form; every half-sum below is an integer here.
  const int a = (tj1 + tj2 - tJ) / 2;
  const int b = (tj1 - tm1) / 2;
  const int c = (tj2 + tm2) / 2;
  const int d = (tJ - tj2 + tm1) / 2;
  const int e = (tJ - tj1 - tm2) / 2;

  const double pre = std::sqrt((tJ + 1) * factorial((tJ + tj1 - tj2) / 2) *
                               factorial((tJ - tj1 + tj2) / 2) * factorial(a) /
                               factorial((tj1 + tj2 + tJ) / 2 + 1)) *
                     std::sqrt(factorial((tJ + tM) / 2) * factorial((tJ - tM) / 2) *
                               factorial((tj1 - tm1) / 2) * factorial((tj1 + tm1) / 2) *
                               factorial((tj2 - tm2) / 2) * factorial((tj2 + tm2) / 2));
  double sum = 0.0;
  const int k_min = std::max({0, -d, -e});
  const int k_max = std::min({a, b, c});
  for (int k = k_min; k <= k_max; ++k) {
    const double term = 1.0 / (factorial(k) * factorial(a - k) * factorial(b - k) *
                               factorial(c - k) * factorial(d + k) * factorial(e + k));
    sum += (k % 2 == 0) ? term : -term;
  }
  return pre * sum;
}

CoupledBasis coupled_basis(SpinValue sa, SpinValue sb) {
  const int da = sa.dim();
  const int db = sb.dim();
  CoupledBasis basis;
  basis.vectors = Eigen::MatrixXd::Zero(da * db, da * db);
  int column = 0;
  for (int tJ = sa.twice_s + sb.twice_s; tJ >= std::abs(sa.twice_s - sb.twice_s); tJ -= 2) {
    for (int tM = tJ; tM >= -tJ; tM -= 2) {
      for (int ia = 0; ia < da; ++ia) {
        for (int ib = 0; ib < db; ++ib) {
          const int tma = sa.twice_s - 2 * ia;
          const int tmb = sb.twice_s - 2 * ib;
          basis.vectors(ia * db + ib, column) =
              clebsch_gordan(sa.twice_s, sb.twice_s, tma, tmb, tJ, tM);
        }
      }
      basis.twice_J.push_back(tJ);
      basis.twice_M.push_back(tM);
      ++column;
    }
  }
  return basis;
}

Eigen::MatrixXd total_spin_projector(SpinValue sa, SpinValue sb, int twice_J) {
  const auto basis = coupled_basis(sa, sb);
  const auto n = basis.vectors.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    if (basis.twice_J[static_cast<std::size_t>(c)] == twice_J) {
      p += basis.vectors.col(c) * basis.vectors.col(c).transpose();
    }
  }
  return p;
}

}  // namespace mixspin

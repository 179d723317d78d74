#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixspin/spin_algebra.hpp"

namespace mixspin {

enum class Boundary { periodic, open };

/// The 1/2-1/2-1-1 ring. Energies are in units of J1, so j1 stays 1 unless a
/// caller rescales deliberately; alpha = J2/J1.
struct ChainSpec {
  int n_sites = 4;
  double j1 = 1.0;
  double alpha = 0.0;
  Boundary boundary = Boundary::periodic;

  double j2() const { return alpha * j1; }

  // Throws ValidationError on N not a positive multiple of 4, alpha < 0,
  // j1 <= 0 or an open boundary.
  void validate() const;

  // Canonical "n_sites=..;alpha=..;boundary=.." text, hashed for provenance.
  std::string canonical() const;
};

/// Spin of a 0-based site: positions 0,1 of each cell carry 1/2, positions 2,3 carry 1.
constexpr SpinValue site_spin(int site) { return (site % 4) < 2 ? kSpinHalf : kSpinOne; }

/// Unordered pair of distinct sites, stored 0-based. Everything user-facing
/// (CSV, errors) goes through the 1-based accessors.
struct SitePair {
  int first = 0;
  int second = 1;

  static SitePair from_one_based(int i, int j) { return SitePair{i - 1, j - 1}; }
  int first_one_based() const { return first + 1; }
  int second_one_based() const { return second + 1; }
  std::string to_string() const;
  bool operator==(const SitePair&) const = default;
};

void validate_pair(const ChainSpec& spec, SitePair pair);

struct Bond {
  int site_i;
  int site_j;
  double coupling;
};

using BondList = std::vector<Bond>;

BondList make_bonds(const ChainSpec& spec);

/// Mixed-radix indexing of product states. Site 0 is the most significant
/// digit, so index order is lexicographic in the configuration. Local digit
/// k encodes m = s - k.
class ProductSpace {
 public:
  explicit ProductSpace(const ChainSpec& spec);

  int n_sites() const { return static_cast<int>(spins_.size()); }
  std::uint64_t dimension() const { return dimension_; }
  SpinValue spin(int site) const { return spins_[static_cast<std::size_t>(site)]; }
  int local_dim(int site) const { return spins_[static_cast<std::size_t>(site)].dim(); }
  std::uint64_t stride(int site) const { return strides_[static_cast<std::size_t>(site)]; }

  int digit(std::uint64_t index, int site) const {
    return static_cast<int>((index / stride(site)) % static_cast<std::uint64_t>(local_dim(site)));
  }
  // 2 m for the given site in the given product state.
  int twice_m(std::uint64_t index, int site) const {
    return spin(site).twice_s - 2 * digit(index, site);
  }
  int twice_total_sz(std::uint64_t index) const;
  int max_twice_sz() const;

 private:
  std::vector<SpinValue> spins_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t dimension_ = 1;
};

/// Product states of fixed total Sz, ascending in product index.
struct SectorBasis {
  int target_twice_sz = 0;
  std::vector<std::uint64_t> states;

  std::size_t size() const { return states.size(); }
  // Position of a product state, or nullopt if it lies in another sector.
  std::optional<std::size_t> find(std::uint64_t state) const;
};

SectorBasis enumerate_sector(const ChainSpec& spec, int twice_sz);

/// All total-Sz sectors, from -max to +max in steps of 2.
std::vector<int> sector_labels(const ChainSpec& spec);

inline constexpr std::uint64_t kDenseDimensionCap = 10'000;

struct AssemblyLimits {
  std::uint64_t max_dimension = kDenseDimensionCap;
};

/// Heisenberg Hamiltonian of the ring, in the full product space
/// (sector == nullptr) or restricted to one Sz sector. Throws ValidationError
/// carrying the dimension when it exceeds limits.max_dimension.
SparseRealMatrix build_hamiltonian(const ChainSpec& spec, const SectorBasis* sector = nullptr,
                                   AssemblyLimits limits = {});

/// Reads n_sites / alpha / boundary from key=value lines. '#' starts a
/// comment. Unknown keys and malformed values are validation errors.
ChainSpec parse_chain_spec(std::istream& in);
std::string format_chain_spec(const ChainSpec& spec);

/// 64-bit FNV-1a, used for provenance hashes.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace mixspin

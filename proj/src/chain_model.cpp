#include "mixspin/chain_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

#include "mixspin/error.hpp"

namespace mixspin {

void ChainSpec::validate() const {
  if (n_sites <= 0 || n_sites % 4 != 0) {
    throw ValidationError("n_sites must be a positive multiple of 4, got " +
                          std::to_string(n_sites));
  }
  if (!(j1 > 0.0) || !std::isfinite(j1)) throw ValidationError("j1 must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("alpha must be finite and non-negative");
  }
  if (boundary != Boundary::periodic) {
    throw ValidationError("only periodic boundary conditions are supported");
  }
}

std::string ChainSpec::canonical() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "n_sites=%d;alpha=%.17g;j1=%.17g;boundary=%s", n_sites, alpha,
                j1, boundary == Boundary::periodic ? "periodic" : "open");
  return buf;
}

std::string SitePair::to_string() const {
  return "(" + std::to_string(first_one_based()) + "," + std::to_string(second_one_based()) + ")";
}

void validate_pair(const ChainSpec& spec, SitePair pair) {
  const auto ok = [&](int s) { return s >= 0 && s < spec.n_sites; };
  if (!ok(pair.first) || !ok(pair.second)) {
    throw ValidationError("site pair " + pair.to_string() + " outside 1.." +
                          std::to_string(spec.n_sites));
  }
  if (pair.first == pair.second) {
    throw ValidationError("site pair " + pair.to_string() + " must name distinct sites");
  }
}

BondList make_bonds(const ChainSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  BondList bonds;
  bonds.reserve(static_cast<std::size_t>(n));
  for (int cell = 0; cell < n / 4; ++cell) {
    const int base = 4 * cell;
    bonds.push_back({base, base + 1, spec.j1});
    bonds.push_back({base + 1, base + 2, spec.j2()});
    bonds.push_back({base + 2, base + 3, spec.j1});
    bonds.push_back({base + 3, (base + 4) % n, spec.j2()});
  }
  return bonds;
}

ProductSpace::ProductSpace(const ChainSpec& spec) {
  spec.validate();
  for (int i = 0; i < spec.n_sites; ++i) spins_.push_back(site_spin(i));
  strides_.assign(spins_.size(), 1);
  for (int i = spec.n_sites - 1; i >= 0; --i) {
    strides_[static_cast<std::size_t>(i)] = dimension_;
    dimension_ *= static_cast<std::uint64_t>(spins_[static_cast<std::size_t>(i)].dim());
  }
}

int ProductSpace::twice_total_sz(std::uint64_t index) const {
  int total = 0;
  for (int i = n_sites() - 1; i >= 0; --i) {
    const auto d = static_cast<std::uint64_t>(local_dim(i));
    total += spin(i).twice_s - 2 * static_cast<int>(index % d);
    index /= d;
  }
  return total;
}

int ProductSpace::max_twice_sz() const {
  int total = 0;
  for (const auto& s : spins_) total += s.twice_s;
  return total;
}

std::optional<std::size_t> SectorBasis::find(std::uint64_t state) const {
  const auto it = std::lower_bound(states.begin(), states.end(), state);
  if (it == states.end() || *it != state) return std::nullopt;
  return static_cast<std::size_t>(it - states.begin());
}

SectorBasis enumerate_sector(const ChainSpec& spec, int twice_sz) {
  const ProductSpace space(spec);
  if (std::abs(twice_sz) > space.max_twice_sz()) {
    throw ValidationError("twice_sz " + std::to_string(twice_sz) + " outside +-" +
                          std::to_string(space.max_twice_sz()));
  }
  SectorBasis basis{twice_sz, {}};
  if ((twice_sz - space.max_twice_sz()) % 2 != 0) return basis;

  // Odometer over digits keeps the running Sz without re-decoding each index.
  const int n = space.n_sites();
  std::vector<int> digits(static_cast<std::size_t>(n), 0);
  int total = space.max_twice_sz();
  for (std::uint64_t index = 0; index < space.dimension(); ++index) {
    if (total == twice_sz) basis.states.push_back(index);
    for (int i = n - 1; i >= 0; --i) {
      auto& dgt = digits[static_cast<std::size_t>(i)];
      if (dgt + 1 < space.local_dim(i)) {
        ++dgt;
        total -= 2;
        break;
      }
      total += 2 * dgt;
      dgt = 0;
    }
  }
  return basis;
}

std::vector<int> sector_labels(const ChainSpec& spec) {
  const ProductSpace space(spec);
  std::vector<int> labels;
  for (int t = -space.max_twice_sz(); t <= space.max_twice_sz(); t += 2) labels.push_back(t);
  return labels;
}

SparseRealMatrix build_hamiltonian(const ChainSpec& spec, const SectorBasis* sector,
                                   AssemblyLimits limits) {
  const ProductSpace space(spec);
  const auto bonds = make_bonds(spec);
  const std::uint64_t dim = sector ? sector->size() : space.dimension();
  if (dim > limits.max_dimension) {
    throw ValidationError("Hilbert space dimension " + std::to_string(dim) +
                          " too large for dense path (cap " +
                          std::to_string(limits.max_dimension) + ")");
  }

  std::vector<SparseRealMatrix::Entry> entries;
  entries.reserve(static_cast<std::size_t>(dim) * (bonds.size() + 1));
  for (std::uint64_t col = 0; col < dim; ++col) {
    const std::uint64_t state = sector ? sector->states[col] : col;
    double diag = 0.0;
    for (const auto& b : bonds) {
      const int ti = space.twice_m(state, b.site_i);
      const int tj = space.twice_m(state, b.site_j);
      diag += b.coupling * 0.25 * ti * tj;
      const double si = space.spin(b.site_i).s();
      const double sj = space.spin(b.site_j).s();
      const double mi = 0.5 * ti;
      const double mj = 0.5 * tj;
      // S+_i S-_j: raising m_i lowers the digit of i.
      if (ti < space.spin(b.site_i).twice_s && tj > -space.spin(b.site_j).twice_s) {
        const std::uint64_t target = state - space.stride(b.site_i) + space.stride(b.site_j);
        const double amp = 0.5 * b.coupling * std::sqrt(si * (si + 1) - mi * (mi + 1)) *
                           std::sqrt(sj * (sj + 1) - mj * (mj - 1));
        const auto row = sector ? sector->find(target) : std::optional<std::uint64_t>(target);
        entries.push_back({static_cast<std::size_t>(*row), static_cast<std::size_t>(col), amp});
      }
      if (ti > -space.spin(b.site_i).twice_s && tj < space.spin(b.site_j).twice_s) {
        const std::uint64_t target = state + space.stride(b.site_i) - space.stride(b.site_j);
        const double amp = 0.5 * b.coupling * std::sqrt(si * (si + 1) - mi * (mi - 1)) *
                           std::sqrt(sj * (sj + 1) - mj * (mj + 1));
        const auto row = sector ? sector->find(target) : std::optional<std::uint64_t>(target);
        entries.push_back({static_cast<std::size_t>(*row), static_cast<std::size_t>(col), amp});
      }
    }
    entries.push_back({static_cast<std::size_t>(col), static_cast<std::size_t>(col), diag});
  }
  return SparseRealMatrix(static_cast<std::size_t>(dim), std::move(entries));
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

ChainSpec parse_chain_spec(std::istream& in) {
  ChainSpec spec;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected key=value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto bad = [&] {
      return ValidationError("line " + std::to_string(line_no) + ": bad value for " + key +
                             ": '" + value + "'");
    };
    if (key == "n_sites") {
      int v = 0;
      const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size()) throw bad();
      spec.n_sites = v;
    } else if (key == "alpha") {
      try {
        std::size_t used = 0;
        spec.alpha = std::stod(value, &used);
        if (used != value.size()) throw bad();
      } catch (const std::logic_error&) {
        throw bad();
      }
    } else if (key == "boundary") {
      if (value == "periodic") {
        spec.boundary = Boundary::periodic;
      } else if (value == "open") {
        spec.boundary = Boundary::open;
      } else {
        throw bad();
      }
    } else {
      throw ValidationError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string format_chain_spec(const ChainSpec& spec) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "n_sites=%d\nalpha=%.17g\nboundary=%s\n", spec.n_sites,
                spec.alpha, spec.boundary == Boundary::periodic ? "periodic" : "open");
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace mixspin

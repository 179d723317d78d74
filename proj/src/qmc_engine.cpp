#include "mixspin/qmc_engine.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <thread>

#include "mixspin/error.hpp"
#include "mixspin/rng.hpp"
#include "mixspin/statistics.hpp"

namespace mixspin {

void QmcConfig::validate() const {
  spec.validate();
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and > 0");
  if (therm_sweeps < 0) throw ValidationError("thermalization sweeps must be >= 0");
  if (measure_sweeps <= 0) throw ValidationError("measurement sweeps must be > 0");
  if (bins < 1) throw ValidationError("bins must be >= 1");
  if (measure_sweeps % bins != 0) {
    throw ValidationError("measurement sweeps (" + std::to_string(measure_sweeps) +
                          ") must be divisible by bins (" + std::to_string(bins) + ")");
  }
  for (const auto& p : pairs) validate_pair(spec, p);
  if (!long_run && (spec.n_sites > kQmcMaxSitesDefault || beta > kQmcMaxBetaDefault)) {
    throw ValidationError("N=" + std::to_string(spec.n_sites) + ", beta=" + std::to_string(beta) +
                          " is outside the desk-scale envelope (N<=32, beta<=64); "
                          "pass --long-run to proceed");
  }
}

std::string QmcConfig::canonical() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, ";beta=%.17g;therm=%lld;measure=%lld;bins=%d;seed=%llu;pairs=",
                beta, static_cast<long long>(therm_sweeps), static_cast<long long>(measure_sweeps),
                bins, static_cast<unsigned long long>(seed));
  std::string out = spec.canonical() + buf;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(pairs[k].first_one_based()) + "-" +
           std::to_string(pairs[k].second_one_based());
  }
  return out;
}

namespace {

// Operator string codes: 0 is the identity, otherwise 1 + 3*bond + kind.
enum OpKind : int { kDiagonal = 0, kRaiseFirst = 1, kLowerFirst = 2 };

struct BondData {
  int site_i;
  int site_j;
  int twice_si;
  int twice_sj;
  double coupling;
  double offset;  // C_b: J (C_b - m_i m_j) >= 0 for every diagonal vertex
  // Vertex weights indexed by leg occupations n = s + m, base 3.
  std::array<double, 81> table{};

  double weight(int n0, int n1, int n2, int n3) const {
    return table[static_cast<std::size_t>(((n0 * 3 + n1) * 3 + n2) * 3 + n3)];
  }
  double diagonal(int ni, int nj) const { return weight(ni, nj, ni, nj); }
};

double vertex_weight(const BondData& b, int n0, int n1, int n2, int n3) {
  const auto in_range = [](int n, int twice_s) { return n >= 0 && n <= twice_s; };
  if (!in_range(n0, b.twice_si) || !in_range(n2, b.twice_si) || !in_range(n1, b.twice_sj) ||
      !in_range(n3, b.twice_sj)) {
    return 0.0;
  }
  const double si = 0.5 * b.twice_si;
  const double sj = 0.5 * b.twice_sj;
  const double mi = n0 - si;
  const double mj = n1 - sj;
  if (n0 == n2 && n1 == n3) return b.coupling * (b.offset - mi * mj);
  // After the sublattice rotation the flip term enters -H with a + sign.
  const auto ladder = [](double s, double m_low) { return std::sqrt(s * (s + 1) - m_low * (m_low + 1)); };
  if (n2 == n0 + 1 && n3 == n1 - 1) return 0.5 * b.coupling * ladder(si, mi) * ladder(sj, mj - 1);
  if (n2 == n0 - 1 && n3 == n1 + 1) return 0.5 * b.coupling * ladder(si, mi - 1) * ladder(sj, mj);
  return 0.0;
}

// Symmetric flow matrix row for the directed-loop equations: rows sum to the
// weights, entries are non-negative, and the bounce (diagonal) is small.
// The whole matrix depends only on the weight vector, never on which leg
// was entered, which keeps the equations consistent.
int choose_exit(const std::array<double, 4>& w, int entrance, double u) {
  std::array<int, 4> live{};
  int n = 0;
  double total = 0.0;
  int argmax = -1;
  for (int x = 0; x < 4; ++x) {
    if (w[static_cast<std::size_t>(x)] > 0.0) {
      live[static_cast<std::size_t>(n++)] = x;
      total += w[static_cast<std::size_t>(x)];
      if (argmax < 0 || w[static_cast<std::size_t>(x)] > w[static_cast<std::size_t>(argmax)]) {
        argmax = x;
      }
    }
  }
  const double we = w[static_cast<std::size_t>(entrance)];
  std::array<double, 4> row{};
  const double wmax = w[static_cast<std::size_t>(argmax)];
  if (wmax >= total - wmax) {
    // One dominant weight: it absorbs every other channel and keeps the
    // excess as its own bounce.
    if (entrance == argmax) {
      for (int k = 0; k < n; ++k) {
        const int x = live[static_cast<std::size_t>(k)];
        row[static_cast<std::size_t>(x)] = x == argmax ? wmax - (total - wmax)
                                                       : w[static_cast<std::size_t>(x)];
      }
    } else {
      row[static_cast<std::size_t>(argmax)] = we;
    }
  } else {
    // Zero-diagonal solution mixed with heat bath just enough to stay >= 0.
    const double nn = n;
    const auto zero_diag = [&](int k, int l) {
      return (w[static_cast<std::size_t>(k)] + w[static_cast<std::size_t>(l)]) / (nn - 2.0) -
             total / ((nn - 1.0) * (nn - 2.0));
    };
    const auto heat = [&](int k, int l) {
      return w[static_cast<std::size_t>(k)] * w[static_cast<std::size_t>(l)] / total;
    };
    double lambda = 1.0;
    for (int a = 0; a < n; ++a) {
      for (int b = a + 1; b < n; ++b) {
        const int k = live[static_cast<std::size_t>(a)];
        const int l = live[static_cast<std::size_t>(b)];
        const double z = zero_diag(k, l);
        if (z < 0.0) {
          const double h = heat(k, l);
          lambda = std::min(lambda, h / (h - z));
        }
      }
    }
    for (int k = 0; k < n; ++k) {
      const int x = live[static_cast<std::size_t>(k)];
      row[static_cast<std::size_t>(x)] =
          x == entrance ? (1.0 - lambda) * heat(x, x)
                        : lambda * zero_diag(entrance, x) + (1.0 - lambda) * heat(entrance, x);
    }
  }
  double r = u * we;
  int last = entrance;
  for (int x = 0; x < 4; ++x) {
    const double p = row[static_cast<std::size_t>(x)];
    if (p <= 0.0) continue;
    last = x;
    if (r < p) return x;
    r -= p;
  }
  return last;
}

struct WalkerResult {
  std::vector<std::vector<double>> bin_correlators;
  std::vector<double> bin_energy;
  double autocorrelation_time = 0.0;
  double mean_expansion_order = 0.0;
  double mean_loop_length = 0.0;
  double loop_start_rejection = 0.0;
  std::int64_t loops_per_sweep = 0;
  std::int64_t cutoff = 0;
};

class SseWalker {
 public:
  SseWalker(const QmcConfig& config, Xoshiro256StarStar rng)
      : config_(config), rng_(rng), beta_(config.beta) {
    const ProductSpace space(config.spec);
    for (int i = 0; i < space.n_sites(); ++i) twice_s_.push_back(space.spin(i).twice_s);
    for (const auto& b : make_bonds(config.spec)) {
      BondData d{b.site_i, b.site_j, twice_s_[static_cast<std::size_t>(b.site_i)],
                 twice_s_[static_cast<std::size_t>(b.site_j)], b.coupling, 0.0, {}};
      d.offset = 0.25 * d.twice_si * d.twice_sj;
      for (int n0 = 0; n0 < 3; ++n0)
        for (int n1 = 0; n1 < 3; ++n1)
          for (int n2 = 0; n2 < 3; ++n2)
            for (int n3 = 0; n3 < 3; ++n3)
              d.table[static_cast<std::size_t>(((n0 * 3 + n1) * 3 + n2) * 3 + n3)] =
                  vertex_weight(d, n0, n1, n2, n3);
      energy_shift_ += d.coupling * d.offset;
      bonds_.push_back(d);
    }
    for (const int t : twice_s_) state_.push_back(static_cast<int>(rng_.below(static_cast<std::uint64_t>(t + 1))));
    ops_.assign(std::max<std::size_t>(32, static_cast<std::size_t>(config.spec.n_sites)), 0);
    loops_per_sweep_ = config.spec.n_sites;
  }

  WalkerResult run() {
    const auto& c = config_;
    const std::int64_t adapt_until = c.therm_sweeps / 2;
    double order_sum = 0.0;
    double length_sum = 0.0;
    std::int64_t loop_count = 0;
    for (std::int64_t sweep = 0; sweep < c.therm_sweeps; ++sweep) {
      diagonal_update();
      grow_cutoff();
      const auto [length, loops] = loop_update();
      if (sweep < adapt_until) {
        order_sum += n_ops_;
        length_sum += static_cast<double>(length);
        loop_count += loops;
        if (length_sum > 0.0 && (sweep + 1) % 16 == 0) {
          const double mean_len = length_sum / static_cast<double>(std::max<std::int64_t>(loop_count, 1));
          const double mean_order = order_sum / static_cast<double>(sweep + 1);
          loops_per_sweep_ = std::clamp<std::int64_t>(
              std::llround(2.0 * std::max(mean_order, 1.0) / std::max(mean_len, 1.0)), 1,
              std::int64_t{1} << 24);
        }
      }
    }

    WalkerResult out;
    const auto n_pairs = c.pairs.size();
    out.bin_correlators.assign(n_pairs, std::vector<double>(static_cast<std::size_t>(c.bins), 0.0));
    out.bin_energy.assign(static_cast<std::size_t>(c.bins), 0.0);
    std::vector<double> energy_series;
    energy_series.reserve(static_cast<std::size_t>(c.measure_sweeps));
    const std::int64_t per_bin = c.measure_sweeps / c.bins;
    std::vector<double> corr(n_pairs);
    double visited = 0.0;
    std::int64_t loops_total = 0;
    order_sum = 0.0;
    for (std::int64_t sweep = 0; sweep < c.measure_sweeps; ++sweep) {
      diagonal_update();
      const auto [length, loops] = loop_update();
      visited += static_cast<double>(length);
      loops_total += loops;
      const double energy = -static_cast<double>(n_ops_) / beta_ + energy_shift_;
      measure(corr);
      const auto bin = static_cast<std::size_t>(sweep / per_bin);
      out.bin_energy[bin] += energy;
      for (std::size_t k = 0; k < n_pairs; ++k) out.bin_correlators[k][bin] += corr[k];
      energy_series.push_back(energy);
      order_sum += n_ops_;
    }
    for (auto& e : out.bin_energy) e /= static_cast<double>(per_bin);
    for (auto& pair_bins : out.bin_correlators) {
      for (auto& v : pair_bins) v /= static_cast<double>(per_bin);
    }
    out.autocorrelation_time = stats::integrated_autocorrelation_time(energy_series);
    out.mean_expansion_order = order_sum / static_cast<double>(c.measure_sweeps);
    out.mean_loop_length = loops_total > 0 ? visited / static_cast<double>(loops_total) : 0.0;
    const auto attempts = loop_attempts_;
    out.loop_start_rejection =
        attempts > 0 ? static_cast<double>(loop_rejections_) / static_cast<double>(attempts) : 0.0;
    out.loops_per_sweep = loops_per_sweep_;
    out.cutoff = static_cast<std::int64_t>(ops_.size());
    return out;
  }

 private:
  int m_twice(int site, int n) const { return 2 * n - twice_s_[static_cast<std::size_t>(site)]; }

  void diagonal_update() {
    const auto nb = static_cast<double>(bonds_.size());
    const double ratio = beta_ * nb;
    const auto length = static_cast<double>(ops_.size());
    for (auto& op : ops_) {
      if (op == 0) {
        const auto b = rng_.below(bonds_.size());
        const auto& bd = bonds_[b];
        const double w = bd.diagonal(state_[static_cast<std::size_t>(bd.site_i)],
                                     state_[static_cast<std::size_t>(bd.site_j)]);
        if (w > 0.0 && rng_.uniform() * (length - n_ops_) < ratio * w) {
          op = 1 + 3 * static_cast<int>(b) + kDiagonal;
          ++n_ops_;
        }
      } else {
        const int b = (op - 1) / 3;
        const int kind = (op - 1) % 3;
        const auto& bd = bonds_[static_cast<std::size_t>(b)];
        if (kind == kDiagonal) {
          const double w = bd.diagonal(state_[static_cast<std::size_t>(bd.site_i)],
                                       state_[static_cast<std::size_t>(bd.site_j)]);
          if (rng_.uniform() * ratio * w < length - n_ops_ + 1) {
            op = 0;
            --n_ops_;
          }
        } else {
          const int d = kind == kRaiseFirst ? 1 : -1;
          state_[static_cast<std::size_t>(bd.site_i)] += d;
          state_[static_cast<std::size_t>(bd.site_j)] -= d;
        }
      }
    }
  }

  void grow_cutoff() {
    const auto wanted = static_cast<std::size_t>(n_ops_ + n_ops_ / 3);
    if (wanted > ops_.size()) ops_.resize(wanted, 0);
  }

  std::pair<std::int64_t, std::int64_t> loop_update() {
    build_vertices();
    std::int64_t visited = 0;
    std::int64_t loops = 0;
    const auto n_legs = legs_.size();
    if (n_legs > 0) {
      for (std::int64_t l = 0; l < loops_per_sweep_; ++l) {
        ++loop_attempts_;
        const auto start = static_cast<std::int64_t>(rng_.below(n_legs));
        const int delta = rng_.below(2) == 0 ? 1 : -1;
        const auto v0 = static_cast<std::size_t>(start / 4);
        const auto& b0 = bonds_[vertex_bond_[v0]];
        const int twice_s0 = (start % 2 == 0) ? b0.twice_si : b0.twice_sj;
        const int moved = legs_[static_cast<std::size_t>(start)] + delta;
        if (moved < 0 || moved > twice_s0) {
          ++loop_rejections_;
          continue;
        }
        visited += trace_loop(start, delta);
        ++loops;
      }
    }
    map_back();
    return {visited, loops};
  }

  void build_vertices() {
    const auto n = static_cast<std::size_t>(n_ops_);
    legs_.assign(4 * n, 0);
    link_.assign(4 * n, 0);
    vertex_bond_.assign(n, 0);
    vertex_slot_.assign(n, 0);
    first_.assign(state_.size(), -1);
    last_.assign(state_.size(), -1);
    auto st = state_;
    std::size_t v = 0;
    for (std::size_t p = 0; p < ops_.size(); ++p) {
      const int op = ops_[p];
      if (op == 0) continue;
      const auto b = static_cast<std::size_t>((op - 1) / 3);
      const int kind = (op - 1) % 3;
      const auto& bd = bonds_[b];
      const auto i = static_cast<std::size_t>(bd.site_i);
      const auto j = static_cast<std::size_t>(bd.site_j);
      const std::int64_t base = static_cast<std::int64_t>(4 * v);
      legs_[4 * v + 0] = st[i];
      legs_[4 * v + 1] = st[j];
      if (kind != kDiagonal) {
        const int d = kind == kRaiseFirst ? 1 : -1;
        st[i] += d;
        st[j] -= d;
      }
      legs_[4 * v + 2] = st[i];
      legs_[4 * v + 3] = st[j];
      for (const auto& [site, below, above] :
           {std::array<std::int64_t, 3>{static_cast<std::int64_t>(i), base, base + 2},
            std::array<std::int64_t, 3>{static_cast<std::int64_t>(j), base + 1, base + 3}}) {
        auto& last = last_[static_cast<std::size_t>(site)];
        if (last >= 0) {
          link_[static_cast<std::size_t>(last)] = below;
          link_[static_cast<std::size_t>(below)] = last;
        } else {
          first_[static_cast<std::size_t>(site)] = below;
        }
        last = above;
      }
      vertex_bond_[v] = b;
      vertex_slot_[v] = p;
      ++v;
    }
    for (std::size_t s = 0; s < state_.size(); ++s) {
      if (first_[s] >= 0) {
        link_[static_cast<std::size_t>(first_[s])] = last_[s];
        link_[static_cast<std::size_t>(last_[s])] = first_[s];
      }
    }
  }

  std::int64_t trace_loop(std::int64_t start, int delta) {
    legs_[static_cast<std::size_t>(start)] += delta;
    std::int64_t j = start;
    int d = delta;
    std::int64_t length = 0;
    while (true) {
      const auto v = static_cast<std::size_t>(j / 4);
      const int entrance = static_cast<int>(j % 4);
      const auto& bd = bonds_[vertex_bond_[v]];
      int* legs = &legs_[4 * v];
      std::array<double, 4> w{};
      std::array<int, 4> change{};
      for (int x = 0; x < 4; ++x) {
        const int dx = (x / 2 == entrance / 2) ? -d : d;
        change[static_cast<std::size_t>(x)] = dx;
        std::array<int, 4> trial{legs[0], legs[1], legs[2], legs[3]};
        trial[static_cast<std::size_t>(x)] += dx;
        w[static_cast<std::size_t>(x)] =
            (trial[0] < 0 || trial[1] < 0 || trial[2] < 0 || trial[3] < 0 ||
             trial[0] > bd.twice_si || trial[2] > bd.twice_si || trial[1] > bd.twice_sj ||
             trial[3] > bd.twice_sj)
                ? 0.0
                : bd.weight(trial[0], trial[1], trial[2], trial[3]);
      }
      const int exit = choose_exit(w, entrance, rng_.uniform());
      const int dx = change[static_cast<std::size_t>(exit)];
      legs[exit] += dx;
      ++length;
      const std::int64_t out_leg = static_cast<std::int64_t>(4 * v) + exit;
      if (out_leg == start) break;
      j = link_[static_cast<std::size_t>(out_leg)];
      if (j == start) break;
      legs_[static_cast<std::size_t>(j)] += dx;
      d = dx;
    }
    return length;
  }

  void map_back() {
    if (config_.check_weights) check_configuration();
    for (std::size_t v = 0; v < vertex_bond_.size(); ++v) {
      const int* legs = &legs_[4 * v];
      const int kind = (legs[0] == legs[2] && legs[1] == legs[3]) ? kDiagonal
                       : legs[2] == legs[0] + 1                   ? kRaiseFirst
                                                                  : kLowerFirst;
      ops_[vertex_slot_[v]] = 1 + 3 * static_cast<int>(vertex_bond_[v]) + kind;
    }
    for (std::size_t s = 0; s < state_.size(); ++s) {
      if (first_[s] >= 0) {
        state_[s] = legs_[static_cast<std::size_t>(first_[s])];
      } else {
        state_[s] = static_cast<int>(rng_.below(static_cast<std::uint64_t>(twice_s_[s] + 1)));
      }
    }
  }

  void check_configuration() const {
    for (std::size_t v = 0; v < vertex_bond_.size(); ++v) {
      const int* legs = &legs_[4 * v];
      const double w = vertex_weight(bonds_[vertex_bond_[v]], legs[0], legs[1], legs[2], legs[3]);
      if (!(w > 0.0)) {
        throw NumericalError("sign violation: vertex weight " + std::to_string(w) +
                             " at expansion slot " + std::to_string(vertex_slot_[v]));
      }
    }
    for (std::size_t l = 0; l < legs_.size(); ++l) {
      if (legs_[l] != legs_[static_cast<std::size_t>(link_[l])]) {
        throw NumericalError("inconsistent worldline after loop update at leg " +
                             std::to_string(l));
      }
    }
  }

  void measure(std::vector<double>& corr) {
    const auto& pairs = config_.pairs;
    std::vector<long long> acc(pairs.size(), 0);
    auto st = state_;
    for (const int op : ops_) {
      if (op != 0) {
        const int kind = (op - 1) % 3;
        if (kind != kDiagonal) {
          const auto& bd = bonds_[static_cast<std::size_t>((op - 1) / 3)];
          const int d = kind == kRaiseFirst ? 1 : -1;
          st[static_cast<std::size_t>(bd.site_i)] += d;
          st[static_cast<std::size_t>(bd.site_j)] -= d;
        }
      }
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        acc[k] += m_twice(pairs[k].first, st[static_cast<std::size_t>(pairs[k].first)]) *
                  m_twice(pairs[k].second, st[static_cast<std::size_t>(pairs[k].second)]);
      }
    }
    const double norm = 3.0 / (4.0 * static_cast<double>(ops_.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) corr[k] = norm * static_cast<double>(acc[k]);
  }

  const QmcConfig& config_;
  Xoshiro256StarStar rng_;
  double beta_;
  std::vector<int> twice_s_;
  std::vector<BondData> bonds_;
  double energy_shift_ = 0.0;
  std::vector<int> state_;
  std::vector<int> ops_;
  std::int64_t n_ops_ = 0;
  std::int64_t loops_per_sweep_ = 1;
  std::int64_t loop_attempts_ = 0;
  std::int64_t loop_rejections_ = 0;

  std::vector<int> legs_;
  std::vector<std::int64_t> link_;
  std::vector<std::size_t> vertex_bond_;
  std::vector<std::size_t> vertex_slot_;
  std::vector<std::int64_t> first_;
  std::vector<std::int64_t> last_;
};

Xoshiro256StarStar walker_stream(std::uint64_t seed, int walker) {
  Xoshiro256StarStar rng(seed);
  for (int w = 0; w < walker; ++w) rng.jump();
  return rng;
}

}  // namespace

int worker_threads_from_env() {
  if (const char* env = std::getenv("MIXSPIN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

QmcRun run_qmc(const QmcConfig& config) { return run_replicated(config, 1, 1); }

QmcRun run_replicated(const QmcConfig& config, int n_walkers, int threads) {
  config.validate();
  if (n_walkers < 1) throw ValidationError("need at least one walker");
  if (threads <= 0) threads = worker_threads_from_env();
  threads = std::min(threads, n_walkers);

  std::vector<WalkerResult> results(static_cast<std::size_t>(n_walkers));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(n_walkers));
  const auto work = [&] {
    for (int w = next++; w < n_walkers; w = next++) {
      try {
        SseWalker walker(config, walker_stream(config.seed, w));
        results[static_cast<std::size_t>(w)] = walker.run();
      } catch (...) {
        failures[static_cast<std::size_t>(w)] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  QmcRun run;
  run.config = config;
  run.walkers = n_walkers;
  run.generator = std::string(Xoshiro256StarStar::kName);
  run.code_version = std::string(kCodeVersion);
  run.config_hash = hex64(fnv1a(config.canonical()));
  run.bin_correlators.assign(config.pairs.size(), {});
  for (const auto& r : results) {
    for (std::size_t k = 0; k < config.pairs.size(); ++k) {
      run.bin_correlators[k].insert(run.bin_correlators[k].end(), r.bin_correlators[k].begin(),
                                    r.bin_correlators[k].end());
    }
    run.bin_energy.insert(run.bin_energy.end(), r.bin_energy.begin(), r.bin_energy.end());
    run.energy_autocorrelation_time += r.autocorrelation_time / n_walkers;
    run.mean_expansion_order += r.mean_expansion_order / n_walkers;
    run.mean_loop_length += r.mean_loop_length / n_walkers;
    run.loop_start_rejection += r.loop_start_rejection / n_walkers;
  }
  run.loops_per_sweep = results.front().loops_per_sweep;
  run.cutoff = results.front().cutoff;
  run.errors_reported = config.bins >= kMinBinsForErrors;
  const auto error_of = [&](std::span<const double> bins) {
    return run.errors_reported ? stats::standard_error(bins)
                               : std::numeric_limits<double>::quiet_NaN();
  };
  run.energy = stats::mean(run.bin_energy);
  run.energy_error = error_of(run.bin_energy);
  for (std::size_t k = 0; k < config.pairs.size(); ++k) {
    run.correlators.push_back({config.pairs[k], stats::mean(run.bin_correlators[k]),
                               error_of(run.bin_correlators[k]), EstimateSource::qmc});
  }
  return run;
}

}  // namespace mixspin

#include "mixspin/statistics.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace mixspin::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> bin_means) {
  const auto n = bin_means.size();
  if (n < 2) return 0.0;
  const double m = mean(bin_means);
  double ss = 0.0;
  for (const double x : bin_means) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

JackknifeEstimate jackknife(std::span<const double> bin_means,
                            const std::function<double(double)>& f) {
  const auto n = bin_means.size();
  const double total = std::accumulate(bin_means.begin(), bin_means.end(), 0.0);
  JackknifeEstimate out{f(total / static_cast<double>(n)), 0.0};
  if (n < 2) return out;
  std::vector<double> leave_one_out(n);
  for (std::size_t b = 0; b < n; ++b) {
    leave_one_out[b] = f((total - bin_means[b]) / static_cast<double>(n - 1));
  }
  const double m = mean(leave_one_out);
  double ss = 0.0;
  for (const double x : leave_one_out) ss += (x - m) * (x - m);
  out.error = std::sqrt(ss * static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

double integrated_autocorrelation_time(std::span<const double> series, double window_factor) {
  const auto n = series.size();
  if (n < 4) return 0.5;
  const double m = mean(series);
  double c0 = 0.0;
  for (const double x : series) c0 += (x - m) * (x - m);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return 0.5;
  double tau = 0.5;
  for (std::size_t t = 1; t < n / 2; ++t) {
    double ct = 0.0;
    for (std::size_t k = 0; k + t < n; ++k) ct += (series[k] - m) * (series[k + t] - m);
    ct /= static_cast<double>(n - t);
    tau += ct / c0;
    if (static_cast<double>(t) >= window_factor * tau) break;
  }
  return std::max(tau, 0.5);
}

}  // namespace mixspin::stats

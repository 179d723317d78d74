#pragma once

#include <functional>
#include <span>

namespace mixspin::stats {

double mean(std::span<const double> xs);

/// Sample standard deviation of the values divided by sqrt(n); the usual
/// error of a mean over independent bins.
double standard_error(std::span<const double> bin_means);

struct JackknifeEstimate {
  double value;  // f evaluated at the full-sample mean
  double error;
};

/// Delete-one jackknife of a nonlinear function of a bin mean.
JackknifeEstimate jackknife(std::span<const double> bin_means,
                            const std::function<double(double)>& f);

/// Integrated autocorrelation time tau = 1/2 + sum_t rho(t), with Sokal's
/// self-consistent window (stop at the first W >= c tau).
double integrated_autocorrelation_time(std::span<const double> series, double window_factor = 6.0);

}  // namespace mixspin::stats

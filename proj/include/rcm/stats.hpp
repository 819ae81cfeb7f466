#pragma once

#include "rcm/rng.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rcm::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
double std_error(std::span<const double> x);
/// Linear-interpolation quantile (type 7), q in [0, 1].
double quantile(std::vector<double> x, double q);
double correlation(std::span<const double> x, std::span<const double> y);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Percentile bootstrap interval of a statistic of one sample.
Interval bootstrap(std::span<const double> x, const std::function<double(std::span<const double>)>& statistic,
                   double level, int resamples, const RngStream& stream);

/// Percentile bootstrap interval of the correlation of paired samples.
Interval bootstrap_correlation(std::span<const double> x, std::span<const double> y, double level, int resamples,
                               const RngStream& stream);

/// Binomial standard deviation of a frequency estimate sqrt(p(1-p)/n).
double binomial_sigma(double p, std::size_t n);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace rcm::stats

#include "rcm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcm::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("variance needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double std_error(std::span<const double> x) { return std::sqrt(variance(x) / static_cast<double>(x.size())); }

double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(x.begin(), x.end());
    const double h = q * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("correlation: need paired samples");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

Interval bootstrap(std::span<const double> x, const std::function<double(std::span<const double>)>& statistic,
                   double level, int resamples, const RngStream& stream) {
    if (x.empty() || resamples < 10) throw std::invalid_argument("bootstrap: need data and >= 10 resamples");
    Rng rng(stream);
    std::vector<double> draws(resamples);
    std::vector<double> sample(x.size());
    for (int b = 0; b < resamples; ++b) {
        for (auto& s : sample) s = x[rng.index(x.size())];
        draws[b] = statistic(sample);
    }
    const double tail = 0.5 * (1.0 - level);
    return {quantile(draws, tail), quantile(draws, 1.0 - tail)};
}

Interval bootstrap_correlation(std::span<const double> x, std::span<const double> y, double level, int resamples,
                               const RngStream& stream) {
    if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("bootstrap_correlation: need paired samples");
    Rng rng(stream);
    std::vector<double> draws(resamples);
    std::vector<double> sx(x.size()), sy(y.size());
    for (int b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const auto k = rng.index(x.size());
            sx[i] = x[k];
            sy[i] = y[k];
        }
        draws[b] = correlation(sx, sy);
    }
    const double tail = 0.5 * (1.0 - level);
    return {quantile(draws, tail), quantile(draws, 1.0 - tail)};
}

double binomial_sigma(double p, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear_fit: need >= 2 paired points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: x has no spread");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return f;
}

}  // namespace rcm::stats

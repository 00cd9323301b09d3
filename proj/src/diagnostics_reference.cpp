#include <cmath>
#include <stdexcept>

#include "lmc/diagnostics.hpp"

namespace lmc::reference {

std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t max_lag)
{
    const std::size_t n = series.size();
    if (n < 2 || max_lag >= n) {
        throw std::invalid_argument("autocorrelation: bad series or lag");
    }
    double mean = 0.0;
    for (double v : series) {
        mean += v;
    }
    mean /= static_cast<double>(n);

    double denom = 0.0;
    for (double v : series) {
        denom += (v - mean) * (v - mean);
    }
    if (!(denom > 0.0)) {
        throw std::invalid_argument("autocorrelation of a constant series");
    }

    std::vector<double> rho(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            acc += (series[t] - mean) * (series[t + k] - mean);
        }
        rho[k] = acc / denom;
    }
    return rho;
}

Grid2D histogram2d(std::span<const double> samples, const BoxSpec& spec,
                   std::size_t res)
{
    const std::size_t n = samples.size() / 2;
    Grid2D grid(res, res);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = samples[2 * i];
        const double y = samples[2 * i + 1];
        if (x < 0.0 || x > spec.lx || y < 0.0 || y > spec.ly) {
            throw std::domain_error("sample outside the box");
        }
        auto col = static_cast<std::size_t>(std::floor(x / spec.lx * res));
        auto row = static_cast<std::size_t>(std::floor(y / spec.ly * res));
        col = col == res ? res - 1 : col;
        row = row == res ? res - 1 : row;
        grid.at(row, col) += 1.0;
    }
    for (double& v : grid.values) {
        v /= static_cast<double>(n);
    }
    return grid;
}

DenseMatrix empirical_fisher(const Target& target,
                             std::span<const double> samples)
{
    const std::size_t d = target.dim();
    const std::size_t n = samples.size() / d;
    DenseMatrix fisher(d, d);
    for (std::size_t t = 0; t < n; ++t) {
        const Vector g = target.grad_log_density(samples.subspan(t * d, d));
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                fisher.at(i, j) += g[i] * g[j];
            }
        }
    }
    for (double& v : fisher.values) {
        v /= static_cast<double>(n);
    }
    return fisher;
}

}  // namespace lmc::reference

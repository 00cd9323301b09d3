#include "lmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "lmc/csv.hpp"

namespace lmc {

namespace {

// Partial sums are taken over fixed-size blocks and combined in block order,
// so results do not depend on the number of OpenMP threads.
constexpr std::size_t kBlock = 4096;

template<class F>
double blocked_sum(std::size_t n, F&& term)
{
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        double acc = 0.0;
        for (std::size_t i = b * kBlock; i < end; ++i) {
            acc += term(i);
        }
        partial[b] = acc;
    }
    double total = 0.0;
    for (double p : partial) {
        total += p;
    }
    return total;
}

struct Centered
{
    std::vector<double> values;
    double denom = 0.0;
};

Centered center(std::span<const double> series)
{
    const std::size_t n = series.size();
    if (n < 2) {
        throw std::invalid_argument("autocorrelation needs at least 2 values");
    }
    const double mean
        = blocked_sum(n, [&](std::size_t i) { return series[i]; }) / n;
    Centered c;
    c.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.values[i] = series[i] - mean;
    }
    c.denom = blocked_sum(
        n, [&](std::size_t i) { return c.values[i] * c.values[i]; });
    if (!(c.denom > 0.0)) {
        throw std::invalid_argument("autocorrelation of a constant series");
    }
    return c;
}

// rho(k) for k in [first, last).
void fill_lags(const Centered& c, std::size_t first, std::size_t last,
               std::vector<double>& rho)
{
    const std::size_t n = c.values.size();
    const double* x = c.values.data();
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t k = first; k < last; ++k) {
        double acc = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) {
            acc += x[t] * x[t + k];
        }
        rho[k] = acc / c.denom;
    }
}

std::size_t cell_index(double x, double length, std::size_t res)
{
    const auto idx = static_cast<std::size_t>(x / length * res);
    return std::min(idx, res - 1);
}

}  // namespace

std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t max_lag)
{
    if (max_lag >= series.size()) {
        throw std::invalid_argument("max_lag must be smaller than the series");
    }
    const Centered c = center(series);
    std::vector<double> rho(max_lag + 1);
    fill_lags(c, 0, max_lag + 1, rho);
    rho[0] = 1.0;
    return rho;
}

double ess(std::span<const double> series)
{
    const Centered c = center(series);
    const std::size_t n = series.size();
    const double dn = static_cast<double>(n);

    constexpr std::size_t kChunk = 128;
    std::vector<double> rho(n, 0.0);
    rho[0] = 1.0;
    std::size_t computed = 1;
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        // rho(k + 1) is needed for the truncation test.
        const std::size_t need = std::min(n, k + 2);
        if (need > computed) {
            const std::size_t upto = std::min(n, std::max(need, computed + kChunk));
            fill_lags(c, computed, upto, rho);
            computed = upto;
        }
        sum += rho[k];
        const double next = k + 1 < n ? rho[k + 1] : 0.0;
        if (rho[k] + next < 0.0) {
            break;
        }
    }
    const double denom = 1.0 + 2.0 * sum;
    if (denom <= 1.0) {
        return dn;
    }
    return std::min(dn, dn / denom);
}

Grid2D histogram2d(std::span<const double> samples, const BoxSpec& spec,
                   std::size_t res)
{
    spec.validate();
    if (res < 2) {
        throw std::invalid_argument("grid resolution must be >= 2");
    }
    if (samples.size() % 2 != 0) {
        throw std::invalid_argument("histogram2d expects n x 2 samples");
    }
    const std::size_t n = samples.size() / 2;
    const std::size_t cells = res * res;
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<std::vector<std::size_t>> partial(nblocks);
    bool outside = false;

#pragma omp parallel for schedule(static) reduction(|| : outside)
    for (std::size_t b = 0; b < nblocks; ++b) {
        std::vector<std::size_t> counts(cells, 0);
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            const double x = samples[2 * i];
            const double y = samples[2 * i + 1];
            if (!(x >= 0.0 && x <= spec.lx && y >= 0.0 && y <= spec.ly)) {
                outside = true;
                continue;
            }
            ++counts[cell_index(y, spec.ly, res) * res
                     + cell_index(x, spec.lx, res)];
        }
        partial[b] = std::move(counts);
    }
    if (outside) {
        throw std::domain_error("sample outside the box");
    }

    Grid2D grid(res, res);
    if (n == 0) {
        return grid;
    }
    std::vector<std::size_t> total(cells, 0);
    for (const auto& counts : partial) {
        for (std::size_t c = 0; c < cells; ++c) {
            total[c] += counts[c];
        }
    }
    for (std::size_t c = 0; c < cells; ++c) {
        grid.values[c] = static_cast<double>(total[c]) / static_cast<double>(n);
    }
    return grid;
}

double tv_distance(const Grid2D& a, const Grid2D& b)
{
    if (a.rows != b.rows || a.cols != b.cols
        || a.values.size() != b.values.size()) {
        throw std::invalid_argument("tv_distance: grid shapes differ");
    }
    if (std::abs(a.sum() - 1.0) > 1e-6 || std::abs(b.sum() - 1.0) > 1e-6) {
        throw std::invalid_argument("tv_distance: grids must sum to 1");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        acc += std::abs(a.values[i] - b.values[i]);
    }
    return std::clamp(0.5 * acc, 0.0, 1.0);
}

double mode_coverage(std::span<const double> samples, const BoxSpec& spec)
{
    spec.validate();
    const std::size_t n = samples.size() / 2;
    if (n == 0) {
        return 0.0;
    }
    const auto nx = static_cast<std::size_t>(spec.nx);
    const auto ny = static_cast<std::size_t>(spec.ny);
    const std::size_t modes = nx * ny;
    std::vector<std::size_t> counts(modes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = samples[2 * i];
        const double y = samples[2 * i + 1];
        if (!(x >= 0.0 && x <= spec.lx && y >= 0.0 && y <= spec.ly)) {
            continue;
        }
        ++counts[cell_index(y, spec.ly, ny) * nx + cell_index(x, spec.lx, nx)];
    }
    const auto threshold = static_cast<std::size_t>(
        std::ceil(0.01 * static_cast<double>(n) / static_cast<double>(modes)));
    const auto covered = std::count_if(counts.begin(), counts.end(),
                                       [&](std::size_t c) { return c >= threshold; });
    return static_cast<double>(covered) / static_cast<double>(modes);
}

DenseMatrix empirical_fisher(const Target& target,
                             std::span<const double> samples)
{
    const std::size_t d = target.dim();
    if (samples.size() % d != 0) {
        throw std::invalid_argument("empirical_fisher: ragged sample matrix");
    }
    const std::size_t n = samples.size() / d;
    if (n == 0) {
        throw std::invalid_argument("empirical_fisher: no samples");
    }
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<std::vector<double>> partial(nblocks);

#pragma omp parallel for schedule(static)
    for (std::size_t b = 0; b < nblocks; ++b) {
        std::vector<double> acc(d * d, 0.0);
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t t = b * kBlock; t < end; ++t) {
            const Vector g = target.grad_log_density(samples.subspan(t * d, d));
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    acc[i * d + j] += g[i] * g[j];
                }
            }
        }
        partial[b] = std::move(acc);
    }

    DenseMatrix fisher(d, d);
    for (const auto& acc : partial) {
        for (std::size_t k = 0; k < d * d; ++k) {
            fisher.values[k] += acc[k];
        }
    }
    for (double& v : fisher.values) {
        v /= static_cast<double>(n);
    }
    return fisher;
}

//---------------------------------------------------------------------------//
// Reports
//---------------------------------------------------------------------------//

DiagnosticsReport compute_report(const Chain& chain, const Target& target,
                                 const DiagnosticsOptions& opts)
{
    DiagnosticsReport report;
    report.acceptance_rate = chain.acceptance_rate();
    report.wall_time_s = chain.wall_time_s;

    const std::size_t n = chain.size();
    for (std::size_t d = 0; d < chain.dim; ++d) {
        const auto col = chain.column(d);
        const bool constant
            = n < 2 || std::all_of(col.begin(), col.end(),
                                   [&](double v) { return v == col.front(); });
        if (constant) {
            report.acf.push_back({1.0});
            report.ess.push_back(1.0);
            continue;
        }
        report.acf.push_back(autocorrelation(col, std::min(opts.max_lag, n - 1)));
        report.ess.push_back(ess(col));
    }

    if (n > 0) {
        const DenseMatrix fisher = empirical_fisher(target, chain.samples);
        double trace = 0.0;
        for (std::size_t i = 0; i < fisher.rows; ++i) {
            trace += fisher.at(i, i);
        }
        report.fisher_trace = trace;
    }

    if (const auto* box = dynamic_cast<const ParticleBoxTarget*>(&target)) {
        if (n > 0) {
            const Grid2D hist = histogram2d(chain.samples, box->spec(), opts.grid_res);
            report.tv_distance = tv_distance(
                hist, pib_analytic_grid(box->spec(), opts.grid_res));
        }
        report.mode_coverage = mode_coverage(chain.samples, box->spec());
    }
    return report;
}

std::string report_to_json(const DiagnosticsReport& report)
{
    nlohmann::ordered_json j;
    j["acf"] = report.acf;
    j["ess"] = report.ess;
    j["acceptance_rate"] = report.acceptance_rate;
    j["tv_distance"] = report.tv_distance ? nlohmann::ordered_json(*report.tv_distance)
                                          : nlohmann::ordered_json(nullptr);
    j["mode_coverage"] = report.mode_coverage
                             ? nlohmann::ordered_json(*report.mode_coverage)
                             : nlohmann::ordered_json(nullptr);
    j["wall_time_s"] = report.wall_time_s;
    j["fisher_trace"] = report.fisher_trace
                            ? nlohmann::ordered_json(*report.fisher_trace)
                            : nlohmann::ordered_json(nullptr);
    return j.dump(2) + "\n";
}

std::string acf_to_csv(const DiagnosticsReport& report)
{
    std::string out = "lag";
    std::size_t lags = 0;
    for (std::size_t d = 0; d < report.acf.size(); ++d) {
        out += ",rho_x" + std::to_string(d);
        lags = std::max(lags, report.acf[d].size());
    }
    out += '\n';
    for (std::size_t k = 0; k < lags; ++k) {
        out += std::to_string(k);
        for (const auto& series : report.acf) {
            out += ',';
            // A constant coordinate only carries lag 0.
            out += k < series.size() ? format_double(series[k]) : "";
        }
        out += '\n';
    }
    return out;
}

}  // namespace lmc

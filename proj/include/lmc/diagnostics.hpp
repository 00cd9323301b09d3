#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmc/grid.hpp"
#include "lmc/samplers.hpp"
#include "lmc/targets.hpp"

namespace lmc {

/*!
 * Normalized autocorrelation rho(0..max_lag) with fixed sample mean and the
 * biased 1/n normalization. Lags are evaluated in parallel.
 *
 * Throws std::invalid_argument for n < 2, max_lag >= n, or a constant series.
 */
std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t max_lag);

/*!
 * Effective sample size n / (1 + 2 sum_{k=1..K} rho(k)), K the first lag with
 * rho(k) + rho(k+1) < 0. Clamped to (0, n].
 */
double ess(std::span<const double> series);

//! Normalized occupancy of a res x res partition of the box. `samples` is
//! row-major n x 2. Throws std::domain_error for a sample outside the box.
Grid2D histogram2d(std::span<const double> samples, const BoxSpec& spec,
                   std::size_t res);

//! Half the L1 distance. Requires equal shapes and unit mass (+- 1e-6).
double tv_distance(const Grid2D& a, const Grid2D& b);

//! Fraction of the nx x ny basins holding at least ceil(0.01 n / (nx ny))
//! samples. 0 for an empty sample set.
double mode_coverage(std::span<const double> samples, const BoxSpec& spec);

//! (1/n) sum_t grad L(x_t) grad L(x_t)^T over row-major n x d samples.
DenseMatrix empirical_fisher(const Target& target,
                             std::span<const double> samples);

//---------------------------------------------------------------------------//
// Serial reference kernels, kept for validating the parallel ones.
//---------------------------------------------------------------------------//
namespace reference {

std::vector<double> autocorrelation(std::span<const double> series,
                                    std::size_t max_lag);
Grid2D histogram2d(std::span<const double> samples, const BoxSpec& spec,
                   std::size_t res);
DenseMatrix empirical_fisher(const Target& target,
                             std::span<const double> samples);

}  // namespace reference

//---------------------------------------------------------------------------//
// Chain summaries
//---------------------------------------------------------------------------//

struct DiagnosticsReport
{
    //! acf[d][k] for dimension d, lag k.
    std::vector<std::vector<double>> acf;
    std::vector<double> ess;
    double acceptance_rate = 0.0;
    std::optional<double> tv_distance;
    std::optional<double> mode_coverage;
    double wall_time_s = 0.0;
    std::optional<double> fisher_trace;
};

struct DiagnosticsOptions
{
    std::size_t max_lag = 200;
    std::size_t grid_res = 32;
};

/*!
 * Evaluate every diagnostic on a chain. Box-only fields are filled when the
 * target is a ParticleBoxTarget. A constant coordinate (a chain that never
 * moved) yields acf = {1} and ess = 1 for that coordinate.
 */
DiagnosticsReport compute_report(const Chain& chain, const Target& target,
                                 const DiagnosticsOptions& opts);

//! Single JSON object with the report fields.
std::string report_to_json(const DiagnosticsReport& report);

//! CSV with header lag,rho_x0,rho_x1,...
std::string acf_to_csv(const DiagnosticsReport& report);

}  // namespace lmc

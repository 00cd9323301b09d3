#pragma once

#include <span>

#include "lmc/rng.hpp"

namespace lmc {

//---------------------------------------------------------------------------//
/*!
 * Parameters of the stochastic proposal-scale update.
 *
 * The proposal covariance is sigma * I where sigma is recomputed every step
 * from the norm ratios of consecutive positions and consecutive scores.
 */
struct AdaptParams
{
    double beta = 1.0;
    double xi = 0.5;
    double eps = 0.05;
    double sigma0 = 1.0;
    //! Lower clamp applied to the base before the fractional power.
    double base_floor = 1e-12;
    //! Lower clamp for the denominator norm of a ratio.
    double norm_floor = 1e-12;

    //! Throws std::invalid_argument if any invariant is violated.
    void validate() const;
};

//! ||a|| / max(||b||, floor).
double ratio_norm_guarded(std::span<const double> a, std::span<const double> b,
                          double floor);

//! Maps a uniform u in [0, 1) onto [0, sqrt(2 pi) + sigma_prev).
double psi_from_uniform(double u, double sigma_prev);

//! psi_from_uniform applied to one uniform from `stream`.
double psi_draw(double sigma_prev, RngStream& stream);

//! Intermediate quantities of one scale update, exposed for testing.
struct SigmaTerms
{
    double ratio_theta_sq = 0;
    double ratio_grad_sq = 0;
    double psi = 0;
    double base = 0;
    double clamped_base = 0;
    double sigma = 0;
};

/*!
 * Evaluate the scale update with a given psi value.
 *
 *   base  = beta + psi (r_theta - r_grad)
 *   sigma = eps * max(base, base_floor)^xi / (1 + exp(-r_grad))
 *
 * where r_theta = (||theta_n|| / ||theta_prev||)^2 and
 * r_grad = (||grad_n|| / ||grad_prev||)^2.
 */
SigmaTerms sigma_terms(std::span<const double> theta_n,
                       std::span<const double> theta_prev,
                       std::span<const double> grad_n,
                       std::span<const double> grad_prev, double psi,
                       const AdaptParams& params);

//! Scale update with psi drawn from `stream`. Always positive and finite.
double sigma_update(std::span<const double> theta_n,
                    std::span<const double> theta_prev,
                    std::span<const double> grad_n,
                    std::span<const double> grad_prev, double sigma_prev,
                    const AdaptParams& params, RngStream& stream);

}  // namespace lmc

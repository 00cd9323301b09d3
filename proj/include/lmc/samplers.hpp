#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lmc/adaptation.hpp"
#include "lmc/rng.hpp"
#include "lmc/targets.hpp"

namespace lmc {

//---------------------------------------------------------------------------//
/*!
 * Current position of a chain with cached log-density and score.
 *
 * The history fields are empty only before the first transition.
 */
struct ChainState
{
    Vector theta;
    LogDensity log_p;
    Vector grad;
    std::optional<Vector> theta_prev;
    std::optional<Vector> grad_prev;
    double sigma = 1.0;
    std::uint64_t step = 0;
};

//! Evaluates the target at `theta`; throws std::invalid_argument if the
//! density is zero there.
ChainState make_initial_state(const Target& target, Vector theta,
                              double sigma0 = 1.0);

//---------------------------------------------------------------------------//
/*!
 * Gaussian proposal theta* ~ N(mean_fwd, cov_scale_fwd * I).
 *
 * The reverse kernel uses the same covariance scale with mean
 * theta* + (eps^2 / 2) grad(theta*). Target values at theta* are cached so
 * the accept step does not re-evaluate them.
 */
struct Proposal
{
    Vector theta_star;
    Vector mean_fwd;
    double cov_scale_fwd = 0.0;
    double log_q_fwd = 0.0;
    double log_q_rev = 0.0;

    LogDensity log_p_star;
    Vector grad_star;
    //! Scale carried into the next state (adaptive sampler only changes it).
    double next_sigma = 1.0;
    //! theta* has zero density; the proposal can never be accepted.
    bool auto_reject = false;
};

//! Log-density of N(mean, cov_scale * I) at x.
double gaussian_log_density(std::span<const double> x,
                            std::span<const double> mean, double cov_scale);

//! mean = theta + (eps^2 / 2) grad.
Vector langevin_mean(std::span<const double> theta,
                     std::span<const double> grad, double eps);

/*!
 * Build the proposal to a fixed theta* with drift step `eps` and covariance
 * scale `cov_scale`, filling both kernel densities.
 */
Proposal complete_proposal(const ChainState& state, Vector theta_star,
                           double eps, double cov_scale, const Target& target);

//! Classic MALA: theta* = theta + (eps^2/2) grad + eps z.
Proposal mala_propose(const ChainState& state, double eps, const Target& target,
                      RngStream& stream);

/*!
 * Adaptive Langevin proposal. At step 0 this is exactly mala_propose with
 * params.eps; afterwards the covariance scale comes from sigma_update and the
 * same scale is used for the reverse kernel.
 */
Proposal adaptive_propose(const ChainState& state, const AdaptParams& params,
                          const Target& target, RngStream& stream);

//! log of the Metropolis-Hastings ratio; -inf for auto-rejected proposals.
double log_acceptance_ratio(const ChainState& state, const Proposal& prop);

//! min(1, exp(log_acceptance_ratio)).
double acceptance_probability(const ChainState& state, const Proposal& prop);

struct StepResult
{
    ChainState state;
    bool accepted = false;
};

/*!
 * Metropolis-Hastings accept step. Consumes one uniform. The history shifts
 * forward whether or not the proposal is accepted.
 */
StepResult mh_accept(const ChainState& state, const Proposal& prop,
                     RngStream& stream);

//---------------------------------------------------------------------------//
// HMC
//---------------------------------------------------------------------------//

struct HmcParams
{
    double eps_leap = 0.05;
    int n_leap = 20;

    void validate() const;
};

struct LeapfrogResult
{
    Vector theta;
    Vector momentum;
    LogDensity log_p;
    Vector grad;
    bool divergent = false;
};

/*!
 * Identity-mass leapfrog. `grad` is the score at `theta`. Stops early with
 * divergent = true if an intermediate position has zero density.
 */
LeapfrogResult leapfrog(Vector theta, Vector momentum, const Vector& grad,
                        LogDensity log_p, double eps_leap, int n_leap,
                        const Target& target);

struct HmcStepResult
{
    ChainState state;
    bool accepted = false;
    //! H(proposed) - H(current); +inf for divergent trajectories.
    double delta_h = 0.0;
};

HmcStepResult hmc_step(const ChainState& state, const HmcParams& params,
                       const Target& target, RngStream& stream);

//---------------------------------------------------------------------------//
// Chains
//---------------------------------------------------------------------------//

struct MalaConfig
{
    double eps = 0.05;
};

struct AdaptiveConfig
{
    AdaptParams params;
};

struct HmcConfig
{
    HmcParams params;
};

using SamplerConfig = std::variant<MalaConfig, AdaptiveConfig, HmcConfig>;

std::string sampler_name(const SamplerConfig& cfg);

struct Chain
{
    std::size_t dim = 0;
    //! Row-major n x dim.
    std::vector<double> samples;
    std::vector<double> log_ps;
    std::vector<bool> accepted;

    std::string sampler;
    std::string target;
    std::uint64_t seed = 0;
    std::uint64_t chain_id = 0;
    double wall_time_s = 0.0;

    std::size_t size() const noexcept { return log_ps.size(); }
    std::span<const double> row(std::size_t i) const
    {
        return {samples.data() + i * dim, dim};
    }
    //! Copy of one coordinate across all samples.
    std::vector<double> column(std::size_t d) const;
    double acceptance_rate() const;
};

/*!
 * Run burn_in + n transitions from `init` on stream split(seed, chain_id)
 * and record the last n. Throws std::invalid_argument for a zero-density
 * init or n == 0.
 */
Chain run_chain(const SamplerConfig& cfg, const Target& target, std::size_t n,
                std::size_t burn_in, const Vector& init, std::uint64_t seed,
                std::uint64_t chain_id);

}  // namespace lmc

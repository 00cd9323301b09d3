#include "lmc/samplers.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ChainState shifted(const ChainState& state)
{
    ChainState next;
    next.theta_prev = state.theta;
    next.grad_prev = state.grad;
    next.step = state.step + 1;
    next.sigma = state.sigma;
    return next;
}

}  // namespace

ChainState make_initial_state(const Target& target, Vector theta, double sigma0)
{
    if (theta.size() != target.dim()) {
        throw std::invalid_argument("initial point has wrong dimension");
    }
    ChainState state;
    state.log_p = target.log_density(theta);
    if (!state.log_p.is_finite()) {
        throw std::invalid_argument(
            "initial point has zero density under the target");
    }
    state.grad = target.grad_log_density(theta);
    state.theta = std::move(theta);
    state.sigma = sigma0;
    return state;
}

double gaussian_log_density(std::span<const double> x,
                            std::span<const double> mean, double cov_scale)
{
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = x[i] - mean[i];
        sq += r * r;
    }
    const double d = static_cast<double>(x.size());
    return -0.5 * d * std::log(2.0 * std::numbers::pi * cov_scale)
           - sq / (2.0 * cov_scale);
}

Vector langevin_mean(std::span<const double> theta,
                     std::span<const double> grad, double eps)
{
    const double half_eps_sq = 0.5 * eps * eps;
    Vector mean(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        mean[i] = theta[i] + half_eps_sq * grad[i];
    }
    return mean;
}

Proposal complete_proposal(const ChainState& state, Vector theta_star,
                           double eps, double cov_scale, const Target& target)
{
    Proposal prop;
    prop.mean_fwd = langevin_mean(state.theta, state.grad, eps);
    prop.cov_scale_fwd = cov_scale;
    prop.log_q_fwd = gaussian_log_density(theta_star, prop.mean_fwd, cov_scale);
    prop.log_p_star = target.log_density(theta_star);
    prop.next_sigma = state.sigma;
    if (!prop.log_p_star.is_finite()) {
        prop.auto_reject = true;
        prop.log_q_rev = kNegInf;
    } else {
        prop.grad_star = target.grad_log_density(theta_star);
        const Vector mean_rev = langevin_mean(theta_star, prop.grad_star, eps);
        prop.log_q_rev = gaussian_log_density(state.theta, mean_rev, cov_scale);
    }
    prop.theta_star = std::move(theta_star);
    return prop;
}

namespace {

Vector gaussian_step(std::span<const double> mean, double scale,
                     RngStream& stream)
{
    Vector out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        out[i] = mean[i] + scale * stream.next_normal();
    }
    return out;
}

}  // namespace

Proposal mala_propose(const ChainState& state, double eps, const Target& target,
                      RngStream& stream)
{
    const Vector mean = langevin_mean(state.theta, state.grad, eps);
    return complete_proposal(state, gaussian_step(mean, eps, stream), eps,
                             eps * eps, target);
}

Proposal adaptive_propose(const ChainState& state, const AdaptParams& params,
                          const Target& target, RngStream& stream)
{
    if (state.step == 0 || !state.theta_prev || !state.grad_prev) {
        return mala_propose(state, params.eps, target, stream);
    }
    const double sigma_next
        = sigma_update(state.theta, *state.theta_prev, state.grad,
                       *state.grad_prev, state.sigma, params, stream);
    const Vector mean = langevin_mean(state.theta, state.grad, params.eps);
    Proposal prop = complete_proposal(
        state, gaussian_step(mean, std::sqrt(sigma_next), stream), params.eps,
        sigma_next, target);
    prop.next_sigma = sigma_next;
    return prop;
}

double log_acceptance_ratio(const ChainState& state, const Proposal& prop)
{
    if (prop.auto_reject) {
        return kNegInf;
    }
    return prop.log_p_star.value() + prop.log_q_rev - state.log_p.value()
           - prop.log_q_fwd;
}

double acceptance_probability(const ChainState& state, const Proposal& prop)
{
    const double lr = log_acceptance_ratio(state, prop);
    return lr >= 0.0 ? 1.0 : std::exp(lr);
}

StepResult mh_accept(const ChainState& state, const Proposal& prop,
                     RngStream& stream)
{
    const double alpha = acceptance_probability(state, prop);
    const double u = stream.next_uniform();

    StepResult result{shifted(state), false};
    result.state.sigma = prop.next_sigma;
    result.accepted = !prop.auto_reject && u < alpha;
    if (result.accepted) {
        result.state.theta = prop.theta_star;
        result.state.log_p = prop.log_p_star;
        result.state.grad = prop.grad_star;
    } else {
        result.state.theta = state.theta;
        result.state.log_p = state.log_p;
        result.state.grad = state.grad;
    }
    return result;
}

//---------------------------------------------------------------------------//
// HMC
//---------------------------------------------------------------------------//

void HmcParams::validate() const
{
    if (!(eps_leap > 0.0)) {
        throw std::invalid_argument("hmc eps_leap must be > 0");
    }
    if (n_leap < 1) {
        throw std::invalid_argument("hmc n_leap must be >= 1");
    }
}

LeapfrogResult leapfrog(Vector theta, Vector momentum, const Vector& grad,
                        LogDensity log_p, double eps_leap, int n_leap,
                        const Target& target)
{
    LeapfrogResult out{std::move(theta), std::move(momentum), log_p, grad,
                       false};
    const std::size_t d = out.theta.size();
    for (int step = 0; step < n_leap; ++step) {
        for (std::size_t i = 0; i < d; ++i) {
            out.momentum[i] += 0.5 * eps_leap * out.grad[i];
        }
        for (std::size_t i = 0; i < d; ++i) {
            out.theta[i] += eps_leap * out.momentum[i];
        }
        out.log_p = target.log_density(out.theta);
        if (!out.log_p.is_finite()) {
            out.divergent = true;
            return out;
        }
        out.grad = target.grad_log_density(out.theta);
        for (std::size_t i = 0; i < d; ++i) {
            out.momentum[i] += 0.5 * eps_leap * out.grad[i];
        }
    }
    return out;
}

namespace {

double kinetic(std::span<const double> momentum)
{
    double acc = 0.0;
    for (double p : momentum) {
        acc += p * p;
    }
    return 0.5 * acc;
}

}  // namespace

HmcStepResult hmc_step(const ChainState& state, const HmcParams& params,
                       const Target& target, RngStream& stream)
{
    Vector momentum(state.theta.size());
    for (double& p : momentum) {
        p = stream.next_normal();
    }
    const double h0 = -state.log_p.value() + kinetic(momentum);
    const auto traj = leapfrog(state.theta, momentum, state.grad, state.log_p,
                               params.eps_leap, params.n_leap, target);
    const double u = stream.next_uniform();

    HmcStepResult result{shifted(state), false,
                         std::numeric_limits<double>::infinity()};
    if (!traj.divergent) {
        const double h1 = -traj.log_p.value() + kinetic(traj.momentum);
        result.delta_h = h1 - h0;
        const double alpha
            = result.delta_h <= 0.0 ? 1.0 : std::exp(-result.delta_h);
        result.accepted = u < alpha;
    }
    if (result.accepted) {
        result.state.theta = traj.theta;
        result.state.log_p = traj.log_p;
        result.state.grad = traj.grad;
    } else {
        result.state.theta = state.theta;
        result.state.log_p = state.log_p;
        result.state.grad = state.grad;
    }
    return result;
}

//---------------------------------------------------------------------------//
// Chains
//---------------------------------------------------------------------------//

std::string sampler_name(const SamplerConfig& cfg)
{
    struct Namer
    {
        std::string operator()(const MalaConfig&) const { return "mala"; }
        std::string operator()(const AdaptiveConfig&) const { return "adaptive"; }
        std::string operator()(const HmcConfig&) const { return "hmc"; }
    };
    return std::visit(Namer{}, cfg);
}

std::vector<double> Chain::column(std::size_t d) const
{
    std::vector<double> col(size());
    for (std::size_t i = 0; i < size(); ++i) {
        col[i] = samples[i * dim + d];
    }
    return col;
}

double Chain::acceptance_rate() const
{
    if (accepted.empty()) {
        return 0.0;
    }
    std::size_t count = 0;
    for (bool a : accepted) {
        count += a ? 1 : 0;
    }
    return static_cast<double>(count) / static_cast<double>(accepted.size());
}

namespace {

// One transition of the configured sampler.
struct Transition
{
    const Target& target;
    RngStream& stream;
    const ChainState& state;

    StepResult operator()(const MalaConfig& cfg) const
    {
        return mh_accept(state, mala_propose(state, cfg.eps, target, stream),
                         stream);
    }
    StepResult operator()(const AdaptiveConfig& cfg) const
    {
        return mh_accept(
            state, adaptive_propose(state, cfg.params, target, stream), stream);
    }
    StepResult operator()(const HmcConfig& cfg) const
    {
        auto r = hmc_step(state, cfg.params, target, stream);
        return {std::move(r.state), r.accepted};
    }
};

void validate_config(const SamplerConfig& cfg)
{
    if (const auto* m = std::get_if<MalaConfig>(&cfg)) {
        if (!(m->eps > 0.0)) {
            throw std::invalid_argument("mala eps must be > 0");
        }
    } else if (const auto* a = std::get_if<AdaptiveConfig>(&cfg)) {
        a->params.validate();
    } else {
        std::get<HmcConfig>(cfg).params.validate();
    }
}

}  // namespace

Chain run_chain(const SamplerConfig& cfg, const Target& target, std::size_t n,
                std::size_t burn_in, const Vector& init, std::uint64_t seed,
                std::uint64_t chain_id)
{
    if (n == 0) {
        throw std::invalid_argument("chain length must be >= 1");
    }
    validate_config(cfg);

    const double sigma0 = std::holds_alternative<AdaptiveConfig>(cfg)
                              ? std::get<AdaptiveConfig>(cfg).params.sigma0
                              : 1.0;
    ChainState state = make_initial_state(target, init, sigma0);
    RngStream stream = split(seed, chain_id);

    Chain chain;
    chain.dim = target.dim();
    chain.sampler = sampler_name(cfg);
    chain.target = target.name();
    chain.seed = seed;
    chain.chain_id = chain_id;
    chain.samples.reserve(n * chain.dim);
    chain.log_ps.reserve(n);
    chain.accepted.reserve(n);

    const auto start = std::chrono::steady_clock::now();
    for (std::size_t it = 0; it < burn_in + n; ++it) {
        StepResult r = std::visit(Transition{target, stream, state}, cfg);
        state = std::move(r.state);
        if (it >= burn_in) {
            chain.samples.insert(chain.samples.end(), state.theta.begin(),
                                 state.theta.end());
            chain.log_ps.push_back(state.log_p.value());
            chain.accepted.push_back(r.accepted);
        }
    }
    chain.wall_time_s = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    return chain;
}

}  // namespace lmc

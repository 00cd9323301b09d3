#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "lmc/samplers.hpp"
#include "oracles.hpp"

using namespace lmc;

namespace {

const GaussMixTarget kStdNormal = make_isotropic_gaussian(1);
const ParticleBoxTarget kBox(BoxSpec{1.0, 1.0, 2, 2});

}  // namespace

TEST_CASE("mala proposal on a flat target is a pure gaussian step")
{
    const oracle::FlatTarget flat(3);
    const ChainState state = make_initial_state(flat, {0.1, -0.2, 0.3});

    // z = 0 is the drift mean, which equals theta when the score vanishes.
    const Proposal still = complete_proposal(state, state.theta, 0.4, 0.16, flat);
    CHECK(still.mean_fwd == state.theta);
    CHECK(still.log_q_fwd == still.log_q_rev);

    RngStream s(8, 0);
    RngStream z = s;
    const Proposal prop = mala_propose(state, 0.4, flat, s);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(prop.theta_star[i] == state.theta[i] + 0.4 * z.next_normal());
    }
    CHECK(prop.cov_scale_fwd == doctest::Approx(0.16));
    CHECK(acceptance_probability(state, prop) == 1.0);
}

TEST_CASE("mala drift on a standard normal")
{
    const ChainState state = make_initial_state(kStdNormal, {1.0});
    CHECK(state.grad[0] == -1.0);
    const Vector mean = langevin_mean(state.theta, state.grad, 0.5);
    CHECK(mean[0] == 0.875);

    RngStream s(1, 2);
    const Proposal prop = mala_propose(state, 0.5, kStdNormal, s);
    CHECK(prop.mean_fwd[0] == 0.875);
    CHECK(prop.log_q_fwd
          == doctest::Approx(oracle::gaussian_logpdf(prop.theta_star, prop.mean_fwd,
                                                     0.25))
                 .epsilon(1e-12));
    const Vector mean_rev = {prop.theta_star[0] - 0.125 * prop.theta_star[0]};
    CHECK(prop.log_q_rev
          == doctest::Approx(oracle::gaussian_logpdf(state.theta, mean_rev, 0.25))
                 .epsilon(1e-12));
}

TEST_CASE("gaussian log-density matches the oracle in several dimensions")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = 1 + trial % 5;
        Vector x(d), m(d);
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = z(rng);
            m[i] = z(rng);
        }
        const double var = 0.01 + std::abs(z(rng));
        CHECK(gaussian_log_density(x, m, var)
              == doctest::Approx(oracle::gaussian_logpdf(x, m, var)).epsilon(1e-12));
    }
}

TEST_CASE("adaptive proposal at step 0 is the MALA proposal")
{
    AdaptParams params;
    params.eps = 0.07;
    const ChainState state = make_initial_state(kBox, {0.25, 0.25}, params.sigma0);
    RngStream a(77, 3);
    RngStream b = a;
    const Proposal pa = adaptive_propose(state, params, kBox, a);
    const Proposal pm = mala_propose(state, params.eps, kBox, b);
    CHECK(pa.theta_star == pm.theta_star);
    CHECK(pa.cov_scale_fwd == pm.cov_scale_fwd);
    CHECK(pa.next_sigma == params.sigma0);
    CHECK(a == b);
}

TEST_CASE("adaptive proposal uses the updated scale both ways")
{
    AdaptParams params;
    params.eps = 0.1;
    ChainState state = make_initial_state(kStdNormal, {0.6});
    state.step = 5;
    state.theta_prev = Vector{-0.6};
    state.grad_prev = Vector{0.6};  // same norm as grad = -0.6
    RngStream s(2, 2);
    const Proposal prop = adaptive_propose(state, params, kStdNormal, s);
    CHECK(prop.cov_scale_fwd == doctest::Approx(0.073106).epsilon(1e-5));
    CHECK(prop.next_sigma == prop.cov_scale_fwd);
    const Vector mean_rev = langevin_mean(prop.theta_star, prop.grad_star, 0.1);
    CHECK(prop.log_q_rev
          == doctest::Approx(oracle::gaussian_logpdf(state.theta, mean_rev,
                                                     prop.cov_scale_fwd))
                 .epsilon(1e-12));
}

TEST_CASE("proposals outside the box are auto-rejected")
{
    const ChainState state = make_initial_state(kBox, {0.25, 0.25});
    const Proposal prop = complete_proposal(state, {1.2, 0.25}, 0.1, 0.01, kBox);
    CHECK(prop.auto_reject);
    CHECK(acceptance_probability(state, prop) == 0.0);
    RngStream s(0, 0);
    const auto r = mh_accept(state, prop, s);
    CHECK_FALSE(r.accepted);
    CHECK(r.state.theta == state.theta);

    // An adaptive chain with an enormous scale never leaves the box.
    AdaptParams params;
    params.eps = 0.5;
    params.beta = 50.0;
    const Chain chain = run_chain(AdaptiveConfig{params}, kBox, 2000, 0,
                                  {0.25, 0.25}, 3, 0);
    for (std::size_t i = 0; i < chain.size(); ++i) {
        CHECK(kBox.log_density(chain.row(i)).is_finite());
    }
}

TEST_CASE("metropolis-hastings ratio")
{
    SUBCASE("equal density with a symmetric kernel")
    {
        const oracle::FlatTarget flat(2);
        const ChainState state = make_initial_state(flat, {0.0, 0.0});
        const Proposal prop = complete_proposal(state, {0.3, -1.0}, 0.5, 0.25, flat);
        CHECK(log_acceptance_ratio(state, prop) == 0.0);
        CHECK(acceptance_probability(state, prop) == 1.0);
    }
    SUBCASE("standard normal hand computation")
    {
        const ChainState state = make_initial_state(kStdNormal, {0.0});
        const Proposal prop = complete_proposal(state, {1.0}, 0.5, 0.25, kStdNormal);
        // forward mean 0, reverse mean 1 - 0.125 = 0.875
        const double log_p0 = oracle::gaussian_logpdf(Vector{0.0}, Vector{0.0}, 1.0);
        const double log_p1 = oracle::gaussian_logpdf(Vector{1.0}, Vector{0.0}, 1.0);
        const double log_fwd = oracle::gaussian_logpdf(Vector{1.0}, Vector{0.0}, 0.25);
        const double log_rev = oracle::gaussian_logpdf(Vector{0.0}, Vector{0.875}, 0.25);
        const double expected = std::exp(log_p1 + log_rev - log_p0 - log_fwd);
        CHECK(expected < 1.0);
        CHECK(acceptance_probability(state, prop)
              == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("accept step shifts history and advances the step counter")
{
    ChainState state = make_initial_state(kStdNormal, {0.5}, 2.0);
    state.step = 3;
    Proposal prop = complete_proposal(state, {0.4}, 0.5, 0.25, kStdNormal);
    prop.next_sigma = 0.123;

    RngStream s(1, 1);
    const auto accepted = mh_accept(state, prop, s);
    // Ratio > 1 here: moving toward the mode with a near-symmetric kernel.
    REQUIRE(acceptance_probability(state, prop) == 1.0);
    CHECK(accepted.accepted);
    CHECK(accepted.state.theta == Vector{0.4});
    CHECK(accepted.state.grad == Vector{-0.4});
    CHECK(*accepted.state.theta_prev == Vector{0.5});
    CHECK(*accepted.state.grad_prev == Vector{-0.5});
    CHECK(accepted.state.step == 4);
    CHECK(accepted.state.sigma == 0.123);

    Proposal bad = prop;
    bad.auto_reject = true;
    const auto rejected = mh_accept(state, bad, s);
    CHECK_FALSE(rejected.accepted);
    CHECK(rejected.state.theta == Vector{0.5});
    CHECK(*rejected.state.theta_prev == Vector{0.5});
    CHECK(rejected.state.step == 4);
    CHECK(rejected.state.log_p == state.log_p);
}

TEST_CASE("small-step MALA almost always accepts")
{
    const Chain chain = run_chain(MalaConfig{1e-3}, kStdNormal, 10000, 0, {0.3}, 1, 0);
    CHECK(chain.acceptance_rate() >= 0.99);
}

TEST_CASE("leapfrog arithmetic and reversibility")
{
    const Vector theta{1.0};
    const Vector grad{-1.0};
    const LogDensity lp = kStdNormal.log_density(theta);

    const auto same = leapfrog(theta, {0.3}, grad, lp, 0.1, 0, kStdNormal);
    CHECK(same.theta == theta);
    CHECK(same.momentum == Vector{0.3});

    const auto one = leapfrog(theta, {0.0}, grad, lp, 0.1, 1, kStdNormal);
    CHECK(one.theta[0] == doctest::Approx(0.995).epsilon(1e-15));
    CHECK(one.momentum[0] == doctest::Approx(-0.09975).epsilon(1e-15));
    // Exact flow of the harmonic oscillator for t = 0.1.
    CHECK(std::abs(one.theta[0] - std::cos(0.1)) < 1e-4);
    CHECK(std::abs(one.momentum[0] + std::sin(0.1)) < 1e-4);

    const GaussMixTarget g3 = make_isotropic_gaussian(3, 2.0);
    const Vector start{0.4, -1.1, 2.0};
    const Vector p0{0.3, 0.7, -0.2};
    const auto fwd = leapfrog(start, p0, g3.grad_log_density(start),
                              g3.log_density(start), 0.07, 40, g3);
    Vector flipped = fwd.momentum;
    for (double& v : flipped) {
        v = -v;
    }
    const auto back = leapfrog(fwd.theta, flipped, fwd.grad, fwd.log_p, 0.07, 40, g3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(back.theta[i] - start[i]) < 1e-10);
        CHECK(std::abs(back.momentum[i] + p0[i]) < 1e-10);
    }
}

TEST_CASE("hmc energy error")
{
    SUBCASE("tiny step accepts with probability ~1")
    {
        const ChainState state = make_initial_state(kStdNormal, {0.7});
        RngStream s(3, 3);
        const auto r = hmc_step(state, HmcParams{1e-4, 1}, kStdNormal, s);
        CHECK(std::exp(-std::abs(r.delta_h)) > 0.9999);
    }
    SUBCASE("trajectories leaving the box are rejected")
    {
        const ChainState state = make_initial_state(kBox, {0.25, 0.25});
        RngStream s(3, 3);
        const auto r = hmc_step(state, HmcParams{5.0, 3}, kBox, s);
        CHECK_FALSE(r.accepted);
        CHECK(std::isinf(r.delta_h));
        CHECK(r.state.theta == state.theta);
    }
}

TEST_CASE("run_chain length, determinism and errors")
{
    const Chain a = run_chain(MalaConfig{0.5}, kStdNormal, 1000, 100, {0.0}, 9, 2);
    const Chain b = run_chain(MalaConfig{0.5}, kStdNormal, 1000, 100, {0.0}, 9, 2);
    CHECK(a.size() == 1000);
    CHECK(a.samples.size() == 1000);
    CHECK(a.samples == b.samples);
    CHECK(a.accepted == b.accepted);
    CHECK(a.log_ps == b.log_ps);
    CHECK(a.sampler == "mala");
    CHECK(a.wall_time_s > 0.0);

    const Chain c = run_chain(MalaConfig{0.5}, kStdNormal, 1000, 100, {0.0}, 9, 3);
    CHECK(a.samples != c.samples);

    CHECK_THROWS_AS(run_chain(MalaConfig{0.5}, kBox, 10, 0, {0.5, 0.5}, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_chain(MalaConfig{0.5}, kStdNormal, 0, 0, {0.0}, 1, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_chain(HmcConfig{HmcParams{0.1, 0}}, kStdNormal, 5, 0, {0.0}, 1, 0),
                    std::invalid_argument);
}

TEST_CASE("every sampler keeps the chain on positive density")
{
    for (const SamplerConfig& cfg :
         {SamplerConfig{MalaConfig{0.1}}, SamplerConfig{AdaptiveConfig{}},
          SamplerConfig{HmcConfig{}}}) {
        const Chain chain = run_chain(cfg, kBox, 3000, 0, {0.25, 0.25}, 21, 0);
        for (std::size_t i = 0; i < chain.size(); ++i) {
            REQUIRE(std::isfinite(chain.log_ps[i]));
            REQUIRE(kBox.log_density(chain.row(i)).value() == chain.log_ps[i]);
        }
    }
}

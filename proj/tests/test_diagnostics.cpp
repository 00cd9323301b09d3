#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include <omp.h>

#include <json.hpp>

#include "lmc/diagnostics.hpp"
#include "oracles.hpp"

using namespace lmc;

namespace {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> x(n);
    for (double& v : x) {
        v = z(rng);
    }
    return x;
}

std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed)
{
    auto e = white_noise(n, seed);
    for (std::size_t i = 1; i < n; ++i) {
        e[i] += phi * e[i - 1];
    }
    return e;
}

const BoxSpec kBox22{1.0, 1.0, 2, 2};

}  // namespace

TEST_CASE("autocorrelation matches the direct double sum")
{
    std::vector<double> alt(512);
    for (std::size_t i = 0; i < alt.size(); ++i) {
        alt[i] = i % 2 == 0 ? 1.0 : -1.0;
    }
    for (const auto& series : {alt, ar1(512, 0.8, 1), white_noise(512, 2)}) {
        const auto rho = autocorrelation(series, 511);
        const auto ref = oracle::acf_bruteforce(series, 511);
        CHECK(rho[0] == 1.0);
        for (std::size_t k = 0; k < rho.size(); ++k) {
            REQUIRE(std::abs(rho[k] - ref[k]) < 1e-12);
        }
        const auto serial = reference::autocorrelation(series, 511);
        for (std::size_t k = 0; k < rho.size(); ++k) {
            REQUIRE(std::abs(rho[k] - serial[k]) < 1e-12);
        }
    }
    CHECK(autocorrelation(alt, 1)[1] == doctest::Approx(-511.0 / 512.0));
}

TEST_CASE("white noise has negligible autocorrelation")
{
    const auto rho = autocorrelation(white_noise(100000, 3), 10);
    for (std::size_t k = 1; k <= 10; ++k) {
        CHECK(std::abs(rho[k]) < 0.02);
    }
}

TEST_CASE("autocorrelation errors")
{
    CHECK_THROWS_AS(autocorrelation(std::vector<double>(10, 2.0), 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(autocorrelation(std::vector<double>{1.0}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(autocorrelation(white_noise(10, 1), 10), std::invalid_argument);
    CHECK_THROWS_AS(ess(std::vector<double>(10, 2.0)), std::invalid_argument);
}

TEST_CASE("effective sample size")
{
    const auto iid = white_noise(10000, 4);
    const double e = ess(iid);
    CHECK(e >= 8000.0);
    CHECK(e <= 10000.0);

    // Each draw repeated twice: about n/2 independent values.
    const auto half = white_noise(5000, 5);
    std::vector<double> dup;
    for (double v : half) {
        dup.push_back(v);
        dup.push_back(v);
    }
    const double ed = ess(dup);
    CHECK(ed >= 0.4 * dup.size());
    CHECK(ed <= 0.6 * dup.size());

    // AR(1): ess ~ n (1 - phi) / (1 + phi).
    const auto a = ar1(100000, 0.9, 6);
    CHECK(ess(a) == doctest::Approx(100000.0 * 0.1 / 1.9).epsilon(0.25));

    std::vector<double> alt(1000);
    for (std::size_t i = 0; i < alt.size(); ++i) {
        alt[i] = i % 2 == 0 ? 1.0 : -1.0;
    }
    CHECK(ess(alt) == 1000.0);
}

TEST_CASE("histogram2d placement")
{
    const std::vector<double> one_cell{0.1, 0.1, 0.12, 0.05, 0.2, 0.2};
    const auto h = histogram2d(one_cell, kBox22, 4);
    CHECK(h.at(0, 0) == 1.0);
    CHECK(h.sum() == 1.0);

    const std::vector<double> centers{0.25, 0.25, 0.75, 0.25, 0.25, 0.75, 0.75, 0.75};
    const auto hc = histogram2d(centers, kBox22, 5);
    int nonzero = 0;
    for (double v : hc.values) {
        if (v > 0.0) {
            ++nonzero;
            CHECK(v == 0.25);
        }
    }
    CHECK(nonzero == 4);

    // Row follows y.
    const auto hy = histogram2d(std::vector<double>{0.1, 0.9}, kBox22, 2);
    CHECK(hy.at(1, 0) == 1.0);

    // Box edges fall in the last cell.
    const auto he = histogram2d(std::vector<double>{1.0, 1.0}, kBox22, 2);
    CHECK(he.at(1, 1) == 1.0);

    CHECK_THROWS_AS(histogram2d(std::vector<double>{1.2, 0.5}, kBox22, 4),
                    std::domain_error);
    CHECK_THROWS_AS(reference::histogram2d(std::vector<double>{1.2, 0.5}, kBox22, 4),
                    std::domain_error);
}

TEST_CASE("exact box samples converge to the analytic grid")
{
    oracle::BoxExactSampler sampler(kBox22, 11);
    const auto samples = sampler.draw(100000);
    // 16 x 16: at 32 x 32 the sampling noise alone is ~0.03 for 1e5 draws.
    CHECK(tv_distance(histogram2d(samples, kBox22, 16), pib_analytic_grid(kBox22, 16))
          < 0.02);

    const auto analytic = pib_analytic_grid(kBox22, 32);
    std::vector<double> mean_tv;
    for (std::size_t n : {1000, 10000, 100000}) {
        double acc = 0.0;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            oracle::BoxExactSampler s(kBox22, 100 + seed);
            acc += tv_distance(histogram2d(s.draw(n), kBox22, 32), analytic);
        }
        mean_tv.push_back(acc / 5);
    }
    CHECK(mean_tv[0] > mean_tv[1]);
    CHECK(mean_tv[1] > mean_tv[2]);
}

TEST_CASE("total variation distance")
{
    Grid2D a(1, 2);
    a.values = {1.0, 0.0};
    Grid2D b(1, 2);
    b.values = {0.5, 0.5};
    Grid2D c(1, 2);
    c.values = {0.0, 1.0};
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(a, c) == 1.0);
    CHECK(tv_distance(a, b) == 0.5);

    Grid2D wrong(2, 1);
    wrong.values = {0.5, 0.5};
    CHECK_THROWS_AS(tv_distance(a, wrong), std::invalid_argument);
    Grid2D unnormalized(1, 2);
    unnormalized.values = {0.5, 0.6};
    CHECK_THROWS_AS(tv_distance(a, unnormalized), std::invalid_argument);

    // Metric axioms on random normalized grids.
    std::mt19937_64 rng(8);
    std::exponential_distribution<double> ex(1.0);
    auto random_grid = [&] {
        Grid2D g(4, 5);
        double s = 0.0;
        for (double& v : g.values) {
            v = ex(rng);
            s += v;
        }
        for (double& v : g.values) {
            v /= s;
        }
        return g;
    };
    for (int i = 0; i < 200; ++i) {
        const auto x = random_grid();
        const auto y = random_grid();
        const auto z = random_grid();
        CHECK(tv_distance(x, y) == tv_distance(y, x));
        CHECK(tv_distance(x, z) <= tv_distance(x, y) + tv_distance(y, z) + 1e-15);
    }
}

TEST_CASE("mode coverage")
{
    const std::vector<double> centers{0.25, 0.25, 0.75, 0.25, 0.25, 0.75, 0.75, 0.75};
    CHECK(mode_coverage(centers, kBox22) == 1.0);
    CHECK(mode_coverage(std::vector<double>{0.1, 0.2, 0.3, 0.4}, kBox22) == 0.25);
    CHECK(mode_coverage(std::vector<double>{}, kBox22) == 0.0);

    // 1000 samples: each basin needs ceil(0.01 * 250) = 3.
    std::vector<double> skewed;
    for (int i = 0; i < 998; ++i) {
        skewed.insert(skewed.end(), {0.2, 0.2});
    }
    skewed.insert(skewed.end(), {0.8, 0.2, 0.8, 0.2});
    CHECK(mode_coverage(skewed, kBox22) == 0.25);
    skewed.insert(skewed.end(), {0.8, 0.2});
    CHECK(mode_coverage(skewed, kBox22) == 0.5);
}

TEST_CASE("empirical fisher information")
{
    for (double var : {1.0, 4.0}) {
        const GaussMixTarget g = make_isotropic_gaussian(1, var);
        const auto x = white_noise(100000, 9, std::sqrt(var));
        const auto f = empirical_fisher(g, x);
        CHECK(f.at(0, 0) == doctest::Approx(1.0 / var).epsilon(0.05));
    }

    // Box: E[score score^T] = diag(4 k_x^2, 4 k_y^2), k = n pi / L.
    oracle::BoxExactSampler sampler(kBox22, 21);
    const auto samples = sampler.draw(100000);
    const ParticleBoxTarget box(kBox22);
    const auto f = empirical_fisher(box, samples);
    const double expected = 4.0 * (2.0 * std::numbers::pi) * (2.0 * std::numbers::pi);
    CHECK(f.at(0, 0) == doctest::Approx(expected).epsilon(0.05));
    CHECK(f.at(1, 1) == doctest::Approx(expected).epsilon(0.05));
    CHECK(std::abs(f.at(0, 1)) < 0.02 * std::sqrt(f.at(0, 0) * f.at(1, 1)));

    const auto ref = reference::empirical_fisher(box, samples);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(f.values[i] == doctest::Approx(ref.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("empirical fisher is symmetric positive semidefinite")
{
    const GaussMixTarget mix(GaussMixSpec({{0.5, {-1.0, 0.0, 1.0}, {1.0, 0.5, 2.0}},
                                           {0.5, {1.0, 1.0, 0.0}, {0.3, 1.0, 1.0}}}));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = white_noise(3 * (5 + seed * 7), seed);
        const auto f = empirical_fisher(mix, x);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(f.at(i, j) == f.at(j, i));
            }
        }
        // v^T F v >= 0 for random directions.
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> z;
        for (int t = 0; t < 20; ++t) {
            const double v[3] = {z(rng), z(rng), z(rng)};
            double q = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                for (std::size_t j = 0; j < 3; ++j) {
                    q += v[i] * f.at(i, j) * v[j];
                }
            }
            CHECK(q >= -1e-12);
        }
    }
}

TEST_CASE("parallel kernels do not depend on the thread count")
{
    oracle::BoxExactSampler sampler(kBox22, 31);
    const auto samples = sampler.draw(50000);
    const ParticleBoxTarget box(kBox22);
    const auto series = ar1(30000, 0.7, 12);

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto h1 = histogram2d(samples, kBox22, 32);
    const auto f1 = empirical_fisher(box, samples);
    const auto a1 = autocorrelation(series, 300);
    const double e1 = ess(series);
    omp_set_num_threads(4);
    const auto h4 = histogram2d(samples, kBox22, 32);
    const auto f4 = empirical_fisher(box, samples);
    const auto a4 = autocorrelation(series, 300);
    const double e4 = ess(series);
    omp_set_num_threads(saved);

    CHECK(h1.values == h4.values);
    CHECK(f1.values == f4.values);
    CHECK(a1 == a4);
    CHECK(e1 == e4);
    CHECK(h1.values == reference::histogram2d(samples, kBox22, 32).values);
}

TEST_CASE("chain report and serialization")
{
    const ParticleBoxTarget box(kBox22);
    const Chain chain = run_chain(AdaptiveConfig{}, box, 2000, 0, {0.25, 0.25}, 5, 0);
    const auto report = compute_report(chain, box, DiagnosticsOptions{50, 16});
    REQUIRE(report.acf.size() == 2);
    CHECK(report.acf[0].size() == 51);
    CHECK(report.acf[0][0] == 1.0);
    CHECK(report.ess[0] > 0.0);
    CHECK(report.ess[0] <= 2000.0);
    CHECK(report.acceptance_rate == chain.acceptance_rate());
    REQUIRE(report.tv_distance);
    CHECK(*report.tv_distance >= 0.0);
    CHECK(*report.tv_distance <= 1.0);
    REQUIRE(report.mode_coverage);
    REQUIRE(report.fisher_trace);

    const auto j = nlohmann::json::parse(report_to_json(report));
    for (const char* key : {"acf", "ess", "acceptance_rate", "tv_distance",
                            "mode_coverage", "wall_time_s", "fisher_trace"}) {
        CHECK(j.contains(key));
    }
    const auto csv = acf_to_csv(report);
    CHECK(csv.rfind("lag,rho_x0,rho_x1\n0,1,1\n", 0) == 0);

    // Gaussian target: no box fields.
    const GaussMixTarget g = make_isotropic_gaussian(1);
    const Chain gc = run_chain(MalaConfig{0.5}, g, 500, 0, {0.0}, 5, 0);
    const auto gr = compute_report(gc, g, DiagnosticsOptions{1000, 16});
    CHECK_FALSE(gr.tv_distance);
    CHECK_FALSE(gr.mode_coverage);
    CHECK(gr.acf[0].size() == 500);
    CHECK(nlohmann::json::parse(report_to_json(gr))["tv_distance"].is_null());

    // A chain that never moves still produces a report.
    const Chain stuck = run_chain(MalaConfig{100.0}, box, 50, 0, {0.25, 0.25}, 5, 0);
    REQUIRE(stuck.acceptance_rate() == 0.0);
    const auto sr = compute_report(stuck, box, DiagnosticsOptions{});
    CHECK(sr.ess == std::vector<double>{1.0, 1.0});
    CHECK(*sr.mode_coverage == 0.25);
}

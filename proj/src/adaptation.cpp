#include "lmc/adaptation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lmc {

namespace {

double euclidean_norm(std::span<const double> v)
{
    double acc = 0.0;
    for (double x : v) {
        acc += x * x;
    }
    return std::sqrt(acc);
}

}  // namespace

void AdaptParams::validate() const
{
    if (!(eps > 0.0)) {
        throw std::invalid_argument("adaptation eps must be > 0");
    }
    if (!(xi > 0.0 && xi < 1.0)) {
        throw std::invalid_argument("adaptation xi must lie in (0, 1)");
    }
    if (!(sigma0 > 0.0)) {
        throw std::invalid_argument("adaptation sigma0 must be > 0");
    }
    if (!(base_floor > 0.0) || !(norm_floor > 0.0)) {
        throw std::invalid_argument("adaptation floors must be > 0");
    }
    if (!std::isfinite(beta)) {
        throw std::invalid_argument("adaptation beta must be finite");
    }
}

double ratio_norm_guarded(std::span<const double> a, std::span<const double> b,
                          double floor)
{
    assert(a.size() == b.size());
    return euclidean_norm(a) / std::max(euclidean_norm(b), floor);
}

double psi_from_uniform(double u, double sigma_prev)
{
    assert(sigma_prev >= 0.0);
    return u * (std::sqrt(2.0 * std::numbers::pi) + sigma_prev);
}

double psi_draw(double sigma_prev, RngStream& stream)
{
    return psi_from_uniform(stream.next_uniform(), sigma_prev);
}

SigmaTerms sigma_terms(std::span<const double> theta_n,
                       std::span<const double> theta_prev,
                       std::span<const double> grad_n,
                       std::span<const double> grad_prev, double psi,
                       const AdaptParams& params)
{
    SigmaTerms t;
    const double rt = ratio_norm_guarded(theta_n, theta_prev, params.norm_floor);
    const double rg = ratio_norm_guarded(grad_n, grad_prev, params.norm_floor);
    t.ratio_theta_sq = rt * rt;
    t.ratio_grad_sq = rg * rg;
    t.psi = psi;
    t.base = params.beta + psi * (t.ratio_theta_sq - t.ratio_grad_sq);
    t.clamped_base = std::max(t.base, params.base_floor);
    t.sigma = params.eps * std::pow(t.clamped_base, params.xi)
              / (1.0 + std::exp(-t.ratio_grad_sq));
    return t;
}

double sigma_update(std::span<const double> theta_n,
                    std::span<const double> theta_prev,
                    std::span<const double> grad_n,
                    std::span<const double> grad_prev, double sigma_prev,
                    const AdaptParams& params, RngStream& stream)
{
    const double psi = psi_draw(sigma_prev, stream);
    const double sigma
        = sigma_terms(theta_n, theta_prev, grad_n, grad_prev, psi, params).sigma;
    assert(std::isfinite(sigma) && sigma > 0.0);
    return sigma;
}

}  // namespace lmc

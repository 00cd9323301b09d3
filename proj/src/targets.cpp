#include "lmc/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lmc {

using std::numbers::pi;

double Grid2D::sum() const
{
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    return total;
}

namespace {

void require_dim(std::span<const double> point, std::size_t dim)
{
    if (point.size() != dim) {
        throw std::invalid_argument("point has dimension "
                                    + std::to_string(point.size())
                                    + ", target expects "
                                    + std::to_string(dim));
    }
}

// True when n x / L is an integer, i.e. sin(n pi x / L) vanishes exactly.
bool on_nodal_line(double length, int n, double x)
{
    const double t = n * x / length;
    return t == std::floor(t);
}

bool inside_open_interval(double length, double x)
{
    return x > 0.0 && x < length;
}

}  // namespace

//---------------------------------------------------------------------------//
// Particle in a box
//---------------------------------------------------------------------------//

void BoxSpec::validate() const
{
    if (!(lx > 0.0) || !(ly > 0.0)) {
        throw std::invalid_argument("box lengths must be positive");
    }
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("quantum numbers must be >= 1");
    }
}

void PhysConstants::validate() const
{
    if (!(rho > 0.0) || !(hbar > 0.0) || !(mass > 0.0)) {
        throw std::invalid_argument("physical constants must be positive");
    }
}

LogDensity pib_log_density(const BoxSpec& spec, std::span<const double> point)
{
    require_dim(point, 2);
    const double x = point[0];
    const double y = point[1];
    if (!inside_open_interval(spec.lx, x) || !inside_open_interval(spec.ly, y)
        || on_nodal_line(spec.lx, spec.nx, x)
        || on_nodal_line(spec.ly, spec.ny, y)) {
        return LogDensity::zero_density();
    }
    const double sx = std::sin(spec.nx * pi * x / spec.lx);
    const double sy = std::sin(spec.ny * pi * y / spec.ly);
    // (2 / sqrt(Lx Ly))^2 = 4 / (Lx Ly)
    return LogDensity(std::log(4.0 / (spec.lx * spec.ly)) + std::log(sx * sx)
                      + std::log(sy * sy));
}

Vector pib_grad_log_density(const BoxSpec& spec, std::span<const double> point,
                            double gmax)
{
    if (!pib_log_density(spec, point).is_finite()) {
        throw std::domain_error("gradient requested at a zero-density point");
    }
    auto component = [gmax](double length, int n, double x) {
        const double k = n * pi / length;
        const double g = 2.0 * k / std::tan(k * x);
        return std::clamp(g, -gmax, gmax);
    };
    return {component(spec.lx, spec.nx, point[0]),
            component(spec.ly, spec.ny, point[1])};
}

double pib_energy(const BoxSpec& spec, const PhysConstants& consts)
{
    spec.validate();
    consts.validate();
    const double prefactor = consts.rho * consts.rho * consts.hbar * consts.hbar
                             / (2.0 * consts.mass);
    const double nx = spec.nx;
    const double ny = spec.ny;
    return prefactor
           * (nx * nx / (spec.lx * spec.lx) + ny * ny / (spec.ly * spec.ly));
}

double pib_marginal_cdf(double length, int n, double x)
{
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= length) {
        return 1.0;
    }
    const double k = 2.0 * n * pi;
    return x / length - std::sin(k * x / length) / k;
}

Grid2D pib_analytic_grid(const BoxSpec& spec, std::size_t res)
{
    spec.validate();
    if (res < 2) {
        throw std::invalid_argument("grid resolution must be >= 2");
    }
    auto cell_masses = [res](double length, int n) {
        std::vector<double> mass(res);
        double lower = 0.0;
        for (std::size_t i = 0; i < res; ++i) {
            const double upper = pib_marginal_cdf(
                length, n, length * static_cast<double>(i + 1) / res);
            mass[i] = upper - lower;
            lower = upper;
        }
        return mass;
    };
    const auto mx = cell_masses(spec.lx, spec.nx);
    const auto my = cell_masses(spec.ly, spec.ny);

    Grid2D grid(res, res);
    for (std::size_t row = 0; row < res; ++row) {
        for (std::size_t col = 0; col < res; ++col) {
            grid.at(row, col) = my[row] * mx[col];
        }
    }
    return grid;
}

Vector pib_first_mode_center(const BoxSpec& spec)
{
    return {spec.lx / (2.0 * spec.nx), spec.ly / (2.0 * spec.ny)};
}

ParticleBoxTarget::ParticleBoxTarget(BoxSpec spec, double gmax)
    : spec_(spec), gmax_(gmax)
{
    spec_.validate();
    if (!(gmax_ > 0.0)) {
        throw std::invalid_argument("gradient clamp must be positive");
    }
}

LogDensity ParticleBoxTarget::log_density(std::span<const double> point) const
{
    return pib_log_density(spec_, point);
}

Vector ParticleBoxTarget::grad_log_density(std::span<const double> point) const
{
    return pib_grad_log_density(spec_, point, gmax_);
}

//---------------------------------------------------------------------------//
// Gaussian mixture
//---------------------------------------------------------------------------//

GaussMixSpec::GaussMixSpec(std::vector<GaussComponent> components)
    : components_(std::move(components))
{
    if (components_.empty()) {
        throw std::invalid_argument("mixture needs at least one component");
    }
    dim_ = components_.front().mean.size();
    if (dim_ == 0) {
        throw std::invalid_argument("mixture dimension must be >= 1");
    }
    double total = 0.0;
    for (const auto& c : components_) {
        if (c.mean.size() != dim_ || c.variance.size() != dim_) {
            throw std::invalid_argument("mixture components differ in dimension");
        }
        if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
            throw std::invalid_argument("mixture weights must be positive");
        }
        for (double v : c.variance) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument("variances must be positive");
            }
        }
        total += c.weight;
    }
    for (auto& c : components_) {
        c.weight /= total;
    }
}

namespace {

// log w_k + log N(point | mean_k, diag var_k) for every component.
std::vector<double> component_log_terms(const GaussMixSpec& spec,
                                        std::span<const double> point)
{
    std::vector<double> terms;
    terms.reserve(spec.components().size());
    for (const auto& c : spec.components()) {
        double acc = std::log(c.weight);
        for (std::size_t i = 0; i < point.size(); ++i) {
            const double r = point[i] - c.mean[i];
            acc -= 0.5 * (std::log(2.0 * pi * c.variance[i])
                          + r * r / c.variance[i]);
        }
        terms.push_back(acc);
    }
    return terms;
}

}  // namespace

LogDensity gauss_mix_log_density(const GaussMixSpec& spec,
                                 std::span<const double> point)
{
    require_dim(point, spec.dim());
    const auto terms = component_log_terms(spec, point);
    const double shift = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(shift)) {
        return LogDensity::zero_density();
    }
    double acc = 0.0;
    for (double t : terms) {
        acc += std::exp(t - shift);
    }
    return LogDensity(shift + std::log(acc));
}

Vector gauss_mix_grad(const GaussMixSpec& spec, std::span<const double> point)
{
    require_dim(point, spec.dim());
    const auto terms = component_log_terms(spec, point);
    const double shift = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(shift)) {
        throw std::domain_error("gradient requested at a zero-density point");
    }

    std::vector<double> resp(terms.size());
    double norm = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        resp[k] = std::exp(terms[k] - shift);
        norm += resp[k];
    }

    Vector grad(spec.dim(), 0.0);
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const auto& c = spec.components()[k];
        const double r = resp[k] / norm;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad[i] -= r * (point[i] - c.mean[i]) / c.variance[i];
        }
    }
    return grad;
}

GaussMixTarget make_isotropic_gaussian(std::size_t dim, double variance)
{
    return GaussMixTarget(GaussMixSpec(
        {GaussComponent{1.0, Vector(dim, 0.0), Vector(dim, variance)}}));
}

}  // namespace lmc

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lmc/grid.hpp"

namespace lmc {

using Vector = std::vector<double>;

//---------------------------------------------------------------------------//
/*!
 * Log-density value that is either finite or the zero-density sentinel.
 *
 * Never +inf and never NaN: construction from such a value clamps to the
 * sentinel, since a point with undefined density must never be accepted.
 */
class LogDensity
{
  public:
    constexpr LogDensity() noexcept = default;
    constexpr explicit LogDensity(double v) noexcept
        : value_(v == v && v != kInf ? v : -kInf)
    {
    }

    static constexpr LogDensity zero_density() noexcept { return LogDensity(); }

    constexpr double value() const noexcept { return value_; }
    constexpr bool is_finite() const noexcept { return value_ != -kInf; }

    friend constexpr bool operator==(LogDensity, LogDensity) = default;

  private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    double value_ = -kInf;
};

//---------------------------------------------------------------------------//
/*!
 * Target density interface: log-density and its gradient on R^d.
 *
 * Implementations are immutable after construction and safe to evaluate
 * concurrently.
 */
class Target
{
  public:
    virtual ~Target() = default;

    virtual std::size_t dim() const noexcept = 0;
    virtual std::string name() const = 0;
    virtual LogDensity log_density(std::span<const double> point) const = 0;

    //! Throws std::domain_error at a zero-density point.
    virtual Vector grad_log_density(std::span<const double> point) const = 0;
};

//---------------------------------------------------------------------------//
// Particle in a 2D box
//---------------------------------------------------------------------------//

struct BoxSpec
{
    double lx = 1.0;
    double ly = 1.0;
    int nx = 1;
    int ny = 1;

    //! Throws std::invalid_argument unless lengths > 0 and quantum numbers >= 1.
    void validate() const;
};

struct PhysConstants
{
    double rho = 1.0;
    double hbar = 1.0;
    double mass = 1.0;

    void validate() const;
};

inline constexpr double kDefaultGradClamp = 1e6;

//! log psi^2 inside the open box, sentinel outside or on a nodal line.
LogDensity pib_log_density(const BoxSpec& spec, std::span<const double> point);

//! Score of psi^2, each component clamped to [-gmax, gmax].
Vector pib_grad_log_density(const BoxSpec& spec, std::span<const double> point,
                            double gmax = kDefaultGradClamp);

//! (rho^2 hbar^2 / 2m) (nx^2/Lx^2 + ny^2/Ly^2). Metadata only.
double pib_energy(const BoxSpec& spec, const PhysConstants& consts);

/*!
 * Exact probability mass of psi^2 over each cell of a res x res partition of
 * the box. The density factorizes, so each cell mass is the product of two
 * closed-form integrals of sin^2.
 */
Grid2D pib_analytic_grid(const BoxSpec& spec, std::size_t res);

//! Fraction of the x-marginal mass of psi^2 on [0, x]; used by exact samplers.
double pib_marginal_cdf(double length, int n, double x);

//! Center of the first mode: (Lx / 2nx, Ly / 2ny).
Vector pib_first_mode_center(const BoxSpec& spec);

class ParticleBoxTarget final : public Target
{
  public:
    explicit ParticleBoxTarget(BoxSpec spec, double gmax = kDefaultGradClamp);

    std::size_t dim() const noexcept override { return 2; }
    std::string name() const override { return "particle_box"; }
    LogDensity log_density(std::span<const double> point) const override;
    Vector grad_log_density(std::span<const double> point) const override;

    const BoxSpec& spec() const noexcept { return spec_; }
    double gmax() const noexcept { return gmax_; }

  private:
    BoxSpec spec_;
    double gmax_;
};

//---------------------------------------------------------------------------//
// Diagonal Gaussian mixture
//---------------------------------------------------------------------------//

struct GaussComponent
{
    double weight = 1.0;
    Vector mean;
    Vector variance;
};

/*!
 * Mixture of axis-aligned Gaussians. Weights are normalized on construction;
 * throws std::invalid_argument for empty, mismatched or nonpositive input.
 */
class GaussMixSpec
{
  public:
    explicit GaussMixSpec(std::vector<GaussComponent> components);

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<GaussComponent>& components() const noexcept
    {
        return components_;
    }

  private:
    std::vector<GaussComponent> components_;
    std::size_t dim_ = 0;
};

LogDensity gauss_mix_log_density(const GaussMixSpec& spec,
                                 std::span<const double> point);
Vector gauss_mix_grad(const GaussMixSpec& spec, std::span<const double> point);

class GaussMixTarget final : public Target
{
  public:
    explicit GaussMixTarget(GaussMixSpec spec) : spec_(std::move(spec)) {}

    std::size_t dim() const noexcept override { return spec_.dim(); }
    std::string name() const override { return "gauss_mix"; }
    LogDensity log_density(std::span<const double> point) const override
    {
        return gauss_mix_log_density(spec_, point);
    }
    Vector grad_log_density(std::span<const double> point) const override
    {
        return gauss_mix_grad(spec_, point);
    }

    const GaussMixSpec& spec() const noexcept { return spec_; }

  private:
    GaussMixSpec spec_;
};

//! Convenience: N(0, variance * I) in `dim` dimensions.
GaussMixTarget make_isotropic_gaussian(std::size_t dim, double variance = 1.0);

}  // namespace lmc

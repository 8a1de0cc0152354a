#include "ringswarm/density.hpp"

#include "ringswarm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ringswarm {

void DensityEstimatorSpec::validate() const
{
    if (!(bandwidth > 0.0 && bandwidth < pi))
        throw Error(ErrorCode::invalid_argument, "KDE bandwidth must lie in (0, pi)");
}

namespace {

// Unnormalised wrapped Gaussian exp(-d^2 / 2h^2) summed over periodic images.
class WrappedGaussian {
public:
    explicit WrappedGaussian(double bandwidth)
        : inv_two_h2_(1.0 / (2.0 * bandwidth * bandwidth)),
          // One image on each side is enough for h < pi / 4.
          images_(std::max(1, static_cast<int>(std::ceil(4.0 * bandwidth / pi))))
    {
    }

    double operator()(double offset) const
    {
        double d = offset;
        if (d >= pi) d -= two_pi;
        else if (d < -pi) d += two_pi;
        if (!(d >= -pi && d < pi)) d = wrap_angle(offset);
        double v = 0.0;
        for (int k = -images_; k <= images_; ++k) {
            const double z = d + two_pi * k;
            const double exponent = z * z * inv_two_h2_;
            // exp underflows to exactly zero past this point.
            if (exponent < 746.0) v += std::exp(-exponent);
        }
        return v;
    }

private:
    double inv_two_h2_;
    int images_;
};

}  // namespace

GridFunction estimate_density(std::span<const double> positions, const DensityEstimatorSpec& spec)
{
    spec.validate();
    if (positions.empty()) throw Error(ErrorCode::invalid_argument, "density of an empty swarm is undefined");

    const RingGrid& grid = spec.grid;
    const std::size_t m = grid.size();
    const WrappedGaussian gaussian(spec.bandwidth);

    GridFunction out(grid);
    std::vector<double> bump(m);
    for (double p : positions) {
        if (!std::isfinite(p)) throw Error(ErrorCode::non_finite, "agent position is not finite");
        double total = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            bump[j] = gaussian(grid.node(j) - p);
            total += bump[j];
        }
        const double scale = 1.0 / (total * grid.spacing());
        for (std::size_t j = 0; j < m; ++j) out[j] += bump[j] * scale;
    }
    return out;
}

GridFunction smooth_density(const GridFunction& density, double bandwidth)
{
    DensityEstimatorSpec{bandwidth, density.grid()}.validate();
    const RingGrid& grid = density.grid();
    const WrappedGaussian gaussian(bandwidth);
    GridFunction bump = GridFunction::sample(grid, gaussian);
    bump *= 1.0 / integrate(bump);
    return circular_convolve(bump, density);
}

GridFunction von_mises_density(double mean, double concentration, double mass, const RingGrid& grid)
{
    if (!(concentration >= 0.0)) throw Error(ErrorCode::invalid_argument, "von Mises concentration must be >= 0");
    const double norm = mass / (two_pi * std::cyl_bessel_i(0.0, concentration));
    return GridFunction::sample(grid, [&](double x) { return norm * std::exp(concentration * std::cos(x - mean)); });
}

GridFunction bimodal_density(double mean1, double mean2, double concentration, double mass, const RingGrid& grid)
{
    if (!(concentration >= 0.0)) throw Error(ErrorCode::invalid_argument, "von Mises concentration must be >= 0");
    const double norm = mass / (2.0 * two_pi * std::cyl_bessel_i(0.0, concentration));
    return GridFunction::sample(grid, [&](double x) {
        return norm * (std::exp(concentration * std::cos(x - mean1)) + std::exp(concentration * std::cos(x - mean2)));
    });
}

double TrackingSchedule::mean_at(double t) const
{
    if (waypoints.empty()) return 0.0;
    double mu = waypoints.front();
    double clock = hold_until;
    if (t <= clock) return mu;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double leg = std::abs(waypoints[i] - mu) / slew_rate;
        if (t < clock + leg) return mu + std::copysign(slew_rate, waypoints[i] - mu) * (t - clock);
        clock += leg;
        mu = waypoints[i];
    }
    return mu;
}

double TrackingSchedule::mean_rate_at(double t) const
{
    if (waypoints.empty() || t < hold_until) return 0.0;
    double mu = waypoints.front();
    double clock = hold_until;
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        const double leg = std::abs(waypoints[i] - mu) / slew_rate;
        if (t < clock + leg) return std::copysign(slew_rate, waypoints[i] - mu);
        clock += leg;
        mu = waypoints[i];
    }
    return 0.0;
}

double TrackingSchedule::end_time() const
{
    double clock = hold_until;
    for (std::size_t i = 1; i < waypoints.size(); ++i)
        clock += std::abs(waypoints[i] - waypoints[i - 1]) / slew_rate;
    return clock;
}

void TargetProgram::validate() const
{
    if (!(mass > 0.0)) throw Error(ErrorCode::invalid_argument, "target mass must be positive");
    const double k = std::visit([](const auto& v) { return v.concentration; }, variant);
    if (!(k >= 0.0)) throw Error(ErrorCode::invalid_argument, "target concentration must be >= 0");
    if (const auto* tr = std::get_if<TrackingTarget>(&variant); tr && !(tr->schedule.slew_rate > 0.0))
        throw Error(ErrorCode::invalid_argument, "tracking slew rate must be positive");
}

namespace {

struct TargetVisitor {
    double t;
    double mass;
    const RingGrid& grid;

    TargetSample operator()(const MonomodalTarget& m) const
    {
        return {von_mises_density(m.mean, m.concentration, mass, grid), GridFunction(grid)};
    }

    TargetSample operator()(const BimodalTarget& b) const
    {
        return {bimodal_density(b.mean1, b.mean2, b.concentration, mass, grid), GridFunction(grid)};
    }

    TargetSample operator()(const TrackingTarget& tr) const
    {
        const double mu = tr.schedule.mean_at(t);
        const double mu_rate = tr.schedule.mean_rate_at(t);
        GridFunction density = von_mises_density(mu, tr.concentration, mass, grid);
        // d/dt exp(k cos(x - mu(t))) = mu' k sin(x - mu) exp(...)
        GridFunction rate(grid);
        for (std::size_t j = 0; j < grid.size(); ++j)
            rate[j] = mu_rate * tr.concentration * std::sin(grid.node(j) - mu) * density[j];
        return {std::move(density), std::move(rate)};
    }
};

}  // namespace

TargetSample target_at(const TargetProgram& program, double t, const RingGrid& grid)
{
    if (!(t >= 0.0)) throw Error(ErrorCode::invalid_argument, "target time must be >= 0");
    return std::visit(TargetVisitor{t, program.mass, grid}, program.variant);
}

double kl_divergence(const GridFunction& rho, const GridFunction& rho_desired)
{
    require_same_grid(rho, rho_desired, "kl_divergence");
    const std::size_t m = rho.size();
    double sp = 0.0;
    double sq = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        sp += std::max(rho[j], kl_floor);
        sq += std::max(rho_desired[j], kl_floor);
    }
    double d = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double p = std::max(rho[j], kl_floor) / sp;
        const double q = std::max(rho_desired[j], kl_floor) / sq;
        d += p * std::log(p / q);
    }
    if (!std::isfinite(d)) throw Error(ErrorCode::non_finite, "KL divergence is not finite");
    // Rounding can leave a tiny negative residue when the fields coincide.
    return std::max(d, 0.0);
}

double l2_error_norm(const GridFunction& e) { return std::sqrt(integrate(e * e)); }

}  // namespace ringswarm

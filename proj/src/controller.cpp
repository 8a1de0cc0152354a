#include "ringswarm/controller.hpp"

#include "ringswarm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ringswarm {

void ControllerGains::validate() const
{
    if (!(kp > 0.0) || !std::isfinite(kp)) throw Error(ErrorCode::invalid_argument, "controller gain Kp must be > 0");
}

ControlFields compute_q(const GridFunction& rho, const GridFunction& rho_desired, const KernelSpec& kernel,
                        const ControllerGains& gains)
{
    require_same_grid(rho, rho_desired, "compute_q");
    gains.validate();

    const GridFunction kernel_samples = sample_kernel_on_grid(kernel, rho.grid());
    GridFunction e = rho_desired - rho;
    GridFunction vd = circular_convolve(kernel_samples, rho_desired);
    GridFunction ve = circular_convolve(kernel_samples, e);

    GridFunction q = gains.kp * e;
    q -= spatial_derivative(e * vd);
    q -= spatial_derivative(rho_desired * ve);

    return ControlFields{std::move(e), std::move(vd), std::move(ve), std::move(q), GridFunction(rho.grid()), 0.0};
}

GridFunction reference_feedforward(const GridFunction& rho_desired, const GridFunction& rho_desired_rate,
                                   const GridFunction& desired_velocity)
{
    require_same_grid(rho_desired, rho_desired_rate, "reference_feedforward");
    return rho_desired_rate + spatial_derivative(rho_desired * desired_velocity);
}

double density_floor(double mass) { return 1e-6 * mass / two_pi; }

GridFunction control_flux(const GridFunction& q, IntegrationConstant constant)
{
    GridFunction flux = cumulative_integral(q);
    const double c = constant == IntegrationConstant::boundary_value ? q[0] : 0.0;
    for (double& v : flux.values()) v = -(v + c);
    return flux;
}

GridFunction compute_U(const GridFunction& rho, const GridFunction& q, IntegrationConstant constant,
                       FloorPolicy policy)
{
    require_same_grid(rho, q, "compute_U");
    const double floor = density_floor(integrate(rho));
    if (!(floor > 0.0)) throw Error(ErrorCode::density_floor, "compute_U needs a density with positive mass");
    GridFunction u = control_flux(q, constant);
    for (std::size_t j = 0; j < rho.size(); ++j) {
        if (policy == FloorPolicy::clamp) {
            u[j] /= std::max(rho[j], floor);
            continue;
        }
        if (!(rho[j] >= floor))
            throw Error(ErrorCode::density_floor,
                        "density " + std::to_string(rho[j]) + " at node " + std::to_string(j) + " (x = " +
                            std::to_string(rho.grid().node(j)) +
                            ") is below the floor; q would act as a mass source/sink there");
        u[j] /= rho[j];
    }
    return u;
}

void sample_agent_inputs(const GridFunction& U, std::span<const double> positions, std::span<double> out)
{
    const std::size_t m = U.size();
    const double inv_h = 1.0 / U.grid().spacing();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double s = (wrap_angle(positions[i]) + pi) * inv_h;
        const double cell = std::floor(s);
        const double frac = s - cell;
        const std::size_t j = static_cast<std::size_t>(cell) % m;
        out[i] = (1.0 - frac) * U[j] + frac * U[(j + 1) % m];
    }
}

std::vector<double> sample_agent_inputs(const GridFunction& U, std::span<const double> positions)
{
    std::vector<double> out(positions.size());
    sample_agent_inputs(U, positions, out);
    return out;
}

}  // namespace ringswarm

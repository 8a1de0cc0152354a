#pragma once

#include "ringswarm/interaction.hpp"
#include "ringswarm/ring.hpp"

#include <span>
#include <vector>

namespace ringswarm {

struct ControllerGains {
    double kp = 10.0;

    void validate() const;
};

/// Macroscopic control quantities at one instant.
struct ControlFields {
    GridFunction error;             // e = rho_d - rho
    GridFunction desired_velocity;  // Vd = f * rho_d
    GridFunction error_velocity;    // Ve = f * e
    GridFunction q;                 // mass source/sink feedback
    GridFunction u;                 // velocity-form control, zero until filled by compute_U
    double t = 0.0;
};

/// q = Kp e - [e Vd]_x - [rho_d Ve]_x with central-difference flux derivatives.
/// The result is linear in e for fixed rho_d and has zero integral.
ControlFields compute_q(const GridFunction& rho, const GridFunction& rho_desired, const KernelSpec& kernel,
                        const ControllerGains& gains);

/// rho_d_t + [rho_d Vd]_x: the amount by which a target fails to obey its own
/// transport under the swarm kernel. Adding it to q makes the error dynamics
/// e_t = -Kp e + [e Ve]_x hold for any smooth target, static or moving.
GridFunction reference_feedforward(const GridFunction& rho_desired, const GridFunction& rho_desired_rate,
                                   const GridFunction& desired_velocity);

/// Additive constant C in rho U = -(int_{-pi}^x q dy + C).
enum class IntegrationConstant {
    zero,           // pure antiderivative
    boundary_value  // C = q(-pi, t), read literally from the velocity-form law
};

/// Lowest density accepted by compute_U: 1e-6 N / 2 pi.
double density_floor(double mass);

/// rho U = -(cumulative_integral(q) + C). Well defined wherever rho is.
GridFunction control_flux(const GridFunction& q, IntegrationConstant constant = IntegrationConstant::zero);

/// Handling of nodes whose density is below density_floor.
enum class FloorPolicy {
    reject,  // throw ErrorCode::density_floor
    clamp    // divide by the floor instead; for fields sampled only near agents
};

/// U = control_flux(q) / rho. With FloorPolicy::reject, throws
/// ErrorCode::density_floor naming the first node where rho drops below
/// density_floor(integrate(rho)).
GridFunction compute_U(const GridFunction& rho, const GridFunction& q,
                       IntegrationConstant constant = IntegrationConstant::zero,
                       FloorPolicy policy = FloorPolicy::reject);

/// Periodic linear interpolation of U at each agent position.
std::vector<double> sample_agent_inputs(const GridFunction& U, std::span<const double> positions);
void sample_agent_inputs(const GridFunction& U, std::span<const double> positions, std::span<double> out);

}  // namespace ringswarm

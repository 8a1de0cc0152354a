#pragma once

#include "ringswarm/interaction.hpp"
#include "ringswarm/ring.hpp"

#include <functional>
#include <span>
#include <vector>

namespace ringswarm {

/// Agent positions on the ring plus the simulation clock.
struct SwarmState {
    std::vector<double> positions;
    double t = 0.0;
};

enum class Scheme { explicit_euler, rk4 };

/// When the controller is re-evaluated inside an RK4 step. per_step computes
/// the input law once at the start of the step and samples it at each stage
/// position (sampled-data actuation); per_stage re-runs the controller at
/// every stage state.
enum class InputRefresh { per_step, per_stage };

struct IntegratorSpec {
    double dt = 1e-3;
    Scheme scheme = Scheme::rk4;
    InputRefresh refresh = InputRefresh::per_step;

    void validate() const;
};

/// Fills one input per agent for the given (stage) positions.
using InputSampler = std::function<void(std::span<const double> positions, std::span<double> inputs)>;

/// Evaluates the control law at a swarm state and returns the input sampler.
using SwarmController = std::function<InputSampler(const SwarmState&)>;

/// Controller that always returns zero inputs.
SwarmController open_loop_controller();

/// x_i' = sum_j f([x_i, x_j]_pi) + u_i.
void microscopic_rhs(std::span<const double> positions, const KernelSpec& kernel, std::span<const double> inputs,
                     std::span<double> rates);
std::vector<double> microscopic_rhs(const SwarmState& state, const KernelSpec& kernel,
                                    std::span<const double> inputs);

/// One dt advance; positions are rewrapped into [-pi, pi) afterwards.
/// Throws ErrorCode::non_finite if any position stops being finite.
SwarmState step_swarm(const SwarmState& state, const KernelSpec& kernel, const SwarmController& controller,
                      const IntegratorSpec& integrator);

/// Evenly spread agents: x_i = -pi + (i + 1/2) 2 pi / N.
std::vector<double> lattice_positions(std::size_t n);

/// N agents spread evenly over an arc of the given width centred on `center`.
std::vector<double> clumped_positions(std::size_t n, double center, double width);

/// Open-loop trajectory sampled every `sample_every` seconds (the initial
/// state is the first sample).
std::vector<SwarmState> run_open_loop(const SwarmState& initial, const KernelSpec& kernel,
                                      const IntegratorSpec& integrator, double t_end, double sample_every);

/// Grid density for the N = infinity model.
struct ContinuumState {
    GridFunction density;
    double t = 0.0;
};

/// Control acting on the continuum, in one of two forms.
///
/// As a mass source q, the control part of rho U through the face right of
/// node j is -spacing * sum_{i <= j} (q_i - mean(q)): the divergence removes
/// exactly q and total mass is untouched. As a transport velocity U, the face
/// flux is the average of rho U on the two adjacent nodes.
struct ContinuumControl {
    enum class Form { source, velocity };

    Form form = Form::source;
    GridFunction field;  // q or U
    /// Added to V it gives the characteristic speed of the closed-loop flux,
    /// which sets the upwind dissipation and the CFL limit. For a velocity
    /// control this is U itself; for the source form of the feedback law it
    /// is -Vd, the local sensitivity d(rho U)/d(rho).
    GridFunction speed_shift;
};

using ContinuumController = std::function<ContinuumControl(const ContinuumState&)>;

ContinuumController uncontrolled_continuum();

/// Face values of rho U for a source field (index j is the face between
/// nodes j and j + 1).
std::vector<double> control_face_flux(const GridFunction& source);

/// Largest characteristic speed |V + speed_shift| over the grid.
double continuum_max_speed(const ContinuumState& state, const KernelSpec& kernel, const ContinuumControl& control);

/// Relaxation rate set by the kernel's jump at the origin: it contributes
/// 2 (1 - G) rho to the divergence of V, so the density relaxes at that rate
/// regardless of how slowly it is transported.
double continuum_stiffness(const ContinuumState& state, const KernelSpec& kernel);
/// Largest dt satisfying both the transport CFL condition and
/// dt * continuum_stiffness <= cfl at this state.
double continuum_stable_dt(const ContinuumState& state, const KernelSpec& kernel,
                           const ContinuumController& controller, double cfl = 0.5);

/// What step_continuum does when a node density drops below -1e-12.
/// Round-off negatives above that are always clipped to zero.
enum class NegativeDensity {
    reject,  // throw ErrorCode::non_finite
    allow    // keep evolving the signed field (source-form model, mass exact)
};

struct ContinuumOptions {
    double cfl = 0.5;
    NegativeDensity negative = NegativeDensity::reject;
};

/// One dt advance of rho_t + [rho (V + U)]_x = 0 with a conservative
/// local Lax-Friedrichs flux and three-stage SSP Runge-Kutta in time.
/// Throws ErrorCode::cfl_violation if dt exceeds continuum_stable_dt.
ContinuumState step_continuum(const ContinuumState& state, const KernelSpec& kernel,
                              const ContinuumController& controller, double dt, const ContinuumOptions& options = {});

}  // namespace ringswarm

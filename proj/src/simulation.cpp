#include "ringswarm/simulation.hpp"

#include "ringswarm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ringswarm {

void IntegratorSpec::validate() const
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::invalid_argument, "integrator dt must be > 0");
}

SwarmController open_loop_controller()
{
    return [](const SwarmState&) -> InputSampler {
        return [](std::span<const double>, std::span<double> inputs) { std::fill(inputs.begin(), inputs.end(), 0.0); };
    };
}

void microscopic_rhs(std::span<const double> positions, const KernelSpec& kernel, std::span<const double> inputs,
                     std::span<double> rates)
{
    const std::size_t n = positions.size();
    if (inputs.size() != n || rates.size() != n)
        throw Error(ErrorCode::invalid_argument, "microscopic_rhs: inputs and rates must have one entry per agent");

    std::copy(inputs.begin(), inputs.end(), rates.begin());
    const double g = kernel.attraction_strength;
    const double inv_l = 1.0 / kernel.attraction_length;
    // Positions sit within a step of [-pi, pi), so one shift of 2 pi nearly
    // always suffices; anything further falls back to the general wrap.
    auto offset = [](double a, double b) {
        double d = a - b;
        if (d >= pi) d -= two_pi;
        else if (d < -pi) d += two_pi;
        return d >= -pi && d < pi ? d : wrap_distance(a, b);
    };
    // Each unordered pair is evaluated once; f is odd, so the partner gets the
    // negated value except at the antipode, where both wrapped offsets are -pi.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = offset(positions[i], positions[j]);
            double f = 0.0;
            if (d != 0.0) {
                const double a = std::abs(d);
                const double magnitude = std::exp(-a) - g * std::exp(-a * inv_l);
                f = d > 0.0 ? magnitude : -magnitude;
            }
            rates[i] += f;
            rates[j] += d == -pi ? f : -f;
        }
    }
}

std::vector<double> microscopic_rhs(const SwarmState& state, const KernelSpec& kernel,
                                    std::span<const double> inputs)
{
    std::vector<double> rates(state.positions.size());
    microscopic_rhs(state.positions, kernel, inputs, rates);
    return rates;
}

namespace {

void check_finite(std::span<const double> positions, double t)
{
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (!std::isfinite(positions[i]))
            throw Error(ErrorCode::non_finite,
                        "agent " + std::to_string(i) + " left the finite range at t = " + std::to_string(t));
}

}  // namespace

SwarmState step_swarm(const SwarmState& state, const KernelSpec& kernel, const SwarmController& controller,
                      const IntegratorSpec& integrator)
{
    integrator.validate();
    const std::size_t n = state.positions.size();
    const double dt = integrator.dt;
    std::vector<double> inputs(n);

    InputSampler sampler = controller(state);
    auto rate_at = [&](const std::vector<double>& x, double t, std::vector<double>& out) {
        if (integrator.refresh == InputRefresh::per_stage && t != state.t) sampler = controller(SwarmState{x, t});
        sampler(x, inputs);
        microscopic_rhs(x, kernel, inputs, out);
    };

    SwarmState next{state.positions, state.t + dt};
    if (integrator.scheme == Scheme::explicit_euler) {
        std::vector<double> k1(n);
        rate_at(state.positions, state.t, k1);
        for (std::size_t i = 0; i < n; ++i) next.positions[i] += dt * k1[i];
    } else {
        std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n);
        const auto& x = state.positions;
        rate_at(x, state.t, k1);
        for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * dt * k1[i];
        rate_at(stage, state.t + 0.5 * dt, k2);
        for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + 0.5 * dt * k2[i];
        rate_at(stage, state.t + 0.5 * dt, k3);
        for (std::size_t i = 0; i < n; ++i) stage[i] = x[i] + dt * k3[i];
        rate_at(stage, state.t + dt, k4);
        for (std::size_t i = 0; i < n; ++i)
            next.positions[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    check_finite(next.positions, next.t);
    for (double& p : next.positions) p = wrap_angle(p);
    return next;
}

std::vector<double> lattice_positions(std::size_t n)
{
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = -pi + (static_cast<double>(i) + 0.5) * two_pi / static_cast<double>(n);
    return out;
}

std::vector<double> clumped_positions(std::size_t n, double center, double width)
{
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = wrap_angle(center - 0.5 * width + (static_cast<double>(i) + 0.5) * width / static_cast<double>(n));
    return out;
}

std::vector<SwarmState> run_open_loop(const SwarmState& initial, const KernelSpec& kernel,
                                      const IntegratorSpec& integrator, double t_end, double sample_every)
{
    integrator.validate();
    const SwarmController controller = open_loop_controller();
    const auto steps = static_cast<long>(std::llround((t_end - initial.t) / integrator.dt));
    const long cadence = std::max(1L, std::lround(sample_every / integrator.dt));

    std::vector<SwarmState> samples{initial};
    SwarmState state = initial;
    for (long s = 1; s <= steps; ++s) {
        state = step_swarm(state, kernel, controller, integrator);
        if (s % cadence == 0 || s == steps) samples.push_back(state);
    }
    return samples;
}

ContinuumController uncontrolled_continuum()
{
    return [](const ContinuumState& s) {
        return ContinuumControl{ContinuumControl::Form::velocity, GridFunction(s.density.grid()),
                                GridFunction(s.density.grid())};
    };
}

std::vector<double> control_face_flux(const GridFunction& source)
{
    const double h = source.grid().spacing();
    const double mean = integrate(source) / two_pi;
    std::vector<double> face(source.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < source.size(); ++j) {
        acc += h * (source[j] - mean);
        face[j] = -acc;
    }
    return face;
}

namespace {

// -d/dx of the local Lax-Friedrichs flux for rho V plus the control flux.
GridFunction flux_divergence(const GridFunction& rho, const GridFunction& kernel_samples,
                             const ContinuumControl& control)
{
    require_same_grid(rho, control.field, "step_continuum");
    require_same_grid(rho, control.speed_shift, "step_continuum");
    const std::size_t m = rho.size();
    const GridFunction v = circular_convolve(kernel_samples, rho);
    std::vector<double> control_flux;
    if (control.form == ContinuumControl::Form::source) {
        control_flux = control_face_flux(control.field);
    } else {
        control_flux.resize(m);
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t r = (j + 1) % m;
            control_flux[j] = 0.5 * (rho[j] * control.field[j] + rho[r] * control.field[r]);
        }
    }

    std::vector<double> face(m);  // flux through the face between j and j+1
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t r = (j + 1) % m;
        const double a = std::max(std::abs(v[j] + control.speed_shift[j]), std::abs(v[r] + control.speed_shift[r]));
        face[j] = 0.5 * (rho[j] * v[j] + rho[r] * v[r]) - 0.5 * a * (rho[r] - rho[j]) + control_flux[j];
    }
    GridFunction out(rho.grid());
    const double inv_h = 1.0 / rho.grid().spacing();
    for (std::size_t j = 0; j < m; ++j) out[j] = -(face[j] - face[(j + m - 1) % m]) * inv_h;
    return out;
}

void clip_round_off(GridFunction& rho, double t, NegativeDensity policy)
{
    for (std::size_t j = 0; j < rho.size(); ++j) {
        if (rho[j] >= 0.0) continue;
        if (rho[j] < -1e-12) {
            if (policy == NegativeDensity::allow) continue;
            throw Error(ErrorCode::non_finite, "continuum density went negative (" + std::to_string(rho[j]) +
                                                   ") at node " + std::to_string(j) + ", t = " + std::to_string(t));
        }
        rho[j] = 0.0;
    }
}

}  // namespace

double continuum_max_speed(const ContinuumState& state, const KernelSpec& kernel, const ContinuumControl& control)
{
    require_same_grid(state.density, control.speed_shift, "continuum_max_speed");
    const GridFunction v = velocity_field(kernel, state.density);
    double top = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) top = std::max(top, std::abs(v[j] + control.speed_shift[j]));
    return top;
}

double continuum_stiffness(const ContinuumState& state, const KernelSpec& kernel)
{
    return 2.0 * std::abs(1.0 - kernel.attraction_strength) * state.density.max_abs();
}

namespace {

double stable_dt(double speed, double stiffness, double spacing, double cfl)
{
    const double transport = speed > 0.0 ? cfl * spacing / speed : std::numeric_limits<double>::infinity();
    const double relaxation = stiffness > 0.0 ? cfl / stiffness : std::numeric_limits<double>::infinity();
    return std::min(transport, relaxation);
}

}  // namespace

double continuum_stable_dt(const ContinuumState& state, const KernelSpec& kernel,
                           const ContinuumController& controller, double cfl)
{
    return stable_dt(continuum_max_speed(state, kernel, controller(state)), continuum_stiffness(state, kernel),
                     state.density.grid().spacing(), cfl);
}

ContinuumState step_continuum(const ContinuumState& state, const KernelSpec& kernel,
                              const ContinuumController& controller, double dt, const ContinuumOptions& options)
{
    const double cfl = options.cfl;
    if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "continuum dt must be > 0");
    const RingGrid& grid = state.density.grid();
    const GridFunction kernel_samples = sample_kernel_on_grid(kernel, grid);

    const ContinuumControl control0 = controller(state);
    const double speed = continuum_max_speed(state, kernel, control0);
    const double limit = stable_dt(speed, continuum_stiffness(state, kernel), grid.spacing(), cfl);
    if (dt > limit * (1.0 + 1e-12))
        throw Error(ErrorCode::cfl_violation, "CFL violated: dt = " + std::to_string(dt) + " with max speed " +
                                                  std::to_string(speed) + " needs dt <= " + std::to_string(limit));

    // Shu-Osher SSP-RK3; every stage is a forward-Euler step of the same
    // conservative update, so mass is preserved stage by stage.
    const double t = state.t;
    GridFunction u1 = state.density + dt * flux_divergence(state.density, kernel_samples, control0);
    clip_round_off(u1, t, options.negative);
    const ContinuumControl c1 = controller(ContinuumState{u1, t + dt});
    GridFunction u2 = 0.75 * state.density + 0.25 * (u1 + dt * flux_divergence(u1, kernel_samples, c1));
    clip_round_off(u2, t, options.negative);
    const ContinuumControl c2 = controller(ContinuumState{u2, t + 0.5 * dt});
    GridFunction next =
        (1.0 / 3.0) * state.density + (2.0 / 3.0) * (u2 + dt * flux_divergence(u2, kernel_samples, c2));
    clip_round_off(next, t, options.negative);
    return ContinuumState{std::move(next), t + dt};
}

}  // namespace ringswarm

#include "ringswarm/experiments.hpp"

#include "ringswarm/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <thread>

namespace ringswarm {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected)
{
    throw Error(ErrorCode::invalid_argument,
                "invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " +
                    std::string(expected) + ")");
}

double parse_double(std::string_view key, std::string_view text)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) bad_value(key, text, "a finite number");
    return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text)
{
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) bad_value(key, text, "a non-negative integer");
    return v;
}

bool parse_bool(std::string_view key, std::string_view text)
{
    if (text == "true" || text == "on" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "off" || text == "0" || text == "no") return false;
    bad_value(key, text, "true or false");
}

std::string_view target_name(const TargetProgram& t)
{
    if (std::holds_alternative<MonomodalTarget>(t.variant)) return "mono";
    if (std::holds_alternative<BimodalTarget>(t.variant)) return "bimodal";
    return "track";
}

std::string_view initial_name(InitialCondition c)
{
    switch (c) {
    case InitialCondition::uniform: return "uniform";
    case InitialCondition::clumped: return "clumped";
    case InitialCondition::perturbed: return "perturbed";
    }
    return "uniform";
}

// The concentration lives in whichever target variant is active.
double& concentration_of(TargetProgram& t)
{
    return std::visit([](auto& v) -> double& { return v.concentration; }, t.variant);
}

}  // namespace

std::string_view to_string(ScenarioKind kind)
{
    switch (kind) {
    case ScenarioKind::regulate_mono: return "regulate-mono";
    case ScenarioKind::regulate_bimodal: return "regulate-bimodal";
    case ScenarioKind::track: return "track";
    case ScenarioKind::open_loop: return "open-loop";
    case ScenarioKind::continuum: return "continuum";
    }
    return "regulate-mono";
}

ScenarioKind parse_scenario(std::string_view name)
{
    for (auto k : {ScenarioKind::regulate_mono, ScenarioKind::regulate_bimodal, ScenarioKind::track,
                   ScenarioKind::open_loop, ScenarioKind::continuum})
        if (to_string(k) == name) return k;
    bad_value("scenario", name, "regulate-mono, regulate-bimodal, track, open-loop or continuum");
}

ScenarioConfig ScenarioConfig::defaults(ScenarioKind kind)
{
    ScenarioConfig c;
    c.scenario = kind;
    switch (kind) {
    case ScenarioKind::regulate_mono:
    case ScenarioKind::continuum:
        c.target.variant = MonomodalTarget{};
        break;
    case ScenarioKind::regulate_bimodal:
        c.target.variant = BimodalTarget{};
        break;
    case ScenarioKind::track:
        c.target.variant = TrackingTarget{};
        c.t_end = 4.0;
        break;
    case ScenarioKind::open_loop:
        // Uncontrolled spreading is scored against the uniform density.
        c.target.variant = MonomodalTarget{0.0, 0.0};
        c.initial = InitialCondition::clumped;
        break;
    }
    return c;
}

void ScenarioConfig::set(std::string_view key, std::string_view value)
{
    if (key == "scenario") {
        scenario = parse_scenario(value);
    } else if (key == "agents" || key == "n") {
        agents = static_cast<std::size_t>(parse_unsigned(key, value));
    } else if (key == "G" || key == "attraction_strength") {
        kernel.attraction_strength = parse_double(key, value);
    } else if (key == "L" || key == "attraction_length") {
        kernel.attraction_length = parse_double(key, value);
    } else if (key == "kp") {
        gains.kp = parse_double(key, value);
    } else if (key == "target") {
        if (value == "mono") target.variant = MonomodalTarget{};
        else if (value == "bimodal") target.variant = BimodalTarget{};
        else if (value == "track") target.variant = TrackingTarget{};
        else bad_value(key, value, "mono, bimodal or track");
    } else if (key == "k") {
        concentration_of(target) = parse_double(key, value);
    } else if (key == "mu") {
        auto* m = std::get_if<MonomodalTarget>(&target.variant);
        if (!m) throw Error(ErrorCode::invalid_argument, "mu applies only to the mono target");
        m->mean = parse_double(key, value);
    } else if (key == "mu1" || key == "mu2") {
        auto* b = std::get_if<BimodalTarget>(&target.variant);
        if (!b) throw Error(ErrorCode::invalid_argument, std::string(key) + " applies only to the bimodal target");
        (key == "mu1" ? b->mean1 : b->mean2) = parse_double(key, value);
    } else if (key == "hold_until" || key == "slew_rate") {
        auto* tr = std::get_if<TrackingTarget>(&target.variant);
        if (!tr) throw Error(ErrorCode::invalid_argument, std::string(key) + " applies only to the track target");
        (key == "hold_until" ? tr->schedule.hold_until : tr->schedule.slew_rate) = parse_double(key, value);
    } else if (key == "m" || key == "grid_nodes") {
        grid_nodes = static_cast<std::size_t>(parse_unsigned(key, value));
    } else if (key == "dt") {
        integrator.dt = parse_double(key, value);
    } else if (key == "scheme") {
        if (value == "rk4") integrator.scheme = Scheme::rk4;
        else if (value == "euler") integrator.scheme = Scheme::explicit_euler;
        else bad_value(key, value, "rk4 or euler");
    } else if (key == "refresh") {
        if (value == "per-step") integrator.refresh = InputRefresh::per_step;
        else if (value == "per-stage") integrator.refresh = InputRefresh::per_stage;
        else bad_value(key, value, "per-step or per-stage");
    } else if (key == "t_end") {
        t_end = parse_double(key, value);
    } else if (key == "bandwidth") {
        bandwidth = parse_double(key, value);
    } else if (key == "bandwidth_rule") {
        if (value == "fixed") bandwidth_rule = BandwidthRule::fixed;
        else if (value == "silverman") bandwidth_rule = BandwidthRule::silverman;
        else bad_value(key, value, "fixed or silverman");
    } else if (key == "noise_power_dbw") {
        if (value == "none" || value.empty()) noise_power_dbw.reset();
        else noise_power_dbw = parse_double(key, value);
    } else if (key == "seed") {
        seed = parse_unsigned(key, value);
    } else if (key == "initial") {
        if (value == "uniform") initial = InitialCondition::uniform;
        else if (value == "clumped") initial = InitialCondition::clumped;
        else if (value == "perturbed") initial = InitialCondition::perturbed;
        else bad_value(key, value, "uniform, clumped or perturbed");
    } else if (key == "clump_center") {
        clump_center = parse_double(key, value);
    } else if (key == "clump_width") {
        clump_width = parse_double(key, value);
    } else if (key == "perturbation") {
        perturbation = parse_double(key, value);
    } else if (key == "feedforward") {
        feedforward = parse_bool(key, value);
    } else if (key == "integration_constant") {
        if (value == "zero") integration_constant = IntegrationConstant::zero;
        else if (value == "boundary") integration_constant = IntegrationConstant::boundary_value;
        else bad_value(key, value, "zero or boundary");
    } else if (key == "observation") {
        if (value == "smoothed") observation = Observation::smoothed;
        else if (value == "direct") observation = Observation::direct;
        else bad_value(key, value, "smoothed or direct");
    } else if (key == "cfl") {
        cfl = parse_double(key, value);
    } else if (key == "stiffness_limit") {
        stiffness_limit = parse_double(key, value);
    } else if (key == "sample_every") {
        sample_every = parse_double(key, value);
    } else if (key == "snapshot_every") {
        snapshot_every = parse_double(key, value);
    } else {
        throw Error(ErrorCode::invalid_argument, "unknown config key '" + std::string(key) + "'");
    }
}

std::string ScenarioConfig::to_json() const
{
    ordered_json j;
    j["scenario"] = to_string(scenario);
    j["agents"] = agents;
    j["G"] = kernel.attraction_strength;
    j["L"] = kernel.attraction_length;
    j["kp"] = gains.kp;
    j["target"] = target_name(target);
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            j["k"] = v.concentration;
            if constexpr (std::is_same_v<T, MonomodalTarget>) {
                j["mu"] = v.mean;
            } else if constexpr (std::is_same_v<T, BimodalTarget>) {
                j["mu1"] = v.mean1;
                j["mu2"] = v.mean2;
            } else {
                j["hold_until"] = v.schedule.hold_until;
                j["slew_rate"] = v.schedule.slew_rate;
            }
        },
        target.variant);
    j["m"] = grid_nodes;
    j["dt"] = integrator.dt;
    j["scheme"] = integrator.scheme == Scheme::rk4 ? "rk4" : "euler";
    j["refresh"] = integrator.refresh == InputRefresh::per_step ? "per-step" : "per-stage";
    j["t_end"] = t_end;
    j["bandwidth"] = bandwidth;
    j["bandwidth_rule"] = bandwidth_rule == BandwidthRule::fixed ? "fixed" : "silverman";
    j["noise_power_dbw"] = noise_power_dbw ? ordered_json(*noise_power_dbw) : ordered_json(nullptr);
    j["seed"] = seed;
    j["initial"] = initial_name(initial);
    j["clump_center"] = clump_center;
    j["clump_width"] = clump_width;
    j["perturbation"] = perturbation;
    j["feedforward"] = feedforward;
    j["integration_constant"] = integration_constant == IntegrationConstant::zero ? "zero" : "boundary";
    j["observation"] = observation == Observation::smoothed ? "smoothed" : "direct";
    j["cfl"] = cfl;
    j["stiffness_limit"] = stiffness_limit;
    j["sample_every"] = sample_every;
    j["snapshot_every"] = snapshot_every;
    return j.dump(2);
}

void ScenarioConfig::merge_json(std::string_view text)
{
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw Error(ErrorCode::invalid_argument, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "config JSON must be an object");

    auto as_text = [](const ordered_json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_null()) return "none";
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        if (v.is_number_float()) return format_double(v.get<double>());
        throw Error(ErrorCode::invalid_argument, "config values must be scalars");
    };
    // The target type resets its parameters, so it goes before everything else.
    if (j.contains("target")) set("target", as_text(j["target"]));
    for (const auto& [key, value] : j.items())
        if (key != "target") set(key, as_text(value));
}

void ScenarioConfig::validate() const
{
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::invalid_argument, std::string(what) + " must be positive");
    };
    if (agents == 0) throw Error(ErrorCode::invalid_argument, "agents must be at least 1");
    kernel.validate();
    gains.validate();
    target.validate();
    RingGrid{grid_nodes};
    integrator.validate();
    positive(t_end, "t_end");
    estimator().validate();
    positive(clump_width, "clump_width");
    if (!(perturbation >= 0.0 && perturbation < 1.0))
        throw Error(ErrorCode::invalid_argument, "perturbation must lie in [0, 1)");
    positive(cfl, "cfl");
    positive(stiffness_limit, "stiffness_limit");
    if (noise_power_dbw && !std::isfinite(noise_std_dev(*noise_power_dbw)))
        throw Error(ErrorCode::invalid_argument, "noise power " + format_double(*noise_power_dbw) + " dBW is out of range");
    positive(sample_every, "sample_every");
    positive(snapshot_every, "snapshot_every");
}

double ScenarioConfig::effective_bandwidth() const
{
    if (bandwidth_rule == BandwidthRule::fixed) return bandwidth;
    return bandwidth *
           std::pow(static_cast<double>(agents) / static_cast<double>(reference_agents), -0.2);
}

double noise_std_dev(double power_dbw) { return std::sqrt(std::pow(10.0, power_dbw / 10.0)); }

std::string format_double(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

namespace {

// Agents placed at the (i + 1/2) / N quantiles of a grid density.
std::vector<double> quantile_positions(const GridFunction& density, std::size_t n)
{
    const GridFunction cdf = cumulative_integral(density);
    const double total = integrate(density);
    const RingGrid& grid = density.grid();
    const std::size_t m = grid.size();
    std::vector<double> out(n);
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double level = (static_cast<double>(i) + 0.5) / static_cast<double>(n) * total;
        while (j + 1 < m && cdf[j + 1] < level) ++j;
        const double lo = cdf[j];
        const double hi = j + 1 < m ? cdf[j + 1] : total;
        const double frac = hi > lo ? (level - lo) / (hi - lo) : 0.0;
        out[i] = wrap_angle(grid.node(j) + frac * grid.spacing());
    }
    return out;
}

GridFunction initial_density(const ScenarioConfig& c, const RingGrid& grid, double mass)
{
    switch (c.initial) {
    case InitialCondition::uniform:
        return GridFunction::sample(grid, [&](double) { return mass / two_pi; });
    case InitialCondition::clumped: {
        // Indicator of the arc, smoothed by the KDE bump so the field is
        // resolvable on the grid.
        GridFunction arc = GridFunction::sample(
            grid, [&](double x) { return std::abs(wrap_distance(x, c.clump_center)) <= 0.5 * c.clump_width ? 1.0 : 0.0; });
        if (integrate(arc) == 0.0) arc[grid.nearest_node(c.clump_center)] = 1.0;
        GridFunction out = smooth_density(arc, c.effective_bandwidth());
        out *= mass / integrate(out);
        return out;
    }
    case InitialCondition::perturbed: {
        GridFunction out = target_at(c.target, 0.0, grid).density;
        for (std::size_t j = 0; j < grid.size(); ++j) out[j] *= 1.0 + c.perturbation * std::sin(grid.node(j));
        return out;
    }
    }
    throw Error(ErrorCode::invalid_argument, "unknown initial condition");
}

std::vector<double> initial_positions(const ScenarioConfig& c, const TargetProgram& program)
{
    switch (c.initial) {
    case InitialCondition::uniform:
        return lattice_positions(c.agents);
    case InitialCondition::clumped:
        return clumped_positions(c.agents, c.clump_center, c.clump_width);
    case InitialCondition::perturbed: {
        ScenarioConfig fine = c;
        fine.target = program;
        return quantile_positions(initial_density(fine, RingGrid(4096), program.mass), c.agents);
    }
    }
    throw Error(ErrorCode::invalid_argument, "unknown initial condition");
}

// Zero-mean Gaussian noise on q, redrawn once per control update.
class NoiseSource {
public:
    NoiseSource(const ScenarioConfig& c, std::size_t m)
        : rng_(c.seed), sigma_(c.noise_power_dbw ? noise_std_dev(*c.noise_power_dbw) : 0.0), values_(m, 0.0)
    {
    }

    void redraw()
    {
        if (sigma_ == 0.0) return;
        std::normal_distribution<double> normal(0.0, sigma_);
        double mean = 0.0;
        for (double& v : values_) {
            v = normal(rng_);
            mean += v;
        }
        // The integral of q stays zero so the control never creates or
        // destroys agents.
        mean /= static_cast<double>(values_.size());
        for (double& v : values_) v -= mean;
    }

    void add_to(GridFunction& q) const
    {
        if (sigma_ == 0.0) return;
        for (std::size_t j = 0; j < values_.size(); ++j) q[j] += values_[j];
    }

private:
    std::mt19937_64 rng_;
    double sigma_;
    std::vector<double> values_;
};

struct Cadence {
    long metrics;
    long snapshots;

    Cadence(const ScenarioConfig& c, double dt)
        : metrics(std::max(1L, std::lround(c.sample_every / dt))),
          snapshots(std::max(1L, std::lround(c.snapshot_every / dt)))
    {
    }
};

void push_snapshot(RunRecord& r, double t, const GridFunction& rho, const GridFunction& rho_d)
{
    for (std::size_t j = 0; j < rho.size(); ++j) r.density.push_back({t, rho.grid().node(j), rho[j], rho_d[j]});
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Feedback law shared by both scales: q from the observed density, plus
// feed-forward and noise, turned into the velocity field U.
struct FeedbackLaw {
    const ScenarioConfig& config;
    const NoiseSource& noise;

    GridFunction q(const GridFunction& observed, const TargetSample& target, GridFunction* desired_velocity) const
    {
        ControlFields f = compute_q(observed, target.density, config.kernel, config.gains);
        if (config.feedforward) f.q += reference_feedforward(target.density, target.rate, f.desired_velocity);
        noise.add_to(f.q);
        if (desired_velocity) *desired_velocity = std::move(f.desired_velocity);
        return std::move(f.q);
    }

    GridFunction velocity(const GridFunction& observed, const GridFunction& q) const
    {
        return compute_U(observed, q, config.integration_constant, FloorPolicy::clamp);
    }
};

RunRecord run_agents(const ScenarioConfig& c)
{
    RunRecord r{c, {}, {}, {}, std::nullopt, std::nullopt, 0};
    TargetProgram program = c.target;
    program.mass = static_cast<double>(c.agents);
    const DensityEstimatorSpec kde = c.estimator();
    const RingGrid& grid = kde.grid;
    const bool closed_loop = c.scenario != ScenarioKind::open_loop;

    NoiseSource noise(c, grid.size());
    const FeedbackLaw law{c, noise};

    struct Observed {
        GridFunction rho;
        GridFunction rho_d;
        GridFunction u;
    };
    std::optional<Observed> captured;
    bool capture = false;

    const SwarmController controller = [&](const SwarmState& s) -> InputSampler {
        GridFunction rho = estimate_density(s.positions, kde);
        TargetSample target = target_at(program, s.t, grid);
        GridFunction u(grid);
        if (closed_loop) u = law.velocity(rho, law.q(rho, target, nullptr));
        if (capture) {
            captured = Observed{std::move(rho), std::move(target.density), u};
            capture = false;
        }
        return [u = std::move(u)](std::span<const double> x, std::span<double> out) { sample_agent_inputs(u, x, out); };
    };

    const double dt = c.integrator.dt;
    const long steps = std::max(1L, std::lround(c.t_end / dt));
    const Cadence cadence(c, dt);
    SwarmState state{initial_positions(c, program), 0.0};
    std::vector<double> inputs(c.agents);

    auto record = [&](long s, const InputSampler& sampler) {
        const Observed& o = *captured;
        if (s % cadence.metrics == 0 || s == steps) {
            sampler(state.positions, inputs);
            r.metrics.push_back(
                {state.t, kl_divergence(o.rho, o.rho_d), l2_error_norm(o.rho_d - o.rho), max_abs(inputs)});
            for (std::size_t i = 0; i < c.agents; ++i) r.agents.push_back({state.t, i, state.positions[i], inputs[i]});
        }
        if (s % cadence.snapshots == 0 || s == steps) push_snapshot(r, state.t, o.rho, o.rho_d);
    };

    for (long s = 0; s <= steps; ++s) {
        noise.redraw();
        capture = true;
        const InputSampler sampler = controller(state);
        if (s % cadence.metrics == 0 || s % cadence.snapshots == 0 || s == steps) record(s, sampler);
        if (s == steps) {
            r.final_density = captured->rho;
            break;
        }
        // Where the kernel jumps, the drift gradient equals the local density,
        // so dense swarms are stiff; split the step until dt * max rho stays
        // under the limit.
        const double peak = std::max(captured->rho.max_abs(), captured->rho_d.max_abs());
        const long parts = std::max(1L, static_cast<long>(std::ceil(dt * peak / c.stiffness_limit)));
        IntegratorSpec sub = c.integrator;
        sub.dt = dt / static_cast<double>(parts);
        const double t0 = state.t;
        for (long k = 0; k < parts; ++k) {
            if (k == 0) {
                // Reuse this evaluation for the first stage.
                const SwarmController first = [&, used = false](const SwarmState& st) mutable -> InputSampler {
                    if (!used) {
                        used = true;
                        return sampler;
                    }
                    return controller(st);
                };
                state = step_swarm(state, c.kernel, first, sub);
            } else {
                noise.redraw();
                state = step_swarm(state, c.kernel, controller, sub);
            }
            state.t = t0 + static_cast<double>(k + 1) * sub.dt;
            ++r.steps;
        }
        // Keep the clock on the exact step lattice.
        state.t = static_cast<double>(s + 1) * dt;
    }
    return r;
}

RunRecord run_continuum(const ScenarioConfig& c)
{
    RunRecord r{c, {}, {}, {}, std::nullopt, std::nullopt, 0};
    TargetProgram program = c.target;
    program.mass = static_cast<double>(c.agents);
    const RingGrid grid(c.grid_nodes);
    const bool smoothed = c.observation == Observation::smoothed;

    NoiseSource noise(c, grid.size());
    const FeedbackLaw law{c, noise};

    auto observe = [&](const GridFunction& rho) { return smoothed ? smooth_density(rho, c.effective_bandwidth()) : rho; };

    const ContinuumController controller = [&](const ContinuumState& s) -> ContinuumControl {
        const GridFunction observed = observe(s.density);
        const TargetSample target = target_at(program, s.t, grid);
        GridFunction vd(grid);
        GridFunction q = law.q(observed, target, &vd);
        if (smoothed) {
            GridFunction u = law.velocity(observed, q);
            return {ContinuumControl::Form::velocity, u, u};
        }
        return {ContinuumControl::Form::source, std::move(q), -1.0 * vd};
    };
    const ContinuumOptions options{c.cfl, smoothed ? NegativeDensity::reject : NegativeDensity::allow};

    ContinuumState state{initial_density(c, grid, program.mass), 0.0};
    double lowest = std::numeric_limits<double>::infinity();
    auto track_min = [&] {
        for (double v : state.density.values()) lowest = std::min(lowest, v);
    };
    track_min();

    const long samples = std::max(1L, std::lround(c.t_end / c.sample_every));
    const long snapshot_stride = std::max(1L, std::lround(c.snapshot_every / c.sample_every));
    noise.redraw();
    for (long k = 0; k <= samples; ++k) {
        const GridFunction observed = observe(state.density);
        const TargetSample target = target_at(program, state.t, grid);
        const GridFunction u = law.velocity(observed, law.q(observed, target, nullptr));
        r.metrics.push_back({state.t, kl_divergence(observed, target.density),
                             l2_error_norm(target.density - observed), u.max_abs()});
        if (k % snapshot_stride == 0 || k == samples) push_snapshot(r, state.t, observed, target.density);
        if (k == samples) {
            r.final_density = observed;
            break;
        }

        const double t_next = std::min(c.t_end, static_cast<double>(k + 1) * c.sample_every);
        while (state.t < t_next) {
            noise.redraw();
            const double stable = continuum_stable_dt(state, c.kernel, controller, c.cfl);
            double dt = std::min(c.integrator.dt, stable);
            // Land exactly on the sample time instead of leaving a sliver.
            if (state.t + dt >= t_next - 1e-12 * t_next) dt = t_next - state.t;
            state = step_continuum(state, c.kernel, controller, dt, options);
            if (std::abs(state.t - t_next) <= 1e-12 * t_next) state.t = t_next;
            track_min();
            ++r.steps;
        }
    }
    r.min_density = lowest;
    return r;
}

}  // namespace

double RunRecord::final_kl() const
{
    if (metrics.empty()) throw Error(ErrorCode::invalid_argument, "run has no samples");
    return metrics.back().d_kl;
}

std::string RunRecord::metadata_json() const
{
    ordered_json j;
    j["version"] = version_string;
    j["config"] = ordered_json::parse(config.to_json());
    const bool continuum = config.scenario == ScenarioKind::continuum;
    j["model"] = continuum ? (config.observation == Observation::smoothed ? "continuum, smoothed observation"
                                                                         : "continuum, direct observation")
                           : "agents, kde observation";
    j["noise_model"] = "zero-mean Gaussian added to q at every grid node, redrawn each control update, variance "
                       "10^(P/10), mean removed";
    ordered_json stability;
    if (continuum) {
        stability["scheme"] = "local Lax-Friedrichs flux, SSP-RK3";
        stability["cfl"] = config.cfl;
        stability["dt_cap"] = config.integrator.dt;
    } else {
        stability["scheme"] = config.integrator.scheme == Scheme::rk4 ? "rk4" : "euler";
        stability["dt"] = config.integrator.dt;
        stability["stiffness_limit"] = config.stiffness_limit;
        stability["mean_substeps"] = static_cast<double>(steps) * config.integrator.dt / config.t_end;
    }
    j["stability"] = stability;
    j["steps"] = steps;
    if (min_density) j["min_density"] = *min_density;
    if (!metrics.empty()) j["final_d_kl"] = metrics.back().d_kl;
    return j.dump(2) + "\n";
}

RunRecord run_scenario(const ScenarioConfig& config)
{
    config.validate();
    return config.scenario == ScenarioKind::continuum ? run_continuum(config) : run_agents(config);
}

std::vector<SwarmSize> parse_swarm_sizes(std::string_view list)
{
    std::vector<SwarmSize> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = std::min(list.find(',', start), list.size());
        std::string_view item = list.substr(start, comma - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (item == "inf") {
            out.emplace_back(std::nullopt);
        } else {
            const auto n = parse_unsigned("n-list", item);
            if (n == 0) bad_value("n-list", item, "a positive agent count or inf");
            out.emplace_back(static_cast<std::size_t>(n));
        }
        start = comma + 1;
    }
    return out;
}

namespace {

// Runs jobs on up to hardware_concurrency threads; results keep job order.
template <class Job>
std::vector<SweepRow> fan_out(std::size_t count, const Job& job)
{
    std::vector<SweepRow> rows(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) rows[i] = job(i);
    };
    const std::size_t threads = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, count == 0 ? 1 : count);
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    return rows;
}

SweepRow scored(std::string param, const std::function<double()>& run)
{
    try {
        return {std::move(param), run(), "ok"};
    } catch (const std::exception& e) {
        return {std::move(param), std::numeric_limits<double>::quiet_NaN(), std::string("error: ") + e.what()};
    }
}

}  // namespace

SweepTable run_scalability_sweep(const ScenarioConfig& base, const std::vector<SwarmSize>& sizes)
{
    if (base.scenario == ScenarioKind::continuum || base.scenario == ScenarioKind::open_loop)
        throw Error(ErrorCode::invalid_argument, "the agent sweep needs a closed-loop agent scenario as its base");
    base.validate();
    SweepTable table{"agents", base, {}, 1};
    table.rows = fan_out(sizes.size(), [&](std::size_t i) {
        ScenarioConfig c = base;
        if (!sizes[i]) {
            c.scenario = ScenarioKind::continuum;
            c.initial = InitialCondition::uniform;
            return scored("inf", [c] { return run_scenario(c).final_kl(); });
        }
        c.agents = *sizes[i];
        return scored(std::to_string(*sizes[i]), [c] { return run_scenario(c).final_kl(); });
    });
    return table;
}

SweepTable run_noise_sweep(const ScenarioConfig& base, const std::vector<double>& powers_dbw, std::size_t seeds)
{
    if (seeds == 0) throw Error(ErrorCode::invalid_argument, "noise sweep needs at least one seed");
    base.validate();
    SweepTable table{"noise_power_dbw", base, {}, seeds};
    // One job per (power, seed) pair, averaged afterwards.
    const std::vector<SweepRow> runs = fan_out(powers_dbw.size() * seeds, [&](std::size_t i) {
        ScenarioConfig c = base;
        c.noise_power_dbw = powers_dbw[i / seeds];
        c.seed = base.seed + i % seeds;
        return scored("", [c] { return run_scenario(c).final_kl(); });
    });
    for (std::size_t p = 0; p < powers_dbw.size(); ++p) {
        SweepRow row{format_double(powers_dbw[p]), 0.0, "ok"};
        for (std::size_t s = 0; s < seeds; ++s) {
            const SweepRow& run = runs[p * seeds + s];
            if (run.status != "ok" && row.status == "ok") row.status = run.status;
            row.d_kl_final += run.d_kl_final / static_cast<double>(seeds);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string SweepTable::metadata_json() const
{
    ordered_json j;
    j["version"] = version_string;
    j["sweep"] = name;
    j["seeds_per_row"] = seeds_per_row;
    j["base_config"] = ordered_json::parse(base.to_json());
    return j.dump(2) + "\n";
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& dir)
{
    if (dir.is_absolute()) return dir;
    if (const char* root = std::getenv("RINGSWARM_OUT_ROOT"); root && *root) return std::filesystem::path(root) / dir;
    return dir;
}

namespace {

std::ofstream open_output(const std::filesystem::path& dir, const char* name)
{
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write " + (dir / name).string());
    return out;
}

void make_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace

void write_run(const RunRecord& record, const std::filesystem::path& dir)
{
    make_dir(dir);
    {
        auto out = open_output(dir, "metrics.csv");
        out << "t,d_kl,e_l2,u_max\n";
        for (const auto& m : record.metrics)
            out << format_double(m.t) << ',' << format_double(m.d_kl) << ',' << format_double(m.e_l2) << ','
                << format_double(m.u_max) << '\n';
        finish(out, dir / "metrics.csv");
    }
    {
        auto out = open_output(dir, "agents.csv");
        out << "t,id,x,u\n";
        for (const auto& a : record.agents)
            out << format_double(a.t) << ',' << a.id << ',' << format_double(a.x) << ',' << format_double(a.u) << '\n';
        finish(out, dir / "agents.csv");
    }
    {
        auto out = open_output(dir, "density.csv");
        out << "t,node_angle,rho,rho_d\n";
        for (const auto& d : record.density)
            out << format_double(d.t) << ',' << format_double(d.node_angle) << ',' << format_double(d.rho) << ','
                << format_double(d.rho_d) << '\n';
        finish(out, dir / "density.csv");
    }
    auto meta = open_output(dir, "metadata.json");
    meta << record.metadata_json();
    finish(meta, dir / "metadata.json");
}

void write_sweep(const SweepTable& table, const std::filesystem::path& dir)
{
    make_dir(dir);
    auto out = open_output(dir, "sweep.csv");
    out << "param,d_kl_final,status\n";
    for (const auto& row : table.rows) {
        // Error messages may contain commas; quote the status column.
        std::string status = row.status;
        for (std::size_t p = 0; (p = status.find('"', p)) != std::string::npos; p += 2) status.insert(p, "\"");
        out << row.param << ',' << format_double(row.d_kl_final) << ",\"" << status << "\"\n";
    }
    finish(out, dir / "sweep.csv");
    auto meta = open_output(dir, "metadata.json");
    meta << table.metadata_json();
    finish(meta, dir / "metadata.json");
}

}  // namespace ringswarm

#pragma once

#include "ringswarm/controller.hpp"
#include "ringswarm/density.hpp"
#include "ringswarm/interaction.hpp"
#include "ringswarm/simulation.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ringswarm {

enum class ScenarioKind { regulate_mono, regulate_bimodal, track, open_loop, continuum };

std::string_view to_string(ScenarioKind kind);
/// Accepts the CLI spellings: regulate-mono, regulate-bimodal, track,
/// open-loop, continuum.
ScenarioKind parse_scenario(std::string_view name);

/// Starting distribution of agents (or of the continuum density).
enum class InitialCondition {
    uniform,    // lattice for agents, N / 2 pi for the continuum
    clumped,    // an arc of width clump_width around clump_center
    perturbed   // rho_d(0) (1 + perturbation sin x); agents placed by quantiles
};

/// How the N = infinity controller sees the density. smoothed applies the
/// KDE bandwidth to the continuum field, which is what the agent estimate
/// converges to as N grows; direct feeds the raw field to the law.
enum class Observation { smoothed, direct };

/// How the KDE bandwidth follows the swarm size. silverman scales it as
/// N^(-1/5) (the classical rule of thumb) so the estimate stays consistent
/// as N grows; `bandwidth` is then the value at reference_agents.
enum class BandwidthRule { fixed, silverman };

inline constexpr std::size_t reference_agents = 50;

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::regulate_mono;
    std::size_t agents = 50;
    KernelSpec kernel;
    ControllerGains gains;
    TargetProgram target;
    std::size_t grid_nodes = 256;
    IntegratorSpec integrator;
    double t_end = 3.0;
    double bandwidth = 0.2;
    BandwidthRule bandwidth_rule = BandwidthRule::silverman;
    std::optional<double> noise_power_dbw;
    std::uint64_t seed = 0;

    InitialCondition initial = InitialCondition::uniform;
    double clump_center = 0.0;
    double clump_width = 1.0;
    double perturbation = 0.05;

    /// Adds rho_d_t + [rho_d Vd]_x to q; off reproduces the bare feedback law.
    bool feedforward = true;
    IntegrationConstant integration_constant = IntegrationConstant::zero;
    Observation observation = Observation::smoothed;
    double cfl = 0.5;
    /// Agent steps are subdivided so that dt * max rho stays below this.
    double stiffness_limit = 0.5;

    double sample_every = 0.05;
    double snapshot_every = 0.5;

    /// Defaults for a scenario; the target program and initial condition
    /// depend on it.
    static ScenarioConfig defaults(ScenarioKind kind);

    /// Sets one field from its textual form, e.g. set("kp", "12").
    /// Throws ErrorCode::invalid_argument on unknown keys or bad values.
    void set(std::string_view key, std::string_view value);

    /// Flat JSON object with every key accepted by set().
    std::string to_json() const;
    /// Applies the keys of a JSON object on top of this config.
    void merge_json(std::string_view json);

    void validate() const;

    /// Bandwidth actually used for `agents` agents.
    double effective_bandwidth() const;
    DensityEstimatorSpec estimator() const { return {effective_bandwidth(), RingGrid(grid_nodes)}; }
};

struct MetricRow {
    double t;
    double d_kl;
    double e_l2;
    double u_max;
};

struct AgentRow {
    double t;
    std::size_t id;
    double x;
    double u;
};

struct DensityRow {
    double t;
    double node_angle;
    double rho;
    double rho_d;
};

/// Time series of one run. For agents, rho is the KDE of the swarm; for the
/// continuum it is the field the controller observes.
struct RunRecord {
    ScenarioConfig config;
    std::vector<MetricRow> metrics;
    std::vector<AgentRow> agents;
    std::vector<DensityRow> density;
    /// Observed density at t_end.
    std::optional<GridFunction> final_density;
    /// Lowest raw continuum density seen (continuum runs only).
    std::optional<double> min_density;
    std::size_t steps = 0;

    double final_kl() const;
    /// Full metadata document (config echo, version, stability notes).
    std::string metadata_json() const;
};

RunRecord run_scenario(const ScenarioConfig& config);

struct SweepRow {
    std::string param;
    double d_kl_final;
    std::string status;  // "ok" or "error: <message>"
};

struct SweepTable {
    std::string name;  // "agents" or "noise_power_dbw"
    ScenarioConfig base;
    std::vector<SweepRow> rows;
    std::size_t seeds_per_row = 1;

    std::string metadata_json() const;
};

/// One entry of an agent-count sweep; nullopt selects the continuum model.
using SwarmSize = std::optional<std::size_t>;

/// Parses "1,5,50,inf".
std::vector<SwarmSize> parse_swarm_sizes(std::string_view list);

/// Final D_KL per swarm size. Rows keep the request order; a failed run is
/// recorded with an error status and NaN score.
SweepTable run_scalability_sweep(const ScenarioConfig& base, const std::vector<SwarmSize>& sizes);

/// Mean final D_KL per noise power over `seeds` consecutive seeds starting
/// at base.seed.
SweepTable run_noise_sweep(const ScenarioConfig& base, const std::vector<double>& powers_dbw, std::size_t seeds = 5);

/// Standard deviation of the Gaussian noise added to each node of q for a
/// power in dBW: the variance is 10^(P / 10).
double noise_std_dev(double power_dbw);

/// Prefixes relative paths with $RINGSWARM_OUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::filesystem::path& dir);

/// Writes metrics.csv, agents.csv, density.csv and metadata.json, creating
/// the directory if needed.
void write_run(const RunRecord& record, const std::filesystem::path& dir);

/// Writes sweep.csv and metadata.json.
void write_sweep(const SweepTable& table, const std::filesystem::path& dir);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

inline constexpr std::string_view version_string = "0.1.0";

}  // namespace ringswarm

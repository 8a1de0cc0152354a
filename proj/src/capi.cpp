#include "ringswarm/ringswarm.h"

#include "ringswarm/error.hpp"
#include "ringswarm/experiments.hpp"

#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

struct rs_config {
    ringswarm::ScenarioConfig value;
};

struct rs_run {
    ringswarm::RunRecord value;
};

struct rs_sweep {
    ringswarm::SweepTable value;
};

namespace {

thread_local std::string last_error;

rs_status fail(rs_status status, const std::string& message)
{
    last_error = message;
    return status;
}

rs_status to_status(ringswarm::ErrorCode code)
{
    using ringswarm::ErrorCode;
    switch (code) {
    case ErrorCode::invalid_argument: return RS_INVALID_ARGUMENT;
    case ErrorCode::grid_mismatch: return RS_GRID_MISMATCH;
    case ErrorCode::density_floor: return RS_DENSITY_FLOOR;
    case ErrorCode::cfl_violation: return RS_CFL_VIOLATION;
    case ErrorCode::non_finite: return RS_NON_FINITE;
    case ErrorCode::io: return RS_IO;
    }
    return RS_INTERNAL;
}

/// Runs fn, translating exceptions into status codes at the C boundary.
template <class Fn>
rs_status guarded(Fn&& fn)
{
    try {
        fn();
        last_error.clear();
        return RS_OK;
    } catch (const ringswarm::Error& e) {
        return fail(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(RS_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(RS_INTERNAL, e.what());
    }
}

rs_status null_argument(const char* name) { return fail(RS_INVALID_ARGUMENT, std::string(name) + " is NULL"); }

}  // namespace

extern "C" {

const char* rs_version(void) { return ringswarm::version_string.data(); }

const char* rs_last_error(void) { return last_error.c_str(); }

rs_status rs_config_create(const char* scenario, rs_config** out)
{
    if (!scenario) return null_argument("scenario");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new rs_config{ringswarm::ScenarioConfig::defaults(ringswarm::parse_scenario(scenario))}; });
}

void rs_config_destroy(rs_config* config) { delete config; }

rs_status rs_config_set(rs_config* config, const char* key, const char* value)
{
    if (!config) return null_argument("config");
    if (!key) return null_argument("key");
    if (!value) return null_argument("value");
    return guarded([&] { config->value.set(key, value); });
}

rs_status rs_config_load_json(rs_config* config, const char* path)
{
    if (!config) return null_argument("config");
    if (!path) return null_argument("path");
    return guarded([&] {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ringswarm::Error(ringswarm::ErrorCode::io, std::string("cannot read ") + path);
        std::ostringstream text;
        text << in.rdbuf();
        // Merge into a copy so a bad file leaves the config untouched.
        ringswarm::ScenarioConfig merged = config->value;
        merged.merge_json(text.str());
        config->value = std::move(merged);
    });
}

rs_status rs_config_to_json(const rs_config* config, char* buf, size_t capacity, size_t* needed)
{
    if (!config) return null_argument("config");
    return guarded([&] {
        const std::string json = config->value.to_json();
        if (needed) *needed = json.size() + 1;
        if (!buf) return;
        if (capacity < json.size() + 1)
            throw ringswarm::Error(ringswarm::ErrorCode::invalid_argument, "buffer too small for config JSON");
        std::memcpy(buf, json.c_str(), json.size() + 1);
    });
}

rs_status rs_run_scenario(const rs_config* config, rs_run** out)
{
    if (!config) return null_argument("config");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] { *out = new rs_run{ringswarm::run_scenario(config->value)}; });
}

void rs_run_destroy(rs_run* run) { delete run; }

size_t rs_run_sample_count(const rs_run* run) { return run ? run->value.metrics.size() : 0; }

rs_status rs_run_sample(const rs_run* run, size_t index, double* t, double* d_kl, double* e_l2, double* u_max)
{
    if (!run) return null_argument("run");
    if (index >= run->value.metrics.size()) return fail(RS_INVALID_ARGUMENT, "sample index out of range");
    const auto& m = run->value.metrics[index];
    if (t) *t = m.t;
    if (d_kl) *d_kl = m.d_kl;
    if (e_l2) *e_l2 = m.e_l2;
    if (u_max) *u_max = m.u_max;
    last_error.clear();
    return RS_OK;
}

rs_status rs_run_final_kl(const rs_run* run, double* out)
{
    if (!run) return null_argument("run");
    if (!out) return null_argument("out");
    return guarded([&] { *out = run->value.final_kl(); });
}

rs_status rs_run_write(const rs_run* run, const char* dir)
{
    if (!run) return null_argument("run");
    if (!dir) return null_argument("dir");
    return guarded([&] { ringswarm::write_run(run->value, ringswarm::resolve_output_dir(dir)); });
}

rs_status rs_sweep_agents(const rs_config* base, const char* n_list, rs_sweep** out)
{
    if (!base) return null_argument("base");
    if (!n_list) return null_argument("n_list");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        *out = new rs_sweep{ringswarm::run_scalability_sweep(base->value, ringswarm::parse_swarm_sizes(n_list))};
    });
}

rs_status rs_sweep_noise(const rs_config* base, const double* powers_dbw, size_t count, size_t seeds, rs_sweep** out)
{
    if (!base) return null_argument("base");
    if (!powers_dbw && count > 0) return null_argument("powers_dbw");
    if (!out) return null_argument("out");
    *out = nullptr;
    return guarded([&] {
        const std::vector<double> powers(powers_dbw, powers_dbw + count);
        *out = new rs_sweep{ringswarm::run_noise_sweep(base->value, powers, seeds)};
    });
}

void rs_sweep_destroy(rs_sweep* sweep) { delete sweep; }

size_t rs_sweep_size(const rs_sweep* sweep) { return sweep ? sweep->value.rows.size() : 0; }

rs_status rs_sweep_row(const rs_sweep* sweep, size_t index, const char** param, double* d_kl_final,
                       const char** status)
{
    if (!sweep) return null_argument("sweep");
    if (index >= sweep->value.rows.size()) return fail(RS_INVALID_ARGUMENT, "sweep row index out of range");
    const auto& row = sweep->value.rows[index];
    if (param) *param = row.param.c_str();
    if (d_kl_final) *d_kl_final = row.d_kl_final;
    if (status) *status = row.status.c_str();
    last_error.clear();
    return RS_OK;
}

rs_status rs_sweep_write(const rs_sweep* sweep, const char* dir)
{
    if (!sweep) return null_argument("sweep");
    if (!dir) return null_argument("dir");
    return guarded([&] { ringswarm::write_sweep(sweep->value, ringswarm::resolve_output_dir(dir)); });
}

double rs_wrap_distance(double a, double b) { return ringswarm::wrap_distance(a, b); }

rs_status rs_kernel_eval(double g, double l, double z, double* out)
{
    if (!out) return null_argument("out");
    return guarded([&] {
        const ringswarm::KernelSpec spec{g, l};
        spec.validate();
        *out = ringswarm::kernel_eval(spec, z);
    });
}

rs_status rs_kl_divergence(const double* rho, const double* rho_desired, size_t m, double* out)
{
    if (!rho || !rho_desired) return null_argument("field");
    if (!out) return null_argument("out");
    return guarded([&] {
        const ringswarm::RingGrid grid(m);
        *out = ringswarm::kl_divergence(ringswarm::GridFunction(grid, std::vector<double>(rho, rho + m)),
                                        ringswarm::GridFunction(grid, std::vector<double>(rho_desired, rho_desired + m)));
    });
}

}  // extern "C"

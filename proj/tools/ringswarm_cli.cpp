#include "ringswarm/ringswarm.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

/// Failure carrying the exit code the process should end with.
struct CliFailure {
    int code;
    std::string message;
};

/// Invalid configuration is a usage error wherever it is detected.
void check(rs_status status, int exit_code)
{
    if (status == RS_OK) return;
    throw CliFailure{status == RS_INVALID_ARGUMENT ? exit_usage : exit_code, rs_last_error()};
}

/// Options shared by every subcommand. Unset optionals leave the config
/// (defaults or --config file) untouched.
struct CommonOptions {
    std::optional<unsigned long long> seed;
    std::string out;
    std::string config_path;
    std::string format = "csv";
    std::vector<std::string> assignments;
    std::optional<unsigned long long> agents;
    std::optional<double> t_end;
    std::optional<double> dt;
    std::optional<double> kp;
    std::optional<double> k;
    std::optional<unsigned long long> m;
    std::optional<double> bandwidth;
    std::optional<double> noise_power;
    std::optional<std::string> scheme;
    std::optional<std::string> feedforward;
};

void add_common(CLI::App* app, CommonOptions& o, const std::string& default_out)
{
    o.out = default_out;
    app->add_option("--seed", o.seed, "RNG seed for measurement noise");
    app->add_option("--out", o.out, "Output directory (created if missing)")->capture_default_str();
    app->add_option("--config", o.config_path, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    app->add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv"}))->capture_default_str();
    app->add_option("--set", o.assignments, "Any config key as key=value (repeatable)");
    app->add_option("-n,--agents", o.agents, "Number of agents");
    app->add_option("--t-end", o.t_end, "Simulated time [s]");
    app->add_option("--dt", o.dt, "Time step [s]");
    app->add_option("--kp", o.kp, "Feedback gain");
    app->add_option("--k", o.k, "Target concentration");
    app->add_option("--m", o.m, "Grid nodes (even)");
    app->add_option("--bandwidth", o.bandwidth, "KDE bandwidth at 50 agents [rad]");
    app->add_option("--noise-power", o.noise_power, "Noise power on q [dBW]");
    app->add_option("--scheme", o.scheme, "Agent integrator")->check(CLI::IsMember({"rk4", "euler"}));
    app->add_option("--feedforward", o.feedforward, "Reference feed-forward term")
        ->check(CLI::IsMember({"on", "off"}));
}

class Config {
public:
    explicit Config(const std::string& scenario) { check(rs_config_create(scenario.c_str(), &handle_), exit_usage); }
    Config(const Config&) = delete;
    Config& operator=(const Config&) = delete;
    ~Config() { rs_config_destroy(handle_); }

    void set(const std::string& key, const std::string& value)
    {
        check(rs_config_set(handle_, key.c_str(), value.c_str()), exit_usage);
    }

    rs_config* get() const { return handle_; }

private:
    rs_config* handle_ = nullptr;
};

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void apply(Config& config, const std::string& scenario, const CommonOptions& o)
{
    if (!o.config_path.empty()) {
        check(rs_config_load_json(config.get(), o.config_path.c_str()), exit_usage);
        // The subcommand decides the scenario regardless of the file.
        config.set("scenario", scenario);
    }
    for (const auto& a : o.assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw CliFailure{exit_usage, "--set expects key=value, got '" + a + "'"};
        config.set(a.substr(0, eq), a.substr(eq + 1));
    }
    if (o.seed) config.set("seed", std::to_string(*o.seed));
    if (o.agents) config.set("agents", std::to_string(*o.agents));
    if (o.t_end) config.set("t_end", number(*o.t_end));
    if (o.dt) config.set("dt", number(*o.dt));
    if (o.kp) config.set("kp", number(*o.kp));
    if (o.k) config.set("k", number(*o.k));
    if (o.m) config.set("m", std::to_string(*o.m));
    if (o.bandwidth) config.set("bandwidth", number(*o.bandwidth));
    if (o.noise_power) config.set("noise_power_dbw", number(*o.noise_power));
    if (o.scheme) config.set("scheme", *o.scheme);
    if (o.feedforward) config.set("feedforward", *o.feedforward);
}

void run_single(const std::string& scenario, const CommonOptions& o)
{
    Config config(scenario);
    apply(config, scenario, o);
    rs_run* run = nullptr;
    check(rs_run_scenario(config.get(), &run), exit_runtime);
    std::unique_ptr<rs_run, decltype(&rs_run_destroy)> owned(run, rs_run_destroy);
    check(rs_run_write(run, o.out.c_str()), exit_runtime);
    double kl = 0.0;
    check(rs_run_final_kl(run, &kl), exit_runtime);
    std::printf("%s: final D_KL = %.6g (%zu samples) -> %s\n", scenario.c_str(), kl, rs_run_sample_count(run),
                o.out.c_str());
}

void print_and_write(rs_sweep* sweep, const std::string& label, const std::string& out)
{
    std::unique_ptr<rs_sweep, decltype(&rs_sweep_destroy)> owned(sweep, rs_sweep_destroy);
    check(rs_sweep_write(sweep, out.c_str()), exit_runtime);
    std::printf("%-10s %-14s %s\n", label.c_str(), "d_kl_final", "status");
    for (std::size_t i = 0; i < rs_sweep_size(sweep); ++i) {
        const char* param = nullptr;
        const char* status = nullptr;
        double kl = 0.0;
        check(rs_sweep_row(sweep, i, &param, &kl, &status), exit_runtime);
        std::printf("%-10s %-14.6g %s\n", param, kl, status);
    }
    std::printf("-> %s\n", out.c_str());
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Continuification control of agent swarms on a ring"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rs_version()));

    const std::vector<std::pair<std::string, std::string>> singles{
        {"regulate-mono", "Drive the swarm to a von Mises density"},
        {"regulate-bimodal", "Drive the swarm to a two-lobed density"},
        {"track", "Follow a von Mises density whose mean moves"},
        {"open-loop", "Uncontrolled spreading from a clumped start"},
        {"continuum", "Closed loop on the N = infinity density model"},
    };
    std::vector<CommonOptions> single_options(singles.size());
    std::vector<CLI::App*> single_apps;
    for (std::size_t i = 0; i < singles.size(); ++i) {
        auto* sub = app.add_subcommand(singles[i].first, singles[i].second);
        add_common(sub, single_options[i], "runs/" + singles[i].first);
        single_apps.push_back(sub);
    }

    CommonOptions sweep_n_options;
    std::string n_list = "1,2,5,10,20,50,100,200,500,1000,inf";
    auto* sweep_n = app.add_subcommand("sweep-n", "Final D_KL against swarm size (inf = continuum)");
    add_common(sweep_n, sweep_n_options, "runs/sweep-n");
    sweep_n->add_option("--n-list", n_list, "Comma-separated agent counts")->capture_default_str();

    CommonOptions sweep_noise_options;
    std::vector<double> p_list{0, 20, 40, 60, 80};
    std::size_t seeds = 5;
    auto* sweep_noise = app.add_subcommand("sweep-noise", "Final D_KL against noise power on q");
    add_common(sweep_noise, sweep_noise_options, "runs/sweep-noise");
    sweep_noise->add_option("--p-list", p_list, "Noise powers [dBW]")->delimiter(',')->capture_default_str();
    sweep_noise->add_option("--seeds", seeds, "Runs averaged per power")->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        for (std::size_t i = 0; i < singles.size(); ++i)
            if (single_apps[i]->parsed()) run_single(singles[i].first, single_options[i]);

        if (sweep_n->parsed()) {
            Config base("regulate-mono");
            apply(base, "regulate-mono", sweep_n_options);
            rs_sweep* sweep = nullptr;
            check(rs_sweep_agents(base.get(), n_list.c_str(), &sweep), exit_runtime);
            print_and_write(sweep, "N", sweep_n_options.out);
        }
        if (sweep_noise->parsed()) {
            Config base("regulate-mono");
            apply(base, "regulate-mono", sweep_noise_options);
            rs_sweep* sweep = nullptr;
            check(rs_sweep_noise(base.get(), p_list.data(), p_list.size(), seeds, &sweep), exit_runtime);
            print_and_write(sweep, "P[dBW]", sweep_noise_options.out);
        }
    } catch (const CliFailure& f) {
        std::fprintf(stderr, "ringswarm: %s\n", f.message.c_str());
        return f.code;
    }
    return 0;
}

#include "oracles.hpp"
#include "ringswarm/density.hpp"
#include "ringswarm/error.hpp"
#include "ringswarm/simulation.hpp"

#include <doctest.h>

#include <random>

using namespace ringswarm;

namespace {

const KernelSpec kernel{};

/// Input u_i = 0.3 sin(x_i), re-read at every stage position.
SwarmController sine_input()
{
    return [](const SwarmState&) -> InputSampler {
        return [](std::span<const double> x, std::span<double> u) {
            for (std::size_t i = 0; i < x.size(); ++i) u[i] = 0.3 * std::sin(x[i]);
        };
    };
}

std::vector<double> integrate_to(const std::vector<double>& x0, double t_end, double dt, Scheme scheme)
{
    SwarmState s{x0, 0.0};
    const IntegratorSpec spec{dt, scheme, InputRefresh::per_step};
    const long steps = std::lround(t_end / dt);
    for (long i = 0; i < steps; ++i) s = step_swarm(s, kernel, sine_input(), spec);
    return s.positions;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(wrap_distance(a[i], b[i])));
    return d;
}

double observed_order(Scheme scheme, double coarse)
{
    const std::vector<double> x0{-0.5, 0.05, 0.6};
    const auto reference = integrate_to(x0, 1.0, coarse / 64, scheme);
    const double e1 = max_gap(integrate_to(x0, 1.0, coarse, scheme), reference);
    const double e2 = max_gap(integrate_to(x0, 1.0, coarse / 2, scheme), reference);
    return std::log2(e1 / e2);
}

}  // namespace

TEST_CASE("two agents push each other apart")
{
    const SwarmState s{{0.5, -0.5}, 0.0};
    const std::vector<double> zero(2, 0.0);
    const auto rates = microscopic_rhs(s, kernel, zero);
    CHECK(rates[0] == doctest::Approx(0.300212).epsilon(1e-5));
    CHECK(rates[1] == -rates[0]);
    CHECK(rates[0] == doctest::Approx(oracle::morse(0.5, 0.5, 1.0)).epsilon(1e-14));
}

TEST_CASE("internal velocities sum to zero")
{
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-pi, pi);
    std::uniform_int_distribution<int> size(2, 200);
    for (int trial = 0; trial < 100; ++trial) {
        SwarmState s;
        s.positions.resize(static_cast<std::size_t>(size(rng)));
        for (double& x : s.positions) x = u(rng);
        const std::vector<double> zero(s.positions.size(), 0.0);
        const auto rates = microscopic_rhs(s, kernel, zero);
        double sum = 0.0;
        for (double r : rates) sum += r;
        CHECK(std::abs(sum) < 1e-10);
    }
}

TEST_CASE("microscopic rhs matches the pairwise oracle")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-pi, pi);
    std::vector<double> x(40);
    for (double& v : x) v = u(rng);
    std::vector<double> inputs(40);
    for (double& v : inputs) v = u(rng);
    const auto rates = microscopic_rhs(SwarmState{x, 0.0}, kernel, inputs);
    for (std::size_t i = 0; i < x.size(); ++i) {
        double expected = inputs[i];
        for (std::size_t j = 0; j < x.size(); ++j) expected += oracle::morse(0.5, 0.5, oracle::wrap(x[i], x[j]));
        CHECK(rates[i] == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK_THROWS_AS(microscopic_rhs(SwarmState{x, 0.0}, kernel, std::vector<double>(3)), Error);
}

TEST_CASE("Euler converges at first order")
{
    CHECK(observed_order(Scheme::explicit_euler, 0.01) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("RK4 converges at fourth order")
{
    const double order = observed_order(Scheme::rk4, 0.05);
    MESSAGE("RK4 observed order " << order);
    CHECK(order >= 3.8);
}

TEST_CASE("dynamics commute with rotations")
{
    const std::vector<double> x{-2.0, -0.4, 0.3, 1.1, 2.9};
    const double theta = 0.7;
    std::vector<double> xr(x);
    for (double& v : xr) v = wrap_angle(v + theta);
    const IntegratorSpec spec{1e-3};
    SwarmState a{x, 0.0}, b{xr, 0.0};
    for (int i = 0; i < 200; ++i) {
        a = step_swarm(a, kernel, open_loop_controller(), spec);
        b = step_swarm(b, kernel, open_loop_controller(), spec);
    }
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(wrap_distance(b.positions[i], a.positions[i]) == doctest::Approx(theta));
}

TEST_CASE("stepping is deterministic and keeps positions wrapped")
{
    const std::vector<double> x = clumped_positions(30, 3.0, 1.0);
    const IntegratorSpec spec{1e-3};
    SwarmState a{x, 0.0}, b{x, 0.0};
    for (int i = 0; i < 300; ++i) {
        a = step_swarm(a, kernel, open_loop_controller(), spec);
        b = step_swarm(b, kernel, open_loop_controller(), spec);
    }
    CHECK(a.positions == b.positions);
    CHECK(a.t == doctest::Approx(0.3));
    for (double p : a.positions) {
        CHECK(p >= -pi);
        CHECK(p < pi);
    }
}

TEST_CASE("initial layouts")
{
    const auto lattice = lattice_positions(4);
    CHECK(lattice[0] == doctest::Approx(-pi + pi / 4));
    CHECK(lattice[3] == doctest::Approx(pi - pi / 4));
    const auto clump = clumped_positions(10, 0.0, 1.0);
    CHECK(clump.front() == doctest::Approx(-0.45));
    CHECK(clump.back() == doctest::Approx(0.45));
}

TEST_CASE("a lone agent stays put and a clump spreads")
{
    const IntegratorSpec spec{1e-3};
    const auto lone = run_open_loop(SwarmState{{1.0}, 0.0}, kernel, spec, 1.0, 0.5);
    CHECK(lone.back().positions[0] == 1.0);

    const auto samples = run_open_loop(SwarmState{clumped_positions(50, 0.0, 1.0), 0.0}, kernel, spec, 3.0, 0.5);
    CHECK(samples.size() == 7);
    const RingGrid g(256);
    const GridFunction uniform = von_mises_density(0.0, 0.0, 50.0, g);
    const double start = kl_divergence(estimate_density(samples.front().positions, {}), uniform);
    const double end = kl_divergence(estimate_density(samples.back().positions, {}), uniform);
    CHECK(start > 0.5);
    CHECK(end < 0.05);
}

TEST_CASE("continuum: uniform density is a fixed point")
{
    const RingGrid g(128);
    ContinuumState s{GridFunction::sample(g, [](double) { return 50.0 / two_pi; }), 0.0};
    const ContinuumState start = s;
    for (int i = 0; i < 100; ++i) s = step_continuum(s, kernel, uncontrolled_continuum(), 1e-3);
    CHECK((s.density - start.density).max_abs() < 1e-10);
}

TEST_CASE("continuum conserves mass and refuses oversized steps")
{
    const RingGrid g(256);
    ContinuumState s{von_mises_density(0.5, 4.0, 50.0, g), 0.0};
    const double dt = continuum_stable_dt(s, kernel, uncontrolled_continuum());
    CHECK(dt > 0.0);
    try {
        (void)step_continuum(s, kernel, uncontrolled_continuum(), 10.0 * dt);
        FAIL("expected a CFL violation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::cfl_violation);
    }
    const double mass = integrate(s.density);
    for (int i = 0; i < 1000; ++i)
        s = step_continuum(s, kernel, uncontrolled_continuum(), 0.9 * continuum_stable_dt(s, kernel, uncontrolled_continuum()));
    CHECK(std::abs(integrate(s.density) - mass) < 1e-9);
    for (double v : s.density.values()) CHECK(v >= 0.0);
}

TEST_CASE("source-form control removes exactly q")
{
    std::mt19937_64 rng(43);
    const RingGrid g(64);
    GridFunction q(g, oracle::random_smooth_field(rng, 64));
    double mean = 0.0;
    for (double v : q.values()) mean += v / 64.0;
    for (double& v : q.values()) v -= mean;
    const auto faces = control_face_flux(q);
    for (std::size_t j = 0; j < 64; ++j) {
        const double divergence = (faces[j] - faces[(j + 63) % 64]) / g.spacing();
        CHECK(divergence == doctest::Approx(-q[j]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("many agents follow the continuum model")
{
    const std::size_t n = 400;
    const RingGrid g(256);
    const DensityEstimatorSpec kde{0.15, g};
    const double t_end = 0.2;
    const IntegratorSpec spec{5e-4};

    const auto samples = run_open_loop(SwarmState{clumped_positions(n, 0.0, 2.0), 0.0}, kernel, spec, t_end, t_end);
    const GridFunction agents = estimate_density(samples.back().positions, kde);

    ContinuumState s{estimate_density(samples.front().positions, kde), 0.0};
    while (s.t < t_end - 1e-12) {
        const double dt = std::min(t_end - s.t, 0.5 * continuum_stable_dt(s, kernel, uncontrolled_continuum()));
        s = step_continuum(s, kernel, uncontrolled_continuum(), dt);
    }
    const double gap = kl_divergence(agents, s.density);
    const double moved = kl_divergence(agents, estimate_density(samples.front().positions, kde));
    MESSAGE("micro/continuum KL " << gap << ", displacement KL " << moved);
    CHECK(gap < 0.1 * moved);
}

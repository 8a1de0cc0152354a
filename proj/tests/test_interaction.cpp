#include "oracles.hpp"
#include "ringswarm/density.hpp"
#include "ringswarm/error.hpp"
#include "ringswarm/interaction.hpp"

#include <doctest.h>

#include <random>

using namespace ringswarm;

TEST_CASE("kernel values")
{
    const KernelSpec spec;
    // -0.5 e^-2 + e^-1 and e^-2 - e^-1.
    CHECK(kernel_eval(spec, 1.0) == doctest::Approx(0.300212).epsilon(1e-5));
    CHECK(kernel_eval(spec, 1.0) == doctest::Approx(oracle::morse(0.5, 0.5, 1.0)).epsilon(1e-15));
    CHECK(kernel_derivative_eval(spec, 1.0) == doctest::Approx(-0.23254).epsilon(1e-4));
    CHECK(kernel_eval(spec, 0.0) == 0.0);
    CHECK(kernel_eval(spec, 1e-12) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(kernel_eval(spec, -1e-12) == doctest::Approx(-0.5).epsilon(1e-9));
    CHECK(kernel_derivative_eval(spec, 0.0) == 0.0);
}

TEST_CASE("kernel parity, bound and derivative over random parameters")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> param(0.1, 2.0);
    std::uniform_real_distribution<double> z(-pi, pi);
    for (int trial = 0; trial < 50; ++trial) {
        const KernelSpec spec{param(rng), param(rng)};
        for (int i = 0; i < 40; ++i) {
            const double x = z(rng);
            CHECK(kernel_eval(spec, -x) == -kernel_eval(spec, x));
            CHECK(kernel_derivative_eval(spec, -x) == kernel_derivative_eval(spec, x));
            CHECK(std::abs(kernel_eval(spec, x)) <= spec.attraction_strength + 1.0);
            CHECK(kernel_eval(spec, x) == doctest::Approx(oracle::morse(spec.attraction_strength,
                                                                        spec.attraction_length, x)).epsilon(1e-13));
            if (std::abs(x) > 1e-3) {
                const double h = 1e-6;
                const double fd = (kernel_eval(spec, x + h) - kernel_eval(spec, x - h)) / (2 * h);
                CHECK(kernel_derivative_eval(spec, x) == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
            }
        }
    }
}

TEST_CASE("kernel validation")
{
    CHECK_THROWS_AS(KernelSpec({0.0, 0.5}).validate(), Error);
    CHECK_THROWS_AS(KernelSpec({0.5, -1.0}).validate(), Error);
    CHECK_NOTHROW(KernelSpec{}.validate());
}

TEST_CASE("kernel grid samples")
{
    const KernelSpec spec;
    const RingGrid g(256);
    const GridFunction f = sample_kernel_on_grid(spec, g);
    CHECK(f[0] == 0.0);    // antipode
    CHECK(f[128] == 0.0);  // origin
    for (std::size_t j = 1; j < 256; ++j) {
        CHECK(f[256 - j] == -f[j]);
        const double x = static_cast<double>(static_cast<long>(j) - 128) * g.spacing();
        CHECK(f[j] == doctest::Approx(oracle::morse(0.5, 0.5, x)).epsilon(1e-14));
    }
    // The largest magnitude sits next to the origin; a dense oracle sweep
    // agrees that f decreases on (0, pi).
    double prev = oracle::morse(0.5, 0.5, 1e-9);
    for (int i = 1; i <= 10000; ++i) {
        const double v = oracle::morse(0.5, 0.5, pi * i / 10000.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(f.max_abs() == std::abs(f[129]));

    const GridFunction fx = sample_kernel_derivative_on_grid(spec, g);
    for (std::size_t j = 1; j < 256; ++j) CHECK(fx[256 - j] == fx[j]);
}

TEST_CASE("velocity field")
{
    const KernelSpec spec;
    const RingGrid g(256);
    const GridFunction uniform = GridFunction::sample(g, [](double) { return 50.0 / two_pi; });
    CHECK(velocity_field(spec, uniform).max_abs() < 1e-10);

    // A density even about 0 gives an odd velocity.
    const GridFunction bumps = von_mises_density(1.0, 3.0, 25.0, g) + von_mises_density(-1.0, 3.0, 25.0, g);
    const GridFunction v = velocity_field(spec, bumps);
    for (std::size_t j = 1; j < 256; ++j) CHECK(v[256 - j] == doctest::Approx(-v[j]).epsilon(1e-10).scale(1.0));
    CHECK(std::abs(v[0]) < 1e-10);
    CHECK(std::abs(v[128]) < 1e-10);
}

TEST_CASE("Young bound")
{
    const KernelSpec spec;
    const RingGrid g(256);
    const YoungBound zero = young_bound_check(spec, GridFunction(g));
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);

    std::mt19937_64 rng(12);
    for (int i = 0; i < 100; ++i) {
        const YoungBound b = young_bound_check(spec, GridFunction(g, oracle::random_smooth_field(rng, 256)));
        CHECK(b.lhs <= b.rhs * (1.0 + 1e-12));
    }

    // A narrow bump is far from the equality case.
    const GridFunction spike = von_mises_density(0.3, 400.0, 1.0, g);
    const YoungBound b = young_bound_check(spec, spike);
    CHECK(b.lhs < b.rhs);
}

#include "oracles.hpp"
#include "ringswarm/density.hpp"
#include "ringswarm/error.hpp"

#include <doctest.h>

#include <random>

using namespace ringswarm;

namespace {

const DensityEstimatorSpec default_kde{};

}  // namespace

TEST_CASE("KDE of one agent is a symmetric bump of unit mass")
{
    const std::vector<double> one{0.0};
    const GridFunction rho = estimate_density(one, default_kde);
    CHECK(integrate(rho) == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t j = 1; j < 256; ++j) CHECK(rho[256 - j] == doctest::Approx(rho[j]).epsilon(1e-12));
    CHECK(rho.max_abs() == rho[128]);
}

TEST_CASE("KDE of an even lattice is flat")
{
    std::vector<double> lattice(256);
    for (std::size_t i = 0; i < 256; ++i) lattice[i] = -pi + (static_cast<double>(i) + 0.5) * two_pi / 256.0;
    const GridFunction rho = estimate_density(lattice, default_kde);
    const double mean = 256.0 / two_pi;
    for (std::size_t j = 0; j < 256; ++j) CHECK(std::abs(rho[j] - mean) / mean < 1e-6);
}

TEST_CASE("KDE mass equals the agent count")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (std::size_t n : {1u, 10u, 1000u}) {
        std::vector<double> x(n);
        for (double& v : x) v = u(rng);
        CHECK(integrate(estimate_density(x, default_kde)) == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
    }
}

TEST_CASE("KDE rejects bad input")
{
    CHECK_THROWS_AS(estimate_density(std::vector<double>{}, default_kde), Error);
    CHECK_THROWS_AS(estimate_density(std::vector<double>{0.0}, DensityEstimatorSpec{0.0, RingGrid(256)}), Error);
    CHECK_THROWS_AS(estimate_density(std::vector<double>{std::nan("")}, default_kde), Error);
}

TEST_CASE("KDE commutes with rotation by a whole number of cells")
{
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> u(-pi, pi);
    std::vector<double> x(30);
    for (double& v : x) v = u(rng);
    const RingGrid g(256);
    const std::size_t shift = 37;
    std::vector<double> rotated(x);
    for (double& v : rotated) v = wrap_angle(v + static_cast<double>(shift) * g.spacing());
    const GridFunction a = estimate_density(x, default_kde);
    const GridFunction b = estimate_density(rotated, default_kde);
    for (std::size_t j = 0; j < 256; ++j) CHECK(b[(j + shift) % 256] == doctest::Approx(a[j]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("smooth_density keeps mass and flattens nothing that is already flat")
{
    const RingGrid g(256);
    const GridFunction flat = GridFunction::sample(g, [](double) { return 3.0; });
    CHECK((smooth_density(flat, 0.2) - flat).max_abs() < 1e-12);
    const GridFunction vm = von_mises_density(0.5, 4.0, 50.0, g);
    const GridFunction s = smooth_density(vm, 0.2);
    CHECK(integrate(s) == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(s.max_abs() < vm.max_abs());
}

TEST_CASE("von Mises target")
{
    const RingGrid g(256);
    const GridFunction flat = von_mises_density(0.0, 0.0, 50.0, g);
    for (std::size_t j = 0; j < 256; ++j) CHECK(flat[j] == doctest::Approx(50.0 / two_pi).epsilon(1e-14));

    const GridFunction vm = von_mises_density(0.0, 4.0, 1.0, g);
    CHECK(oracle::bessel_i0_series(4.0) == doctest::Approx(11.301921952136).epsilon(1e-12));
    CHECK(vm[128] == doctest::Approx(std::exp(4.0) / (two_pi * oracle::bessel_i0_series(4.0))).epsilon(1e-12));
    CHECK(integrate(vm) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(von_mises_density(0.0, -1.0, 1.0, g), Error);
}

TEST_CASE("bimodal target")
{
    const RingGrid g(256);
    const GridFunction b = bimodal_density(0.7, 0.7, 5.0, 10.0, g);
    CHECK((b - von_mises_density(0.7, 5.0, 10.0, g)).max_abs() < 1e-12);
    const GridFunction two = bimodal_density(pi / 2, -pi / 2, 8.0, 50.0, g);
    CHECK(integrate(two) == doctest::Approx(50.0).epsilon(1e-10));
    for (std::size_t j = 1; j < 256; ++j) CHECK(two[256 - j] == doctest::Approx(two[j]).epsilon(1e-12));
    CHECK(two.max_abs() == doctest::Approx(two[64]).epsilon(1e-12));
    CHECK(two.max_abs() == doctest::Approx(two[192]).epsilon(1e-12));
}

TEST_CASE("tracking schedule")
{
    const TrackingSchedule s;
    CHECK(s.mean_at(0.0) == 0.0);
    CHECK(s.mean_at(0.5) == 0.0);
    const double leg = (pi / 3) / 1.47;
    CHECK(s.mean_at(0.5 + leg) == doctest::Approx(pi / 3).epsilon(1e-12));
    CHECK(s.mean_at(0.5 + 2 * leg) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(s.mean_at(0.5 + 3 * leg) == doctest::Approx(-pi / 3).epsilon(1e-12));
    CHECK(s.end_time() == doctest::Approx(0.5 + 4 * (pi / 3) / 1.47).epsilon(1e-12));
    CHECK(s.end_time() == doctest::Approx(3.349).epsilon(1e-3));
    CHECK(s.mean_at(10.0) == 0.0);

    // Continuous in time, with the slew rate as its slope.
    for (double t = 0.0; t < 4.0; t += 0.001) {
        CHECK(std::abs(s.mean_at(t + 0.001) - s.mean_at(t)) <= 1.47 * 0.001 + 1e-12);
        CHECK(std::abs(s.mean_rate_at(t)) <= 1.47);
    }
    CHECK(s.mean_rate_at(0.6) == doctest::Approx(1.47));
    CHECK(s.mean_rate_at(0.5 + 1.5 * leg) == doctest::Approx(-1.47));
}

TEST_CASE("target_at")
{
    const RingGrid g(256);
    TargetProgram tracking{TrackingTarget{}, 50.0};
    const double t = 0.5 + 0.5 * (pi / 3) / 1.47;
    const TargetSample s = target_at(tracking, t, g);
    CHECK((s.density - von_mises_density(pi / 6, 4.0, 50.0, g)).max_abs() < 1e-10);

    // The rate is the time derivative of the density.
    const double h = 1e-6;
    const GridFunction fd = (1.0 / (2 * h)) * (target_at(tracking, t + h, g).density - target_at(tracking, t - h, g).density);
    CHECK((fd - s.rate).max_abs() < 1e-5 * s.rate.max_abs());

    TargetProgram mono{MonomodalTarget{}, 50.0};
    CHECK(target_at(mono, 1.0, g).rate.max_abs() == 0.0);
    CHECK_THROWS_AS(target_at(mono, -1.0, g), Error);
}

TEST_CASE("KL divergence")
{
    const RingGrid g(256);
    const GridFunction vm = von_mises_density(0.0, 4.0, 50.0, g);
    CHECK(kl_divergence(vm, vm) == 0.0);
    CHECK(kl_divergence(3.0 * vm, vm) < 1e-15);

    const GridFunction flat = von_mises_density(0.0, 0.0, 50.0, g);
    const double expected = oracle::kl_uniform_vs_von_mises(4.0, 100000);
    CHECK(expected == doctest::Approx(std::log(11.301921952136)).epsilon(1e-9));
    CHECK(kl_divergence(flat, vm) == doctest::Approx(expected).epsilon(1e-9));
    CHECK(kl_divergence(flat, vm) == doctest::Approx(2.42497).epsilon(1e-5));

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        GridFunction a(g), b(g);
        for (std::size_t j = 0; j < 256; ++j) {
            a[j] = u(rng);
            b[j] = u(rng);
        }
        CHECK(kl_divergence(a, b) >= 0.0);
    }
}

TEST_CASE("l2 error norm")
{
    const RingGrid g(256);
    CHECK(l2_error_norm(GridFunction(g)) == 0.0);
    CHECK(l2_error_norm(GridFunction::sample(g, [](double) { return 1.0; })) == doctest::Approx(std::sqrt(two_pi)));
    CHECK(l2_error_norm(GridFunction::sample(g, [](double x) { return std::sin(x); })) ==
          doctest::Approx(std::sqrt(pi)).epsilon(1e-12));
}

#pragma once

#include "ringswarm/ring.hpp"

#include <span>
#include <variant>
#include <vector>

namespace ringswarm {

/// Periodic Gaussian kernel density estimate on a grid.
struct DensityEstimatorSpec {
    double bandwidth = 0.2;
    RingGrid grid{256};

    void validate() const;
};

/// Sum of wrapped Gaussian bumps, one per agent. Each bump is normalised on
/// the grid so that it integrates to exactly 1; the field integrates to N.
GridFunction estimate_density(std::span<const double> positions, const DensityEstimatorSpec& spec);

/// Convolution of a grid density with the same wrapped Gaussian bump used by
/// estimate_density; the N -> infinity limit of the agent KDE. Mass is kept.
GridFunction smooth_density(const GridFunction& density, double bandwidth);

/// N exp(k cos(x - mu)) / (2 pi I0(k)).
GridFunction von_mises_density(double mean, double concentration, double mass, const RingGrid& grid);

/// Equal-weight mixture of two von Mises fields with a common concentration.
GridFunction bimodal_density(double mean1, double mean2, double concentration, double mass, const RingGrid& grid);

/// Piecewise-linear mean trajectory: hold at the first waypoint, then slew
/// between waypoints at a constant rate, then hold at the last one.
struct TrackingSchedule {
    double hold_until = 0.5;
    double slew_rate = 1.47;
    std::vector<double> waypoints{0.0, pi / 3.0, -pi / 3.0, 0.0};

    double mean_at(double t) const;
    /// Right derivative of mean_at.
    double mean_rate_at(double t) const;
    /// Time at which the last waypoint is reached.
    double end_time() const;
};

struct MonomodalTarget {
    double mean = 0.0;
    double concentration = 4.0;
};

struct BimodalTarget {
    double mean1 = pi / 2.0;
    double mean2 = -pi / 2.0;
    double concentration = 8.0;
};

struct TrackingTarget {
    double concentration = 4.0;
    TrackingSchedule schedule;
};

struct TargetProgram {
    std::variant<MonomodalTarget, BimodalTarget, TrackingTarget> variant;
    double mass = 50.0;

    void validate() const;
};

struct TargetSample {
    GridFunction density;
    GridFunction rate;  // time derivative of density
};

TargetSample target_at(const TargetProgram& program, double t, const RingGrid& grid);

/// Densities below this are raised to it before taking logs.
inline constexpr double kl_floor = 1e-12;

/// D_KL(p || q) after flooring both fields and normalising each so that its
/// grid samples sum to 1.
double kl_divergence(const GridFunction& rho, const GridFunction& rho_desired);

/// sqrt(integrate(e^2)).
double l2_error_norm(const GridFunction& e);

}  // namespace ringswarm

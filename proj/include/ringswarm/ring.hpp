#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace ringswarm {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Maps any finite angle onto the half-open representative in [-pi, pi).
double wrap_angle(double angle);

/// Signed shortest-path angle a - b, wrapped into [-pi, pi). Antipodal
/// pairs land on -pi.
double wrap_distance(double a, double b);

/// An angle on the unit circle, kept in [-pi, pi).
class RingPoint {
public:
    RingPoint() = default;
    explicit RingPoint(double angle) : angle_(wrap_angle(angle)) {}

    double angle() const noexcept { return angle_; }

    RingPoint operator+(double delta) const { return RingPoint(angle_ + delta); }
    RingPoint operator-(double delta) const { return RingPoint(angle_ - delta); }
    double operator-(RingPoint other) const { return wrap_distance(angle_, other.angle_); }

private:
    double angle_ = -pi;
};

/// Uniform periodic grid on [-pi, pi): node j sits at -pi + j * spacing.
/// The node count must be even so that every wrapped node offset is itself a
/// node (the antipode of node 0 is node m/2, i.e. angle 0).
class RingGrid {
public:
    explicit RingGrid(std::size_t m);

    std::size_t size() const noexcept { return m_; }
    double spacing() const noexcept { return spacing_; }
    double node(std::size_t j) const noexcept { return -pi + static_cast<double>(j) * spacing_; }
    std::vector<double> nodes() const;

    /// Index of the node nearest to an angle (ties resolve upward).
    std::size_t nearest_node(double angle) const;

    friend bool operator==(const RingGrid& a, const RingGrid& b) noexcept { return a.m_ == b.m_; }

private:
    std::size_t m_;
    double spacing_;
};

/// Real samples of a periodic function at the nodes of a RingGrid.
class GridFunction {
public:
    explicit GridFunction(RingGrid grid);
    GridFunction(RingGrid grid, std::vector<double> values);

    template <class Fn>
    static GridFunction sample(RingGrid grid, Fn&& fn)
    {
        std::vector<double> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = fn(grid.node(j));
        return GridFunction(grid, std::move(v));
    }

    const RingGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t j) const noexcept { return values_[j]; }
    double& operator[](std::size_t j) noexcept { return values_[j]; }

    double max_abs() const;

    GridFunction& operator+=(const GridFunction& other);
    GridFunction& operator-=(const GridFunction& other);
    GridFunction& operator*=(double s);

private:
    RingGrid grid_;
    std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(GridFunction a, double s);
GridFunction operator*(double s, GridFunction a);
/// Pointwise product.
GridFunction operator*(const GridFunction& a, const GridFunction& b);

/// Throws ErrorCode::grid_mismatch unless both fields share a grid.
void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what);

/// Discrete circular convolution spacing * sum_j kernel(x_i - y_j) density(y_j),
/// evaluated with a real-to-complex FFT. `kernel_samples` holds the kernel at
/// the grid nodes themselves (node x_j carries kernel(x_j)).
GridFunction circular_convolve(const GridFunction& kernel_samples, const GridFunction& density);

/// Periodic second-order central difference.
GridFunction spatial_derivative(const GridFunction& field);

/// Periodic trapezoid rule over the full circle.
double integrate(const GridFunction& field);

/// Running integral from -pi to each node using the trapezoid rule, so the
/// central difference of the result reproduces the field to second order.
/// Node 0 maps to 0; closing the loop at +pi would give integrate(field).
GridFunction cumulative_integral(const GridFunction& field);

}  // namespace ringswarm

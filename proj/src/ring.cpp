#include "ringswarm/ring.hpp"

#include "fft.hpp"
#include "ringswarm/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ringswarm {
namespace {

double wrap_shifted(double shifted)
{
    double r = std::fmod(shifted, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r - pi;
}

}  // namespace

double wrap_angle(double angle) { return wrap_shifted(angle + pi); }

double wrap_distance(double a, double b) { return wrap_shifted(a - b + pi); }

RingGrid::RingGrid(std::size_t m) : m_(m), spacing_(two_pi / static_cast<double>(m))
{
    if (m < 4 || m % 2 != 0)
        throw Error(ErrorCode::invalid_argument,
                    "ring grid needs an even node count >= 4, got " + std::to_string(m));
}

std::vector<double> RingGrid::nodes() const
{
    std::vector<double> out(m_);
    for (std::size_t j = 0; j < m_; ++j) out[j] = node(j);
    return out;
}

std::size_t RingGrid::nearest_node(double angle) const
{
    const double s = (wrap_angle(angle) + pi) / spacing_;
    return static_cast<std::size_t>(std::floor(s + 0.5)) % m_;
}

GridFunction::GridFunction(RingGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

GridFunction::GridFunction(RingGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size())
        throw Error(ErrorCode::grid_mismatch, "grid function has " + std::to_string(values_.size()) +
                                                  " samples for a grid of " + std::to_string(grid_.size()));
    for (std::size_t j = 0; j < values_.size(); ++j)
        if (!std::isfinite(values_[j]))
            throw Error(ErrorCode::non_finite, "grid function sample " + std::to_string(j) + " is not finite");
}

double GridFunction::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

GridFunction& GridFunction::operator+=(const GridFunction& other)
{
    require_same_grid(*this, other, "addition");
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += other.values_[j];
    return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other)
{
    require_same_grid(*this, other, "subtraction");
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] -= other.values_[j];
    return *this;
}

GridFunction& GridFunction::operator*=(double s)
{
    for (double& v : values_) v *= s;
    return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(GridFunction a, double s) { return a *= s; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

GridFunction operator*(const GridFunction& a, const GridFunction& b)
{
    require_same_grid(a, b, "product");
    GridFunction out(a.grid());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
    return out;
}

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what)
{
    if (!(a.grid() == b.grid()))
        throw Error(ErrorCode::grid_mismatch, std::string(what) + ": grids differ (" +
                                                  std::to_string(a.grid().size()) + " vs " +
                                                  std::to_string(b.grid().size()) + " nodes)");
}

GridFunction circular_convolve(const GridFunction& kernel_samples, const GridFunction& density)
{
    require_same_grid(kernel_samples, density, "circular_convolve");
    const std::size_t m = density.size();
    const std::size_t half = m / 2;

    // Re-index the kernel by node offset: offset d * spacing is node d + m/2.
    std::vector<double> by_offset(m);
    for (std::size_t d = 0; d < m; ++d) by_offset[d] = kernel_samples[(d + half) % m];

    GridFunction out(density.grid());
    detail::cyclic_convolve(by_offset, density.values(), out.values());
    out *= density.grid().spacing();
    return out;
}

GridFunction spatial_derivative(const GridFunction& field)
{
    const std::size_t m = field.size();
    const double inv = 1.0 / (2.0 * field.grid().spacing());
    GridFunction out(field.grid());
    for (std::size_t j = 0; j < m; ++j) out[j] = (field[(j + 1) % m] - field[(j + m - 1) % m]) * inv;
    return out;
}

double integrate(const GridFunction& field)
{
    double sum = 0.0;
    for (double v : field.values()) sum += v;
    return sum * field.grid().spacing();
}

GridFunction cumulative_integral(const GridFunction& field)
{
    const double h = field.grid().spacing();
    GridFunction out(field.grid());
    double acc = 0.0;
    for (std::size_t j = 1; j < field.size(); ++j) {
        acc += 0.5 * h * (field[j - 1] + field[j]);
        out[j] = acc;
    }
    return out;
}

}  // namespace ringswarm

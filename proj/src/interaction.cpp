#include "ringswarm/interaction.hpp"

#include "ringswarm/error.hpp"

#include <cmath>

namespace ringswarm {

void KernelSpec::validate() const
{
    if (!(attraction_strength > 0.0) || !(attraction_length > 0.0) || !std::isfinite(attraction_strength) ||
        !std::isfinite(attraction_length))
        throw Error(ErrorCode::invalid_argument, "kernel needs G > 0 and L > 0");
}

double kernel_eval(const KernelSpec& spec, double z)
{
    if (z == 0.0) return 0.0;
    const double a = std::abs(z);
    const double magnitude = -spec.attraction_strength * std::exp(-a / spec.attraction_length) + std::exp(-a);
    return z > 0.0 ? magnitude : -magnitude;
}

double kernel_derivative_eval(const KernelSpec& spec, double z)
{
    const double a = std::abs(z);
    return spec.attraction_strength / spec.attraction_length * std::exp(-a / spec.attraction_length) -
           std::exp(-a);
}

namespace {

// Node j sits at offset (j - m/2) * spacing from the origin; using the integer
// offset keeps +x and -x samples bit-for-bit symmetric.
double node_offset(const RingGrid& grid, std::size_t j)
{
    const auto half = static_cast<std::ptrdiff_t>(grid.size() / 2);
    return static_cast<double>(static_cast<std::ptrdiff_t>(j) - half) * grid.spacing();
}

}  // namespace

GridFunction sample_kernel_on_grid(const KernelSpec& spec, const RingGrid& grid)
{
    GridFunction out(grid);
    // Node 0 is the antipode and keeps its zero.
    for (std::size_t j = 1; j < grid.size(); ++j) out[j] = kernel_eval(spec, node_offset(grid, j));
    return out;
}

GridFunction sample_kernel_derivative_on_grid(const KernelSpec& spec, const RingGrid& grid)
{
    GridFunction out(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) out[j] = kernel_derivative_eval(spec, node_offset(grid, j));
    return out;
}

GridFunction velocity_field(const KernelSpec& spec, const GridFunction& density)
{
    return circular_convolve(sample_kernel_on_grid(spec, density.grid()), density);
}

YoungBound young_bound_check(const KernelSpec& spec, const GridFunction& error_field)
{
    const GridFunction fx = sample_kernel_derivative_on_grid(spec, error_field.grid());
    const GridFunction vex = circular_convolve(fx, error_field);
    const auto l2 = [](const GridFunction& g) { return std::sqrt(integrate(g * g)); };
    return {vex.max_abs(), l2(fx) * l2(error_field)};
}

}  // namespace ringswarm

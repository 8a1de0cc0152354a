#pragma once

#include "ringswarm/ring.hpp"

namespace ringswarm {

/// Morse-type velocity kernel f(z) = sgn(z) [-G exp(-|z|/L) + exp(-|z|)]:
/// attraction of strength G and range L on top of unit repulsion.
struct KernelSpec {
    double attraction_strength = 0.5;  // G
    double attraction_length = 0.5;    // L

    /// Throws ErrorCode::invalid_argument unless G > 0 and L > 0.
    void validate() const;
};

/// f(z), odd, with f(0) = 0.
double kernel_eval(const KernelSpec& spec, double z);

/// f_x(z) = (G/L) exp(-|z|/L) - exp(-|z|): the even, continuous extension of
/// the classical derivative across the origin.
double kernel_derivative_eval(const KernelSpec& spec, double z);

/// Kernel at every grid node. The antipodal node (-pi) is where the periodic
/// extension of f jumps; it is assigned the midpoint of the one-sided limits,
/// which is 0, so the samples stay exactly odd.
GridFunction sample_kernel_on_grid(const KernelSpec& spec, const RingGrid& grid);

/// Even kernel derivative at every grid node (continuous, no special case).
GridFunction sample_kernel_derivative_on_grid(const KernelSpec& spec, const RingGrid& grid);

/// V = f * density.
GridFunction velocity_field(const KernelSpec& spec, const GridFunction& density);

struct YoungBound {
    double lhs = 0.0;  // ||f_x * e||_inf
    double rhs = 0.0;  // ||f_x||_2 ||e||_2
};

/// Both sides of ||(f_x * e)||_inf <= ||f_x||_2 ||e||_2 on the discrete grid.
YoungBound young_bound_check(const KernelSpec& spec, const GridFunction& error_field);

}  // namespace ringswarm

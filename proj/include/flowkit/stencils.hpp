#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "flowkit/grid.hpp"

namespace flowkit::stencils {

struct StencilError : std::runtime_error {
    explicit StencilError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tendency -(u . grad Q) by first-order upwinding at Q's own centering.
/// Face velocities are averaged to Q's location; a zero advecting velocity
/// contributes nothing along that axis. Writes interior points of `out`
/// (shape-congruent to Q's block array); guards are left untouched.
/// Guards of Q and the velocities must be filled. velz_slot is ignored on
/// 2-d grids (pass -1).
void advect_upwind(const grid::BlockGrid& g, int block, int q_slot, int velx_slot, int vely_slot,
                   int velz_slot, Array3& out);

/// Tendency div(K grad Q) in flux form with a cell-centered diffusivity
/// field: flux faces take the harmonic mean of adjacent cells for
/// cell-centered Q, arithmetic interpolation for face-centered Q. Writes
/// interior points of `out`; guards of Q and K must be filled.
void diffuse_central(const grid::BlockGrid& g, int block, int q_slot, int k_slot, Array3& out);

/// Same, with the diffusivity given directly as a cell-shaped array for the
/// block (guards filled).
void diffuse_central(const grid::BlockGrid& g, int block, int q_slot, const Array3& k_cells,
                     Array3& out);

/// Constant-coefficient variant.
void diffuse_central(const grid::BlockGrid& g, int block, int q_slot, double k_const, Array3& out);

/// Adams-Bashforth 2 update over the full array extent:
/// Q += dt*(3/2 rhs_now - 1/2 rhs_prev), forward Euler on the first step.
void integrate_ab2(Array3& q, const Array3& rhs_now, const Array3& rhs_prev, double dt,
                   bool first_step);

/// Iterative PDE reinitialization of a cell-centered level set toward a
/// signed distance function: d(phi)/d(tau) = S(phi0)(1 - |grad phi|) with the
/// Godunov Hamiltonian, smoothed sign S = phi0/sqrt(phi0^2 + dx^2), pseudo
/// time step dx/2. The sign of phi0 is preserved at every cell, so the zero
/// crossing cannot jump a cell. `band_width` names the band (in cells from
/// the interface) where |grad phi| is brought to 1; updates run everywhere.
/// Throws StencilError when phi has no sign change.
void redistance(grid::BlockGrid& g, int phi_slot, int band_width, int iters,
                const WorkerPool& pool);

/// Smoothed interface profile: 0 below -eps, 1 above +eps,
/// (1 + x/eps + sin(pi x/eps)/pi)/2 between. delta is its exact derivative.
inline double smoothed_heaviside(double phi, double eps) {
    if (phi <= -eps) return 0.0;
    if (phi >= eps) return 1.0;
    const double pi = 3.14159265358979323846;
    return 0.5 * (1.0 + phi / eps + std::sin(pi * phi / eps) / pi);
}

inline double smoothed_delta(double phi, double eps) {
    if (phi <= -eps || phi >= eps) return 0.0;
    const double pi = 3.14159265358979323846;
    return 0.5 / eps * (1.0 + std::cos(pi * phi / eps));
}

/// Interface curvature kappa = div(grad phi / |grad phi|) by central
/// differences on face-normal components; |grad phi| floored at 1e-12 and
/// kappa clamped to +-1/dx. Writes interior points of `out`. Guards of phi
/// must be filled.
void curvature(const grid::BlockGrid& g, int block, int phi_slot, Array3& out);

}  // namespace flowkit::stencils

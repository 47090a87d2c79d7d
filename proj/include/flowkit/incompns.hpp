#pragma once

#include <stdexcept>
#include <string>

#include "flowkit/grid.hpp"
#include "flowkit/params.hpp"
#include "flowkit/poisson.hpp"
#include "flowkit/util.hpp"

namespace flowkit::ins {

struct FlowError : std::runtime_error {
    explicit FlowError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Runtime knobs for the fractional-step solver.
struct FlowConfig {
    double inv_reynolds = 1.0;
    double grav[3] = {0.0, 0.0, 0.0};
    double dt = 1e-3;
    /// Variable-property mode: diffusion uses the cell viscosity field and
    /// divides by face density; projection weights by 1/density.
    bool var_dens = false;
    grid::PoissonOptions poisson;

    static FlowConfig from_params(const params::ParameterSet& rp, bool var_dens);
};

/// Resolved slot ids for the fields the solver touches. Face velocities are
/// velfx/velfy/velfz, the accumulated tendency fields rhfx/rhfy/rhfz with
/// AB2 history in rofx/rofy/rofz, pressure pres, projection source divv and
/// coefficient pbeta, and cell-centered diagnostic velocities velx/vely/velz.
/// Variable-property mode additionally resolves dens and visc.
struct FlowSlots {
    int face_vel[3];
    int rhs[3];
    int rhs_old[3];
    int pres;
    int divv;
    int beta;
    int cell_vel[3];
    int dens = -1;
    int visc = -1;

    static FlowSlots resolve(const grid::BlockGrid& g, bool var_dens);
};

/// Adds the divergence-form momentum advection tendency -div(u u), discretized
/// with second-order central averages, into the rhs field of each velocity
/// component on one block. Velocity guards must be filled.
void ins_advection(grid::BlockGrid& g, int block, const FlowSlots& s);

/// Adds the viscous tendency into the rhs fields of one block. Constant
/// properties: inv_reynolds * laplacian(u). Variable properties:
/// (1/rho) div(visc * inv_reynolds * grad u) with face-averaged coefficients.
void ins_diffusion(grid::BlockGrid& g, int block, const FlowSlots& s, const FlowConfig& cfg);

/// Adds the body-force components of cfg.grav into the rhs fields.
void ins_gravity(grid::BlockGrid& g, int block, const FlowSlots& s, const FlowConfig& cfg);

/// Advances face velocities to the predictor state u* with second-order
/// Adams-Bashforth over the accumulated rhs fields (forward Euler on the
/// first step), then rotates the rhs fields into the history slots and
/// clears them for the next step.
void ins_predictor(grid::BlockGrid& g, int block, const FlowSlots& s, double dt, bool first_step);

/// Pressure projection: solves div(beta grad p) = div(u*)/dt and applies
/// u = u* - dt * beta_face * grad p on every face the solve constrained,
/// then refreshes velocity and pressure guards. Throws FlowError if the
/// pressure solve does not converge.
grid::PoissonReport ins_project(grid::BlockGrid& g, const FlowSlots& s, const FlowConfig& cfg,
                                const WorkerPool& pool);

/// Fills the cell-centered diagnostic velocities with the arithmetic mean of
/// the bounding faces of each cell (inactive axes get zero).
void ins_face_to_center(grid::BlockGrid& g, int block, const FlowSlots& s);

/// Largest |u| dt / dx over all face velocities; the step CFL diagnostic.
double ins_max_cfl(const grid::BlockGrid& g, const FlowSlots& s, double dt);

}  // namespace flowkit::ins

#pragma once

#include <stdexcept>
#include <string>

#include "flowkit/grid.hpp"
#include "flowkit/params.hpp"

namespace flowkit::mph {

struct PhaseError : std::runtime_error {
    explicit PhaseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two-phase configuration. The level set is positive in the gas phase;
/// ratios are gas values over liquid reference values.
struct PhaseConfig {
    double rho_gas = 1.0;
    double mu_gas = 1.0;
    double inv_weber = 0.0;
    double eps_cells = 2.5;      // property smoothing half-width in cells
    int redistance_every = 5;    // steps between reinitializations; 0 disables
    int redistance_iters = 12;
    int redistance_band = 6;
    double grav[3] = {0.0, 0.0, 0.0};

    static PhaseConfig from_params(const params::ParameterSet& rp);
};

/// Slot ids: level set dfun with AB2 pair dfrh/dfro, the property fields
/// dens/visc the flow reads, cell curvature curv, the face velocities, and
/// the momentum rhs fields the forcing accumulates into.
struct PhaseSlots {
    int dfun;
    int rhs;
    int rhs_old;
    int dens;
    int visc;
    int curv;
    int face_vel[3];
    int mom_rhs[3];

    static PhaseSlots resolve(const grid::BlockGrid& g);
};

/// Advances the level set on one block: upwind advection tendency by the
/// face velocities, AB2 in time, history rotated like the flow fields.
/// Velocity and level-set guards must be filled.
void mph_advect(grid::BlockGrid& g, int block, const PhaseSlots& s, double dt, bool first_step);

/// Fills dens/visc from the level set: liquid cells (phi < -eps) hold exactly
/// 1, gas cells (phi > eps) exactly the configured ratio, smoothed between.
void mph_set_properties(grid::BlockGrid& g, int block, const PhaseSlots& s,
                        const PhaseConfig& cfg);

/// Interface curvature of the level set into the curv field (interior cells;
/// the caller refreshes curv guards before forcing).
void mph_curvature(grid::BlockGrid& g, int block, const PhaseSlots& s);

/// Adds surface tension and gravity to the momentum rhs fields of one block.
/// Surface tension is the continuum-surface-force form with the Heaviside
/// gradient and the same harmonic face mobility the projection uses, so a
/// static interface balances against the pressure to solver accuracy.
/// Requires dens, curv, and dfun guards filled.
void mph_vel_forcing(grid::BlockGrid& g, int block, const PhaseSlots& s, const PhaseConfig& cfg);

/// Runs the redistance sweep when `step` falls on the configured cadence.
/// Returns whether it ran.
bool mph_redistance_if_due(grid::BlockGrid& g, const PhaseSlots& s, const PhaseConfig& cfg,
                           int step, const WorkerPool& pool);

/// Liquid volume sum((1 - H(phi)) dx^dims) over owned cells.
double mph_liquid_volume(const grid::BlockGrid& g, const PhaseSlots& s, const PhaseConfig& cfg);

}  // namespace flowkit::mph

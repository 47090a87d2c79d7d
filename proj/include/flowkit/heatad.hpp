#pragma once

#include <stdexcept>
#include <string>

#include "flowkit/grid.hpp"
#include "flowkit/params.hpp"

namespace flowkit::heat {

struct HeatError : std::runtime_error {
    explicit HeatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thermal transport knobs. `alpha` is the combined nondimensional
/// diffusivity; variable-diffusivity mode blends it across the interface
/// with the gas-side ratio `alpha_gas`.
struct ThermalConfig {
    double alpha = 1.0;
    double alpha_gas = 1.0;
    bool var_diffusion = false;
    /// Advect with the face velocities; off for conduction-only setups.
    bool coupled = false;

    static ThermalConfig from_params(const params::ParameterSet& rp, bool var_diffusion,
                                     bool coupled);
};

/// Slot ids for the temperature system: temp plus the AB2 tendency pair
/// htrh/htro. Velocity slots resolve only when coupled; the level set only
/// in variable-diffusivity mode.
struct HeatSlots {
    int temp;
    int rhs;
    int rhs_old;
    int face_vel[3] = {-1, -1, -1};
    int dfun = -1;

    static HeatSlots resolve(const grid::BlockGrid& g, const ThermalConfig& cfg);
};

/// Accumulates the temperature tendency on one block into htrh:
/// upwind advection by the face velocities when coupled, plus flux-form
/// diffusion with constant alpha or the phase-blended diffusivity field.
/// Guards of temp (and velocities / level set) must be filled.
void heat_rhs(grid::BlockGrid& g, int block, const HeatSlots& s, const ThermalConfig& cfg);

/// AB2 update of temp from the accumulated tendency, then rotates htrh into
/// htro and clears it.
void heat_advance(grid::BlockGrid& g, int block, const HeatSlots& s, double dt, bool first_step);

/// Explicit-diffusion stability bound dx^2 / (2 * dims * alpha_max); the
/// driver warns when dt exceeds it.
double heat_stable_dt(const grid::BlockGrid& g, const ThermalConfig& cfg);

}  // namespace flowkit::heat

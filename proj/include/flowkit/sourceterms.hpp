#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowkit/grid.hpp"
#include "flowkit/params.hpp"

namespace flowkit::st {

struct SourceError : std::runtime_error {
    explicit SourceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Outlet buffer relaxation. Faces with an outflow boundary get a zone of
/// width `buffer` where every velocity component is relaxed toward its
/// upstream neighbor along the outlet axis, damping structures before they
/// reach the boundary. The rate is 1/tau with tau = buffer / |u_ref|.
struct OutletConfig {
    double buffer = 0.0;  // width in domain units; 0 disables
    double u_ref = 1.0;
    bool face[3][2] = {{false, false}, {false, false}, {false, false}};

    bool active() const;

    /// Reads out_buffer (and optional out_velRef); outflow faces come from
    /// the domain boundary types, u_ref defaults to the largest configured
    /// inflow magnitude. Validates the buffer against the domain extent.
    static OutletConfig from_params(const params::ParameterSet& rp, const grid::DomainSpec& spec);
};

/// Slot ids touched by the outlet forcing: face velocities and momentum rhs.
struct OutletSlots {
    int face_vel[3];
    int rhs[3];

    static OutletSlots resolve(const grid::BlockGrid& g);
};

/// Adds the buffer relaxation to the momentum rhs fields of one block.
/// Velocity guards must be filled.
void outlet_forcing(grid::BlockGrid& g, int block, const OutletSlots& s, const OutletConfig& cfg);

/// A fixed-temperature wall strip: a physical boundary face, an extent
/// interval on each tangential axis, the wall temperature, and optional
/// nucleation seed positions that are carried along but not simulated.
struct HeaterPatch {
    int axis = 1;
    int side = 0;  // 0 = low boundary, 1 = high
    double lo[3] = {0.0, 0.0, 0.0};  // tangential extent; the normal axis entries are ignored
    double hi[3] = {0.0, 0.0, 0.0};
    double temp = 1.0;
    std::vector<std::array<double, 3>> seeds;
};

/// Parses heater patches from the plain-text format: one `[heater]` section
/// per patch with `face = ylow`, extent keys (`xmin`, `xmax`, ...), `temp`,
/// and repeatable `seed = x y [z]` lines. Extents default to the whole face;
/// temp defaults to `default_temp`. Validates each patch against the domain:
/// the face must be a non-periodic physical boundary and the extent must lie
/// inside it.
std::vector<HeaterPatch> heater_from_file(const std::string& path, const grid::DomainSpec& spec,
                                          double default_temp);

/// Overrides the guard cells of the temperature field over each patch extent
/// so the wall-interpolated temperature equals the patch value; cells outside
/// any patch keep the mirrored (adiabatic) guards the boundary fill wrote.
/// Idempotent. Call after guard fill.
void heater_apply(grid::BlockGrid& g, int block, int temp_slot,
                  const std::vector<HeaterPatch>& patches);

}  // namespace flowkit::st

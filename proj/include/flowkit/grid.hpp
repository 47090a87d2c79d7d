#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowkit/array.hpp"
#include "flowkit/composer.hpp"
#include "flowkit/params.hpp"
#include "flowkit/util.hpp"

namespace flowkit::grid {

using composer::Centering;

struct GridError : std::runtime_error {
    explicit GridError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class BcType { Periodic, Inflow, Outflow, NoSlip, Slip };

std::optional<BcType> bc_type_from(std::string_view name);
const char* bc_type_name(BcType t);

/// Uniform block-structured Cartesian domain. Axis 0/1/2 = x/y/z; in 2-d the
/// z axis is inactive (one cell, no guards).
struct DomainSpec {
    int dims = 2;
    double lo[3] = {0.0, 0.0, 0.0};
    double hi[3] = {1.0, 1.0, 1.0};
    int nblocks[3] = {1, 1, 1};  // blocks per axis
    int nb[3] = {8, 8, 1};       // interior cells per block per axis
    int nguard = 2;
    int maxblocks = 1000;
    BcType bc[3][2] = {{BcType::Periodic, BcType::Periodic},
                       {BcType::Periodic, BcType::Periodic},
                       {BcType::Periodic, BcType::Periodic}};
    double inflow[3][2] = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};

    bool axis_active(int a) const { return a < dims; }
    int cells(int a) const { return nblocks[a] * nb[a]; }
    double extent(int a) const { return hi[a] - lo[a]; }

    /// Isotropic cell size; validate() guarantees all active axes agree.
    double dx() const { return extent(0) / cells(0); }

    /// Throws GridError on inconsistent geometry or boundary pairing.
    void validate() const;

    /// Read bounds, block counts, and boundary types from runtime parameters
    /// (xmin, nblockx, xl_boundary_type, xl_inflow_value, ...); block interior
    /// sizes and dimensionality come from the manifest geometry.
    static DomainSpec from_params(const params::ParameterSet& rp, const composer::GeometrySpec& geom);
};

/// One block of the grid plus its physical placement.
struct Tile {
    int index = 0;
    int bx = 0, by = 0, bz = 0;
    double lo[3] = {0.0, 0.0, 0.0};  // physical position of the interior low corner
};

class BlockGrid {
public:
    BlockGrid(const DomainSpec& spec, const std::vector<composer::VariableDecl>& variables);

    const DomainSpec& domain() const { return spec_; }
    double dx() const { return dx_; }
    int nguard() const { return spec_.nguard; }
    int nblocks() const { return static_cast<int>(tiles_.size()); }

    /// Deterministic tile order: z-major, then y, then x fastest.
    const std::vector<Tile>& tiles() const { return tiles_; }

    const std::vector<composer::VariableDecl>& variables() const { return vars_; }
    bool has_var(const std::string& name) const;
    int slot(const std::string& name) const;  // throws GridError on unknown names
    Centering centering(int slot) const { return vars_[slot].centering; }

    Array3& field(int block, int slot) { return fields_[slot][block]; }
    const Array3& field(int block, int slot) const { return fields_[slot][block]; }
    Array3& field(int block, const std::string& name) { return fields_[slot(name)][block]; }
    const Array3& field(int block, const std::string& name) const {
        return fields_[slot(name)][block];
    }

    /// Local index extents of the interior region of `arr` along `axis` for a
    /// variable with the given centering: [first, last).
    int interior_lo(int axis) const { return spec_.axis_active(axis) ? spec_.nguard : 0; }
    int interior_hi(int axis, Centering c) const;

    /// Shape of a block array for one centering.
    int extent(int axis, Centering c) const;

    int block_index(int bx, int by, int bz) const {
        return (bz * spec_.nblocks[1] + by) * spec_.nblocks[0] + bx;
    }

private:
    DomainSpec spec_;
    double dx_ = 0.0;
    std::vector<composer::VariableDecl> vars_;
    std::vector<std::vector<Array3>> fields_;  // [slot][block]
    std::vector<Tile> tiles_;
};

/// Physical coordinate helpers: position of a sample of variable centering `c`
/// at local index (relative to a tile's interior low corner).
inline double coord(const Tile& t, double dx, int axis, Centering c, int local, int nguard,
                    bool active) {
    int rel = local - (active ? nguard : 0);
    bool on_face = (axis == 0 && c == Centering::FaceX) || (axis == 1 && c == Centering::FaceY) ||
                   (axis == 2 && c == Centering::FaceZ);
    double offset = (on_face && active) ? 0.0 : 0.5;
    return t.lo[axis] + (rel + offset) * dx;
}

/// Harmonic mean used for face-centered coefficients.
inline double harmonic_mean(double a, double b) { return 2.0 * a * b / (a + b); }

/// Refresh guard layers for the given variable slots (all registered variables
/// when `slots` is empty): halo exchange between neighboring blocks, then the
/// physical boundary condition of each face, swept axis by axis so corner
/// guards compose. FACE* variables are treated as velocity components of their
/// axis; CENTER variables as scalars.
void fill_guard_cells(BlockGrid& grid, const WorkerPool& pool, const std::vector<int>& slots = {});

}  // namespace flowkit::grid

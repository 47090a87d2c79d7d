#include "flowkit/grid.hpp"

#include <cmath>

namespace flowkit::grid {

std::optional<BcType> bc_type_from(std::string_view name) {
    if (name == "periodic") return BcType::Periodic;
    if (name == "inflow_ins") return BcType::Inflow;
    if (name == "outflow_ins") return BcType::Outflow;
    if (name == "noslip_ins") return BcType::NoSlip;
    if (name == "slip_ins") return BcType::Slip;
    return std::nullopt;
}

const char* bc_type_name(BcType t) {
    switch (t) {
        case BcType::Periodic: return "periodic";
        case BcType::Inflow: return "inflow_ins";
        case BcType::Outflow: return "outflow_ins";
        case BcType::NoSlip: return "noslip_ins";
        case BcType::Slip: return "slip_ins";
    }
    return "?";
}

void DomainSpec::validate() const {
    if (dims != 2 && dims != 3) throw GridError("dims must be 2 or 3");
    if (nguard < 2) throw GridError("nguard must be at least 2");
    long nblk = 1;
    for (int a = 0; a < dims; ++a) {
        if (hi[a] <= lo[a])
            throw GridError("domain is empty along axis " + std::to_string(a));
        if (nblocks[a] < 1 || nb[a] < nguard)
            throw GridError("bad block layout along axis " + std::to_string(a));
        nblk *= nblocks[a];
        if (bc[a][0] == BcType::Periodic || bc[a][1] == BcType::Periodic) {
            if (bc[a][0] != bc[a][1])
                throw GridError("periodic boundary must pair up along axis " + std::to_string(a));
        }
    }
    if (nblk > maxblocks)
        throw GridError("block count " + std::to_string(nblk) + " exceeds maxblocks " +
                        std::to_string(maxblocks));
    double d0 = extent(0) / cells(0);
    for (int a = 1; a < dims; ++a) {
        double da = extent(a) / cells(a);
        if (std::abs(da - d0) > 1e-12 * d0)
            throw GridError("cells are not isotropic: dx=" + format_real(d0) +
                            " vs axis " + std::to_string(a) + " spacing " + format_real(da));
    }
}

DomainSpec DomainSpec::from_params(const params::ParameterSet& rp,
                                   const composer::GeometrySpec& geom) {
    DomainSpec d;
    d.dims = geom.dims;
    d.nb[0] = geom.nxb;
    d.nb[1] = geom.nyb;
    d.nb[2] = geom.dims == 3 ? geom.nzb : 1;
    d.maxblocks = geom.maxblocks;

    const char* axis_letter = "xyz";
    for (int a = 0; a < d.dims; ++a) {
        std::string ax(1, axis_letter[a]);
        if (rp.has(ax + "min")) d.lo[a] = rp.real(ax + "min");
        if (rp.has(ax + "max")) d.hi[a] = rp.real(ax + "max");
        std::string nb_name = "nblock" + ax;
        if (rp.has(nb_name)) d.nblocks[a] = static_cast<int>(rp.integer(nb_name));
        for (int side = 0; side < 2; ++side) {
            std::string face = ax + (side == 0 ? "l" : "r");
            std::string bc_name = face + "_boundary_type";
            if (rp.has(bc_name)) {
                auto t = bc_type_from(rp.str(bc_name));
                if (!t)
                    throw GridError("unknown boundary type '" + rp.str(bc_name) + "' for " +
                                    bc_name);
                d.bc[a][side] = *t;
            }
            std::string inflow_name = face + "_inflow_value";
            if (rp.has(inflow_name)) d.inflow[a][side] = rp.real(inflow_name);
        }
    }
    d.validate();
    return d;
}

int BlockGrid::extent(int axis, Centering c) const {
    if (!spec_.axis_active(axis)) return 1;
    int n = spec_.nb[axis] + 2 * spec_.nguard;
    bool on_face = (axis == 0 && c == Centering::FaceX) || (axis == 1 && c == Centering::FaceY) ||
                   (axis == 2 && c == Centering::FaceZ);
    return on_face ? n + 1 : n;
}

int BlockGrid::interior_hi(int axis, Centering c) const {
    if (!spec_.axis_active(axis)) return 1;
    int hi = spec_.nguard + spec_.nb[axis];
    bool on_face = (axis == 0 && c == Centering::FaceX) || (axis == 1 && c == Centering::FaceY) ||
                   (axis == 2 && c == Centering::FaceZ);
    return on_face ? hi + 1 : hi;
}

BlockGrid::BlockGrid(const DomainSpec& spec, const std::vector<composer::VariableDecl>& variables)
    : spec_(spec), vars_(variables) {
    spec_.validate();
    if (spec_.dims == 2) {
        spec_.nb[2] = 1;
        spec_.nblocks[2] = 1;
    }
    dx_ = spec_.dx();

    int nbx = spec_.nblocks[0], nby = spec_.nblocks[1], nbz = spec_.nblocks[2];
    tiles_.reserve(static_cast<size_t>(nbx) * nby * nbz);
    for (int bz = 0; bz < nbz; ++bz)
        for (int by = 0; by < nby; ++by)
            for (int bx = 0; bx < nbx; ++bx) {
                Tile t;
                t.index = static_cast<int>(tiles_.size());
                t.bx = bx;
                t.by = by;
                t.bz = bz;
                int bc[3] = {bx, by, bz};
                for (int a = 0; a < 3; ++a) t.lo[a] = spec_.lo[a] + bc[a] * spec_.nb[a] * dx_;
                tiles_.push_back(t);
            }

    fields_.resize(vars_.size());
    for (size_t s = 0; s < vars_.size(); ++s) {
        int nx = extent(0, vars_[s].centering);
        int ny = extent(1, vars_[s].centering);
        int nz = extent(2, vars_[s].centering);
        fields_[s].assign(tiles_.size(), Array3(nx, ny, nz));
    }
}

bool BlockGrid::has_var(const std::string& name) const {
    for (const auto& v : vars_)
        if (v.name == name) return true;
    return false;
}

int BlockGrid::slot(const std::string& name) const {
    for (size_t s = 0; s < vars_.size(); ++s)
        if (vars_[s].name == name) return static_cast<int>(s);
    throw GridError("variable '" + name + "' is not registered");
}

namespace {

// Apply fn(i, j, k) over the full extents of two transverse axes with the
// normal axis index fixed later; axes are permuted so `n` is the guard axis.
template <typename F>
void for_plane(const Array3& shape, int axis, F&& fn) {
    int ext[3] = {shape.nx(), shape.ny(), shape.nz()};
    int t1 = (axis + 1) % 3, t2 = (axis + 2) % 3;
    for (int b = 0; b < ext[t2]; ++b)
        for (int a = 0; a < ext[t1]; ++a) fn(a, b);
}

struct AxisView {
    Array3* arr;
    int axis;
    int idx[3];

    double& at(int n, int a, int b) {
        idx[axis] = n;
        idx[(axis + 1) % 3] = a;
        idx[(axis + 2) % 3] = b;
        return (*arr)(idx[0], idx[1], idx[2]);
    }
};

struct ConstAxisView {
    const Array3* arr;
    int axis;
    int idx[3] = {0, 0, 0};

    double at(int n, int a, int b) {
        idx[axis] = n;
        idx[(axis + 1) % 3] = a;
        idx[(axis + 2) % 3] = b;
        return (*arr)(idx[0], idx[1], idx[2]);
    }
};

}  // namespace

void fill_guard_cells(BlockGrid& grid, const WorkerPool& pool, const std::vector<int>& slots) {
    std::vector<int> active = slots;
    if (active.empty())
        for (size_t s = 0; s < grid.variables().size(); ++s) active.push_back(static_cast<int>(s));
    for (int s : active)
        if (s < 0 || s >= static_cast<int>(grid.variables().size()))
            throw GridError("guard fill requested for an unregistered variable slot");

    const DomainSpec& spec = grid.domain();
    int g = spec.nguard;

    for (int axis = 0; axis < 3; ++axis) {
        if (!spec.axis_active(axis)) continue;
        int nb = spec.nb[axis];

        long work = static_cast<long>(grid.nblocks()) * static_cast<long>(active.size());
        pool.parallel_chunks(work, [&](long w0, long w1) {
            for (long w = w0; w < w1; ++w) {
                int block = static_cast<int>(w / active.size());
                int slot = active[static_cast<size_t>(w % active.size())];
                Centering c = grid.centering(slot);
                bool normal_face = (axis == 0 && c == Centering::FaceX) ||
                                   (axis == 1 && c == Centering::FaceY) ||
                                   (axis == 2 && c == Centering::FaceZ);
                bool velocity = c != Centering::Center;

                const Tile& t = grid.tiles()[block];
                int bcoord[3] = {t.bx, t.by, t.bz};
                Array3& arr = grid.field(block, slot);
                AxisView dst{&arr, axis, {0, 0, 0}};

                for (int side = 0; side < 2; ++side) {
                    bool at_edge = side == 0 ? bcoord[axis] == 0
                                             : bcoord[axis] == spec.nblocks[axis] - 1;
                    BcType bc = spec.bc[axis][side];

                    if (!at_edge || bc == BcType::Periodic) {
                        // Halo exchange (wrapping around for periodic faces).
                        int ncoord[3] = {bcoord[0], bcoord[1], bcoord[2]};
                        int shift = side == 0 ? -1 : 1;
                        ncoord[axis] =
                            (bcoord[axis] + shift + spec.nblocks[axis]) % spec.nblocks[axis];
                        const Array3& src_arr =
                            grid.field(grid.block_index(ncoord[0], ncoord[1], ncoord[2]), slot);
                        ConstAxisView src{&src_arr, axis};

                        // Guard index ranges; FACE-normal arrays also refresh the
                        // shared boundary face from the low-side owner.
                        int lo_n, hi_n;
                        if (side == 0) {
                            lo_n = 0;
                            hi_n = normal_face ? g + 1 : g;
                        } else {
                            lo_n = g + nb + (normal_face ? 1 : 0);
                            hi_n = g + nb + g + (normal_face ? 1 : 0);
                        }
                        for (int n = lo_n; n < hi_n; ++n) {
                            int sn = side == 0 ? n + nb : n - nb;
                            for_plane(arr, axis,
                                      [&](int a, int b) { dst.at(n, a, b) = src.at(sn, a, b); });
                        }
                        continue;
                    }

                    // Physical boundary.
                    double inflow = spec.inflow[axis][side];
                    if (normal_face) {
                        int face = side == 0 ? g : g + nb;
                        int in = side == 0 ? 1 : -1;  // direction into the domain
                        switch (bc) {
                            case BcType::NoSlip:
                            case BcType::Slip:
                                for_plane(arr, axis, [&](int a, int b) {
                                    dst.at(face, a, b) = 0.0;
                                    for (int m = 0; m < g; ++m)
                                        dst.at(face - in * (1 + m), a, b) =
                                            -dst.at(face + in * (1 + m), a, b);
                                });
                                break;
                            case BcType::Inflow:
                                for_plane(arr, axis, [&](int a, int b) {
                                    dst.at(face, a, b) = inflow;
                                    for (int m = 0; m < g; ++m)
                                        dst.at(face - in * (1 + m), a, b) = inflow;
                                });
                                break;
                            case BcType::Outflow:
                                for_plane(arr, axis, [&](int a, int b) {
                                    dst.at(face, a, b) = dst.at(face + in, a, b);
                                    for (int m = 0; m < g; ++m)
                                        dst.at(face - in * (1 + m), a, b) =
                                            dst.at(face + in * (1 + m), a, b);
                                });
                                break;
                            case BcType::Periodic: break;  // handled above
                        }
                    } else {
                        // Cell-like along this axis: guard m mirrors interior m.
                        double sgn = 1.0;
                        if (velocity && (bc == BcType::NoSlip || bc == BcType::Inflow)) sgn = -1.0;
                        int first_guard = side == 0 ? g - 1 : g + nb;   // nearest guard index
                        int first_inner = side == 0 ? g : g + nb - 1;   // nearest interior index
                        int out = side == 0 ? -1 : 1;
                        for_plane(arr, axis, [&](int a, int b) {
                            for (int m = 0; m < g; ++m)
                                dst.at(first_guard + out * m, a, b) =
                                    sgn * dst.at(first_inner - out * m, a, b);
                        });
                    }
                }
            }
        });
    }
}

}  // namespace flowkit::grid

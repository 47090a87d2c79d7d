#include "flowkit/stencils.hpp"

#include <algorithm>
#include <cmath>

namespace flowkit::stencils {

using grid::BlockGrid;
using grid::Centering;
using grid::Tile;

namespace {

struct Idx {
    int v[3];
    Idx moved(int axis, int by) const {
        Idx m = *this;
        m.v[axis] += by;
        return m;
    }
};

double at(const Array3& a, const Idx& p) { return a(p.v[0], p.v[1], p.v[2]); }

int face_axis(Centering c) {
    switch (c) {
        case Centering::FaceX: return 0;
        case Centering::FaceY: return 1;
        case Centering::FaceZ: return 2;
        default: return -1;
    }
}

// Advecting velocity component `axis` interpolated to the location of a
// sample with centering c at index p. vel is the face array of `axis`.
double vel_at(const Array3& vel, int axis, Centering c, const Idx& p) {
    int fa = face_axis(c);
    if (fa == axis) return at(vel, p);
    if (fa < 0)  // cell center: mean of the two bounding faces
        return 0.5 * (at(vel, p) + at(vel, p.moved(axis, 1)));
    // face of another axis: mean of the four surrounding faces
    return 0.25 * (at(vel, p) + at(vel, p.moved(axis, 1)) + at(vel, p.moved(fa, -1)) +
                   at(vel, p.moved(fa, -1).moved(axis, 1)));
}

template <typename Fn>
void for_interior(const BlockGrid& g, Centering c, Fn&& fn) {
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = g.interior_lo(a);
        hi[a] = g.interior_hi(a, c);
    }
    for (int k = lo[2]; k < hi[2]; ++k)
        for (int j = lo[1]; j < hi[1]; ++j)
            for (int i = lo[0]; i < hi[0]; ++i) fn(Idx{{i, j, k}});
}

}  // namespace

void advect_upwind(const BlockGrid& g, int block, int q_slot, int velx_slot, int vely_slot,
                   int velz_slot, Array3& out) {
    Centering c = g.centering(q_slot);
    const Array3& q = g.field(block, q_slot);
    if (!out.same_shape(q)) throw StencilError("advect_upwind: output shape mismatch");
    int vslots[3] = {velx_slot, vely_slot, velz_slot};
    const Array3* vel[3] = {nullptr, nullptr, nullptr};
    for (int a = 0; a < 3; ++a) {
        if (!g.domain().axis_active(a)) continue;
        vel[a] = &g.field(block, vslots[a]);
        Centering vc = g.centering(vslots[a]);
        if (face_axis(vc) != a) throw StencilError("advect_upwind: velocity centering mismatch");
    }
    double inv_dx = 1.0 / g.dx();
    for_interior(g, c, [&](const Idx& p) {
        double tend = 0.0;
        for (int a = 0; a < 3; ++a) {
            if (!vel[a]) continue;
            double w = vel_at(*vel[a], a, c, p);
            if (w > 0.0)
                tend -= w * (at(q, p) - at(q, p.moved(a, -1))) * inv_dx;
            else if (w < 0.0)
                tend -= w * (at(q, p.moved(a, 1)) - at(q, p)) * inv_dx;
        }
        out(p.v[0], p.v[1], p.v[2]) = tend;
    });
}

namespace {

// Shared flux-form diffusion; k_cell(p) returns the diffusivity at cell index
// p of the same block.
template <typename KFn>
void diffuse_impl(const BlockGrid& g, int block, int q_slot, Array3& out, KFn&& k_cell) {
    Centering c = g.centering(q_slot);
    const Array3& q = g.field(block, q_slot);
    if (!out.same_shape(q)) throw StencilError("diffuse_central: output shape mismatch");
    int fa = face_axis(c);
    double inv_dx2 = 1.0 / (g.dx() * g.dx());
    for_interior(g, c, [&](const Idx& p) {
        double tend = 0.0;
        for (int a = 0; a < 3; ++a) {
            if (!g.domain().axis_active(a)) continue;
            // Flux difference along a: K_hi*(Q(+1)-Q) - K_lo*(Q-Q(-1)).
            double k_lo, k_hi;
            if (fa == a) {
                // Q on faces of a: flux points are the bounding cell centers.
                k_lo = k_cell(p.moved(a, -1));
                k_hi = k_cell(p);
            } else if (fa < 0) {
                // Q on cells: flux points are faces; harmonic mean across them.
                k_lo = grid::harmonic_mean(k_cell(p.moved(a, -1)), k_cell(p));
                k_hi = grid::harmonic_mean(k_cell(p), k_cell(p.moved(a, 1)));
            } else {
                // Q on faces of fa, flux along a lives at edge midpoints:
                // arithmetic mean of the four cells around the edge.
                Idx cl = p.moved(fa, -1);
                k_lo = 0.25 * (k_cell(p.moved(a, -1)) + k_cell(p) + k_cell(cl.moved(a, -1)) +
                               k_cell(cl));
                k_hi = 0.25 * (k_cell(p) + k_cell(p.moved(a, 1)) + k_cell(cl) +
                               k_cell(cl.moved(a, 1)));
            }
            tend += (k_hi * (at(q, p.moved(a, 1)) - at(q, p)) -
                     k_lo * (at(q, p) - at(q, p.moved(a, -1)))) *
                    inv_dx2;
        }
        out(p.v[0], p.v[1], p.v[2]) = tend;
    });
}

}  // namespace

void diffuse_central(const BlockGrid& g, int block, int q_slot, int k_slot, Array3& out) {
    const Array3& k = g.field(block, k_slot);
    if (g.centering(k_slot) != Centering::Center)
        throw StencilError("diffuse_central: diffusivity must be cell-centered");
    for (size_t c = 0; c < k.size(); ++c)
        if (!(k.data()[c] > 0.0)) throw StencilError("diffuse_central: nonpositive diffusivity");
    diffuse_impl(g, block, q_slot, out, [&](const Idx& p) { return at(k, p); });
}

void diffuse_central(const BlockGrid& g, int block, int q_slot, const Array3& k_cells,
                     Array3& out) {
    if (k_cells.nx() != g.extent(0, Centering::Center) ||
        k_cells.ny() != g.extent(1, Centering::Center) ||
        k_cells.nz() != g.extent(2, Centering::Center))
        throw StencilError("diffuse_central: diffusivity shape mismatch");
    for (size_t c = 0; c < k_cells.size(); ++c)
        if (!(k_cells.data()[c] > 0.0)) throw StencilError("diffuse_central: nonpositive diffusivity");
    diffuse_impl(g, block, q_slot, out, [&](const Idx& p) { return at(k_cells, p); });
}

void diffuse_central(const BlockGrid& g, int block, int q_slot, double k_const, Array3& out) {
    if (!(k_const > 0.0)) throw StencilError("diffuse_central: nonpositive diffusivity");
    diffuse_impl(g, block, q_slot, out, [&](const Idx&) { return k_const; });
}

void integrate_ab2(Array3& q, const Array3& rhs_now, const Array3& rhs_prev, double dt,
                   bool first_step) {
    if (!q.same_shape(rhs_now) || (!first_step && !q.same_shape(rhs_prev)))
        throw StencilError("integrate_ab2: shape mismatch");
    if (!(dt > 0.0)) throw StencilError("integrate_ab2: dt must be positive");
    double* qd = q.data();
    const double* rn = rhs_now.data();
    if (first_step) {
        for (size_t c = 0; c < q.size(); ++c) qd[c] += dt * rn[c];
    } else {
        const double* rp = rhs_prev.data();
        for (size_t c = 0; c < q.size(); ++c) qd[c] += dt * (1.5 * rn[c] - 0.5 * rp[c]);
    }
}

void redistance(grid::BlockGrid& g, int phi_slot, int band_width, int iters,
                const WorkerPool& pool) {
    (void)band_width;  // names the guaranteed band; the sweep runs everywhere
    if (g.centering(phi_slot) != Centering::Center)
        throw StencilError("redistance: level set must be cell-centered");
    double phi_min = 0.0, phi_max = 0.0;
    bool first = true;
    for (int b = 0; b < g.nblocks(); ++b) {
        const Array3& phi = g.field(b, phi_slot);
        for_interior(g, Centering::Center, [&](const Idx& p) {
            double v = at(phi, p);
            if (first) {
                phi_min = phi_max = v;
                first = false;
            }
            phi_min = std::min(phi_min, v);
            phi_max = std::max(phi_max, v);
        });
    }
    if (!(phi_min < 0.0 && phi_max > 0.0))
        throw StencilError("redistance: level set has no sign change");

    double dx = g.dx();
    double tau = 0.5 * dx;
    std::vector<Array3> phi0(g.nblocks()), next(g.nblocks());
    for (int b = 0; b < g.nblocks(); ++b) {
        phi0[b] = g.field(b, phi_slot);
        next[b] = g.field(b, phi_slot);
    }

    for (int it = 0; it < iters; ++it) {
        fill_guard_cells(g, pool, {phi_slot});
        pool.parallel_for(g.nblocks(), [&](long b) {
            const Array3& phi = g.field(static_cast<int>(b), phi_slot);
            const Array3& anchor = phi0[b];
            Array3& out = next[b];
            for_interior(g, Centering::Center, [&](const Idx& p) {
                double a0 = at(anchor, p);
                double s = a0 / std::sqrt(a0 * a0 + dx * dx);
                double grad2 = 0.0;
                for (int a = 0; a < 3; ++a) {
                    if (!g.domain().axis_active(a)) continue;
                    double dm = (at(phi, p) - at(phi, p.moved(a, -1))) / dx;
                    double dp = (at(phi, p.moved(a, 1)) - at(phi, p)) / dx;
                    double lo, hi;
                    if (s > 0.0) {
                        lo = std::max(dm, 0.0);
                        hi = std::min(dp, 0.0);
                    } else {
                        lo = std::min(dm, 0.0);
                        hi = std::max(dp, 0.0);
                    }
                    grad2 += std::max(lo * lo, hi * hi);
                }
                double moved = at(phi, p) + tau * s * (1.0 - std::sqrt(grad2));
                // The anchor sign is inviolable: the interface may sharpen but
                // never jump a cell.
                if (a0 > 0.0 && moved < 0.0) moved = 1e-12 * dx;
                if (a0 < 0.0 && moved > 0.0) moved = -1e-12 * dx;
                out(p.v[0], p.v[1], p.v[2]) = moved;
            });
        });
        pool.parallel_for(g.nblocks(), [&](long b) {
            Array3& phi = g.field(static_cast<int>(b), phi_slot);
            const Array3& out = next[b];
            for_interior(g, Centering::Center, [&](const Idx& p) {
                phi(p.v[0], p.v[1], p.v[2]) = at(out, p);
            });
        });
    }
    fill_guard_cells(g, pool, {phi_slot});
}

void curvature(const BlockGrid& g, int block, int phi_slot, Array3& out) {
    if (g.centering(phi_slot) != Centering::Center)
        throw StencilError("curvature: level set must be cell-centered");
    const Array3& phi = g.field(block, phi_slot);
    if (!out.same_shape(phi)) throw StencilError("curvature: output shape mismatch");
    double dx = g.dx();
    double clamp = 1.0 / dx;

    // Unit normal component along `axis` at the low face of cell p.
    auto face_normal = [&](const Idx& p, int axis) {
        Idx q = p.moved(axis, -1);  // cell on the low side of the face
        double grad[3] = {0.0, 0.0, 0.0};
        grad[axis] = (at(phi, p) - at(phi, q)) / dx;
        for (int t = 0; t < 3; ++t) {
            if (t == axis || !g.domain().axis_active(t)) continue;
            double c_hi = (at(phi, p.moved(t, 1)) - at(phi, p.moved(t, -1))) / (2.0 * dx);
            double c_lo = (at(phi, q.moved(t, 1)) - at(phi, q.moved(t, -1))) / (2.0 * dx);
            grad[t] = 0.5 * (c_hi + c_lo);
        }
        double mag = std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]);
        return grad[axis] / std::max(mag, 1e-12);
    };

    for_interior(g, Centering::Center, [&](const Idx& p) {
        double div = 0.0;
        for (int a = 0; a < 3; ++a) {
            if (!g.domain().axis_active(a)) continue;
            div += (face_normal(p.moved(a, 1), a) - face_normal(p, a)) / dx;
        }
        out(p.v[0], p.v[1], p.v[2]) = std::clamp(div, -clamp, clamp);
    });
}

}  // namespace flowkit::stencils

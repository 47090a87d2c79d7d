#include "flowkit/incompns.hpp"

#include <cmath>

#include "flowkit/stencils.hpp"

namespace flowkit::ins {

using grid::BcType;
using grid::BlockGrid;
using grid::Centering;

namespace {

struct Idx {
    int v[3];
    Idx moved(int axis, int by) const {
        Idx r = *this;
        r.v[axis] += by;
        return r;
    }
};

double at(const Array3& a, const Idx& p) { return a(p.v[0], p.v[1], p.v[2]); }

Centering face_centering(int axis) {
    return axis == 0 ? Centering::FaceX : axis == 1 ? Centering::FaceY : Centering::FaceZ;
}

template <typename Fn>
void for_interior(const BlockGrid& g, Centering c, Fn&& fn) {
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = g.interior_lo(a);
        hi[a] = g.interior_hi(a, c);
    }
    Idx p;
    for (p.v[2] = lo[2]; p.v[2] < hi[2]; ++p.v[2])
        for (p.v[1] = lo[1]; p.v[1] < hi[1]; ++p.v[1])
            for (p.v[0] = lo[0]; p.v[0] < hi[0]; ++p.v[0]) fn(p);
}

double sq(double x) { return x * x; }

}  // namespace

FlowConfig FlowConfig::from_params(const params::ParameterSet& rp, bool var_dens) {
    FlowConfig cfg;
    cfg.var_dens = var_dens;
    cfg.inv_reynolds = rp.real("ins_invReynolds");
    cfg.grav[0] = rp.real("ins_gravX");
    cfg.grav[1] = rp.real("ins_gravY");
    cfg.grav[2] = rp.has("ins_gravZ") ? rp.real("ins_gravZ") : 0.0;
    cfg.dt = rp.real("ins_dt");
    cfg.poisson.tol = rp.real("ins_poisson_tol");
    if (rp.has("ins_poisson_maxiters"))
        cfg.poisson.max_iters = static_cast<int>(rp.integer("ins_poisson_maxiters"));
    if (rp.has("ins_mg_levels"))
        cfg.poisson.mg_levels = static_cast<int>(rp.integer("ins_mg_levels"));
    if (!(cfg.inv_reynolds >= 0.0)) throw FlowError("ins_invReynolds must be nonnegative");
    if (!(cfg.dt > 0.0)) throw FlowError("ins_dt must be positive");
    return cfg;
}

FlowSlots FlowSlots::resolve(const BlockGrid& g, bool var_dens) {
    FlowSlots s{};
    const char* fv[3] = {"velfx", "velfy", "velfz"};
    const char* rh[3] = {"rhfx", "rhfy", "rhfz"};
    const char* ro[3] = {"rofx", "rofy", "rofz"};
    const char* cv[3] = {"velx", "vely", "velz"};
    for (int a = 0; a < 3; ++a) {
        bool need = g.domain().axis_active(a);
        s.face_vel[a] = need || g.has_var(fv[a]) ? g.slot(fv[a]) : -1;
        s.rhs[a] = need || g.has_var(rh[a]) ? g.slot(rh[a]) : -1;
        s.rhs_old[a] = need || g.has_var(ro[a]) ? g.slot(ro[a]) : -1;
        s.cell_vel[a] = need || g.has_var(cv[a]) ? g.slot(cv[a]) : -1;
        if (need && g.centering(s.face_vel[a]) != face_centering(a))
            throw FlowError(std::string(fv[a]) + " must be face-centered on its axis");
        if (need && g.centering(s.rhs[a]) != face_centering(a))
            throw FlowError(std::string(rh[a]) + " must match the velocity centering");
        if (need && g.centering(s.rhs_old[a]) != face_centering(a))
            throw FlowError(std::string(ro[a]) + " must match the velocity centering");
    }
    s.pres = g.slot("pres");
    s.divv = g.slot("divv");
    s.beta = g.slot("pbeta");
    if (var_dens) {
        if (!g.has_var("dens") || !g.has_var("visc"))
            throw FlowError("variable-property flow needs dens and visc fields");
        s.dens = g.slot("dens");
        s.visc = g.slot("visc");
    }
    return s;
}

void ins_advection(BlockGrid& g, int block, const FlowSlots& s) {
    double inv_dx = 1.0 / g.dx();
    for (int a = 0; a < 3; ++a) {
        if (!g.domain().axis_active(a)) continue;
        const Array3& ua = g.field(block, s.face_vel[a]);
        Array3& rhs = g.field(block, s.rhs[a]);
        for_interior(g, face_centering(a), [&](const Idx& p) {
            // flux of ua*ua through the bounding cell centers
            Idx cl = p.moved(a, -1);
            double flo = sq(0.5 * (at(ua, cl) + at(ua, p)));
            double fhi = sq(0.5 * (at(ua, p) + at(ua, p.moved(a, 1))));
            double tend = -(fhi - flo) * inv_dx;
            // cross flux ua*ub through the bounding edge midpoints
            for (int b = 0; b < 3; ++b) {
                if (b == a || !g.domain().axis_active(b)) continue;
                const Array3& ub = g.field(block, s.face_vel[b]);
                auto corner = [&](const Idx& q) {
                    double am = 0.5 * (at(ua, q.moved(b, -1)) + at(ua, q));
                    double bm = 0.5 * (at(ub, q.moved(a, -1)) + at(ub, q));
                    return am * bm;
                };
                tend -= (corner(p.moved(b, 1)) - corner(p)) * inv_dx;
            }
            rhs(p.v[0], p.v[1], p.v[2]) += tend;
        });
    }
}

void ins_diffusion(BlockGrid& g, int block, const FlowSlots& s, const FlowConfig& cfg) {
    Array3 k;
    if (cfg.var_dens) {
        k = g.field(block, s.visc);
        for (size_t c = 0; c < k.size(); ++c) k.data()[c] *= cfg.inv_reynolds;
    }
    for (int a = 0; a < 3; ++a) {
        if (!g.domain().axis_active(a)) continue;
        const Array3& ua = g.field(block, s.face_vel[a]);
        Array3& rhs = g.field(block, s.rhs[a]);
        Array3 tend(ua.nx(), ua.ny(), ua.nz());
        if (cfg.var_dens) {
            stencils::diffuse_central(g, block, s.face_vel[a], k, tend);
            const Array3& rho = g.field(block, s.dens);
            for_interior(g, face_centering(a), [&](const Idx& p) {
                double rf = 0.5 * (at(rho, p.moved(a, -1)) + at(rho, p));
                if (!(rf > 0.0)) throw FlowError("nonpositive face density");
                rhs(p.v[0], p.v[1], p.v[2]) += at(tend, p) / rf;
            });
        } else {
            if (cfg.inv_reynolds == 0.0) continue;
            stencils::diffuse_central(g, block, s.face_vel[a], cfg.inv_reynolds, tend);
            for_interior(g, face_centering(a), [&](const Idx& p) {
                rhs(p.v[0], p.v[1], p.v[2]) += at(tend, p);
            });
        }
    }
}

void ins_gravity(BlockGrid& g, int block, const FlowSlots& s, const FlowConfig& cfg) {
    for (int a = 0; a < 3; ++a) {
        if (!g.domain().axis_active(a) || cfg.grav[a] == 0.0) continue;
        Array3& rhs = g.field(block, s.rhs[a]);
        for_interior(g, face_centering(a), [&](const Idx& p) {
            rhs(p.v[0], p.v[1], p.v[2]) += cfg.grav[a];
        });
    }
}

void ins_predictor(BlockGrid& g, int block, const FlowSlots& s, double dt, bool first_step) {
    for (int a = 0; a < 3; ++a) {
        if (!g.domain().axis_active(a)) continue;
        Array3& u = g.field(block, s.face_vel[a]);
        Array3& rn = g.field(block, s.rhs[a]);
        Array3& rp = g.field(block, s.rhs_old[a]);
        stencils::integrate_ab2(u, rn, rp, dt, first_step);
        rp = rn;
        rn.fill(0.0);
    }
}

grid::PoissonReport ins_project(BlockGrid& g, const FlowSlots& s, const FlowConfig& cfg,
                                const WorkerPool& pool) {
    const grid::DomainSpec& d = g.domain();
    double inv_dx = 1.0 / g.dx();
    int nblocks = g.nblocks();

    std::vector<int> vel_slots;
    for (int a = 0; a < 3; ++a)
        if (d.axis_active(a)) vel_slots.push_back(s.face_vel[a]);

    pool.parallel_for(nblocks, [&](long b) {
        Array3& beta = g.field(static_cast<int>(b), s.beta);
        if (cfg.var_dens) {
            const Array3& rho = g.field(static_cast<int>(b), s.dens);
            for (size_t c = 0; c < beta.size(); ++c) {
                if (!(rho.data()[c] > 0.0)) throw FlowError("nonpositive density");
                beta.data()[c] = 1.0 / rho.data()[c];
            }
        } else {
            beta.fill(1.0);
        }
    });

    // boundary faces take their bc values before the divergence is measured
    std::vector<int> pre_slots = vel_slots;
    pre_slots.push_back(s.beta);
    grid::fill_guard_cells(g, pool, pre_slots);

    pool.parallel_for(nblocks, [&](long b) {
        Array3& divv = g.field(static_cast<int>(b), s.divv);
        divv.fill(0.0);
        for_interior(g, Centering::Center, [&](const Idx& p) {
            double div = 0.0;
            for (int a = 0; a < 3; ++a) {
                if (!d.axis_active(a)) continue;
                const Array3& ua = g.field(static_cast<int>(b), s.face_vel[a]);
                div += at(ua, p.moved(a, 1)) - at(ua, p);
            }
            divv(p.v[0], p.v[1], p.v[2]) = div * inv_dx / cfg.dt;
        });
    });

    std::string beta_name = g.variables()[s.beta].name;
    std::string divv_name = g.variables()[s.divv].name;
    std::string pres_name = g.variables()[s.pres].name;
    auto report = grid::solve_poisson(g, beta_name, divv_name, pres_name, cfg.poisson, pool);
    if (!report.converged)
        throw FlowError("pressure solve stalled at relative residual " +
                        std::to_string(report.residual));

    grid::fill_guard_cells(g, pool, {s.pres});

    pool.parallel_for(nblocks, [&](long bl) {
        int b = static_cast<int>(bl);
        const grid::Tile& t = g.tiles()[b];
        const Array3& pr = g.field(b, s.pres);
        const Array3& beta = g.field(b, s.beta);
        int edge_blk[3] = {t.bx, t.by, t.bz};
        for (int a = 0; a < 3; ++a) {
            if (!d.axis_active(a)) continue;
            Array3& ua = g.field(b, s.face_vel[a]);
            int flo = g.interior_lo(a);
            int fhi = g.interior_hi(a, face_centering(a));
            bool lo_edge = edge_blk[a] == 0;
            bool hi_edge = edge_blk[a] == d.nblocks[a] - 1;
            for_interior(g, face_centering(a), [&](const Idx& p) {
                Idx cl = p.moved(a, -1);
                double grad, bface;
                if (lo_edge && p.v[a] == flo && d.bc[a][0] != BcType::Periodic) {
                    if (d.bc[a][0] != BcType::Outflow) return;
                    grad = 2.0 * at(pr, p) * inv_dx;
                    bface = at(beta, p);
                } else if (hi_edge && p.v[a] == fhi - 1 && d.bc[a][1] != BcType::Periodic) {
                    if (d.bc[a][1] != BcType::Outflow) return;
                    grad = -2.0 * at(pr, cl) * inv_dx;
                    bface = at(beta, cl);
                } else {
                    grad = (at(pr, p) - at(pr, cl)) * inv_dx;
                    bface = grid::harmonic_mean(at(beta, cl), at(beta, p));
                }
                ua(p.v[0], p.v[1], p.v[2]) -= cfg.dt * bface * grad;
            });
        }
    });

    grid::fill_guard_cells(g, pool, vel_slots);
    return report;
}

void ins_face_to_center(BlockGrid& g, int block, const FlowSlots& s) {
    for (int a = 0; a < 3; ++a) {
        if (s.cell_vel[a] < 0) continue;
        Array3& cv = g.field(block, s.cell_vel[a]);
        if (!g.domain().axis_active(a)) {
            cv.fill(0.0);
            continue;
        }
        const Array3& ua = g.field(block, s.face_vel[a]);
        for_interior(g, Centering::Center, [&](const Idx& p) {
            cv(p.v[0], p.v[1], p.v[2]) = 0.5 * (at(ua, p) + at(ua, p.moved(a, 1)));
        });
    }
}

double ins_max_cfl(const BlockGrid& g, const FlowSlots& s, double dt) {
    double vmax = 0.0;
    for (int b = 0; b < g.nblocks(); ++b) {
        for (int a = 0; a < 3; ++a) {
            if (!g.domain().axis_active(a)) continue;
            const Array3& ua = g.field(b, s.face_vel[a]);
            for_interior(g, face_centering(a), [&](const Idx& p) {
                vmax = std::max(vmax, std::fabs(at(ua, p)));
            });
        }
    }
    return vmax * dt / g.dx();
}

}  // namespace flowkit::ins

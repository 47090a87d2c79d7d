#include "flowkit/multiphase.hpp"

#include <cmath>

#include "flowkit/stencils.hpp"

namespace flowkit::mph {

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

}  // namespace

PhaseConfig PhaseConfig::from_params(const params::ParameterSet& rp) {
    PhaseConfig cfg;
    cfg.rho_gas = rp.real("mph_rhoGas");
    cfg.mu_gas = rp.real("mph_muGas");
    cfg.inv_weber = rp.real("mph_invWeber");
    if (rp.has("mph_epsCells")) cfg.eps_cells = rp.real("mph_epsCells");
    if (rp.has("mph_redistance_every"))
        cfg.redistance_every = static_cast<int>(rp.integer("mph_redistance_every"));
    if (rp.has("mph_redistance_iters"))
        cfg.redistance_iters = static_cast<int>(rp.integer("mph_redistance_iters"));
    if (rp.has("ins_gravX")) cfg.grav[0] = rp.real("ins_gravX");
    if (rp.has("ins_gravY")) cfg.grav[1] = rp.real("ins_gravY");
    if (rp.has("ins_gravZ")) cfg.grav[2] = rp.real("ins_gravZ");
    if (!(cfg.rho_gas > 0.0 && cfg.rho_gas <= 1.0))
        throw PhaseError("mph_rhoGas must lie in (0, 1]");
    if (!(cfg.mu_gas > 0.0 && cfg.mu_gas <= 1.0)) throw PhaseError("mph_muGas must lie in (0, 1]");
    if (!(cfg.inv_weber >= 0.0)) throw PhaseError("mph_invWeber must be nonnegative");
    if (!(cfg.eps_cells > 0.0)) throw PhaseError("mph_epsCells must be positive");
    return cfg;
}

PhaseSlots PhaseSlots::resolve(const BlockGrid& g) {
    PhaseSlots s{};
    s.dfun = g.slot("dfun");
    s.rhs = g.slot("dfrh");
    s.rhs_old = g.slot("dfro");
    s.dens = g.slot("dens");
    s.visc = g.slot("visc");
    s.curv = g.slot("curv");
    const char* fv[3] = {"velfx", "velfy", "velfz"};
    const char* mr[3] = {"rhfx", "rhfy", "rhfz"};
    for (int a = 0; a < 3; ++a) {
        bool need = g.domain().axis_active(a);
        s.face_vel[a] = need || g.has_var(fv[a]) ? g.slot(fv[a]) : -1;
        s.mom_rhs[a] = need || g.has_var(mr[a]) ? g.slot(mr[a]) : -1;
    }
    return s;
}

void mph_advect(BlockGrid& g, int block, const PhaseSlots& s, double dt, bool first_step) {
    Array3& rhs = g.field(block, s.rhs);
    const Array3& phi = g.field(block, s.dfun);
    Array3 tend(phi.nx(), phi.ny(), phi.nz());
    stencils::advect_upwind(g, block, s.dfun, s.face_vel[0], s.face_vel[1], s.face_vel[2], tend);
    for_interior(g, Centering::Center, [&](const Idx& p) {
        rhs(p.v[0], p.v[1], p.v[2]) += at(tend, p);
    });
    Array3& phi_mut = g.field(block, s.dfun);
    Array3& rp = g.field(block, s.rhs_old);
    stencils::integrate_ab2(phi_mut, rhs, rp, dt, first_step);
    rp = rhs;
    rhs.fill(0.0);
}

void mph_set_properties(BlockGrid& g, int block, const PhaseSlots& s, const PhaseConfig& cfg) {
    const Array3& phi = g.field(block, s.dfun);
    Array3& rho = g.field(block, s.dens);
    Array3& mu = g.field(block, s.visc);
    double eps = cfg.eps_cells * g.dx();
    for (size_t c = 0; c < phi.size(); ++c) {
        double h = stencils::smoothed_heaviside(phi.data()[c], eps);
        // convex combination keeps both phases exactly on their reference values
        rho.data()[c] = (1.0 - h) + h * cfg.rho_gas;
        mu.data()[c] = (1.0 - h) + h * cfg.mu_gas;
    }
}

void mph_curvature(BlockGrid& g, int block, const PhaseSlots& s) {
    Array3& curv = g.field(block, s.curv);
    stencils::curvature(g, block, s.dfun, curv);
}

void mph_vel_forcing(BlockGrid& g, int block, const PhaseSlots& s, const PhaseConfig& cfg) {
    const Array3& phi = g.field(block, s.dfun);
    const Array3& rho = g.field(block, s.dens);
    const Array3& curv = g.field(block, s.curv);
    double eps = cfg.eps_cells * g.dx();
    double inv_dx = 1.0 / g.dx();
    for (int a = 0; a < 3; ++a) {
        if (!g.domain().axis_active(a)) continue;
        Array3& rhs = g.field(block, s.mom_rhs[a]);
        for_interior(g, face_centering(a), [&](const Idx& p) {
            double f = cfg.grav[a];
            if (cfg.inv_weber > 0.0) {
                Idx cl = p.moved(a, -1);
                double dl = stencils::smoothed_delta(at(phi, cl), eps);
                double dr = stencils::smoothed_delta(at(phi, p), eps);
                if (dl + dr > 0.0) {
                    double kf = (dl * at(curv, cl) + dr * at(curv, p)) / (dl + dr);
                    double grad_h = (stencils::smoothed_heaviside(at(phi, p), eps) -
                                     stencils::smoothed_heaviside(at(phi, cl), eps)) *
                                    inv_dx;
                    double bface = grid::harmonic_mean(1.0 / at(rho, cl), 1.0 / at(rho, p));
                    f -= cfg.inv_weber * kf * grad_h * bface;
                }
            }
            rhs(p.v[0], p.v[1], p.v[2]) += f;
        });
    }
}

bool mph_redistance_if_due(BlockGrid& g, const PhaseSlots& s, const PhaseConfig& cfg, int step,
                           const WorkerPool& pool) {
    if (cfg.redistance_every <= 0 || step % cfg.redistance_every != 0) return false;
    stencils::redistance(g, s.dfun, cfg.redistance_band, cfg.redistance_iters, pool);
    return true;
}

double mph_liquid_volume(const BlockGrid& g, const PhaseSlots& s, const PhaseConfig& cfg) {
    double eps = cfg.eps_cells * g.dx();
    double cell = 1.0;
    for (int a = 0; a < g.domain().dims; ++a) cell *= g.dx();
    double vol = 0.0;
    for (int b = 0; b < g.nblocks(); ++b) {
        const Array3& phi = g.field(b, s.dfun);
        for_interior(g, Centering::Center, [&](const Idx& p) {
            vol += (1.0 - stencils::smoothed_heaviside(at(phi, p), eps)) * cell;
        });
    }
    return vol;
}

}  // namespace flowkit::mph

#include "flowkit/heatad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowkit/stencils.hpp"

namespace flowkit::heat {

using grid::BlockGrid;
using grid::Centering;

namespace {

template <typename Fn>
void for_cells(const BlockGrid& g, Fn&& fn) {
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = g.interior_lo(a);
        hi[a] = g.interior_hi(a, Centering::Center);
    }
    for (int k = lo[2]; k < hi[2]; ++k)
        for (int j = lo[1]; j < hi[1]; ++j)
            for (int i = lo[0]; i < hi[0]; ++i) fn(i, j, k);
}

}  // namespace

ThermalConfig ThermalConfig::from_params(const params::ParameterSet& rp, bool var_diffusion,
                                         bool coupled) {
    ThermalConfig cfg;
    cfg.var_diffusion = var_diffusion;
    cfg.coupled = coupled;
    cfg.alpha = rp.real("ht_alpha");
    if (rp.has("ht_alphaGas")) cfg.alpha_gas = rp.real("ht_alphaGas");
    if (!(cfg.alpha >= 0.0)) throw HeatError("ht_alpha must be nonnegative");
    if (var_diffusion && !(cfg.alpha_gas > 0.0))
        throw HeatError("ht_alphaGas must be positive for blended diffusivity");
    return cfg;
}

HeatSlots HeatSlots::resolve(const BlockGrid& g, const ThermalConfig& cfg) {
    HeatSlots s{};
    s.temp = g.slot("temp");
    s.rhs = g.slot("htrh");
    s.rhs_old = g.slot("htro");
    if (cfg.coupled) {
        const char* fv[3] = {"velfx", "velfy", "velfz"};
        for (int a = 0; a < 3; ++a)
            s.face_vel[a] = g.domain().axis_active(a) || g.has_var(fv[a]) ? g.slot(fv[a]) : -1;
    }
    if (cfg.var_diffusion) {
        if (!g.has_var("dfun"))
            throw HeatError("blended diffusivity needs the level-set field dfun");
        s.dfun = g.slot("dfun");
    }
    return s;
}

void heat_rhs(BlockGrid& g, int block, const HeatSlots& s, const ThermalConfig& cfg) {
    Array3& rhs = g.field(block, s.rhs);
    const Array3& T = g.field(block, s.temp);
    Array3 tend(T.nx(), T.ny(), T.nz());
    if (cfg.coupled) {
        stencils::advect_upwind(g, block, s.temp, s.face_vel[0], s.face_vel[1], s.face_vel[2],
                                tend);
        for_cells(g, [&](int i, int j, int k) { rhs(i, j, k) += tend(i, j, k); });
    }
    if (cfg.alpha > 0.0) {
        if (cfg.var_diffusion) {
            const Array3& phi = g.field(block, s.dfun);
            Array3 kb(T.nx(), T.ny(), T.nz());
            double eps = 2.5 * g.dx();
            for (size_t c = 0; c < kb.size(); ++c) {
                double h = stencils::smoothed_heaviside(phi.data()[c], eps);
                kb.data()[c] = cfg.alpha * (1.0 + (cfg.alpha_gas - 1.0) * h);
            }
            stencils::diffuse_central(g, block, s.temp, kb, tend);
        } else {
            stencils::diffuse_central(g, block, s.temp, cfg.alpha, tend);
        }
        for_cells(g, [&](int i, int j, int k) { rhs(i, j, k) += tend(i, j, k); });
    }
}

void heat_advance(BlockGrid& g, int block, const HeatSlots& s, double dt, bool first_step) {
    Array3& T = g.field(block, s.temp);
    Array3& rn = g.field(block, s.rhs);
    Array3& rp = g.field(block, s.rhs_old);
    stencils::integrate_ab2(T, rn, rp, dt, first_step);
    rp = rn;
    rn.fill(0.0);
}

double heat_stable_dt(const BlockGrid& g, const ThermalConfig& cfg) {
    double amax = cfg.alpha * std::max(1.0, cfg.var_diffusion ? cfg.alpha_gas : 1.0);
    if (amax <= 0.0) return std::numeric_limits<double>::infinity();
    return g.dx() * g.dx() / (2.0 * g.domain().dims * amax);
}

}  // namespace flowkit::heat

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "flowkit/incompns.hpp"
#include "flowkit/multiphase.hpp"
#include "flowkit/stencils.hpp"

using namespace flowkit;
using namespace flowkit::grid;
using namespace flowkit::mph;
using composer::Centering;
using composer::VariableDecl;

namespace {

DomainSpec square(int nblock, int nb, BcType bc_all = BcType::Periodic) {
    DomainSpec d;
    d.dims = 2;
    d.nblocks[0] = d.nblocks[1] = nblock;
    d.nb[0] = d.nb[1] = nb;
    d.nb[2] = 1;
    for (int a = 0; a < 2; ++a)
        for (int s = 0; s < 2; ++s) d.bc[a][s] = bc_all;
    return d;
}

std::vector<VariableDecl> phase_vars() {
    return {{"velfx", Centering::FaceX}, {"velfy", Centering::FaceY},
            {"velfz", Centering::FaceZ}, {"rhfx", Centering::FaceX},
            {"rhfy", Centering::FaceY},  {"rhfz", Centering::FaceZ},
            {"rofx", Centering::FaceX},  {"rofy", Centering::FaceY},
            {"rofz", Centering::FaceZ},  {"pres", Centering::Center},
            {"divv", Centering::Center}, {"pbeta", Centering::Center},
            {"velx", Centering::Center}, {"vely", Centering::Center},
            {"velz", Centering::Center}, {"dens", Centering::Center},
            {"visc", Centering::Center}, {"dfun", Centering::Center},
            {"dfrh", Centering::Center}, {"dfro", Centering::Center},
            {"curv", Centering::Center}};
}

void set_circle(BlockGrid& g, double cx, double cy, double r, double scale = 1.0) {
    int ng = g.nguard();
    for (int b = 0; b < g.nblocks(); ++b) {
        const Tile& t = g.tiles()[b];
        Array3& phi = g.field(b, "dfun");
        for (int j = 0; j < phi.ny(); ++j)
            for (int i = 0; i < phi.nx(); ++i) {
                double x = coord(t, g.dx(), 0, Centering::Center, i, ng, true);
                double y = coord(t, g.dx(), 1, Centering::Center, j, ng, true);
                phi(i, j, 0) = scale * (std::hypot(x - cx, y - cy) - r);
            }
    }
}

void set_faces(BlockGrid& g, double u, double v) {
    for (int b = 0; b < g.nblocks(); ++b) {
        g.field(b, "velfx").fill(u);
        g.field(b, "velfy").fill(v);
    }
}

struct Centroid {
    double x, y;
};

Centroid liquid_centroid(const BlockGrid& g, const PhaseSlots& s, double eps) {
    int ng = g.nguard();
    double cx = 0.0, cy = 0.0, w = 0.0;
    for (int b = 0; b < g.nblocks(); ++b) {
        const Tile& t = g.tiles()[b];
        const Array3& phi = g.field(b, s.dfun);
        for (int j = ng; j < phi.ny() - ng; ++j)
            for (int i = ng; i < phi.nx() - ng; ++i) {
                double h = 1.0 - stencils::smoothed_heaviside(phi(i, j, 0), eps);
                cx += h * coord(t, g.dx(), 0, Centering::Center, i, ng, true);
                cy += h * coord(t, g.dx(), 1, Centering::Center, j, ng, true);
                w += h;
            }
    }
    return {cx / w, cy / w};
}

// range of |grad phi| by central differences over cells within band of the interface
void grad_range(const BlockGrid& g, const PhaseSlots& s, double band, double& lo, double& hi) {
    int ng = g.nguard();
    lo = 1e30;
    hi = 0.0;
    for (int b = 0; b < g.nblocks(); ++b) {
        const Array3& phi = g.field(b, s.dfun);
        for (int j = ng; j < phi.ny() - ng; ++j)
            for (int i = ng; i < phi.nx() - ng; ++i) {
                if (std::fabs(phi(i, j, 0)) >= band) continue;
                double gx = (phi(i + 1, j, 0) - phi(i - 1, j, 0)) / (2 * g.dx());
                double gy = (phi(i, j + 1, 0) - phi(i, j - 1, 0)) / (2 * g.dx());
                double m = std::hypot(gx, gy);
                lo = std::min(lo, m);
                hi = std::max(hi, m);
            }
    }
}

double face_max(const BlockGrid& g) {
    int ng = g.nguard();
    double m = 0.0;
    for (int b = 0; b < g.nblocks(); ++b)
        for (const char* nm : {"velfx", "velfy"}) {
            const Array3& a = g.field(b, nm);
            for (int j = ng; j < a.ny() - ng; ++j)
                for (int i = ng; i < a.nx() - ng; ++i)
                    m = std::max(m, std::fabs(a(i, j, 0)));
        }
    return m;
}

std::vector<double> snapshot(const BlockGrid& g, const char* name) {
    std::vector<double> out;
    for (int b = 0; b < g.nblocks(); ++b) {
        const Array3& a = g.field(b, name);
        out.insert(out.end(), a.data(), a.data() + a.size());
    }
    return out;
}

}  // namespace

TEST_CASE("advection with zero velocity is a bitwise no-op") {
    BlockGrid g(square(2, 16), phase_vars());
    WorkerPool pool(2);
    PhaseSlots s = PhaseSlots::resolve(g);
    set_circle(g, 0.4, 0.6, 0.2);
    set_faces(g, 0.0, 0.0);
    fill_guard_cells(g, pool);
    std::vector<double> before = snapshot(g, "dfun");
    for (int n = 0; n < 6; ++n) {
        for (int b = 0; b < g.nblocks(); ++b) mph_advect(g, b, s, 0.01, n == 0);
        fill_guard_cells(g, pool, {s.dfun});
    }
    CHECK(snapshot(g, "dfun") == before);
}

TEST_CASE("property blend saturates in the pure phases and is monotone between") {
    BlockGrid g(square(1, 16), phase_vars());
    PhaseSlots s = PhaseSlots::resolve(g);
    PhaseConfig cfg;
    cfg.rho_gas = 0.001;
    cfg.mu_gas = 0.02;
    double eps = cfg.eps_cells * g.dx();

    Array3& phi = g.field(0, "dfun");
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(-4.0 * eps, 4.0 * eps);
    for (size_t c = 0; c < phi.size(); ++c) phi.data()[c] = u(rng);
    phi(2, 2, 0) = -10.0 * eps;
    phi(3, 3, 0) = 10.0 * eps;
    phi(4, 4, 0) = 0.0;
    mph_set_properties(g, 0, s, cfg);

    const Array3& rho = g.field(0, "dens");
    const Array3& mu = g.field(0, "visc");
    CHECK(rho(2, 2, 0) == 1.0);
    CHECK(mu(2, 2, 0) == 1.0);
    CHECK(rho(3, 3, 0) == cfg.rho_gas);
    CHECK(mu(3, 3, 0) == cfg.mu_gas);
    CHECK(rho(4, 4, 0) == doctest::Approx(0.5 * (1.0 + cfg.rho_gas)).epsilon(1e-12));
    CHECK(mu(4, 4, 0) == doctest::Approx(0.5 * (1.0 + cfg.mu_gas)).epsilon(1e-12));

    std::vector<std::pair<double, double>> by_phi;
    for (size_t c = 0; c < phi.size(); ++c) {
        CHECK(rho.data()[c] >= cfg.rho_gas);
        CHECK(rho.data()[c] <= 1.0);
        CHECK(mu.data()[c] >= cfg.mu_gas);
        CHECK(mu.data()[c] <= 1.0);
        by_phi.emplace_back(phi.data()[c], rho.data()[c]);
    }
    std::sort(by_phi.begin(), by_phi.end());
    for (size_t c = 1; c < by_phi.size(); ++c)
        CHECK(by_phi[c].second <= by_phi[c - 1].second + 1e-15);
}

TEST_CASE("unit property ratios give constant fields") {
    BlockGrid g(square(1, 16), phase_vars());
    PhaseSlots s = PhaseSlots::resolve(g);
    PhaseConfig cfg;
    set_circle(g, 0.5, 0.5, 0.2);
    mph_set_properties(g, 0, s, cfg);
    const Array3& rho = g.field(0, "dens");
    const Array3& mu = g.field(0, "visc");
    for (size_t c = 0; c < rho.size(); ++c) {
        CHECK(rho.data()[c] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(mu.data()[c] == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("liquid volume agrees with a direct Heaviside quadrature") {
    BlockGrid g(square(2, 16), phase_vars());
    PhaseSlots s = PhaseSlots::resolve(g);
    PhaseConfig cfg;
    set_circle(g, 0.45, 0.55, 0.22);
    int ng = g.nguard();
    double eps = cfg.eps_cells * g.dx();
    double expect = 0.0;
    for (int b = 0; b < g.nblocks(); ++b) {
        const Array3& phi = g.field(b, "dfun");
        for (int j = ng; j < phi.ny() - ng; ++j)
            for (int i = ng; i < phi.nx() - ng; ++i)
                expect += (1.0 - stencils::smoothed_heaviside(phi(i, j, 0), eps)) * g.dx() * g.dx();
    }
    CHECK(mph_liquid_volume(g, s, cfg) == doctest::Approx(expect).epsilon(1e-12));

    for (int b = 0; b < g.nblocks(); ++b) g.field(b, "dfun").fill(1.0);
    CHECK(mph_liquid_volume(g, s, cfg) == 0.0);
    for (int b = 0; b < g.nblocks(); ++b) g.field(b, "dfun").fill(-1.0);
    CHECK(mph_liquid_volume(g, s, cfg) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gravity forcing adds the exact body acceleration on faces") {
    BlockGrid g(square(2, 16), phase_vars());
    PhaseSlots s = PhaseSlots::resolve(g);
    PhaseConfig cfg;
    cfg.inv_weber = 0.0;
    cfg.grav[0] = 0.3;
    cfg.grav[1] = -0.7;
    set_circle(g, 0.5, 0.5, 0.2);
    for (int b = 0; b < g.nblocks(); ++b) {
        g.field(b, "rhfx").fill(0.0);
        g.field(b, "rhfy").fill(0.0);
        mph_vel_forcing(g, b, s, cfg);
    }
    int ng = g.nguard();
    for (int b = 0; b < g.nblocks(); ++b) {
        const Array3& rx = g.field(b, "rhfx");
        const Array3& ry = g.field(b, "rhfy");
        for (int j = ng; j < rx.ny() - ng; ++j)
            for (int i = ng; i < rx.nx() - ng; ++i) CHECK(rx(i, j, 0) == 0.3);
        for (int j = ng; j < ry.ny() - ng; ++j)
            for (int i = ng; i < ry.nx() - ng; ++i) CHECK(ry(i, j, 0) == -0.7);
    }
}

TEST_CASE("flat interface produces no spurious surface tension") {
    BlockGrid g(square(2, 16, BcType::Slip), phase_vars());
    WorkerPool pool(2);
    PhaseSlots s = PhaseSlots::resolve(g);
    PhaseConfig cfg;
    cfg.rho_gas = 0.001;
    cfg.mu_gas = 0.02;
    cfg.inv_weber = 0.004;
    int ng = g.nguard();
    for (int b = 0; b < g.nblocks(); ++b) {
        const Tile& t = g.tiles()[b];
        Array3& phi = g.field(b, "dfun");
        for (int j = 0; j < phi.ny(); ++j)
            for (int i = 0; i < phi.nx(); ++i)
                phi(i, j, 0) = coord(t, g.dx(), 1, Centering::Center, j, ng, true) - 0.5;
    }
    fill_guard_cells(g, pool);
    for (int b = 0; b < g.nblocks(); ++b) {
        mph_set_properties(g, b, s, cfg);
        mph_curvature(g, b, s);
    }
    fill_guard_cells(g, pool, {s.dens, s.visc, s.curv});
    double m = 0.0;
    for (int b = 0; b < g.nblocks(); ++b) {
        g.field(b, "rhfx").fill(0.0);
        g.field(b, "rhfy").fill(0.0);
        mph_vel_forcing(g, b, s, cfg);
        for (const char* nm : {"rhfx", "rhfy"}) {
            const Array3& a = g.field(b, nm);
            for (int j = ng; j < a.ny() - ng; ++j)
                for (int i = ng; i < a.nx() - ng; ++i) m = std::max(m, std::fabs(a(i, j, 0)));
        }
    }
    CHECK(m <= 1e-10);
}

TEST_CASE("constant-curvature surface tension is absorbed by the projection") {
    BlockGrid g(square(2, 32, BcType::Slip), phase_vars());
    WorkerPool pool(4);
    PhaseSlots s = PhaseSlots::resolve(g);
    ins::FlowSlots fs = ins::FlowSlots::resolve(g, true);
    PhaseConfig cfg;
    cfg.rho_gas = 0.001;
    cfg.mu_gas = 0.02;
    cfg.inv_weber = 0.004;
    ins::FlowConfig fcfg;
    fcfg.var_dens = true;
    fcfg.inv_reynolds = 0.01;
    fcfg.dt = 1e-4;
    fcfg.poisson.tol = 1e-11;
    fcfg.poisson.mg_levels = 2;
    fcfg.poisson.max_iters = 4000;

    set_circle(g, 0.5, 0.5, 0.25);
    for (int b = 0; b < g.nblocks(); ++b) g.field(b, "curv").fill(4.0);
    fill_guard_cells(g, pool);
    for (int b = 0; b < g.nblocks(); ++b) mph_set_properties(g, b, s, cfg);
    fill_guard_cells(g, pool, {s.dens, s.visc});

    for (int n = 0; n < 3; ++n) {
        for (int b = 0; b < g.nblocks(); ++b) {
            ins::ins_advection(g, b, fs);
            ins::ins_diffusion(g, b, fs, fcfg);
            mph_vel_forcing(g, b, s, cfg);
            ins::ins_predictor(g, b, fs, fcfg.dt, n == 0);
        }
        ins::ins_project(g, fs, fcfg, pool);
        CHECK(face_max(g) <= 1e-12);
    }
}

TEST_CASE("translated circle lands on the exact centroid") {
    BlockGrid g(square(2, 32), phase_vars());
    WorkerPool pool(4);
    PhaseSlots s = PhaseSlots::resolve(g);
    PhaseConfig cfg;
    cfg.redistance_every = 0;
    set_circle(g, 0.35, 0.5, 0.2);
    set_faces(g, 1.0, 0.0);
    fill_guard_cells(g, pool);

    double vol0 = mph_liquid_volume(g, s, cfg);
    double dt = 0.4 * g.dx();
    int steps = static_cast<int>(std::round(0.4 / dt));
    for (int n = 0; n < steps; ++n) {
        for (int b = 0; b < g.nblocks(); ++b) mph_advect(g, b, s, dt, n == 0);
        fill_guard_cells(g, pool, {s.dfun});
    }
    stencils::redistance(g, s.dfun, cfg.redistance_band, 20, pool);
    fill_guard_cells(g, pool, {s.dfun});

    double vol1 = mph_liquid_volume(g, s, cfg);
    CHECK(std::fabs(vol1 - vol0) / vol0 <= 0.12);

    Centroid c = liquid_centroid(g, s, cfg.eps_cells * g.dx());
    CHECK(std::fabs(c.x - 0.75) <= g.dx());
    CHECK(std::fabs(c.y - 0.5) <= g.dx());

    double lo, hi;
    grad_range(g, s, 3.0 * g.dx(), lo, hi);
    CHECK(lo >= 0.95);
    CHECK(hi <= 1.05);
}

TEST_CASE("quarter revolution keeps the disk on its orbit") {
    BlockGrid g(square(2, 32, BcType::Slip), phase_vars());
    WorkerPool pool(4);
    PhaseSlots s = PhaseSlots::resolve(g);
    PhaseConfig cfg;
    cfg.redistance_every = 5;
    cfg.redistance_iters = 12;
    set_circle(g, 0.5, 0.7, 0.2);
    int ng = g.nguard();
    double pi = std::acos(-1.0);
    for (int b = 0; b < g.nblocks(); ++b) {
        const Tile& t = g.tiles()[b];
        Array3& u = g.field(b, "velfx");
        Array3& v = g.field(b, "velfy");
        for (int j = 0; j < u.ny(); ++j)
            for (int i = 0; i < u.nx(); ++i)
                u(i, j, 0) = -2 * pi * (coord(t, g.dx(), 1, Centering::FaceX, j, ng, true) - 0.5);
        for (int j = 0; j < v.ny(); ++j)
            for (int i = 0; i < v.nx(); ++i)
                v(i, j, 0) = 2 * pi * (coord(t, g.dx(), 0, Centering::FaceY, i, ng, true) - 0.5);
    }
    fill_guard_cells(g, pool);

    double umax = 2 * pi * 0.5 * std::sqrt(2.0);
    double dt = 0.3 * g.dx() / umax;
    int steps = static_cast<int>(std::ceil(0.25 / dt));
    dt = 0.25 / steps;
    double vol0 = mph_liquid_volume(g, s, cfg);
    for (int n = 0; n < steps; ++n) {
        for (int b = 0; b < g.nblocks(); ++b) mph_advect(g, b, s, dt, n == 0);
        fill_guard_cells(g, pool, {s.dfun});
        if (mph_redistance_if_due(g, s, cfg, n + 1, pool)) fill_guard_cells(g, pool, {s.dfun});
    }
    stencils::redistance(g, s.dfun, cfg.redistance_band, 20, pool);
    fill_guard_cells(g, pool, {s.dfun});

    double vol1 = mph_liquid_volume(g, s, cfg);
    CHECK(vol1 > 0.5 * vol0);
    CHECK(vol1 < 1.02 * vol0);

    Centroid c = liquid_centroid(g, s, cfg.eps_cells * g.dx());
    CHECK(std::hypot(c.x - 0.3, c.y - 0.5) <= 1.5 * g.dx());
}

TEST_CASE("redistance honors the cadence parameter") {
    BlockGrid g(square(2, 16), phase_vars());
    WorkerPool pool(2);
    PhaseSlots s = PhaseSlots::resolve(g);
    set_circle(g, 0.5, 0.5, 0.2, 2.0);
    fill_guard_cells(g, pool);

    PhaseConfig off;
    off.redistance_every = 0;
    std::vector<double> before = snapshot(g, "dfun");
    for (int step = 1; step <= 12; ++step) CHECK_FALSE(mph_redistance_if_due(g, s, off, step, pool));
    CHECK(snapshot(g, "dfun") == before);

    PhaseConfig five;
    five.redistance_every = 5;
    for (int step = 1; step <= 4; ++step) CHECK_FALSE(mph_redistance_if_due(g, s, five, step, pool));
    CHECK(snapshot(g, "dfun") == before);
    CHECK(mph_redistance_if_due(g, s, five, 5, pool));
    CHECK(snapshot(g, "dfun") != before);

    PhaseConfig always;
    always.redistance_every = 1;
    for (int step = 1; step <= 3; ++step) CHECK(mph_redistance_if_due(g, s, always, step, pool));
}

TEST_CASE("redistance restores the distance property of a stretched field") {
    BlockGrid g(square(2, 32), phase_vars());
    WorkerPool pool(4);
    PhaseSlots s = PhaseSlots::resolve(g);
    set_circle(g, 0.5, 0.5, 0.25, 2.0);
    fill_guard_cells(g, pool);

    double lo, hi;
    grad_range(g, s, 3.0 * g.dx(), lo, hi);
    CHECK(lo >= 1.5);

    stencils::redistance(g, s.dfun, 6, 20, pool);
    fill_guard_cells(g, pool, {s.dfun});
    grad_range(g, s, 3.0 * g.dx(), lo, hi);
    CHECK(lo >= 0.95);
    CHECK(hi <= 1.05);

    // the zero contour stays put: cells flip sign nowhere near the circle
    int ng = g.nguard();
    for (int b = 0; b < g.nblocks(); ++b) {
        const Tile& t = g.tiles()[b];
        const Array3& phi = g.field(b, "dfun");
        for (int j = ng; j < phi.ny() - ng; ++j)
            for (int i = ng; i < phi.nx() - ng; ++i) {
                double x = coord(t, g.dx(), 0, Centering::Center, i, ng, true);
                double y = coord(t, g.dx(), 1, Centering::Center, j, ng, true);
                double d = std::hypot(x - 0.5, y - 0.5) - 0.25;
                if (std::fabs(d) > g.dx()) CHECK(phi(i, j, 0) * d > 0.0);
            }
    }
}

TEST_CASE("static drop stays quiet and holds the pressure jump") {
    BlockGrid g(square(2, 32, BcType::Slip), phase_vars());
    WorkerPool pool(4);
    PhaseSlots s = PhaseSlots::resolve(g);
    ins::FlowSlots fs = ins::FlowSlots::resolve(g, true);
    PhaseConfig cfg;
    cfg.rho_gas = 0.001;
    cfg.mu_gas = 0.02;
    cfg.inv_weber = 0.004;
    cfg.redistance_every = 0;
    ins::FlowConfig fcfg;
    fcfg.var_dens = true;
    fcfg.inv_reynolds = 0.01;
    fcfg.dt = 1e-4;
    fcfg.poisson.tol = 1e-9;
    fcfg.poisson.mg_levels = 2;
    fcfg.poisson.max_iters = 4000;

    double r = 0.25;
    set_circle(g, 0.5, 0.5, r);
    fill_guard_cells(g, pool);

    for (int n = 0; n < 20; ++n) {
        for (int b = 0; b < g.nblocks(); ++b) {
            mph_set_properties(g, b, s, cfg);
            mph_curvature(g, b, s);
        }
        fill_guard_cells(g, pool, {s.dens, s.visc, s.curv});
        for (int b = 0; b < g.nblocks(); ++b) {
            ins::ins_advection(g, b, fs);
            ins::ins_diffusion(g, b, fs, fcfg);
            mph_vel_forcing(g, b, s, cfg);
            ins::ins_predictor(g, b, fs, fcfg.dt, n == 0);
        }
        ins::ins_project(g, fs, fcfg, pool);
        for (int b = 0; b < g.nblocks(); ++b) mph_advect(g, b, s, fcfg.dt, n == 0);
        fill_guard_cells(g, pool, {s.dfun});
    }

    double bound = 1e-3 * std::sqrt(cfg.inv_weber / g.dx());
    CHECK(face_max(g) <= bound);

    int ng = g.nguard();
    double eps = cfg.eps_cells * g.dx();
    double pin = 0.0, pout = 0.0;
    int nin = 0, nout = 0;
    for (int b = 0; b < g.nblocks(); ++b) {
        const Array3& phi = g.field(b, "dfun");
        const Array3& p = g.field(b, "pres");
        for (int j = ng; j < phi.ny() - ng; ++j)
            for (int i = ng; i < phi.nx() - ng; ++i) {
                if (phi(i, j, 0) < -2 * eps) {
                    pin += p(i, j, 0);
                    ++nin;
                } else if (phi(i, j, 0) > 2 * eps) {
                    pout += p(i, j, 0);
                    ++nout;
                }
            }
    }
    double jump = pin / nin - pout / nout;
    double laplace = cfg.inv_weber / r;
    CHECK(std::fabs(jump - laplace) / laplace <= 0.25);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "flowkit/incompns.hpp"
#include "flowkit/stencils.hpp"

using namespace flowkit;
using namespace flowkit::grid;
using namespace flowkit::ins;
using composer::Centering;
using composer::ParamType;
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

std::vector<VariableDecl> flow_vars() {
    return {{"velfx", Centering::FaceX}, {"velfy", Centering::FaceY},
            {"velfz", Centering::FaceZ}, {"rhfx", Centering::FaceX},
            {"rhfy", Centering::FaceY},  {"rhfz", Centering::FaceZ},
            {"rofx", Centering::FaceX},  {"rofy", Centering::FaceY},
            {"rofz", Centering::FaceZ},  {"pres", Centering::Center},
            {"divv", Centering::Center}, {"pbeta", Centering::Center},
            {"velx", Centering::Center}, {"vely", Centering::Center},
            {"velz", Centering::Center}, {"dens", Centering::Center},
            {"visc", Centering::Center}};
}

void randomize(Array3& a, std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    for (size_t c = 0; c < a.size(); ++c) a.data()[c] = u(rng);
}

double max_abs(const Array3& a) {
    double m = 0.0;
    for (size_t c = 0; c < a.size(); ++c) m = std::max(m, std::fabs(a.data()[c]));
    return m;
}

// Straight-loop references for one interior point, written from the
// divergence-form definitions with explicit index arithmetic.

double ref_adv_x(const Array3& u, const Array3& v, int i, int j, double dx) {
    double fxx_hi = 0.5 * (u(i, j, 0) + u(i + 1, j, 0));
    double fxx_lo = 0.5 * (u(i - 1, j, 0) + u(i, j, 0));
    double t = -(fxx_hi * fxx_hi - fxx_lo * fxx_lo) / dx;
    double uy_hi = 0.5 * (u(i, j, 0) + u(i, j + 1, 0));
    double vy_hi = 0.5 * (v(i - 1, j + 1, 0) + v(i, j + 1, 0));
    double uy_lo = 0.5 * (u(i, j - 1, 0) + u(i, j, 0));
    double vy_lo = 0.5 * (v(i - 1, j, 0) + v(i, j, 0));
    t -= (uy_hi * vy_hi - uy_lo * vy_lo) / dx;
    return t;
}

double ref_adv_y(const Array3& u, const Array3& v, int i, int j, double dx) {
    double fyy_hi = 0.5 * (v(i, j, 0) + v(i, j + 1, 0));
    double fyy_lo = 0.5 * (v(i, j - 1, 0) + v(i, j, 0));
    double t = -(fyy_hi * fyy_hi - fyy_lo * fyy_lo) / dx;
    double vx_hi = 0.5 * (v(i, j, 0) + v(i + 1, j, 0));
    double ux_hi = 0.5 * (u(i + 1, j - 1, 0) + u(i + 1, j, 0));
    double vx_lo = 0.5 * (v(i - 1, j, 0) + v(i, j, 0));
    double ux_lo = 0.5 * (u(i, j - 1, 0) + u(i, j, 0));
    t -= (vx_hi * ux_hi - vx_lo * ux_lo) / dx;
    return t;
}

double hmean(double a, double b) { return 2.0 * a * b / (a + b); }

// varDens x-face viscous tendency: div(k grad u) / rho_face with k cell
// centered, edge coefficients the four-cell arithmetic mean.
double ref_diff_var_x(const Array3& u, const Array3& k, const Array3& rho, int i, int j,
                      double dx) {
    double inv_dx2 = 1.0 / (dx * dx);
    double k_lo = k(i - 1, j, 0);
    double k_hi = k(i, j, 0);
    double t = (k_hi * (u(i + 1, j, 0) - u(i, j, 0)) - k_lo * (u(i, j, 0) - u(i - 1, j, 0))) *
               inv_dx2;
    double ke_lo = 0.25 * (k(i, j - 1, 0) + k(i, j, 0) + k(i - 1, j - 1, 0) + k(i - 1, j, 0));
    double ke_hi = 0.25 * (k(i, j, 0) + k(i, j + 1, 0) + k(i - 1, j, 0) + k(i - 1, j + 1, 0));
    t += (ke_hi * (u(i, j + 1, 0) - u(i, j, 0)) - ke_lo * (u(i, j, 0) - u(i, j - 1, 0))) *
         inv_dx2;
    return t / (0.5 * (rho(i - 1, j, 0) + rho(i, j, 0)));
}

params::Value real_value(double v) {
    params::Value x;
    x.type = ParamType::Real;
    x.real = v;
    return x;
}

// Divergence of the face velocities at one owned cell, straight from the
// grid arrays.
double cell_div(const BlockGrid& g, int b, int i, int j, int k) {
    const Array3& u = g.field(b, "velfx");
    const Array3& v = g.field(b, "velfy");
    double d = (u(i + 1, j, k) - u(i, j, k) + v(i, j + 1, k) - v(i, j, k)) / g.dx();
    if (g.domain().axis_active(2)) {
        const Array3& w = g.field(b, "velfz");
        d += (w(i, j, k + 1) - w(i, j, k)) / g.dx();
    }
    return d;
}

double max_div(const BlockGrid& g) {
    int ng = g.nguard();
    double m = 0.0;
    for (int b = 0; b < g.nblocks(); ++b)
        for (int k = g.interior_lo(2); k < g.interior_hi(2, Centering::Center); ++k)
            for (int j = ng; j < ng + g.domain().nb[1]; ++j)
                for (int i = ng; i < ng + g.domain().nb[0]; ++i)
                    m = std::max(m, std::fabs(cell_div(g, b, i, j, k)));
    return m;
}

}  // namespace

TEST_CASE("momentum advection: uniform and shear flows") {
    BlockGrid g(square(1, 16), flow_vars());
    WorkerPool pool(1);
    FlowSlots s = FlowSlots::resolve(g, false);

    g.field(0, "velfx").fill(2.3);
    g.field(0, "velfy").fill(-1.2);
    ins_advection(g, 0, s);
    CHECK(max_abs(g.field(0, "rhfx")) == 0.0);
    CHECK(max_abs(g.field(0, "rhfy")) == 0.0);

    // u = (y, 0): nonlinear term vanishes analytically
    const Tile& t = g.tiles()[0];
    Array3& u = g.field(0, "velfx");
    for (int j = 0; j < u.ny(); ++j) {
        double y = coord(t, g.dx(), 1, Centering::FaceX, j, g.nguard(), true);
        for (int i = 0; i < u.nx(); ++i) u(i, j, 0) = y;
    }
    g.field(0, "velfy").fill(0.0);
    ins_advection(g, 0, s);
    CHECK(max_abs(g.field(0, "rhfx")) <= 1e-12);
    CHECK(max_abs(g.field(0, "rhfy")) <= 1e-12);
}

TEST_CASE("momentum advection matches a straight-loop oracle") {
    BlockGrid g(square(1, 10), flow_vars());
    FlowSlots s = FlowSlots::resolve(g, false);
    std::mt19937 rng(101);
    randomize(g.field(0, "velfx"), rng);
    randomize(g.field(0, "velfy"), rng);
    ins_advection(g, 0, s);

    const Array3& u = g.field(0, "velfx");
    const Array3& v = g.field(0, "velfy");
    const Array3& rx = g.field(0, "rhfx");
    const Array3& ry = g.field(0, "rhfy");
    int ng = g.nguard(), nb = g.domain().nb[0];
    double dx = g.dx();
    for (int j = ng; j < ng + nb; ++j) {
        for (int i = ng; i <= ng + nb; ++i)
            CHECK(rx(i, j, 0) == doctest::Approx(ref_adv_x(u, v, i, j, dx)).epsilon(1e-14));
        for (int i = ng; i <= ng + nb; ++i)
            CHECK(ry(j, i, 0) == doctest::Approx(ref_adv_y(u, v, j, i, dx)).epsilon(1e-14));
    }
}

TEST_CASE("momentum advection covers the z cross terms") {
    DomainSpec d;
    d.dims = 3;
    d.nblocks[0] = d.nblocks[1] = d.nblocks[2] = 1;
    d.nb[0] = d.nb[1] = d.nb[2] = 6;
    for (int a = 0; a < 3; ++a) d.bc[a][0] = d.bc[a][1] = BcType::Periodic;
    BlockGrid g(d, flow_vars());
    FlowSlots s = FlowSlots::resolve(g, false);
    std::mt19937 rng(77);
    for (const char* n : {"velfx", "velfy", "velfz"}) randomize(g.field(0, n), rng);
    ins_advection(g, 0, s);

    const Array3& u = g.field(0, "velfx");
    const Array3& w = g.field(0, "velfz");
    const Array3& rx = g.field(0, "rhfx");
    double dx = g.dx();
    int ng = g.nguard(), nb = 6;
    for (int k = ng; k < ng + nb; ++k)
        for (int j = ng; j < ng + nb; ++j)
            for (int i = ng; i <= ng + nb; ++i) {
                double fxx_hi = 0.5 * (u(i, j, k) + u(i + 1, j, k));
                double fxx_lo = 0.5 * (u(i - 1, j, k) + u(i, j, k));
                double t = -(fxx_hi * fxx_hi - fxx_lo * fxx_lo) / dx;
                const Array3& v = g.field(0, "velfy");
                double uy_hi = 0.5 * (u(i, j, k) + u(i, j + 1, k));
                double vy_hi = 0.5 * (v(i - 1, j + 1, k) + v(i, j + 1, k));
                double uy_lo = 0.5 * (u(i, j - 1, k) + u(i, j, k));
                double vy_lo = 0.5 * (v(i - 1, j, k) + v(i, j, k));
                t -= (uy_hi * vy_hi - uy_lo * vy_lo) / dx;
                double uz_hi = 0.5 * (u(i, j, k) + u(i, j, k + 1));
                double wz_hi = 0.5 * (w(i - 1, j, k + 1) + w(i, j, k + 1));
                double uz_lo = 0.5 * (u(i, j, k - 1) + u(i, j, k));
                double wz_lo = 0.5 * (w(i - 1, j, k) + w(i, j, k));
                t -= (uz_hi * wz_hi - uz_lo * wz_lo) / dx;
                CHECK(rx(i, j, k) == doctest::Approx(t).epsilon(1e-14));
            }
}

TEST_CASE("momentum advection conserves the periodic interior sum") {
    BlockGrid g(square(2, 8), flow_vars());
    WorkerPool pool(1);
    FlowSlots s = FlowSlots::resolve(g, false);
    std::mt19937 rng(5);
    int ng = g.nguard(), nb = 8;
    for (int b = 0; b < g.nblocks(); ++b) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        Array3& ux = g.field(b, "velfx");
        Array3& uy = g.field(b, "velfy");
        // owned faces only; shadows and guards come from the fill
        for (int j = ng; j < ng + nb; ++j)
            for (int i = ng + 1; i <= ng + nb; ++i) {
                ux(i, j, 0) = u(rng);
                uy(j, i, 0) = u(rng);
            }
    }
    fill_guard_cells(g, pool, {g.slot("velfx"), g.slot("velfy")});
    for (int b = 0; b < g.nblocks(); ++b) ins_advection(g, b, s);

    for (const char* n : {"rhfx", "rhfy"}) {
        double sum = 0.0;
        for (int b = 0; b < g.nblocks(); ++b) {
            const Array3& r = g.field(b, n);
            bool fx = std::string(n) == "rhfx";
            for (int j = ng; j < ng + nb; ++j)
                for (int i = ng + 1; i <= ng + nb; ++i) sum += fx ? r(i, j, 0) : r(j, i, 0);
        }
        CHECK(std::fabs(sum) <= 1e-12);
    }
}

TEST_CASE("viscous tendency: quadratic profile and degenerate properties") {
    BlockGrid g(square(1, 16), flow_vars());
    FlowSlots s = FlowSlots::resolve(g, true);
    FlowConfig cfg;
    cfg.inv_reynolds = 0.01;

    const Tile& t = g.tiles()[0];
    Array3& u = g.field(0, "velfx");
    for (int j = 0; j < u.ny(); ++j) {
        double y = coord(t, g.dx(), 1, Centering::FaceX, j, g.nguard(), true);
        for (int i = 0; i < u.nx(); ++i) u(i, j, 0) = y * y;
    }
    g.field(0, "velfy").fill(0.0);
    ins_diffusion(g, 0, s, cfg);
    const Array3& rx = g.field(0, "rhfx");
    int ng = g.nguard();
    for (int j = ng; j < ng + 16; ++j)
        for (int i = ng; i <= ng + 16; ++i)
            CHECK(rx(i, j, 0) == doctest::Approx(2.0 * cfg.inv_reynolds).epsilon(1e-10));

    // unit properties reproduce the constant-coefficient path exactly
    std::mt19937 rng(19);
    randomize(g.field(0, "velfx"), rng);
    randomize(g.field(0, "velfy"), rng);
    g.field(0, "dens").fill(1.0);
    g.field(0, "visc").fill(1.0);
    g.field(0, "rhfx").fill(0.0);
    g.field(0, "rhfy").fill(0.0);
    ins_diffusion(g, 0, s, cfg);
    Array3 cx = g.field(0, "rhfx");
    Array3 cy = g.field(0, "rhfy");
    g.field(0, "rhfx").fill(0.0);
    g.field(0, "rhfy").fill(0.0);
    FlowConfig vcfg = cfg;
    vcfg.var_dens = true;
    ins_diffusion(g, 0, s, vcfg);
    double dmax = 0.0;
    for (size_t c = 0; c < cx.size(); ++c)
        dmax = std::max(dmax, std::fabs(cx.data()[c] - g.field(0, "rhfx").data()[c]));
    for (size_t c = 0; c < cy.size(); ++c)
        dmax = std::max(dmax, std::fabs(cy.data()[c] - g.field(0, "rhfy").data()[c]));
    CHECK(dmax <= 1e-14);
}

TEST_CASE("variable-property viscous tendency matches the oracle") {
    BlockGrid g(square(1, 12), flow_vars());
    FlowSlots s = FlowSlots::resolve(g, true);
    FlowConfig cfg;
    cfg.var_dens = true;
    cfg.inv_reynolds = 0.37;
    std::mt19937 rng(23);
    randomize(g.field(0, "velfx"), rng);
    randomize(g.field(0, "velfy"), rng);
    randomize(g.field(0, "dens"), rng, 0.5, 2.0);
    randomize(g.field(0, "visc"), rng, 0.5, 2.0);
    ins_diffusion(g, 0, s, cfg);

    Array3 k = g.field(0, "visc");
    for (size_t c = 0; c < k.size(); ++c) k.data()[c] *= cfg.inv_reynolds;
    const Array3& u = g.field(0, "velfx");
    const Array3& rho = g.field(0, "dens");
    const Array3& rx = g.field(0, "rhfx");
    int ng = g.nguard();
    for (int j = ng; j < ng + 12; ++j)
        for (int i = ng; i <= ng + 12; ++i)
            CHECK(rx(i, j, 0) ==
                  doctest::Approx(ref_diff_var_x(u, k, rho, i, j, g.dx())).epsilon(1e-14));
}

TEST_CASE("predictor: Euler start and AB2 telescoping") {
    BlockGrid g(square(1, 8), flow_vars());
    FlowSlots s = FlowSlots::resolve(g, false);
    double dt = 0.25;

    // no tendencies: u* = u
    std::mt19937 rng(3);
    randomize(g.field(0, "velfx"), rng);
    Array3 before = g.field(0, "velfx");
    ins_predictor(g, 0, s, dt, true);
    for (size_t c = 0; c < before.size(); ++c)
        CHECK(g.field(0, "velfx").data()[c] == before.data()[c]);

    // gravity from rest, first step: dt g on every face
    FlowConfig cfg;
    cfg.grav[0] = 0.0;
    cfg.grav[1] = -9.8;
    g.field(0, "velfx").fill(0.0);
    g.field(0, "velfy").fill(0.0);
    ins_gravity(g, 0, s, cfg);
    ins_predictor(g, 0, s, dt, true);
    int ng = g.nguard();
    CHECK(g.field(0, "velfx")(ng + 1, ng + 1, 0) == 0.0);
    CHECK(g.field(0, "velfy")(ng + 1, ng + 1, 0) == doctest::Approx(dt * -9.8).epsilon(1e-15));
    CHECK(max_abs(g.field(0, "rhfy")) == 0.0);               // cleared for the next step
    CHECK(g.field(0, "rofy")(ng + 1, ng + 1, 0) == -9.8);    // kept as history

    // constant tendency over two steps telescopes to 2 dt c
    g.field(0, "velfx").fill(0.0);
    g.field(0, "rofx").fill(0.0);
    Array3& rx = g.field(0, "rhfx");
    auto add_c = [&](double c) {
        for (int j = ng; j < ng + 8; ++j)
            for (int i = ng; i <= ng + 8; ++i) rx(i, j, 0) += c;
    };
    add_c(0.7);
    ins_predictor(g, 0, s, dt, true);
    add_c(0.7);
    ins_predictor(g, 0, s, dt, false);
    CHECK(g.field(0, "velfx")(ng + 2, ng + 3, 0) == doctest::Approx(2 * dt * 0.7).epsilon(1e-14));
}

TEST_CASE("projection: divergence-free predictor state is a fixed point") {
    BlockGrid g(square(2, 8), flow_vars());
    WorkerPool pool(2);
    FlowSlots s = FlowSlots::resolve(g, false);
    FlowConfig cfg;
    cfg.dt = 0.05;
    cfg.poisson.tol = 1e-10;
    for (int b = 0; b < g.nblocks(); ++b) {
        g.field(b, "velfx").fill(0.8);
        g.field(b, "velfy").fill(-0.3);
    }
    auto report = ins_project(g, s, cfg, pool);
    CHECK(report.converged);
    CHECK(report.nullspace);
    for (int b = 0; b < g.nblocks(); ++b) {
        CHECK(max_abs(g.field(b, "pres")) == 0.0);
        CHECK(g.field(b, "velfx")(3, 3, 0) == 0.8);
        CHECK(g.field(b, "velfy")(5, 2, 0) == -0.3);
    }
}

TEST_CASE("projection removes a discrete gradient field") {
    BlockGrid g(square(2, 16), flow_vars());
    WorkerPool pool(3);
    FlowSlots s = FlowSlots::resolve(g, false);
    FlowConfig cfg;
    cfg.dt = 0.1;
    cfg.poisson.tol = 1e-11;
    cfg.poisson.mg_levels = 2;
    cfg.poisson.max_iters = 300;

    double pi = std::acos(-1.0);
    auto psi = [&](double x, double y) {
        return std::sin(2 * pi * x) * std::cos(2 * pi * y) + 0.3 * std::cos(4 * pi * (x + y));
    };
    int ng = g.nguard();
    double dx = g.dx();
    for (int b = 0; b < g.nblocks(); ++b) {
        const Tile& t = g.tiles()[b];
        Array3& u = g.field(b, "velfx");
        Array3& v = g.field(b, "velfy");
        for (int j = 0; j < u.ny(); ++j)
            for (int i = 0; i < u.nx(); ++i) {
                double x = coord(t, dx, 0, Centering::FaceX, i, ng, true);
                double y = coord(t, dx, 1, Centering::FaceX, j, ng, true);
                u(i, j, 0) = (psi(x + 0.5 * dx, y) - psi(x - 0.5 * dx, y)) / dx;
            }
        for (int j = 0; j < v.ny(); ++j)
            for (int i = 0; i < v.nx(); ++i) {
                double x = coord(t, dx, 0, Centering::FaceY, i, ng, true);
                double y = coord(t, dx, 1, Centering::FaceY, j, ng, true);
                v(i, j, 0) = (psi(x, y + 0.5 * dx) - psi(x, y - 0.5 * dx)) / dx;
            }
    }
    auto report = ins_project(g, s, cfg, pool);
    CHECK(report.converged);
    double umax = 0.0;
    for (int b = 0; b < g.nblocks(); ++b)
        umax = std::max({umax, max_abs(g.field(b, "velfx")), max_abs(g.field(b, "velfy"))});
    CHECK(umax <= 10 * cfg.poisson.tol);
}

TEST_CASE("projection: channel step leaves the field divergence free") {
    DomainSpec d = square(2, 16);
    d.bc[1][0] = d.bc[1][1] = BcType::NoSlip;
    auto run = [&](int workers) {
        BlockGrid g(d, flow_vars());
        WorkerPool pool(workers);
        FlowSlots s = FlowSlots::resolve(g, false);
        FlowConfig cfg;
        cfg.inv_reynolds = 0.02;
        cfg.grav[0] = 1.0;
        cfg.dt = 2e-3;
        cfg.poisson.tol = 1e-9;
        cfg.poisson.mg_levels = 2;
        std::mt19937 rng(31);
        int ng = g.nguard(), nb = 16;
        for (int b = 0; b < g.nblocks(); ++b) {
            const Tile& t = g.tiles()[b];
            Array3& u = g.field(b, "velfx");
            Array3& v = g.field(b, "velfy");
            std::uniform_real_distribution<double> pert(-0.05, 0.05);
            for (int j = ng; j < ng + nb; ++j)
                for (int i = ng + 1; i <= ng + nb; ++i) {
                    double y = coord(t, g.dx(), 1, Centering::FaceX, j, ng, true);
                    u(i, j, 0) = 4.0 * y * (1.0 - y) + pert(rng);
                    v(j, i, 0) = pert(rng);
                }
        }
        fill_guard_cells(g, pool, {g.slot("velfx"), g.slot("velfy")});
        for (int b = 0; b < g.nblocks(); ++b) {
            ins_advection(g, b, s);
            ins_diffusion(g, b, s, cfg);
            ins_gravity(g, b, s, cfg);
            ins_predictor(g, b, s, cfg.dt, true);
        }
        auto report = ins_project(g, s, cfg, pool);
        CHECK(report.converged);
        return g;
    };
    BlockGrid g1 = run(1);
    CHECK(max_div(g1) <= 1e-8);

    // worker count must not change a single bit
    BlockGrid g4 = run(4);
    for (int b = 0; b < g1.nblocks(); ++b)
        for (const char* n : {"velfx", "velfy", "pres"}) {
            const Array3& a = g1.field(b, n);
            const Array3& c = g4.field(b, n);
            for (size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == c.data()[i]);
        }
}

TEST_CASE("projection propagates a stalled pressure solve") {
    BlockGrid g(square(1, 16), flow_vars());
    WorkerPool pool(1);
    FlowSlots s = FlowSlots::resolve(g, false);
    FlowConfig cfg;
    cfg.dt = 0.1;
    cfg.poisson.tol = 1e-12;
    cfg.poisson.max_iters = 1;
    std::mt19937 rng(1);
    randomize(g.field(0, "velfx"), rng);
    randomize(g.field(0, "velfy"), rng);
    CHECK_THROWS_AS(ins_project(g, s, cfg, pool), FlowError);
}

TEST_CASE("variable-property pipeline degenerates to constant properties") {
    auto run = [&](bool var_dens) {
        BlockGrid g(square(1, 16), flow_vars());
        WorkerPool pool(2);
        FlowSlots s = FlowSlots::resolve(g, var_dens);
        FlowConfig cfg;
        cfg.var_dens = var_dens;
        cfg.inv_reynolds = 0.01;
        cfg.grav[0] = 0.3;
        cfg.grav[1] = -0.1;
        cfg.dt = 1e-3;
        cfg.poisson.tol = 1e-9;
        double pi = std::acos(-1.0);
        const Tile& t = g.tiles()[0];
        Array3& u = g.field(0, "velfx");
        Array3& v = g.field(0, "velfy");
        int ng = g.nguard();
        for (int j = ng; j < ng + 16; ++j)
            for (int i = ng; i <= ng + 16; ++i) {
                double x = coord(t, g.dx(), 0, Centering::FaceX, i, ng, true);
                double y = coord(t, g.dx(), 1, Centering::FaceX, j, ng, true);
                u(i, j, 0) = std::sin(2 * pi * x) * std::cos(2 * pi * y);
                v(j, i, 0) = -std::cos(2 * pi * y) * std::sin(2 * pi * x);
            }
        g.field(0, "dens").fill(1.0);
        g.field(0, "visc").fill(1.0);
        fill_guard_cells(g, pool, {g.slot("velfx"), g.slot("velfy")});
        for (int step = 0; step < 50; ++step) {
            ins_advection(g, 0, s);
            ins_diffusion(g, 0, s, cfg);
            ins_gravity(g, 0, s, cfg);
            ins_predictor(g, 0, s, cfg.dt, step == 0);
            ins_project(g, s, cfg, pool);
        }
        return g;
    };
    BlockGrid ga = run(false);
    BlockGrid gb = run(true);
    double dmax = 0.0;
    for (const char* n : {"velfx", "velfy", "pres"}) {
        const Array3& a = ga.field(0, n);
        const Array3& b = gb.field(0, n);
        for (size_t c = 0; c < a.size(); ++c)
            dmax = std::max(dmax, std::fabs(a.data()[c] - b.data()[c]));
    }
    CHECK(dmax <= 1e-13);
}

TEST_CASE("face averages land on cell centers") {
    BlockGrid g(square(1, 12), flow_vars());
    FlowSlots s = FlowSlots::resolve(g, false);
    std::mt19937 rng(8);
    randomize(g.field(0, "velfx"), rng);
    randomize(g.field(0, "velfy"), rng);
    ins_face_to_center(g, 0, s);
    const Array3& u = g.field(0, "velfx");
    const Array3& v = g.field(0, "velfy");
    int ng = g.nguard();
    for (int j = ng; j < ng + 12; ++j)
        for (int i = ng; i < ng + 12; ++i) {
            CHECK(g.field(0, "velx")(i, j, 0) ==
                  doctest::Approx(0.5 * (u(i, j, 0) + u(i + 1, j, 0))).epsilon(1e-15));
            CHECK(g.field(0, "vely")(i, j, 0) ==
                  doctest::Approx(0.5 * (v(i, j, 0) + v(i, j + 1, 0))).epsilon(1e-15));
        }
    CHECK(max_abs(g.field(0, "velz")) == 0.0);

    // linear profile reproduces exactly at the midpoint
    const Tile& t = g.tiles()[0];
    Array3& uu = g.field(0, "velfx");
    for (int j = 0; j < uu.ny(); ++j)
        for (int i = 0; i < uu.nx(); ++i)
            uu(i, j, 0) = 3.0 * coord(t, g.dx(), 0, Centering::FaceX, i, ng, true) - 1.0;
    ins_face_to_center(g, 0, s);
    for (int j = ng; j < ng + 12; ++j)
        for (int i = ng; i < ng + 12; ++i) {
            double xc = coord(t, g.dx(), 0, Centering::Center, i, ng, true);
            CHECK(g.field(0, "velx")(i, j, 0) == doctest::Approx(3.0 * xc - 1.0).epsilon(1e-13));
        }
}

TEST_CASE("flow configuration reads the runtime parameters") {
    params::ParameterSet rp;
    rp.set("ins_invReynolds", real_value(0.005));
    rp.set("ins_gravX", real_value(0.0));
    rp.set("ins_gravY", real_value(-1.0));
    rp.set("ins_dt", real_value(0.002));
    rp.set("ins_poisson_tol", real_value(1e-9));
    FlowConfig cfg = FlowConfig::from_params(rp, false);
    CHECK(cfg.inv_reynolds == 0.005);
    CHECK(cfg.grav[1] == -1.0);
    CHECK(cfg.grav[2] == 0.0);
    CHECK(cfg.dt == 0.002);
    CHECK(cfg.poisson.tol == 1e-9);

    rp.set("ins_dt", real_value(0.0));
    CHECK_THROWS_AS(FlowConfig::from_params(rp, false), FlowError);

    // variable-property mode insists on the property fields
    std::vector<VariableDecl> vars = flow_vars();
    vars.pop_back();  // drop visc
    BlockGrid g(square(1, 8), vars);
    CHECK_THROWS_AS(FlowSlots::resolve(g, true), FlowError);
    CHECK_NOTHROW(FlowSlots::resolve(g, false));
}

TEST_CASE("cfl diagnostic reports the fastest face") {
    BlockGrid g(square(1, 8), flow_vars());
    FlowSlots s = FlowSlots::resolve(g, false);
    g.field(0, "velfx").fill(0.1);
    g.field(0, "velfy").fill(-0.2);
    int ng = g.nguard();
    g.field(0, "velfy")(ng + 3, ng + 4, 0) = -0.8;
    g.field(0, "velfy")(0, 0, 0) = 5.0;  // guards do not count
    double dt = 0.01;
    CHECK(ins_max_cfl(g, s, dt) == doctest::Approx(0.8 * dt / g.dx()).epsilon(1e-14));
}

#include "flowkit/bodies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "flowkit/util.hpp"

namespace flowkit::ib {

using grid::BlockGrid;
using grid::Centering;
using grid::Tile;

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

double seg_dist2(double px, double py, const std::array<double, 3>& a,
                 const std::array<double, 3>& b) {
    double dx = b[0] - a[0], dy = b[1] - a[1];
    double t = ((px - a[0]) * dx + (py - a[1]) * dy) / (dx * dx + dy * dy);
    t = std::clamp(t, 0.0, 1.0);
    double qx = a[0] + t * dx - px, qy = a[1] + t * dy - py;
    return qx * qx + qy * qy;
}

double tri_dist2(double px, double py, double pz, const std::array<double, 3>& a,
                 const std::array<double, 3>& b, const std::array<double, 3>& c) {
    double ab[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    double ac[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    double ap[3] = {px - a[0], py - a[1], pz - a[2]};
    auto dot = [](const double* u, const double* v) {
        return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    };
    auto from = [&](double ox, double oy, double oz) {
        double dx = px - ox, dy = py - oy, dz = pz - oz;
        return dx * dx + dy * dy + dz * dz;
    };
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return from(a[0], a[1], a[2]);
    double bp[3] = {px - b[0], py - b[1], pz - b[2]};
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return from(b[0], b[1], b[2]);
    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        double v = d1 / (d1 - d3);
        return from(a[0] + v * ab[0], a[1] + v * ab[1], a[2] + v * ab[2]);
    }
    double cp[3] = {px - c[0], py - c[1], pz - c[2]};
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return from(c[0], c[1], c[2]);
    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        double w = d2 / (d2 - d6);
        return from(a[0] + w * ac[0], a[1] + w * ac[1], a[2] + w * ac[2]);
    }
    double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && d4 - d3 >= 0.0 && d5 - d6 >= 0.0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return from(b[0] + w * (c[0] - b[0]), b[1] + w * (c[1] - b[1]), b[2] + w * (c[2] - b[2]));
    }
    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    return from(a[0] + v * ab[0] + w * ac[0], a[1] + v * ab[1] + w * ac[1],
                a[2] + v * ab[2] + w * ac[2]);
}

/// x coordinates where the line {(s, y) : s real} crosses the segment loops,
/// half-open in y so a shared vertex is counted once.
void ray_crossings_2d(const std::vector<std::array<double, 3>>& nodes,
                      const std::vector<std::array<int, 3>>& elems, double y,
                      std::vector<double>& xs) {
    xs.clear();
    for (const auto& e : elems) {
        const auto& a = nodes[e[0]];
        const auto& b = nodes[e[1]];
        if ((a[1] > y) != (b[1] > y))
            xs.push_back(a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
    }
    std::sort(xs.begin(), xs.end());
}

void ray_crossings_3d(const std::vector<std::array<double, 3>>& nodes,
                      const std::vector<std::array<int, 3>>& elems, double y, double z,
                      std::vector<double>& xs) {
    xs.clear();
    for (const auto& e : elems) {
        const auto& a = nodes[e[0]];
        const auto& b = nodes[e[1]];
        const auto& c = nodes[e[2]];
        double d0 = (b[1] - y) * (c[2] - z) - (c[1] - y) * (b[2] - z);
        double d1 = (c[1] - y) * (a[2] - z) - (a[1] - y) * (c[2] - z);
        double d2 = (a[1] - y) * (b[2] - z) - (b[1] - y) * (a[2] - z);
        double sum = d0 + d1 + d2;
        if (sum == 0.0) continue;
        bool pos = sum > 0.0;
        if ((d0 > 0.0) == pos && (d1 > 0.0) == pos && (d2 > 0.0) == pos)
            xs.push_back((d0 * a[0] + d1 * b[0] + d2 * c[0]) / sum);
    }
    std::sort(xs.begin(), xs.end());
}

bool parity_inside(const std::vector<double>& xs, double x) {
    size_t above = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
    return (above % 2) == 1;
}

}  // namespace

BodyKinematics BodyKinematics::from_params(const params::ParameterSet& rp) {
    BodyKinematics k;
    if (rp.has("sm_velX")) k.vel[0] = rp.real("sm_velX");
    if (rp.has("sm_velY")) k.vel[1] = rp.real("sm_velY");
    if (rp.has("sm_velZ")) k.vel[2] = rp.real("sm_velZ");
    if (rp.has("sm_omega")) k.omega = rp.real("sm_omega");
    return k;
}

LagrangianBody::LagrangianBody(int dims, std::vector<std::array<double, 3>> nodes,
                               std::vector<std::array<int, 3>> elems)
    : dims_(dims), ref_nodes_(std::move(nodes)), elems_(std::move(elems)) {
    if (dims_ != 2 && dims_ != 3) throw BodyError("body dims must be 2 or 3");
    if (ref_nodes_.empty() || elems_.empty()) throw BodyError("body has no geometry");
    int n = static_cast<int>(ref_nodes_.size());
    for (const auto& e : elems_) {
        int width = e[2] < 0 ? 2 : 3;
        if (width != dims_)
            throw BodyError(dims_ == 2 ? "2-d body expects segment elements"
                                       : "3-d body expects triangle elements");
        for (int c = 0; c < width; ++c)
            if (e[c] < 0 || e[c] >= n) throw BodyError("element references a missing node");
        if (e[0] == e[1] || (width == 3 && (e[1] == e[2] || e[0] == e[2])))
            throw BodyError("degenerate element");
    }

    if (dims_ == 2) {
        std::vector<std::vector<int>> adj(ref_nodes_.size());
        for (const auto& e : elems_) {
            adj[e[0]].push_back(e[1]);
            adj[e[1]].push_back(e[0]);
        }
        for (const auto& a : adj)
            if (a.size() != 2) throw BodyError("body surface is not closed");
        std::vector<char> seen(ref_nodes_.size(), 0);
        for (int start = 0; start < n; ++start) {
            if (seen[start]) continue;
            std::vector<int> loop{start};
            seen[start] = 1;
            int prev = start, cur = adj[start][0];
            while (cur != start) {
                loop.push_back(cur);
                seen[cur] = 1;
                int next = adj[cur][0] == prev ? adj[cur][1] : adj[cur][0];
                prev = cur;
                cur = next;
            }
            loops_.push_back(std::move(loop));
        }
    } else {
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& e : elems_)
            for (int c = 0; c < 3; ++c) {
                int u = e[c], v = e[(c + 1) % 3];
                ++edge_count[{std::min(u, v), std::max(u, v)}];
            }
        for (const auto& [edge, count] : edge_count)
            if (count != 2) throw BodyError("body surface is not closed");
    }

    for (const auto& p : ref_nodes_)
        for (int a = 0; a < 3; ++a) ref_centroid_[a] += p[a];
    for (int a = 0; a < 3; ++a) ref_centroid_[a] /= static_cast<double>(ref_nodes_.size());
    nodes_ = ref_nodes_;
}

LagrangianBody LagrangianBody::from_file(const std::string& path) {
    std::vector<std::string> raw = split_lines(read_file(path));
    std::vector<std::vector<std::string>> rows;
    for (const auto& line : raw) {
        std::string code = strip_comment(line);
        auto toks = split_ws(code);
        if (!toks.empty()) rows.push_back(std::move(toks));
    }
    size_t at = 0;
    auto expect_count = [&](const char* tag) {
        if (at >= rows.size() || rows[at].size() != 2 || rows[at][0] != tag)
            throw BodyError("body file " + path + ": expected '" + tag + " <count>' line");
        long count = 0;
        try {
            count = std::stol(rows[at][1]);
        } catch (const std::exception&) {
            throw BodyError("body file " + path + ": bad " + tag + " count");
        }
        if (count <= 0) throw BodyError("body file " + path + ": bad " + tag + " count");
        ++at;
        return static_cast<size_t>(count);
    };

    size_t nnodes = expect_count("NODES");
    std::vector<std::array<double, 3>> nodes;
    nodes.reserve(nnodes);
    for (size_t i = 0; i < nnodes; ++i, ++at) {
        if (at >= rows.size() || (rows[at].size() != 2 && rows[at].size() != 3))
            throw BodyError("body file " + path + ": expected 2 or 3 coordinates per node");
        std::array<double, 3> p{0.0, 0.0, 0.0};
        try {
            for (size_t c = 0; c < rows[at].size(); ++c) p[c] = std::stod(rows[at][c]);
        } catch (const std::exception&) {
            throw BodyError("body file " + path + ": bad node coordinate");
        }
        nodes.push_back(p);
    }

    size_t nelems = expect_count("ELEMS");
    std::vector<std::array<int, 3>> elems;
    elems.reserve(nelems);
    for (size_t i = 0; i < nelems; ++i, ++at) {
        if (at >= rows.size() || (rows[at].size() != 2 && rows[at].size() != 3))
            throw BodyError("body file " + path + ": expected 2 or 3 node indices per element");
        std::array<int, 3> e{-1, -1, -1};
        try {
            for (size_t c = 0; c < rows[at].size(); ++c) e[c] = std::stoi(rows[at][c]);
        } catch (const std::exception&) {
            throw BodyError("body file " + path + ": bad element index");
        }
        elems.push_back(e);
    }
    if (at != rows.size()) throw BodyError("body file " + path + ": trailing content");

    int dims = elems.front()[2] < 0 ? 2 : 3;
    return LagrangianBody(dims, std::move(nodes), std::move(elems));
}

LagrangianBody LagrangianBody::circle(double cx, double cy, double r, int nseg) {
    if (nseg < 3) throw BodyError("circle body needs at least 3 segments");
    std::vector<std::array<double, 3>> nodes(nseg);
    std::vector<std::array<int, 3>> elems(nseg);
    double two_pi = 2.0 * std::acos(-1.0);
    for (int k = 0; k < nseg; ++k) {
        double th = two_pi * k / nseg;
        nodes[k] = {cx + r * std::cos(th), cy + r * std::sin(th), 0.0};
        elems[k] = {k, (k + 1) % nseg, -1};
    }
    return LagrangianBody(2, std::move(nodes), std::move(elems));
}

std::array<double, 3> LagrangianBody::centroid() const {
    return {ref_centroid_[0] + kin_.vel[0] * time_, ref_centroid_[1] + kin_.vel[1] * time_,
            ref_centroid_[2] + kin_.vel[2] * time_};
}

void LagrangianBody::advance_to(double t) {
    time_ = t;
    double c = std::cos(kin_.omega * t), s = std::sin(kin_.omega * t);
    std::array<double, 3> ctr = centroid();
    for (size_t i = 0; i < ref_nodes_.size(); ++i) {
        double rx = ref_nodes_[i][0] - ref_centroid_[0];
        double ry = ref_nodes_[i][1] - ref_centroid_[1];
        nodes_[i] = {ctr[0] + c * rx - s * ry, ctr[1] + s * rx + c * ry,
                     ctr[2] + ref_nodes_[i][2] - ref_centroid_[2]};
    }
}

std::array<double, 3> LagrangianBody::velocity_at(double x, double y, double) const {
    std::array<double, 3> ctr = centroid();
    return {kin_.vel[0] - kin_.omega * (y - ctr[1]), kin_.vel[1] + kin_.omega * (x - ctr[0]),
            kin_.vel[2]};
}

double LagrangianBody::distance(double x, double y, double z) const {
    double best = std::numeric_limits<double>::infinity();
    if (dims_ == 2) {
        for (const auto& e : elems_) best = std::min(best, seg_dist2(x, y, nodes_[e[0]], nodes_[e[1]]));
    } else {
        for (const auto& e : elems_)
            best = std::min(best, tri_dist2(x, y, z, nodes_[e[0]], nodes_[e[1]], nodes_[e[2]]));
    }
    return std::sqrt(best);
}

bool LagrangianBody::contains(double x, double y, double z) const {
    std::vector<double> xs;
    if (dims_ == 2)
        ray_crossings_2d(nodes_, elems_, y, xs);
    else
        ray_crossings_3d(nodes_, elems_, y, z, xs);
    return parity_inside(xs, x);
}

double LagrangianBody::signed_distance(double x, double y, double z) const {
    return (contains(x, y, z) ? -1.0 : 1.0) * distance(x, y, z);
}

IbSlots IbSlots::resolve(const grid::BlockGrid& g) {
    IbSlots s;
    s.bdfn = g.slot("bdfn");
    const char* fv[3] = {"velfx", "velfy", "velfz"};
    const char* rn[3] = {"rhfx", "rhfy", "rhfz"};
    const char* rp[3] = {"rofx", "rofy", "rofz"};
    for (int a = 0; a < 3; ++a) {
        s.face_vel[a] = g.slot(fv[a]);
        s.rhs[a] = g.slot(rn[a]);
        s.rhs_old[a] = g.slot(rp[a]);
    }
    return s;
}

void ib_map_to_levelset(const LagrangianBody& body, BlockGrid& g, int bdfn_slot,
                        const WorkerPool& pool, double band_cells) {
    if (body.dims() != g.domain().dims)
        throw BodyError("body and grid dimensionality differ");
    const auto& nodes = body.nodes();
    const auto& elems = body.elements();
    double dx = g.dx();
    double band = band_cells * dx;
    int ng = g.nguard();

    // chain-subsampled surface points give a conservative lower bound on the
    // distance: far cells clamp without an exact search, near cells only scan
    // the chain windows around qualifying samples
    struct Sample {
        double x, y;
        int loop, pos;
    };
    std::vector<Sample> samples;
    double slack = 0.0;
    int stride = 1;
    if (body.dims() == 2 && elems.size() > 8192) {
        stride = static_cast<int>(std::max<size_t>(1, nodes.size() / 2048));
        double max_len = 0.0;
        for (const auto& e : elems)
            max_len = std::max(max_len, std::hypot(nodes[e[1]][0] - nodes[e[0]][0],
                                                   nodes[e[1]][1] - nodes[e[0]][1]));
        for (size_t l = 0; l < body.loops().size(); ++l) {
            const auto& loop = body.loops()[l];
            for (size_t i = 0; i < loop.size(); i += stride)
                samples.push_back({nodes[loop[i]][0], nodes[loop[i]][1], static_cast<int>(l),
                                   static_cast<int>(i)});
        }
        slack = static_cast<double>(stride) * max_len;
    }

    int nx = g.extent(0, Centering::Center);
    int ny = g.extent(1, Centering::Center);
    int nz = g.extent(2, Centering::Center);
    bool ax = g.domain().axis_active(0);
    bool ay = g.domain().axis_active(1);
    bool az = g.domain().axis_active(2);
    long rows = static_cast<long>(g.nblocks()) * ny * nz;
    pool.parallel_for(rows, [&](long ri) {
        int j = static_cast<int>(ri % ny);
        long rest = ri / ny;
        int k = static_cast<int>(rest % nz);
        int b = static_cast<int>(rest / nz);
        const Tile& t = g.tiles()[b];
        Array3& out = g.field(b, bdfn_slot);
        double y = coord(t, dx, 1, Centering::Center, j, ng, ay);
        double z = coord(t, dx, 2, Centering::Center, k, ng, az);
        std::vector<double> xs;
        if (body.dims() == 2)
            ray_crossings_2d(nodes, elems, y, xs);
        else
            ray_crossings_3d(nodes, elems, y, z, xs);
        std::vector<double> sd2(samples.size());
        for (int i = 0; i < nx; ++i) {
            double x = coord(t, dx, 0, Centering::Center, i, ng, ax);
            double sgn = parity_inside(xs, x) ? -1.0 : 1.0;
            if (samples.empty()) {
                out(i, j, k) = sgn * std::min(body.distance(x, y, z), band);
                continue;
            }
            double best2 = std::numeric_limits<double>::infinity();
            for (size_t q = 0; q < samples.size(); ++q) {
                double ddx = x - samples[q].x, ddy = y - samples[q].y;
                sd2[q] = ddx * ddx + ddy * ddy;
                best2 = std::min(best2, sd2[q]);
            }
            double lower = std::sqrt(best2);
            if (lower - slack > band) {
                out(i, j, k) = sgn * band;
                continue;
            }
            double limit = lower + slack;
            double limit2 = limit * limit;
            double d2 = std::numeric_limits<double>::infinity();
            for (size_t q = 0; q < samples.size(); ++q) {
                if (sd2[q] > limit2) continue;
                const auto& loop = body.loops()[samples[q].loop];
                int sz = static_cast<int>(loop.size());
                int span = std::min(stride, sz);
                for (int w = samples[q].pos - span; w < samples[q].pos + span; ++w) {
                    int a = ((w % sz) + sz) % sz;
                    int bb = (a + 1) % sz;
                    d2 = std::min(d2, seg_dist2(x, y, nodes[loop[a]], nodes[loop[bb]]));
                }
            }
            out(i, j, k) = sgn * std::min(std::sqrt(d2), band);
        }
    });
}

void ib_forcing(BlockGrid& g, int block, const IbSlots& s, const LagrangianBody& body, double dt,
                bool first_step) {
    const Tile& t = g.tiles()[block];
    const Array3& lphi = g.field(block, s.bdfn);
    int ng = g.nguard();
    double dx = g.dx();
    for (int a = 0; a < 3; ++a) {
        if (!g.domain().axis_active(a)) continue;
        const Array3& u = g.field(block, s.face_vel[a]);
        Array3& rhs = g.field(block, s.rhs[a]);
        const Array3& rhs_old = g.field(block, s.rhs_old[a]);
        Centering fc = face_centering(a);
        for_interior(g, fc, [&](const Idx& p) {
            double lf = 0.5 * (at(lphi, p.moved(a, -1)) + at(lphi, p));
            if (lf >= dx) return;
            double w = lf <= 0.0 ? 1.0 : 1.0 - lf / dx;
            double x = coord(t, dx, 0, fc, p.v[0], ng, g.domain().axis_active(0));
            double y = coord(t, dx, 1, fc, p.v[1], ng, g.domain().axis_active(1));
            double z = coord(t, dx, 2, fc, p.v[2], ng, g.domain().axis_active(2));
            double ub = body.velocity_at(x, y, z)[a];
            double forced = first_step ? (ub - at(u, p)) / dt
                                       : ((ub - at(u, p)) / dt + 0.5 * at(rhs_old, p)) / 1.5;
            double& r = rhs(p.v[0], p.v[1], p.v[2]);
            r = w * forced + (1.0 - w) * r;
        });
    }
}

}  // namespace flowkit::ib

#include "flowkit/sourceterms.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "flowkit/util.hpp"

namespace flowkit::st {

using grid::BcType;
using grid::BlockGrid;
using grid::Centering;
using grid::DomainSpec;
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

const char* face_names[3][2] = {{"xlow", "xhigh"}, {"ylow", "yhigh"}, {"zlow", "zhigh"}};

bool parse_face(const std::string& word, int& axis, int& side) {
    for (int a = 0; a < 3; ++a)
        for (int s = 0; s < 2; ++s)
            if (word == face_names[a][s]) {
                axis = a;
                side = s;
                return true;
            }
    return false;
}

double parse_real_value(const std::string& text, const std::string& where) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || !trim(std::string(end)).empty())
        throw SourceError("heater file: bad numeric value '" + text + "' for " + where);
    return v;
}

void validate_patch(const HeaterPatch& p, const DomainSpec& spec) {
    const std::string face = face_names[p.axis][p.side];
    if (!spec.axis_active(p.axis))
        throw SourceError("heater patch on inactive axis face " + face);
    if (spec.bc[p.axis][p.side] == BcType::Periodic)
        throw SourceError("heater patch on periodic boundary " + face);
    for (int a = 0; a < 3; ++a) {
        if (a == p.axis || !spec.axis_active(a)) continue;
        if (!(p.lo[a] < p.hi[a]))
            throw SourceError("heater patch on " + face + " has empty extent");
        if (p.lo[a] < spec.lo[a] - 1e-12 || p.hi[a] > spec.hi[a] + 1e-12)
            throw SourceError("heater patch on " + face + " extends outside the domain");
    }
}

}  // namespace

bool OutletConfig::active() const {
    if (!(buffer > 0.0)) return false;
    for (int a = 0; a < 3; ++a)
        for (int s = 0; s < 2; ++s)
            if (face[a][s]) return true;
    return false;
}

OutletConfig OutletConfig::from_params(const params::ParameterSet& rp, const DomainSpec& spec) {
    OutletConfig cfg;
    bool any_outflow = false;
    double max_inflow = 0.0;
    for (int a = 0; a < 3; ++a) {
        for (int s = 0; s < 2; ++s) {
            if (!spec.axis_active(a)) continue;
            if (spec.bc[a][s] == BcType::Outflow) {
                cfg.face[a][s] = true;
                any_outflow = true;
            }
            if (spec.bc[a][s] == BcType::Inflow)
                max_inflow = std::max(max_inflow, std::fabs(spec.inflow[a][s]));
        }
    }
    if (rp.has("out_buffer")) cfg.buffer = rp.real("out_buffer");
    if (rp.has("out_velRef"))
        cfg.u_ref = rp.real("out_velRef");
    else if (max_inflow > 0.0)
        cfg.u_ref = max_inflow;
    if (cfg.buffer < 0.0) throw SourceError("out_buffer must be nonnegative");
    if (!(cfg.u_ref > 0.0)) throw SourceError("out_velRef must be positive");
    if (any_outflow && cfg.buffer > 0.0) {
        for (int a = 0; a < 3; ++a)
            if ((cfg.face[a][0] || cfg.face[a][1]) && cfg.buffer >= spec.extent(a))
                throw SourceError("out_buffer must be smaller than the domain extent");
    }
    return cfg;
}

OutletSlots OutletSlots::resolve(const BlockGrid& g) {
    OutletSlots s{};
    const char* fv[3] = {"velfx", "velfy", "velfz"};
    const char* mr[3] = {"rhfx", "rhfy", "rhfz"};
    for (int a = 0; a < 3; ++a) {
        bool need = g.domain().axis_active(a);
        s.face_vel[a] = need || g.has_var(fv[a]) ? g.slot(fv[a]) : -1;
        s.rhs[a] = need || g.has_var(mr[a]) ? g.slot(mr[a]) : -1;
    }
    return s;
}

void outlet_forcing(BlockGrid& g, int block, const OutletSlots& s, const OutletConfig& cfg) {
    if (!cfg.active()) return;
    const DomainSpec& spec = g.domain();
    const Tile& t = g.tiles()[block];
    const double dx = g.dx();
    const double inv_tau = std::fabs(cfg.u_ref) / cfg.buffer;
    for (int oa = 0; oa < 3; ++oa) {
        if (!spec.axis_active(oa)) continue;
        for (int os = 0; os < 2; ++os) {
            if (!cfg.face[oa][os]) continue;
            const int toward_interior = os == 0 ? 1 : -1;
            for (int a = 0; a < 3; ++a) {
                if (!spec.axis_active(a)) continue;
                const Centering c = face_centering(a);
                const Array3& u = g.field(block, s.face_vel[a]);
                Array3& r = g.field(block, s.rhs[a]);
                for_interior(g, c, [&](const Idx& p) {
                    double x = grid::coord(t, dx, oa, c, p.v[oa], g.nguard(), true);
                    double d = os == 0 ? x - spec.lo[oa] : spec.hi[oa] - x;
                    if (d >= cfg.buffer) return;
                    double target = at(u, p.moved(oa, toward_interior));
                    r(p.v[0], p.v[1], p.v[2]) -= (at(u, p) - target) * inv_tau;
                });
            }
        }
    }
}

std::vector<HeaterPatch> heater_from_file(const std::string& path, const DomainSpec& spec,
                                          double default_temp) {
    std::vector<HeaterPatch> patches;
    bool in_patch = false;
    HeaterPatch cur;
    bool face_seen = false;
    int lineno = 0;

    auto whole_face_defaults = [&](HeaterPatch& p) {
        for (int a = 0; a < 3; ++a) {
            p.lo[a] = spec.lo[a];
            p.hi[a] = spec.hi[a];
        }
    };
    auto finish = [&]() {
        if (!in_patch) return;
        if (!face_seen) throw SourceError("heater file: patch without a face line");
        validate_patch(cur, spec);
        patches.push_back(cur);
    };

    for (const std::string& raw : split_lines(read_file(path))) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const std::string at_line = " at line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line != "[heater]")
                throw SourceError("heater file: unknown section " + line + at_line);
            finish();
            cur = HeaterPatch{};
            cur.temp = default_temp;
            whole_face_defaults(cur);
            in_patch = true;
            face_seen = false;
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SourceError("heater file: expected key = value" + at_line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!in_patch)
            throw SourceError("heater file: '" + key + "' outside a [heater] section" + at_line);
        if (key == "face") {
            if (!parse_face(value, cur.axis, cur.side))
                throw SourceError("heater file: unknown face '" + value + "'" + at_line);
            face_seen = true;
        } else if (key == "temp") {
            cur.temp = parse_real_value(value, key + at_line);
        } else if (key == "seed") {
            std::vector<std::string> parts = split_ws(value);
            if (static_cast<int>(parts.size()) != spec.dims)
                throw SourceError("heater file: seed needs " + std::to_string(spec.dims) +
                                  " coordinates" + at_line);
            std::array<double, 3> site = {0.0, 0.0, 0.0};
            for (size_t i = 0; i < parts.size(); ++i)
                site[i] = parse_real_value(parts[i], key + at_line);
            cur.seeds.push_back(site);
        } else if (key.size() == 4 && (ends_with(key, "min") || ends_with(key, "max"))) {
            int a = key[0] == 'x' ? 0 : key[0] == 'y' ? 1 : key[0] == 'z' ? 2 : -1;
            if (a < 0) throw SourceError("heater file: unknown key '" + key + "'" + at_line);
            if (!face_seen)
                throw SourceError("heater file: extent before the face line" + at_line);
            if (a == cur.axis)
                throw SourceError("heater file: extent key '" + key +
                                  "' lies on the patch normal axis" + at_line);
            (ends_with(key, "min") ? cur.lo : cur.hi)[a] = parse_real_value(value, key + at_line);
        } else {
            throw SourceError("heater file: unknown key '" + key + "'" + at_line);
        }
    }
    finish();
    if (patches.empty()) throw SourceError("heater file: no [heater] sections in " + path);
    return patches;
}

void heater_apply(BlockGrid& g, int block, int temp_slot,
                  const std::vector<HeaterPatch>& patches) {
    const DomainSpec& spec = g.domain();
    const Tile& t = g.tiles()[block];
    const double dx = g.dx();
    const int ng = g.nguard();
    Array3& temp = g.field(block, temp_slot);
    const int bcoord[3] = {t.bx, t.by, t.bz};

    for (const HeaterPatch& p : patches) {
        const int na = p.axis;
        if (!spec.axis_active(na)) continue;
        const bool edge =
            p.side == 0 ? bcoord[na] == 0 : bcoord[na] == spec.nblocks[na] - 1;
        if (!edge) continue;
        const int ihi = g.interior_hi(na, Centering::Center);

        int lo[3], hi[3];
        for (int a = 0; a < 3; ++a) {
            lo[a] = g.interior_lo(a);
            hi[a] = g.interior_hi(a, Centering::Center);
        }
        lo[na] = 0;
        hi[na] = ng;
        Idx q;
        for (q.v[2] = lo[2]; q.v[2] < hi[2]; ++q.v[2]) {
            for (q.v[1] = lo[1]; q.v[1] < hi[1]; ++q.v[1]) {
                for (q.v[0] = lo[0]; q.v[0] < hi[0]; ++q.v[0]) {
                    bool member = true;
                    for (int a = 0; a < 3 && member; ++a) {
                        if (a == na || !spec.axis_active(a)) continue;
                        double x = grid::coord(t, dx, a, Centering::Center, q.v[a], ng, true);
                        member = x >= p.lo[a] && x <= p.hi[a];
                    }
                    if (!member) continue;
                    Idx gc = q;
                    Idx ic = q;
                    int m = q.v[na];  // guard layer, 0 nearest the interior edge of the slab
                    if (p.side == 0) {
                        gc.v[na] = ng - 1 - m;
                        ic.v[na] = ng + m;
                    } else {
                        gc.v[na] = ihi + m;
                        ic.v[na] = ihi - 1 - m;
                    }
                    temp(gc.v[0], gc.v[1], gc.v[2]) = 2.0 * p.temp - at(temp, ic);
                }
            }
        }
    }
}

}  // namespace flowkit::st

#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowkit/grid.hpp"
#include "flowkit/params.hpp"

namespace flowkit::ib {

struct BodyError : std::runtime_error {
    explicit BodyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Prescribed rigid motion: translation velocity plus angular velocity about
/// the z axis through the body centroid.
struct BodyKinematics {
    double vel[3] = {0.0, 0.0, 0.0};
    double omega = 0.0;

    static BodyKinematics from_params(const params::ParameterSet& rp);
};

/// Closed surface mesh, segment loops in 2-d or a triangle surface in 3-d,
/// moved rigidly by prescribed kinematics. Node positions at time t are
/// produced from the reference configuration analytically, so long rotations
/// close exactly instead of accumulating per-step drift.
class LagrangianBody {
public:
    /// Element entries hold two node indices per segment (third = -1) or
    /// three per triangle. Throws BodyError on out-of-range indices,
    /// degenerate elements, or an open surface.
    LagrangianBody(int dims, std::vector<std::array<double, 3>> nodes,
                   std::vector<std::array<int, 3>> elems);

    /// Plain-text geometry: a `NODES n` line, n coordinate lines, an
    /// `ELEMS m` line, m index tuples. Two indices per element make a 2-d
    /// body, three a 3-d one.
    static LagrangianBody from_file(const std::string& path);

    /// Regular n-gon approximation of a circle, counterclockwise.
    static LagrangianBody circle(double cx, double cy, double r, int nseg);

    void set_kinematics(const BodyKinematics& k) { kin_ = k; }
    const BodyKinematics& kinematics() const { return kin_; }

    int dims() const { return dims_; }
    const std::vector<std::array<double, 3>>& nodes() const { return nodes_; }
    const std::vector<std::array<int, 3>>& elements() const { return elems_; }
    /// Node-average centroid at the current time.
    std::array<double, 3> centroid() const;
    /// Chained node orderings of the 2-d loops (empty in 3-d).
    const std::vector<std::vector<int>>& loops() const { return loops_; }
    double time() const { return time_; }

    /// Move the node positions to absolute time t.
    void advance_to(double t);

    /// Rigid-body velocity of the material point at (x, y, z).
    std::array<double, 3> velocity_at(double x, double y, double z) const;

    /// Exact unsigned distance to the surface, brute force over elements.
    double distance(double x, double y, double z) const;
    /// Even-odd containment along a +x ray.
    bool contains(double x, double y, double z) const;
    double signed_distance(double x, double y, double z) const;

private:
    int dims_;
    std::vector<std::array<double, 3>> ref_nodes_;
    std::vector<std::array<double, 3>> nodes_;
    std::vector<std::array<int, 3>> elems_;
    std::vector<std::vector<int>> loops_;
    std::array<double, 3> ref_centroid_{};
    BodyKinematics kin_;
    double time_ = 0.0;
};

/// Advance the body from time t by dt.
inline void body_advance(LagrangianBody& body, double t, double dt) { body.advance_to(t + dt); }

/// Slot ids for the immersed-boundary coupling: the body level set bdfn plus
/// the face velocities and momentum rhs / history fields of the flow.
struct IbSlots {
    int bdfn;
    int face_vel[3];
    int rhs[3];
    int rhs_old[3];

    static IbSlots resolve(const grid::BlockGrid& g);
};

/// Writes the body level set at every cell center, guard layers included:
/// signed distance to the surface, negative inside, clamped to
/// band_cells * dx in magnitude. Parallel across rows; the parity of ray
/// crossings is shared per row and the exact distance search is skipped,
/// via a chain-subsampled lower bound, for cells far outside the band.
void ib_map_to_levelset(const LagrangianBody& body, grid::BlockGrid& g, int bdfn_slot,
                        const WorkerPool& pool, double band_cells = 6.0);

/// Rewrites the momentum rhs at faces covered by the body so the predictor
/// lands on the local rigid-body velocity there; a face within one cell
/// outside the surface gets a linear blend of forced and physical rhs.
void ib_forcing(grid::BlockGrid& g, int block, const IbSlots& s, const LagrangianBody& body,
                double dt, bool first_step);

}  // namespace flowkit::ib

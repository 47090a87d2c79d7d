#pragma once

#include <string>
#include <vector>

#include "flowkit/grid.hpp"

namespace flowkit::grid {

struct PoissonOptions {
    double tol = 1e-9;   // relative L-inf residual target
    int max_iters = 20000;
    double omega = 1.7;  // SOR relaxation factor
    int mg_levels = 0;   // coarse levels for the multigrid preconditioner; 0 = plain sweeps
};

struct PoissonReport {
    bool converged = false;
    bool nullspace = false;
    int iterations = 0;            // sweeps, or preconditioned CG iterations when mg_levels > 0
    double residual = 0.0;         // relative L-inf residual of the returned solution
    std::vector<double> history;   // residual after each iteration
};

/// Solve div(beta grad p) = rhs over the interior cells of three registered
/// CENTER fields. Boundary conditions derive from the domain: periodic faces
/// wrap, outflow faces hold p = 0 on the face, all other faces are zero-flux.
/// When no outflow face exists the problem has a constant nullspace: the rhs
/// is projected to zero mean before solving and the returned p has zero mean.
/// The reported residual refers to that projected rhs. Face coefficients are
/// harmonic means of the adjacent cells (see face_beta_*).
PoissonReport solve_poisson(BlockGrid& grid, const std::string& beta_var,
                            const std::string& rhs_var, const std::string& p_var,
                            const PoissonOptions& opts, const WorkerPool& pool);

}  // namespace flowkit::grid

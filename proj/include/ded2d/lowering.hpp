#pragma once

#include "ded2d/conic.hpp"
#include "ded2d/surrogate.hpp"

namespace ded2d::conic {

/// Lowered subproblem: the conic program plus the bookkeeping needed to read
/// the solution back. The base decision block occupies the variable prefix
/// [0, base_vars); auxiliaries (epigraph, reciprocal and quadratic bounds,
/// time/power splitters) follow.
struct LoweredSubproblem {
    ConicProgram prog;
    int base_vars = 0;
    int epigraph_index = -1; // objective epigraph variable, -1 for feasibility kinds
};

/// Maps a subproblem template set onto cones: reciprocal terms through
/// hyperbolic (rotated-cone) bounds, quadratics through rotated-cone
/// epigraphs, the min-of-concave objective through a shared epigraph
/// variable, norm and budget constraints through second-order cones, and all
/// trust cuts and bounds as linear rows. The lowered feasible set is
/// contained in the surrogate one, which in turn is contained in the exact
/// feasible set.
LoweredSubproblem lower_subproblem(const SubproblemForm& form);

/// Surrogate objective value of the form at a base-block decision vector
/// (min over the IU family plus penalty and constant). Used by tightness
/// checks against the conic objective.
double surrogate_objective(const SubproblemForm& form, const Eigen::VectorXd& x_base);

/// Worst surrogate-constraint violation at a base-block decision vector
/// (positive means violated).
double surrogate_violation(const SubproblemForm& form, const Eigen::VectorXd& x_base);

} // namespace ded2d::conic

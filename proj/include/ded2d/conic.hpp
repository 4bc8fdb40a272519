#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ded2d/socp.hpp"

namespace ded2d::conic {

enum class ConeKind {
    Zero,       // y = 0
    NonNeg,     // y >= 0 elementwise
    Soc,        // y = (t, u), ||u|| <= t
    RotatedSoc, // y = (a, b, u), 2ab >= ||u||^2, a,b >= 0
};

/// One cone-constrained affine map y = A x + b.
struct ConeBlock {
    ConeKind kind;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::string label; // provenance of the originating constraint

    int rows() const { return static_cast<int>(b.size()); }
};

/// Language-neutral intermediate representation of one convex subproblem:
/// maximize a linear objective over an intersection of cone-constrained
/// affine maps of a real decision vector.
struct ConicProgram {
    int num_vars = 0;
    Eigen::VectorXd objective; // maximize objective' x
    double objective_constant = 0.0;
    std::vector<ConeBlock> blocks;

    void add_block(ConeKind kind, Eigen::MatrixXd A, Eigen::VectorXd b, std::string label);

    /// Throws std::invalid_argument on dimension inconsistencies.
    void validate() const;

    /// Structured-text dump for bug reports and cross-implementation diffs.
    void dump(std::ostream& out) const;

    int total_rows() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

struct ConicSolution {
    SolveStatus status = SolveStatus::MaxIter;
    Eigen::VectorXd x;
    double objective = 0.0; // objective' x + constant (maximization value)
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;

    bool ok() const { return status == SolveStatus::Optimal; }
};

/// Lowers the block structure to standard form (rotated cones mapped onto
/// second-order cones, equalities onto opposing inequalities, per-block
/// coefficient scaling) and runs the interior-point method.
ConicSolution solve(const ConicProgram& prog, double tol = 1e-8);

const char* to_string(SolveStatus s);

} // namespace ded2d::conic

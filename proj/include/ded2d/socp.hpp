#pragma once

#include <vector>

#include <Eigen/Dense>

namespace ded2d::conic {

/// Standard-form cone program
///
///     minimize    c'x
///     subject to  Gx + s = h,  s in K
///
/// with K a product of a nonnegative orthant (first `nonneg` rows) and
/// second-order cones ||u|| <= t of the listed dimensions (t first).
struct SocpProblem {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    Eigen::VectorXd c;
    int nonneg = 0;
    std::vector<int> soc_dims;

    int num_rows() const { return static_cast<int>(G.rows()); }
    int num_vars() const { return static_cast<int>(G.cols()); }
};

enum class SocpStatus {
    Optimal,
    AlmostOptimal,
    PrimalInfeasible,
    AlmostPrimalInfeasible,
    DualInfeasible,
    AlmostDualInfeasible,
    MaxIters,
    Numerics,
};

struct SocpSettings {
    int max_iters = 100;
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    double feastol_inacc = 1e-4;
    double abstol_inacc = 5e-5;
    double reltol_inacc = 5e-5;
    double gamma = 0.99;      // fraction-to-boundary scaling
    double static_reg = 7e-8; // static KKT regularization
    double stepmin = 1e-6;
    double stepmax = 0.999;
    double sigmamin = 1e-4;
    double sigmamax = 0.99;
    double safeguard = 500.0; // backtrack when pres blows up by this factor
    int refine_iters = 6;
};

struct SocpSolution {
    SocpStatus status = SocpStatus::Numerics;
    Eigen::VectorXd x; // primal (already scaled back by tau)
    Eigen::VectorXd s; // primal slacks
    Eigen::VectorXd z; // dual
    double pcost = 0.0;
    double pres = 0.0;   // relative primal residual
    double dres = 0.0;   // relative dual residual
    double gap = 0.0;    // absolute duality gap measure
    double relgap = 0.0;
    int iters = 0;

    bool usable() const {
        return status == SocpStatus::Optimal || status == SocpStatus::AlmostOptimal;
    }
};

/// Homogeneous self-dual primal-dual interior-point method with
/// Nesterov-Todd scaling and Mehrotra predictor-corrector. Deterministic for
/// identical inputs.
SocpSolution solve_socp(const SocpProblem& prob, const SocpSettings& settings = {});

} // namespace ded2d::conic

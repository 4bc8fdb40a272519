#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ded2d/model.hpp"

namespace ded2d {

// ---------------------------------------------------------------------------
// Scalar minorants. Each returns a value that never exceeds its exact
// counterpart on the stated domain and matches it at the expansion point.
// ---------------------------------------------------------------------------

/// 2 x xbar - xbar^2 <= x^2, equality at x = xbar.
double lb_square(double x, double xbar);

/// Lower bound on ln(1 + x/y) around (xbar, ybar); all arguments positive.
double lb_log1p_ratio(double x, double y, double xbar, double ybar);

/// Lower bound on (1/t) ln(1 + x/y) around (xbar, ybar, tbar); all positive.
double lb_log1p_ratio_over_t(double x, double y, double t, double xbar, double ybar, double tbar);

/// Lower bound on the unit-modulus penalty around thetabar. Valid over the
/// trust region sum(2 Re{conj(thetabar_n) theta_n} - |thetabar_n|^2) > 0.
double lb_penalty(const VecC& theta, const VecC& thetabar);

/// Thrown when an expansion point cannot support the surrogate coefficients
/// (zero numerator, vanishing D2D power with an active rate threshold, ...).
struct DegenerateExpansion : std::runtime_error {
    explicit DegenerateExpansion(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Affine/conic templates over the subproblem decision vector.
// ---------------------------------------------------------------------------

/// Real affine functional c0 + a'x of the real decision vector.
struct RAff {
    double c0 = 0.0;
    Eigen::VectorXd a;

    explicit RAff(int nvars = 0) : a(Eigen::VectorXd::Zero(nvars)) {}
    double value(const Eigen::VectorXd& x) const { return c0 + a.dot(x); }
};

/// Complex affine functional of the real decision vector.
struct CAff {
    Complex c0{0.0, 0.0};
    VecC a;

    explicit CAff(int nvars = 0) : a(VecC::Zero(nvars)) {}
    Complex value(const Eigen::VectorXd& x) const { return c0 + (a.transpose() * x)(0); }
};

/// Convex quadratic sum(|squares_j(x)|^2) + linear(x); the linear part is
/// nonnegative wherever the subproblem bounds hold.
struct QuadSum {
    std::vector<CAff> squares;
    RAff linear;

    double value(const Eigen::VectorXd& x) const {
        double s = linear.value(x);
        for (const auto& q : squares)
            s += std::norm(q.value(x));
        return s;
    }
};

/// Reciprocal term -coef * numerator / denom(x) with an affine denominator
/// positive over its trust region.
struct Recip {
    double coef = 0.0;      // > 0
    double numerator = 0.0; // > 0 constant
    RAff denom;
};

/// coef * quad(x) entering an expression with a negative sign.
struct QuadTerm {
    double coef = 0.0; // > 0
    QuadSum quad;
};

/// Concave template affine(x) - sum recips - sum quad terms. Tight at the
/// expansion point, a global minorant of the exact quantity over the trust
/// region. Doubles as the numeric evaluator for the property tests.
struct SurrogateExpr {
    RAff affine;
    std::vector<Recip> recips;
    std::vector<QuadTerm> quads;

    double value(const Eigen::VectorXd& x) const {
        double s = affine.value(x);
        for (const auto& r : recips)
            s -= r.coef * r.numerator / r.denom.value(x);
        for (const auto& q : quads)
            s -= q.coef * q.quad.value(x);
        return s;
    }

    /// All reciprocal denominators strictly inside their trust regions.
    bool in_trust_region(const Eigen::VectorXd& x) const {
        for (const auto& r : recips)
            if (r.denom.value(x) <= 0.0)
                return false;
        return true;
    }
};

enum class SubproblemKind { Nota1, Nota2, Ota1, Ota2, FeasNota, FeasOta };

bool is_theta_block(SubproblemKind k);
bool is_feasibility(SubproblemKind k);
bool is_ota(SubproblemKind k);

/// Index map for the subproblem decision vector. Block subproblems order the
/// variables [w | v | p | tau | mu]; the theta subproblems hold interleaved
/// (Re, Im) reflection coefficients.
struct VarLayout {
    SubproblemKind kind{};
    int M = 0, N = 0, U_I = 0, U_E = 0, K = 0;
    int w_base = -1, v_base = -1, p_base = -1, tau_base = -1, mu_index = -1, theta_base = -1;
    int total = 0;

    int w_re(int user, int ant) const { return w_base + 2 * (user * M + ant); }
    int w_im(int user, int ant) const { return w_re(user, ant) + 1; }
    int v_re(int user, int ant) const { return v_base + 2 * (user * M + ant); }
    int v_im(int user, int ant) const { return v_re(user, ant) + 1; }
    int p(int pair) const { return p_base + pair; }
    int tau(int comp) const { return tau_base + comp; }
    int theta_re(int n) const { return theta_base + 2 * n; }
    int theta_im(int n) const { return theta_base + 2 * n + 1; }
};

VarLayout make_layout(SubproblemKind kind, const ChannelSet& ch);

/// Rate surrogate plus its trust-region cuts (empty when no reciprocal with a
/// beamformer- or theta-dependent denominator appears).
struct RateSurrogate {
    SurrogateExpr expr;
    std::vector<RAff> cuts; // required >= 0, strict-interior margin included
};

struct PenaltySurrogate {
    SurrogateExpr expr; // eta/N - eta / S(theta)
    RAff cut;           // S(theta) >= margin
};

/// Composite minorant of the IU throughput term of the given subproblem
/// family, expressed over that subproblem's decision variables.
RateSurrogate build_iu_rate_surrogate(const ChannelSet& ch, const ScenarioConfig& cfg,
                                      const DesignPoint& xbar, SubproblemKind kind, int iu_index,
                                      double trust_margin = 1e-6);

/// Affine minorant of the harvested-energy expression (physical units, mW).
RAff build_energy_linearization(const ChannelSet& ch, const ScenarioConfig& cfg,
                                const DesignPoint& xbar, SubproblemKind kind, int eu_index);

/// Composite minorant of the D2D throughput of one pair (sum over active
/// phases for the shared-time scenario, single term otherwise).
RateSurrogate build_d2d_rate_surrogate(const ChannelSet& ch, const ScenarioConfig& cfg,
                                       const DesignPoint& xbar, SubproblemKind kind,
                                       int pair_index, double trust_margin = 1e-6);

/// Concave minorant of eta * Omega(theta) over the theta block.
PenaltySurrogate build_penalty_surrogate(const VecC& thetabar, double eta, const VarLayout& layout,
                                         double trust_margin = 1e-6);

/// Whole-subproblem template set handed to the conic lowering.
struct SubproblemForm {
    SubproblemKind kind{};
    VarLayout layout;

    std::vector<SurrogateExpr> iu;  // objective family (feasibility: >= mu rows)
    std::vector<SurrogateExpr> d2d; // constraint rows, rhs folded in (>= 0)
    std::vector<RAff> energy;       // constraint rows, rhs folded in (>= 0)
    std::optional<SurrogateExpr> penalty;
    std::vector<RAff> cuts;

    double objective_constant = 0.0; // additive constant outside the conic objective
    double pbmax = 0.0;
    double pkmax = 0.0;
    double tau_max = 1e4;
    std::vector<double> tau_fixed; // fixed time reciprocals (feasibility kinds)
};

/// Builds every surrogate and constraint template of one subproblem at the
/// expansion point xbar. eta is only read by the theta subproblems.
/// For the feasibility kinds, feas_rate_floor decouples the IU-rate rows from
/// the satisfaction variable: instead of rate >= mu they become
/// rate >= floor_i (one entry per IU), leaving mu on the requirement rows.
SubproblemForm build_subproblem(SubproblemKind kind, const ChannelSet& ch,
                                const ScenarioConfig& cfg, const DesignPoint& xbar, double eta,
                                double trust_margin = 1e-6, double tau_max = 1e4,
                                const Eigen::VectorXd* feas_rate_floor = nullptr);

/// Packs the subproblem-relevant slice of a design point into the layout's
/// decision vector (used by tightness checks and tests).
Eigen::VectorXd pack_point(const VarLayout& layout, const DesignPoint& x, double mu = 0.0);

/// Rebuilds a full design point from a subproblem solution, taking the fixed
/// blocks from xbar (theta for block subproblems, beams/powers for the theta
/// subproblems, tau for the feasibility kinds).
DesignPoint recover_point(const SubproblemForm& form, const DesignPoint& xbar,
                          const Eigen::VectorXd& x);

} // namespace ded2d

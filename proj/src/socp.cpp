#include "ded2d/socp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>

namespace ded2d::conic {

namespace {

// Nesterov-Todd scaling state. For the orthant the scaling is diagonal; for
// each second-order cone it is eta * H(wbar) with the hyperbolic Householder
// matrix H(wbar) = [w0, w1'; w1, I + w1 w1'/(1+w0)], wbar'J wbar = 1.
struct Scaling {
    Eigen::VectorXd d;  // orthant: s_i / z_i (W^2 diagonal)
    Eigen::VectorXd dw; // orthant: sqrt(s_i / z_i)
    struct Soc {
        double eta = 1.0; // eta^2 = jnorm(s)/jnorm(z)
        Eigen::VectorXd wbar;
    };
    std::vector<Soc> socs;
};

struct ConeLayout {
    int nonneg = 0;
    std::vector<int> soc_dims;
    std::vector<int> soc_starts;
    int rows = 0;
    int degree = 0; // nonneg count + number of SOC blocks

    explicit ConeLayout(const SocpProblem& p) {
        nonneg = p.nonneg;
        soc_dims = p.soc_dims;
        int at = nonneg;
        for (int d : soc_dims) {
            soc_starts.push_back(at);
            at += d;
        }
        rows = at;
        degree = nonneg + static_cast<int>(soc_dims.size());
    }
};

double jnorm_sq(const Eigen::Ref<const Eigen::VectorXd>& u) {
    return u(0) * u(0) - u.tail(u.size() - 1).squaredNorm();
}

// H(wbar) * u in closed form, O(dim).
Eigen::VectorXd hh_apply(const Eigen::VectorXd& wbar, const Eigen::Ref<const Eigen::VectorXd>& u) {
    const int m = static_cast<int>(u.size());
    const double w0 = wbar(0);
    const auto w1 = wbar.tail(m - 1);
    const double dot = w1.dot(u.tail(m - 1));
    Eigen::VectorXd y(m);
    y(0) = w0 * u(0) + dot;
    y.tail(m - 1) = u.tail(m - 1) + (u(0) + dot / (1.0 + w0)) * w1;
    return y;
}

class Cone {
  public:
    explicit Cone(const ConeLayout& layout) : lay_(layout) {}

    // s = r shifted into the cone interior if necessary
    Eigen::VectorXd bring_to_interior(const Eigen::VectorXd& r, double gamma) const {
        double alpha = -gamma;
        for (int i = 0; i < lay_.nonneg; ++i)
            if (r(i) <= 0.0 && -r(i) > alpha)
                alpha = -r(i);
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            const double res = r(at) - r.segment(at + 1, m - 1).norm();
            if (res <= 0.0 && -res > alpha)
                alpha = -res;
        }
        alpha += 1.0;
        Eigen::VectorXd s = r;
        s.head(lay_.nonneg).array() += alpha;
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b)
            s(lay_.soc_starts[b]) += alpha;
        return s;
    }

    // Recomputes the NT scaling from a strictly interior pair; returns false
    // if either iterate left the cone.
    bool update(const Eigen::VectorXd& s, const Eigen::VectorXd& z, Scaling& W) const {
        W.d.resize(lay_.nonneg);
        W.dw.resize(lay_.nonneg);
        for (int i = 0; i < lay_.nonneg; ++i) {
            if (s(i) <= 0.0 || z(i) <= 0.0)
                return false;
            W.d(i) = s(i) / z(i);
            W.dw(i) = std::sqrt(W.d(i));
        }
        W.socs.resize(lay_.soc_dims.size());
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            const double sres = jnorm_sq(s.segment(at, m));
            const double zres = jnorm_sq(z.segment(at, m));
            if (sres <= 0.0 || zres <= 0.0 || s(at) <= 0.0 || z(at) <= 0.0)
                return false;
            const double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
            Eigen::VectorXd sbar = s.segment(at, m) / snorm;
            Eigen::VectorXd zbar = z.segment(at, m) / znorm;
            const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
            Eigen::VectorXd wbar(m);
            wbar(0) = (0.5 / gamma) * (sbar(0) + zbar(0));
            wbar.tail(m - 1) = (0.5 / gamma) * (sbar.tail(m - 1) - zbar.tail(m - 1));
            W.socs[b].wbar = std::move(wbar);
            W.socs[b].eta = std::sqrt(snorm / znorm);
        }
        return true;
    }

    // y = W u
    Eigen::VectorXd scale(const Scaling& W, const Eigen::VectorXd& u) const {
        Eigen::VectorXd y(lay_.rows);
        y.head(lay_.nonneg) = W.dw.cwiseProduct(u.head(lay_.nonneg));
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            y.segment(at, m) = W.socs[b].eta * hh_apply(W.socs[b].wbar, u.segment(at, m));
        }
        return y;
    }

    // y = W^{-1} u, using H^{-1} = J H J
    Eigen::VectorXd scale_inv(const Scaling& W, const Eigen::VectorXd& u) const {
        Eigen::VectorXd y(lay_.rows);
        y.head(lay_.nonneg) = u.head(lay_.nonneg).cwiseQuotient(W.dw);
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            Eigen::VectorXd ju = u.segment(at, m);
            ju.tail(m - 1) = -ju.tail(m - 1);
            Eigen::VectorXd t = hh_apply(W.socs[b].wbar, ju);
            t.tail(m - 1) = -t.tail(m - 1);
            y.segment(at, m) = t / W.socs[b].eta;
        }
        return y;
    }

    // y = W^2 u
    Eigen::VectorXd scale_sq(const Scaling& W, const Eigen::VectorXd& u) const {
        Eigen::VectorXd y(lay_.rows);
        y.head(lay_.nonneg) = W.d.cwiseProduct(u.head(lay_.nonneg));
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            const auto& wbar = W.socs[b].wbar;
            const auto u_b = u.segment(at, m);
            // W^2 = eta^2 (2 wbar wbar' - J)
            Eigen::VectorXd ju = u_b;
            ju.tail(m - 1) = -ju.tail(m - 1);
            y.segment(at, m) = W.socs[b].eta * W.socs[b].eta * (2.0 * wbar.dot(u_b) * wbar - ju);
        }
        return y;
    }

    // y = (W^2)^{-1} u = eta^{-2} (2 (J wbar)(J wbar)' - J) u
    Eigen::VectorXd scale_sq_inv(const Scaling& W, const Eigen::VectorXd& u) const {
        Eigen::VectorXd y(lay_.rows);
        y.head(lay_.nonneg) = u.head(lay_.nonneg).cwiseQuotient(W.d);
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            Eigen::VectorXd wt = W.socs[b].wbar;
            wt.tail(m - 1) = -wt.tail(m - 1);
            const auto u_b = u.segment(at, m);
            Eigen::VectorXd ju = u_b;
            ju.tail(m - 1) = -ju.tail(m - 1);
            y.segment(at, m) = (2.0 * wt.dot(u_b) * wt - ju) / (W.socs[b].eta * W.socs[b].eta);
        }
        return y;
    }

    // w = u o v, Jordan product; returns the barrier-degree weighted trace
    Eigen::VectorXd jordan_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
        Eigen::VectorXd w(lay_.rows);
        w.head(lay_.nonneg) = u.head(lay_.nonneg).cwiseProduct(v.head(lay_.nonneg));
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            w(at) = u.segment(at, m).dot(v.segment(at, m));
            w.segment(at + 1, m - 1) =
                u(at) * v.segment(at + 1, m - 1) + v(at) * u.segment(at + 1, m - 1);
        }
        return w;
    }

    // v = u \ w (inverse Jordan product)
    Eigen::VectorXd jordan_division(const Eigen::VectorXd& u, const Eigen::VectorXd& w) const {
        Eigen::VectorXd v(lay_.rows);
        v.head(lay_.nonneg) = w.head(lay_.nonneg).cwiseQuotient(u.head(lay_.nonneg));
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            const double u0 = u(at), w0 = w(at);
            const double rho = jnorm_sq(u.segment(at, m));
            const double zeta = u.segment(at + 1, m - 1).dot(w.segment(at + 1, m - 1));
            v(at) = (u0 * w0 - zeta) / rho;
            const double factor = (zeta / u0 - w0) / rho;
            v.segment(at + 1, m - 1) =
                factor * u.segment(at + 1, m - 1) + w.segment(at + 1, m - 1) / u0;
        }
        return v;
    }

    void subtract_identity(Eigen::VectorXd& w, double amount) const {
        w.head(lay_.nonneg).array() -= amount;
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b)
            w(lay_.soc_starts[b]) -= amount;
    }

    // Largest step to the cone boundary along scaled directions; lambda is
    // the scaled point, ds and dz the W-scaled steps.
    double max_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& ds,
                    const Eigen::VectorXd& dz) const {
        double bound = 0.0; // max over -(d/lambda)
        for (int i = 0; i < lay_.nonneg; ++i) {
            bound = std::max(bound, -ds(i) / lambda(i));
            bound = std::max(bound, -dz(i) / lambda(i));
        }
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            const double ln2 = jnorm_sq(lambda.segment(at, m));
            if (ln2 <= 0.0)
                continue;
            const double ln = std::sqrt(ln2);
            const Eigen::VectorXd lbar = lambda.segment(at, m) / ln;
            auto dir_bound = [&](const Eigen::VectorXd& d) {
                const double ldot = lbar(0) * d(at) - lbar.tail(m - 1).dot(d.segment(at + 1, m - 1));
                const double f = (ldot + d(at)) / (lbar(0) + 1.0);
                const double rho0 = ldot / ln;
                const double rho1 =
                    (d.segment(at + 1, m - 1) - f * lbar.tail(m - 1)).norm() / ln;
                return rho1 - rho0;
            };
            bound = std::max(bound, dir_bound(ds));
            bound = std::max(bound, dir_bound(dz));
        }
        return bound <= 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / bound;
    }

  private:
    const ConeLayout& lay_;
};

// KKT system
//
//   [ dI   G' ] [dx]   [bx]
//   [ G  -W^2 ] [dz] = [bz]
//
// solved through the Schur complement M = dI + G' (W^2)^{-1} G, with the SOC
// blocks of G' (W^2)^{-1} G assembled as rank-two updates of precomputed
// G_b' J G_b products.
class KktSolver {
  public:
    KktSolver(const SocpProblem& p, const ConeLayout& lay, const Cone& cone, double reg)
        : p_(p), lay_(lay), cone_(cone), reg_(reg) {
        const int n = p.num_vars();
        gjg_.reserve(lay.soc_dims.size());
        for (std::size_t b = 0; b < lay.soc_dims.size(); ++b) {
            const int at = lay.soc_starts[b], m = lay.soc_dims[b];
            const auto Gb = p.G.middleRows(at, m);
            Eigen::MatrixXd c(n, n);
            c.noalias() = Gb.row(0).transpose() * Gb.row(0);
            c.noalias() -= Gb.bottomRows(m - 1).transpose() * Gb.bottomRows(m - 1);
            gjg_.push_back(std::move(c));
        }
    }

    // Identity scaling (initialization): M = dI + G'G.
    void factor_identity() {
        identity_ = true;
        Eigen::MatrixXd M = p_.G.transpose() * p_.G;
        M.diagonal().array() += reg_;
        llt_.compute(M);
        if (llt_.info() != Eigen::Success)
            throw std::runtime_error("socp: initialization factorization failed");
    }

    bool factor(const Scaling& W) {
        identity_ = false;
        W_ = &W;
        const int n = p_.num_vars();
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
        if (lay_.nonneg > 0) {
            const auto Gl = p_.G.topRows(lay_.nonneg);
            M.noalias() = Gl.transpose() * W.d.cwiseInverse().asDiagonal() * Gl;
        }
        for (std::size_t b = 0; b < lay_.soc_dims.size(); ++b) {
            const int at = lay_.soc_starts[b], m = lay_.soc_dims[b];
            Eigen::VectorXd wt = W.socs[b].wbar;
            wt.tail(m - 1) = -wt.tail(m - 1);
            Eigen::VectorXd a = p_.G.middleRows(at, m).transpose() * wt;
            const double inv_eta2 = 1.0 / (W.socs[b].eta * W.socs[b].eta);
            M.noalias() += inv_eta2 * 2.0 * a * a.transpose();
            M.noalias() -= inv_eta2 * gjg_[b];
        }
        M.diagonal().array() += reg_;
        llt_.compute(M);
        return llt_.info() == Eigen::Success;
    }

    // Solves the KKT system with iterative refinement against the
    // unregularized equations; stops early once the correction stops helping.
    void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& bz, Eigen::VectorXd& dx,
               Eigen::VectorXd& dz, int refine_iters) const {
        dx = solve_schur(bx, bz);
        dz = wsq_inv(p_.G * dx - bz);
        const double bnorm =
            std::max(1.0, std::max(bx.lpNorm<Eigen::Infinity>(), bz.lpNorm<Eigen::Infinity>()));
        double prev = std::numeric_limits<double>::max();
        for (int it = 0; it < refine_iters; ++it) {
            Eigen::VectorXd r1 = bx - p_.G.transpose() * dz;
            Eigen::VectorXd r2 = bz - (p_.G * dx - wsq(dz));
            const double err =
                std::max(r1.lpNorm<Eigen::Infinity>(), r2.lpNorm<Eigen::Infinity>()) / bnorm;
            if (err < 1e-14 || err >= prev)
                break;
            prev = err;
            Eigen::VectorXd ex = solve_schur(r1, r2);
            Eigen::VectorXd ez = wsq_inv(p_.G * ex - r2);
            dx += ex;
            dz += ez;
        }
    }

  private:
    Eigen::VectorXd wsq(const Eigen::VectorXd& u) const {
        return identity_ ? u : cone_.scale_sq(*W_, u);
    }
    Eigen::VectorXd wsq_inv(const Eigen::VectorXd& u) const {
        return identity_ ? u : cone_.scale_sq_inv(*W_, u);
    }
    Eigen::VectorXd solve_schur(const Eigen::VectorXd& bx, const Eigen::VectorXd& bz) const {
        return llt_.solve(bx + p_.G.transpose() * wsq_inv(bz));
    }

    const SocpProblem& p_;
    const ConeLayout& lay_;
    const Cone& cone_;
    double reg_;
    bool identity_ = true;
    const Scaling* W_ = nullptr;
    std::vector<Eigen::MatrixXd> gjg_; // per-SOC G_b' J G_b
    Eigen::LDLT<Eigen::MatrixXd> llt_;
};

struct Iterate {
    Eigen::VectorXd x, s, z;
    double tau = 1.0, kap = 1.0;
    // statistics
    double gap = 0.0, mu = 0.0, pcost = 0.0, dcost = 0.0;
    double pres = 0.0, dres = 0.0;
    std::optional<double> relgap, pinfres, dinfres;
    double cx = 0.0, hz = 0.0;
};

} // namespace

SocpSolution solve_socp(const SocpProblem& prob, const SocpSettings& st) {
    const int n = prob.num_vars();
    const int m = prob.num_rows();
    const ConeLayout lay(prob);
    if (lay.rows != m)
        throw std::invalid_argument("socp: cone dimensions do not match G");
    if (prob.h.size() != m || prob.c.size() != n)
        throw std::invalid_argument("socp: vector sizes do not match G");
    for (int d : prob.soc_dims)
        if (d < 2)
            throw std::invalid_argument("socp: SOC blocks need dimension >= 2");

    const Cone cone(lay);
    KktSolver kkt(prob, lay, cone, st.static_reg);

    const double resx0 = std::max(1.0, prob.c.norm());
    const double resz0 = std::max(1.0, prob.h.norm());

    // Initial point: least-squares primal/dual brought into the cone interior.
    kkt.factor_identity();
    Iterate w;
    {
        Eigen::VectorXd dx, dz;
        kkt.solve(Eigen::VectorXd::Zero(n), prob.h, dx, dz, st.refine_iters);
        w.x = dx;
        w.s = cone.bring_to_interior(-dz, st.gamma);
        kkt.solve(-prob.c, Eigen::VectorXd::Zero(m), dx, dz, st.refine_iters);
        w.z = cone.bring_to_interior(dz, st.gamma);
    }
    w.tau = 1.0;
    w.kap = 1.0;

    Eigen::VectorXd rx(n), rz(m);
    double rt = 0.0, hresx = 0.0, hresz = 0.0;
    double nx = 0.0, ns = 0.0, nz = 0.0;

    auto compute_residuals = [&]() {
        rx = -prob.G.transpose() * w.z;
        hresx = rx.norm();
        rx -= w.tau * prob.c;
        rz = w.s + prob.G * w.x;
        hresz = rz.norm();
        rz -= w.tau * prob.h;
        w.cx = prob.c.dot(w.x);
        w.hz = prob.h.dot(w.z);
        rt = w.kap + w.cx + w.hz;
        nx = w.x.norm();
        ns = w.s.norm();
        nz = w.z.norm();
    };

    auto update_statistics = [&]() {
        w.gap = w.s.dot(w.z);
        w.mu = (w.gap + w.kap * w.tau) / (lay.degree + 1);
        w.pcost = w.cx / w.tau;
        w.dcost = -w.hz / w.tau;
        if (w.pcost < 0.0)
            w.relgap = w.gap / (-w.pcost);
        else if (w.dcost > 0.0)
            w.relgap = w.gap / w.dcost;
        else
            w.relgap.reset();
        w.pres = rz.norm() / std::max(resz0 + nx + ns, 1.0) / w.tau;
        w.dres = rx.norm() / std::max(resx0 + nz, 1.0) / w.tau;
        w.pinfres.reset();
        w.dinfres.reset();
        if (w.hz / std::max(nz, 1.0) < -st.reltol)
            w.pinfres = hresx / std::max(nz, 1.0);
        if (w.cx / std::max(nx, 1.0) < -st.reltol)
            w.dinfres = hresz / std::max(nx + ns, 1.0);
    };

    enum class Verdict { NotYet, Optimal, Pinf, Dinf };
    auto check_exit = [&](bool reduced) {
        const double feastol = reduced ? st.feastol_inacc : st.feastol;
        const double abstol = reduced ? st.abstol_inacc : st.abstol;
        const double reltol = reduced ? st.reltol_inacc : st.reltol;
        if ((-w.cx > 0.0 || -w.hz >= -abstol) && w.pres < feastol && w.dres < feastol &&
            (w.gap < abstol || (w.relgap && *w.relgap < reltol)))
            return Verdict::Optimal;
        if (w.dinfres && *w.dinfres < feastol && w.tau < w.kap)
            return Verdict::Dinf;
        if (w.pinfres && *w.pinfres < feastol && w.tau < w.kap)
            return Verdict::Pinf;
        return Verdict::NotYet;
    };

    auto finish = [&](const Iterate& it, SocpStatus status) {
        SocpSolution sol;
        sol.status = status;
        const double scale =
            (status == SocpStatus::PrimalInfeasible || status == SocpStatus::DualInfeasible ||
             status == SocpStatus::AlmostPrimalInfeasible ||
             status == SocpStatus::AlmostDualInfeasible)
                ? 1.0
                : it.tau;
        sol.x = it.x / scale;
        sol.s = it.s / scale;
        sol.z = it.z / scale;
        sol.pcost = it.pcost;
        sol.pres = it.pres;
        sol.dres = it.dres;
        sol.gap = it.gap;
        sol.relgap = it.relgap.value_or(0.0);
        return sol;
    };

    Scaling W;
    Eigen::VectorXd lambda;
    Eigen::VectorXd dx1(n), dz1(m), dx2(n), dz2(m);
    Iterate best = w;
    bool have_best = false;
    double pres_prev = std::numeric_limits<double>::max();
    double step = 0.0;
    int iter = 0;
    const bool trace = std::getenv("DED2D_SOCP_TRACE") != nullptr;

    for (iter = 0; iter <= st.max_iters; ++iter) {
        compute_residuals();
        update_statistics();
        if (trace)
            std::fprintf(stderr, "it %3d pcost %+.6e dcost %+.6e gap %.2e pres %.2e dres %.2e k/t %.2e mu %.2e step %.4f\n",
                         iter, w.pcost, w.dcost, w.gap, w.pres, w.dres, w.kap / w.tau, w.mu, step);

        const bool bad_update =
            iter > 0 && (w.pres > st.safeguard * pres_prev || w.gap < 0.0 || std::isnan(w.pres));
        if (bad_update) {
            if (have_best)
                w = best;
            const Verdict v = check_exit(true);
            auto sol = finish(w, v == Verdict::Optimal    ? SocpStatus::AlmostOptimal
                                 : v == Verdict::Pinf     ? SocpStatus::AlmostPrimalInfeasible
                                 : v == Verdict::Dinf     ? SocpStatus::AlmostDualInfeasible
                                                          : SocpStatus::Numerics);
            sol.iters = iter;
            return sol;
        }
        pres_prev = w.pres;

        const Verdict v = check_exit(false);
        if (v != Verdict::NotYet) {
            auto sol = finish(w, v == Verdict::Optimal ? SocpStatus::Optimal
                                 : v == Verdict::Pinf  ? SocpStatus::PrimalInfeasible
                                                       : SocpStatus::DualInfeasible);
            sol.iters = iter;
            return sol;
        }
        if (iter > 0 && step <= st.stepmin * st.gamma * (1.0 + 1e-12)) {
            if (have_best)
                w = best;
            const Verdict rv = check_exit(true);
            auto sol = finish(w, rv == Verdict::Optimal ? SocpStatus::AlmostOptimal
                                 : rv == Verdict::Pinf  ? SocpStatus::AlmostPrimalInfeasible
                                 : rv == Verdict::Dinf  ? SocpStatus::AlmostDualInfeasible
                                                        : SocpStatus::Numerics);
            sol.iters = iter;
            return sol;
        }
        if (iter == st.max_iters) {
            if (have_best && best.pres + best.dres < w.pres + w.dres)
                w = best;
            const Verdict rv = check_exit(true);
            auto sol = finish(w, rv == Verdict::Optimal ? SocpStatus::AlmostOptimal
                                 : rv == Verdict::Pinf  ? SocpStatus::AlmostPrimalInfeasible
                                 : rv == Verdict::Dinf  ? SocpStatus::AlmostDualInfeasible
                                                        : SocpStatus::MaxIters);
            sol.iters = iter;
            return sol;
        }

        if (!have_best || w.pres + w.dres + w.mu < best.pres + best.dres + best.mu) {
            best = w;
            have_best = true;
        }

        if (!cone.update(w.s, w.z, W)) {
            auto sol = finish(have_best ? best : w, SocpStatus::Numerics);
            sol.iters = iter;
            return sol;
        }
        lambda = cone.scale(W, w.z);
        if (!kkt.factor(W)) {
            auto sol = finish(have_best ? best : w, SocpStatus::Numerics);
            sol.iters = iter;
            return sol;
        }

        // Constant right-hand side [-c; h], reused for the tau recovery.
        kkt.solve(-prob.c, prob.h, dx1, dz1, st.refine_iters);
        const double dtau_denom = w.kap / w.tau - prob.c.dot(dx1) - prob.h.dot(dz1);

        // Affine (predictor) direction.
        kkt.solve(rx, w.s - rz, dx2, dz2, st.refine_iters);
        const double dtau_aff =
            (rt - w.kap + prob.c.dot(dx2) + prob.h.dot(dz2)) / dtau_denom;
        Eigen::VectorXd dz_aff = dz2 + dtau_aff * dz1;
        Eigen::VectorXd w_dz_aff = cone.scale(W, dz_aff);
        Eigen::VectorXd ds_aff_by_w = -w_dz_aff - lambda;
        const double dkap_aff = -w.kap - (w.kap / w.tau) * dtau_aff;

        const double step_aff = std::clamp(
            std::min({cone.max_step(lambda, ds_aff_by_w, w_dz_aff),
                      dtau_aff < 0.0 ? -w.tau / dtau_aff : std::numeric_limits<double>::infinity(),
                      dkap_aff < 0.0 ? -w.kap / dkap_aff : std::numeric_limits<double>::infinity()}),
            st.stepmin, st.stepmax);
        const double sigma =
            std::clamp(std::pow(1.0 - step_aff, 3.0), st.sigmamin, st.sigmamax);

        // Combined (corrector) direction.
        const double sigmamu = sigma * w.mu;
        Eigen::VectorXd ds = cone.jordan_product(lambda, lambda);
        ds += cone.jordan_product(ds_aff_by_w, w_dz_aff);
        cone.subtract_identity(ds, sigmamu);
        Eigen::VectorXd lambda_div_ds = cone.jordan_division(lambda, ds);
        Eigen::VectorXd w_lambda_div_ds = cone.scale(W, lambda_div_ds);

        const double one_minus_sigma = 1.0 - sigma;
        kkt.solve(one_minus_sigma * rx, -one_minus_sigma * rz + w_lambda_div_ds, dx2, dz2,
                  st.refine_iters);
        const double bkap = w.kap * w.tau + dkap_aff * dtau_aff - sigmamu;
        const double dtau = (one_minus_sigma * rt - bkap / w.tau + prob.c.dot(dx2) +
                             prob.h.dot(dz2)) /
                            dtau_denom;
        dx2 += dtau * dx1;
        dz2 += dtau * dz1;
        Eigen::VectorXd w_dz = cone.scale(W, dz2);
        Eigen::VectorXd ds_by_w = -(lambda_div_ds + w_dz);
        const double dkap = -(bkap + w.kap * dtau) / w.tau;

        step = st.gamma * std::clamp(std::min({cone.max_step(lambda, ds_by_w, w_dz),
                                               dtau < 0.0 ? -w.tau / dtau
                                                          : std::numeric_limits<double>::infinity(),
                                               dkap < 0.0 ? -w.kap / dkap
                                                          : std::numeric_limits<double>::infinity()}),
                                     st.stepmin, st.stepmax);

        Eigen::VectorXd ds_full = cone.scale(W, ds_by_w);
        w.x += step * dx2;
        w.z += step * dz2;
        w.s += step * ds_full;
        w.kap += step * dkap;
        w.tau += step * dtau;
    }

    auto sol = finish(have_best ? best : w, SocpStatus::MaxIters);
    sol.iters = iter;
    return sol;
}

} // namespace ded2d::conic

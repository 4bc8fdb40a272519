#include "ded2d/lowering.hpp"

#include <cmath>
#include <string>

namespace ded2d::conic {

namespace {

class Builder {
  public:
    explicit Builder(const SubproblemForm& form) : form_(form), base_(form.layout.total) {
        // Auxiliary variable census: one epigraph for optimizing kinds, one
        // reciprocal bound per Recip, one epigraph per non-degenerate
        // quadratic, time/power splitters for the block subproblems.
        naux_ = 0;
        const bool feas = is_feasibility(form.kind);
        const bool theta = is_theta_block(form.kind);
        if (!feas)
            epi_ = alloc();
        for (const auto& e : form.iu)
            census(e);
        for (const auto& e : form.d2d)
            census(e);
        if (form.penalty)
            census(*form.penalty);
        if (!feas && !theta) {
            const int tau_count = form.kind == SubproblemKind::Ota1 ? 3 : 2;
            for (int t = 0; t < tau_count; ++t)
                time_recip_.push_back(alloc());
            for (int i = 0; i < form.layout.U_I + form.layout.U_E; ++i)
                beam_quota_.push_back(alloc());
        }
        prog_.num_vars = base_ + naux_;
        prog_.objective = Eigen::VectorXd::Zero(prog_.num_vars);
    }

    LoweredSubproblem run() {
        const auto& L = form_.layout;
        const bool feas = is_feasibility(form_.kind);
        const bool theta = is_theta_block(form_.kind);

        if (feas) {
            prog_.objective(L.mu_index) = 1.0;
        } else {
            prog_.objective(epi_) = 1.0;
            prog_.objective_constant = form_.objective_constant;
        }

        next_aux_ = 0;
        if (!feas)
            next_aux_ = 1; // epigraph allocated first

        for (std::size_t i = 0; i < form_.iu.size(); ++i) {
            RowAcc row = expand(form_.iu[i], "iu_rate_" + std::to_string(i));
            if (!feas)
                row.a(epi_) -= 1.0;
            push_nonneg(row, "iu_rate_" + std::to_string(i));
        }
        for (std::size_t k = 0; k < form_.d2d.size(); ++k) {
            RowAcc row = expand(form_.d2d[k], "d2d_rate_" + std::to_string(k));
            push_nonneg(row, "d2d_rate_" + std::to_string(k));
        }
        if (form_.penalty) {
            RowAcc pen = expand(*form_.penalty, "penalty");
            // concave penalty enters the objective directly
            prog_.objective_constant += pen.c0;
            for (int j = 0; j < prog_.num_vars; ++j)
                prog_.objective(j) += pen.a(j);
        }
        for (std::size_t j = 0; j < form_.energy.size(); ++j)
            push_nonneg(RowAcc(embed(form_.energy[j])), "energy_eu_" + std::to_string(j));
        for (std::size_t cidx = 0; cidx < form_.cuts.size(); ++cidx)
            push_nonneg(RowAcc(embed(form_.cuts[cidx])), "trust_cut_" + std::to_string(cidx));

        if (theta) {
            for (int n = 0; n < L.N; ++n) {
                Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, prog_.num_vars);
                Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
                b(0) = 1.0;
                A(1, L.theta_re(n)) = 1.0;
                A(2, L.theta_im(n)) = 1.0;
                prog_.add_block(ConeKind::Soc, std::move(A), std::move(b),
                                "theta_ball_" + std::to_string(n));
            }
        } else {
            beams_and_powers();
        }

        prog_.validate();
        LoweredSubproblem out;
        out.prog = std::move(prog_);
        out.base_vars = base_;
        out.epigraph_index = feas ? -1 : epi_;
        return out;
    }

  private:
    struct RowAcc {
        double c0 = 0.0;
        Eigen::VectorXd a;
        explicit RowAcc(int n) : a(Eigen::VectorXd::Zero(n)) {}
        explicit RowAcc(std::pair<double, Eigen::VectorXd> e) : c0(e.first), a(std::move(e.second)) {}
    };

    int alloc() { return base_ + naux_++; }

    void census(const SurrogateExpr& e) {
        naux_ += static_cast<int>(e.recips.size());
        for (const auto& q : e.quads)
            if (!q.quad.squares.empty())
                ++naux_;
    }

    std::pair<double, Eigen::VectorXd> embed(const RAff& r) const {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(prog_.num_vars);
        a.head(base_) = r.a;
        return {r.c0, std::move(a)};
    }

    // Replaces each reciprocal and quadratic term of the expression by a
    // cone-bounded auxiliary, returning the affine row in the extended
    // variables. Every auxiliary enters with a negative coefficient, so any
    // feasible extended point under-estimates the surrogate value.
    RowAcc expand(const SurrogateExpr& e, const std::string& tag) {
        RowAcc row(embed(e.affine));
        for (const auto& r : e.recips) {
            // u >= numerator / denom(x), normalized so u is O(1): the cone is
            // 2 u (denom / 2 num) >= 1
            const int u = base_ + next_aux_++;
            row.a(u) -= r.coef;
            const double inv_num = 1.0 / r.numerator;
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, prog_.num_vars);
            Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
            A(0, u) = 1.0;
            A.row(1).head(base_) = 0.5 * inv_num * r.denom.a;
            b(1) = 0.5 * inv_num * r.denom.c0;
            b(2) = 1.0;
            prog_.add_block(ConeKind::RotatedSoc, std::move(A), std::move(b), tag + "_recip");
        }
        for (const auto& q : e.quads) {
            if (q.quad.squares.empty()) {
                row.c0 -= q.coef * q.quad.linear.c0;
                row.a.head(base_) -= q.coef * q.quad.linear.a;
                continue;
            }
            const int qa = base_ + next_aux_++;
            row.a(qa) -= q.coef;
            const int rows = 2 + 2 * static_cast<int>(q.quad.squares.size());
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, prog_.num_vars);
            Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
            A(0, qa) = 1.0;
            A.row(0).head(base_) -= q.quad.linear.a;
            b(0) = -q.quad.linear.c0;
            b(1) = 0.5;
            int at = 2;
            for (const auto& sq : q.quad.squares) {
                for (int j = 0; j < base_; ++j) {
                    A(at, j) = std::real(sq.a(j));
                    A(at + 1, j) = std::imag(sq.a(j));
                }
                b(at) = std::real(sq.c0);
                b(at + 1) = std::imag(sq.c0);
                at += 2;
            }
            prog_.add_block(ConeKind::RotatedSoc, std::move(A), std::move(b), tag + "_quad");
        }
        return row;
    }

    void push_nonneg(const RowAcc& row, const std::string& label) {
        Eigen::MatrixXd A(1, prog_.num_vars);
        A.row(0) = row.a;
        Eigen::VectorXd b(1);
        b(0) = row.c0;
        prog_.add_block(ConeKind::NonNeg, std::move(A), std::move(b), label);
    }

    void linear_row(std::initializer_list<std::pair<int, double>> terms, double c0,
                    const std::string& label) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, prog_.num_vars);
        for (auto [idx, coef] : terms)
            A(0, idx) = coef;
        Eigen::VectorXd b(1);
        b(0) = c0;
        prog_.add_block(ConeKind::NonNeg, std::move(A), std::move(b), label);
    }

    // Norm caps, power budget, D2D power bounds and the time budget of the
    // beam-block subproblems.
    void beams_and_powers() {
        const auto& L = form_.layout;
        const bool feas = is_feasibility(form_.kind);
        const bool ota = is_ota(form_.kind);
        const double sqrt_pb = std::sqrt(form_.pbmax);

        auto beam_norm_block = [&](bool info_beam, int user, const std::string& label) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1 + 2 * L.M, prog_.num_vars);
            Eigen::VectorXd b = Eigen::VectorXd::Zero(1 + 2 * L.M);
            b(0) = sqrt_pb;
            for (int m = 0; m < L.M; ++m) {
                const int re = info_beam ? L.w_re(user, m) : L.v_re(user, m);
                A(1 + 2 * m, re) = 1.0;
                A(2 + 2 * m, re + 1) = 1.0;
            }
            prog_.add_block(ConeKind::Soc, std::move(A), std::move(b), label);
        };
        for (int i = 0; i < L.U_I; ++i)
            beam_norm_block(true, i, "w_norm_" + std::to_string(i));
        for (int j = 0; j < L.U_E; ++j)
            beam_norm_block(false, j, "v_norm_" + std::to_string(j));

        for (int k = 0; k < L.K; ++k) {
            linear_row({{L.p(k), 1.0}}, 0.0, "p_nonneg_" + std::to_string(k));
            if (ota && !feas) {
                linear_row({{L.p(k), -1.0}, {L.tau(2), form_.pkmax}}, 0.0,
                           "p_time_budget_" + std::to_string(k));
            } else if (ota && feas) {
                linear_row({{L.p(k), -1.0}}, form_.pkmax * form_.tau_fixed[2],
                           "p_time_budget_" + std::to_string(k));
            } else {
                linear_row({{L.p(k), -1.0}}, form_.pkmax, "p_cap_" + std::to_string(k));
            }
        }

        if (feas) {
            // fixed time split: one power-budget cone over the scaled beams
            const double budget =
                ota ? form_.pbmax * (1.0 - 1.0 / form_.tau_fixed[2]) : form_.pbmax;
            const int rows = 1 + 2 * L.M * (L.U_I + L.U_E);
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, prog_.num_vars);
            Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
            b(0) = std::sqrt(budget);
            int at = 1;
            const double wi = 1.0 / std::sqrt(form_.tau_fixed[0]);
            const double ve = 1.0 / std::sqrt(form_.tau_fixed[1]);
            for (int i = 0; i < L.U_I; ++i)
                for (int m = 0; m < L.M; ++m) {
                    A(at++, L.w_re(i, m)) = wi;
                    A(at++, L.w_im(i, m)) = wi;
                }
            for (int j = 0; j < L.U_E; ++j)
                for (int m = 0; m < L.M; ++m) {
                    A(at++, L.v_re(j, m)) = ve;
                    A(at++, L.v_im(j, m)) = ve;
                }
            prog_.add_block(ConeKind::Soc, std::move(A), std::move(b), "power_budget");
            return;
        }

        const int tau_count = form_.kind == SubproblemKind::Ota1 ? 3 : 2;
        for (int t = 0; t < tau_count; ++t) {
            linear_row({{L.tau(t), 1.0}}, -1.0, "tau_lower_" + std::to_string(t));
            linear_row({{L.tau(t), -1.0}}, form_.tau_max, "tau_upper_" + std::to_string(t));
            // s_t * tau_t >= 1
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, prog_.num_vars);
            Eigen::VectorXd b = Eigen::VectorXd::Zero(3);
            A(0, time_recip_[t]) = 1.0;
            A(1, L.tau(t)) = 0.5;
            b(2) = 1.0;
            prog_.add_block(ConeKind::RotatedSoc, std::move(A), std::move(b),
                            "time_recip_" + std::to_string(t));
        }
        {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, prog_.num_vars);
            for (int t = 0; t < tau_count; ++t)
                A(0, time_recip_[t]) = -1.0;
            Eigen::VectorXd b(1);
            b(0) = 1.0;
            prog_.add_block(ConeKind::NonNeg, std::move(A), std::move(b), "time_budget");
        }

        // m_b * tau >= ||beam||^2 per beam, then sum m_b within the budget
        int quota = 0;
        auto beam_quota_block = [&](bool info_beam, int user, int tau_comp) {
            const int rows = 2 + 2 * L.M;
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, prog_.num_vars);
            Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
            A(0, beam_quota_[quota]) = 1.0;
            A(1, L.tau(tau_comp)) = 0.5;
            for (int m = 0; m < L.M; ++m) {
                const int re = info_beam ? L.w_re(user, m) : L.v_re(user, m);
                A(2 + 2 * m, re) = 1.0;
                A(3 + 2 * m, re + 1) = 1.0;
            }
            prog_.add_block(ConeKind::RotatedSoc, std::move(A), std::move(b),
                            "beam_power_quota_" + std::to_string(quota));
            ++quota;
        };
        for (int i = 0; i < L.U_I; ++i)
            beam_quota_block(true, i, 0);
        for (int j = 0; j < L.U_E; ++j)
            beam_quota_block(false, j, 1);

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, prog_.num_vars);
        for (int q = 0; q < quota; ++q)
            A(0, beam_quota_[q]) = -1.0;
        if (ota)
            A(0, time_recip_[2]) = -form_.pbmax;
        Eigen::VectorXd b(1);
        b(0) = form_.pbmax;
        prog_.add_block(ConeKind::NonNeg, std::move(A), std::move(b), "power_budget");
    }

    const SubproblemForm& form_;
    int base_ = 0;
    int naux_ = 0;
    int next_aux_ = 0;
    int epi_ = -1;
    std::vector<int> time_recip_;
    std::vector<int> beam_quota_;
    ConicProgram prog_;
};

} // namespace

LoweredSubproblem lower_subproblem(const SubproblemForm& form) { return Builder(form).run(); }

double surrogate_objective(const SubproblemForm& form, const Eigen::VectorXd& x_base) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : form.iu)
        best = std::min(best, e.value(x_base));
    if (is_feasibility(form.kind))
        return x_base(form.layout.mu_index);
    double obj = best + form.objective_constant;
    if (form.penalty)
        obj += form.penalty->value(x_base);
    return obj;
}

double surrogate_violation(const SubproblemForm& form, const Eigen::VectorXd& x_base) {
    double worst = 0.0;
    for (const auto& e : form.d2d)
        worst = std::max(worst, -e.value(x_base));
    for (const auto& e : form.energy)
        worst = std::max(worst, -e.value(x_base));
    for (const auto& cut : form.cuts)
        worst = std::max(worst, -cut.value(x_base));
    return worst;
}

} // namespace ded2d::conic

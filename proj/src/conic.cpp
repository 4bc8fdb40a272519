#include "ded2d/conic.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace ded2d::conic {

void ConicProgram::add_block(ConeKind kind, Eigen::MatrixXd A, Eigen::VectorXd b, std::string label) {
    if (A.rows() != b.size() || A.cols() != num_vars)
        throw std::invalid_argument("conic: block dimensions inconsistent ('" + label + "')");
    blocks.push_back({kind, std::move(A), std::move(b), std::move(label)});
}

void ConicProgram::validate() const {
    if (objective.size() != num_vars)
        throw std::invalid_argument("conic: objective length mismatch");
    for (const auto& blk : blocks) {
        if (blk.A.rows() != blk.b.size() || blk.A.cols() != num_vars)
            throw std::invalid_argument("conic: block dimensions inconsistent ('" + blk.label + "')");
        if (blk.kind == ConeKind::Soc && blk.rows() < 2)
            throw std::invalid_argument("conic: SOC block too small ('" + blk.label + "')");
        if (blk.kind == ConeKind::RotatedSoc && blk.rows() < 3)
            throw std::invalid_argument("conic: rotated SOC block too small ('" + blk.label + "')");
    }
}

int ConicProgram::total_rows() const {
    int r = 0;
    for (const auto& blk : blocks)
        r += blk.rows();
    return r;
}

namespace {

const char* cone_name(ConeKind k) {
    switch (k) {
        case ConeKind::Zero: return "zero";
        case ConeKind::NonNeg: return "nonneg";
        case ConeKind::Soc: return "soc";
        case ConeKind::RotatedSoc: return "rsoc";
    }
    return "?";
}

} // namespace

void ConicProgram::dump(std::ostream& out) const {
    out << "conic_program v1\n";
    out << "vars " << num_vars << "\n";
    out << "maximize";
    for (int j = 0; j < num_vars; ++j)
        out << ' ' << objective(j);
    out << "\nconstant " << objective_constant << "\n";
    out << "blocks " << blocks.size() << "\n";
    for (const auto& blk : blocks) {
        out << "block " << cone_name(blk.kind) << ' ' << blk.rows() << " # " << blk.label << "\n";
        for (int r = 0; r < blk.rows(); ++r) {
            out << "  ";
            for (int j = 0; j < num_vars; ++j)
                out << blk.A(r, j) << ' ';
            out << "| " << blk.b(r) << "\n";
        }
    }
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIter: return "max_iter";
    }
    return "?";
}

ConicSolution solve(const ConicProgram& prog, double tol) {
    prog.validate();
    const auto t0 = std::chrono::steady_clock::now();

    // Count standard-form rows: equalities expand to two inequality rows,
    // rotated cones keep their row count under the SOC transformation.
    int nonneg_rows = 0;
    int soc_rows = 0;
    std::vector<int> soc_dims;
    for (const auto& blk : prog.blocks) {
        switch (blk.kind) {
            case ConeKind::Zero: nonneg_rows += 2 * blk.rows(); break;
            case ConeKind::NonNeg: nonneg_rows += blk.rows(); break;
            case ConeKind::Soc:
            case ConeKind::RotatedSoc:
                soc_rows += blk.rows();
                soc_dims.push_back(blk.rows());
                break;
        }
    }

    SocpProblem p;
    p.nonneg = nonneg_rows;
    p.soc_dims = std::move(soc_dims);
    p.G.setZero(nonneg_rows + soc_rows, prog.num_vars);
    p.h.setZero(nonneg_rows + soc_rows);
    p.c = -prog.objective; // solver minimizes

    // The solver wants h - Gx in the cone; a block y = Ax + b maps to
    // G = -A, h = b. Each block is scaled by its largest coefficient (cones
    // are invariant under positive scaling) to tame mixed-unit rows.
    auto block_scale = [](const ConeBlock& blk, int row_begin, int row_count) {
        double s = 0.0;
        for (int r = row_begin; r < row_begin + row_count; ++r) {
            s = std::max(s, blk.A.row(r).cwiseAbs().maxCoeff());
            s = std::max(s, std::abs(blk.b(r)));
        }
        return s > 0.0 ? s : 1.0;
    };

    int at_nonneg = 0;
    int at_soc = nonneg_rows;
    for (const auto& blk : prog.blocks) {
        switch (blk.kind) {
            case ConeKind::Zero:
                for (int r = 0; r < blk.rows(); ++r) {
                    const double s = block_scale(blk, r, 1);
                    p.G.row(at_nonneg) = -blk.A.row(r) / s;
                    p.h(at_nonneg++) = blk.b(r) / s;
                    p.G.row(at_nonneg) = blk.A.row(r) / s;
                    p.h(at_nonneg++) = -blk.b(r) / s;
                }
                break;
            case ConeKind::NonNeg:
                for (int r = 0; r < blk.rows(); ++r) {
                    const double s = block_scale(blk, r, 1);
                    p.G.row(at_nonneg) = -blk.A.row(r) / s;
                    p.h(at_nonneg++) = blk.b(r) / s;
                }
                break;
            case ConeKind::Soc: {
                const double s = block_scale(blk, 0, blk.rows());
                p.G.middleRows(at_soc, blk.rows()) = -blk.A / s;
                p.h.segment(at_soc, blk.rows()) = blk.b / s;
                at_soc += blk.rows();
                break;
            }
            case ConeKind::RotatedSoc: {
                // (a, b, u) with 2ab >= ||u||^2  <=>  ||(a-b, sqrt(2) u)|| <= a+b
                const double s = block_scale(blk, 0, blk.rows());
                const int rows = blk.rows();
                Eigen::MatrixXd A(rows, prog.num_vars);
                Eigen::VectorXd b(rows);
                A.row(0) = (blk.A.row(0) + blk.A.row(1)) / s;
                b(0) = (blk.b(0) + blk.b(1)) / s;
                A.row(1) = (blk.A.row(0) - blk.A.row(1)) / s;
                b(1) = (blk.b(0) - blk.b(1)) / s;
                if (rows > 2) {
                    A.bottomRows(rows - 2) = std::numbers::sqrt2 * blk.A.bottomRows(rows - 2) / s;
                    b.tail(rows - 2) = std::numbers::sqrt2 * blk.b.tail(rows - 2) / s;
                }
                p.G.middleRows(at_soc, rows) = -A;
                p.h.segment(at_soc, rows) = b;
                at_soc += rows;
                break;
            }
        }
    }

    // Ruiz equilibration. Rows of one cone block share a single scale (cones
    // are invariant under positive scaling); columns are a plain variable
    // substitution undone after the solve.
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(prog.num_vars);
    {
        std::vector<std::pair<int, int>> row_groups;
        for (int r = 0; r < nonneg_rows; ++r)
            row_groups.emplace_back(r, 1);
        int at = nonneg_rows;
        for (int d : p.soc_dims) {
            row_groups.emplace_back(at, d);
            at += d;
        }
        for (int pass = 0; pass < 3; ++pass) {
            for (auto [start, len] : row_groups) {
                double m = p.h.segment(start, len).cwiseAbs().maxCoeff();
                m = std::max(m, p.G.middleRows(start, len).cwiseAbs().maxCoeff());
                if (m > 0.0) {
                    const double s = std::sqrt(m);
                    p.G.middleRows(start, len) /= s;
                    p.h.segment(start, len) /= s;
                }
            }
            for (int j = 0; j < prog.num_vars; ++j) {
                const double m = p.G.col(j).cwiseAbs().maxCoeff();
                if (m > 0.0) {
                    const double s = std::sqrt(m);
                    p.G.col(j) /= s;
                    col_scale(j) *= s;
                }
            }
        }
        p.c = p.c.cwiseQuotient(col_scale);
    }

    SocpSettings settings;
    settings.feastol = tol;
    settings.abstol = tol;
    settings.reltol = tol;
    settings.feastol_inacc = std::max(tol * 1e4, 1e-6);
    settings.abstol_inacc = std::max(tol * 1e4, 1e-6);
    settings.reltol_inacc = std::max(tol * 1e4, 1e-6);
    SocpSolution raw = solve_socp(p, settings);
    raw.x = raw.x.cwiseQuotient(col_scale);

    ConicSolution sol;
    sol.x = raw.x;
    sol.iterations = raw.iters;
    sol.primal_residual = raw.pres;
    sol.dual_residual = raw.dres;
    sol.gap = raw.gap;
    switch (raw.status) {
        case SocpStatus::Optimal:
        case SocpStatus::AlmostOptimal:
            sol.status = SolveStatus::Optimal;
            break;
        case SocpStatus::PrimalInfeasible:
        case SocpStatus::AlmostPrimalInfeasible:
            sol.status = SolveStatus::Infeasible;
            break;
        case SocpStatus::DualInfeasible:
        case SocpStatus::AlmostDualInfeasible:
            sol.status = SolveStatus::Unbounded;
            break;
        default:
            sol.status = SolveStatus::MaxIter;
            break;
    }
    sol.objective = prog.objective.dot(sol.x) + prog.objective_constant;
    sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return sol;
}

} // namespace ded2d::conic

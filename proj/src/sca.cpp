#include "ded2d/sca.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "ded2d/lowering.hpp"
#include "ded2d/rng.hpp"

namespace ded2d {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

enum RngTag : std::uint64_t { kTheta0 = 101, kInitDraw = 102, kRestart = 103 };

VecC random_unit_theta(const ScenarioConfig& cfg, std::uint64_t seed) {
    Rng rng = Rng(seed).fork(kTheta0);
    VecC theta(cfg.num_irs_elements);
    for (int n = 0; n < cfg.num_irs_elements; ++n)
        theta(n) = std::polar(1.0, rng.uniform(0.0, 2.0 * std::numbers::pi));
    return theta;
}

ModelEval evaluate(const ChannelSet& ch, const DesignPoint& x, const ScenarioConfig& cfg,
                   Scenario sc) {
    return sc == Scenario::Ota ? evaluate_ota(ch, x, cfg) : evaluate_nota(ch, x, cfg);
}

// Random draw satisfying the power-side constraints at the fixed time split.
DesignPoint initial_draw(const ChannelSet& ch, const ScenarioConfig& cfg, Scenario sc, Rng rng) {
    const bool ota = sc == Scenario::Ota;
    DesignPoint x;
    x.tau = ota ? std::vector<double>{3.0, 3.0, 3.0} : std::vector<double>{2.0, 2.0};
    const double pb = cfg.pbmax_mw();
    const double budget = ota ? pb * (1.0 - 1.0 / x.tau[2]) : pb;
    const int beams = ch.U_I + ch.U_E;
    auto draw_beam = [&](double share_tau) {
        VecC b(ch.M);
        for (int m = 0; m < ch.M; ++m)
            b(m) = rng.cnormal();
        const double target =
            std::min(0.9 * pb, 0.9 * budget * share_tau / std::max(1, beams));
        b *= std::sqrt(target) / b.norm();
        return b;
    };
    x.w.resize(ch.U_I);
    for (auto& wi : x.w)
        wi = draw_beam(x.tau[0]);
    x.v.resize(ch.U_E);
    for (auto& vj : x.v)
        vj = draw_beam(x.tau[1]);
    x.p.resize(ch.K);
    const double pk_cap = ota ? cfg.pkmax_mw() * x.tau[2] : cfg.pkmax_mw();
    for (int k = 0; k < ch.K; ++k)
        x.p(k) = 0.5 * pk_cap;
    return x;
}

struct SolveOutcome {
    bool ok = false;
    DesignPoint point;
    double conic_objective = 0.0;
    double wall_ms = 0.0;
    conic::SolveStatus status = conic::SolveStatus::MaxIter;
};

// Builds, lowers and solves one subproblem at xbar; on an infeasible lowered
// program the trust margin is shrunk once by 10x and the solve retried.
SolveOutcome solve_block(SubproblemKind kind, const ChannelSet& ch, const ScenarioConfig& cfg,
                         const DesignPoint& xbar, double eta, const AlgorithmOptions& opts,
                         const Eigen::VectorXd* feas_rate_floor = nullptr) {
    SolveOutcome out;
    const auto t0 = Clock::now();
    double margin = opts.trust_margin;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const SubproblemForm form =
            build_subproblem(kind, ch, cfg, xbar, eta, margin, opts.tau_max, feas_rate_floor);
        const auto lowered = conic::lower_subproblem(form);
        const auto sol = conic::solve(lowered.prog, opts.conic_tol);
        out.status = sol.status;
        if (sol.status == conic::SolveStatus::Optimal) {
            out.ok = true;
            out.point = recover_point(form, xbar, sol.x.head(form.layout.total));
            out.conic_objective = sol.objective;
            break;
        }
        if (sol.status != conic::SolveStatus::Infeasible)
            break;
        margin *= 0.1;
    }
    out.wall_ms = ms_since(t0);
    return out;
}

} // namespace

int RunTrace::converged_at(double rel_tol) const {
    for (std::size_t i = 1; i < iters.size(); ++i) {
        const double prev = iters[i - 1].penalized;
        if (std::abs(iters[i].penalized - prev) < rel_tol * std::max(1.0, std::abs(prev)))
            return iters[i].iter;
    }
    return -1;
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::MaxIters: return "max_iters";
        case StopReason::SolverFailure: return "solver_failure";
        case StopReason::InfeasibleInit: return "infeasible_init";
    }
    return "?";
}

FeasibilityResult find_feasible(const ChannelSet& ch, const ScenarioConfig& cfg,
                                const AlgorithmOptions& opts, Scenario scenario,
                                const VecC& theta0) {
    const SubproblemKind kind =
        scenario == Scenario::Ota ? SubproblemKind::FeasOta : SubproblemKind::FeasNota;
    FeasibilityResult res;

    Rng root(opts.rng_seed);

    // no energy or D2D requirement: any power-feasible draw already satisfies
    // every constraint, so the margin is vacuously at its unit target
    const bool has_requirements =
        (cfg.emin_mw() > 0.0 && ch.U_E > 0) || (cfg.rkmin_nats() > 0.0 && ch.K > 0);
    if (!has_requirements) {
        DesignPoint x = initial_draw(ch, cfg, scenario, root.fork(kInitDraw));
        x.theta = theta0;
        res.rounds = 1;
        res.mu = 1.0;
        res.point = x;
        return res;
    }

    // The equal split is tried first; instances whose blocking requirement
    // needs a lopsided split (heavy D2D time, heavy energy time) get further
    // candidates before an infeasible report.
    const std::vector<std::vector<double>> tau_candidates =
        scenario == Scenario::Ota
            ? std::vector<std::vector<double>>{{3.0, 3.0, 3.0}, {6.0, 6.0, 1.5}, {4.5, 1.8, 4.5}}
            : std::vector<std::vector<double>>{{2.0, 2.0}, {4.0, 4.0 / 3.0}, {4.0 / 3.0, 4.0}};

    int rounds_left = opts.feas_max_rounds;
    for (std::size_t cand = 0; cand < tau_candidates.size() && rounds_left > 0; ++cand) {
        DesignPoint x = initial_draw(ch, cfg, scenario, root.fork(kInitDraw).fork(cand));
        x.tau = tau_candidates[cand];
        x.theta = theta0;

        // Phase 1 couples mu to the IU-rate rows; once that cap stalls below
        // the unit target, phase 2 freezes the rates at a strictly feasible
        // floor and lets mu scale the requirement rows alone.
        int restarts = 0;
        Eigen::VectorXd rate_floor;
        bool floored = false;
        bool give_up = false;
        while (rounds_left > 0 && !give_up) {
            --rounds_left;
            ++res.rounds;
            SolveOutcome out;
            try {
                out = solve_block(kind, ch, cfg, x, 0.0, opts, floored ? &rate_floor : nullptr);
            } catch (const DegenerateExpansion&) {
                if (++restarts > opts.feas_restart_attempts)
                    break;
                x = initial_draw(ch, cfg, scenario, root.fork(kRestart).fork(restarts));
                x.tau = tau_candidates[cand];
                x.theta = theta0;
                continue;
            }
            if (!out.ok)
                break;
            x = out.point;
            res.mu_history.push_back(out.conic_objective);
            res.mu = std::max(res.mu, out.conic_objective);
            // unit margin certifies feasibility through the inner
            // approximation; the exact constraints can hold earlier when the
            // requirements are slack
            if (evaluate(ch, x, cfg, scenario).feasible(1e-6)) {
                res.point = x;
                return res;
            }
            const auto& h = res.mu_history;
            const bool stalled = h.size() >= 2 && h.back() < 1.0 &&
                                 std::abs(h.back() - h[h.size() - 2]) <
                                     1e-3 * std::max(1.0, std::abs(h.back()));
            if (stalled) {
                if (!floored) {
                    rate_floor = 0.5 * evaluate(ch, x, cfg, scenario).iu_throughput;
                    floored = true;
                } else {
                    give_up = true; // move to the next time split
                }
            }
        }
    }
    return res;
}

FeasibilityResult find_feasible_nota(const ChannelSet& ch, const ScenarioConfig& cfg,
                                     const AlgorithmOptions& opts) {
    return find_feasible(ch, cfg, opts, Scenario::Nota, random_unit_theta(cfg, opts.rng_seed));
}

FeasibilityResult find_feasible_ota(const ChannelSet& ch, const ScenarioConfig& cfg,
                                    const AlgorithmOptions& opts) {
    return find_feasible(ch, cfg, opts, Scenario::Ota, random_unit_theta(cfg, opts.rng_seed));
}

double select_eta(const DesignPoint& x0, const ChannelSet& ch, const ScenarioConfig& cfg,
                  Scenario scenario) {
    const ModelEval ev = evaluate(ch, x0, cfg, scenario);
    const double min_throughput = ev.iu_throughput.minCoeff();
    if (x0.theta.size() == 0)
        return min_throughput;
    const double omega = penalty_omega(x0.theta);
    if (std::abs(omega) < 1e-12)
        return min_throughput; // unit-modulus start: fall back to the objective magnitude
    return -min_throughput / omega;
}

std::pair<DesignPoint, bool> project_unit_modulus(const DesignPoint& x, const ChannelSet& ch,
                                                  const ScenarioConfig& cfg, Scenario scenario,
                                                  const AlgorithmOptions& opts) {
    if (x.theta.size() == 0)
        return {x, false};
    double max_dev = 0.0;
    for (Eigen::Index n = 0; n < x.theta.size(); ++n)
        max_dev = std::max(max_dev, std::abs(std::abs(x.theta(n)) - 1.0));
    if (max_dev < 1e-12)
        return {x, false}; // already unit modulus: projection is a fixed point

    DesignPoint proj = x;
    for (Eigen::Index n = 0; n < proj.theta.size(); ++n)
        proj.theta(n) = std::polar(1.0, std::arg(proj.theta(n)));

    const SubproblemKind kind =
        scenario == Scenario::Ota ? SubproblemKind::Ota1 : SubproblemKind::Nota1;
    try {
        const SolveOutcome out = solve_block(kind, ch, cfg, proj, 0.0, opts);
        if (out.ok && evaluate(ch, out.point, cfg, scenario).feasible(1e-6))
            return {out.point, false};
    } catch (const DegenerateExpansion&) {
    }
    return {x, true};
}

namespace {

RunTrace run_driver(const ChannelSet& ch, const ScenarioConfig& cfg, const AlgorithmOptions& opts,
                    Scenario scenario, bool optimize_theta) {
    const auto t_start = Clock::now();
    RunTrace trace;

    const VecC theta0 = random_unit_theta(cfg, opts.rng_seed);
    FeasibilityResult feas = find_feasible(ch, cfg, opts, scenario, theta0);
    trace.feasibility_rounds = feas.rounds;
    trace.final_mu = feas.mu;
    if (!feas.point) {
        trace.reason = StopReason::InfeasibleInit;
        trace.wall_ms = ms_since(t_start);
        return trace;
    }

    DesignPoint x = *feas.point;
    const double eta = optimize_theta && ch.N > 0 ? select_eta(x, ch, cfg, scenario) : 0.0;
    trace.eta = eta;

    const SubproblemKind block_kind =
        scenario == Scenario::Ota ? SubproblemKind::Ota1 : SubproblemKind::Nota1;
    const SubproblemKind theta_kind =
        scenario == Scenario::Ota ? SubproblemKind::Ota2 : SubproblemKind::Nota2;

    double prev_pen = -std::numeric_limits<double>::infinity();
    trace.reason = StopReason::MaxIters;
    for (int iter = 0; iter < opts.max_outer_iters; ++iter) {
        IterRecord rec;
        rec.iter = iter;

        SolveOutcome blk;
        try {
            blk = solve_block(block_kind, ch, cfg, x, eta, opts);
        } catch (const DegenerateExpansion&) {
            trace.reason = StopReason::SolverFailure;
            break;
        }
        if (!blk.ok) {
            trace.reason = StopReason::SolverFailure;
            break;
        }
        x = blk.point;
        rec.block_ms = blk.wall_ms;

        if (optimize_theta && ch.N > 0) {
            SolveOutcome th;
            try {
                th = solve_block(theta_kind, ch, cfg, x, eta, opts);
            } catch (const DegenerateExpansion&) {
                trace.reason = StopReason::SolverFailure;
                break;
            }
            if (!th.ok) {
                trace.reason = StopReason::SolverFailure;
                break;
            }
            x = th.point;
            rec.theta_ms = th.wall_ms;
        }

        const ModelEval ev = evaluate(ch, x, cfg, scenario);
        rec.objective = ev.objective;
        rec.omega = ev.omega;
        rec.penalized = ev.objective + eta * ev.omega;
        rec.min_abs_theta = x.min_abs_theta();
        rec.max_violation = std::max(0.0, -ev.min_residual());
        trace.iters.push_back(rec);

        if (iter > 0 &&
            std::abs(rec.penalized - prev_pen) < opts.convergence_tol * std::max(1.0, std::abs(prev_pen))) {
            trace.reason = StopReason::Converged;
            break;
        }
        prev_pen = rec.penalized;
    }

    trace.relaxed = x;
    trace.has_point = true;
    if (opts.projection_enabled) {
        auto [proj, warn] = project_unit_modulus(x, ch, cfg, scenario, opts);
        trace.projected = proj;
        trace.projection_warning = warn;
    } else {
        trace.projected = x;
    }
    trace.final_objective = evaluate(ch, trace.projected, cfg, scenario).objective;
    trace.wall_ms = ms_since(t_start);
    return trace;
}

} // namespace

RunTrace run_nota(const ChannelSet& ch, const ScenarioConfig& cfg, const AlgorithmOptions& opts) {
    return run_driver(ch, cfg, opts, Scenario::Nota, true);
}

RunTrace run_ota(const ChannelSet& ch, const ScenarioConfig& cfg, const AlgorithmOptions& opts) {
    return run_driver(ch, cfg, opts, Scenario::Ota, true);
}

RunTrace run_random_theta(const ChannelSet& ch, const ScenarioConfig& cfg,
                          const AlgorithmOptions& opts, Scenario scenario) {
    return run_driver(ch, cfg, opts, scenario, false);
}

} // namespace ded2d

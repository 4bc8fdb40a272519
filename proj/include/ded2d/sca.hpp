#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ded2d/model.hpp"
#include "ded2d/surrogate.hpp"

namespace ded2d {

enum class Scenario { Nota, Ota };

struct AlgorithmOptions {
    int max_outer_iters = 100;
    double convergence_tol = 1e-4; // relative change of the penalized objective
    int feas_max_rounds = 30;
    double conic_tol = 1e-8;
    std::uint64_t rng_seed = 1;
    bool projection_enabled = true;
    double trust_margin = 1e-6;
    double ascent_slack = 1e-6;
    double tau_max = 1e4;
    int feas_restart_attempts = 3; // fresh random draws after degenerate expansions
};

struct FeasibilityResult {
    std::optional<DesignPoint> point;
    double mu = 0.0; // best relative constraint satisfaction reached
    int rounds = 0;
    std::vector<double> mu_history; // one entry per solved round
};

/// Fixes tau and a unit-modulus theta, draws random power-feasible beams and
/// D2D powers, then alternates the relative-satisfaction maximization until
/// every requirement holds with unit margin. The returned point satisfies all
/// exact constraints of the corresponding scenario.
FeasibilityResult find_feasible(const ChannelSet& ch, const ScenarioConfig& cfg,
                                const AlgorithmOptions& opts, Scenario scenario,
                                const VecC& theta0);

FeasibilityResult find_feasible_nota(const ChannelSet& ch, const ScenarioConfig& cfg,
                                     const AlgorithmOptions& opts);
FeasibilityResult find_feasible_ota(const ChannelSet& ch, const ScenarioConfig& cfg,
                                    const AlgorithmOptions& opts);

/// Penalty weight matching the magnitude of the initial objective. Falls back
/// to the plain objective magnitude when the penalty vanishes at the start
/// (unit-modulus initialization).
double select_eta(const DesignPoint& x0, const ChannelSet& ch, const ScenarioConfig& cfg,
                  Scenario scenario);

struct IterRecord {
    int iter = 0;
    double objective = 0.0; // exact min IU throughput, nats/s/Hz
    double penalized = 0.0; // objective + eta * omega
    double omega = 0.0;
    double min_abs_theta = 1.0;
    double max_violation = 0.0; // worst exact-constraint violation (0 if feasible)
    double block_ms = 0.0;      // beam/power/time subproblem
    double theta_ms = 0.0;      // reflection subproblem
};

enum class StopReason { Converged, MaxIters, SolverFailure, InfeasibleInit };

struct RunTrace {
    std::vector<IterRecord> iters;
    DesignPoint relaxed;   // final iterate of the relaxed-penalized scheme
    DesignPoint projected; // unit-modulus output (equals relaxed when projection is off)
    bool has_point = false;
    bool projection_warning = false;
    StopReason reason = StopReason::InfeasibleInit;
    double eta = 0.0;
    int feasibility_rounds = 0;
    double final_mu = 0.0;
    double wall_ms = 0.0;

    double final_objective = 0.0; // objective of the reported (projected) point, nats/s/Hz

    double objective_nats() const { return final_objective; }
    int converged_at(double rel_tol) const; // first iter with relative change < tol, -1 if never
};

const char* to_string(StopReason r);

/// Alternating ascent for the shared-time scenario.
RunTrace run_nota(const ChannelSet& ch, const ScenarioConfig& cfg, const AlgorithmOptions& opts);

/// Alternating ascent with a dedicated D2D time fraction.
RunTrace run_ota(const ChannelSet& ch, const ScenarioConfig& cfg, const AlgorithmOptions& opts);

/// Baseline: reflection coefficients drawn once uniformly on the unit circle
/// and frozen; only the beam/power/time block is iterated.
RunTrace run_random_theta(const ChannelSet& ch, const ScenarioConfig& cfg,
                          const AlgorithmOptions& opts, Scenario scenario);

/// Normalizes every reflection coefficient to unit modulus and re-solves the
/// beam/power/time block once to restore feasibility. Returns the projected
/// point and a warning flag (true when the relaxed point had to be kept).
std::pair<DesignPoint, bool> project_unit_modulus(const DesignPoint& x, const ChannelSet& ch,
                                                  const ScenarioConfig& cfg, Scenario scenario,
                                                  const AlgorithmOptions& opts);

} // namespace ded2d

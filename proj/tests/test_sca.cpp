#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ded2d/sca.hpp"

using namespace ded2d;

namespace {

// Small instance with requirements loose enough to be reliably feasible.
ScenarioConfig tiny_config() {
    ScenarioConfig cfg;
    cfg.num_bs_antennas = 3;
    cfg.num_irs_elements = 4;
    cfg.num_ius = 2;
    cfg.num_eus = 1;
    cfg.num_d2d_pairs = 2;
    cfg.emin_dbm = -80.0;
    cfg.rkmin_bps_hz = 0.4;
    return cfg;
}

AlgorithmOptions fast_opts(std::uint64_t seed) {
    AlgorithmOptions opts;
    opts.rng_seed = seed;
    opts.max_outer_iters = 25;
    opts.convergence_tol = 1e-4;
    return opts;
}

void check_trace(const RunTrace& tr, const ChannelSet& ch, const ScenarioConfig& cfg,
                 Scenario sc) {
    REQUIRE(tr.has_point);
    // ascent of the penalized objective, feasibility of every iterate
    for (std::size_t i = 0; i < tr.iters.size(); ++i) {
        CHECK(tr.iters[i].max_violation <= 1e-6);
        if (i > 0)
            CHECK(tr.iters[i].penalized >= tr.iters[i - 1].penalized - 1e-6);
    }
    const auto ev = sc == Scenario::Ota ? evaluate_ota(ch, tr.projected, cfg)
                                        : evaluate_nota(ch, tr.projected, cfg);
    CHECK(ev.min_residual() >= -1e-6);
}

} // namespace

TEST_CASE("feasibility initialization reaches unit margin") {
    const auto cfg = tiny_config();
    const auto ch = generate_channels(cfg, 123);
    const auto opts = fast_opts(1);

    auto nota = find_feasible_nota(ch, cfg, opts);
    REQUIRE(nota.point.has_value());
    CHECK(nota.mu > 0.0);
    CHECK(evaluate_nota(ch, *nota.point, cfg).min_residual() >= -1e-6);
    for (std::size_t r = 1; r < nota.mu_history.size(); ++r)
        CHECK(nota.mu_history[r] >= nota.mu_history[r - 1] - 1e-6);

    auto ota = find_feasible_ota(ch, cfg, opts);
    REQUIRE(ota.point.has_value());
    CHECK(evaluate_ota(ch, *ota.point, cfg).min_residual() >= -1e-6);
}

TEST_CASE("slack requirements make any power-feasible draw succeed in one round") {
    auto cfg = tiny_config();
    cfg.emin_dbm = -1000.0; // no energy requirement
    cfg.rkmin_bps_hz = 0.0; // no D2D threshold
    const auto ch = generate_channels(cfg, 321);
    auto res = find_feasible_nota(ch, cfg, fast_opts(2));
    REQUIRE(res.point.has_value());
    CHECK(res.rounds == 1);
    CHECK(res.mu >= 1.0 - 1e-9);
    CHECK(evaluate_nota(ch, *res.point, cfg).min_residual() >= -1e-6);
}

TEST_CASE("eta selection") {
    const auto cfg = tiny_config();
    const auto ch = generate_channels(cfg, 5);
    auto res = find_feasible_nota(ch, cfg, fast_opts(3));
    REQUIRE(res.point.has_value());

    // unit-modulus start: omega vanishes, fall back to the objective magnitude
    const auto ev = evaluate_nota(ch, *res.point, cfg);
    const double eta = select_eta(*res.point, ch, cfg, Scenario::Nota);
    CHECK(eta == doctest::Approx(ev.iu_throughput.minCoeff()).epsilon(1e-12));

    // interior theta: the ratio formula applies and scales with the rate
    DesignPoint interior = *res.point;
    interior.theta *= 0.8;
    const auto evi = evaluate_nota(ch, interior, cfg);
    const double omega = penalty_omega(interior.theta);
    REQUIRE(omega < 0.0);
    const double eta2 = select_eta(interior, ch, cfg, Scenario::Nota);
    CHECK(eta2 == doctest::Approx(-evi.iu_throughput.minCoeff() / omega).epsilon(1e-12));
    CHECK(eta2 > 0.0);
}

TEST_CASE("shared-time driver: ascent, feasibility, determinism") {
    const auto cfg = tiny_config();
    const auto ch = generate_channels(cfg, 7);
    const auto opts = fast_opts(11);

    const auto tr = run_nota(ch, cfg, opts);
    check_trace(tr, ch, cfg, Scenario::Nota);
    CHECK(tr.final_objective > 0.0);

    const auto tr2 = run_nota(ch, cfg, opts);
    REQUIRE(tr2.iters.size() == tr.iters.size());
    for (std::size_t i = 0; i < tr.iters.size(); ++i) {
        CHECK(tr2.iters[i].objective == tr.iters[i].objective);
        CHECK(tr2.iters[i].penalized == tr.iters[i].penalized);
    }
    CHECK(tr2.final_objective == tr.final_objective);
}

TEST_CASE("orthogonal-time driver") {
    const auto cfg = tiny_config();
    const auto ch = generate_channels(cfg, 7);
    const auto tr = run_ota(ch, cfg, fast_opts(11));
    check_trace(tr, ch, cfg, Scenario::Ota);
    CHECK(tr.final_objective > 0.0);
}

TEST_CASE("random-theta baseline keeps unit modulus and still ascends") {
    const auto cfg = tiny_config();
    const auto ch = generate_channels(cfg, 7);
    const auto tr = run_random_theta(ch, cfg, fast_opts(11), Scenario::Nota);
    check_trace(tr, ch, cfg, Scenario::Nota);
    for (Eigen::Index n = 0; n < tr.projected.theta.size(); ++n)
        CHECK(std::abs(tr.projected.theta(n)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tr.eta == 0.0);
}

TEST_CASE("projection is idempotent on unit-modulus points") {
    const auto cfg = tiny_config();
    const auto ch = generate_channels(cfg, 9);
    const auto opts = fast_opts(13);
    auto res = find_feasible_nota(ch, cfg, opts);
    REQUIRE(res.point.has_value());
    auto [proj, warn] = project_unit_modulus(*res.point, ch, cfg, Scenario::Nota, opts);
    CHECK_FALSE(warn);
    // theta0 is already unit-modulus: the point passes through untouched
    CHECK(proj.theta == res.point->theta);
    CHECK(proj.w[0] == res.point->w[0]);

    // a relaxed point comes back with every element on the circle
    DesignPoint relaxed = *res.point;
    relaxed.theta *= 0.97;
    auto [proj2, warn2] = project_unit_modulus(relaxed, ch, cfg, Scenario::Nota, opts);
    CHECK_FALSE(warn2);
    for (Eigen::Index n = 0; n < proj2.theta.size(); ++n)
        CHECK(std::abs(std::abs(proj2.theta(n)) - 1.0) <= 1e-12);
    CHECK(evaluate_nota(ch, proj2, cfg).min_residual() >= -1e-6);
}

TEST_CASE("infeasible requirements are reported, not crashed") {
    auto cfg = tiny_config();
    cfg.emin_dbm = 30.0; // far beyond anything harvestable
    const auto ch = generate_channels(cfg, 15);
    AlgorithmOptions opts = fast_opts(17);
    opts.feas_max_rounds = 5;
    const auto res = find_feasible_nota(ch, cfg, opts);
    CHECK_FALSE(res.point.has_value());
    CHECK(res.mu < 1.0);
    const auto tr = run_nota(ch, cfg, opts);
    CHECK_FALSE(tr.has_point);
    CHECK(tr.reason == StopReason::InfeasibleInit);
}

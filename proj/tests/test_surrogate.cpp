#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ded2d/rng.hpp"
#include "ded2d/surrogate.hpp"
#include "oracle.hpp"

using namespace ded2d;

namespace {

ScenarioConfig small_config() {
    ScenarioConfig cfg;
    cfg.num_bs_antennas = 3;
    cfg.num_irs_elements = 4;
    cfg.num_ius = 2;
    cfg.num_eus = 2;
    cfg.num_d2d_pairs = 2;
    return cfg;
}

// Multiplicative/additive jitter around the expansion point; block selects
// which variables move.
DesignPoint perturb(const DesignPoint& xbar, Rng& rng, bool theta_block, double scale) {
    DesignPoint x = xbar;
    if (theta_block) {
        for (Eigen::Index n = 0; n < x.theta.size(); ++n)
            x.theta(n) += scale * rng.cnormal();
    } else {
        for (auto& wi : x.w)
            for (Eigen::Index m = 0; m < wi.size(); ++m)
                wi(m) *= 1.0 + scale * rng.cnormal();
        for (auto& vj : x.v)
            for (Eigen::Index m = 0; m < vj.size(); ++m)
                vj(m) *= 1.0 + scale * rng.cnormal();
        for (Eigen::Index k = 0; k < x.p.size(); ++k)
            x.p(k) *= std::exp(scale * rng.normal());
        for (auto& t : x.tau)
            t *= std::exp(0.5 * scale * rng.normal());
    }
    return x;
}

double exact_iu(const ChannelSet& ch, const ScenarioConfig& cfg, const DesignPoint& x,
                SubproblemKind kind, int i) {
    const bool ota = is_ota(kind);
    return (ota ? evaluate_ota(ch, x, cfg) : evaluate_nota(ch, x, cfg)).iu_throughput(i);
}

double exact_d2d(const ChannelSet& ch, const ScenarioConfig& cfg, const DesignPoint& x,
                 SubproblemKind kind, int k) {
    const bool ota = is_ota(kind);
    return (ota ? evaluate_ota(ch, x, cfg) : evaluate_nota(ch, x, cfg)).d2d_throughput(k);
}

double exact_energy(const ChannelSet& ch, const ScenarioConfig& cfg, const DesignPoint& x,
                    SubproblemKind kind, int j) {
    const bool ota = is_ota(kind);
    return (ota ? evaluate_ota(ch, x, cfg) : evaluate_nota(ch, x, cfg)).eu_energy(j);
}

} // namespace

TEST_CASE("square lower bound") {
    CHECK(lb_square(3.0, 3.0) == doctest::Approx(9.0));
    CHECK(lb_square(2.0, 1.0) == doctest::Approx(3.0));
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(0.0, 10.0);
        const double xbar = rng.uniform(1e-3, 10.0);
        CHECK(lb_square(x, xbar) <= x * x + 1e-12);
    }
}

TEST_CASE("log-ratio lower bound") {
    CHECK(lb_log1p_ratio(1, 1, 1, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    // xbar = ybar = 1, (x, y) = (2, 1): ln2 + 0.5*(2 - 0.5 - 1) = ln2 + 0.25
    CHECK(lb_log1p_ratio(2, 1, 1, 1) == doctest::Approx(std::log(2.0) + 0.25).epsilon(1e-14));
    CHECK(lb_log1p_ratio(2, 1, 1, 1) <= std::log(3.0));
    Rng rng(2);
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.uniform(0.01, 100.0), y = rng.uniform(0.01, 100.0);
        const double xb = rng.uniform(0.01, 100.0), yb = rng.uniform(0.01, 100.0);
        const double exact = std::log1p(x / y);
        CHECK(lb_log1p_ratio(x, y, xb, yb) <= exact + 1e-12 * (1.0 + std::abs(exact)));
    }
    CHECK_THROWS_AS(lb_log1p_ratio(-1, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("time-weighted log-ratio lower bound") {
    CHECK(lb_log1p_ratio_over_t(1, 1, 2, 1, 1, 2) ==
          doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
    // xbar=ybar=1, tbar=2, (x,y,t)=(1,1,4): 2*(ln2)/2 + 0 - (ln2)/4*4 = 0
    CHECK(lb_log1p_ratio_over_t(1, 1, 4, 1, 1, 2) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(lb_log1p_ratio_over_t(1, 1, 4, 1, 1, 2) <= std::log(2.0) / 4.0);
    Rng rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.uniform(0.01, 100.0), y = rng.uniform(0.01, 100.0);
        const double t = rng.uniform(0.01, 100.0);
        const double xb = rng.uniform(0.01, 100.0), yb = rng.uniform(0.01, 100.0);
        const double tb = rng.uniform(0.01, 100.0);
        const double exact = std::log1p(x / y) / t;
        CHECK(lb_log1p_ratio_over_t(x, y, t, xb, yb, tb) <=
              exact + 1e-12 * (1.0 + std::abs(exact)));
    }
}

TEST_CASE("penalty lower bound") {
    VecC unit(3);
    for (int n = 0; n < 3; ++n)
        unit(n) = std::polar(1.0, 0.5 * n);
    CHECK(lb_penalty(unit, unit) == doctest::Approx(0.0).epsilon(1e-14));

    VecC tb(2);
    tb << Complex(1, 0), Complex(1, 0);
    VecC t(2);
    t << Complex(1, 0), Complex(0.9, 0);
    CHECK(lb_penalty(t, tb) <= penalty_omega(t) + 1e-12);

    Rng rng(4);
    for (int trial = 0; trial < 2000; ++trial) {
        VecC base(4), probe(4);
        for (int n = 0; n < 4; ++n) {
            base(n) = std::polar(rng.uniform(0.2, 1.0), rng.uniform(0.0, 6.28));
            probe(n) = base(n) + 0.3 * rng.cnormal();
        }
        double s = 0.0;
        for (int n = 0; n < 4; ++n)
            s += 2.0 * std::real(std::conj(base(n)) * probe(n)) - std::norm(base(n));
        if (s <= 1e-9)
            continue;
        CHECK(lb_penalty(probe, base) <= penalty_omega(probe) + 1e-12);
    }

    // concavity along random segments inside the trust region
    for (int trial = 0; trial < 500; ++trial) {
        VecC base(3), a(3), b(3);
        for (int n = 0; n < 3; ++n) {
            base(n) = std::polar(1.0, rng.uniform(0.0, 6.28));
            a(n) = base(n) + 0.2 * rng.cnormal();
            b(n) = base(n) + 0.2 * rng.cnormal();
        }
        auto inside = [&](const VecC& th) {
            double s = 0.0;
            for (int n = 0; n < 3; ++n)
                s += 2.0 * std::real(std::conj(base(n)) * th(n)) - std::norm(base(n));
            return s > 1e-6;
        };
        const VecC mid = 0.5 * (a + b);
        if (!inside(a) || !inside(b))
            continue;
        CHECK(lb_penalty(mid, base) >= 0.5 * (lb_penalty(a, base) + lb_penalty(b, base)) - 1e-12);
    }
}

TEST_CASE("rate and energy surrogates: tightness and minorization") {
    const auto cfg = small_config();
    const auto ch = generate_channels(cfg, 17);
    Rng rng(99);

    const SubproblemKind kinds[] = {SubproblemKind::Nota1, SubproblemKind::Nota2,
                                    SubproblemKind::Ota1, SubproblemKind::Ota2};
    for (const auto kind : kinds) {
        CAPTURE(static_cast<int>(kind));
        const bool theta_block = is_theta_block(kind);
        auto xbar = oracle::random_point(ch, cfg, rng, is_ota(kind));
        const auto layout = make_layout(kind, ch);
        const auto xbar_vec = pack_point(layout, xbar);

        for (int i = 0; i < ch.U_I; ++i) {
            auto rs = build_iu_rate_surrogate(ch, cfg, xbar, kind, i);
            const double exact0 = exact_iu(ch, cfg, xbar, kind, i);
            CHECK(rs.expr.value(xbar_vec) ==
                  doctest::Approx(exact0).epsilon(1e-9)); // tight at expansion
            for (const auto& r : rs.expr.recips)
                CHECK(r.coef > 0.0);
            for (const auto& q : rs.expr.quads)
                CHECK(q.coef > 0.0);
            int checked = 0;
            for (int trial = 0; trial < 300; ++trial) {
                auto x = perturb(xbar, rng, theta_block, 0.25);
                const auto xv = pack_point(layout, x);
                if (!rs.expr.in_trust_region(xv))
                    continue;
                ++checked;
                CHECK(rs.expr.value(xv) <= exact_iu(ch, cfg, x, kind, i) + 1e-9);
            }
            CHECK(checked > 50);
        }

        for (int j = 0; j < ch.U_E; ++j) {
            auto e = build_energy_linearization(ch, cfg, xbar, kind, j);
            CHECK(e.value(xbar_vec) ==
                  doctest::Approx(exact_energy(ch, cfg, xbar, kind, j)).epsilon(1e-9));
            for (int trial = 0; trial < 200; ++trial) {
                auto x = perturb(xbar, rng, theta_block, 0.4);
                const auto xv = pack_point(layout, x);
                const double exact = exact_energy(ch, cfg, x, kind, j);
                CHECK(e.value(xv) <= exact + 1e-9 * (1.0 + std::abs(exact)));
            }
        }

        for (int k = 0; k < ch.K; ++k) {
            auto rs = build_d2d_rate_surrogate(ch, cfg, xbar, kind, k);
            const double exact0 = exact_d2d(ch, cfg, xbar, kind, k);
            CHECK(rs.expr.value(xbar_vec) == doctest::Approx(exact0).epsilon(1e-9));
            int checked = 0;
            for (int trial = 0; trial < 300; ++trial) {
                auto x = perturb(xbar, rng, theta_block, 0.25);
                const auto xv = pack_point(layout, x);
                if (!rs.expr.in_trust_region(xv))
                    continue;
                ++checked;
                CHECK(rs.expr.value(xv) <= exact_d2d(ch, cfg, x, kind, k) + 1e-9);
            }
            CHECK(checked > 50);
        }
    }
}

TEST_CASE("zero-numerator expansion is signaled") {
    const auto cfg = small_config();
    const auto ch = generate_channels(cfg, 23);
    Rng rng(1);
    auto xbar = oracle::random_point(ch, cfg, rng, false);
    xbar.w[0].setZero();
    CHECK_THROWS_AS(build_iu_rate_surrogate(ch, cfg, xbar, SubproblemKind::Nota1, 0),
                    DegenerateExpansion);
    auto xbar2 = oracle::random_point(ch, cfg, rng, false);
    xbar2.p(1) = 0.0;
    CHECK_THROWS_AS(build_d2d_rate_surrogate(ch, cfg, xbar2, SubproblemKind::Nota1, 1),
                    DegenerateExpansion);
}

TEST_CASE("zero energy beams are rejected as an expansion point") {
    auto cfg = small_config();
    cfg.emin_dbm = -60.0;
    const auto ch = generate_channels(cfg, 29);
    Rng rng(2);
    auto xbar = oracle::random_point(ch, cfg, rng, false);
    for (auto& vj : xbar.v)
        vj.setZero();
    CHECK_THROWS_AS(build_subproblem(SubproblemKind::Nota1, ch, cfg, xbar, 0.0),
                    DegenerateExpansion);
}

TEST_CASE("template matches the scalar evaluation route") {
    const auto cfg = small_config();
    const auto ch = generate_channels(cfg, 31);
    Rng rng(55);
    auto xbar = oracle::random_point(ch, cfg, rng, false);
    const auto layout = make_layout(SubproblemKind::Nota1, ch);

    const int i = 0;
    auto rs = build_iu_rate_surrogate(ch, cfg, xbar, SubproblemKind::Nota1, i);

    const double inv_sigma = 1.0 / std::sqrt(cfg.noise_power_mw());
    const auto eff = effective_channels(ch, xbar.theta);
    const Eigen::RowVectorXcd row = eff.bs_iu[i].value * inv_sigma;
    const Complex zbar = (row * xbar.w[i])(0);
    const double num = std::norm(zbar);
    double psibar = 1.0;
    for (int l = 0; l < ch.U_I; ++l)
        if (l != i)
            psibar += std::norm((row * xbar.w[l])(0));
    for (int k = 0; k < ch.K; ++k)
        psibar += xbar.p(k) * std::norm(eff.d2d_iu[k][i].value) * inv_sigma * inv_sigma;

    for (int trial = 0; trial < 100; ++trial) {
        auto x = perturb(xbar, rng, false, 0.2);
        const auto xv = pack_point(layout, x);
        const double lval = 2.0 * std::real((row * x.w[i])(0) * std::conj(zbar)) - num;
        if (lval <= 0.0)
            continue;
        double psi = 1.0;
        for (int l = 0; l < ch.U_I; ++l)
            if (l != i)
                psi += std::norm((row * x.w[l])(0));
        for (int k = 0; k < ch.K; ++k)
            psi += x.p(k) * std::norm(eff.d2d_iu[k][i].value) * inv_sigma * inv_sigma;
        const double scalar_route =
            lb_log1p_ratio_over_t(lval, psi, x.tau[0], num, psibar, xbar.tau[0]);
        CHECK(rs.expr.value(xv) == doctest::Approx(scalar_route).epsilon(1e-10));
    }
}

TEST_CASE("penalty surrogate template") {
    ScenarioConfig cfg = small_config();
    const auto ch = generate_channels(cfg, 37);
    const auto layout = make_layout(SubproblemKind::Nota2, ch);
    Rng rng(5);
    VecC thetabar(ch.N);
    for (int n = 0; n < ch.N; ++n)
        thetabar(n) = std::polar(rng.uniform(0.4, 1.0), rng.uniform(0.0, 6.28));
    const double eta = 2.5;
    auto pen = build_penalty_surrogate(thetabar, eta, layout);

    DesignPoint probe;
    probe.theta = thetabar;
    CHECK(pen.expr.value(pack_point(layout, probe)) ==
          doctest::Approx(eta * penalty_omega(thetabar)).epsilon(1e-12));
    for (int trial = 0; trial < 500; ++trial) {
        VecC th = thetabar;
        for (int n = 0; n < ch.N; ++n)
            th(n) += 0.2 * rng.cnormal();
        probe.theta = th;
        const auto xv = pack_point(layout, probe);
        if (!pen.expr.in_trust_region(xv))
            continue;
        CHECK(pen.expr.value(xv) <= eta * penalty_omega(th) + 1e-12);
        CHECK(pen.expr.value(xv) == doctest::Approx(eta * lb_penalty(th, thetabar)).epsilon(1e-12));
    }
}

#include "ded2d/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ded2d {

double DesignPoint::min_abs_theta() const {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < theta.size(); ++n)
        m = std::min(m, std::abs(theta(n)));
    return theta.size() == 0 ? 1.0 : m;
}

double ModelEval::min_residual() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : residuals)
        m = std::min(m, r.value);
    return residuals.empty() ? 0.0 : m;
}

double penalty_omega(const VecC& theta) {
    if (theta.size() == 0)
        throw std::invalid_argument("penalty_omega: empty theta");
    const double s = theta.squaredNorm();
    if (s <= 0.0)
        throw std::invalid_argument("penalty_omega: theta is identically zero");
    return 1.0 / static_cast<double>(theta.size()) - 1.0 / s;
}

namespace {

EffectiveChannels::Row make_row(const VecC& direct, const VecC& irs_rx, const MatC& G, const VecC& theta) {
    EffectiveChannels::Row r;
    r.base = direct.adjoint();
    r.coef = irs_rx.conjugate().asDiagonal() * G;
    r.value = r.at(theta);
    return r;
}

EffectiveChannels::Scalar make_scalar(Complex direct, const VecC& irs_rx, const VecC& tx_irs, const VecC& theta) {
    EffectiveChannels::Scalar s;
    s.base = direct;
    s.coef = irs_rx.conjugate().cwiseProduct(tx_irs);
    s.value = s.at(theta);
    return s;
}

} // namespace

EffectiveChannels effective_channels(const ChannelSet& ch, const VecC& theta) {
    if (theta.size() != ch.N)
        throw std::invalid_argument("effective_channels: theta length does not match element count");
    if (!ch.dims_consistent())
        throw std::invalid_argument("effective_channels: inconsistent channel set");

    EffectiveChannels eff;
    eff.bs_iu.reserve(ch.U_I);
    for (int i = 0; i < ch.U_I; ++i)
        eff.bs_iu.push_back(make_row(ch.bs_iu[i], ch.irs_iu[i], ch.bs_irs, theta));
    eff.bs_eu.reserve(ch.U_E);
    for (int j = 0; j < ch.U_E; ++j)
        eff.bs_eu.push_back(make_row(ch.bs_eu[j], ch.irs_eu[j], ch.bs_irs, theta));
    eff.bs_d2d.reserve(ch.K);
    for (int k = 0; k < ch.K; ++k)
        eff.bs_d2d.push_back(make_row(ch.bs_d2d[k], ch.irs_d2d[k], ch.bs_irs, theta));

    eff.d2d_iu.assign(ch.K, {});
    eff.d2d_eu.assign(ch.K, {});
    eff.d2d_cross.assign(ch.K, {});
    eff.d2d_direct.reserve(ch.K);
    for (int k = 0; k < ch.K; ++k) {
        eff.d2d_iu[k].reserve(ch.U_I);
        for (int i = 0; i < ch.U_I; ++i)
            eff.d2d_iu[k].push_back(make_scalar(ch.d2dtx_iu(k, i), ch.irs_iu[i], ch.d2dtx_irs[k], theta));
        eff.d2d_eu[k].reserve(ch.U_E);
        for (int j = 0; j < ch.U_E; ++j)
            eff.d2d_eu[k].push_back(make_scalar(ch.d2dtx_eu(k, j), ch.irs_eu[j], ch.d2dtx_irs[k], theta));
        eff.d2d_direct.push_back(make_scalar(ch.d2d_direct(k), ch.irs_d2d[k], ch.d2dtx_irs[k], theta));
        eff.d2d_cross[k].reserve(ch.K);
        for (int l = 0; l < ch.K; ++l)
            eff.d2d_cross[k].push_back(make_scalar(ch.d2d_cross(k, l), ch.irs_d2d[k], ch.d2dtx_irs[l], theta));
    }
    return eff;
}

namespace {

void check_point(const ChannelSet& ch, const DesignPoint& x, bool ota) {
    if (static_cast<int>(x.w.size()) != ch.U_I || static_cast<int>(x.v.size()) != ch.U_E ||
        x.p.size() != ch.K || x.theta.size() != ch.N)
        throw std::invalid_argument("evaluate: design point dimensions do not match channels");
    for (const auto& wi : x.w)
        if (wi.size() != ch.M || !wi.allFinite())
            throw std::invalid_argument("evaluate: bad info beamformer");
    for (const auto& vj : x.v)
        if (vj.size() != ch.M || !vj.allFinite())
            throw std::invalid_argument("evaluate: bad energy beamformer");
    if (!x.p.allFinite() || !x.theta.allFinite())
        throw std::invalid_argument("evaluate: non-finite entries");
    if (x.tau.size() != (ota ? 3u : 2u))
        throw std::invalid_argument("evaluate: wrong number of time fractions");
    for (double t : x.tau)
        if (!(t > 0.0) || !std::isfinite(t))
            throw std::invalid_argument("evaluate: tau components must be positive");
}

// Shared skeleton for both scenarios; `ota` switches the interference
// bookkeeping and the time/power coupling.
ModelEval evaluate_impl(const ChannelSet& ch, const DesignPoint& x, const ScenarioConfig& cfg, bool ota) {
    check_point(ch, x, ota);
    const EffectiveChannels eff = effective_channels(ch, x.theta);

    // Rates use noise-normalized channels (unit-variance noise); the
    // harvested energy keeps physical amplitudes and mW.
    const double inv_sigma2 = 1.0 / cfg.noise_power_mw();

    const double t_i = x.t_i();
    const double t_e = x.t_e();
    const double t_d = ota ? x.t_d() : 0.0;

    ModelEval ev;
    ev.iu_rate.resize(ch.U_I);
    ev.iu_throughput.resize(ch.U_I);
    ev.iu_psi.resize(ch.U_I);
    for (int i = 0; i < ch.U_I; ++i) {
        const auto& row = eff.bs_iu[i].value;
        const double sig = inv_sigma2 * std::norm((row * x.w[i])(0));
        double psi = 1.0;
        for (int l = 0; l < ch.U_I; ++l)
            if (l != i)
                psi += inv_sigma2 * std::norm((row * x.w[l])(0));
        if (!ota)
            for (int k = 0; k < ch.K; ++k)
                psi += inv_sigma2 * x.p(k) * std::norm(eff.d2d_iu[k][i].value);
        ev.iu_psi(i) = psi;
        ev.iu_rate(i) = std::log1p(sig / psi);
        ev.iu_throughput(i) = t_i * ev.iu_rate(i);
    }

    ev.eu_energy.resize(ch.U_E);
    ev.eu_harvested.resize(ch.U_E);
    for (int j = 0; j < ch.U_E; ++j) {
        const auto& row = eff.bs_eu[j].value;
        double e = 0.0;
        for (int l = 0; l < ch.U_E; ++l)
            e += std::norm((row * x.v[l])(0));
        if (!ota)
            for (int k = 0; k < ch.K; ++k)
                e += x.p(k) * std::norm(eff.d2d_eu[k][j].value);
        ev.eu_energy(j) = e;
        ev.eu_harvested(j) = t_e * cfg.rho * e;
    }

    ev.d2d_throughput.resize(ch.K);
    for (int k = 0; k < ch.K; ++k) {
        const double sig = inv_sigma2 * x.p(k) * std::norm(eff.d2d_direct[k].value);
        double mutual = 0.0;
        for (int l = 0; l < ch.K; ++l)
            if (l != k)
                mutual += inv_sigma2 * x.p(l) * std::norm(eff.d2d_cross[k][l].value);
        if (ota) {
            ev.d2d_throughput(k) = t_d * std::log1p(sig / (mutual + 1.0));
        } else {
            const auto& grow = eff.bs_d2d[k].value;
            double psi_ti = mutual + 1.0;
            for (int i = 0; i < ch.U_I; ++i)
                psi_ti += inv_sigma2 * std::norm((grow * x.w[i])(0));
            double psi_te = mutual + 1.0;
            for (int j = 0; j < ch.U_E; ++j)
                psi_te += inv_sigma2 * std::norm((grow * x.v[j])(0));
            ev.d2d_throughput(k) = t_i * std::log1p(sig / psi_ti) + t_e * std::log1p(sig / psi_te);
        }
    }

    ev.objective = ch.U_I > 0 ? ev.iu_throughput.minCoeff() : 0.0;
    ev.omega = ch.N > 0 ? penalty_omega(x.theta) : 0.0;

    const double emin = cfg.emin_mw();
    const double rkmin = cfg.rkmin_nats();
    for (int j = 0; j < ch.U_E; ++j)
        ev.residuals.push_back({"energy_eu" + std::to_string(j), ev.eu_harvested(j) - emin});
    for (int k = 0; k < ch.K; ++k)
        ev.residuals.push_back({"d2d_rate" + std::to_string(k), ev.d2d_throughput(k) - rkmin});
    ev.residuals.push_back({"time_budget", 1.0 - t_i - t_e - t_d});

    double wpow = 0.0, vpow = 0.0;
    for (const auto& wi : x.w)
        wpow += wi.squaredNorm();
    for (const auto& vj : x.v)
        vpow += vj.squaredNorm();
    const double pb = cfg.pbmax_mw();
    const double budget_rhs = ota ? pb * (1.0 - t_d) : pb;
    ev.residuals.push_back({"power_budget", budget_rhs - t_i * wpow - t_e * vpow});
    for (int i = 0; i < ch.U_I; ++i)
        ev.residuals.push_back({"w_norm" + std::to_string(i), pb - x.w[i].squaredNorm()});
    for (int j = 0; j < ch.U_E; ++j)
        ev.residuals.push_back({"v_norm" + std::to_string(j), pb - x.v[j].squaredNorm()});
    for (int k = 0; k < ch.K; ++k) {
        const double used = ota ? t_d * x.p(k) : x.p(k);
        ev.residuals.push_back({"d2d_power" + std::to_string(k), cfg.pkmax_mw() - used});
        ev.residuals.push_back({"d2d_power_nonneg" + std::to_string(k), x.p(k)});
    }
    for (int n = 0; n < ch.N; ++n)
        ev.residuals.push_back({"theta_ball" + std::to_string(n), 1.0 - std::norm(x.theta(n))});

    return ev;
}

} // namespace

ModelEval evaluate_nota(const ChannelSet& ch, const DesignPoint& x, const ScenarioConfig& cfg) {
    return evaluate_impl(ch, x, cfg, false);
}

ModelEval evaluate_ota(const ChannelSet& ch, const DesignPoint& x, const ScenarioConfig& cfg) {
    return evaluate_impl(ch, x, cfg, true);
}

} // namespace ded2d

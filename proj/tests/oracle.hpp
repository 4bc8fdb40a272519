// Test-only straight-line reimplementation of the exact rate/energy
// expressions, kept independent of the library's evaluation path: channels
// are composed through an explicit diagonal reflection matrix and every sum
// is written out directly.
#pragma once

#include <cmath>

#include "ded2d/model.hpp"
#include "ded2d/scenario.hpp"

namespace oracle {

using ded2d::ChannelSet;
using ded2d::Complex;
using ded2d::DesignPoint;
using ded2d::MatC;
using ded2d::ScenarioConfig;
using ded2d::VecC;

inline MatC theta_diag(const VecC& theta) {
    MatC T = MatC::Zero(theta.size(), theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n)
        T(n, n) = theta(n);
    return T;
}

inline Eigen::RowVectorXcd row_channel(const VecC& direct, const VecC& irs_rx, const MatC& G,
                                       const VecC& theta) {
    return direct.adjoint() + irs_rx.adjoint() * theta_diag(theta) * G;
}

inline Complex scalar_channel(Complex direct, const VecC& irs_rx, const VecC& tx_irs,
                              const VecC& theta) {
    return direct + (irs_rx.adjoint() * theta_diag(theta) * tx_irs)(0);
}

struct Eval {
    Eigen::VectorXd iu_throughput;
    Eigen::VectorXd eu_harvested;
    Eigen::VectorXd d2d_throughput;
    double objective;
};

inline Eval evaluate(const ChannelSet& ch, const DesignPoint& x, const ScenarioConfig& cfg,
                     bool ota) {
    const double sigma2 = cfg.noise_power_mw();
    const double t_i = 1.0 / x.tau[0];
    const double t_e = 1.0 / x.tau[1];
    const double t_d = ota ? 1.0 / x.tau[2] : 0.0;

    Eval ev;
    ev.iu_throughput.resize(ch.U_I);
    for (int i = 0; i < ch.U_I; ++i) {
        auto row = row_channel(ch.bs_iu[i], ch.irs_iu[i], ch.bs_irs, x.theta);
        double num = std::norm((row * x.w[i])(0));
        double den = sigma2;
        for (int l = 0; l < ch.U_I; ++l)
            if (l != i)
                den += std::norm((row * x.w[l])(0));
        if (!ota)
            for (int k = 0; k < ch.K; ++k)
                den += x.p(k) *
                       std::norm(scalar_channel(ch.d2dtx_iu(k, i), ch.irs_iu[i], ch.d2dtx_irs[k], x.theta));
        ev.iu_throughput(i) = t_i * std::log(1.0 + num / den);
    }

    ev.eu_harvested.resize(ch.U_E);
    for (int j = 0; j < ch.U_E; ++j) {
        auto row = row_channel(ch.bs_eu[j], ch.irs_eu[j], ch.bs_irs, x.theta);
        double e = 0.0;
        for (int l = 0; l < ch.U_E; ++l)
            e += std::norm((row * x.v[l])(0));
        if (!ota)
            for (int k = 0; k < ch.K; ++k)
                e += x.p(k) *
                     std::norm(scalar_channel(ch.d2dtx_eu(k, j), ch.irs_eu[j], ch.d2dtx_irs[k], x.theta));
        ev.eu_harvested(j) = t_e * cfg.rho * e;
    }

    ev.d2d_throughput.resize(ch.K);
    for (int k = 0; k < ch.K; ++k) {
        const double sig =
            x.p(k) * std::norm(scalar_channel(ch.d2d_direct(k), ch.irs_d2d[k], ch.d2dtx_irs[k], x.theta));
        double mutual = 0.0;
        for (int l = 0; l < ch.K; ++l)
            if (l != k)
                mutual += x.p(l) * std::norm(scalar_channel(ch.d2d_cross(k, l), ch.irs_d2d[k],
                                                            ch.d2dtx_irs[l], x.theta));
        if (ota) {
            ev.d2d_throughput(k) = t_d * std::log(1.0 + sig / (mutual + sigma2));
        } else {
            auto grow = row_channel(ch.bs_d2d[k], ch.irs_d2d[k], ch.bs_irs, x.theta);
            double psi_ti = mutual + sigma2;
            for (int i = 0; i < ch.U_I; ++i)
                psi_ti += std::norm((grow * x.w[i])(0));
            double psi_te = mutual + sigma2;
            for (int j = 0; j < ch.U_E; ++j)
                psi_te += std::norm((grow * x.v[j])(0));
            ev.d2d_throughput(k) =
                t_i * std::log(1.0 + sig / psi_ti) + t_e * std::log(1.0 + sig / psi_te);
        }
    }

    ev.objective = ev.iu_throughput.minCoeff();
    return ev;
}

/// Random design point with the requested norms; not necessarily feasible.
inline DesignPoint random_point(const ChannelSet& ch, const ScenarioConfig& cfg, ded2d::Rng& rng,
                                bool ota) {
    DesignPoint x;
    x.w.resize(ch.U_I);
    for (auto& wi : x.w) {
        wi.resize(ch.M);
        for (int m = 0; m < ch.M; ++m)
            wi(m) = rng.cnormal();
        wi *= std::sqrt(cfg.pbmax_mw() * rng.uniform(0.05, 0.5)) / wi.norm();
    }
    x.v.resize(ch.U_E);
    for (auto& vj : x.v) {
        vj.resize(ch.M);
        for (int m = 0; m < ch.M; ++m)
            vj(m) = rng.cnormal();
        vj *= std::sqrt(cfg.pbmax_mw() * rng.uniform(0.05, 0.5)) / vj.norm();
    }
    x.p.resize(ch.K);
    for (int k = 0; k < ch.K; ++k)
        x.p(k) = cfg.pkmax_mw() * rng.uniform(0.05, 1.0);
    x.tau = ota ? std::vector<double>{3.2, 3.2, 3.2} : std::vector<double>{2.1, 2.2};
    x.theta.resize(ch.N);
    for (int n = 0; n < ch.N; ++n)
        x.theta(n) = std::polar(rng.uniform(0.3, 1.0), rng.uniform(0.0, 6.28));
    return x;
}

} // namespace oracle

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ded2d/scenario.hpp"

namespace ded2d {

/// One iterate of either algorithm: beamformers, D2D powers, time fractions
/// (stored through their reciprocals tau = 1/t) and reflection coefficients.
/// Two tau components for the shared-time scenario, three when the D2D pairs
/// get their own fraction.
struct DesignPoint {
    std::vector<VecC> w;      // info beamformers, U_I x M
    std::vector<VecC> v;      // energy beamformers, U_E x M
    Eigen::VectorXd p;        // D2D transmit powers (mW), K
    std::vector<double> tau;  // {tau_i, tau_e} or {tau_i, tau_e, tau_d}
    VecC theta;               // N reflection coefficients

    bool is_ota() const { return tau.size() == 3; }
    double t_i() const { return 1.0 / tau[0]; }
    double t_e() const { return 1.0 / tau[1]; }
    double t_d() const { return 1.0 / tau[2]; }
    double min_abs_theta() const;
};

/// Channels composed as direct-plus-reflected at a given theta, together with
/// the coefficients that make theta |-> channel affine. A row channel is
/// value = base + theta^T * coef (coef is N x M), a scalar channel is
/// value = base + theta^T * coef (coef is length N).
struct EffectiveChannels {
    struct Row {
        Eigen::RowVectorXcd value; // at the theta used to build this set
        Eigen::RowVectorXcd base;
        MatC coef; // N x M
        Eigen::RowVectorXcd at(const VecC& theta) const { return base + theta.transpose() * coef; }
    };
    struct Scalar {
        Complex value;
        Complex base;
        VecC coef; // N
        Complex at(const VecC& theta) const { return base + (theta.array() * coef.array()).sum(); }
    };

    std::vector<Row> bs_iu;  // per IU
    std::vector<Row> bs_eu;  // per EU
    std::vector<Row> bs_d2d; // per pair

    std::vector<std::vector<Scalar>> d2d_iu; // [k][i]
    std::vector<std::vector<Scalar>> d2d_eu; // [k][j]
    std::vector<Scalar> d2d_direct;          // [k]
    std::vector<std::vector<Scalar>> d2d_cross; // [k][l], l != k meaningful
};

/// Composes every effective channel at theta per the direct-plus-reflected
/// model. Throws std::invalid_argument on dimension mismatch.
EffectiveChannels effective_channels(const ChannelSet& ch, const VecC& theta);

struct Residual {
    std::string name;
    double value; // >= 0 means satisfied
};

/// Exact (non-surrogate) evaluation of one design point.
struct ModelEval {
    Eigen::VectorXd iu_rate;        // nats/s/Hz per IU
    Eigen::VectorXd iu_throughput;  // t_i * rate
    Eigen::VectorXd iu_psi;         // interference-plus-noise (normalized)
    Eigen::VectorXd eu_energy;      // mW per EU (per-slot average power)
    Eigen::VectorXd eu_harvested;   // t_e * rho * energy
    Eigen::VectorXd d2d_throughput; // nats/s/Hz per pair
    double objective = 0.0;         // min IU throughput
    double omega = 0.0;             // unit-modulus penalty value (0 when N = 0)
    std::vector<Residual> residuals;

    double min_residual() const;
    bool feasible(double eps = 1e-6) const { return min_residual() >= -eps; }
};

ModelEval evaluate_nota(const ChannelSet& ch, const DesignPoint& x, const ScenarioConfig& cfg);
ModelEval evaluate_ota(const ChannelSet& ch, const DesignPoint& x, const ScenarioConfig& cfg);

/// 1/N - 1/sum|theta_n|^2; nonpositive on the relaxed ball, zero exactly at
/// unit modulus. Throws std::invalid_argument for empty or all-zero theta.
double penalty_omega(const VecC& theta);

} // namespace ded2d

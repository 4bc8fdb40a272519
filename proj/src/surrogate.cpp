#include "ded2d/surrogate.hpp"

#include <cmath>

namespace ded2d {

double lb_square(double x, double xbar) { return 2.0 * x * xbar - xbar * xbar; }

double lb_log1p_ratio(double x, double y, double xbar, double ybar) {
    if (!(x > 0.0 && y > 0.0 && xbar > 0.0 && ybar > 0.0))
        throw std::invalid_argument("lb_log1p_ratio: arguments must be positive");
    const double r = xbar / ybar;
    return std::log1p(r) + r / (1.0 + r) * (2.0 - xbar / x - y / ybar);
}

double lb_log1p_ratio_over_t(double x, double y, double t, double xbar, double ybar, double tbar) {
    if (!(x > 0.0 && y > 0.0 && t > 0.0 && xbar > 0.0 && ybar > 0.0 && tbar > 0.0))
        throw std::invalid_argument("lb_log1p_ratio_over_t: arguments must be positive");
    const double r = xbar / ybar;
    return 2.0 / tbar * std::log1p(r) + r / (tbar * (1.0 + r)) * (2.0 - xbar / x - y / ybar) -
           std::log1p(r) / (tbar * tbar) * t;
}

double lb_penalty(const VecC& theta, const VecC& thetabar) {
    if (theta.size() != thetabar.size() || theta.size() == 0)
        throw std::invalid_argument("lb_penalty: dimension mismatch");
    double s = 0.0;
    for (Eigen::Index n = 0; n < theta.size(); ++n)
        s += 2.0 * std::real(std::conj(thetabar(n)) * theta(n)) - std::norm(thetabar(n));
    if (s <= 0.0)
        throw std::invalid_argument("lb_penalty: outside the trust region");
    return 1.0 / static_cast<double>(theta.size()) - 1.0 / s;
}

bool is_theta_block(SubproblemKind k) {
    return k == SubproblemKind::Nota2 || k == SubproblemKind::Ota2;
}
bool is_feasibility(SubproblemKind k) {
    return k == SubproblemKind::FeasNota || k == SubproblemKind::FeasOta;
}
bool is_ota(SubproblemKind k) {
    return k == SubproblemKind::Ota1 || k == SubproblemKind::Ota2 || k == SubproblemKind::FeasOta;
}

VarLayout make_layout(SubproblemKind kind, const ChannelSet& ch) {
    VarLayout L;
    L.kind = kind;
    L.M = ch.M;
    L.N = ch.N;
    L.U_I = ch.U_I;
    L.U_E = ch.U_E;
    L.K = ch.K;
    if (is_theta_block(kind)) {
        L.theta_base = 0;
        L.total = 2 * ch.N;
        return L;
    }
    int at = 0;
    L.w_base = at;
    at += 2 * ch.U_I * ch.M;
    L.v_base = at;
    at += 2 * ch.U_E * ch.M;
    L.p_base = at;
    at += ch.K;
    if (is_feasibility(kind)) {
        L.mu_index = at++;
    } else {
        L.tau_base = at;
        at += kind == SubproblemKind::Ota1 ? 3 : 2;
    }
    L.total = at;
    return L;
}

namespace {

struct IeCoeffs {
    double a, b, c; // c unused by the fixed-t family
};

// Coefficients of the (1/t) ln(1 + x/y) minorant.
IeCoeffs ie2_coeffs(double rbar, double tbar) {
    IeCoeffs co;
    co.a = 2.0 / tbar * std::log1p(rbar);
    co.b = rbar / (tbar * (1.0 + rbar));
    co.c = std::log1p(rbar) / (tbar * tbar);
    return co;
}

// Coefficients of the ln(1 + x/y) minorant, scaled by a fixed 1/t factor.
IeCoeffs ie1_coeffs(double rbar, double inv_t_scale) {
    IeCoeffs co;
    co.a = inv_t_scale * std::log1p(rbar);
    co.b = inv_t_scale * rbar / (1.0 + rbar);
    co.c = 0.0;
    return co;
}

// Normalizes a quadratic to unit scale at the expansion point: the stored
// term is b * (psi / psibar), keeping auxiliary cone variables O(1).
QuadTerm make_quad_term(double b, double psibar, QuadSum psi) {
    const double inv = 1.0 / psibar;
    const double amp = std::sqrt(inv);
    for (auto& sq : psi.squares) {
        sq.c0 *= amp;
        sq.a *= amp;
    }
    psi.linear.c0 *= inv;
    psi.linear.a *= inv;
    return {b, std::move(psi)};
}

// z as a complex affine form of the beamformer coordinates.
CAff beam_caff(const VarLayout& L, const Eigen::RowVectorXcd& row, bool info_beam, int user) {
    CAff z(L.total);
    const Complex j(0.0, 1.0);
    for (int m = 0; m < L.M; ++m) {
        const int re = info_beam ? L.w_re(user, m) : L.v_re(user, m);
        z.a(re) = row(m);
        z.a(re + 1) = j * row(m);
    }
    return z;
}

// channel * fixed beam as a complex affine form of theta.
CAff theta_caff(const VarLayout& L, const EffectiveChannels::Row& r, const VecC& beam, double scale) {
    CAff z(L.total);
    z.c0 = (r.base * beam)(0) * scale;
    const VecC coef = r.coef * beam * scale;
    const Complex j(0.0, 1.0);
    for (int n = 0; n < L.N; ++n) {
        z.a(L.theta_re(n)) = coef(n);
        z.a(L.theta_im(n)) = j * coef(n);
    }
    return z;
}

CAff theta_caff(const VarLayout& L, const EffectiveChannels::Scalar& s, double scale) {
    CAff z(L.total);
    z.c0 = s.base * scale;
    const Complex j(0.0, 1.0);
    for (int n = 0; n < L.N; ++n) {
        z.a(L.theta_re(n)) = s.coef(n) * scale;
        z.a(L.theta_im(n)) = j * s.coef(n) * scale;
    }
    return z;
}

// 2 Re{ conj(zbar) z(x) } - |zbar|^2, the affine lowering of |z(x)|^2 around
// zbar; equals |zbar|^2 at the expansion point.
RAff affine_square_lb(const CAff& z, Complex zbar) {
    RAff L(static_cast<int>(z.a.size()));
    L.c0 = 2.0 * std::real(std::conj(zbar) * z.c0) - std::norm(zbar);
    for (Eigen::Index i = 0; i < z.a.size(); ++i)
        L.a(i) = 2.0 * std::real(std::conj(zbar) * z.a(i));
    return L;
}

struct Ctx {
    const ChannelSet& ch;
    const ScenarioConfig& cfg;
    const DesignPoint& xbar;
    SubproblemKind kind;
    double margin; // strict-interior fraction for the trust-region cuts
    VarLayout layout;
    EffectiveChannels eff;
    double inv_sigma; // amplitude normalization for rate expressions
    Eigen::VectorXd xbar_packed;

    Ctx(const ChannelSet& c, const ScenarioConfig& f, const DesignPoint& x, SubproblemKind k,
        double trust_margin)
        : ch(c), cfg(f), xbar(x), kind(k), margin(trust_margin), layout(make_layout(k, c)),
          eff(effective_channels(c, x.theta)), inv_sigma(1.0 / std::sqrt(f.noise_power_mw())),
          xbar_packed(pack_point(layout, x)) {}

    double tau_bar(int comp) const { return xbar.tau.at(comp); }
};

// --- IU rate surrogates -----------------------------------------------------

RateSurrogate iu_block(const Ctx& c, int i) {
    const auto& L = c.layout;
    const Eigen::RowVectorXcd row = c.eff.bs_iu[i].value * c.inv_sigma;
    const bool ota = is_ota(c.kind);

    std::vector<Complex> zbar(L.U_I);
    for (int l = 0; l < L.U_I; ++l)
        zbar[l] = (row * c.xbar.w[l])(0);
    const double num = std::norm(zbar[i]);
    if (num <= 0.0)
        throw DegenerateExpansion("IU " + std::to_string(i) + ": zero beam gain at expansion point");

    double psibar = 1.0;
    for (int l = 0; l < L.U_I; ++l)
        if (l != i)
            psibar += std::norm(zbar[l]);
    QuadSum psi;
    psi.linear = RAff(L.total);
    psi.linear.c0 = 1.0;
    for (int l = 0; l < L.U_I; ++l)
        if (l != i)
            psi.squares.push_back(beam_caff(L, row, true, l));
    if (!ota) {
        for (int k = 0; k < L.K; ++k) {
            const double g2 = std::norm(c.eff.d2d_iu[k][i].value) * c.inv_sigma * c.inv_sigma;
            psibar += c.xbar.p(k) * g2;
            psi.linear.a(L.p(k)) = g2;
        }
    }

    const double rbar = num / psibar;
    const bool fixed_tau = is_feasibility(c.kind);
    const IeCoeffs co = fixed_tau ? ie1_coeffs(rbar, 1.0 / c.tau_bar(0)) : ie2_coeffs(rbar, c.tau_bar(0));

    RateSurrogate out;
    out.expr.affine = RAff(L.total);
    out.expr.affine.c0 = co.a + 2.0 * co.b;
    if (!fixed_tau)
        out.expr.affine.a(L.tau(0)) = -co.c;

    const CAff z_i = beam_caff(L, row, true, i);
    const RAff denom = affine_square_lb(z_i, zbar[i]);
    out.expr.recips.push_back({co.b, num, denom});
    out.expr.quads.push_back(make_quad_term(co.b, psibar, std::move(psi)));

    RAff cut = denom;
    cut.c0 -= c.margin * num;
    out.cuts.push_back(std::move(cut));
    return out;
}

RateSurrogate iu_theta(const Ctx& c, int i) {
    const auto& L = c.layout;
    const bool ota = is_ota(c.kind);

    std::vector<CAff> z(L.U_I);
    std::vector<Complex> zbar(L.U_I);
    for (int l = 0; l < L.U_I; ++l) {
        z[l] = theta_caff(L, c.eff.bs_iu[i], c.xbar.w[l], c.inv_sigma);
        zbar[l] = z[l].value(c.xbar_packed);
    }
    const double num = std::norm(zbar[i]);
    if (num <= 0.0)
        throw DegenerateExpansion("IU " + std::to_string(i) + ": zero beam gain at expansion point");

    double psibar = 1.0;
    QuadSum psi;
    psi.linear = RAff(L.total);
    psi.linear.c0 = 1.0;
    for (int l = 0; l < L.U_I; ++l) {
        if (l == i)
            continue;
        psibar += std::norm(zbar[l]);
        psi.squares.push_back(z[l]);
    }
    if (!ota) {
        for (int k = 0; k < L.K; ++k) {
            if (c.xbar.p(k) <= 0.0)
                continue;
            CAff g = theta_caff(L, c.eff.d2d_iu[k][i], c.inv_sigma);
            const double scale = std::sqrt(c.xbar.p(k));
            g.c0 *= scale;
            g.a *= scale;
            psibar += std::norm(g.value(c.xbar_packed));
            psi.squares.push_back(std::move(g));
        }
    }

    const double rbar = num / psibar;
    const IeCoeffs co = ie1_coeffs(rbar, 1.0 / c.tau_bar(0));

    RateSurrogate out;
    out.expr.affine = RAff(L.total);
    out.expr.affine.c0 = co.a + 2.0 * co.b;
    const RAff denom = affine_square_lb(z[i], zbar[i]);
    out.expr.recips.push_back({co.b, num, denom});
    out.expr.quads.push_back(make_quad_term(co.b, psibar, std::move(psi)));

    RAff cut = denom;
    cut.c0 -= c.margin * num;
    out.cuts.push_back(std::move(cut));
    return out;
}

// --- D2D rate surrogates ----------------------------------------------------

// One phase family of the shared-time scenario over (w or v, p).
void d2d_block_family(const Ctx& c, int k, bool info_phase, int tau_comp, SurrogateExpr& expr) {
    const auto& L = c.layout;
    const double hk2 = std::norm(c.eff.d2d_direct[k].value) * c.inv_sigma * c.inv_sigma;
    const double pbar = c.xbar.p(k);
    if (pbar <= 0.0 || hk2 <= 0.0)
        throw DegenerateExpansion("D2D pair " + std::to_string(k) + ": zero power or direct gain");

    double psibar = 1.0;
    QuadSum psi;
    psi.linear = RAff(L.total);
    psi.linear.c0 = 1.0;
    for (int l = 0; l < L.K; ++l) {
        if (l == k)
            continue;
        const double g2 = std::norm(c.eff.d2d_cross[k][l].value) * c.inv_sigma * c.inv_sigma;
        psibar += c.xbar.p(l) * g2;
        psi.linear.a(L.p(l)) = g2;
    }
    const Eigen::RowVectorXcd grow = c.eff.bs_d2d[k].value * c.inv_sigma;
    const int users = info_phase ? L.U_I : L.U_E;
    for (int u = 0; u < users; ++u) {
        const Complex zb = info_phase ? (grow * c.xbar.w[u])(0) : (grow * c.xbar.v[u])(0);
        psibar += std::norm(zb);
        psi.squares.push_back(beam_caff(L, grow, info_phase, u));
    }

    const double rbar = pbar * hk2 / psibar;
    const bool fixed_tau = is_feasibility(c.kind);
    const IeCoeffs co =
        fixed_tau ? ie1_coeffs(rbar, 1.0 / c.tau_bar(tau_comp)) : ie2_coeffs(rbar, c.tau_bar(tau_comp));

    expr.affine.c0 += co.a + 2.0 * co.b;
    if (!fixed_tau)
        expr.affine.a(L.tau(tau_comp)) -= co.c;
    RAff pk(L.total);
    pk.a(L.p(k)) = 1.0;
    expr.recips.push_back({co.b, pbar, std::move(pk)});
    expr.quads.push_back(make_quad_term(co.b, psibar, std::move(psi)));
}

// The D2D-only phase of the orthogonal scenario: psi is linear in p.
void d2d_block_ota(const Ctx& c, int k, SurrogateExpr& expr) {
    const auto& L = c.layout;
    const double hk2 = std::norm(c.eff.d2d_direct[k].value) * c.inv_sigma * c.inv_sigma;
    const double pbar = c.xbar.p(k);
    if (pbar <= 0.0 || hk2 <= 0.0)
        throw DegenerateExpansion("D2D pair " + std::to_string(k) + ": zero power or direct gain");

    double psibar = 1.0;
    QuadSum psi;
    psi.linear = RAff(L.total);
    psi.linear.c0 = 1.0;
    for (int l = 0; l < L.K; ++l) {
        if (l == k)
            continue;
        const double g2 = std::norm(c.eff.d2d_cross[k][l].value) * c.inv_sigma * c.inv_sigma;
        psibar += c.xbar.p(l) * g2;
        psi.linear.a(L.p(l)) = g2;
    }

    const double rbar = pbar * hk2 / psibar;
    const bool fixed_tau = is_feasibility(c.kind);
    const IeCoeffs co =
        fixed_tau ? ie1_coeffs(rbar, 1.0 / c.tau_bar(2)) : ie2_coeffs(rbar, c.tau_bar(2));

    expr.affine.c0 += co.a + 2.0 * co.b;
    if (!fixed_tau)
        expr.affine.a(L.tau(2)) -= co.c;
    RAff pk(L.total);
    pk.a(L.p(k)) = 1.0;
    expr.recips.push_back({co.b, pbar, std::move(pk)});
    expr.quads.push_back(make_quad_term(co.b, psibar, std::move(psi)));
}

// One phase family of the theta subproblems; shares the direct-channel trust
// region between phases.
void d2d_theta_family(const Ctx& c, int k, bool info_phase, double inv_tau, const CAff& hk,
                      Complex hkbar, SurrogateExpr& expr) {
    const auto& L = c.layout;
    const double num = std::norm(hkbar);
    const double pbar = c.xbar.p(k);

    double psibar = 1.0;
    QuadSum psi;
    psi.linear = RAff(L.total);
    psi.linear.c0 = 1.0;
    for (int l = 0; l < L.K; ++l) {
        if (l == k || c.xbar.p(l) <= 0.0)
            continue;
        CAff g = theta_caff(L, c.eff.d2d_cross[k][l], c.inv_sigma);
        const double s = std::sqrt(c.xbar.p(l));
        g.c0 *= s;
        g.a *= s;
        psibar += std::norm(g.value(c.xbar_packed));
        psi.squares.push_back(std::move(g));
    }
    if (!is_ota(c.kind)) {
        const int users = info_phase ? L.U_I : L.U_E;
        for (int u = 0; u < users; ++u) {
            const VecC& beam = info_phase ? c.xbar.w[u] : c.xbar.v[u];
            CAff z = theta_caff(L, c.eff.bs_d2d[k], beam, c.inv_sigma);
            psibar += std::norm(z.value(c.xbar_packed));
            psi.squares.push_back(std::move(z));
        }
    }

    const double rbar = pbar * num / psibar;
    const IeCoeffs co = ie1_coeffs(rbar, inv_tau);

    expr.affine.c0 += co.a + 2.0 * co.b;
    expr.recips.push_back({co.b, num, affine_square_lb(hk, hkbar)});
    expr.quads.push_back(make_quad_term(co.b, psibar, std::move(psi)));
}

RateSurrogate d2d_theta(const Ctx& c, int k) {
    const auto& L = c.layout;
    const CAff hk = theta_caff(L, c.eff.d2d_direct[k], c.inv_sigma);
    const Complex hkbar = hk.value(c.xbar_packed);
    if (c.xbar.p(k) <= 0.0 || std::norm(hkbar) <= 0.0)
        throw DegenerateExpansion("D2D pair " + std::to_string(k) + ": zero power or direct gain");

    RateSurrogate out;
    out.expr.affine = RAff(L.total);
    if (is_ota(c.kind)) {
        d2d_theta_family(c, k, false, 1.0 / c.tau_bar(2), hk, hkbar, out.expr);
    } else {
        d2d_theta_family(c, k, true, 1.0 / c.tau_bar(0), hk, hkbar, out.expr);
        d2d_theta_family(c, k, false, 1.0 / c.tau_bar(1), hk, hkbar, out.expr);
    }
    RAff cut = affine_square_lb(hk, hkbar);
    cut.c0 -= c.margin * std::norm(hkbar);
    out.cuts.push_back(std::move(cut));
    return out;
}

RAff energy_impl(const Ctx& c, int j) {
    const auto& L = c.layout;
    RAff e(L.total);
    const bool ota = is_ota(c.kind);
    if (is_theta_block(c.kind)) {
        for (int l = 0; l < L.U_E; ++l) {
            const CAff z = theta_caff(L, c.eff.bs_eu[j], c.xbar.v[l], 1.0);
            const RAff lb = affine_square_lb(z, z.value(c.xbar_packed));
            e.c0 += lb.c0;
            e.a += lb.a;
        }
        if (!ota) {
            for (int k = 0; k < L.K; ++k) {
                const CAff g = theta_caff(L, c.eff.d2d_eu[k][j], 1.0);
                const RAff lb = affine_square_lb(g, g.value(c.xbar_packed));
                e.c0 += c.xbar.p(k) * lb.c0;
                e.a += c.xbar.p(k) * lb.a;
            }
        }
    } else {
        const auto& row = c.eff.bs_eu[j].value;
        for (int l = 0; l < L.U_E; ++l) {
            const CAff z = beam_caff(L, row, false, l);
            const RAff lb = affine_square_lb(z, (row * c.xbar.v[l])(0));
            e.c0 += lb.c0;
            e.a += lb.a;
        }
        if (!ota)
            for (int k = 0; k < L.K; ++k)
                e.a(L.p(k)) += std::norm(c.eff.d2d_eu[k][j].value);
    }
    return e;
}

} // namespace

RateSurrogate build_iu_rate_surrogate(const ChannelSet& ch, const ScenarioConfig& cfg,
                                      const DesignPoint& xbar, SubproblemKind kind, int iu_index,
                                      double trust_margin) {
    Ctx c(ch, cfg, xbar, kind, trust_margin);
    return is_theta_block(kind) ? iu_theta(c, iu_index) : iu_block(c, iu_index);
}

RAff build_energy_linearization(const ChannelSet& ch, const ScenarioConfig& cfg,
                                const DesignPoint& xbar, SubproblemKind kind, int eu_index) {
    Ctx c(ch, cfg, xbar, kind, 0.0);
    return energy_impl(c, eu_index);
}

RateSurrogate build_d2d_rate_surrogate(const ChannelSet& ch, const ScenarioConfig& cfg,
                                       const DesignPoint& xbar, SubproblemKind kind, int pair_index,
                                       double trust_margin) {
    Ctx c(ch, cfg, xbar, kind, trust_margin);
    RateSurrogate rs;
    if (is_theta_block(kind)) {
        rs = d2d_theta(c, pair_index);
    } else {
        rs.expr.affine = RAff(c.layout.total);
        if (is_ota(kind)) {
            d2d_block_ota(c, pair_index, rs.expr);
        } else {
            d2d_block_family(c, pair_index, true, 0, rs.expr);
            d2d_block_family(c, pair_index, false, 1, rs.expr);
        }
        RAff cut(c.layout.total);
        cut.a(c.layout.p(pair_index)) = 1.0;
        cut.c0 = -trust_margin * xbar.p(pair_index);
        rs.cuts.push_back(std::move(cut));
    }
    return rs;
}

PenaltySurrogate build_penalty_surrogate(const VecC& thetabar, double eta, const VarLayout& layout,
                                         double trust_margin) {
    const int N = layout.N;
    if (thetabar.size() != N || N == 0)
        throw std::invalid_argument("penalty surrogate: bad theta dimension");
    const double sbar = thetabar.squaredNorm();
    if (sbar <= 0.0)
        throw DegenerateExpansion("penalty surrogate: zero expansion theta");

    RAff S(layout.total);
    S.c0 = -sbar;
    for (int n = 0; n < N; ++n) {
        S.a(layout.theta_re(n)) = 2.0 * std::real(thetabar(n));
        S.a(layout.theta_im(n)) = 2.0 * std::imag(thetabar(n));
    }

    PenaltySurrogate out;
    out.expr.affine = RAff(layout.total);
    out.expr.affine.c0 = eta / static_cast<double>(N);
    out.expr.recips.push_back({eta, 1.0, S});
    out.cut = S;
    out.cut.c0 -= trust_margin * sbar;
    return out;
}

SubproblemForm build_subproblem(SubproblemKind kind, const ChannelSet& ch,
                                const ScenarioConfig& cfg, const DesignPoint& xbar, double eta,
                                double trust_margin, double tau_max,
                                const Eigen::VectorXd* feas_rate_floor) {
    Ctx c(ch, cfg, xbar, kind, trust_margin);
    SubproblemForm form;
    form.kind = kind;
    form.layout = c.layout;
    form.pbmax = cfg.pbmax_mw();
    form.pkmax = cfg.pkmax_mw();
    form.tau_max = tau_max;
    if (is_feasibility(kind) || is_theta_block(kind))
        form.tau_fixed = xbar.tau;

    const double emin = cfg.emin_mw();
    const double rkmin = cfg.rkmin_nats();
    const bool energy_active = emin > 0.0 && ch.U_E > 0;
    const bool d2d_active = rkmin > 0.0 && ch.K > 0;

    if (energy_active && ch.U_E > 0) {
        double vpow = 0.0;
        for (const auto& vj : xbar.v)
            vpow += vj.squaredNorm();
        if (vpow <= 0.0)
            throw DegenerateExpansion("energy requirement active but expansion beams are zero");
    }

    for (int i = 0; i < ch.U_I; ++i) {
        RateSurrogate rs = is_theta_block(kind) ? iu_theta(c, i) : iu_block(c, i);
        for (auto& cut : rs.cuts)
            form.cuts.push_back(std::move(cut));
        if (is_feasibility(kind)) {
            if (feas_rate_floor)
                rs.expr.affine.c0 -= (*feas_rate_floor)(i);
            else
                rs.expr.affine.a(c.layout.mu_index) -= 1.0;
        }
        form.iu.push_back(std::move(rs.expr));
    }

    if (energy_active) {
        for (int j = 0; j < ch.U_E; ++j) {
            RAff e = energy_impl(c, j);
            const double rhs_scale = emin / cfg.rho;
            if (is_theta_block(kind)) {
                e.c0 -= rhs_scale * xbar.tau[1];
            } else if (is_feasibility(kind)) {
                e.a(c.layout.mu_index) -= rhs_scale * xbar.tau[1];
            } else {
                e.a(c.layout.tau(1)) -= rhs_scale;
            }
            form.energy.push_back(std::move(e));
        }
    }

    if (d2d_active) {
        for (int k = 0; k < ch.K; ++k) {
            RateSurrogate rs;
            if (is_theta_block(kind)) {
                rs = d2d_theta(c, k);
                for (auto& cut : rs.cuts)
                    form.cuts.push_back(std::move(cut));
            } else {
                rs.expr.affine = RAff(c.layout.total);
                if (is_ota(kind)) {
                    d2d_block_ota(c, k, rs.expr);
                } else {
                    d2d_block_family(c, k, true, 0, rs.expr);
                    d2d_block_family(c, k, false, 1, rs.expr);
                }
                RAff cut(c.layout.total);
                cut.a(c.layout.p(k)) = 1.0;
                cut.c0 = -trust_margin * xbar.p(k);
                form.cuts.push_back(std::move(cut));
            }
            if (is_feasibility(kind))
                rs.expr.affine.a(c.layout.mu_index) -= rkmin;
            else
                rs.expr.affine.c0 -= rkmin;
            form.d2d.push_back(std::move(rs.expr));
        }
    }

    if (is_theta_block(kind)) {
        if (eta != 0.0 && ch.N > 0) {
            PenaltySurrogate pen = build_penalty_surrogate(xbar.theta, eta, c.layout, trust_margin);
            form.cuts.push_back(pen.cut);
            form.penalty = std::move(pen.expr);
        }
    } else if (!is_feasibility(kind)) {
        form.objective_constant =
            (eta != 0.0 && ch.N > 0) ? eta * penalty_omega(xbar.theta) : 0.0;
    }

    return form;
}

Eigen::VectorXd pack_point(const VarLayout& L, const DesignPoint& x, double mu) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(L.total);
    if (is_theta_block(L.kind)) {
        for (int n = 0; n < L.N; ++n) {
            out(L.theta_re(n)) = std::real(x.theta(n));
            out(L.theta_im(n)) = std::imag(x.theta(n));
        }
        return out;
    }
    for (int i = 0; i < L.U_I; ++i)
        for (int m = 0; m < L.M; ++m) {
            out(L.w_re(i, m)) = std::real(x.w[i](m));
            out(L.w_im(i, m)) = std::imag(x.w[i](m));
        }
    for (int j = 0; j < L.U_E; ++j)
        for (int m = 0; m < L.M; ++m) {
            out(L.v_re(j, m)) = std::real(x.v[j](m));
            out(L.v_im(j, m)) = std::imag(x.v[j](m));
        }
    for (int k = 0; k < L.K; ++k)
        out(L.p(k)) = x.p(k);
    if (L.tau_base >= 0)
        for (std::size_t t = 0; t < x.tau.size(); ++t)
            out(L.tau(static_cast<int>(t))) = x.tau[t];
    if (L.mu_index >= 0)
        out(L.mu_index) = mu;
    return out;
}

DesignPoint recover_point(const SubproblemForm& form, const DesignPoint& xbar,
                          const Eigen::VectorXd& x) {
    const auto& L = form.layout;
    DesignPoint out = xbar;
    if (is_theta_block(L.kind)) {
        for (int n = 0; n < L.N; ++n)
            out.theta(n) = Complex(x(L.theta_re(n)), x(L.theta_im(n)));
        return out;
    }
    for (int i = 0; i < L.U_I; ++i)
        for (int m = 0; m < L.M; ++m)
            out.w[i](m) = Complex(x(L.w_re(i, m)), x(L.w_im(i, m)));
    for (int j = 0; j < L.U_E; ++j)
        for (int m = 0; m < L.M; ++m)
            out.v[j](m) = Complex(x(L.v_re(j, m)), x(L.v_im(j, m)));
    for (int k = 0; k < L.K; ++k)
        out.p(k) = std::max(0.0, x(L.p(k)));
    if (L.tau_base >= 0) {
        for (std::size_t t = 0; t < out.tau.size(); ++t)
            out.tau[t] = x(L.tau(static_cast<int>(t)));
    } else {
        out.tau = form.tau_fixed.empty() ? xbar.tau : form.tau_fixed;
    }
    return out;
}

} // namespace ded2d

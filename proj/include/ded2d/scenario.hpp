#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ded2d {

using Complex = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

/// Static scenario parameters. Defaults are the reference simulation setup:
/// a 6-antenna BS at (40,0,25) m, a 10-element reflecting surface at
/// (0,60,40) m, two information users, two energy users and three D2D pairs
/// dropped uniformly over a 120 m x 120 m area.
struct ScenarioConfig {
    int num_bs_antennas = 6;  // M
    int num_irs_elements = 10; // N
    int num_ius = 2;          // U_I
    int num_eus = 2;          // U_E
    int num_d2d_pairs = 3;    // K

    double rho = 0.5;             // energy conversion efficiency
    double emin_dbm = 0.0;        // harvested-energy requirement per EU
    double rkmin_bps_hz = 0.4;    // D2D rate threshold
    double pbmax_dbm = 20.0;      // BS power budget
    double pkmax_dbm = 20.0;      // per-pair D2D power budget
    double noise_psd_dbm_hz = -174.0;
    double bandwidth_hz = 10e6;

    std::array<double, 3> bs_position{40.0, 0.0, 25.0};
    std::array<double, 3> irs_position{0.0, 60.0, 40.0};
    std::array<double, 2> deployment_area{120.0, 120.0};

    double rician_factor_db = 10.0;
    double pathloss_exp_rician = 3.0;   // BS->EU links
    double pathloss_exp_rayleigh = 2.0; // everything else
    double gain_bs_dbi = 5.0;
    double gain_irs_dbi = 5.0;

    std::uint64_t rng_seed = 1;

    // Transmitter-receiver separation of a D2D pair. Not specified by the
    // reference setup; exposed as an assumption.
    double d2d_pair_distance = 10.0;

    double noise_power_mw() const;
    double emin_mw() const;
    double pbmax_mw() const;
    double pkmax_mw() const;
    double rkmin_nats() const; // threshold converted to nats/s/Hz

    /// Throws std::invalid_argument on a malformed configuration.
    void validate() const;

    /// Key=value lines, '#' comments. Unknown keys are an error, an empty
    /// stream leaves the defaults untouched.
    static ScenarioConfig from_stream(std::istream& in);
    static ScenarioConfig from_file(const std::string& path);

    /// Canonical serialization (sorted keys); basis for the manifest hash.
    std::string canonical_text() const;
    std::uint64_t hash() const;
};

/// One realization of every channel in the network, unnormalized (physical
/// amplitude gains). Rate computations rescale by the noise amplitude, the
/// harvested-energy computation uses these values directly in mW.
struct ChannelSet {
    int M = 0, N = 0, U_I = 0, U_E = 0, K = 0;

    MatC bs_irs; // N x M, deterministic LoS with per-element random angles

    std::vector<VecC> bs_iu;  // per IU, length M
    std::vector<VecC> bs_eu;  // per EU, length M (Rician)
    std::vector<VecC> bs_d2d; // per pair (to the receiver), length M

    std::vector<VecC> irs_iu;    // per IU, length N
    std::vector<VecC> irs_eu;    // per EU, length N
    std::vector<VecC> irs_d2d;   // per pair, length N
    std::vector<VecC> d2dtx_irs; // per pair, length N

    VecC d2d_direct; // K
    MatC d2d_cross;  // K x K, entry (k,l) = channel from tx l to rx k, diag unused
    MatC d2dtx_iu;   // K x U_I
    MatC d2dtx_eu;   // K x U_E

    bool dims_consistent() const;
    bool all_finite() const;

    /// Versioned binary snapshot, bit-exact round trip.
    void save(std::ostream& out) const;
    static ChannelSet load(std::istream& in);
};

/// Path loss in dB at distance d (meters) for exponent gamma.
double pathloss_db(double distance_m, double gamma);

/// Large-scale BS-IRS gain in dB for the configured geometry.
double bs_irs_gain_db(const ScenarioConfig& cfg);

double bs_irs_distance(const ScenarioConfig& cfg);

/// Draws a full channel realization. Deterministic in (cfg, seed).
/// Throws std::runtime_error if degenerate geometry persists after the
/// internal redraw budget (100 attempts).
ChannelSet generate_channels(const ScenarioConfig& cfg, std::uint64_t seed);

} // namespace ded2d

#include "ded2d/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ded2d/rng.hpp"

namespace ded2d {

namespace {

constexpr double kMinDistance = 1e-3; // meters; below this a position is redrawn
constexpr int kRedrawBudget = 100;

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

// Keyed stream tags for channel generation. Every (tag, index) pair owns an
// independent substream so that resizing one dimension leaves the remaining
// links untouched.
enum StreamTag : std::uint64_t {
    kPosIu = 1,
    kPosEu,
    kPosD2d,
    kLosAngles,
    kFadeBsIu,
    kFadeBsEu,
    kFadeBsD2d,
    kFadeIrsIu,
    kFadeIrsEu,
    kFadeIrsD2d,
    kFadeD2dIrs,
    kFadeD2dDirect,
    kFadeD2dCross,
    kFadeD2dIu,
    kFadeD2dEu,
};

struct Point3 {
    double x, y, z;
};

double dist(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Point3 from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

// Ground-level position uniform over the deployment area. Redraws until it
// clears both the BS and IRS projections.
Point3 draw_position(Rng rng, const ScenarioConfig& cfg, const Point3& bs, const Point3& irs) {
    for (int attempt = 0; attempt < kRedrawBudget; ++attempt) {
        Point3 p{rng.uniform(0.0, cfg.deployment_area[0]),
                 rng.uniform(0.0, cfg.deployment_area[1]), 0.0};
        if (dist(p, bs) > kMinDistance && dist(p, irs) > kMinDistance)
            return p;
    }
    throw std::runtime_error("degenerate geometry: position redraw budget exhausted");
}

double amp_from_db(double gain_db) { return std::pow(10.0, gain_db / 20.0); }

VecC rayleigh_vector(Rng rng, int len, double amp) {
    VecC h(len);
    for (int i = 0; i < len; ++i)
        h(i) = amp * rng.cnormal();
    return h;
}

// Rician vector: one uniformly drawn LoS phase per link, per-element scatter.
VecC rician_vector(Rng rng, int len, double amp, double kappa) {
    const double los_scale = std::sqrt(kappa / (1.0 + kappa));
    const double nlos_scale = std::sqrt(1.0 / (1.0 + kappa));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Complex los = std::polar(1.0, phase);
    VecC h(len);
    for (int i = 0; i < len; ++i)
        h(i) = amp * (los_scale * los + nlos_scale * rng.cnormal());
    return h;
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i)
        buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
    in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void put_cvec(std::ostream& out, const VecC& v) {
    put_u64(out, static_cast<std::uint64_t>(v.size()));
    put_doubles(out, reinterpret_cast<const double*>(v.data()), 2 * static_cast<std::size_t>(v.size()));
}

VecC get_cvec(std::istream& in) {
    const auto n = static_cast<Eigen::Index>(get_u64(in));
    VecC v(n);
    get_doubles(in, reinterpret_cast<double*>(v.data()), 2 * static_cast<std::size_t>(n));
    return v;
}

void put_cmat(std::ostream& out, const MatC& m) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    put_doubles(out, reinterpret_cast<const double*>(m.data()), 2 * static_cast<std::size_t>(m.size()));
}

MatC get_cmat(std::istream& in) {
    const auto r = static_cast<Eigen::Index>(get_u64(in));
    const auto c = static_cast<Eigen::Index>(get_u64(in));
    MatC m(r, c);
    get_doubles(in, reinterpret_cast<double*>(m.data()), 2 * static_cast<std::size_t>(m.size()));
    return m;
}

} // namespace

double ScenarioConfig::noise_power_mw() const {
    return dbm_to_mw(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

double ScenarioConfig::emin_mw() const {
    // anything at or below -300 dBm stands for "no energy requirement"
    return emin_dbm <= -300.0 ? 0.0 : dbm_to_mw(emin_dbm);
}
double ScenarioConfig::pbmax_mw() const { return dbm_to_mw(pbmax_dbm); }
double ScenarioConfig::pkmax_mw() const { return dbm_to_mw(pkmax_dbm); }
double ScenarioConfig::rkmin_nats() const { return rkmin_bps_hz * std::numbers::ln2; }

void ScenarioConfig::validate() const {
    // Degenerate instances (no IRS, no EUs, no D2D pairs) are legal and used
    // by reduction tests; antennas and information users are required.
    if (num_bs_antennas < 1 || num_ius < 1)
        throw std::invalid_argument("config: need at least one BS antenna and one IU");
    if (num_irs_elements < 0 || num_eus < 0 || num_d2d_pairs < 0)
        throw std::invalid_argument("config: negative counts");
    if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("config: rho must be in (0,1]");
    if (rkmin_bps_hz < 0.0)
        throw std::invalid_argument("config: negative D2D rate threshold");
    if (bandwidth_hz <= 0.0)
        throw std::invalid_argument("config: bandwidth must be positive");
    if (deployment_area[0] <= 0.0 || deployment_area[1] <= 0.0)
        throw std::invalid_argument("config: deployment area must be positive");
    if (d2d_pair_distance <= 0.0)
        throw std::invalid_argument("config: d2d pair distance must be positive");
    if (pathloss_exp_rician <= 0.0 || pathloss_exp_rayleigh <= 0.0)
        throw std::invalid_argument("config: path-loss exponents must be positive");
}

namespace {

struct Field {
    const char* key;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
        ++pos;
    if (pos != s.size())
        throw std::invalid_argument("config: trailing characters in number '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    const double v = parse_double(s);
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9)
        throw std::invalid_argument("config: expected integer, got '" + s + "'");
    return i;
}

std::array<double, 3> parse_vec3(const std::string& s) {
    std::istringstream is(s);
    std::array<double, 3> a{};
    if (!(is >> a[0] >> a[1] >> a[2]))
        throw std::invalid_argument("config: expected three numbers in '" + s + "'");
    return a;
}

std::array<double, 2> parse_vec2(const std::string& s) {
    std::istringstream is(s);
    std::array<double, 2> a{};
    if (!(is >> a[0] >> a[1]))
        throw std::invalid_argument("config: expected two numbers in '" + s + "'");
    return a;
}

std::string fmt_vec(const double* p, int n) {
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += fmt_double(p[i]);
    }
    return out;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        {"num_bs_antennas", [](ScenarioConfig& c, const std::string& s) { c.num_bs_antennas = parse_int(s); },
         [](const ScenarioConfig& c) { return std::to_string(c.num_bs_antennas); }},
        {"num_irs_elements", [](ScenarioConfig& c, const std::string& s) { c.num_irs_elements = parse_int(s); },
         [](const ScenarioConfig& c) { return std::to_string(c.num_irs_elements); }},
        {"num_ius", [](ScenarioConfig& c, const std::string& s) { c.num_ius = parse_int(s); },
         [](const ScenarioConfig& c) { return std::to_string(c.num_ius); }},
        {"num_eus", [](ScenarioConfig& c, const std::string& s) { c.num_eus = parse_int(s); },
         [](const ScenarioConfig& c) { return std::to_string(c.num_eus); }},
        {"num_d2d_pairs", [](ScenarioConfig& c, const std::string& s) { c.num_d2d_pairs = parse_int(s); },
         [](const ScenarioConfig& c) { return std::to_string(c.num_d2d_pairs); }},
        {"rho", [](ScenarioConfig& c, const std::string& s) { c.rho = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.rho); }},
        {"emin_dbm", [](ScenarioConfig& c, const std::string& s) { c.emin_dbm = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.emin_dbm); }},
        {"rkmin_bps_hz", [](ScenarioConfig& c, const std::string& s) { c.rkmin_bps_hz = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.rkmin_bps_hz); }},
        {"pbmax_dbm", [](ScenarioConfig& c, const std::string& s) { c.pbmax_dbm = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.pbmax_dbm); }},
        {"pkmax_dbm", [](ScenarioConfig& c, const std::string& s) { c.pkmax_dbm = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.pkmax_dbm); }},
        {"noise_psd_dbm_hz", [](ScenarioConfig& c, const std::string& s) { c.noise_psd_dbm_hz = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.noise_psd_dbm_hz); }},
        {"bandwidth_hz", [](ScenarioConfig& c, const std::string& s) { c.bandwidth_hz = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.bandwidth_hz); }},
        {"bs_position", [](ScenarioConfig& c, const std::string& s) { c.bs_position = parse_vec3(s); },
         [](const ScenarioConfig& c) { return fmt_vec(c.bs_position.data(), 3); }},
        {"irs_position", [](ScenarioConfig& c, const std::string& s) { c.irs_position = parse_vec3(s); },
         [](const ScenarioConfig& c) { return fmt_vec(c.irs_position.data(), 3); }},
        {"deployment_area", [](ScenarioConfig& c, const std::string& s) { c.deployment_area = parse_vec2(s); },
         [](const ScenarioConfig& c) { return fmt_vec(c.deployment_area.data(), 2); }},
        {"rician_factor_db", [](ScenarioConfig& c, const std::string& s) { c.rician_factor_db = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.rician_factor_db); }},
        {"pathloss_exp_rician", [](ScenarioConfig& c, const std::string& s) { c.pathloss_exp_rician = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.pathloss_exp_rician); }},
        {"pathloss_exp_rayleigh", [](ScenarioConfig& c, const std::string& s) { c.pathloss_exp_rayleigh = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.pathloss_exp_rayleigh); }},
        {"gain_bs_dbi", [](ScenarioConfig& c, const std::string& s) { c.gain_bs_dbi = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.gain_bs_dbi); }},
        {"gain_irs_dbi", [](ScenarioConfig& c, const std::string& s) { c.gain_irs_dbi = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.gain_irs_dbi); }},
        {"rng_seed", [](ScenarioConfig& c, const std::string& s) { c.rng_seed = static_cast<std::uint64_t>(std::stoull(s)); },
         [](const ScenarioConfig& c) { return std::to_string(c.rng_seed); }},
        {"d2d_pair_distance", [](ScenarioConfig& c, const std::string& s) { c.d2d_pair_distance = parse_double(s); },
         [](const ScenarioConfig& c) { return fmt_double(c.d2d_pair_distance); }},
    };
    return f;
}

} // namespace

ScenarioConfig ScenarioConfig::from_stream(std::istream& in) {
    ScenarioConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            const auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool found = false;
        for (const auto& f : fields()) {
            if (key == f.key) {
                f.set(cfg, value);
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open '" + path + "'");
    return from_stream(in);
}

std::string ScenarioConfig::canonical_text() const {
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& f : fields())
        kv.emplace_back(f.key, f.get(*this));
    std::sort(kv.begin(), kv.end());
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

std::uint64_t ScenarioConfig::hash() const {
    // FNV-1a over the canonical serialization
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_text()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

bool ChannelSet::dims_consistent() const {
    auto all_len = [](const std::vector<VecC>& v, int count, int len) {
        if (static_cast<int>(v.size()) != count)
            return false;
        for (const auto& x : v)
            if (x.size() != len)
                return false;
        return true;
    };
    return bs_irs.rows() == N && bs_irs.cols() == M && all_len(bs_iu, U_I, M) &&
           all_len(bs_eu, U_E, M) && all_len(bs_d2d, K, M) && all_len(irs_iu, U_I, N) &&
           all_len(irs_eu, U_E, N) && all_len(irs_d2d, K, N) && all_len(d2dtx_irs, K, N) &&
           d2d_direct.size() == K && d2d_cross.rows() == K && d2d_cross.cols() == K &&
           d2dtx_iu.rows() == K && d2dtx_iu.cols() == U_I && d2dtx_eu.rows() == K &&
           d2dtx_eu.cols() == U_E;
}

bool ChannelSet::all_finite() const {
    auto fin = [](const MatC& m) { return m.allFinite(); };
    auto finv = [](const std::vector<VecC>& v) {
        for (const auto& x : v)
            if (!x.allFinite())
                return false;
        return true;
    };
    return fin(bs_irs) && finv(bs_iu) && finv(bs_eu) && finv(bs_d2d) && finv(irs_iu) &&
           finv(irs_eu) && finv(irs_d2d) && finv(d2dtx_irs) && d2d_direct.allFinite() &&
           fin(d2d_cross) && fin(d2dtx_iu) && fin(d2dtx_eu);
}

void ChannelSet::save(std::ostream& out) const {
    out.write("DED2DCH1", 8);
    for (int d : {M, N, U_I, U_E, K})
        put_u64(out, static_cast<std::uint64_t>(d));
    put_cmat(out, bs_irs);
    auto put_list = [&](const std::vector<VecC>& v) {
        put_u64(out, v.size());
        for (const auto& x : v)
            put_cvec(out, x);
    };
    put_list(bs_iu);
    put_list(bs_eu);
    put_list(bs_d2d);
    put_list(irs_iu);
    put_list(irs_eu);
    put_list(irs_d2d);
    put_list(d2dtx_irs);
    put_cvec(out, d2d_direct);
    put_cmat(out, d2d_cross);
    put_cmat(out, d2dtx_iu);
    put_cmat(out, d2dtx_eu);
}

ChannelSet ChannelSet::load(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "DED2DCH1", 8) != 0)
        throw std::runtime_error("channel snapshot: bad magic/version");
    ChannelSet ch;
    ch.M = static_cast<int>(get_u64(in));
    ch.N = static_cast<int>(get_u64(in));
    ch.U_I = static_cast<int>(get_u64(in));
    ch.U_E = static_cast<int>(get_u64(in));
    ch.K = static_cast<int>(get_u64(in));
    ch.bs_irs = get_cmat(in);
    auto get_list = [&](std::vector<VecC>& v) {
        const auto n = get_u64(in);
        v.resize(n);
        for (auto& x : v)
            x = get_cvec(in);
    };
    get_list(ch.bs_iu);
    get_list(ch.bs_eu);
    get_list(ch.bs_d2d);
    get_list(ch.irs_iu);
    get_list(ch.irs_eu);
    get_list(ch.irs_d2d);
    get_list(ch.d2dtx_irs);
    ch.d2d_direct = get_cvec(in);
    ch.d2d_cross = get_cmat(in);
    ch.d2dtx_iu = get_cmat(in);
    ch.d2dtx_eu = get_cmat(in);
    if (!in || !ch.dims_consistent())
        throw std::runtime_error("channel snapshot: truncated or inconsistent");
    return ch;
}

double pathloss_db(double distance_m, double gamma) {
    return 30.0 + 10.0 * gamma * std::log10(distance_m);
}

double bs_irs_distance(const ScenarioConfig& cfg) {
    return dist(from_array(cfg.bs_position), from_array(cfg.irs_position));
}

double bs_irs_gain_db(const ScenarioConfig& cfg) {
    return cfg.gain_bs_dbi + cfg.gain_irs_dbi - 35.9 - 22.0 * std::log10(bs_irs_distance(cfg));
}

ChannelSet generate_channels(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const Rng root(seed);

    const Point3 bs = from_array(cfg.bs_position);
    const Point3 irs = from_array(cfg.irs_position);

    ChannelSet ch;
    ch.M = cfg.num_bs_antennas;
    ch.N = cfg.num_irs_elements;
    ch.U_I = cfg.num_ius;
    ch.U_E = cfg.num_eus;
    ch.K = cfg.num_d2d_pairs;

    std::vector<Point3> iu(ch.U_I), eu(ch.U_E), d2d_tx(ch.K), d2d_rx(ch.K);
    for (int i = 0; i < ch.U_I; ++i)
        iu[i] = draw_position(root.fork(kPosIu).fork(i), cfg, bs, irs);
    for (int j = 0; j < ch.U_E; ++j)
        eu[j] = draw_position(root.fork(kPosEu).fork(j), cfg, bs, irs);
    for (int k = 0; k < ch.K; ++k) {
        Rng rng = root.fork(kPosD2d).fork(k);
        d2d_tx[k] = draw_position(rng, cfg, bs, irs);
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        d2d_rx[k] = {d2d_tx[k].x + cfg.d2d_pair_distance * std::cos(angle),
                     d2d_tx[k].y + cfg.d2d_pair_distance * std::sin(angle), 0.0};
    }

    // Cross-pair receivers may land on another transmitter; those pairs are
    // redrawn as a whole.
    for (int attempt = 0;; ++attempt) {
        bool ok = true;
        for (int k = 0; k < ch.K && ok; ++k)
            for (int l = 0; l < ch.K && ok; ++l)
                if (l != k && dist(d2d_tx[l], d2d_rx[k]) < kMinDistance)
                    ok = false;
        if (ok)
            break;
        if (attempt >= kRedrawBudget)
            throw std::runtime_error("degenerate geometry: D2D cross distance redraw budget exhausted");
        for (int k = 0; k < ch.K; ++k) {
            Rng rng = root.fork(kPosD2d).fork(k).fork(1000 + attempt);
            d2d_tx[k] = draw_position(rng, cfg, bs, irs);
            const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
            d2d_rx[k] = {d2d_tx[k].x + cfg.d2d_pair_distance * std::cos(angle),
                         d2d_tx[k].y + cfg.d2d_pair_distance * std::sin(angle), 0.0};
        }
    }

    // BS-IRS LoS matrix: unit-modulus phasors with per-element random angles,
    // scaled by the large-scale amplitude.
    const double g_amp = amp_from_db(bs_irs_gain_db(cfg));
    ch.bs_irs.resize(ch.N, ch.M);
    for (int n = 0; n < ch.N; ++n) {
        Rng rng = root.fork(kLosAngles).fork(n);
        const double theta = rng.uniform(0.0, std::numbers::pi);
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double theta_bar = std::numbers::pi - theta;
        const double phi_bar = std::numbers::pi + phi;
        for (int m = 0; m < ch.M; ++m) {
            const double arg = std::numbers::pi *
                               (n * std::sin(theta_bar) * std::sin(phi_bar) +
                                m * std::sin(theta) * std::sin(phi));
            ch.bs_irs(n, m) = g_amp * std::polar(1.0, arg);
        }
    }

    const double kappa = std::pow(10.0, cfg.rician_factor_db / 10.0);
    const double ge = cfg.pathloss_exp_rician;
    const double gr = cfg.pathloss_exp_rayleigh;
    auto ray_amp = [&](double d) { return amp_from_db(-pathloss_db(d, gr)); };

    ch.bs_iu.resize(ch.U_I);
    ch.irs_iu.resize(ch.U_I);
    for (int i = 0; i < ch.U_I; ++i) {
        ch.bs_iu[i] = rayleigh_vector(root.fork(kFadeBsIu).fork(i), ch.M, ray_amp(dist(bs, iu[i])));
        ch.irs_iu[i] = rayleigh_vector(root.fork(kFadeIrsIu).fork(i), ch.N, ray_amp(dist(irs, iu[i])));
    }

    ch.bs_eu.resize(ch.U_E);
    ch.irs_eu.resize(ch.U_E);
    for (int j = 0; j < ch.U_E; ++j) {
        const double amp = amp_from_db(-pathloss_db(dist(bs, eu[j]), ge));
        ch.bs_eu[j] = rician_vector(root.fork(kFadeBsEu).fork(j), ch.M, amp, kappa);
        ch.irs_eu[j] = rayleigh_vector(root.fork(kFadeIrsEu).fork(j), ch.N, ray_amp(dist(irs, eu[j])));
    }

    ch.bs_d2d.resize(ch.K);
    ch.irs_d2d.resize(ch.K);
    ch.d2dtx_irs.resize(ch.K);
    ch.d2d_direct.resize(ch.K);
    ch.d2d_cross = MatC::Zero(ch.K, ch.K);
    ch.d2dtx_iu.resize(ch.K, ch.U_I);
    ch.d2dtx_eu.resize(ch.K, ch.U_E);
    for (int k = 0; k < ch.K; ++k) {
        ch.bs_d2d[k] = rayleigh_vector(root.fork(kFadeBsD2d).fork(k), ch.M, ray_amp(dist(bs, d2d_rx[k])));
        ch.irs_d2d[k] = rayleigh_vector(root.fork(kFadeIrsD2d).fork(k), ch.N, ray_amp(dist(irs, d2d_rx[k])));
        ch.d2dtx_irs[k] = rayleigh_vector(root.fork(kFadeD2dIrs).fork(k), ch.N, ray_amp(dist(d2d_tx[k], irs)));
        ch.d2d_direct(k) =
            rayleigh_vector(root.fork(kFadeD2dDirect).fork(k), 1, ray_amp(dist(d2d_tx[k], d2d_rx[k])))(0);
        for (int l = 0; l < ch.K; ++l) {
            if (l == k)
                continue;
            ch.d2d_cross(k, l) = rayleigh_vector(root.fork(kFadeD2dCross).fork(k).fork(l), 1,
                                                 ray_amp(dist(d2d_tx[l], d2d_rx[k])))(0);
        }
        for (int i = 0; i < ch.U_I; ++i)
            ch.d2dtx_iu(k, i) = rayleigh_vector(root.fork(kFadeD2dIu).fork(k).fork(i), 1,
                                                ray_amp(dist(d2d_tx[k], iu[i])))(0);
        for (int j = 0; j < ch.U_E; ++j)
            ch.d2dtx_eu(k, j) = rayleigh_vector(root.fork(kFadeD2dEu).fork(k).fork(j), 1,
                                                ray_amp(dist(d2d_tx[k], eu[j])))(0);
    }

    return ch;
}

} // namespace ded2d

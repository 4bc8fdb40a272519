#include "ded2d/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ded2d {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Algo a) {
    switch (a) {
        case Algo::Nota: return "nota";
        case Algo::NotaRandom: return "nota-random";
        case Algo::Ota: return "ota";
        case Algo::OtaRandom: return "ota-random";
    }
    return "?";
}

Algo algo_from_string(const std::string& name) {
    if (name == "nota") return Algo::Nota;
    if (name == "nota-random" || name == "nota_random") return Algo::NotaRandom;
    if (name == "ota") return Algo::Ota;
    if (name == "ota-random" || name == "ota_random") return Algo::OtaRandom;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string fmt_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

ScenarioConfig apply_param(const ScenarioConfig& base, const std::string& param, double value) {
    ScenarioConfig cfg = base;
    auto as_int = [&]() {
        const int i = static_cast<int>(std::llround(value));
        if (std::abs(value - i) > 1e-9)
            throw std::invalid_argument("sweep: parameter '" + param + "' needs integer values");
        return i;
    };
    if (param == "pbmax_dbm")
        cfg.pbmax_dbm = value;
    else if (param == "pkmax_dbm")
        cfg.pkmax_dbm = value;
    else if (param == "rkmin_bps_hz")
        cfg.rkmin_bps_hz = value;
    else if (param == "emin_dbm")
        cfg.emin_dbm = value;
    else if (param == "rho")
        cfg.rho = value;
    else if (param == "num_d2d_pairs")
        cfg.num_d2d_pairs = as_int();
    else if (param == "num_irs_elements")
        cfg.num_irs_elements = as_int();
    else if (param == "num_bs_antennas")
        cfg.num_bs_antennas = as_int();
    else if (param == "num_ius")
        cfg.num_ius = as_int();
    else if (param == "num_eus")
        cfg.num_eus = as_int();
    else if (param == "d2d_pair_distance")
        cfg.d2d_pair_distance = value;
    else
        throw std::invalid_argument("sweep: unknown parameter '" + param + "'");
    cfg.validate();
    return cfg;
}

void SweepSpec::validate() const {
    if (values.empty())
        throw std::invalid_argument("sweep: empty value list");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] < values[i - 1])
            throw std::invalid_argument("sweep: values must be sorted ascending");
    if (seeds_per_point < 1)
        throw std::invalid_argument("sweep: need at least one seed per point");
    if (algos.empty())
        throw std::invalid_argument("sweep: no algorithms selected");
    for (double v : values)
        apply_param(base, param, v); // validates the name and each value
}

int PointStats::feasible_count() const {
    int n = 0;
    for (const auto& s : raw)
        n += s.feasible;
    return n;
}

double PointStats::feasibility_rate() const {
    return raw.empty() ? 0.0 : static_cast<double>(feasible_count()) / raw.size();
}

double PointStats::mean_bpshz() const {
    double acc = 0.0;
    int n = 0;
    for (const auto& s : raw)
        if (s.feasible) {
            acc += s.throughput_bpshz;
            ++n;
        }
    return n == 0 ? 0.0 : acc / n;
}

double PointStats::std_bpshz() const {
    const double m = mean_bpshz();
    double acc = 0.0;
    int n = 0;
    for (const auto& s : raw)
        if (s.feasible) {
            acc += (s.throughput_bpshz - m) * (s.throughput_bpshz - m);
            ++n;
        }
    return n <= 1 ? 0.0 : std::sqrt(acc / (n - 1));
}

double PointStats::mean_iterations() const {
    double acc = 0.0;
    int n = 0;
    for (const auto& s : raw)
        if (s.feasible) {
            acc += s.iterations;
            ++n;
        }
    return n == 0 ? 0.0 : acc / n;
}

const PointStats& SweepResult::at(Algo a, double value) const {
    for (const auto& p : points)
        if (p.algo == a && p.value == value)
            return p;
    throw std::out_of_range("sweep result: no such point");
}

namespace {

SeedOutcome run_one(const ScenarioConfig& cfg, Algo algo, int seed_index,
                    const AlgorithmOptions& base_opts) {
    SeedOutcome out;
    out.seed_index = seed_index;
    out.channel_seed = cfg.rng_seed + static_cast<std::uint64_t>(seed_index);

    const ChannelSet ch = generate_channels(cfg, out.channel_seed);
    AlgorithmOptions opts = base_opts;
    opts.rng_seed = out.channel_seed;

    RunTrace tr;
    switch (algo) {
        case Algo::Nota: tr = run_nota(ch, cfg, opts); break;
        case Algo::Ota: tr = run_ota(ch, cfg, opts); break;
        case Algo::NotaRandom: tr = run_random_theta(ch, cfg, opts, Scenario::Nota); break;
        case Algo::OtaRandom: tr = run_random_theta(ch, cfg, opts, Scenario::Ota); break;
    }
    out.feasible = tr.has_point;
    out.converged = tr.reason == StopReason::Converged;
    out.iterations = static_cast<int>(tr.iters.size());
    out.throughput_nats = tr.final_objective;
    out.throughput_bpshz = tr.final_objective / std::numbers::ln2;
    out.min_abs_theta = tr.relaxed.min_abs_theta();
    out.projection_warning = tr.projection_warning;
    out.eta = tr.eta;
    out.feas_rounds = tr.feasibility_rounds;
    out.wall_ms = tr.wall_ms;
    out.trace = tr.iters;
    return out;
}

std::string trace_filename(Algo a, double value, int seed_index) {
    std::string v = fmt_g12(value);
    for (auto& c : v)
        if (c == '.' || c == '-' || c == '+')
            c = '_';
    return "trace_" + std::string(to_string(a)) + "_" + v + "_" + std::to_string(seed_index) +
           ".csv";
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();

    SweepResult result;
    result.spec = spec;
    for (Algo a : spec.algos)
        for (double v : spec.values) {
            PointStats p;
            p.algo = a;
            p.value = v;
            p.raw.resize(spec.seeds_per_point);
            result.points.push_back(std::move(p));
        }

    struct Task {
        std::size_t point;
        int seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < result.points.size(); ++p)
        for (int s = 0; s < spec.seeds_per_point; ++s)
            tasks.push_back({p, s});

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size())
                return;
            const Task task = tasks[t];
            PointStats& point = result.points[task.point];
            const ScenarioConfig cfg = apply_param(spec.base, spec.param, point.value);
            point.raw[task.seed_index] = run_one(cfg, point.algo, task.seed_index, spec.opts);
        }
    };

    int workers = spec.workers > 0 ? spec.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    result.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

void emit_reports(const SweepResult& result, const std::string& dir) {
    fs::create_directories(dir);
    const auto& spec = result.spec;

    {
        std::ofstream raw(fs::path(dir) / "raw.csv");
        if (!raw)
            throw std::runtime_error("emit_reports: cannot write to '" + dir + "'");
        raw << "algo,param,value,seed_index,channel_seed,feasible,converged,iterations,"
               "throughput_bpshz,throughput_nats,min_abs_theta,projection_warning,eta,"
               "feas_rounds\n";
        for (const auto& p : result.points)
            for (const auto& s : p.raw)
                raw << to_string(p.algo) << ',' << spec.param << ',' << fmt_g12(p.value) << ','
                    << s.seed_index << ',' << s.channel_seed << ',' << s.feasible << ','
                    << s.converged << ',' << s.iterations << ',' << fmt_g12(s.throughput_bpshz)
                    << ',' << fmt_g12(s.throughput_nats) << ',' << fmt_g12(s.min_abs_theta) << ','
                    << s.projection_warning << ',' << fmt_g12(s.eta) << ',' << s.feas_rounds
                    << '\n';
    }

    {
        std::ofstream sum(fs::path(dir) / "summary.csv");
        sum << "algo,param,value,seeds,feasible,feasibility_rate,mean_bpshz,std_bpshz,"
               "mean_iterations\n";
        for (const auto& p : result.points)
            sum << to_string(p.algo) << ',' << spec.param << ',' << fmt_g12(p.value) << ','
                << p.raw.size() << ',' << p.feasible_count() << ','
                << fmt_g12(p.feasibility_rate()) << ',' << fmt_g12(p.mean_bpshz()) << ','
                << fmt_g12(p.std_bpshz()) << ',' << fmt_g12(p.mean_iterations()) << '\n';
    }

    if (spec.write_traces) {
        for (const auto& p : result.points)
            for (const auto& s : p.raw) {
                std::ofstream tf(fs::path(dir) / trace_filename(p.algo, p.value, s.seed_index));
                tf << "iter,objective_nats,penalized_nats,omega,min_abs_theta,max_violation,"
                      "block_ms,theta_ms\n";
                for (const auto& it : s.trace)
                    tf << it.iter << ',' << fmt_g12(it.objective) << ',' << fmt_g12(it.penalized)
                       << ',' << fmt_g12(it.omega) << ',' << fmt_g12(it.min_abs_theta) << ','
                       << fmt_g12(it.max_violation) << ',' << fmt_g12(it.block_ms) << ','
                       << fmt_g12(it.theta_ms) << '\n';
            }
    }

    {
        json m;
        m["format"] = "ded2d-sweep-manifest-v1";
        m["param"] = spec.param;
        m["values"] = spec.values;
        m["seeds_per_point"] = spec.seeds_per_point;
        std::vector<std::string> algo_names;
        for (Algo a : spec.algos)
            algo_names.emplace_back(to_string(a));
        m["algos"] = algo_names;
        m["config"] = spec.base.canonical_text();
        m["config_hash"] = spec.base.hash();
        m["options"] = {{"max_outer_iters", spec.opts.max_outer_iters},
                        {"convergence_tol", spec.opts.convergence_tol},
                        {"feas_max_rounds", spec.opts.feas_max_rounds},
                        {"conic_tol", spec.opts.conic_tol},
                        {"projection_enabled", spec.opts.projection_enabled},
                        {"trust_margin", spec.opts.trust_margin},
                        {"tau_max", spec.opts.tau_max}};
        m["write_traces"] = spec.write_traces;
        m["wall_ms"] = result.wall_ms;
        std::ofstream mf(fs::path(dir) / "manifest.json");
        mf << m.dump(2) << '\n';
    }

    {
        std::ofstream plot(fs::path(dir) / "plot_sweep.py");
        plot << "#!/usr/bin/env python3\n"
                "\"\"\"Plots mean max-min throughput vs the swept parameter from summary.csv.\"\"\"\n"
                "import csv\n"
                "import collections\n"
                "import matplotlib.pyplot as plt\n"
                "\n"
                "curves = collections.defaultdict(list)\n"
                "param = 'value'\n"
                "with open('summary.csv') as fh:\n"
                "    for row in csv.DictReader(fh):\n"
                "        param = row['param']\n"
                "        curves[row['algo']].append((float(row['value']), float(row['mean_bpshz'])))\n"
                "for algo, pts in sorted(curves.items()):\n"
                "    pts.sort()\n"
                "    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker='o', label=algo)\n"
                "plt.xlabel(param)\n"
                "plt.ylabel('max-min throughput (bps/Hz)')\n"
                "plt.legend()\n"
                "plt.grid(True)\n"
                "plt.savefig('sweep.png', dpi=150)\n"
                "print('wrote sweep.png')\n";
    }
}

SweepSpec spec_from_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("manifest: cannot open '" + path + "'");
    json m = json::parse(in);
    if (m.value("format", "") != std::string("ded2d-sweep-manifest-v1"))
        throw std::invalid_argument("manifest: unknown format");

    SweepSpec spec;
    spec.param = m.at("param").get<std::string>();
    spec.values = m.at("values").get<std::vector<double>>();
    spec.seeds_per_point = m.at("seeds_per_point").get<int>();
    spec.algos.clear();
    for (const auto& name : m.at("algos"))
        spec.algos.push_back(algo_from_string(name.get<std::string>()));
    std::istringstream cfg_text(m.at("config").get<std::string>());
    spec.base = ScenarioConfig::from_stream(cfg_text);
    if (m.contains("options")) {
        const auto& o = m["options"];
        spec.opts.max_outer_iters = o.value("max_outer_iters", spec.opts.max_outer_iters);
        spec.opts.convergence_tol = o.value("convergence_tol", spec.opts.convergence_tol);
        spec.opts.feas_max_rounds = o.value("feas_max_rounds", spec.opts.feas_max_rounds);
        spec.opts.conic_tol = o.value("conic_tol", spec.opts.conic_tol);
        spec.opts.projection_enabled = o.value("projection_enabled", spec.opts.projection_enabled);
        spec.opts.trust_margin = o.value("trust_margin", spec.opts.trust_margin);
        spec.opts.tau_max = o.value("tau_max", spec.opts.tau_max);
    }
    spec.write_traces = m.value("write_traces", true);
    if (spec.base.hash() != m.at("config_hash").get<std::uint64_t>())
        throw std::runtime_error("manifest: config hash mismatch");
    return spec;
}

} // namespace ded2d

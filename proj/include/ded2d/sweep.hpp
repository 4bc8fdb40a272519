#pragma once

#include <string>
#include <vector>

#include "ded2d/sca.hpp"

namespace ded2d {

enum class Algo { Nota, NotaRandom, Ota, OtaRandom };

const char* to_string(Algo a);
Algo algo_from_string(const std::string& name); // throws on unknown names

/// One batch study: sweep one configuration field over a value list, running
/// every selected algorithm on seeds-per-point channel realizations per value.
struct SweepSpec {
    std::string param;          // ScenarioConfig field name
    std::vector<double> values; // sorted ascending
    int seeds_per_point = 20;
    std::vector<Algo> algos{Algo::Nota, Algo::NotaRandom, Algo::Ota, Algo::OtaRandom};
    ScenarioConfig base;
    AlgorithmOptions opts;
    int workers = 0; // 0: hardware concurrency
    bool write_traces = true;

    void validate() const;
};

/// Applies one swept value to a configuration field (integer fields are
/// rounded and re-validated). Throws on unknown or non-sweepable names.
ScenarioConfig apply_param(const ScenarioConfig& base, const std::string& param, double value);

struct SeedOutcome {
    int seed_index = 0;
    std::uint64_t channel_seed = 0;
    bool feasible = false;
    bool converged = false;
    int iterations = 0;
    double throughput_nats = 0.0;
    double throughput_bpshz = 0.0;
    double min_abs_theta = 1.0;
    bool projection_warning = false;
    double eta = 0.0;
    int feas_rounds = 0;
    double wall_ms = 0.0;
    std::vector<IterRecord> trace;
};

struct PointStats {
    Algo algo{};
    double value = 0.0;
    std::vector<SeedOutcome> raw;

    int feasible_count() const;
    double feasibility_rate() const;
    double mean_bpshz() const; // over feasible seeds
    double std_bpshz() const;
    double mean_iterations() const;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<PointStats> points; // ordered algo-major, then value
    double wall_ms = 0.0;

    const PointStats& at(Algo a, double value) const;
};

/// Runs the whole grid. Tasks are independent; workers share nothing but the
/// result slots, so the output is identical for any worker count.
SweepResult run_sweep(const SweepSpec& spec);

/// Writes summary.csv, raw.csv, per-run trace files, manifest.json and a
/// small plotting script into dir. summary.csv and raw.csv carry no timing
/// and are bit-reproducible; traces and the manifest carry wall times.
void emit_reports(const SweepResult& result, const std::string& dir);

/// Rebuilds the spec recorded by emit_reports (base config, param, values,
/// seeds, algorithms, options).
SweepSpec spec_from_manifest(const std::string& path);

/// 12-significant-digit float formatting used by every CSV writer.
std::string fmt_g12(double v);

} // namespace ded2d

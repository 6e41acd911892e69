#include "keymesh/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "keymesh/errors.hpp"
#include "keymesh/rng.hpp"
#include "keymesh/sha256.hpp"

namespace keymesh {

namespace {

constexpr std::uint64_t kStreamCapture = 21;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return xs.empty() ? 0.0 : sum / double(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / double(xs.size() - 1)) / std::sqrt(double(xs.size()));
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write output file: " + path.string());
    }
    return out;
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace

Scenario scenario_from_name(std::string_view name) {
    if (name == "plan") return Scenario::plan;
    if (name == "simulate") return Scenario::simulate;
    if (name == "table1") return Scenario::table1;
    if (name == "capture-sweep" || name == "capture_sweep") return Scenario::capture_sweep;
    if (name == "eg-compare" || name == "eg_compare") return Scenario::eg_compare;
    if (name == "rescue-eval" || name == "rescue_eval") return Scenario::rescue_eval;
    if (name == "broadcast-count" || name == "broadcast_count") return Scenario::broadcast_count;
    throw ConfigError("unknown scenario: " + std::string(name));
}

std::string_view scenario_name(Scenario s) {
    switch (s) {
        case Scenario::plan: return "plan";
        case Scenario::simulate: return "simulate";
        case Scenario::table1: return "table1";
        case Scenario::capture_sweep: return "capture-sweep";
        case Scenario::eg_compare: return "eg-compare";
        case Scenario::rescue_eval: return "rescue-eval";
        case Scenario::broadcast_count: return "broadcast-count";
    }
    return "unknown";
}

void ExperimentSpec::validate() const {
    config.validate();
    if (trials < 1) {
        throw ConfigError("trials must be >= 1");
    }
    if (scenario == Scenario::capture_sweep && x_values.empty()) {
        throw ConfigError("capture-sweep needs a list of x values");
    }
    for (double p : target_p) {
        if (!(p > 0.0) || p >= 1.0) {
            throw ConfigError("target p must lie in (0, 1)");
        }
    }
}

std::string config_hash(const SimConfig& cfg) {
    return to_hex(sha256(canonical_json(cfg))).substr(0, 16);
}

TrialMetrics run_trial(const SimConfig& cfg, std::uint64_t seed) {
    Network net = run_protocol(cfg, seed);
    const KeyGraph graph = build_key_graph(net);
    for (NodeState& st : net.states) {
        st.mark_discovered();
    }

    TrialMetrics m;
    m.local = local_connectivity(graph, net.deployment);
    m.global = global_connectivity(graph);
    const CoverageStats cov = coverage_stats(net.deployment, net.flood, net.config);
    m.uncovered = cov.uncovered_count;
    m.expected_uncovered = cov.expected_uncovered;
    m.transmissions = net.flood.transmissions;
    const GroupGraphReport gg = group_graph_connected(net.states);
    m.group_components = gg.component_count;
    m.group_connected = gg.connected;
    return m;
}

void write_metrics_csv(std::ostream& out, const SimConfig& cfg,
                       const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& per_trial_values) {
    out << "metric,t_key,k,keys_total,value,stderr,seed_count\n";
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto& vals = per_trial_values[i];
        out << names[i] << ',' << cfg.t_key << ',' << cfg.keys_per_group << ','
            << cfg.t_key * cfg.keys_per_group << ',' << fmt(mean_of(vals)) << ','
            << fmt(stderr_of(vals)) << ',' << vals.size() << '\n';
    }
}

std::vector<Table1Row> table1_rows(const SimConfig& base, std::uint32_t trials) {
    static constexpr std::uint32_t kKeysTotals[] = {40, 60, 100};
    static constexpr std::uint32_t kTkeys[] = {2, 4};

    std::vector<Table1Row> rows;
    for (std::uint32_t keys_total : kKeysTotals) {
        for (std::uint32_t t_key : kTkeys) {
            SimConfig cfg = base;
            cfg.t_key = t_key;
            cfg.keys_per_group = keys_total / t_key;
            cfg.validate();
            std::vector<double> locals, globals;
            for (std::uint32_t i = 0; i < trials; ++i) {
                const TrialMetrics m = run_trial(cfg, base.rng_seed + i);
                locals.push_back(m.local);
                globals.push_back(m.global);
            }
            rows.push_back({keys_total, t_key, mean_of(locals), stderr_of(locals),
                            mean_of(globals), stderr_of(globals), trials});
        }
    }
    return rows;
}

void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows) {
    out << "keys_total,t_key,local,local_stderr,global,global_stderr,trials\n";
    for (const auto& r : rows) {
        out << r.keys_total << ',' << r.t_key << ',' << fmt(r.local) << ','
            << fmt(r.local_stderr) << ',' << fmt(r.global) << ',' << fmt(r.global_stderr)
            << ',' << r.trials << '\n';
    }
}

std::vector<CaptureRow> capture_sweep_rows(const SimConfig& cfg, std::uint32_t trials,
                                           const std::vector<std::uint32_t>& x_values) {
    std::vector<CaptureRow> rows(x_values.size());
    std::vector<std::vector<double>> empirical(x_values.size());
    std::vector<std::vector<double>> eligible(x_values.size());

    for (std::uint32_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = cfg.rng_seed + trial;
        const Network net = run_protocol(cfg, seed);
        const KeyGraph graph = build_key_graph(net);
        for (std::size_t i = 0; i < x_values.size(); ++i) {
            const auto rep = simulate_capture(
                graph, net.states, net.config, net.deployment.tagged_count(), x_values[i],
                substream_seed(seed, kStreamCapture + x_values[i]));
            empirical[i].push_back(rep.empirical_fraction);
            eligible[i].push_back(double(rep.eligible_links));
            rows[i].analytic_bound = rep.analytic_bound;
        }
    }
    for (std::size_t i = 0; i < x_values.size(); ++i) {
        rows[i].x = x_values[i];
        rows[i].empirical = mean_of(empirical[i]);
        rows[i].empirical_stderr = stderr_of(empirical[i]);
        rows[i].eligible_links = mean_of(eligible[i]);
    }
    return rows;
}

void write_capture_csv(std::ostream& out, const std::vector<CaptureRow>& rows) {
    out << "x,empirical,analytic_bound,eligible_links\n";
    for (const auto& r : rows) {
        out << r.x << ',' << fmt(r.empirical) << ',' << fmt(r.analytic_bound) << ','
            << fmt(r.eligible_links) << '\n';
    }
}

MatchedRing match_ring_size(const SimConfig& base, double target_p, std::uint32_t trials) {
    auto measure = [&](std::uint32_t k) {
        SimConfig cfg = base;
        cfg.keys_per_group = k;
        cfg.validate();
        std::vector<double> locals;
        for (std::uint32_t i = 0; i < trials; ++i) {
            locals.push_back(run_trial(cfg, base.rng_seed + i).local);
        }
        return mean_of(locals);
    };

    // p grows with k; grow the bracket geometrically, then bisect the step
    // where it crosses the target
    std::uint32_t lo = 1;
    double p_at_lo = measure(lo);
    if (p_at_lo >= target_p) {
        return {lo, p_at_lo};
    }
    std::uint32_t hi = lo;
    double p_hi = p_at_lo;
    while (p_hi < target_p) {
        if (hi == base.pool_m) {
            throw ConfigError("target local connectivity " + fmt(target_p) +
                              " unreachable; at k=M it is only " + fmt(p_hi));
        }
        lo = hi;
        p_at_lo = p_hi;
        hi = std::min(base.pool_m, hi * 2);
        p_hi = measure(hi);
    }
    while (hi - lo > 1) {
        const std::uint32_t mid = lo + (hi - lo) / 2;
        const double p_mid = measure(mid);
        if (p_mid < target_p) {
            lo = mid;
            p_at_lo = p_mid;
        } else {
            hi = mid;
            p_hi = p_mid;
        }
    }
    // pick whichever side lands closer to the target
    if (std::abs(p_at_lo - target_p) < std::abs(p_hi - target_p)) {
        return {lo, p_at_lo};
    }
    return {hi, p_hi};
}

std::vector<EgCompareRow> eg_compare_rows(const SimConfig& base,
                                          const std::vector<double>& targets,
                                          const std::vector<std::uint32_t>& x_values,
                                          std::uint32_t sweep_trials) {
    std::vector<EgCompareRow> rows;
    const std::uint64_t scheme_pool =
        std::uint64_t(resolve_tagged(base)) * base.pool_m;
    for (double target : targets) {
        const MatchedRing match = match_ring_size(base, target, sweep_trials);
        const std::uint64_t ring = std::uint64_t(base.t_key) * match.k;
        const std::uint64_t eg_pool = eg_pool_for_connectivity(target, std::uint32_t(ring));
        for (std::uint32_t x : x_values) {
            EgCompareRow row;
            row.target_p = target;
            row.matched_p = match.measured_p;
            row.matched_k = match.k;
            row.ring_size = ring;
            row.scheme_pool = scheme_pool;
            row.eg_pool = eg_pool;
            row.x = x;
            row.scheme_bound = resilience_bound(ring, scheme_pool, x);
            row.eg_bound = resilience_bound(ring, eg_pool, x);
            rows.push_back(row);
        }
    }
    return rows;
}

void write_eg_compare_csv(std::ostream& out, const std::vector<EgCompareRow>& rows) {
    out << "target_p,matched_p,matched_k,ring_size,scheme_pool,eg_pool,x,scheme_bound,eg_bound\n";
    for (const auto& r : rows) {
        out << fmt(r.target_p) << ',' << fmt(r.matched_p) << ',' << r.matched_k << ','
            << r.ring_size << ',' << r.scheme_pool << ',' << r.eg_pool << ',' << r.x << ','
            << fmt(r.scheme_bound) << ',' << fmt(r.eg_bound) << '\n';
    }
}

namespace {

RunRecord base_record(const ExperimentSpec& spec, std::uint64_t seed) {
    RunRecord rec;
    rec.scenario = std::string(scenario_name(spec.scenario));
    rec.config_hash = config_hash(spec.config);
    rec.rng_seed = seed;
    return rec;
}

std::vector<RunRecord> run_plan(const ExperimentSpec& spec) {
    const Stopwatch watch;
    const auto t_c = plan_coverage(spec.config);
    const auto t_i = plan_intergroup(spec.config);
    const auto t = std::max(t_c, t_i);

    RunRecord rec = base_record(spec, spec.config.rng_seed);
    rec.metrics = {{"t_c", double(t_c)}, {"t_i", double(t_i)}, {"t", double(t)}};
    rec.duration_ms = watch.ms();

    if (!spec.output_path.empty()) {
        auto out = open_out(spec.output_path);
        write_metrics_csv(out, spec.config, {"t_c", "t_i", "t"},
                          {{double(t_c)}, {double(t_i)}, {double(t)}});
    }
    return {rec};
}

std::vector<RunRecord> run_simulate(const ExperimentSpec& spec) {
    static const std::vector<std::string> kNames = {
        "local_connectivity",   "global_connectivity", "uncovered_count",
        "expected_uncovered",   "setup_transmissions", "group_graph_components",
    };
    std::vector<std::vector<double>> values(kNames.size());
    std::vector<RunRecord> records;

    for (std::uint32_t trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t seed = spec.config.rng_seed + trial;
        const Stopwatch watch;

        if (trial == 0 && (!spec.dump_deployment.empty() || !spec.dump_rings.empty() ||
                           !spec.dump_transcripts.empty())) {
            Network net = run_protocol(spec.config, seed);
            if (!spec.dump_deployment.empty()) {
                auto out = open_out(spec.dump_deployment);
                net.deployment.dump_csv(out);
            }
            if (!spec.dump_rings.empty()) {
                auto out = open_out(spec.dump_rings);
                dump_rings_csv(net.states, out);
            }
            if (!spec.dump_transcripts.empty()) {
                auto out = open_out(spec.dump_transcripts);
                dump_discovery_transcripts(net.states, out);
            }
        }

        const TrialMetrics m = run_trial(spec.config, seed);
        const double row[] = {m.local,
                              m.global,
                              double(m.uncovered),
                              m.expected_uncovered,
                              double(m.transmissions),
                              double(m.group_components)};
        RunRecord rec = base_record(spec, seed);
        for (std::size_t i = 0; i < kNames.size(); ++i) {
            values[i].push_back(row[i]);
            rec.metrics.emplace_back(kNames[i], row[i]);
        }
        rec.duration_ms = watch.ms();
        records.push_back(std::move(rec));
    }

    if (!spec.output_path.empty()) {
        auto out = open_out(spec.output_path);
        write_metrics_csv(out, spec.config, kNames, values);
    }
    return records;
}

std::vector<RunRecord> run_table1(const ExperimentSpec& spec) {
    const Stopwatch watch;
    const auto rows = table1_rows(spec.config, spec.trials);
    std::vector<RunRecord> records;
    for (const auto& r : rows) {
        RunRecord rec = base_record(spec, spec.config.rng_seed);
        rec.metrics = {{"keys_total", double(r.keys_total)},
                       {"t_key", double(r.t_key)},
                       {"local", r.local},
                       {"global", r.global}};
        rec.duration_ms = watch.ms();
        records.push_back(std::move(rec));
    }
    if (!spec.output_path.empty()) {
        auto out = open_out(spec.output_path);
        write_table1_csv(out, rows);
    }
    return records;
}

std::vector<RunRecord> run_capture_sweep(const ExperimentSpec& spec) {
    const Stopwatch watch;
    SimConfig cfg = spec.config;
    std::optional<MatchedRing> match;
    if (!spec.target_p.empty()) {
        match = match_ring_size(cfg, spec.target_p.front(), 1);
        cfg.keys_per_group = match->k;
    }
    const auto rows = capture_sweep_rows(cfg, spec.trials, spec.x_values);

    std::vector<RunRecord> records;
    RunRecord rec = base_record(spec, cfg.rng_seed);
    if (match) {
        rec.metrics.emplace_back("matched_k", double(match->k));
        rec.metrics.emplace_back("matched_p", match->measured_p);
    }
    for (const auto& r : rows) {
        rec.metrics.emplace_back("empirical_x" + std::to_string(r.x), r.empirical);
        rec.metrics.emplace_back("bound_x" + std::to_string(r.x), r.analytic_bound);
    }
    rec.duration_ms = watch.ms();
    records.push_back(std::move(rec));

    if (!spec.output_path.empty()) {
        auto out = open_out(spec.output_path);
        write_capture_csv(out, rows);
    }
    return records;
}

std::vector<RunRecord> run_eg_compare(const ExperimentSpec& spec) {
    const Stopwatch watch;
    std::vector<double> targets = spec.target_p;
    if (targets.empty()) {
        targets = {0.33, 0.50};
    }
    std::vector<std::uint32_t> xs = spec.x_values;
    if (xs.empty()) {
        xs = {10, 50, 100, 200, 500};
    }
    const auto rows = eg_compare_rows(spec.config, targets, xs, spec.trials);

    RunRecord rec = base_record(spec, spec.config.rng_seed);
    for (const auto& r : rows) {
        rec.metrics.emplace_back(
            "scheme_bound_p" + fmt(r.target_p) + "_x" + std::to_string(r.x), r.scheme_bound);
        rec.metrics.emplace_back(
            "eg_bound_p" + fmt(r.target_p) + "_x" + std::to_string(r.x), r.eg_bound);
    }
    rec.duration_ms = watch.ms();

    if (!spec.output_path.empty()) {
        auto out = open_out(spec.output_path);
        write_eg_compare_csv(out, rows);
    }
    return {rec};
}

std::vector<RunRecord> run_rescue_eval(const ExperimentSpec& spec) {
    static const std::vector<std::string> kNames = {
        "global_pre_rescue", "global_post_rescue", "rescued_nodes", "uncovered_nodes"};
    std::vector<std::vector<double>> values(kNames.size());
    std::vector<RunRecord> records;

    for (std::uint32_t trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t seed = spec.config.rng_seed + trial;
        const Stopwatch watch;
        Network net = run_protocol(spec.config, seed);
        const double global_pre = global_connectivity(build_key_graph(net));
        const CoverageStats cov = coverage_stats(net.deployment, net.flood, net.config);
        const auto rescued = rescue_uncovered(net);
        const double global_post = global_connectivity(build_key_graph(net));

        const double row[] = {global_pre, global_post, double(rescued.size()),
                              double(cov.uncovered_count)};
        RunRecord rec = base_record(spec, seed);
        for (std::size_t i = 0; i < kNames.size(); ++i) {
            values[i].push_back(row[i]);
            rec.metrics.emplace_back(kNames[i], row[i]);
        }
        rec.duration_ms = watch.ms();
        records.push_back(std::move(rec));
    }

    if (!spec.output_path.empty()) {
        auto out = open_out(spec.output_path);
        write_metrics_csv(out, spec.config, kNames, values);
    }
    return records;
}

std::vector<RunRecord> run_broadcast_count(const ExperimentSpec& spec) {
    static const std::vector<std::string> kNames = {
        "scheme_broadcasts", "leap_proxy_broadcasts", "broadcast_fraction"};
    std::vector<std::vector<double>> values(kNames.size());
    std::vector<RunRecord> records;

    SimConfig cfg = spec.config;
    cfg.tagged = resolve_tagged(cfg);
    for (std::uint32_t trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t seed = cfg.rng_seed + trial;
        const Stopwatch watch;
        const Deployment dep = Deployment::random(cfg, seed);
        const auto [scheme, leap] = count_setup_broadcasts(dep, cfg.hops);

        const double row[] = {double(scheme), double(leap), double(scheme) / double(leap)};
        RunRecord rec = base_record(spec, seed);
        for (std::size_t i = 0; i < kNames.size(); ++i) {
            values[i].push_back(row[i]);
            rec.metrics.emplace_back(kNames[i], row[i]);
        }
        rec.duration_ms = watch.ms();
        records.push_back(std::move(rec));
    }

    if (!spec.output_path.empty()) {
        auto out = open_out(spec.output_path);
        write_metrics_csv(out, cfg, kNames, values);
    }
    return records;
}

} // namespace

std::vector<RunRecord> run(const ExperimentSpec& spec) {
    spec.validate();
    switch (spec.scenario) {
        case Scenario::plan: return run_plan(spec);
        case Scenario::simulate: return run_simulate(spec);
        case Scenario::table1: return run_table1(spec);
        case Scenario::capture_sweep: return run_capture_sweep(spec);
        case Scenario::eg_compare: return run_eg_compare(spec);
        case Scenario::rescue_eval: return run_rescue_eval(spec);
        case Scenario::broadcast_count: return run_broadcast_count(spec);
    }
    throw ConfigError("unhandled scenario");
}

} // namespace keymesh

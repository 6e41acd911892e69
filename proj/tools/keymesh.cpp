// keymesh - post-deployment key distribution simulator.
//
// Subcommands mirror the experiment scenarios:
//   plan, simulate, table1, capture-sweep, eg-compare, rescue-eval,
//   broadcast-count
// Every run is fully determined by (--config, --seed); outputs are CSV.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "keymesh/errors.hpp"
#include "keymesh/harness.hpp"

namespace {

void print_records(const std::vector<keymesh::RunRecord>& records) {
    for (const auto& rec : records) {
        std::printf("[%s] config=%s seed=%llu (%.1f ms)\n", rec.scenario.c_str(),
                    rec.config_hash.c_str(), static_cast<unsigned long long>(rec.rng_seed),
                    rec.duration_ms);
        for (const auto& [name, value] : rec.metrics) {
            std::printf("  %-28s %.10g\n", name.c_str(), value);
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"keymesh: location-free key predistribution simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    unsigned trials = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::vector<unsigned> x_values;
    std::vector<double> target_p;
    std::string dump_deployment, dump_rings, dump_transcripts;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
        cmd->add_option("--trials", trials, "number of seeded trials");
        cmd->add_option("--seed", seed, "override the config rng_seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--out", out_path, "CSV output path");
    };

    auto* plan = app.add_subcommand("plan", "tagged-node planner (coverage + inter-group)");
    auto* simulate = app.add_subcommand("simulate", "full protocol run with key-graph metrics");
    auto* table1 = app.add_subcommand("table1", "local vs global connectivity sweep");
    auto* capture = app.add_subcommand("capture-sweep", "node-capture resilience sweep");
    auto* egcmp = app.add_subcommand("eg-compare", "closed-form bound vs the EG baseline");
    auto* rescue = app.add_subcommand("rescue-eval", "connectivity before/after uncovered-node rescue");
    auto* bcount = app.add_subcommand("broadcast-count", "setup broadcast transmissions vs per-node flooding");
    for (auto* cmd : {plan, simulate, table1, capture, egcmp, rescue, bcount}) {
        add_common(cmd);
    }

    capture->add_option("--x", x_values, "captured-node counts")->delimiter(',');
    egcmp->add_option("--x", x_values, "captured-node counts")->delimiter(',');
    capture->add_option("--target-p", target_p, "match local connectivity before sweeping")
        ->delimiter(',');
    egcmp->add_option("--target-p", target_p, "local connectivity operating points")
        ->delimiter(',');
    simulate->add_option("--dump-deployment", dump_deployment, "write node_id,x,y,is_tagged CSV");
    simulate->add_option("--dump-rings", dump_rings, "write node_id,tag_id,key_index,key_hex CSV");
    simulate->add_option("--dump-transcripts", dump_transcripts,
                         "write one discovery message per line");

    CLI11_PARSE(app, argc, argv);

    try {
        keymesh::ExperimentSpec spec;
        spec.config = keymesh::load_config(config_path);
        if (seed_set) {
            spec.config.rng_seed = seed;
        }
        spec.trials = trials;
        spec.output_path = out_path;
        spec.x_values.assign(x_values.begin(), x_values.end());
        spec.target_p = target_p;
        spec.dump_deployment = dump_deployment;
        spec.dump_rings = dump_rings;
        spec.dump_transcripts = dump_transcripts;

        if (app.got_subcommand(plan)) spec.scenario = keymesh::Scenario::plan;
        else if (app.got_subcommand(simulate)) spec.scenario = keymesh::Scenario::simulate;
        else if (app.got_subcommand(table1)) spec.scenario = keymesh::Scenario::table1;
        else if (app.got_subcommand(capture)) spec.scenario = keymesh::Scenario::capture_sweep;
        else if (app.got_subcommand(egcmp)) spec.scenario = keymesh::Scenario::eg_compare;
        else if (app.got_subcommand(rescue)) spec.scenario = keymesh::Scenario::rescue_eval;
        else if (app.got_subcommand(bcount)) spec.scenario = keymesh::Scenario::broadcast_count;

        if (spec.scenario == keymesh::Scenario::capture_sweep && spec.x_values.empty()) {
            spec.x_values = {10, 50, 100, 200, 500};
        }

        print_records(keymesh::run(spec));
        return 0;
    } catch (const keymesh::Error& e) {
        std::cerr << "keymesh: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "keymesh: unexpected error: " << e.what() << '\n';
        return 2;
    }
}

#include <benchmark/benchmark.h>

#include "keymesh/analysis.hpp"
#include "keymesh/protocol.hpp"

namespace {

using namespace keymesh;

SimConfig reference_config() {
    SimConfig cfg;
    cfg.side = 1000.0;
    cfg.n_nodes = 10000;
    cfg.radio_r = 40.0;
    cfg.hops = 1;
    cfg.t_key = 2;
    cfg.keys_per_group = 20;
    cfg.pool_m = 1000;
    cfg.tagged = 1863;
    return cfg;
}

void BM_Sha256(benchmark::State& state) {
    std::vector<std::uint8_t> data(std::size_t(state.range(0)), 0xa5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sha256(std::span<const std::uint8_t>(data)));
    }
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(64)->Arg(1024)->Arg(65536);

void BM_KeyIndices(benchmark::State& state) {
    Seed seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(key_indices(seed++, std::uint32_t(state.range(0)), 1000));
    }
}
BENCHMARK(BM_KeyIndices)->Arg(20)->Arg(50);

void BM_HashChain(benchmark::State& state) {
    const Key root = sha256("bench root");
    for (auto _ : state) {
        benchmark::DoNotOptimize(group_key(TagId(state.range(0)), root));
    }
}
BENCHMARK(BM_HashChain)->Arg(50)->Arg(1863);

void BM_Deploy(benchmark::State& state) {
    SimConfig cfg = reference_config();
    cfg.n_nodes = std::uint32_t(state.range(0));
    cfg.tagged = cfg.n_nodes / 6;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(Deployment::random(cfg, seed++));
    }
}
BENCHMARK(BM_Deploy)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Flood(benchmark::State& state) {
    const SimConfig cfg = reference_config();
    const Deployment dep = Deployment::random(cfg, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(flood(dep, std::uint32_t(state.range(0))));
    }
}
BENCHMARK(BM_Flood)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_FullProtocol(benchmark::State& state) {
    SimConfig cfg = reference_config();
    cfg.n_nodes = std::uint32_t(state.range(0));
    cfg.tagged = cfg.n_nodes / 6;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_protocol(cfg, seed++));
    }
}
BENCHMARK(BM_FullProtocol)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_KeyGraph(benchmark::State& state) {
    SimConfig cfg = reference_config();
    cfg.n_nodes = std::uint32_t(state.range(0));
    cfg.tagged = cfg.n_nodes / 6;
    const Network net = run_protocol(cfg, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_key_graph(net));
    }
}
BENCHMARK(BM_KeyGraph)->Arg(2000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

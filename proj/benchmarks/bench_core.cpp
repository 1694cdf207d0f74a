#include <benchmark/benchmark.h>

#include "spn/diagnostics.hpp"
#include "spn/examples.hpp"
#include "spn/lyapunov.hpp"
#include "spn/simulator.hpp"

namespace {

using namespace spn;

// n x n input-queued switch: one buffer per (input, output) pair.
NetworkSpec switch_spec(int n, double load) {
    NetworkSpec spec;
    spec.name = "switch";
    spec.synchronized = true;
    spec.num_processors = 2 * n;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const int i = spec.num_buffers();
            spec.buffer_names.push_back("voq" + std::to_string(a) + "_" + std::to_string(b));
            spec.arrivals.push_back(ArrivalModel::slotted(load / n));
            spec.services.push_back(ServiceDistribution::deterministic(1.0));
            spec.activities.push_back(Activity{i, {a, n + b}, 1.0});
        }
    }
    spec.routing = Matrix::Zero(n * n, n * n);
    return spec;
}

void BM_CheckLocalSwitch(benchmark::State& state) {
    const auto net = validate(switch_spec(static_cast<int>(state.range(0)), 0.4));
    const auto cert = construct_comm(net);
    for (auto _ : state) benchmark::DoNotOptimize(check_local(net, cert.z, 0.01));
}
BENCHMARK(BM_CheckLocalSwitch)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_EnumerateMaximal(benchmark::State& state) {
    const auto net = validate(switch_spec(4, 0.4));
    const auto pattern = SupportPattern::all(net.num_buffers(), true);
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_maximal(net, pattern));
}
BENCHMARK(BM_EnumerateMaximal)->Unit(benchmark::kMillisecond);

void BM_SimulateEvents(benchmark::State& state) {
    const auto cfg = make_example(state.range(0) ? "wireless-fig4" : "rybko-stolyar");
    const auto net = validate(cfg.spec);
    SimOptions o;
    o.horizon = 1e4;
    std::uint64_t events = 0;
    for (auto _ : state) {
        events += simulate(net, *cfg.policy, o).events_processed;
        ++o.seed;
    }
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateEvents)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EvalGlobal(benchmark::State& state) {
    const auto cfg = make_example("rybko-stolyar", true);
    const auto net = validate(cfg.spec);
    const auto psn = construct_psn(net);
    const auto check = check_local(net, psn.z, 0.1);
    const QuadraticCertificate cert{psn.z, 0.1, check.eta, check.c};
    const auto g = global_constants(net, cert);
    SimOptions o;
    o.horizon = static_cast<double>(state.range(0));
    o.predraw_depth = g.d;
    Simulator sim(net, *cfg.policy, o);
    sim.run();
    for (auto _ : state) benchmark::DoNotOptimize(eval_global(sim.state(), g, cert));
    state.counters["jobs"] = sim.state().total_waiting();
}
BENCHMARK(BM_EvalGlobal)->Arg(1000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();

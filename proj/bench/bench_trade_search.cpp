// Compares the OpenMP trade search against the serial reference on large
// random pools and reports throughput for both.

#include <chrono>
#include <cstdio>
#include <vector>

#include "agora/market.hpp"
#include "agora/rng.hpp"

using namespace agora;

namespace {

struct Instance {
    std::vector<AgentProfile> pool;
    MarketState state;
};

Instance make_instance(std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Instance inst;
    for (std::size_t i = 0; i < n; ++i) {
        AgentProfile a;
        a.id = "agent-" + std::to_string(i);
        a.unit_cost = uniform(rng, 0.5, 5.0);
        for (Dim d : kAllDims) {
            a.expertise[d] = uniform(rng, 0.0, 0.95);
            a.capacity[d] = uniform(rng, 0.5, 2.0);
        }
        AgentPortfolio p;
        for (Dim d : kAllDims) p.base[d] = uniform(rng, 0.0, a.capacity[d]);
        inst.state.portfolios[a.id] = p;
        inst.pool.push_back(std::move(a));
    }
    return inst;
}

template <typename F>
double time_ms(F&& f, int reps) {
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f();
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() /
           reps;
}

}  // namespace

int main() {
    const MarketParams params{};
    for (std::size_t n : {16, 64, 128, 256}) {
        Instance inst = make_instance(n, 0xbe7c4 + n);
        std::optional<TradeProposal> parallel, serial;
        const int reps = n >= 128 ? 20 : 100;
        const double par_ms = time_ms(
            [&] {
                parallel =
                    find_most_profitable_trade(inst.state, inst.pool, params);
            },
            reps);
        const double ser_ms = time_ms(
            [&] {
                serial = find_most_profitable_trade_serial(inst.state,
                                                           inst.pool, params);
            },
            reps);
        const bool same =
            parallel.has_value() == serial.has_value() &&
            (!parallel ||
             (parallel->sender == serial->sender &&
              parallel->receiver == serial->receiver &&
              parallel->dimension == serial->dimension &&
              parallel->amount == serial->amount &&
              parallel->cost_delta == serial->cost_delta));
        std::printf(
            "n=%3zu  parallel %8.3f ms  serial %8.3f ms  speedup %5.2fx  "
            "results %s\n",
            n, par_ms, ser_ms, ser_ms / par_ms, same ? "match" : "DIFFER");
        if (!same) return 1;
    }
    return 0;
}

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agora/acceptance.hpp"
#include "agora/harness.hpp"
#include "agora/scenarios.hpp"

namespace {

namespace fs = std::filesystem;
using namespace agora;

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("AGORA_LOG_LEVEL");
        const std::string v = env ? env : "warn";
        if (v == "error") return LogLevel::error;
        if (v == "warn") return LogLevel::warn;
        if (v == "info") return LogLevel::info;
        if (v == "debug") return LogLevel::debug;
        return LogLevel::warn;
    }();
    return level;
}

void log(LogLevel lvl, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (lvl <= log_level())
        std::cerr << "[" << names[static_cast<int>(lvl)] << "] " << msg
                  << '\n';
}

ScenarioConfig load_scenario(const std::string& ref) {
    for (const auto& name : bundled_scenario_names())
        if (ref == name) return bundled_scenario(name);
    std::ifstream in(ref);
    if (!in) throw std::invalid_argument("cannot read scenario file: " + ref);
    std::ostringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

// removes everything written so far when a run aborts midway
struct OutputTracker {
    std::vector<fs::path> written;
    bool keep = false;

    ~OutputTracker() {
        if (keep) return;
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
    std::ofstream open(const fs::path& p) {
        written.push_back(p);
        return std::ofstream(p, std::ios::binary);
    }
};

struct SummaryStat {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    void add(double v) {
        sum += v;
        sq += v * v;
        ++n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double stddev() const {
        if (n < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, sq / static_cast<double>(n) - m * m));
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_reports(OutputTracker& tracker, const fs::path& out_dir,
                   const EpisodeReport& report, const std::string& format) {
    const std::string stem =
        report.scenario + "-seed" + std::to_string(report.seed);
    if (format == "json" || format == "both") {
        auto f = tracker.open(out_dir / (stem + ".json"));
        f << episode_report_to_json(report) << '\n';
    }
    if (format == "csv" || format == "both") {
        auto per_task = tracker.open(out_dir / (stem + "-per-task.csv"));
        write_per_task_csv(per_task, report);
        auto aggregate = tracker.open(out_dir / (stem + "-aggregate.csv"));
        write_aggregate_csv(aggregate, report);
    }
}

int cmd_run(const std::string& scenario_ref, const std::string& out_dir,
            std::vector<std::uint64_t> seeds, const std::string& format) {
    ScenarioConfig config = load_scenario(scenario_ref);
    std::vector<std::string> diags;
    if (!config.valid(&diags)) {
        for (const auto& d : diags) std::cerr << "invalid scenario: " << d
                                              << '\n';
        return 2;
    }
    if (seeds.empty()) seeds.push_back(config.seed);
    fs::create_directories(out_dir);

    OutputTracker tracker;
    std::map<std::string, SummaryStat> stats;
    std::vector<EpisodeReport> reports;
    try {
        for (std::uint64_t seed : seeds) {
            ScenarioConfig run_config = config;
            run_config.seed = seed;
            log(LogLevel::info, "running " + config.name + " seed " +
                                    std::to_string(seed));
            EpisodeReport report = run_episode(run_config);
            write_reports(tracker, out_dir, report, format);
            const AggregateMetrics& m = report.aggregate;
            stats["accuracy"].add(m.accuracy);
            stats["u_final_epis"].add(m.u_final_epis);
            stats["coi"].add(m.coi);
            stats["uaps"].add(m.uaps);
            stats["total_cost"].add(m.total_cost);
            stats["total_tflops"].add(m.total_tflops);
            stats["total_trades"].add(static_cast<double>(m.total_trades));
            reports.push_back(std::move(report));
        }
        {
            auto f = tracker.open(fs::path(out_dir) /
                                  (config.name + "-summary.csv"));
            f << "metric,mean,stddev,seeds\n";
            for (const auto& [metric, stat] : stats)
                f << metric << ',' << fmt(stat.mean()) << ','
                  << fmt(stat.stddev()) << ',' << stat.n << '\n';
        }
        {
            auto f = tracker.open(fs::path(out_dir) /
                                  (config.name + "-plot.csv"));
            write_plot_data(f, reports);
        }
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << '\n';
        return 1;  // tracker removes partial outputs
    }
    tracker.keep = true;
    return 0;
}

int cmd_validate(const std::string& scenario_ref) {
    ScenarioConfig config;
    try {
        config = load_scenario(scenario_ref);
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    std::vector<std::string> diags;
    if (config.valid(&diags)) {
        std::cout << "ok\n";
        return 0;
    }
    for (const auto& d : diags) std::cout << d << '\n';
    return 2;
}

std::vector<AgentProfile> resize_pool(const std::vector<AgentProfile>& pool,
                                      std::size_t n) {
    std::vector<AgentProfile> out;
    for (std::size_t i = 0; i < n; ++i) {
        AgentProfile a = pool[i % pool.size()];
        if (i >= pool.size()) a.id += "-" + std::to_string(i / pool.size());
        out.push_back(std::move(a));
    }
    return out;
}

int cmd_sweep(const std::string& scenario_ref, const std::string& out_dir,
              std::vector<std::uint64_t> seeds,
              const std::vector<std::size_t>& pool_sizes,
              const std::vector<double>& tau_trades,
              const std::vector<double>& tau_benefits,
              const std::vector<double>& gammas,
              const std::vector<double>& lambdas,
              const std::vector<double>& etas,
              const std::vector<double>& omegas) {
    ScenarioConfig base = load_scenario(scenario_ref);
    std::vector<std::string> diags;
    if (!base.valid(&diags)) {
        for (const auto& d : diags) std::cerr << "invalid scenario: " << d
                                              << '\n';
        return 2;
    }
    if (seeds.empty()) seeds.push_back(base.seed);
    auto or_default = [](std::vector<double> v, double d) {
        if (v.empty()) v.push_back(d);
        return v;
    };
    std::vector<std::size_t> ns = pool_sizes;
    if (ns.empty()) ns.push_back(base.pool.size());
    const auto taus = or_default(tau_trades, base.market.trade_trigger);
    const auto benefits =
        or_default(tau_benefits, base.market.benefit_threshold);
    const auto gs = or_default(gammas, base.broker.gamma_decay);
    const auto ls = or_default(lambdas, base.broker.lambda_dist);
    const auto es = or_default(etas, base.broker.eta_synergy);
    const auto os_ = or_default(omegas, base.broker.omega_strategic);

    fs::create_directories(out_dir);
    OutputTracker tracker;
    try {
        auto f = tracker.open(fs::path(out_dir) / (base.name + "-sweep.csv"));
        f << "pool_size,tau_trade,tau_benefit,gamma,lambda,eta,omega,seed,"
             "accuracy,u_final_epis,coi,uaps,total_cost,total_tflops,"
             "total_trades\n";
        for (std::size_t n : ns)
            for (double tau : taus)
                for (double benefit : benefits)
                    for (double g : gs)
                        for (double l : ls)
                            for (double e : es)
                                for (double o : os_)
                                    for (std::uint64_t seed : seeds) {
                                        ScenarioConfig c = base;
                                        c.pool = resize_pool(base.pool, n);
                                        c.market.trade_trigger = tau;
                                        c.market.benefit_threshold = benefit;
                                        c.broker.gamma_decay = g;
                                        c.broker.lambda_dist = l;
                                        c.broker.eta_synergy = e;
                                        c.broker.omega_strategic = o;
                                        c.seed = seed;
                                        const AggregateMetrics m =
                                            run_episode(c).aggregate;
                                        f << n << ',' << fmt(tau) << ','
                                          << fmt(benefit) << ',' << fmt(g)
                                          << ',' << fmt(l) << ',' << fmt(e)
                                          << ',' << fmt(o) << ',' << seed
                                          << ',' << fmt(m.accuracy) << ','
                                          << fmt(m.u_final_epis) << ','
                                          << fmt(m.coi) << ',' << fmt(m.uaps)
                                          << ',' << fmt(m.total_cost) << ','
                                          << fmt(m.total_tflops) << ','
                                          << m.total_trades << '\n';
                                    }
    } catch (const std::exception& e) {
        std::cerr << "sweep failed: " << e.what() << '\n';
        return 1;
    }
    tracker.keep = true;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    // internal mode used by the determinism acceptance check
    if (argc == 3 && std::string(argv[1]) == "--emit-report")
        return emit_report_for(argv[2], std::cout);
    if (argc == 3 && std::string(argv[1]) == "--write-bundled") {
        write_bundled_scenarios(argv[2]);
        return 0;
    }

    CLI::App app{"uncertainty-market simulator"};
    app.require_subcommand(1);

    std::string scenario_ref, out_dir = "out", format = "both";
    std::vector<std::uint64_t> seeds;

    auto add_common = [&](CLI::App* cmd, bool needs_out) {
        cmd->add_option("--scenario", scenario_ref,
                        "scenario file path or bundled name")
            ->required();
        if (needs_out) cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seeds", seeds, "seed list")->delimiter(',');
    };

    CLI::App* run = app.add_subcommand("run", "run a scenario");
    add_common(run, true);
    run->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"json", "csv", "both"}));

    CLI::App* validate =
        app.add_subcommand("validate", "check a scenario without running it");
    validate->add_option("--scenario", scenario_ref, "scenario file path")
        ->required();

    std::vector<std::size_t> pool_sizes;
    std::vector<double> tau_trades, tau_benefits, gammas, lambdas, etas,
        omegas;
    CLI::App* sweep = app.add_subcommand("sweep", "parameter grid sweep");
    add_common(sweep, true);
    sweep->add_option("--pool-size", pool_sizes, "agent pool sizes")
        ->delimiter(',');
    sweep->add_option("--tau-trade", tau_trades, "trade trigger values")
        ->delimiter(',');
    sweep->add_option("--tau-benefit", tau_benefits, "benefit thresholds")
        ->delimiter(',');
    sweep->add_option("--gamma", gammas, "time decay bases")->delimiter(',');
    sweep->add_option("--lambda", lambdas, "task match weights")
        ->delimiter(',');
    sweep->add_option("--eta", etas, "synergy exponents")->delimiter(',');
    sweep->add_option("--omega", omegas, "strategic exponents")
        ->delimiter(',');

    CLI::App* acceptance =
        app.add_subcommand("acceptance", "run the acceptance suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_ref, out_dir, seeds, format);
        if (validate->parsed()) return cmd_validate(scenario_ref);
        if (sweep->parsed())
            return cmd_sweep(scenario_ref, out_dir, seeds, pool_sizes,
                             tau_trades, tau_benefits, gammas, lambdas, etas,
                             omegas);
        if (acceptance->parsed()) {
            const auto results = agora::run_acceptance_suite(argv[0]);
            return print_acceptance(std::cout, results) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

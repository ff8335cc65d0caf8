#include "agora/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "agora/rng.hpp"
#include "agora/uncertainty.hpp"

namespace agora {

namespace {

using nlohmann::json;

constexpr double kActive = 1e-12;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ordering used for cascades when none is configured: cheapest compute first
std::vector<const AgentProfile*> ascending_compute_order(
    const std::vector<AgentProfile>& pool) {
    std::vector<const AgentProfile*> order;
    order.reserve(pool.size());
    for (const auto& a : pool) order.push_back(&a);
    std::sort(order.begin(), order.end(),
              [](const AgentProfile* a, const AgentProfile* b) {
                  if (a->tflops_per_token != b->tflops_per_token)
                      return a->tflops_per_token < b->tflops_per_token;
                  return a->id < b->id;
              });
    return order;
}

// residual left after one agent absorbs the task's epistemic load
UncertaintyVector expertise_residual(const AgentProfile& agent,
                                     const UncertaintyVector& epis) {
    UncertaintyVector r;
    for (Dim d : kAllDims) r[d] = epis[d] * (1.0 - agent.expertise[d]);
    return r;
}

double measured_residual(const AgentResponse& resp,
                         const DimensionWeights& w) {
    UncertaintyVector u;
    u.perc = perceptual_uncertainty(resp.class_probs);
    u.sem = semantic_uncertainty(resp.semantic_ambiguities, 1.0, 0.2);
    u.inf = inferential_uncertainty(resp.outcome_probs, 0.5);
    return total_uncertainty(u, w);
}

}  // namespace

bool ScenarioConfig::valid(std::vector<std::string>* diagnostics) const {
    bool ok = true;
    auto fail = [&](const std::string& msg) {
        ok = false;
        if (diagnostics) diagnostics->push_back(msg);
    };
    if (pool.empty()) fail("pool: at least one agent required");
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const AgentProfile& a = pool[i];
        const std::string at = "pool[" + std::to_string(i) + "]";
        if (a.id.empty()) fail(at + ".id: must be nonempty");
        if (!(a.unit_cost > 0.0)) fail(at + ".unit_cost: must be > 0");
        if (a.fixed_cost < 0.0) fail(at + ".fixed_cost: must be >= 0");
        if (!(a.tflops_per_token > 0.0))
            fail(at + ".tflops_per_token: must be > 0");
        if (a.transfer_efficiency < 0.0 || a.transfer_efficiency > 1.0)
            fail(at + ".transfer_efficiency: must be in [0,1]");
        for (Dim d : kAllDims) {
            if (a.expertise[d] < 0.0 || a.expertise[d] > 1.0)
                fail(at + ".expertise: components must be in [0,1]");
            if (!(a.capacity[d] > 0.0))
                fail(at + ".capacity: components must be > 0");
        }
        for (std::size_t j = i + 1; j < pool.size(); ++j)
            if (pool[j].id == a.id) fail(at + ".id: duplicate '" + a.id + "'");
    }
    if (tokens_per_task <= 0) fail("tokens_per_task: must be > 0");
    if (!weights.valid())
        fail("weights: components in [0,1] and summing to 1 required");
    if (market.trade_trigger < 0.0) fail("market.trade_trigger: must be >= 0");
    if (market.benefit_threshold < 0.0)
        fail("market.benefit_threshold: must be >= 0");
    if (!(market.min_improvement > 0.0))
        fail("market.min_improvement: must be > 0");
    if (broker.lambda_dist < 0.0) fail("broker.lambda_dist: must be >= 0");
    if (!(broker.gamma_decay > 0.0) || broker.gamma_decay > 1.0)
        fail("broker.gamma_decay: must be in (0,1]");
    if (broker.eta_synergy < 0.0) fail("broker.eta_synergy: must be >= 0");
    if (broker.omega_strategic < 0.0)
        fail("broker.omega_strategic: must be >= 0");
    if (epsilon_resolve < 0.0) fail("epsilon_resolve: must be >= 0");
    if (cost_per_tflop < 0.0) fail("cost_per_tflop: must be >= 0");
    auto bad_range = [&](double lo, double hi, const char* name) {
        if (lo < 0.0 || hi < lo || hi > 1.0)
            fail(std::string("task_mix.") + name +
                 ": range must satisfy 0 <= lo <= hi <= 1");
    };
    bad_range(task_mix.perc_lo, task_mix.perc_hi, "perc");
    bad_range(task_mix.sem_lo, task_mix.sem_hi, "sem");
    bad_range(task_mix.inf_lo, task_mix.inf_hi, "inf");
    if (task_mix.knowledge_gap_cue < 0.0 || task_mix.knowledge_gap_cue > 1.0)
        fail("task_mix.knowledge_gap_cue: must be in [0,1]");
    if (task_mix.randomness_signal < 0.0 || task_mix.randomness_signal > 1.0)
        fail("task_mix.randomness_signal: must be in [0,1]");
    if (!strategy.valid(pool, diagnostics)) ok = false;
    return ok;
}

std::vector<TaskInstance> generate_tasks(const ScenarioConfig& config) {
    Rng rng = make_rng(mix_seed(config.seed, hash_str("tasks")));
    std::vector<TaskInstance> tasks;
    tasks.reserve(config.n_tasks);
    for (std::size_t i = 0; i < config.n_tasks; ++i) {
        TaskInstance t;
        char name[32];
        std::snprintf(name, sizeof(name), "task-%05zu", i);
        t.id = name;
        UncertaintyVector total;
        total.perc = uniform(rng, config.task_mix.perc_lo,
                             config.task_mix.perc_hi);
        total.sem = uniform(rng, config.task_mix.sem_lo, config.task_mix.sem_hi);
        total.inf = uniform(rng, config.task_mix.inf_lo, config.task_mix.inf_hi);
        t.initial_uncertainty =
            decompose(total, config.task_mix.knowledge_gap_cue,
                      config.task_mix.randomness_signal);
        const UncertaintyVector& e = t.initial_uncertainty.epistemic;
        const double norm = e.l1();
        t.feature_vector = norm > 0.0
                               ? std::vector<double>{e.perc / norm,
                                                     e.sem / norm,
                                                     e.inf / norm}
                               : std::vector<double>{0.0, 0.0, 0.0};
        t.max_reward = 1.0;
        t.ground_truth_label = static_cast<int>(hash_str(t.id) % 4);
        tasks.push_back(std::move(t));
    }
    return tasks;
}

namespace {

struct EpisodeRunner {
    const ScenarioConfig& config;
    Backend& backend;
    BrokerState broker_state;
    MarketState empty_market;  // selection baseline: nothing allocated yet
    Rng select_rng;
    Rng broker_rng;
    std::map<std::string, std::pair<std::size_t, std::size_t>> history_counts;

    explicit EpisodeRunner(const ScenarioConfig& cfg, Backend& be)
        : config(cfg),
          backend(be),
          broker_state(BrokerState::init(cfg.pool)),
          select_rng(make_rng(mix_seed(cfg.seed, hash_str("select")))),
          broker_rng(make_rng(mix_seed(cfg.seed, hash_str("broker")))) {}

    AgentHistory history() const {
        AgentHistory h;
        for (const auto& [id, counts] : history_counts)
            if (counts.second > 0)
                h.success_rate[id] = static_cast<double>(counts.first) /
                                     static_cast<double>(counts.second);
        return h;
    }

    // evaluates and charges compute; nullopt flags a failed attempt
    std::optional<AgentResponse> attempt(const AgentProfile& agent,
                                         const TaskInstance& task,
                                         PerTaskRow& row) {
        try {
            AgentResponse resp = backend.evaluate(agent, task);
            row.tflops += resp.tokens_generated * agent.tflops_per_token;
            if (std::find(row.selected_agents.begin(),
                          row.selected_agents.end(),
                          agent.id) == row.selected_agents.end())
                row.selected_agents.push_back(agent.id);
            return resp;
        } catch (const BackendTransportError&) {
        } catch (const BackendProtocolError&) {
        }
        if (std::find(row.selected_agents.begin(), row.selected_agents.end(),
                      agent.id) == row.selected_agents.end())
            row.selected_agents.push_back(agent.id);
        return std::nullopt;
    }

    bool draw_correct(const UncertaintyVector& residual, Rng& outcome_rng) {
        const double norm = total_uncertainty(residual, config.weights);
        const double p = 1.0 - std::min(1.0, norm);
        return uniform01(outcome_rng) < p;
    }

    PerTaskRow run_task(const TaskInstance& task, std::size_t index) {
        PerTaskRow row;
        row.task_id = task.id;
        Rng outcome_rng = make_rng(
            mix_seed(mix_seed(config.seed, hash_str("outcome")),
                     hash_str(task.id)));
        const UncertaintyVector& epis = task.initial_uncertainty.epistemic;

        switch (config.strategy.kind) {
            case StrategyKind::agora:
                return run_agora_task(task, index, outcome_rng, row);
            case StrategyKind::single_agent: {
                const AgentProfile* a =
                    find_agent(config.pool, config.strategy.agent_id);
                finish_single(*a, task, outcome_rng, row);
                return row;
            }
            case StrategyKind::random_assignment: {
                const std::size_t pick = static_cast<std::size_t>(
                    uniform01(select_rng) *
                    static_cast<double>(config.pool.size()));
                const AgentProfile& a =
                    config.pool[std::min(pick, config.pool.size() - 1)];
                finish_single(a, task, outcome_rng, row);
                return row;
            }
            case StrategyKind::heuristic_router: {
                const AgentHistory h = history();
                const AgentProfile* best = nullptr;
                double best_score = 0.0;
                for (const auto& a : config.pool) {
                    const double s =
                        heuristic_score(a, task, h, config.strategy.alpha,
                                        config.strategy.beta_sim);
                    if (!best || s > best_score ||
                        (s == best_score && a.id < best->id)) {
                        best = &a;
                        best_score = s;
                    }
                }
                finish_single(*best, task, outcome_rng, row);
                auto& counts = history_counts[best->id];
                counts.first += row.correct ? 1 : 0;
                counts.second += 1;
                return row;
            }
            case StrategyKind::top2: {
                const AgentProfile* a = find_agent(
                    config.pool, config.strategy.top2_ids[index % 2]);
                finish_single(*a, task, outcome_rng, row);
                return row;
            }
            case StrategyKind::tiered_cascade: {
                const auto order = cascade_agents();
                const AgentProfile* final_agent = order.front();
                bool correct = false;
                for (const AgentProfile* a : order) {
                    final_agent = a;
                    auto resp = attempt(*a, task, row);
                    if (!resp) continue;  // failed attempt: escalate
                    correct = draw_correct(expertise_residual(*a, epis),
                                           outcome_rng);
                    if (correct) break;
                }
                finish_with(*final_agent, task, correct, row);
                return row;
            }
            case StrategyKind::uncertainty_aware:
                return run_uncertainty_aware(task, index, outcome_rng, row);
        }
        return row;
    }

    std::vector<const AgentProfile*> cascade_agents() const {
        if (!config.strategy.cascade_order.empty()) {
            std::vector<const AgentProfile*> order;
            for (const auto& id : config.strategy.cascade_order)
                order.push_back(find_agent(config.pool, id));
            return order;
        }
        return ascending_compute_order(config.pool);
    }

    void finish_single(const AgentProfile& agent, const TaskInstance& task,
                       Rng& outcome_rng, PerTaskRow& row) {
        auto resp = attempt(agent, task, row);
        const bool correct =
            resp.has_value() &&
            draw_correct(expertise_residual(
                             agent, task.initial_uncertainty.epistemic),
                         outcome_rng);
        finish_with(agent, task, correct, row);
    }

    // terminal accounting when one agent ends up holding the task
    void finish_with(const AgentProfile& agent, const TaskInstance& task,
                     bool correct, PerTaskRow& row) {
        const UncertaintyVector residual =
            expertise_residual(agent, task.initial_uncertainty.epistemic);
        row.final_epistemic_norm = total_uncertainty(residual, config.weights);
        row.correct = correct;
        row.cost =
            processing_cost(agent, task.initial_uncertainty.epistemic,
                            config.weights) +
            row.tflops * config.cost_per_tflop;
        row.constraint_violated =
            row.final_epistemic_norm > config.epsilon_resolve;
    }

    PerTaskRow run_uncertainty_aware(const TaskInstance& task,
                                     std::size_t index, Rng& outcome_rng,
                                     PerTaskRow& row) {
        const auto order = cascade_agents();
        const AgentProfile* final_agent = order.front();
        if (!config.strategy.calibrated_counts.empty()) {
            // calibration mode: tier membership is fixed by position; an
            // escalated task jumps straight to its completing tier
            std::size_t tier = 0, cum = 0;
            for (std::size_t k = 0;
                 k < config.strategy.calibrated_counts.size() &&
                 k < order.size();
                 ++k) {
                cum += config.strategy.calibrated_counts[k];
                if (index < cum) {
                    tier = k;
                    break;
                }
                tier = k;
            }
            attempt(*order.front(), task, row);
            if (tier > 0) attempt(*order[tier], task, row);
            final_agent = order[tier];
        } else {
            for (std::size_t k = 0; k < order.size(); ++k) {
                final_agent = order[k];
                auto resp = attempt(*order[k], task, row);
                if (!resp) continue;
                if (measured_residual(*resp, config.weights) <=
                    config.strategy.escalation_threshold)
                    break;
            }
        }
        const bool correct = draw_correct(
            expertise_residual(*final_agent,
                               task.initial_uncertainty.epistemic),
            outcome_rng);
        finish_with(*final_agent, task, correct, row);
        return row;
    }

    PerTaskRow run_agora_task(const TaskInstance& task, std::size_t index,
                              Rng& outcome_rng, PerTaskRow& row) {
        BrokerContext ctx;
        ctx.pool = &config.pool;
        ctx.market_state = &empty_market;
        ctx.market_params = config.market;
        ctx.weights = config.weights;
        const std::string handler_id =
            select_initial_agent(task, config.pool, broker_state, ctx,
                                 config.broker, index, broker_rng);
        const AgentProfile* handler = find_agent(config.pool, handler_id);
        attempt(*handler, task, row);

        MarketState ms;
        ms.portfolios[handler_id].base = task.initial_uncertainty.epistemic;
        const MarketPhaseResult phase =
            run_market_phase(ms, config.pool, config.market, config.max_trades);
        row.trades = phase.trade_count;

        UncertaintyVector residual;
        for (const auto& a : config.pool) {
            auto it = ms.portfolios.find(a.id);
            if (it == ms.portfolios.end()) continue;
            const UncertaintyVector held = it->second.total();
            if (held.l1() <= kActive) continue;
            if (a.id != handler_id &&
                std::find(row.selected_agents.begin(),
                          row.selected_agents.end(),
                          a.id) == row.selected_agents.end())
                row.selected_agents.push_back(a.id);
            residual += expertise_residual(a, held);
        }
        row.final_epistemic_norm =
            total_uncertainty(residual, config.weights);
        row.correct = draw_correct(residual, outcome_rng);
        row.cost = system_cost(ms, config.pool, config.weights) +
                   row.tflops * config.cost_per_tflop;
        row.constraint_violated =
            row.final_epistemic_norm > config.epsilon_resolve;
        record_reward(broker_state, handler_id, row.correct ? 1 : 0,
                      index + 1);
        return row;
    }
};

}  // namespace

AggregateMetrics compute_metrics(const std::vector<PerTaskRow>& rows,
                                 const ScenarioConfig& config,
                                 double reference_total_cost) {
    if (rows.empty())
        throw std::invalid_argument("compute_metrics: no per-task rows");
    AggregateMetrics m;
    const double n = static_cast<double>(rows.size());
    double correct = 0.0, norm_sum = 0.0, activations = 0.0;
    for (const auto& r : rows) {
        correct += r.correct ? 1.0 : 0.0;
        norm_sum += r.final_epistemic_norm;
        activations += static_cast<double>(r.selected_agents.size());
        m.total_trades += r.trades;
        m.total_tflops += r.tflops;
        m.total_cost += r.cost;
        m.constraint_violations += r.constraint_violated ? 1 : 0;
    }
    m.accuracy = correct / n;
    m.u_final_epis = norm_sum / n;
    m.coi = activations / n;
    m.uaps = m.accuracy * (1.0 - m.u_final_epis);
    m.relative_cost = reference_total_cost > 0.0
                          ? m.total_cost / reference_total_cost
                          : 1.0;
    const double pflops = m.total_tflops / 1000.0;
    m.cost_performance_ratio =
        m.accuracy > 0.0 ? pflops / (m.accuracy * 100.0)
                         : std::numeric_limits<double>::infinity();
    (void)config;
    return m;
}

EpisodeReport run_episode(const ScenarioConfig& config, Backend& backend,
                          bool compute_relative_cost) {
    std::vector<std::string> diags;
    if (!config.valid(&diags))
        throw std::invalid_argument("invalid scenario: " +
                                    (diags.empty() ? "unknown" : diags[0]));
    EpisodeReport report;
    report.scenario = config.name;
    report.strategy = strategy_kind_name(config.strategy.kind);
    report.seed = config.seed;

    const std::vector<TaskInstance> tasks = generate_tasks(config);
    EpisodeRunner runner(config, backend);
    for (std::size_t i = 0; i < tasks.size(); ++i)
        report.per_task.push_back(runner.run_task(tasks[i], i));

    if (!report.per_task.empty()) {
        double reference_cost = 0.0;
        if (compute_relative_cost &&
            config.strategy.kind != StrategyKind::agora) {
            // normalize against the cost-driven strategy on the same pool
            ScenarioConfig ref = config;
            ref.strategy = StrategyConfig{};
            ref.strategy.kind = StrategyKind::agora;
            ref.market = MarketParams{};
            ref.broker = BrokerParams{};
            const EpisodeReport ref_report =
                run_episode(ref, backend, false);
            reference_cost = ref_report.aggregate.total_cost;
        }
        report.aggregate =
            compute_metrics(report.per_task, config, reference_cost);
    }
    return report;
}

EpisodeReport run_episode(const ScenarioConfig& config) {
    SyntheticBackend backend(mix_seed(config.seed, hash_str("backend")),
                             config.tokens_per_task);
    return run_episode(config, backend);
}

std::string episode_report_to_json(const EpisodeReport& report) {
    json doc;
    doc["schema_version"] = report.schema_version;
    doc["scenario"] = report.scenario;
    doc["strategy"] = report.strategy;
    doc["seed"] = report.seed;
    json rows = json::array();
    for (const auto& r : report.per_task) {
        rows.push_back({{"task_id", r.task_id},
                        {"selected_agents", r.selected_agents},
                        {"trades", r.trades},
                        {"final_epistemic_norm", r.final_epistemic_norm},
                        {"correct", r.correct},
                        {"cost", r.cost},
                        {"tflops", r.tflops},
                        {"constraint_violated", r.constraint_violated}});
    }
    doc["per_task"] = rows;
    const AggregateMetrics& m = report.aggregate;
    doc["aggregate"] = {
        {"accuracy", m.accuracy},
        {"u_final_epis", m.u_final_epis},
        {"coi", m.coi},
        {"uaps", m.uaps},
        {"relative_cost", m.relative_cost},
        {"cost_performance_ratio",
         std::isinf(m.cost_performance_ratio) ? json("unattainable")
                                              : json(m.cost_performance_ratio)},
        {"total_trades", m.total_trades},
        {"total_tflops", m.total_tflops},
        {"total_cost", m.total_cost},
        {"constraint_violations", m.constraint_violations},
    };
    return doc.dump(2);
}

EpisodeReport episode_report_from_json(const std::string& json_text) {
    const json doc = json::parse(json_text);
    EpisodeReport report;
    report.schema_version = doc.at("schema_version").get<int>();
    report.scenario = doc.at("scenario").get<std::string>();
    report.strategy = doc.at("strategy").get<std::string>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& r : doc.at("per_task")) {
        PerTaskRow row;
        row.task_id = r.at("task_id").get<std::string>();
        row.selected_agents =
            r.at("selected_agents").get<std::vector<std::string>>();
        row.trades = r.at("trades").get<std::size_t>();
        row.final_epistemic_norm = r.at("final_epistemic_norm").get<double>();
        row.correct = r.at("correct").get<bool>();
        row.cost = r.at("cost").get<double>();
        row.tflops = r.at("tflops").get<double>();
        row.constraint_violated = r.at("constraint_violated").get<bool>();
        report.per_task.push_back(std::move(row));
    }
    const json& m = doc.at("aggregate");
    AggregateMetrics& agg = report.aggregate;
    agg.accuracy = m.at("accuracy").get<double>();
    agg.u_final_epis = m.at("u_final_epis").get<double>();
    agg.coi = m.at("coi").get<double>();
    agg.uaps = m.at("uaps").get<double>();
    agg.relative_cost = m.at("relative_cost").get<double>();
    agg.cost_performance_ratio =
        m.at("cost_performance_ratio").is_string()
            ? std::numeric_limits<double>::infinity()
            : m.at("cost_performance_ratio").get<double>();
    agg.total_trades = m.at("total_trades").get<std::size_t>();
    agg.total_tflops = m.at("total_tflops").get<double>();
    agg.total_cost = m.at("total_cost").get<double>();
    agg.constraint_violations =
        m.at("constraint_violations").get<std::size_t>();
    return report;
}

void write_per_task_csv(std::ostream& os, const EpisodeReport& report) {
    os << "task_id,selected_agents,trades,final_epistemic_norm,correct,cost,"
          "tflops,constraint_violated\n";
    for (const auto& r : report.per_task) {
        os << r.task_id << ',';
        for (std::size_t i = 0; i < r.selected_agents.size(); ++i) {
            if (i) os << ';';
            os << r.selected_agents[i];
        }
        os << ',' << r.trades << ',' << format_double(r.final_epistemic_norm)
           << ',' << (r.correct ? 1 : 0) << ',' << format_double(r.cost) << ','
           << format_double(r.tflops) << ',' << (r.constraint_violated ? 1 : 0)
           << '\n';
    }
}

void write_aggregate_csv(std::ostream& os, const EpisodeReport& report) {
    os << "scenario,strategy,seed,accuracy,u_final_epis,coi,uaps,"
          "relative_cost,cost_performance_ratio,total_trades,total_tflops,"
          "total_cost,constraint_violations\n";
    const AggregateMetrics& m = report.aggregate;
    os << report.scenario << ',' << report.strategy << ',' << report.seed
       << ',' << format_double(m.accuracy) << ','
       << format_double(m.u_final_epis) << ',' << format_double(m.coi) << ','
       << format_double(m.uaps) << ',' << format_double(m.relative_cost) << ','
       << (std::isinf(m.cost_performance_ratio)
               ? std::string("unattainable")
               : format_double(m.cost_performance_ratio))
       << ',' << m.total_trades << ',' << format_double(m.total_tflops) << ','
       << format_double(m.total_cost) << ',' << m.constraint_violations
       << '\n';
}

void write_plot_data(std::ostream& os,
                     const std::vector<EpisodeReport>& reports) {
    os << "x,y,series\n";
    for (const auto& r : reports)
        os << format_double(r.aggregate.total_tflops / 1000.0) << ','
           << format_double(r.aggregate.accuracy) << ',' << r.strategy << '\n';
}

}  // namespace agora

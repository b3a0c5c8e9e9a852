#include "rms/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "rms/errors.hpp"
#include "rms/gadgets.hpp"
#include "rms/io.hpp"
#include "rms/simulate.hpp"
#include "rms/solver_bayes.hpp"
#include "rms/solver_known.hpp"

namespace rms::cli {

namespace {

using io::Json;

struct RunConfig {
    std::string input;
    std::string output;
    std::string scheme;
    std::string mode = "known";
    std::optional<double> welfare_beta;
    std::string ordering = "on";
    bool reduce = false;
    double tol = kProbabilityTolerance;
    std::uint64_t seed = 1;
    std::size_t max_labels = kDefaultMaxLabels;
    std::size_t max_regions = kDefaultMaxRegionChecks;
    std::size_t max_partition_m = kDefaultPartitionGuard;
    unsigned threads = 1;
    bool lp_debug = false;
    // cluster
    bool brute_force = false;
    std::string partition;
    // gen
    std::string example;
    std::size_t n = 2;
    std::size_t m = 2;
    std::size_t k = 1;
    std::string graph;
    std::optional<double> k1;
    std::optional<double> k2;
    // simulate
    std::size_t samples = 100000;
};

Json envelope(const std::string& command, Json config) {
    Json doc;
    doc["tool"] = kToolName;
    doc["version"] = kToolVersion;
    doc["command"] = command;
    doc["config"] = std::move(config);
    return doc;
}

void emit(const RunConfig& cfg, const Json& doc, std::ostream& out) {
    if (cfg.output.empty()) out << doc.dump(2) << "\n";
    else io::write_json(cfg.output, doc);
}

io::AnyInstance load_instance(const RunConfig& cfg) {
    if (cfg.input.empty()) throw ValidationError("--input is required");
    return io::instance_from_json(io::read_json(cfg.input), cfg.tol);
}

SignalingScheme load_scheme(const RunConfig& cfg) {
    if (cfg.scheme.empty()) throw ValidationError("--scheme is required");
    return io::scheme_from_json(io::read_json(cfg.scheme));
}

std::size_t goods_of(const io::AnyInstance& inst) {
    return std::visit([](const auto& i) { return i.goods(); }, inst);
}

BayesInstance as_bayes(const io::AnyInstance& inst) {
    if (auto known = std::get_if<KnownInstance>(&inst)) return BayesInstance::from_known(*known);
    return std::get<BayesInstance>(inst);
}

Json scheme_result(const io::AnyInstance& inst, const SignalingScheme& scheme) {
    Json doc;
    doc["scheme"] = io::to_json(scheme);
    doc["report"] = std::visit([&](const auto& i) { return io::to_json(make_report(i, scheme)); }, inst);
    return doc;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto inst = load_instance(cfg);
    if (cfg.ordering != "on" && cfg.ordering != "off") throw ValidationError("--ordering must be on or off");
    lp::SolveOptions lp_opts;
    if (cfg.lp_debug) lp_opts.debug = &err;

    Json config;
    config["input"] = cfg.input;
    config["mode"] = cfg.mode;
    config["ordering"] = cfg.ordering;
    config["reduce"] = cfg.reduce;
    config["tol"] = cfg.tol;
    if (cfg.welfare_beta) config["welfare_beta"] = *cfg.welfare_beta;
    config["max_labels"] = cfg.max_labels;
    config["max_regions"] = cfg.max_regions;
    config["threads"] = cfg.threads;
    Json doc = envelope("solve", config);

    std::optional<SolveResult> result;
    if (cfg.mode == "known") {
        auto known = std::get_if<KnownInstance>(&inst);
        if (!known) throw ValidationError("--mode known needs an instance of type \"known\"");
        KnownSolveOptions opts;
        opts.lp = lp_opts;
        if (cfg.welfare_beta) result = solve_welfare_constrained(*known, *cfg.welfare_beta, opts);
        else result = solve_optimal(*known, opts);
    } else if (cfg.mode == "bayes-k" || cfg.mode == "bayes-m") {
        if (cfg.welfare_beta) throw ValidationError("--welfare-beta applies to --mode known only");
        BayesSolveOptions opts;
        opts.max_labels = cfg.max_labels;
        opts.max_region_checks = cfg.max_regions;
        opts.ordering = cfg.ordering == "on";
        opts.threads = cfg.threads;
        opts.lp = lp_opts;
        auto bayes = as_bayes(inst);
        result = cfg.mode == "bayes-k" ? solve_fixed_k(bayes, opts) : solve_fixed_m(bayes, opts);
    } else {
        throw ValidationError("--mode must be known, bayes-k or bayes-m");
    }

    if (!result) {
        doc["status"] = "infeasible-at-beta";
        emit(cfg, doc, out);
        return kOk;
    }
    SignalingScheme scheme = result->scheme;
    if (cfg.reduce) {
        scheme = std::visit([&](const auto& i) { return reduce_to_m_signals(i, scheme); }, inst);
    }
    doc["status"] = "optimal";
    doc["lp_objective"] = result->lp_objective;
    auto body = scheme_result(inst, scheme);
    doc["scheme"] = body["scheme"];
    doc["report"] = body["report"];
    emit(cfg, doc, out);
    return kOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    auto inst = load_instance(cfg);
    auto scheme = load_scheme(cfg);
    require_valid(scheme, goods_of(inst), cfg.tol);
    Json config;
    config["input"] = cfg.input;
    config["scheme"] = cfg.scheme;
    config["tol"] = cfg.tol;
    Json doc = envelope("evaluate", config);
    auto body = scheme_result(inst, scheme);
    doc["revenue"] = body["report"]["revenue"];
    doc["welfare"] = body["report"]["welfare"];
    doc["report"] = body["report"];
    emit(cfg, doc, out);
    return kOk;
}

int cmd_cluster(const RunConfig& cfg, std::ostream& out) {
    auto inst = load_instance(cfg);
    auto known = std::get_if<KnownInstance>(&inst);
    if (!known) throw ValidationError("cluster needs an instance of type \"known\"");
    Json config;
    config["input"] = cfg.input;
    config["brute_force"] = cfg.brute_force;
    if (!cfg.partition.empty()) config["partition"] = cfg.partition;
    config["max_partition_m"] = cfg.max_partition_m;
    Json doc = envelope("cluster", config);
    if (!cfg.partition.empty()) {
        auto partition = io::partition_from_json(io::read_json(cfg.partition));
        doc["partition"] = io::to_json(partition);
        doc["revenue"] = clustering_revenue(*known, partition);
    }
    if (cfg.brute_force) {
        auto best = clustering_bruteforce(*known, cfg.max_partition_m);
        Json bf = io::to_json(best.partition);
        bf["revenue"] = best.revenue;
        bf["partitions_checked"] = best.partitions_checked;
        doc["optimum"] = std::move(bf);
    }
    if (cfg.partition.empty() && !cfg.brute_force) throw ValidationError("cluster needs --brute-force or --partition");
    doc["clustering_bound"] = clustering_bound(*known);
    emit(cfg, doc, out);
    return kOk;
}

int cmd_reduce(const RunConfig& cfg, std::ostream& out) {
    auto inst = load_instance(cfg);
    auto scheme = load_scheme(cfg);
    require_valid(scheme, goods_of(inst), cfg.tol);
    auto reduced = std::visit([&](const auto& i) { return reduce_to_m_signals(i, scheme); }, inst);
    Json config;
    config["input"] = cfg.input;
    config["scheme"] = cfg.scheme;
    Json doc = envelope("reduce", config);
    doc["revenue_before"] = std::visit([&](const auto& i) { return revenue(i, scheme); }, inst);
    auto body = scheme_result(inst, reduced);
    doc["scheme"] = body["scheme"];
    doc["report"] = body["report"];
    emit(cfg, doc, out);
    return kOk;
}

int cmd_gen(const RunConfig& cfg, std::ostream& out) {
    Json doc;
    if (cfg.example == "identity") {
        doc = io::to_json(gen_identity(cfg.n));
    } else if (cfg.example == "many-signals") {
        doc = io::to_json(gen_many_signals(cfg.n));
    } else if (cfg.example == "gap") {
        doc = io::to_json(gen_gap(cfg.n));
    } else if (cfg.example == "random") {
        if (cfg.k > 1) doc = io::to_json(random_bayes_instance(cfg.seed, cfg.n, cfg.m, cfg.k));
        else doc = io::to_json(random_known_instance(cfg.seed, cfg.n, cfg.m));
    } else if (cfg.example == "maxcut") {
        if (cfg.graph.empty()) throw ValidationError("gen --example maxcut needs --graph");
        auto graph = io::graph_from_json(io::read_json(cfg.graph));
        const double k2 = cfg.k2.value_or(default_k2(graph));
        const double k1 = cfg.k1.value_or(cfg.k2 ? 100.0 * static_cast<double>(graph.vertices.size()) * k2
                                                 : default_k1(graph));
        auto gadget = gen_maxcut(graph, k1, k2);
        auto best = maxcut_bruteforce(graph);
        doc = io::to_json(gadget.instance);
        Json meta;
        meta["graph"] = io::to_json(graph);
        meta["k1"] = k1;
        meta["k2"] = k2;
        meta["outcomes"] = gadget.outcome_tags;
        meta["max_cut"] = best.value;
        Json witness = Json::array();
        for (auto v : best.witness) witness.push_back(graph.vertices[v]);
        meta["max_cut_witness"] = std::move(witness);
        meta["optimal_revenue"] = gadget.base_revenue() + static_cast<double>(best.value);
        doc["metadata"] = std::move(meta);
    } else {
        throw ValidationError("--example must be identity, many-signals, gap, maxcut or random");
    }
    emit(cfg, doc, out);
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    auto inst = load_instance(cfg);
    auto scheme = load_scheme(cfg);
    require_valid(scheme, goods_of(inst), cfg.tol);
    auto report = std::visit(
        [&](const auto& i) { return simulate_revenue(i, scheme, cfg.samples, cfg.seed, cfg.threads); }, inst);
    Json config;
    config["instance"] = cfg.input;
    config["scheme"] = cfg.scheme;
    config["samples"] = cfg.samples;
    config["seed"] = cfg.seed;
    Json doc = envelope("simulate", config);
    const Json sim = io::to_json(report);
    for (const auto& [key, value] : sim.items()) doc[key] = value;
    doc["analytic_revenue"] = std::visit([&](const auto& i) { return revenue(i, scheme); }, inst);
    emit(cfg, doc, out);
    return kOk;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    Json config;
    config["input"] = cfg.input;
    if (!cfg.scheme.empty()) config["scheme"] = cfg.scheme;
    config["tol"] = cfg.tol;
    Json doc = envelope("check", config);
    int code = kOk;
    std::optional<io::AnyInstance> inst;
    try {
        inst = load_instance(cfg);
        doc["instance"] = "ok";
    } catch (const ValidationError& e) {
        doc["instance"] = e.what();
        code = kValidation;
    }
    if (!cfg.scheme.empty()) {
        auto scheme = load_scheme(cfg);
        if (inst) {
            auto violations = validate_scheme(scheme, goods_of(*inst), cfg.tol);
            if (violations.empty()) {
                doc["scheme"] = "ok";
            } else {
                Json list = Json::array();
                for (const auto& v : violations) list.push_back(v.message);
                doc["scheme"] = std::move(list);
                code = kValidation;
            }
        }
    }
    emit(cfg, doc, out);
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Revenue-maximizing signaling for probabilistic second-price auctions", kToolName};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_input = [&](CLI::App* sub) { sub->add_option("--input,--instance", cfg.input, "Instance JSON file"); };
    auto add_output = [&](CLI::App* sub) { sub->add_option("--output", cfg.output, "Write the result here"); };
    auto add_tol = [&](CLI::App* sub) { sub->add_option("--tol", cfg.tol, "Probability tolerance")->check(CLI::PositiveNumber); };
    auto add_scheme = [&](CLI::App* sub) { sub->add_option("--scheme", cfg.scheme, "Scheme JSON file"); };

    auto solve = app.add_subcommand("solve", "Compute a revenue-maximizing signaling scheme");
    add_input(solve);
    add_output(solve);
    add_tol(solve);
    solve->add_option("--mode", cfg.mode, "known | bayes-k | bayes-m")
        ->check(CLI::IsMember({"known", "bayes-k", "bayes-m"}));
    solve->add_option("--welfare-beta", cfg.welfare_beta, "Keep at least this fraction of optimal welfare")
        ->check(CLI::Range(0.0, 1.0));
    solve->add_option("--ordering", cfg.ordering, "Ranking constraints in the label LP")->check(CLI::IsMember({"on", "off"}));
    solve->add_flag("--reduce", cfg.reduce, "Reduce the result to at most m signals");
    solve->add_option("--max-labels", cfg.max_labels, "Label-count guard for bayes-k");
    solve->add_option("--max-regions", cfg.max_regions, "Candidate-check guard for bayes-m");
    solve->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);
    solve->add_flag("--lp-debug", cfg.lp_debug, "Trace simplex pivots on stderr");
    solve->add_option("--seed", cfg.seed, "Unused; accepted for uniform command lines");

    auto evaluate = app.add_subcommand("evaluate", "Revenue and welfare of a given scheme");
    add_input(evaluate);
    add_scheme(evaluate);
    add_output(evaluate);
    add_tol(evaluate);

    auto cluster = app.add_subcommand("cluster", "Clustering (deterministic) schemes");
    add_input(cluster);
    add_output(cluster);
    cluster->add_flag("--brute-force", cfg.brute_force, "Enumerate every partition of the goods");
    cluster->add_option("--partition", cfg.partition, "Evaluate this partition JSON");
    cluster->add_option("--max-partition-m", cfg.max_partition_m, "Largest good count for --brute-force");

    auto reduce = app.add_subcommand("reduce", "Shrink a scheme to at most m signals");
    add_input(reduce);
    add_scheme(reduce);
    add_output(reduce);
    add_tol(reduce);

    auto gen = app.add_subcommand("gen", "Generate example instances");
    gen->add_option("--example", cfg.example, "identity | many-signals | gap | maxcut | random")->required();
    gen->add_option("--n", cfg.n, "Size parameter");
    gen->add_option("--m", cfg.m, "Goods (random)");
    gen->add_option("--k", cfg.k, "Outcomes (random)");
    gen->add_option("--graph", cfg.graph, "Graph JSON (maxcut)");
    gen->add_option("--k1", cfg.k1, "Outer gadget weight (maxcut)");
    gen->add_option("--k2", cfg.k2, "Inner gadget weight (maxcut)");
    gen->add_option("--seed", cfg.seed, "Seed (random)");
    add_output(gen);

    auto simulate = app.add_subcommand("simulate", "Monte Carlo revenue estimate");
    add_input(simulate);
    add_scheme(simulate);
    add_output(simulate);
    add_tol(simulate);
    simulate->add_option("--samples", cfg.samples, "Sample count")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", cfg.seed, "Seed");
    simulate->add_option("--threads", cfg.threads, "Worker threads")->check(CLI::PositiveNumber);

    auto check = app.add_subcommand("check", "Validate an instance and optionally a scheme");
    add_input(check);
    add_scheme(check);
    add_output(check);
    add_tol(check);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(cfg, out, err);
        if (evaluate->parsed()) return cmd_evaluate(cfg, out);
        if (cluster->parsed()) return cmd_cluster(cfg, out);
        if (reduce->parsed()) return cmd_reduce(cfg, out);
        if (gen->parsed()) return cmd_gen(cfg, out);
        if (simulate->parsed()) return cmd_simulate(cfg, out);
        if (check->parsed()) return cmd_check(cfg, out);
    } catch (const GuardExceeded& e) {
        err << "error: " << e.what() << "\n";
        return kGuardExceeded;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const NumericFailure& e) {
        err << "error: " << e.what() << "\n";
        return kNumericFailure;
    }
    err << app.help();
    return kUsage;
}

}  // namespace rms::cli

// engram command-line front end.
//
// Exit codes: 0 success, 1 a failed experiment check, 2 usage or input error.

#include "engram/experiments.hpp"
#include "engram/harness.hpp"
#include "engram/policy.hpp"
#include "engram/scenarios.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace engram;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

EngineConfig load_config(const Options& o) {
    EngineConfig c = EngineConfig::resolve(o.config);
    if (o.seed) c.harness.seed = *o.seed;
    return c;
}

/// Writes to --out when given, stdout otherwise.
void emit(const Options& o, const std::string& text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw NotFoundError("cannot write '" + o.out + "'");
    f << text;
}

std::unique_ptr<Engine> open_engine(const Options& o, const std::string& state) {
    if (!state.empty()) return Engine::load(state);
    return std::make_unique<Engine>(load_config(o));
}

Scenario generate(const std::string& name, std::size_t turns, std::uint64_t seed) {
    if (name == "mixed") return mixed_topics(turns, seed);
    if (name == "regular") return regular_domain(turns, seed);
    if (name == "identity") return identity_stream(turns, seed);
    if (name == "facts") return facts_scenario(seed);
    if (name == "priming") return priming_scenario(seed).events;
    if (name == "rigidity") return rigidity_scenario(seed);
    if (name == "salience") return salience_scenario(seed).events;
    if (name == "attack") {
        auto s = attack_scenario(seed);
        s.formation.insert(s.formation.end(), s.attacks.begin(), s.attacks.end());
        return s.formation;
    }
    if (name == "gambling") return gambling_scenario(turns, seed);
    if (name == "ambient") return sub_salience_stream(turns, seed);
    if (name == "formation") return formation_scenario(seed);
    if (name == "stability") return stability_scenario(turns, seed);
    throw ValidationError("unknown scenario generator '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"engram: salience-gated agent memory"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    app.add_option("--config", opt.config, "config file (defaults to $ENGRAM_CONFIG, then built-in defaults)");
    app.add_option("--seed", opt.seed, "override harness.seed");
    app.add_option("--out", opt.out, "output file (stdout when omitted)");

    auto* init = app.add_subcommand("init", "write a config file holding every default");

    std::string scenario_path, state_in, state_out;
    auto* run = app.add_subcommand("run", "run a scenario and write per-turn metrics");
    run->add_option("scenario", scenario_path, "JSON-lines scenario")->required();
    run->add_option("--state", state_in, "resume from a snapshot");
    run->add_option("--save", state_out, "save a snapshot after the run");

    std::string query_text;
    std::vector<std::string> query_concepts;
    auto* query = app.add_subcommand("query", "ask one question and print the answer and verdict");
    query->add_option("text", query_text, "question")->required();
    query->add_option("--concepts", query_concepts, "concept labels")->delimiter(',');
    query->add_option("--state", state_in, "answer from a snapshot");

    std::string experiment_name;
    auto* experiment = app.add_subcommand("experiment", "run one prediction experiment");
    experiment->add_option("name", experiment_name, "P1..P7 or FP1..FP7")
        ->required()
        ->check(CLI::IsMember(experiment_names()));

    std::string snap_action, snap_path, snap_scenario;
    auto* snapshot = app.add_subcommand("snapshot", "save or load an engine snapshot");
    snapshot->add_option("action", snap_action, "save|load")->required()->check(CLI::IsMember({"save", "load"}));
    snapshot->add_option("path", snap_path, "snapshot file")->required();
    snapshot->add_option("--scenario", snap_scenario, "scenario to run before saving");

    std::vector<std::string> metrics_paths;
    std::string json_out;
    auto* report = app.add_subcommand("report", "summarize metrics files per window");
    report->add_option("metrics", metrics_paths, "metrics files")->required();
    report->add_option("--json", json_out, "also write the JSON summary here");

    std::string gen_name;
    std::size_t gen_turns = 1000;
    auto* gen = app.add_subcommand("generate", "write a bundled scenario");
    gen->add_option("name", gen_name,
                    "mixed|regular|identity|facts|priming|rigidity|salience|attack|gambling|ambient|formation|stability")
        ->required();
    gen->add_option("--turns", gen_turns, "length for open-ended generators");

    auto* serve = app.add_subcommand("policy-serve", "answer policy requests on stdin with the scripted policy");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*init) {
            emit(opt, EngineConfig{}.to_json().dump(2) + "\n");
            return kOk;
        }
        if (*run) {
            auto engine = open_engine(opt, state_in);
            const auto events = load_scenario(scenario_path);
            const auto result = run_scenario(*engine, events);
            std::ostringstream out;
            write_metrics(out, result.records);
            emit(opt, out.str());
            if (!state_out.empty()) engine->save(state_out);
            return kOk;
        }
        if (*query) {
            auto engine = open_engine(opt, state_in);
            ScenarioEvent e;
            e.turn = engine->last_turn() + 1;
            e.type = EventType::query;
            e.text = query_text;
            e.concepts = query_concepts;
            if (e.concepts.empty()) {
                for (const auto& t : tokenize(query_text))
                    if (engine->graph().find_concept(t)) e.concepts.push_back(t);
            }
            const auto rec = engine->process(e);
            std::ostringstream out;
            out << rec.response << "\nverdict: " << rec.verdict << " (confidence " << rec.confidence << ", "
                << rec.mode << ")\n";
            emit(opt, out.str());
            return kOk;
        }
        if (*experiment) {
            const auto rep = run_experiment(experiment_name, load_config(opt));
            std::cout << rep.text();
            if (!opt.out.empty()) emit(opt, rep.to_json().dump(2) + "\n");
            return rep.passed() ? kOk : kFailed;
        }
        if (*snapshot) {
            if (snap_action == "save") {
                Engine engine(load_config(opt));
                if (!snap_scenario.empty()) run_scenario(engine, load_scenario(snap_scenario));
                engine.save(snap_path);
                std::cout << "saved " << snap_path << "\n";
            } else {
                auto engine = Engine::load(snap_path);
                std::cout << "loaded " << snap_path << ": " << engine->graph().concept_count() << " concepts, "
                          << engine->graph().episode_count() << " episodes, " << engine->graph().gist_count()
                          << " gists, " << engine->wm().size() << " items in working memory, last turn "
                          << engine->last_turn() << "\n";
            }
            return kOk;
        }
        if (*report) {
            std::vector<MetricsRecord> records;
            for (const auto& p : metrics_paths) {
                auto part = load_metrics(p);
                records.insert(records.end(), part.begin(), part.end());
            }
            const auto rows = summarize(records, load_config(opt).harness.window);
            emit(opt, report_csv(rows));
            if (!json_out.empty()) {
                std::ofstream f(json_out);
                if (!f) throw NotFoundError("cannot write '" + json_out + "'");
                f << report_json(rows).dump(2) << "\n";
            }
            return kOk;
        }
        if (*gen) {
            std::ostringstream out;
            write_scenario(out, generate(gen_name, gen_turns, load_config(opt).harness.seed));
            emit(opt, out.str());
            return kOk;
        }
        if (*serve) {
            ScriptedPolicy policy;
            serve_policy(policy, std::cin, std::cout);
            return kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "engram: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

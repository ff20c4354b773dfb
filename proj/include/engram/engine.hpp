#pragma once
// The engine wires gateway, working memory, graph and executive into one
// single-writer turn loop and emits one MetricsRecord per event.

#include "engram/config.hpp"
#include "engram/executive.hpp"
#include "engram/gateway.hpp"
#include "engram/memory_graph.hpp"
#include "engram/policy.hpp"
#include "engram/working_memory.hpp"

#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>

namespace engram {

enum class EventType { utterance, feedback, query, probe, ground_truth, attack };
std::string to_string(EventType t);
EventType event_type_from_string(const std::string& s);

struct ScenarioEvent {
    std::int64_t turn = 0;
    EventType type = EventType::utterance;
    std::string text;
    std::string source = "user";
    std::vector<std::string> concepts;
    double affect = 0.0;
    bool stakes = false;
    std::optional<std::string> expected_answer;
    /// Claim carried by a segment, the truth of a ground_truth event, or the
    /// (subject, attribute) a probe asks about.
    std::optional<Fact> fact;

    [[nodiscard]] bool is_content() const {
        return type == EventType::utterance || type == EventType::feedback || type == EventType::attack;
    }
};

struct MetricsRecord {
    std::int64_t turn = 0;
    std::string type;
    std::string mode;  // S1, S2, or "-" for events the engine does not route
    std::vector<std::string> signals;
    std::size_t wm_size = 0;
    std::size_t injections = 0;
    std::size_t suppressed = 0;
    std::size_t displacements = 0;
    std::size_t evictions = 0;
    std::uint64_t node_visits = 0;
    std::uint64_t policy_calls = 0;
    std::uint64_t cost = 0;
    std::string verdict;  // precise, approximate, null, or "-"
    double confidence = 0.0;
    bool qualified = false;
    std::string response;
    std::vector<Fact> asserted;
    bool asserted_false = false;  // filled in by the harness
    bool rejected = false;
    bool boundary = false;
    bool primed = false;  // a gist about the asked subject sat in WM before the event
    bool identity_in_wm = false;
    std::size_t tag_work = 0;
    std::size_t tokens = 0;
    std::vector<std::string> gist_events;
    std::vector<std::string> thoughts;  // generated conclusions; logged only

    [[nodiscard]] nlohmann::json to_json() const;
    static MetricsRecord from_json(const nlohmann::json& j);
};

/// Appends journal lines to a file, flushing each one.
class FileJournal final : public JournalSink {
public:
    explicit FileJournal(const std::string& path);
    void append(const std::string& line) override;

private:
    std::ofstream out_;
};

class Engine {
public:
    /// Uses the bundled scripted policy unless `policy` is given (not owned).
    explicit Engine(EngineConfig config = {}, ExecutivePolicy* policy = nullptr);
    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    MetricsRecord process(const ScenarioEvent& event);

    [[nodiscard]] const EngineConfig& config() const { return config_; }
    [[nodiscard]] const MemoryGraph& graph() const { return graph_; }
    [[nodiscard]] const WorkingMemory& wm() const { return wm_; }
    [[nodiscard]] const Executive& executive() const { return *executive_; }
    [[nodiscard]] const ThalamicGateway& gateway() const { return *gateway_; }
    [[nodiscard]] const NodeSet& topic() const { return topic_; }
    [[nodiscard]] std::int64_t last_turn() const { return last_turn_; }

    /// Deterministic snapshot of everything a continued run depends on.
    [[nodiscard]] nlohmann::json snapshot() const;
    [[nodiscard]] std::string snapshot_string() const { return snapshot().dump(); }
    /// Builds a fresh engine from a snapshot. Throws before touching anything
    /// on a version mismatch or a malformed document.
    static std::unique_ptr<Engine> restore(const nlohmann::json& doc, ExecutivePolicy* policy = nullptr);
    void save(const std::string& path) const;
    static std::unique_ptr<Engine> load(const std::string& path, ExecutivePolicy* policy = nullptr);

    static constexpr int kSnapshotVersion = 1;

private:
    MetricsRecord process_content(const ScenarioEvent& event);
    MetricsRecord process_query(const ScenarioEvent& event);
    void inject(const ActivationMap& activation, MetricsRecord& rec, CostMeter& meter);
    void finish(MetricsRecord& rec, const CostMeter& meter);
    [[nodiscard]] SalienceTag injection_tag(NodeId node, const ValenceVector& gist) const;
    [[nodiscard]] bool gist_in_wm(const std::string& label) const;

    EngineConfig config_;
    std::unique_ptr<ExecutivePolicy> owned_policy_;
    ExecutivePolicy* policy_;
    MemoryGraph graph_;
    WorkingMemory wm_;
    std::unique_ptr<ThalamicGateway> gateway_;
    std::unique_ptr<Executive> executive_;
    std::unique_ptr<FileJournal> journal_;
    NodeSet topic_{kSelfId};
    std::int64_t last_turn_ = -1;
};

}  // namespace engram

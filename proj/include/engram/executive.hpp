#pragma once
// Dual-process executive: S1/S2 routing, graded epistemic verdicts, gist
// formation through investigations, cathartic updates and override
// authority. It is the only component holding a GistWriteKey.

#include "engram/core.hpp"
#include "engram/gateway.hpp"
#include "engram/lexicon.hpp"
#include "engram/memory_graph.hpp"
#include "engram/policy.hpp"
#include "engram/working_memory.hpp"

#include <map>
#include <nlohmann/json.hpp>
#include <span>
#include <tuple>

namespace engram {

enum class FormationMode { active, passive };

struct ExecutiveConfig {
    double route_density = 0.2;   // S2 below this mean density
    double route_novelty = 0.7;   // S2 above this novelty
    double precise_match = 0.8;
    double precise_precision = 0.6;
    double null_match = 0.1;
    double open_salience = 0.6;
    double close_density = 0.5;
    std::size_t close_evidence = 10;
    double close_ratio = 0.7;
    int step_cap = 25;
    double abort_growth = 0.05;
    double theta_base = 0.4;
    double theta_k = 0.5;
    double emotional_blend = 0.5;
    double override_relevance = 0.1;
    double attack_trust = 0.8;
    std::size_t search_budget = 64;
    FormationMode formation = FormationMode::active;
};

std::string to_string(FormationMode m);
FormationMode formation_mode_from_string(const std::string& s);

// --- routing -----------------------------------------------------------------

enum class Mode { s1, s2 };
enum class EscalationReason { low_density, high_novelty, high_stakes, external_trigger };

struct EscalationSignal {
    EscalationReason reason;
    double value = 0.0;

    bool operator==(const EscalationSignal&) const = default;
};

struct RouteDecision {
    Mode mode = Mode::s1;
    std::vector<EscalationSignal> signals;
};

std::string to_string(Mode m);
std::string to_string(EscalationReason r);

/// Mean density of `query_concepts` (unknown concepts count 0; an empty
/// query counts as density 0).
RouteDecision route(const std::vector<std::optional<NodeId>>& query_concepts, double novelty, bool stakes,
                    bool external_trigger, const MemoryGraph& graph, const ExecutiveConfig& config = {});

// --- epistemic verdicts --------------------------------------------------------

enum class EpistemicState { precise, approximate, null };

struct EpistemicVerdict {
    EpistemicState state = EpistemicState::null;
    double confidence = 0.0;
    double match = 0.0;
    double density = 0.0;
    double precision = 0.0;
};

std::string to_string(EpistemicState s);
EpistemicVerdict classify_epistemic(double match_score, double density, double precision,
                                    const ExecutiveConfig& config = {});

inline constexpr const char* kQualificationMarker = "[approximate]";

// --- investigations ------------------------------------------------------------

enum class InvestigationStatus { open, closed_gist, aborted };
std::string to_string(InvestigationStatus s);

struct EvidenceEntry {
    NodeId episode;
    Consistency judgment = Consistency::neutral;
    double aggregate = 0.0;
    double arousal = 0.0;
    double valence = 0.0;
    bool self_ref = false;
    std::string source;
    std::optional<Fact> fact;
};

struct Investigation {
    std::uint64_t id = 0;
    NodeId target;
    std::int64_t opened_turn = 0;
    double opened_density = 0.0;
    std::vector<EvidenceEntry> evidence;
    int steps = 0;
    InvestigationStatus status = InvestigationStatus::open;
    std::string end_reason;  // determination, gambling_loop, step_cap

    /// consistent / (consistent + contradictory); 0 when nothing was judged.
    [[nodiscard]] double consistency_ratio() const;
};

// --- catharsis -------------------------------------------------------------------

struct CatharsisEvent {
    NodeId gist_node;
    double intensity = 0.0;
    double threshold = 0.0;
    bool fired = false;
    double old_precision = 0.0;
    double new_precision = 0.0;
    std::vector<ItemId> evidence;  // contradicting WM segments
};

double catharsis_threshold(double precision, const ExecutiveConfig& config = {});

// --- override ----------------------------------------------------------------------

enum class InjectionDecision { accept, suppress };
enum class AttackDecision { process, reject };

// --- answering -----------------------------------------------------------------------

struct AnswerRequest {
    PolicyQuery query;
    std::vector<NodeId> concepts;  // known query concepts
    RouteDecision route;
};

struct AnswerResult {
    PolicyResponse response;
    EpistemicVerdict verdict;
    Mode mode = Mode::s1;
    bool qualified = false;
    std::optional<NodeId> support;  // node the verdict rests on
    std::size_t searched = 0;       // deliberate-search hits examined
};

class Executive {
public:
    Executive(ExecutiveConfig config, ExecutivePolicy& policy, Lexicon override_lexicon);

    [[nodiscard]] const ExecutiveConfig& config() const { return config_; }
    void set_policy(ExecutivePolicy& policy) { policy_ = &policy; }

    // investigations
    std::optional<std::uint64_t> maybe_open_investigation(const SalienceTag& tag, NodeId concept_id,
                                                          const MemoryGraph& graph, std::int64_t turn);
    /// Appends one evidence episode; closes (writing the gist) or aborts when
    /// the rules say so.
    /// `valence` and `source` describe the segment the episode was promoted from.
    const Investigation& step_investigation(std::uint64_t id, NodeId episode, double valence,
                                            const std::string& source, MemoryGraph& graph, CostMeter& meter,
                                            std::int64_t turn);
    ValenceVector close_investigation(std::uint64_t id, MemoryGraph& graph, CostMeter& meter, std::int64_t turn);
    /// Passive variant: a gist written straight from one exposure, no
    /// delimitation. Its precision is the consistency of that single piece of
    /// evidence with itself.
    void form_passively(NodeId concept_id, NodeId episode, double valence, MemoryGraph& graph, std::int64_t turn);

    [[nodiscard]] const Investigation& investigation(std::uint64_t id) const;
    [[nodiscard]] const std::map<std::uint64_t, Investigation>& investigations() const { return investigations_; }
    [[nodiscard]] std::optional<std::uint64_t> open_investigation_for(NodeId concept_id) const;
    /// Targets of the investigations still open.
    [[nodiscard]] NodeSet pursued() const;

    // catharsis
    std::vector<CatharsisEvent> detect_catharsis(const WorkingMemory& wm, const MemoryGraph& graph, CostMeter& meter);
    void apply_cathartic_update(CatharsisEvent& event, const WorkingMemory& wm, MemoryGraph& graph, CostMeter& meter,
                                std::int64_t turn);

    // override
    InjectionDecision override_injection(const Injection& injection, const SalienceTag& injection_tag,
                                         const MemoryGraph& graph, double channel_threshold, CostMeter& meter);
    [[nodiscard]] AttackDecision reject_injection_attack(const std::string& text, const NodeSet& concepts,
                                                         const SalienceTag& tag, const MemoryGraph& graph) const;

    // answering
    AnswerResult answer(const AnswerRequest& request, const WorkingMemory& wm, const MemoryGraph& graph,
                        CostMeter& meter);

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& doc);

private:
    GistView view_of(NodeId id, const ValenceVector& gist, const MemoryGraph& graph) const;
    EvidenceRecord record_of(NodeId episode, const MemoryGraph& graph) const;
    Judgment judge(const EvidenceRecord& evidence, const GistView& gist, CostMeter& meter);
    ValenceVector provisional_gist(const Investigation& inv, const MemoryGraph& graph) const;
    void abort(Investigation& inv, const std::string& reason);

    ExecutiveConfig config_;
    ExecutivePolicy* policy_;
    Lexicon override_lexicon_;
    std::map<std::uint64_t, Investigation> investigations_;
    std::uint64_t next_investigation_ = 1;
    std::uint64_t next_catharsis_ = 1;
    std::map<NodeId, double> aborted_density_;  // target -> density when its investigation aborted
    // (gist node, WM item, gist_turn) -> judgment already paid for
    std::map<std::tuple<NodeId, ItemId, std::int64_t>, Judgment> judge_cache_;
};

}  // namespace engram

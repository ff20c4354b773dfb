#pragma once
// Thalamic gateway: tags incoming segments on six salience channels and
// gates the flow between the graph and working memory. It never forms,
// judges or rewrites gists; it only reads the graph.

#include "engram/core.hpp"
#include "engram/lexicon.hpp"
#include "engram/memory_graph.hpp"
#include "engram/working_memory.hpp"

#include <map>
#include <span>

namespace engram {

struct GateConfig {
    double channel_threshold = 0.6;
    double inbound_activation_threshold = 0.3;
    double identity_discount = 0.15;
    double promotion_threshold = 0.6;
    double boundary_threshold = 0.7;
    double amplify_factor = 0.5;
    double displace_thematic = 0.2;
};

/// Static per-source trust. Sources not listed score `unknown` and are flagged.
struct TrustTable {
    std::map<std::string, double> sources{{"user", 1.0}, {"system", 0.8}, {"document", 0.5}};
    double unknown = 0.2;
};

struct Segment {
    std::string text;
    std::string source;
    std::vector<std::string> concept_labels;
    double affect = 0.0;  // externally supplied affect strength, combined with the lexicon
};

struct TagResult {
    SalienceTag tag;
    double valence = 0.0;  // signed affect of the strongest lexicon hit
    bool identity_relevant = false;
    bool unknown_source = false;
    std::size_t work = 0;  // scoring operations performed
    NodeSet known_concepts;
};

struct Injection {
    NodeId node;
    ValenceVector gist;
    double activation = 0.0;
};

struct SegmentBoundary {
    std::int64_t at_turn = 0;
    double surprise = 0.0;
};

/// Fraction of `concepts` inside `topic`; 0 for an empty set.
double topic_overlap(const NodeSet& concepts, const NodeSet& topic);

class ThalamicGateway {
public:
    ThalamicGateway(GateConfig config, TrustTable trust, Lexicon affect, Lexicon urgency,
                    std::vector<std::string> goal_labels = {});

    [[nodiscard]] const GateConfig& config() const { return config_; }
    [[nodiscard]] const TrustTable& trust() const { return trust_; }

    /// Scores a segment against the current state only: the working memory,
    /// the active topic and the graph as they are right now. Concepts in
    /// `pursued` (open investigation targets) count toward the goal channel
    /// alongside the configured goal labels.
    [[nodiscard]] TagResult tag(const Segment& segment, std::span<const WMItem> wm,
                                const std::vector<std::pair<NodeId, ValenceVector>>& identity_gists,
                                const MemoryGraph& graph, const NodeSet& active_topic,
                                const NodeSet& pursued = {}) const;

    [[nodiscard]] std::vector<std::pair<ItemId, SalienceTag>> emotional_amplify(std::span<const WMItem> wm,
                                                                                const SalienceTag& trigger) const;
    [[nodiscard]] std::vector<Injection> gate_inbound(const ActivationMap& activation, const MemoryGraph& graph) const;
    [[nodiscard]] std::vector<ItemId> gate_outbound(std::span<const WMItem> wm) const;
    [[nodiscard]] std::vector<ItemId> displace(std::span<const WMItem> wm, const NodeSet& active_topic) const;
    [[nodiscard]] std::optional<SegmentBoundary> detect_boundary(const NodeSet& segment_concepts,
                                                                 std::span<const WMItem> wm,
                                                                 std::int64_t turn) const;

    /// Surprise of a segment relative to the concepts already in working memory.
    [[nodiscard]] static double surprise(const NodeSet& segment_concepts, std::span<const WMItem> wm);
    /// Whether any single channel carries the tag over its threshold.
    [[nodiscard]] bool passes(const SalienceTag& tag, bool identity_relevant, double threshold) const;

private:
    GateConfig config_;
    TrustTable trust_;
    Lexicon affect_;
    Lexicon urgency_;
    std::vector<std::string> goal_labels_;
};

}  // namespace engram

#pragma once
// Persistent knowledge graph: concept and episode nodes, weighted associative
// edges, constant-time gist access, spreading activation over the concept
// layer, deliberate best-first search over the full graph, and age-based
// content compression that leaves every gist untouched.

#include "engram/core.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace engram {

struct GraphConfig {
    double w_init = 0.3;             // first co-occurrence edge weight
    double reinforce = 0.15;         // per co-occurrence increment
    double testing_effect = 0.05;    // reconsolidation increment
    double density_scale = 5.0;      // density = 1 - exp(-S / scale)
    std::int64_t compress_age = 200; // turns before episode content degrades
    std::size_t k_assoc = 8;
    double w_core = 0.9;             // identity-link weight threshold
    double spread_decay = 0.8;
    int hop_limit = 3;
    double activation_floor = 0.05;
};

struct ConceptNode {
    NodeId id;
    std::string label;
    std::optional<ValenceVector> gist;
    double weight = 0.0;
    std::int64_t created_turn = 0;
    std::int64_t gist_turn = -1;  // turn of the last gist write; -1 before formation
};

struct EpisodeNode {
    NodeId id;
    std::string content;
    std::vector<NodeId> concept_refs;
    SalienceTag tag;
    std::int64_t turn = 0;
    bool degraded = false;
    std::optional<Fact> fact;  // structured claim carried by the content; dropped on degradation
};

/// Edges are undirected; src < dst is the canonical orientation.
struct AssociativeEdge {
    std::uint64_t seq = 0;  // creation order
    NodeId src;
    NodeId dst;
    double weight = 0.0;
    std::int64_t last_reinforced_turn = 0;
};

using ActivationMap = std::map<NodeId, double>;

struct SearchHit {
    NodeId id;
    double score = 0.0;

    bool operator==(const SearchHit&) const = default;
};

/// Cost proxy: deliberate node visits plus policy calls.
struct CostMeter {
    std::uint64_t node_visits = 0;
    std::uint64_t policy_calls = 0;

    [[nodiscard]] std::uint64_t total() const { return node_visits + policy_calls; }
};

enum class GistSource { investigation, catharsis, passive };
std::string to_string(GistSource s);
GistSource gist_source_from_string(const std::string& s);

/// Every gist write is recorded so provenance can be audited after a run.
struct GistAudit {
    NodeId node;
    std::int64_t turn = 0;
    GistSource source = GistSource::investigation;
    std::uint64_t ref = 0;  // investigation id or catharsis sequence number
};

/// Capability required to change any valence vector. Only the executive
/// (and test code through GistWriteKeyTestAccess) can mint one.
class GistWriteKey {
    GistWriteKey() = default;
    friend class Executive;
    friend struct GistWriteKeyTestAccess;
};

/// Receives one serialized mutation per line.
class JournalSink {
public:
    virtual ~JournalSink() = default;
    virtual void append(const std::string& line) = 0;
};

class MemoryGraph {
public:
    explicit MemoryGraph(GraphConfig config = {});

    MemoryGraph(const MemoryGraph& other);
    MemoryGraph& operator=(const MemoryGraph& other);
    MemoryGraph(MemoryGraph&&) noexcept;
    MemoryGraph& operator=(MemoryGraph&&) noexcept;
    ~MemoryGraph();

    [[nodiscard]] const GraphConfig& config() const { return config_; }

    // --- mutation (single writer) -----------------------------------------

    NodeId add_concept(const std::string& label, std::int64_t turn);
    NodeId add_episode(const std::string& content, const std::vector<NodeId>& concept_refs,
                       const SalienceTag& tag, std::int64_t turn, std::optional<Fact> fact = std::nullopt);
    /// Creates an edge with the given weight or raises an existing edge to it.
    /// Fixture and replay plumbing; normal growth goes through add_episode.
    void connect(NodeId a, NodeId b, double weight, std::int64_t turn);
    std::size_t compress_tick(std::int64_t now);
    void reconsolidate(NodeId id, std::span<const NodeId> retrieval_seeds, bool window_closed_without_update,
                       std::int64_t turn);
    void write_gist(const GistWriteKey& key, NodeId id, const ValenceVector& gist, double weight,
                    std::int64_t turn, GistSource source, std::uint64_t ref);

    // --- reads --------------------------------------------------------------

    [[nodiscard]] std::optional<ValenceVector> gist_lookup(NodeId id) const;
    [[nodiscard]] ActivationMap spread_activation(const std::map<NodeId, double>& seeds, double decay,
                                                  int hop_limit, double floor) const;
    [[nodiscard]] ActivationMap spread_activation(const std::map<NodeId, double>& seeds) const;
    [[nodiscard]] std::vector<SearchHit> deliberate_search(std::span<const NodeId> query_concepts,
                                                           std::size_t budget, CostMeter& meter) const;
    /// 1 - exp(-S / scale), S the summed weight of concept-concept edges at id.
    [[nodiscard]] double local_density(NodeId id) const;

    [[nodiscard]] bool contains(NodeId id) const;
    [[nodiscard]] bool is_concept(NodeId id) const { return concepts_.contains(id); }
    [[nodiscard]] bool is_episode(NodeId id) const { return episodes_.contains(id); }
    [[nodiscard]] std::optional<NodeId> find_concept(const std::string& label) const;
    [[nodiscard]] const ConceptNode& concept_node(NodeId id) const;
    [[nodiscard]] const EpisodeNode& episode(NodeId id) const;
    [[nodiscard]] std::optional<double> edge_weight(NodeId a, NodeId b) const;
    [[nodiscard]] std::vector<std::pair<NodeId, double>> neighbors(NodeId id) const;
    /// Episodes linked to a concept, in creation order.
    [[nodiscard]] std::vector<NodeId> linked_episodes(NodeId concept_id) const;

    [[nodiscard]] std::size_t concept_count() const { return concepts_.size(); }
    [[nodiscard]] std::size_t episode_count() const { return episodes_.size(); }
    [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
    [[nodiscard]] std::size_t gist_count() const;
    [[nodiscard]] std::vector<NodeId> concept_ids() const;
    [[nodiscard]] const std::vector<AssociativeEdge>& edges() const { return edges_; }
    [[nodiscard]] const std::vector<GistAudit>& gist_audit() const { return audit_; }

    /// True when the gist references the self, carries weight >= w_core and
    /// is linked to the SELF node.
    [[nodiscard]] bool is_identity_gist(NodeId id) const;
    /// SELF-linked identity gists, by node id.
    [[nodiscard]] std::vector<std::pair<NodeId, ValenceVector>> identity_gists() const;
    /// Nodes that have any SELF edge and a self-referencing gist.
    [[nodiscard]] bool self_linked(NodeId id) const;

    /// Node accesses performed by gist_lookup since construction.
    [[nodiscard]] std::uint64_t lookup_ops() const { return lookup_ops_->load(std::memory_order_relaxed); }

    // --- persistence ----------------------------------------------------------

    [[nodiscard]] nlohmann::json to_json() const;
    static MemoryGraph from_json(const nlohmann::json& doc, GraphConfig config = {});
    /// Canonical single-concept serialization used for byte-level stability checks.
    [[nodiscard]] std::string serialize_concept(NodeId id) const;

    void set_journal(JournalSink* sink) { journal_ = sink; }
    /// Applies one journal line (as produced by a JournalSink) to this graph.
    void apply_journal_line(const std::string& line);

private:
    struct Adjacent {
        NodeId other;
        std::size_t edge;
    };
    using EdgeKey = std::pair<NodeId, NodeId>;
    struct EdgeKeyHash {
        std::size_t operator()(const EdgeKey& k) const noexcept {
            return std::hash<std::uint64_t>{}(k.first.value * 0x9E3779B97F4A7C15ull ^ k.second.value);
        }
    };

    static EdgeKey key(NodeId a, NodeId b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }
    void require(NodeId id) const;
    NodeId next_id() { return NodeId{next_id_++}; }
    /// Creates or reinforces; returns the edge index.
    std::size_t bump_edge(NodeId a, NodeId b, double initial, double increment, std::int64_t turn);
    std::size_t insert_edge(NodeId a, NodeId b, double weight, std::int64_t turn);
    void store_gist(NodeId id, const ValenceVector& gist, double weight, std::int64_t turn, GistSource source,
                    std::uint64_t ref);
    void journal(const nlohmann::json& entry);
    void rebuild_indexes();

    GraphConfig config_;
    std::uint64_t next_id_ = 1;
    std::uint64_t next_edge_seq_ = 1;
    std::map<NodeId, ConceptNode> concepts_;
    std::map<NodeId, EpisodeNode> episodes_;
    std::vector<AssociativeEdge> edges_;
    std::vector<GistAudit> audit_;

    // derived indexes
    std::unordered_map<NodeId, ConceptNode*, NodeIdHash> concept_index_;
    std::unordered_map<std::string, NodeId> labels_;
    std::unordered_map<EdgeKey, std::size_t, EdgeKeyHash> edge_index_;
    // concept-concept edges (the layer spreading activation runs over)
    std::unordered_map<NodeId, std::vector<Adjacent>, NodeIdHash> concept_adj_;
    // concept-episode links, indexed from both ends
    std::unordered_map<NodeId, std::vector<Adjacent>, NodeIdHash> episode_adj_;
    std::multimap<std::int64_t, NodeId> compress_queue_;
    NodeSet identity_nodes_;

    std::unique_ptr<std::atomic<std::uint64_t>> lookup_ops_;
    JournalSink* journal_ = nullptr;
};

}  // namespace engram

#pragma once
// Capacity-limited active workspace. Items leave only through salience:
// drift and interference erode activation, and overflow evicts the lowest
// aggregate-salience x activation score.

#include "engram/core.hpp"

#include <nlohmann/json.hpp>
#include <vector>

namespace engram {

enum class ItemKind { segment, gist };

struct WMItem {
    ItemId item_id;
    ItemKind kind = ItemKind::segment;
    std::optional<NodeId> node;  // gist node, or the episode a segment was promoted to
    std::string text;            // inline segment text
    std::string source;
    NodeSet concept_refs;
    SalienceTag tag;
    double valence = 0.0;  // signed affect of the segment
    double activation = 1.0;
    std::int64_t entry_turn = 0;
    bool persisted = false;
    bool identity_relevant = false;  // gateway lowered thematic/goal thresholds for it
    std::optional<Fact> fact;

    [[nodiscard]] double score() const { return tag.aggregate() * activation; }
    bool operator==(const WMItem&) const = default;
};

struct WMConfig {
    std::size_t capacity = 16;
    double drift_decay = 0.8;
    double interference_overlap = 0.6;
    double interference_penalty = 0.05;
};

double jaccard(const NodeSet& a, const NodeSet& b);

class WorkingMemory {
public:
    explicit WorkingMemory(WMConfig config = {});

    [[nodiscard]] const WMConfig& config() const { return config_; }

    /// Inserts and evicts lowest-score items (oldest first on ties) until the
    /// capacity holds again. Returns the evicted items.
    std::vector<WMItem> insert(WMItem item);
    /// Drift for items off the active topic, then pairwise interference.
    /// SELF is always treated as part of the topic.
    void tick(const NodeSet& active_topic);
    /// Removes the listed items and returns them.
    std::vector<WMItem> remove(const std::vector<ItemId>& ids);

    /// Items by score descending; a copy safe to hand to other threads.
    [[nodiscard]] std::vector<WMItem> view() const;
    [[nodiscard]] const std::vector<WMItem>& items() const { return items_; }
    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] bool empty() const { return items_.empty(); }

    [[nodiscard]] const WMItem* find(ItemId id) const;
    [[nodiscard]] const WMItem* find_gist(NodeId node) const;
    /// Concepts referenced by any item.
    [[nodiscard]] NodeSet concepts() const;

    void set_tag(ItemId id, const SalienceTag& tag);
    void set_activation(ItemId id, double activation);
    void mark_persisted(ItemId id, NodeId episode);

    [[nodiscard]] ItemId next_item_id() { return ItemId{next_item_++}; }

    [[nodiscard]] nlohmann::json to_json() const;
    static WorkingMemory from_json(const nlohmann::json& doc, WMConfig config);

private:
    WMItem& at(ItemId id);

    WMConfig config_;
    std::vector<WMItem> items_;  // insertion order
    std::uint64_t next_item_ = 1;
};

}  // namespace engram

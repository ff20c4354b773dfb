#include "engram/working_memory.hpp"

#include "engram/serialization.hpp"

namespace engram {

using nlohmann::json;

double jaccard(const NodeSet& a, const NodeSet& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t shared = 0;
    for (NodeId id : a) shared += b.contains(id) ? 1 : 0;
    return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

WorkingMemory::WorkingMemory(WMConfig config) : config_(config) {
    if (config_.capacity < 1) throw ValidationError("working memory capacity must be >= 1");
    if (!(config_.drift_decay > 0.0 && config_.drift_decay <= 1.0)) throw ValidationError("drift decay outside (0,1]");
}

std::vector<WMItem> WorkingMemory::insert(WMItem item) {
    if (!item.tag.valid()) throw ValidationError("item tag channel outside [0,1]");
    if (!in_unit(item.activation)) throw ValidationError("item activation outside [0,1]");
    if (item.item_id.value >= next_item_) next_item_ = item.item_id.value + 1;
    items_.push_back(std::move(item));

    std::vector<WMItem> evicted;
    while (items_.size() > config_.capacity) {
        auto victim = items_.begin();
        for (auto it = items_.begin() + 1; it != items_.end(); ++it) {
            const double s = it->score();
            const double v = victim->score();
            if (s < v || (s == v && (it->entry_turn < victim->entry_turn ||
                                     (it->entry_turn == victim->entry_turn && it->item_id < victim->item_id)))) {
                victim = it;
            }
        }
        evicted.push_back(std::move(*victim));
        items_.erase(victim);
    }
    return evicted;
}

void WorkingMemory::tick(const NodeSet& active_topic) {
    NodeSet topic = active_topic;
    topic.insert(kSelfId);
    for (auto& item : items_) {
        const bool on_topic = std::any_of(item.concept_refs.begin(), item.concept_refs.end(),
                                          [&](NodeId c) { return topic.contains(c); });
        if (!on_topic) item.activation *= config_.drift_decay;
    }
    std::vector<int> hits(items_.size(), 0);
    for (std::size_t i = 0; i < items_.size(); ++i) {
        for (std::size_t j = i + 1; j < items_.size(); ++j) {
            if (jaccard(items_[i].concept_refs, items_[j].concept_refs) > config_.interference_overlap) {
                ++hits[i];
                ++hits[j];
            }
        }
    }
    for (std::size_t i = 0; i < items_.size(); ++i) {
        if (hits[i] > 0) items_[i].activation = std::max(0.0, items_[i].activation - hits[i] * config_.interference_penalty);
    }
}

std::vector<WMItem> WorkingMemory::remove(const std::vector<ItemId>& ids) {
    std::vector<WMItem> removed;
    for (ItemId id : ids) {
        auto it = std::find_if(items_.begin(), items_.end(), [&](const WMItem& w) { return w.item_id == id; });
        if (it == items_.end()) continue;
        removed.push_back(std::move(*it));
        items_.erase(it);
    }
    return removed;
}

std::vector<WMItem> WorkingMemory::view() const {
    std::vector<WMItem> out = items_;
    std::stable_sort(out.begin(), out.end(), [](const WMItem& a, const WMItem& b) {
        const double sa = a.score();
        const double sb = b.score();
        if (sa != sb) return sa > sb;
        return a.item_id < b.item_id;
    });
    return out;
}

const WMItem* WorkingMemory::find(ItemId id) const {
    for (const auto& item : items_) {
        if (item.item_id == id) return &item;
    }
    return nullptr;
}

const WMItem* WorkingMemory::find_gist(NodeId node) const {
    for (const auto& item : items_) {
        if (item.kind == ItemKind::gist && item.node == node) return &item;
    }
    return nullptr;
}

NodeSet WorkingMemory::concepts() const {
    NodeSet out;
    for (const auto& item : items_) out.insert(item.concept_refs.begin(), item.concept_refs.end());
    return out;
}

WMItem& WorkingMemory::at(ItemId id) {
    for (auto& item : items_) {
        if (item.item_id == id) return item;
    }
    throw NotFoundError("unknown working-memory item");
}

void WorkingMemory::set_tag(ItemId id, const SalienceTag& tag) {
    if (!tag.valid()) throw ValidationError("item tag channel outside [0,1]");
    at(id).tag = tag;
}

void WorkingMemory::set_activation(ItemId id, double activation) { at(id).activation = clamp01(activation); }

void WorkingMemory::mark_persisted(ItemId id, NodeId episode) {
    auto& item = at(id);
    item.persisted = true;
    item.node = episode;
}

json WorkingMemory::to_json() const {
    json items = json::array();
    for (const auto& w : items_) {
        json j{{"item_id", w.item_id.value},
               {"kind", w.kind == ItemKind::gist ? "gist" : "segment"},
               {"node", nullptr},
               {"text", w.text},
               {"source", w.source},
               {"concepts", w.concept_refs},
               {"tag", w.tag},
               {"activation", w.activation},
               {"entry_turn", w.entry_turn},
               {"persisted", w.persisted},
               {"identity_relevant", w.identity_relevant},
               {"valence", w.valence},
               {"fact", nullptr}};
        if (w.node) j["node"] = *w.node;
        if (w.fact) j["fact"] = *w.fact;
        items.push_back(std::move(j));
    }
    return json{{"next_item", next_item_}, {"items", items}};
}

WorkingMemory WorkingMemory::from_json(const json& doc, WMConfig config) {
    WorkingMemory wm(config);
    wm.next_item_ = field<std::uint64_t>(doc, "next_item");
    for (const auto& j : field<json>(doc, "items")) {
        WMItem w;
        w.item_id = ItemId{field<std::uint64_t>(j, "item_id")};
        const auto kind = field<std::string>(j, "kind");
        if (kind != "gist" && kind != "segment") throw SchemaError("unknown item kind '" + kind + "'");
        w.kind = kind == "gist" ? ItemKind::gist : ItemKind::segment;
        if (!field<json>(j, "node").is_null()) w.node = field<NodeId>(j, "node");
        w.text = field<std::string>(j, "text");
        w.source = field<std::string>(j, "source");
        w.concept_refs = field<NodeSet>(j, "concepts");
        w.tag = field<SalienceTag>(j, "tag");
        w.activation = field<double>(j, "activation");
        w.entry_turn = field<std::int64_t>(j, "entry_turn");
        w.persisted = field<bool>(j, "persisted");
        w.identity_relevant = field<bool>(j, "identity_relevant");
        w.valence = field<double>(j, "valence");
        if (!field<json>(j, "fact").is_null()) w.fact = field<Fact>(j, "fact");
        wm.items_.push_back(std::move(w));
    }
    if (wm.items_.size() > config.capacity) throw SchemaError("snapshot working memory exceeds capacity");
    return wm;
}

}  // namespace engram

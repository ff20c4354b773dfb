#include "engram/gateway.hpp"

#include <cmath>

namespace engram {

double topic_overlap(const NodeSet& concepts, const NodeSet& topic) {
    if (concepts.empty()) return 0.0;
    std::size_t shared = 0;
    for (NodeId c : concepts) shared += topic.contains(c) ? 1 : 0;
    return static_cast<double>(shared) / static_cast<double>(concepts.size());
}

ThalamicGateway::ThalamicGateway(GateConfig config, TrustTable trust, Lexicon affect, Lexicon urgency,
                                 std::vector<std::string> goal_labels)
    : config_(config),
      trust_(std::move(trust)),
      affect_(std::move(affect)),
      urgency_(std::move(urgency)),
      goal_labels_(std::move(goal_labels)) {
    if (config_.identity_discount >= config_.channel_threshold)
        throw ValidationError("identity discount must stay below the channel threshold");
}

bool ThalamicGateway::passes(const SalienceTag& tag, bool identity_relevant, double threshold) const {
    if (tag.aggregate() >= threshold) return true;
    if (!identity_relevant) return false;
    const double lowered = threshold - config_.identity_discount;
    return tag.thematic >= lowered || tag.goal >= lowered;
}

TagResult ThalamicGateway::tag(const Segment& segment, std::span<const WMItem> wm,
                               const std::vector<std::pair<NodeId, ValenceVector>>& identity_gists,
                               const MemoryGraph& graph, const NodeSet& active_topic,
                               const NodeSet& pursued) const {
    if (segment.text.empty()) throw ValidationError("segment text must be nonempty");
    TagResult out;
    const auto tokens = tokenize(segment.text);
    out.work = tokens.size() + wm.size();

    std::size_t known = 0;
    for (const auto& label : segment.concept_labels) {
        ++out.work;
        if (auto id = graph.find_concept(label)) {
            out.known_concepts.insert(*id);
            ++known;
        }
    }
    const std::size_t mentioned = segment.concept_labels.size();

    SalienceTag& t = out.tag;
    t.thematic = topic_overlap(out.known_concepts, active_topic);

    const double lexical = affect_.strongest(tokens);
    out.valence = lexical;
    t.emotional = clamp01(std::max(segment.affect, std::abs(lexical)));
    t.urgency = clamp01(std::abs(urgency_.strongest(tokens)));
    t.novelty = mentioned == 0 ? 0.0 : static_cast<double>(mentioned - known) / static_cast<double>(mentioned);

    if (auto it = trust_.sources.find(segment.source); it != trust_.sources.end()) {
        t.trust = it->second;
    } else {
        t.trust = trust_.unknown;
        out.unknown_source = true;
    }

    if ((!goal_labels_.empty() || !pursued.empty()) && mentioned > 0) {
        std::size_t hits = 0;
        for (const auto& label : segment.concept_labels) {
            auto id = graph.find_concept(label);
            const bool hit = std::find(goal_labels_.begin(), goal_labels_.end(), label) != goal_labels_.end() ||
                             (id && pursued.contains(*id));
            hits += hit ? 1 : 0;
        }
        t.goal = static_cast<double>(hits) / static_cast<double>(mentioned);
    }

    for (const auto& [node, gist] : identity_gists) {
        ++out.work;
        if (out.known_concepts.contains(node)) out.identity_relevant = true;
        for (const auto& a : gist.associative) {
            if (a.target != kSelfId && out.known_concepts.contains(a.target)) out.identity_relevant = true;
        }
    }
    return out;
}

std::vector<std::pair<ItemId, SalienceTag>> ThalamicGateway::emotional_amplify(std::span<const WMItem> wm,
                                                                               const SalienceTag& trigger) const {
    std::vector<std::pair<ItemId, SalienceTag>> out;
    if (trigger.emotional < config_.channel_threshold) return out;
    const double boost = config_.amplify_factor * trigger.emotional;
    for (const auto& item : wm) {
        SalienceTag t = item.tag;
        t.emotional = std::min(1.0, t.emotional + boost);
        out.emplace_back(item.item_id, t);
    }
    return out;
}

std::vector<Injection> ThalamicGateway::gate_inbound(const ActivationMap& activation, const MemoryGraph& graph) const {
    std::vector<Injection> out;
    for (const auto& [id, a] : activation) {
        if (a < config_.inbound_activation_threshold || !graph.is_concept(id)) continue;
        if (auto gist = graph.gist_lookup(id)) out.push_back({id, std::move(*gist), a});
    }
    std::stable_sort(out.begin(), out.end(), [](const Injection& x, const Injection& y) {
        if (x.activation != y.activation) return x.activation > y.activation;
        return x.node < y.node;
    });
    return out;
}

std::vector<ItemId> ThalamicGateway::gate_outbound(std::span<const WMItem> wm) const {
    std::vector<ItemId> out;
    for (const auto& item : wm) {
        if (item.persisted || item.kind != ItemKind::segment) continue;
        if (passes(item.tag, item.identity_relevant, config_.promotion_threshold)) out.push_back(item.item_id);
    }
    return out;
}

std::vector<ItemId> ThalamicGateway::displace(std::span<const WMItem> wm, const NodeSet& active_topic) const {
    NodeSet topic = active_topic;
    topic.insert(kSelfId);
    std::vector<ItemId> out;
    for (const auto& item : wm) {
        SalienceTag t = item.tag;
        t.thematic = topic_overlap(item.concept_refs, topic);
        if (t.thematic < config_.displace_thematic && !passes(t, item.identity_relevant, config_.channel_threshold)) {
            out.push_back(item.item_id);
        }
    }
    return out;
}

double ThalamicGateway::surprise(const NodeSet& segment_concepts, std::span<const WMItem> wm) {
    if (segment_concepts.empty()) return 0.0;
    NodeSet present;
    for (const auto& item : wm) present.insert(item.concept_refs.begin(), item.concept_refs.end());
    std::size_t shared = 0;
    for (NodeId c : segment_concepts) shared += present.contains(c) ? 1 : 0;
    return 1.0 - static_cast<double>(shared) / static_cast<double>(std::max<std::size_t>(1, segment_concepts.size()));
}

std::optional<SegmentBoundary> ThalamicGateway::detect_boundary(const NodeSet& segment_concepts,
                                                                std::span<const WMItem> wm, std::int64_t turn) const {
    const double s = surprise(segment_concepts, wm);
    if (s >= config_.boundary_threshold) return SegmentBoundary{turn, s};
    return std::nullopt;
}

}  // namespace engram

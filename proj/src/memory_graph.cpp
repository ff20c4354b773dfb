#include "engram/memory_graph.hpp"

#include "engram/serialization.hpp"

#include <cmath>
#include <queue>
#include <sstream>

namespace engram {

using nlohmann::json;

std::string to_string(GistSource s) {
    switch (s) {
        case GistSource::investigation: return "investigation";
        case GistSource::catharsis: return "catharsis";
        case GistSource::passive: return "passive";
    }
    return "investigation";
}

GistSource gist_source_from_string(const std::string& s) {
    if (s == "investigation") return GistSource::investigation;
    if (s == "catharsis") return GistSource::catharsis;
    if (s == "passive") return GistSource::passive;
    throw SchemaError("unknown gist source '" + s + "'");
}

MemoryGraph::MemoryGraph(GraphConfig config)
    : config_(config), lookup_ops_(std::make_unique<std::atomic<std::uint64_t>>(0)) {
    const NodeId self = next_id();
    concepts_.emplace(self, ConceptNode{self, kSelfLabel, std::nullopt, 0.0, 0, -1});
    rebuild_indexes();
}

MemoryGraph::MemoryGraph(const MemoryGraph& other)
    : config_(other.config_),
      next_id_(other.next_id_),
      next_edge_seq_(other.next_edge_seq_),
      concepts_(other.concepts_),
      episodes_(other.episodes_),
      edges_(other.edges_),
      audit_(other.audit_),
      lookup_ops_(std::make_unique<std::atomic<std::uint64_t>>(other.lookup_ops())) {
    rebuild_indexes();
}

MemoryGraph& MemoryGraph::operator=(const MemoryGraph& other) {
    if (this != &other) {
        MemoryGraph copy(other);
        *this = std::move(copy);
    }
    return *this;
}

MemoryGraph::MemoryGraph(MemoryGraph&&) noexcept = default;
MemoryGraph& MemoryGraph::operator=(MemoryGraph&&) noexcept = default;
MemoryGraph::~MemoryGraph() = default;

void MemoryGraph::rebuild_indexes() {
    concept_index_.clear();
    labels_.clear();
    edge_index_.clear();
    concept_adj_.clear();
    episode_adj_.clear();
    compress_queue_.clear();
    identity_nodes_.clear();
    for (auto& [id, node] : concepts_) {
        concept_index_[id] = &node;
        labels_[node.label] = id;
    }
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        edge_index_[key(e.src, e.dst)] = i;
        const bool concept_edge = concepts_.contains(e.src) && concepts_.contains(e.dst);
        auto& adj = concept_edge ? concept_adj_ : episode_adj_;
        adj[e.src].push_back({e.dst, i});
        adj[e.dst].push_back({e.src, i});
    }
    for (const auto& [id, ep] : episodes_) {
        if (!ep.degraded) compress_queue_.emplace(ep.turn, id);
    }
    for (const auto& [id, node] : concepts_) {
        if (is_identity_gist(id)) identity_nodes_.insert(id);
    }
}

void MemoryGraph::require(NodeId id) const {
    if (!contains(id)) throw NotFoundError("unknown node " + id.to_string());
}

bool MemoryGraph::contains(NodeId id) const { return concepts_.contains(id) || episodes_.contains(id); }

void MemoryGraph::journal(const json& entry) {
    if (journal_) journal_->append(entry.dump());
}

// ---------------------------------------------------------------------------
// Mutation
// ---------------------------------------------------------------------------

NodeId MemoryGraph::add_concept(const std::string& label, std::int64_t turn) {
    if (label.empty()) throw ValidationError("concept label must be nonempty");
    if (auto it = labels_.find(label); it != labels_.end()) return it->second;
    const NodeId id = next_id();
    auto [it, _] = concepts_.emplace(id, ConceptNode{id, label, std::nullopt, 0.0, turn, -1});
    concept_index_[id] = &it->second;
    labels_[label] = id;
    journal({{"op", "add_concept"}, {"turn", turn}, {"label", label}});
    return id;
}

std::size_t MemoryGraph::insert_edge(NodeId a, NodeId b, double weight, std::int64_t turn) {
    const auto k = key(a, b);
    const std::size_t idx = edges_.size();
    edges_.push_back({next_edge_seq_++, k.first, k.second, weight, turn});
    edge_index_[k] = idx;
    const bool concept_edge = concepts_.contains(a) && concepts_.contains(b);
    auto& adj = concept_edge ? concept_adj_ : episode_adj_;
    adj[k.first].push_back({k.second, idx});
    adj[k.second].push_back({k.first, idx});
    return idx;
}

std::size_t MemoryGraph::bump_edge(NodeId a, NodeId b, double initial, double increment, std::int64_t turn) {
    if (auto it = edge_index_.find(key(a, b)); it != edge_index_.end()) {
        auto& e = edges_[it->second];
        e.weight = std::min(1.0, e.weight + increment);
        e.last_reinforced_turn = turn;
        return it->second;
    }
    return insert_edge(a, b, initial, turn);
}

NodeId MemoryGraph::add_episode(const std::string& content, const std::vector<NodeId>& concept_refs,
                                const SalienceTag& tag, std::int64_t turn, std::optional<Fact> fact) {
    if (concept_refs.empty()) throw ValidationError("episode needs at least one concept");
    if (!tag.valid()) throw ValidationError("salience tag channel outside [0,1]");
    for (NodeId c : concept_refs) {
        if (!is_concept(c)) throw NotFoundError("unknown concept " + c.to_string());
    }
    std::vector<NodeId> refs;
    for (NodeId c : concept_refs) {
        if (std::find(refs.begin(), refs.end(), c) == refs.end()) refs.push_back(c);
    }

    const NodeId id = next_id();
    episodes_.emplace(id, EpisodeNode{id, content, refs, tag, turn, false, fact});
    compress_queue_.emplace(turn, id);

    // enrichment-primary: every co-mentioned pair gains or strengthens an edge
    for (std::size_t i = 0; i < refs.size(); ++i) {
        for (std::size_t j = i + 1; j < refs.size(); ++j) {
            bump_edge(refs[i], refs[j], config_.w_init, config_.reinforce, turn);
        }
    }
    const double link = std::max(0.01, tag.aggregate());
    for (NodeId c : refs) insert_edge(c, id, link, turn);

    json j{{"op", "add_episode"}, {"turn", turn}, {"content", content}, {"concepts", refs}, {"tag", tag}};
    if (fact) j["fact"] = *fact;
    journal(j);
    return id;
}

void MemoryGraph::connect(NodeId a, NodeId b, double weight, std::int64_t turn) {
    require(a);
    require(b);
    if (a == b) throw ValidationError("self-loops are not allowed");
    if (!(weight > 0.0 && weight <= 1.0)) throw ValidationError("edge weight outside (0,1]");
    if (auto it = edge_index_.find(key(a, b)); it != edge_index_.end()) {
        auto& e = edges_[it->second];
        e.weight = std::max(e.weight, weight);
        e.last_reinforced_turn = turn;
    } else {
        insert_edge(a, b, weight, turn);
    }
    journal({{"op", "connect"}, {"turn", turn}, {"a", a}, {"b", b}, {"weight", weight}});
}

std::size_t MemoryGraph::compress_tick(std::int64_t now) {
    std::size_t degraded = 0;
    while (!compress_queue_.empty() && now - compress_queue_.begin()->first > config_.compress_age) {
        const NodeId id = compress_queue_.begin()->second;
        compress_queue_.erase(compress_queue_.begin());
        auto& ep = episodes_.at(id);
        if (ep.degraded) continue;
        std::string labels;
        for (NodeId c : ep.concept_refs) {
            if (!labels.empty()) labels += ",";
            labels += concepts_.at(c).label;
        }
        ep.content = "[digest " + labels + " #" + content_hash(ep.content) + "]";
        ep.fact.reset();
        ep.degraded = true;
        ++degraded;
    }
    if (degraded > 0) journal({{"op", "compress"}, {"turn", now}});
    return degraded;
}

void MemoryGraph::reconsolidate(NodeId id, std::span<const NodeId> retrieval_seeds, bool window_closed_without_update,
                                std::int64_t turn) {
    require(id);
    if (!window_closed_without_update) return;
    std::vector<NodeId> touched;
    for (NodeId seed : retrieval_seeds) {
        if (seed == id) continue;
        auto it = edge_index_.find(key(id, seed));
        if (it == edge_index_.end()) continue;
        auto& e = edges_[it->second];
        e.weight = std::min(1.0, e.weight + config_.testing_effect);
        e.last_reinforced_turn = turn;
        touched.push_back(seed);
    }
    if (!touched.empty()) journal({{"op", "reconsolidate"}, {"turn", turn}, {"node", id}, {"seeds", touched}});
}

void MemoryGraph::write_gist(const GistWriteKey&, NodeId id, const ValenceVector& gist, double weight,
                             std::int64_t turn, GistSource source, std::uint64_t ref) {
    if (!is_concept(id)) throw NotFoundError("unknown concept " + id.to_string());
    if (!in_unit(weight)) throw ValidationError("gist weight outside [0,1]");
    validate(gist, config_.k_assoc);
    store_gist(id, gist, weight, turn, source, ref);
    journal({{"op", "write_gist"},
             {"turn", turn},
             {"node", id},
             {"gist", gist},
             {"weight", weight},
             {"source", to_string(source)},
             {"ref", ref}});
}

void MemoryGraph::store_gist(NodeId id, const ValenceVector& gist, double weight, std::int64_t turn,
                             GistSource source, std::uint64_t ref) {
    auto& node = *concept_index_.at(id);
    const bool was_identity = is_identity_gist(id);
    node.gist = gist;
    node.weight = weight;
    node.gist_turn = turn;
    audit_.push_back({id, turn, source, ref});

    if (id != kSelfId && gist.references_self()) {
        if (weight >= config_.w_core) {
            if (auto it = edge_index_.find(key(kSelfId, id)); it != edge_index_.end()) {
                edges_[it->second].weight = 1.0;
                edges_[it->second].last_reinforced_turn = turn;
            } else {
                insert_edge(kSelfId, id, 1.0, turn);
            }
        } else if (was_identity) {
            // demoted core belief: the SELF link drops to the gist weight
            auto& e = edges_[edge_index_.at(key(kSelfId, id))];
            e.weight = std::max(0.01, weight);
            e.last_reinforced_turn = turn;
        }
    }
    if (is_identity_gist(id)) {
        identity_nodes_.insert(id);
    } else {
        identity_nodes_.erase(id);
    }
}

// ---------------------------------------------------------------------------
// Reads
// ---------------------------------------------------------------------------

std::optional<ValenceVector> MemoryGraph::gist_lookup(NodeId id) const {
    lookup_ops_->fetch_add(1, std::memory_order_relaxed);
    auto it = concept_index_.find(id);
    if (it == concept_index_.end()) {
        if (episodes_.contains(id)) return std::nullopt;
        throw NotFoundError("unknown node " + id.to_string());
    }
    return it->second->gist;
}

ActivationMap MemoryGraph::spread_activation(const std::map<NodeId, double>& seeds) const {
    return spread_activation(seeds, config_.spread_decay, config_.hop_limit, config_.activation_floor);
}

ActivationMap MemoryGraph::spread_activation(const std::map<NodeId, double>& seeds, double decay, int hop_limit,
                                             double floor) const {
    if (seeds.empty()) throw ValidationError("spread_activation needs at least one seed");
    if (!(decay > 0.0 && decay <= 1.0)) throw ValidationError("decay outside (0,1]");
    for (const auto& [id, a] : seeds) {
        if (!(a > 0.0 && a <= 1.0)) throw ValidationError("seed activation outside (0,1]");
        if (!is_concept(id)) throw NotFoundError("unknown seed concept " + id.to_string());
    }

    std::unordered_map<NodeId, double, NodeIdHash> acc;
    std::vector<NodeId> path;
    path.reserve(static_cast<std::size_t>(std::max(hop_limit, 0)) + 1);

    // Depth-first enumeration of simple paths; every path of length <= hop_limit
    // contributes seed * prod(weights) * decay^length to its endpoint.
    auto walk = [&](auto&& self, NodeId node, double carried, int depth) -> void {
        if (depth >= hop_limit) return;
        auto it = concept_adj_.find(node);
        if (it == concept_adj_.end()) return;
        for (const Adjacent& adj : it->second) {
            if (std::find(path.begin(), path.end(), adj.other) != path.end()) continue;
            const double value = carried * edges_[adj.edge].weight * decay;
            if (!seeds.contains(adj.other)) acc[adj.other] += value;
            path.push_back(adj.other);
            self(self, adj.other, value, depth + 1);
            path.pop_back();
        }
    };
    for (const auto& [seed, a] : seeds) {
        path.assign(1, seed);
        walk(walk, seed, a, 0);
    }

    ActivationMap out;
    for (const auto& [id, a] : seeds) {
        if (a >= floor) out.emplace(id, a);
    }
    for (const auto& [id, a] : acc) {
        const double v = std::min(1.0, a);
        if (v >= floor) out.emplace(id, v);
    }
    return out;
}

std::vector<SearchHit> MemoryGraph::deliberate_search(std::span<const NodeId> query_concepts, std::size_t budget,
                                                      CostMeter& meter) const {
    if (budget == 0) throw ValidationError("search budget must be positive");
    struct Entry {
        double score;
        NodeId id;
        bool operator<(const Entry& o) const {
            if (score != o.score) return score < o.score;
            return id > o.id;  // lower id first among equal scores
        }
    };
    std::priority_queue<Entry> frontier;
    std::unordered_map<NodeId, double, NodeIdHash> best;
    for (NodeId q : query_concepts) {
        if (!contains(q)) continue;
        best[q] = 1.0;
        frontier.push({1.0, q});
    }

    std::vector<SearchHit> hits;
    std::unordered_map<NodeId, bool, NodeIdHash> done;
    auto relax = [&](const std::vector<Adjacent>& adj, const Entry& cur) {
        for (const Adjacent& a : adj) {
            if (done.contains(a.other)) continue;
            const double s = cur.score * edges_[a.edge].weight;
            auto it = best.find(a.other);
            if (it == best.end() || s > it->second) {
                best[a.other] = s;
                frontier.push({s, a.other});
            }
        }
    };
    while (!frontier.empty() && hits.size() < budget) {
        const Entry cur = frontier.top();
        frontier.pop();
        if (done.contains(cur.id) || cur.score < best[cur.id]) continue;
        done[cur.id] = true;
        hits.push_back({cur.id, cur.score});
        ++meter.node_visits;
        if (auto it = concept_adj_.find(cur.id); it != concept_adj_.end()) relax(it->second, cur);
        if (auto it = episode_adj_.find(cur.id); it != episode_adj_.end()) relax(it->second, cur);
    }
    std::stable_sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return hits;
}

double MemoryGraph::local_density(NodeId id) const {
    require(id);
    double sum = 0.0;
    if (auto it = concept_adj_.find(id); it != concept_adj_.end()) {
        for (const Adjacent& a : it->second) sum += edges_[a.edge].weight;
    }
    return 1.0 - std::exp(-sum / config_.density_scale);
}

std::optional<NodeId> MemoryGraph::find_concept(const std::string& label) const {
    if (auto it = labels_.find(label); it != labels_.end()) return it->second;
    return std::nullopt;
}

const ConceptNode& MemoryGraph::concept_node(NodeId id) const {
    auto it = concept_index_.find(id);
    if (it == concept_index_.end()) throw NotFoundError("unknown concept " + id.to_string());
    return *it->second;
}

const EpisodeNode& MemoryGraph::episode(NodeId id) const {
    auto it = episodes_.find(id);
    if (it == episodes_.end()) throw NotFoundError("unknown episode " + id.to_string());
    return it->second;
}

std::optional<double> MemoryGraph::edge_weight(NodeId a, NodeId b) const {
    if (auto it = edge_index_.find(key(a, b)); it != edge_index_.end()) return edges_[it->second].weight;
    return std::nullopt;
}

std::vector<std::pair<NodeId, double>> MemoryGraph::neighbors(NodeId id) const {
    require(id);
    std::vector<std::pair<NodeId, double>> out;
    for (const auto* adj : {&concept_adj_, &episode_adj_}) {
        if (auto it = adj->find(id); it != adj->end()) {
            for (const Adjacent& a : it->second) out.emplace_back(a.other, edges_[a.edge].weight);
        }
    }
    return out;
}

std::vector<NodeId> MemoryGraph::linked_episodes(NodeId concept_id) const {
    std::vector<NodeId> out;
    if (auto it = episode_adj_.find(concept_id); it != episode_adj_.end()) {
        for (const Adjacent& a : it->second) {
            if (episodes_.contains(a.other)) out.push_back(a.other);
        }
    }
    return out;
}

std::size_t MemoryGraph::gist_count() const {
    return static_cast<std::size_t>(
        std::count_if(concepts_.begin(), concepts_.end(), [](const auto& kv) { return kv.second.gist.has_value(); }));
}

std::vector<NodeId> MemoryGraph::concept_ids() const {
    std::vector<NodeId> out;
    out.reserve(concepts_.size());
    for (const auto& [id, _] : concepts_) out.push_back(id);
    return out;
}

bool MemoryGraph::self_linked(NodeId id) const {
    auto it = concept_index_.find(id);
    if (it == concept_index_.end() || id == kSelfId || !it->second->gist) return false;
    return it->second->gist->references_self() && edge_index_.contains(key(kSelfId, id));
}

bool MemoryGraph::is_identity_gist(NodeId id) const {
    auto it = concept_index_.find(id);
    return self_linked(id) && it->second->weight >= config_.w_core;
}

std::vector<std::pair<NodeId, ValenceVector>> MemoryGraph::identity_gists() const {
    std::vector<std::pair<NodeId, ValenceVector>> out;
    for (NodeId id : identity_nodes_) out.emplace_back(id, *concept_index_.at(id)->gist);
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

json concept_json(const ConceptNode& c) {
    json j{{"id", c.id},
           {"label", c.label},
           {"weight", c.weight},
           {"created_turn", c.created_turn},
           {"gist_turn", c.gist_turn},
           {"gist", nullptr}};
    if (c.gist) j["gist"] = *c.gist;
    return j;
}

}  // namespace

json MemoryGraph::to_json() const {
    json concepts = json::array();
    for (const auto& [_, c] : concepts_) concepts.push_back(concept_json(c));
    json episodes = json::array();
    for (const auto& [_, e] : episodes_) {
        json j{{"id", e.id},   {"content", e.content},   {"concepts", e.concept_refs}, {"tag", e.tag},
               {"turn", e.turn}, {"degraded", e.degraded}, {"fact", nullptr}};
        if (e.fact) j["fact"] = *e.fact;
        episodes.push_back(std::move(j));
    }
    json edges = json::array();
    for (const auto& e : edges_) {
        edges.push_back({{"seq", e.seq}, {"src", e.src}, {"dst", e.dst}, {"weight", e.weight},
                         {"last_reinforced_turn", e.last_reinforced_turn}});
    }
    json audit = json::array();
    for (const auto& a : audit_) {
        audit.push_back({{"node", a.node}, {"turn", a.turn}, {"source", to_string(a.source)}, {"ref", a.ref}});
    }
    return json{{"v", 1},
                {"next_id", next_id_},
                {"next_edge_seq", next_edge_seq_},
                {"concepts", concepts},
                {"episodes", episodes},
                {"edges", edges},
                {"audit", audit}};
}

MemoryGraph MemoryGraph::from_json(const json& doc, GraphConfig config) {
    if (field<int>(doc, "v") != 1) throw VersionError("unsupported graph snapshot version");
    MemoryGraph g(config);
    g.concepts_.clear();
    g.next_id_ = field<std::uint64_t>(doc, "next_id");
    g.next_edge_seq_ = field<std::uint64_t>(doc, "next_edge_seq");
    for (const auto& c : field<json>(doc, "concepts")) {
        ConceptNode node;
        node.id = field<NodeId>(c, "id");
        node.label = field<std::string>(c, "label");
        node.weight = field<double>(c, "weight");
        node.created_turn = field<std::int64_t>(c, "created_turn");
        node.gist_turn = field<std::int64_t>(c, "gist_turn");
        if (!field<json>(c, "gist").is_null()) node.gist = field<ValenceVector>(c, "gist");
        if (node.label.empty()) throw SchemaError("concept with empty label");
        g.concepts_.emplace(node.id, std::move(node));
    }
    if (!g.concepts_.contains(kSelfId) || g.concepts_.at(kSelfId).label != kSelfLabel)
        throw SchemaError("snapshot lacks the SELF concept");
    for (const auto& e : field<json>(doc, "episodes")) {
        EpisodeNode ep;
        ep.id = field<NodeId>(e, "id");
        ep.content = field<std::string>(e, "content");
        ep.concept_refs = field<std::vector<NodeId>>(e, "concepts");
        ep.tag = field<SalienceTag>(e, "tag");
        ep.turn = field<std::int64_t>(e, "turn");
        ep.degraded = field<bool>(e, "degraded");
        if (!field<json>(e, "fact").is_null()) ep.fact = field<Fact>(e, "fact");
        g.episodes_.emplace(ep.id, std::move(ep));
    }
    for (const auto& e : field<json>(doc, "edges")) {
        AssociativeEdge edge;
        edge.seq = field<std::uint64_t>(e, "seq");
        edge.src = field<NodeId>(e, "src");
        edge.dst = field<NodeId>(e, "dst");
        edge.weight = field<double>(e, "weight");
        edge.last_reinforced_turn = field<std::int64_t>(e, "last_reinforced_turn");
        if (!g.contains(edge.src) || !g.contains(edge.dst)) throw SchemaError("edge references unknown node");
        g.edges_.push_back(edge);
    }
    std::sort(g.edges_.begin(), g.edges_.end(),
              [](const AssociativeEdge& a, const AssociativeEdge& b) { return a.seq < b.seq; });
    for (const auto& a : field<json>(doc, "audit")) {
        g.audit_.push_back({field<NodeId>(a, "node"), field<std::int64_t>(a, "turn"),
                            gist_source_from_string(field<std::string>(a, "source")),
                            field<std::uint64_t>(a, "ref")});
    }
    g.rebuild_indexes();
    return g;
}

std::string MemoryGraph::serialize_concept(NodeId id) const { return concept_json(concept_node(id)).dump(); }

void MemoryGraph::apply_journal_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("journal line: ") + e.what());
    }
    const auto op = field<std::string>(j, "op");
    const auto turn = field<std::int64_t>(j, "turn");
    if (op == "add_concept") {
        add_concept(field<std::string>(j, "label"), turn);
    } else if (op == "add_episode") {
        std::optional<Fact> fact;
        if (j.contains("fact")) fact = j["fact"].get<Fact>();
        add_episode(field<std::string>(j, "content"), field<std::vector<NodeId>>(j, "concepts"),
                    field<SalienceTag>(j, "tag"), turn, fact);
    } else if (op == "connect") {
        connect(field<NodeId>(j, "a"), field<NodeId>(j, "b"), field<double>(j, "weight"), turn);
    } else if (op == "compress") {
        compress_tick(turn);
    } else if (op == "reconsolidate") {
        const auto seeds = field<std::vector<NodeId>>(j, "seeds");
        reconsolidate(field<NodeId>(j, "node"), seeds, true, turn);
    } else if (op == "write_gist") {
        const NodeId id = field<NodeId>(j, "node");
        const auto gist = field<ValenceVector>(j, "gist");
        const double weight = field<double>(j, "weight");
        if (!is_concept(id)) throw NotFoundError("journal gist for unknown concept " + id.to_string());
        validate(gist, config_.k_assoc);
        store_gist(id, gist, weight, turn, gist_source_from_string(field<std::string>(j, "source")),
                   field<std::uint64_t>(j, "ref"));
        journal(j);
    } else {
        throw SchemaError("unknown journal op '" + op + "'");
    }
}

}  // namespace engram

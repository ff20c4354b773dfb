#include "engram/engine.hpp"

#include "engram/serialization.hpp"

#include <sstream>

namespace engram {

using nlohmann::json;

namespace {

Lexicon lexicon_from(const std::string& path, const char* bundled, double default_strength) {
    return path.empty() ? Lexicon::parse(bundled, default_strength) : Lexicon::load(path, default_strength);
}

std::vector<std::string> names(const std::vector<EscalationSignal>& signals) {
    std::vector<std::string> out;
    for (const auto& s : signals) out.push_back(to_string(s.reason));
    return out;
}

}  // namespace

std::string to_string(EventType t) {
    switch (t) {
        case EventType::utterance: return "utterance";
        case EventType::feedback: return "feedback";
        case EventType::query: return "query";
        case EventType::probe: return "probe";
        case EventType::ground_truth: return "ground_truth";
        case EventType::attack: return "attack";
    }
    return "utterance";
}

EventType event_type_from_string(const std::string& s) {
    static const std::pair<const char*, EventType> table[] = {
        {"utterance", EventType::utterance}, {"feedback", EventType::feedback},
        {"query", EventType::query},         {"probe", EventType::probe},
        {"ground_truth", EventType::ground_truth}, {"attack", EventType::attack}};
    for (const auto& [name, t] : table) {
        if (s == name) return t;
    }
    throw ValidationError("unknown event type '" + s + "'");
}

json MetricsRecord::to_json() const {
    return json{{"turn", turn},
                {"type", type},
                {"mode", mode},
                {"signals", signals},
                {"wm_size", wm_size},
                {"injections", injections},
                {"suppressed", suppressed},
                {"displacements", displacements},
                {"evictions", evictions},
                {"node_visits", node_visits},
                {"policy_calls", policy_calls},
                {"cost", cost},
                {"verdict", verdict},
                {"confidence", confidence},
                {"qualified", qualified},
                {"response", response},
                {"asserted", asserted},
                {"asserted_false", asserted_false},
                {"rejected", rejected},
                {"boundary", boundary},
                {"primed", primed},
                {"identity_in_wm", identity_in_wm},
                {"tag_work", tag_work},
                {"tokens", tokens},
                {"gist_events", gist_events},
                {"thoughts", thoughts}};
}

MetricsRecord MetricsRecord::from_json(const json& j) {
    MetricsRecord r;
    r.turn = field<std::int64_t>(j, "turn");
    r.type = field<std::string>(j, "type");
    r.mode = field<std::string>(j, "mode");
    r.signals = field<std::vector<std::string>>(j, "signals");
    r.wm_size = field<std::size_t>(j, "wm_size");
    r.injections = field<std::size_t>(j, "injections");
    r.suppressed = field<std::size_t>(j, "suppressed");
    r.displacements = field<std::size_t>(j, "displacements");
    r.evictions = field<std::size_t>(j, "evictions");
    r.node_visits = field<std::uint64_t>(j, "node_visits");
    r.policy_calls = field<std::uint64_t>(j, "policy_calls");
    r.cost = field<std::uint64_t>(j, "cost");
    r.verdict = field<std::string>(j, "verdict");
    r.confidence = field<double>(j, "confidence");
    r.qualified = field<bool>(j, "qualified");
    r.response = field<std::string>(j, "response");
    r.asserted = field<std::vector<Fact>>(j, "asserted");
    r.asserted_false = field<bool>(j, "asserted_false");
    r.rejected = field<bool>(j, "rejected");
    r.boundary = field<bool>(j, "boundary");
    r.primed = field<bool>(j, "primed");
    r.identity_in_wm = field<bool>(j, "identity_in_wm");
    r.tag_work = field<std::size_t>(j, "tag_work");
    r.tokens = field<std::size_t>(j, "tokens");
    r.gist_events = field<std::vector<std::string>>(j, "gist_events");
    r.thoughts = field<std::vector<std::string>>(j, "thoughts");
    return r;
}

FileJournal::FileJournal(const std::string& path) : out_(path, std::ios::app) {
    if (!out_) throw NotFoundError("cannot open journal '" + path + "'");
}

void FileJournal::append(const std::string& line) { out_ << line << '\n' << std::flush; }

// ---------------------------------------------------------------------------

Engine::Engine(EngineConfig config, ExecutivePolicy* policy)
    : config_(std::move(config)), graph_(config_.graph), wm_(config_.wm) {
    if (policy) {
        policy_ = policy;
    } else {
        owned_policy_ = std::make_unique<ScriptedPolicy>();
        policy_ = owned_policy_.get();
    }
    gateway_ = std::make_unique<ThalamicGateway>(
        config_.gateway, config_.trust, lexicon_from(config_.paths.affect_lexicon, bundled_affect_lexicon(), 0.8),
        lexicon_from(config_.paths.urgency_lexicon, bundled_urgency_lexicon(), 1.0), config_.goals);
    executive_ = std::make_unique<Executive>(
        config_.executive, *policy_, lexicon_from(config_.paths.override_lexicon, bundled_override_lexicon(), 1.0));
    if (!config_.paths.journal.empty()) {
        journal_ = std::make_unique<FileJournal>(config_.paths.journal);
        graph_.set_journal(journal_.get());
    }
}

bool Engine::gist_in_wm(const std::string& label) const {
    auto id = graph_.find_concept(label);
    return id && wm_.find_gist(*id) != nullptr;
}

SalienceTag Engine::injection_tag(NodeId node, const ValenceVector& gist) const {
    SalienceTag t;
    // relevance: 1 when the node is on topic, else its strongest direct tie to the topic
    if (topic_.contains(node)) {
        t.thematic = 1.0;
    } else {
        for (NodeId c : topic_) {
            if (auto w = graph_.edge_weight(node, c)) t.thematic = std::max(t.thematic, *w);
        }
    }
    t.emotional = gist.emotional.arousal;
    t.trust = 0.5;
    return t;
}

void Engine::inject(const ActivationMap& activation, MetricsRecord& rec, CostMeter& meter) {
    for (const auto& inj : gateway_->gate_inbound(activation, graph_)) {
        const SalienceTag tag = injection_tag(inj.node, inj.gist);
        if (executive_->override_injection(inj, tag, graph_, config_.gateway.channel_threshold, meter) ==
            InjectionDecision::suppress) {
            ++rec.suppressed;
            continue;
        }
        ++rec.injections;
        if (const WMItem* present = wm_.find_gist(inj.node)) {
            wm_.set_tag(present->item_id, tag);
            wm_.set_activation(present->item_id, std::max(present->activation, inj.activation));
            continue;
        }
        WMItem item;
        item.item_id = wm_.next_item_id();
        item.kind = ItemKind::gist;
        item.node = inj.node;
        item.text = "gist:" + graph_.concept_node(inj.node).label;
        item.source = "memory";
        item.concept_refs = {inj.node};
        if (graph_.self_linked(inj.node)) item.concept_refs.insert(kSelfId);
        item.tag = tag;
        item.valence = inj.gist.emotional.valence;
        item.activation = inj.activation;
        item.entry_turn = last_turn_;
        item.persisted = true;
        item.identity_relevant = graph_.is_identity_gist(inj.node);
        rec.evictions += wm_.insert(std::move(item)).size();
    }
}

void Engine::finish(MetricsRecord& rec, const CostMeter& meter) {
    rec.wm_size = wm_.size();
    rec.node_visits = meter.node_visits;
    rec.policy_calls = meter.policy_calls;
    rec.cost = meter.total();
    for (const auto& item : wm_.items()) {
        if (item.kind == ItemKind::gist && item.node && graph_.is_identity_gist(*item.node)) rec.identity_in_wm = true;
    }
}

MetricsRecord Engine::process(const ScenarioEvent& event) {
    if (event.turn < last_turn_) throw ValidationError("event turns must be non-decreasing");
    last_turn_ = event.turn;
    if (event.type == EventType::ground_truth) {
        MetricsRecord rec;
        rec.turn = event.turn;
        rec.type = to_string(event.type);
        rec.mode = "-";
        rec.verdict = "-";
        rec.wm_size = wm_.size();
        return rec;
    }
    return event.is_content() ? process_content(event) : process_query(event);
}

MetricsRecord Engine::process_content(const ScenarioEvent& event) {
    const std::int64_t turn = event.turn;
    MetricsRecord rec;
    rec.turn = turn;
    rec.type = to_string(event.type);
    CostMeter meter;

    const Segment seg{event.text, event.source, event.concepts, event.affect};
    const TagResult tagged = gateway_->tag(seg, wm_.items(), graph_.identity_gists(), graph_, topic_, executive_->pursued());
    rec.tag_work = tagged.work;
    rec.tokens = tokenize(event.text).size();

    if (executive_->reject_injection_attack(event.text, tagged.known_concepts, tagged.tag, graph_) ==
        AttackDecision::reject) {
        rec.rejected = true;
        rec.mode = "-";
        rec.verdict = "-";
        finish(rec, meter);
        return rec;
    }

    NodeSet concepts;
    std::vector<NodeId> ordered;
    for (const auto& label : event.concepts) {
        const NodeId id = graph_.add_concept(label, turn);
        if (concepts.insert(id).second) ordered.push_back(id);
    }
    rec.boundary = gateway_->detect_boundary(concepts, wm_.items(), turn).has_value();
    topic_ = concepts;
    topic_.insert(kSelfId);

    for (const auto& [id, t] : gateway_->emotional_amplify(wm_.items(), tagged.tag)) wm_.set_tag(id, t);
    wm_.tick(topic_);
    if (rec.boundary) rec.displacements = wm_.remove(gateway_->displace(wm_.items(), topic_)).size();

    WMItem item;
    item.item_id = wm_.next_item_id();
    item.kind = ItemKind::segment;
    item.text = event.text;
    item.source = event.source;
    item.concept_refs = concepts;
    item.tag = tagged.tag;
    item.valence = tagged.valence;
    item.entry_turn = turn;
    item.identity_relevant = tagged.identity_relevant;
    item.fact = event.fact;
    rec.evictions += wm_.insert(std::move(item)).size();

    // promotion, including older items whose tags were amplified this turn
    struct Promoted {
        NodeId episode;
        SalienceTag tag;
        double valence;
        std::string source;
        NodeSet concepts;
    };
    std::vector<Promoted> promoted;
    for (ItemId id : gateway_->gate_outbound(wm_.items())) {
        const WMItem& w = *wm_.find(id);
        const NodeId ep = graph_.add_episode(w.text, std::vector<NodeId>(w.concept_refs.begin(), w.concept_refs.end()),
                                             w.tag, turn, w.fact);
        promoted.push_back({ep, w.tag, w.valence, w.source, w.concept_refs});
        wm_.mark_persisted(id, ep);
    }

    std::map<NodeId, double> seeds;
    for (NodeId c : topic_) seeds[c] = 1.0;
    inject(graph_.spread_activation(seeds), rec, meter);

    NodeSet catharsis_nodes;
    for (auto& ev : executive_->detect_catharsis(wm_, graph_, meter)) {
        const std::string label = graph_.concept_node(ev.gist_node).label;
        if (ev.fired) {
            executive_->apply_cathartic_update(ev, wm_, graph_, meter, turn);
            catharsis_nodes.insert(ev.gist_node);
            std::ostringstream s;
            s << "catharsis:" << label << ":precision=" << ev.new_precision;
            rec.gist_events.push_back(s.str());
        } else {
            rec.gist_events.push_back("resisted:" + label);
        }
    }

    for (const auto& p : promoted) {
        for (NodeId c : p.concepts) {
            if (c == kSelfId) continue;
            if (executive_->config().formation == FormationMode::passive) {
                if (!graph_.concept_node(c).gist && p.tag.aggregate() >= executive_->config().open_salience) {
                    executive_->form_passively(c, p.episode, p.valence, graph_, turn);
                    rec.gist_events.push_back("formed_passive:" + graph_.concept_node(c).label);
                }
                continue;
            }
            auto inv = executive_->open_investigation_for(c);
            if (!inv) {
                inv = executive_->maybe_open_investigation(p.tag, c, graph_, turn);
                if (!inv) continue;
                rec.gist_events.push_back("opened:" + graph_.concept_node(c).label);
            }
            const Investigation& after =
                executive_->step_investigation(*inv, p.episode, p.valence, p.source, graph_, meter, turn);
            if (after.status == InvestigationStatus::closed_gist) {
                rec.gist_events.push_back("formed:" + graph_.concept_node(c).label);
            } else if (after.status == InvestigationStatus::aborted) {
                rec.gist_events.push_back(after.end_reason + ":" + graph_.concept_node(c).label);
            }
        }
    }

    std::vector<std::optional<NodeId>> query(ordered.begin(), ordered.end());
    const RouteDecision r = route(query, tagged.tag.novelty, event.stakes, event.type == EventType::feedback, graph_,
                                  executive_->config());
    AnswerRequest req{PolicyQuery{event.text, event.concepts, std::nullopt}, ordered, r};
    const AnswerResult ans = executive_->answer(req, wm_, graph_, meter);
    rec.mode = to_string(ans.mode);
    rec.signals = names(r.signals);
    rec.verdict = to_string(ans.verdict.state);
    rec.confidence = ans.verdict.confidence;
    rec.qualified = ans.qualified;
    rec.response = ans.response.text;
    rec.asserted = ans.response.asserted;
    rec.thoughts = ans.response.thoughts;
    if (ans.support && graph_.is_concept(*ans.support) && !catharsis_nodes.contains(*ans.support))
        graph_.reconsolidate(*ans.support, ordered, true, turn);

    graph_.compress_tick(turn);
    finish(rec, meter);
    return rec;
}

MetricsRecord Engine::process_query(const ScenarioEvent& event) {
    const std::int64_t turn = event.turn;
    MetricsRecord rec;
    rec.turn = turn;
    rec.type = to_string(event.type);
    CostMeter meter;

    std::optional<Fact> ask;
    if (event.fact) ask = Fact{event.fact->subject, event.fact->attribute, {}};
    if (ask) {
        rec.primed = gist_in_wm(ask->subject);
    } else {
        for (const auto& label : event.concepts) rec.primed |= gist_in_wm(label);
    }

    const Segment seg{event.text, event.source, event.concepts, event.affect};
    const TagResult tagged = gateway_->tag(seg, wm_.items(), graph_.identity_gists(), graph_, topic_, executive_->pursued());
    rec.tag_work = tagged.work;
    rec.tokens = tokenize(event.text).size();

    std::vector<std::optional<NodeId>> query;
    std::vector<NodeId> known;
    for (const auto& label : event.concepts) {
        auto id = graph_.find_concept(label);
        query.push_back(id);
        if (id && std::find(known.begin(), known.end(), *id) == known.end()) known.push_back(*id);
    }
    topic_ = NodeSet(known.begin(), known.end());
    topic_.insert(kSelfId);
    wm_.tick(topic_);

    std::map<NodeId, double> seeds;
    for (NodeId c : topic_) seeds[c] = 1.0;
    inject(graph_.spread_activation(seeds), rec, meter);

    const RouteDecision r = route(query, tagged.tag.novelty, event.stakes, false, graph_, executive_->config());
    AnswerRequest req{PolicyQuery{event.text, event.concepts, ask}, known, r};
    const AnswerResult ans = executive_->answer(req, wm_, graph_, meter);
    rec.mode = to_string(ans.mode);
    rec.signals = names(r.signals);
    rec.verdict = to_string(ans.verdict.state);
    rec.confidence = ans.verdict.confidence;
    rec.qualified = ans.qualified;
    rec.response = ans.response.text;
    rec.asserted = ans.response.asserted;
    rec.thoughts = ans.response.thoughts;
    if (ans.support && graph_.is_concept(*ans.support)) graph_.reconsolidate(*ans.support, known, true, turn);

    graph_.compress_tick(turn);
    finish(rec, meter);
    return rec;
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

json Engine::snapshot() const {
    return json{{"v", kSnapshotVersion},
                {"config", config_.to_json()},
                {"graph", graph_.to_json()},
                {"wm", wm_.to_json()},
                {"executive", executive_->to_json()},
                {"topic", topic_},
                {"last_turn", last_turn_}};
}

std::unique_ptr<Engine> Engine::restore(const json& doc, ExecutivePolicy* policy) {
    if (!doc.is_object() || !doc.contains("v")) throw SchemaError("missing field 'v'");
    const int v = field<int>(doc, "v");
    if (v != kSnapshotVersion)
        throw VersionError("snapshot version " + std::to_string(v) + " is not supported (expected " +
                           std::to_string(kSnapshotVersion) + ")");
    EngineConfig config = EngineConfig::from_json(field<json>(doc, "config"));
    // a restored engine must not append to whatever journal the original used
    config.paths.journal.clear();
    auto engine = std::make_unique<Engine>(config, policy);
    engine->graph_ = MemoryGraph::from_json(field<json>(doc, "graph"), config.graph);
    engine->wm_ = WorkingMemory::from_json(field<json>(doc, "wm"), config.wm);
    engine->executive_->load_json(field<json>(doc, "executive"));
    engine->topic_ = field<NodeSet>(doc, "topic");
    engine->last_turn_ = field<std::int64_t>(doc, "last_turn");
    return engine;
}

void Engine::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw NotFoundError("cannot write snapshot '" + path + "'");
    out << snapshot_string() << '\n';
}

std::unique_ptr<Engine> Engine::load(const std::string& path, ExecutivePolicy* policy) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open snapshot '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json doc;
    try {
        doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ParseError("snapshot '" + path + "': " + e.what());
    }
    return restore(doc, policy);
}

}  // namespace engram

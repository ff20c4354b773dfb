#include "engram/executive.hpp"

#include "engram/serialization.hpp"

#include <cmath>
#include <numeric>

namespace engram {

using nlohmann::json;

namespace {

constexpr const char* kSourcePrefix = "src:";

std::string consistency_name(Consistency c) {
    switch (c) {
        case Consistency::consistent: return "consistent";
        case Consistency::contradictory: return "contradictory";
        case Consistency::neutral: return "neutral";
    }
    return "neutral";
}

Consistency consistency_from(const std::string& s) {
    if (s == "consistent") return Consistency::consistent;
    if (s == "contradictory") return Consistency::contradictory;
    if (s == "neutral") return Consistency::neutral;
    throw SchemaError("unknown consistency '" + s + "'");
}

InvestigationStatus status_from(const std::string& s) {
    if (s == "open") return InvestigationStatus::open;
    if (s == "closed_gist") return InvestigationStatus::closed_gist;
    if (s == "aborted") return InvestigationStatus::aborted;
    throw SchemaError("unknown investigation status '" + s + "'");
}

double ratio(std::size_t consistent, std::size_t contradictory, double fallback) {
    if (consistent + contradictory == 0) return fallback;
    return static_cast<double>(consistent) / static_cast<double>(consistent + contradictory);
}

std::vector<Association> top_associations(NodeId id, const MemoryGraph& graph) {
    std::vector<Association> out;
    for (const auto& [other, w] : graph.neighbors(id)) {
        if (graph.is_concept(other)) out.push_back({other, w});
    }
    normalize_associations(out, graph.config().k_assoc);
    return out;
}

}  // namespace

std::string to_string(FormationMode m) { return m == FormationMode::active ? "active" : "passive"; }

FormationMode formation_mode_from_string(const std::string& s) {
    if (s == "active") return FormationMode::active;
    if (s == "passive") return FormationMode::passive;
    throw ValidationError("unknown formation mode '" + s + "'");
}

std::string to_string(Mode m) { return m == Mode::s1 ? "S1" : "S2"; }

std::string to_string(EscalationReason r) {
    switch (r) {
        case EscalationReason::low_density: return "low_density";
        case EscalationReason::high_novelty: return "high_novelty";
        case EscalationReason::high_stakes: return "high_stakes";
        case EscalationReason::external_trigger: return "external_trigger";
    }
    return "unknown";
}

std::string to_string(EpistemicState s) {
    switch (s) {
        case EpistemicState::precise: return "precise";
        case EpistemicState::approximate: return "approximate";
        case EpistemicState::null: return "null";
    }
    return "null";
}

std::string to_string(InvestigationStatus s) {
    switch (s) {
        case InvestigationStatus::open: return "open";
        case InvestigationStatus::closed_gist: return "closed_gist";
        case InvestigationStatus::aborted: return "aborted";
    }
    return "open";
}

RouteDecision route(const std::vector<std::optional<NodeId>>& query_concepts, double novelty, bool stakes,
                    bool external_trigger, const MemoryGraph& graph, const ExecutiveConfig& config) {
    double density = 0.0;
    for (const auto& c : query_concepts) density += c ? graph.local_density(*c) : 0.0;
    if (!query_concepts.empty()) density /= static_cast<double>(query_concepts.size());

    RouteDecision out;
    if (density < config.route_density) out.signals.push_back({EscalationReason::low_density, density});
    if (novelty > config.route_novelty) out.signals.push_back({EscalationReason::high_novelty, novelty});
    if (stakes) out.signals.push_back({EscalationReason::high_stakes, 1.0});
    if (external_trigger) out.signals.push_back({EscalationReason::external_trigger, 1.0});
    out.mode = out.signals.empty() ? Mode::s1 : Mode::s2;
    return out;
}

EpistemicVerdict classify_epistemic(double match_score, double density, double precision,
                                    const ExecutiveConfig& config) {
    if (!in_unit(match_score) || !in_unit(density) || !in_unit(precision))
        throw ValidationError("classifier inputs must lie in [0,1]");
    EpistemicVerdict v;
    v.match = match_score;
    v.density = density;
    v.precision = precision;
    v.confidence = match_score * (0.5 * density + 0.5 * precision);
    if (match_score < config.null_match) {
        v.state = EpistemicState::null;
    } else if (match_score >= config.precise_match && precision >= config.precise_precision) {
        v.state = EpistemicState::precise;
    } else {
        v.state = EpistemicState::approximate;
    }
    return v;
}

double catharsis_threshold(double precision, const ExecutiveConfig& config) {
    return config.theta_base + config.theta_k * precision;
}

double Investigation::consistency_ratio() const {
    std::size_t ok = 0, bad = 0;
    for (const auto& e : evidence) {
        ok += e.judgment == Consistency::consistent ? 1 : 0;
        bad += e.judgment == Consistency::contradictory ? 1 : 0;
    }
    // evidence that bears on no belief delimits nothing
    return ratio(ok, bad, 0.0);
}

// ---------------------------------------------------------------------------

Executive::Executive(ExecutiveConfig config, ExecutivePolicy& policy, Lexicon override_lexicon)
    : config_(config), policy_(&policy), override_lexicon_(std::move(override_lexicon)) {}

GistView Executive::view_of(NodeId id, const ValenceVector& gist, const MemoryGraph& graph) const {
    return {graph.concept_node(id).label, gist};
}

EvidenceRecord Executive::record_of(NodeId episode, const MemoryGraph& graph) const {
    const EpisodeNode& ep = graph.episode(episode);
    EvidenceRecord r;
    r.text = ep.content;
    r.fact = ep.fact;
    r.subject = ep.fact ? ep.fact->subject : std::string{};
    r.strength = ep.tag.aggregate();
    return r;
}

Judgment Executive::judge(const EvidenceRecord& evidence, const GistView& gist, CostMeter& meter) {
    ++meter.policy_calls;
    return policy_->judge_consistency(evidence, gist);
}

std::optional<std::uint64_t> Executive::open_investigation_for(NodeId concept_id) const {
    for (const auto& [id, inv] : investigations_) {
        if (inv.target == concept_id && inv.status == InvestigationStatus::open) return id;
    }
    return std::nullopt;
}

NodeSet Executive::pursued() const {
    NodeSet out;
    for (const auto& [id, inv] : investigations_) {
        if (inv.status == InvestigationStatus::open) out.insert(inv.target);
    }
    return out;
}

const Investigation& Executive::investigation(std::uint64_t id) const {
    auto it = investigations_.find(id);
    if (it == investigations_.end()) throw NotFoundError("no investigation " + std::to_string(id));
    return it->second;
}

std::optional<std::uint64_t> Executive::maybe_open_investigation(const SalienceTag& tag, NodeId concept_id,
                                                                 const MemoryGraph& graph, std::int64_t turn) {
    if (tag.aggregate() < config_.open_salience) return std::nullopt;
    if (concept_id == kSelfId || !graph.is_concept(concept_id)) return std::nullopt;
    if (graph.concept_node(concept_id).gist) return std::nullopt;
    if (open_investigation_for(concept_id)) return std::nullopt;
    const double density = graph.local_density(concept_id);
    // an aborted target stays closed until the graph has learned something new about it
    if (auto it = aborted_density_.find(concept_id);
        it != aborted_density_.end() && density < it->second + config_.abort_growth)
        return std::nullopt;

    Investigation inv;
    inv.id = next_investigation_++;
    inv.target = concept_id;
    inv.opened_turn = turn;
    inv.opened_density = density;
    investigations_.emplace(inv.id, inv);
    return inv.id;
}

ValenceVector Executive::provisional_gist(const Investigation& inv, const MemoryGraph& graph) const {
    const std::string& subject = graph.concept_node(inv.target).label;
    ValenceVector g;
    // attribute -> (value -> count), with first-seen order to break ties
    std::map<std::string, std::vector<std::pair<std::string, int>>> votes;
    std::size_t self_votes = 0;
    for (const auto& e : inv.evidence) {
        self_votes += e.self_ref ? 1 : 0;
        if (!e.source.empty()) g.contextual.insert(kSourcePrefix + e.source);
        if (!e.fact || e.fact->subject != subject) continue;
        auto& tally = votes[e.fact->attribute];
        auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& v) { return v.first == e.fact->value; });
        if (it == tally.end()) {
            tally.emplace_back(e.fact->value, 1);
        } else {
            ++it->second;
        }
    }
    for (const auto& [attr, tally] : votes) {
        const auto best = std::max_element(tally.begin(), tally.end(),
                                           [](const auto& a, const auto& b) { return a.second < b.second; });
        g.contextual.insert(fact_label(attr, best->first));
    }
    if (2 * self_votes > inv.evidence.size()) g.contextual.insert(kSelfContext);
    return g;
}

void Executive::abort(Investigation& inv, const std::string& reason) {
    inv.status = InvestigationStatus::aborted;
    inv.end_reason = reason;
}

const Investigation& Executive::step_investigation(std::uint64_t id, NodeId episode, double valence,
                                                   const std::string& source, MemoryGraph& graph, CostMeter& meter,
                                                   std::int64_t turn) {
    auto it = investigations_.find(id);
    if (it == investigations_.end()) throw NotFoundError("no investigation " + std::to_string(id));
    Investigation& inv = it->second;
    if (inv.status != InvestigationStatus::open)
        throw StateError("investigation " + std::to_string(id) + " is " + to_string(inv.status));

    const EpisodeNode& ep = graph.episode(episode);
    EvidenceEntry e;
    e.episode = episode;
    e.aggregate = ep.tag.aggregate();
    e.arousal = ep.tag.emotional;
    e.valence = valence;
    e.source = source;
    e.self_ref = std::find(ep.concept_refs.begin(), ep.concept_refs.end(), kSelfId) != ep.concept_refs.end();
    e.fact = ep.fact;
    inv.evidence.push_back(e);

    // every piece of evidence is weighed against the gist as it now stands
    const GistView provisional{graph.concept_node(inv.target).label, provisional_gist(inv, graph)};
    for (auto& ev : inv.evidence) ev.judgment = judge(record_of(ev.episode, graph), provisional, meter).verdict;
    ++inv.steps;

    const double density = graph.local_density(inv.target);
    const bool determined = density >= config_.close_density ||
                            (inv.evidence.size() >= config_.close_evidence &&
                             inv.consistency_ratio() >= config_.close_ratio);
    if (determined) {
        close_investigation(id, graph, meter, turn);
    } else if (inv.steps >= config_.step_cap) {
        abort(inv, density - inv.opened_density < config_.abort_growth ? "gambling_loop" : "step_cap");
        aborted_density_[inv.target] = density;
    }
    return inv;
}

ValenceVector Executive::close_investigation(std::uint64_t id, MemoryGraph& graph, CostMeter& meter,
                                             std::int64_t turn) {
    auto it = investigations_.find(id);
    if (it == investigations_.end()) throw NotFoundError("no investigation " + std::to_string(id));
    Investigation& inv = it->second;
    if (inv.status != InvestigationStatus::open)
        throw StateError("investigation " + std::to_string(id) + " is " + to_string(inv.status));
    const double density = graph.local_density(inv.target);
    if (!(density >= config_.close_density ||
          (inv.evidence.size() >= config_.close_evidence && inv.consistency_ratio() >= config_.close_ratio)))
        throw StateError("investigation " + std::to_string(id) + " has not reached a determination");
    if (graph.concept_node(inv.target).gist) throw StateError("target already carries a gist");

    ValenceVector gist = provisional_gist(inv, graph);
    const GistView final_view{graph.concept_node(inv.target).label, gist};

    // precision is the consistency of all evidence with the gist as finally delimited
    std::size_t ok = 0, bad = 0;
    double weight_sum = 0.0, valence = 0.0, arousal = 0.0;
    for (auto& e : inv.evidence) {
        e.judgment = judge(record_of(e.episode, graph), final_view, meter).verdict;
        ok += e.judgment == Consistency::consistent ? 1 : 0;
        bad += e.judgment == Consistency::contradictory ? 1 : 0;
        weight_sum += e.aggregate;
        valence += e.aggregate * e.valence;
        arousal += e.aggregate * e.arousal;
    }
    if (weight_sum > 0.0) {
        gist.emotional = {std::clamp(valence / weight_sum, -1.0, 1.0), clamp01(arousal / weight_sum)};
    }
    gist.associative = top_associations(inv.target, graph);
    gist.density = density;
    gist.precision = ratio(ok, bad, 1.0);
    const double weight = inv.evidence.empty() ? 0.0 : clamp01(weight_sum / static_cast<double>(inv.evidence.size()));

    graph.write_gist(GistWriteKey{}, inv.target, gist, weight, turn, GistSource::investigation, inv.id);
    inv.status = InvestigationStatus::closed_gist;
    inv.end_reason = "determination";
    return gist;
}

void Executive::form_passively(NodeId concept_id, NodeId episode, double valence, MemoryGraph& graph,
                               std::int64_t turn) {
    if (concept_id == kSelfId || graph.concept_node(concept_id).gist) return;
    const EpisodeNode& ep = graph.episode(episode);
    ValenceVector gist;
    gist.emotional = {std::clamp(valence, -1.0, 1.0), ep.tag.emotional};
    if (ep.fact && ep.fact->subject == graph.concept_node(concept_id).label)
        gist.contextual.insert(fact_label(ep.fact->attribute, ep.fact->value));
    if (std::find(ep.concept_refs.begin(), ep.concept_refs.end(), kSelfId) != ep.concept_refs.end())
        gist.contextual.insert(kSelfContext);
    gist.associative = top_associations(concept_id, graph);
    gist.density = graph.local_density(concept_id);
    gist.precision = 1.0;
    graph.write_gist(GistWriteKey{}, concept_id, gist, ep.tag.aggregate(), turn, GistSource::passive, episode.value);
}

// ---------------------------------------------------------------------------
// Catharsis
// ---------------------------------------------------------------------------

std::vector<CatharsisEvent> Executive::detect_catharsis(const WorkingMemory& wm, const MemoryGraph& graph,
                                                        CostMeter& meter) {
    // forget judgments about items that have left working memory
    for (auto it = judge_cache_.begin(); it != judge_cache_.end();) {
        it = wm.find(std::get<1>(it->first)) ? std::next(it) : judge_cache_.erase(it);
    }

    std::vector<CatharsisEvent> events;
    for (const auto& g : wm.items()) {
        if (g.kind != ItemKind::gist || !g.node || !graph.is_concept(*g.node)) continue;
        const ConceptNode& node = graph.concept_node(*g.node);
        if (!node.gist) continue;
        const GistView view{node.label, *node.gist};

        double keep = 1.0;  // probability that no contradiction lands (noisy-or)
        CatharsisEvent ev;
        ev.gist_node = node.id;
        for (const auto& s : wm.items()) {
            if (s.kind != ItemKind::segment || s.entry_turn <= node.gist_turn) continue;
            // only segments that mention the gist's concept can bear on it
            if (!s.concept_refs.count(node.id)) continue;
            const auto key = std::make_tuple(node.id, s.item_id, node.gist_turn);
            Judgment j;
            if (auto hit = judge_cache_.find(key); hit != judge_cache_.end()) {
                j = hit->second;
            } else {
                EvidenceRecord r{s.fact ? s.fact->subject : std::string{}, s.text, s.source, s.fact, std::nullopt,
                                 s.activation};
                j = judge(r, view, meter);
                judge_cache_.emplace(key, j);
            }
            if (j.verdict != Consistency::contradictory) continue;
            keep *= 1.0 - clamp01(j.score * s.tag.trust);
            ev.evidence.push_back(s.item_id);
        }
        if (ev.evidence.empty()) continue;
        ev.intensity = 1.0 - keep;
        ev.old_precision = node.gist->precision;
        ev.threshold = catharsis_threshold(ev.old_precision, config_);
        ev.fired = ev.intensity >= ev.threshold;
        ev.new_precision = ev.old_precision;
        events.push_back(std::move(ev));
    }
    return events;
}

void Executive::apply_cathartic_update(CatharsisEvent& event, const WorkingMemory& wm, MemoryGraph& graph,
                                       CostMeter& meter, std::int64_t turn) {
    if (!event.fired) throw StateError("cathartic update requires a fired event");
    const ConceptNode& node = graph.concept_node(event.gist_node);
    if (!node.gist) throw StateError("catharsis target has no gist");
    const ValenceVector old = *node.gist;
    const double old_weight = node.weight;
    const std::string subject = node.label;

    std::vector<const WMItem*> evidence;
    for (ItemId id : event.evidence) {
        if (const WMItem* it = wm.find(id)) evidence.push_back(it);
    }
    if (evidence.empty()) throw StateError("catharsis evidence has left working memory");

    ValenceVector gist = old;
    double valence = 0.0, arousal = 0.0;
    for (const WMItem* it : evidence) {
        valence += it->valence;
        arousal += it->tag.emotional;
    }
    valence /= static_cast<double>(evidence.size());
    arousal /= static_cast<double>(evidence.size());
    const double b = config_.emotional_blend;
    gist.emotional.valence = std::clamp(old.emotional.valence + b * (valence - old.emotional.valence), -1.0, 1.0);
    gist.emotional.arousal = clamp01(old.emotional.arousal + b * (arousal - old.emotional.arousal));

    // the strongest contradicting claim per attribute replaces the held value
    std::map<std::string, std::pair<std::string, double>> revised;
    for (const WMItem* it : evidence) {
        gist.contextual.insert(kSourcePrefix + it->source);
        if (!it->fact || it->fact->subject != subject) continue;
        const double s = it->score() * it->tag.trust;
        auto [pos, inserted] = revised.try_emplace(it->fact->attribute, it->fact->value, s);
        if (!inserted && s > pos->second.second) pos->second = {it->fact->value, s};
    }
    for (const auto& [attr, value] : revised) {
        for (auto l = gist.contextual.begin(); l != gist.contextual.end();) {
            auto parsed = parse_fact_label(*l);
            l = parsed && parsed->first == attr ? gist.contextual.erase(l) : std::next(l);
        }
        gist.contextual.insert(fact_label(attr, value.first));
    }
    gist.associative = top_associations(event.gist_node, graph);
    gist.density = graph.local_density(event.gist_node);

    // precision is recomputed from the episodes linked right now
    const GistView view{subject, gist};
    std::size_t ok = 0, bad = 0;
    for (NodeId ep : graph.linked_episodes(event.gist_node)) {
        if (!graph.episode(ep).fact) continue;
        const auto j = judge(record_of(ep, graph), view, meter);
        ok += j.verdict == Consistency::consistent ? 1 : 0;
        bad += j.verdict == Consistency::contradictory ? 1 : 0;
    }
    gist.precision = ratio(ok, bad, old.precision);
    const double weight = clamp01(old_weight * (0.5 + 0.5 * gist.precision));

    graph.write_gist(GistWriteKey{}, event.gist_node, gist, weight, turn, GistSource::catharsis, next_catharsis_++);
    event.new_precision = gist.precision;
    for (auto it = judge_cache_.begin(); it != judge_cache_.end();) {
        it = std::get<0>(it->first) == event.gist_node ? judge_cache_.erase(it) : std::next(it);
    }
}

// ---------------------------------------------------------------------------
// Override
// ---------------------------------------------------------------------------

InjectionDecision Executive::override_injection(const Injection& injection, const SalienceTag& injection_tag,
                                                const MemoryGraph& graph, double channel_threshold,
                                                CostMeter& meter) {
    if (injection_tag.thematic < config_.override_relevance) {
        bool carried = false;
        for (std::size_t c = 1; c < SalienceTag::kChannels; ++c) carried |= injection_tag.channel(c) >= channel_threshold;
        if (!carried) return InjectionDecision::suppress;
    }
    const GistView candidate = view_of(injection.node, injection.gist, graph);
    for (const auto& [core_id, core] : graph.identity_gists()) {
        if (core_id == injection.node) continue;
        ++meter.policy_calls;
        if (policy_->conflicts_with_core(candidate, view_of(core_id, core, graph))) return InjectionDecision::suppress;
    }
    return InjectionDecision::accept;
}

AttackDecision Executive::reject_injection_attack(const std::string& text, const NodeSet& concepts,
                                                  const SalienceTag& tag, const MemoryGraph& graph) const {
    if (tag.trust >= config_.attack_trust) return AttackDecision::process;
    const auto tokens = tokenize(text);
    if (!override_lexicon_.any(tokens)) return AttackDecision::process;
    bool targets_self = false;
    for (NodeId c : concepts) targets_self |= c == kSelfId || graph.self_linked(c);
    for (const auto& t : tokens) targets_self |= t == "your" || t == "yourself" || t == "you";
    return targets_self ? AttackDecision::reject : AttackDecision::process;
}

// ---------------------------------------------------------------------------
// Answering
// ---------------------------------------------------------------------------

AnswerResult Executive::answer(const AnswerRequest& request, const WorkingMemory& wm, const MemoryGraph& graph,
                               CostMeter& meter) {
    struct Source {
        std::optional<NodeId> node;
    };
    std::vector<EvidenceRecord> records;
    std::vector<Source> origin;

    for (const auto& item : wm.view()) {
        if (item.kind == ItemKind::gist && item.node) {
            auto gist = graph.gist_lookup(*item.node);
            if (!gist) continue;
            const std::string& label = graph.concept_node(*item.node).label;
            records.push_back({label, "gist:" + label, "memory", std::nullopt, std::move(gist), item.activation});
            origin.push_back({item.node});
        } else if (item.kind == ItemKind::segment) {
            records.push_back({item.fact ? item.fact->subject : std::string{}, item.text, item.source, item.fact,
                               std::nullopt, item.activation});
            origin.push_back({std::nullopt});
        }
    }

    AnswerResult out;
    out.mode = request.route.mode;
    if (request.route.mode == Mode::s2 && !request.concepts.empty()) {
        const auto hits = graph.deliberate_search(request.concepts, config_.search_budget, meter);
        out.searched = hits.size();
        for (const auto& h : hits) {
            if (graph.is_concept(h.id)) {
                auto gist = graph.gist_lookup(h.id);
                if (!gist) continue;
                const std::string& label = graph.concept_node(h.id).label;
                records.push_back({label, "gist:" + label, "memory", std::nullopt, std::move(gist), h.score});
                origin.push_back({h.id});
            } else {
                const EpisodeNode& ep = graph.episode(h.id);
                records.push_back({ep.fact ? ep.fact->subject : std::string{}, ep.content, "memory", ep.fact,
                                   std::nullopt, h.score});
                origin.push_back({std::nullopt});
            }
        }
    }

    ++meter.policy_calls;
    out.response = policy_->respond(request.query, records);

    double match = 0.0, density = 0.0, precision = 0.0;
    auto consider_gist = [&](std::size_t i) {
        if (records[i].strength <= match) return;
        match = clamp01(records[i].strength);
        density = graph.local_density(*origin[i].node);
        precision = records[i].gist->precision;
        out.support = origin[i].node;
    };
    if (request.query.ask) {
        const Fact& ask = *request.query.ask;
        std::optional<std::string> said;
        for (const auto& f : out.response.asserted) {
            if (f.subject == ask.subject && f.attribute == ask.attribute) said = f.value;
        }
        if (said) {
            for (std::size_t i = 0; i < records.size(); ++i) {
                if (records[i].gist && records[i].subject == ask.subject &&
                    records[i].gist->believed(ask.attribute) == said)
                    consider_gist(i);
            }
            if (!out.support) {
                // only loose episodic support: no formed gist behind the claim
                for (const auto& r : records) {
                    if (r.fact && r.fact->subject == ask.subject && r.fact->attribute == ask.attribute &&
                        r.fact->value == *said)
                        match = std::max(match, clamp01(r.strength));
                }
                if (auto subject = graph.find_concept(ask.subject)) {
                    density = graph.local_density(*subject);
                    out.support = subject;
                }
            }
        }
    } else {
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].gist &&
                std::find(request.concepts.begin(), request.concepts.end(), *origin[i].node) != request.concepts.end())
                consider_gist(i);
        }
    }

    out.verdict = classify_epistemic(match, density, precision, config_);
    if (out.verdict.state == EpistemicState::null) {
        out.response.asserted.clear();
        out.response.text = "I don't know: nothing in memory supports an answer";
        out.support.reset();
    } else if (out.verdict.state == EpistemicState::approximate) {
        out.response.text = std::string(kQualificationMarker) + " " + out.response.text;
        out.qualified = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

json Executive::to_json() const {
    json invs = json::array();
    for (const auto& [id, inv] : investigations_) {
        json ev = json::array();
        for (const auto& e : inv.evidence) {
            ev.push_back(json{{"episode", e.episode},
                              {"judgment", consistency_name(e.judgment)},
                              {"aggregate", e.aggregate},
                              {"arousal", e.arousal},
                              {"valence", e.valence},
                              {"self_ref", e.self_ref},
                              {"source", e.source},
                              {"fact", e.fact ? json(*e.fact) : json(nullptr)}});
        }
        invs.push_back(json{{"id", id},
                            {"target", inv.target},
                            {"opened_turn", inv.opened_turn},
                            {"opened_density", inv.opened_density},
                            {"evidence", ev},
                            {"steps", inv.steps},
                            {"status", to_string(inv.status)},
                            {"end_reason", inv.end_reason}});
    }
    json aborted = json::array();
    for (const auto& [node, d] : aborted_density_) aborted.push_back(json::array({node.value, d}));
    json cache = json::array();
    for (const auto& [key, j] : judge_cache_) {
        cache.push_back(json::array({std::get<0>(key).value, std::get<1>(key).value, std::get<2>(key),
                                     consistency_name(j.verdict), j.score}));
    }
    return json{{"next_investigation", next_investigation_},
                {"next_catharsis", next_catharsis_},
                {"investigations", invs},
                {"aborted", aborted},
                {"judge_cache", cache}};
}

void Executive::load_json(const json& doc) {
    std::map<std::uint64_t, Investigation> invs;
    for (const auto& j : field<json>(doc, "investigations")) {
        Investigation inv;
        inv.id = field<std::uint64_t>(j, "id");
        inv.target = field<NodeId>(j, "target");
        inv.opened_turn = field<std::int64_t>(j, "opened_turn");
        inv.opened_density = field<double>(j, "opened_density");
        inv.steps = field<int>(j, "steps");
        inv.status = status_from(field<std::string>(j, "status"));
        inv.end_reason = field<std::string>(j, "end_reason");
        for (const auto& e : field<json>(j, "evidence")) {
            EvidenceEntry x;
            x.episode = field<NodeId>(e, "episode");
            x.judgment = consistency_from(field<std::string>(e, "judgment"));
            x.aggregate = field<double>(e, "aggregate");
            x.arousal = field<double>(e, "arousal");
            x.valence = field<double>(e, "valence");
            x.self_ref = field<bool>(e, "self_ref");
            x.source = field<std::string>(e, "source");
            if (!field<json>(e, "fact").is_null()) x.fact = field<Fact>(e, "fact");
            inv.evidence.push_back(std::move(x));
        }
        invs.emplace(inv.id, std::move(inv));
    }
    std::map<NodeId, double> aborted;
    for (const auto& a : field<json>(doc, "aborted")) {
        if (!a.is_array() || a.size() != 2) throw SchemaError("bad type for field 'aborted'");
        aborted[NodeId{a[0].get<std::uint64_t>()}] = a[1].get<double>();
    }
    std::map<std::tuple<NodeId, ItemId, std::int64_t>, Judgment> cache;
    for (const auto& c : field<json>(doc, "judge_cache")) {
        if (!c.is_array() || c.size() != 5) throw SchemaError("bad type for field 'judge_cache'");
        cache.emplace(std::make_tuple(NodeId{c[0].get<std::uint64_t>()}, ItemId{c[1].get<std::uint64_t>()},
                                      c[2].get<std::int64_t>()),
                      Judgment{consistency_from(c[3].get<std::string>()), c[4].get<double>()});
    }
    // commit only after everything parsed
    next_investigation_ = field<std::uint64_t>(doc, "next_investigation");
    next_catharsis_ = field<std::uint64_t>(doc, "next_catharsis");
    investigations_ = std::move(invs);
    aborted_density_ = std::move(aborted);
    judge_cache_ = std::move(cache);
}

}  // namespace engram

#include "engram/policy.hpp"

#include "engram/serialization.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>

namespace engram {

using nlohmann::json;

namespace {

const std::map<std::string, std::string>& antonyms() {
    static const std::map<std::string, std::string> table{
        {"incompetent", "competent"}, {"ineffective", "effective"},   {"weak", "strong"},
        {"unsafe", "safe"},           {"dishonest", "honest"},       {"unreliable", "reliable"},
        {"untrustworthy", "trustworthy"}, {"bad", "good"},           {"false", "true"},
        {"no", "yes"},                {"failure", "success"},        {"incapable", "capable"},
        {"cruel", "kind"},            {"negative", "positive"},      {"worse", "better"},
    };
    return table;
}

std::pair<std::string, bool> canonical(const std::string& raw) {
    std::string v;
    for (char c : raw) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
    bool negated = false;
    while (v.rfind("not ", 0) == 0) {
        negated = !negated;
        v.erase(0, 4);
    }
    if (auto it = antonyms().find(v); it != antonyms().end()) {
        v = it->second;
        negated = !negated;
    }
    return {v, negated};
}

}  // namespace

bool values_conflict(const std::string& a, const std::string& b) { return canonical(a) != canonical(b); }

PolicyResponse ScriptedPolicy::respond(const PolicyQuery& query, std::span<const EvidenceRecord> context) {
    PolicyResponse out;
    for (const auto& rec : context) {
        if (rec.gist && rec.gist->references_self()) out.thoughts.push_back("conclusion shaped by " + rec.subject);
    }
    if (!query.ask) {
        std::string joined;
        for (const auto& c : query.concepts) joined += (joined.empty() ? "" : ", ") + c;
        out.text = "noted: " + joined;
        return out;
    }
    const Fact& ask = *query.ask;

    // a formed gist outranks loose episodic facts
    const EvidenceRecord* best_gist = nullptr;
    for (const auto& rec : context) {
        if (rec.gist && rec.subject == ask.subject && rec.gist->believed(ask.attribute)) {
            if (!best_gist || rec.strength > best_gist->strength) best_gist = &rec;
        }
    }
    std::optional<std::string> value;
    if (best_gist) {
        value = best_gist->gist->believed(ask.attribute);
    } else {
        std::vector<std::pair<std::string, double>> tally;
        for (const auto& rec : context) {
            if (!rec.fact || rec.fact->subject != ask.subject || rec.fact->attribute != ask.attribute) continue;
            auto it = std::find_if(tally.begin(), tally.end(), [&](const auto& t) { return t.first == rec.fact->value; });
            if (it == tally.end()) {
                tally.emplace_back(rec.fact->value, rec.strength);
            } else {
                it->second += rec.strength;
            }
        }
        double best = -1.0;
        for (const auto& [v, w] : tally) {
            if (w > best) {
                best = w;
                value = v;
            }
        }
    }
    if (!value) {
        out.text = "no record of " + ask.subject + " " + ask.attribute;
        return out;
    }
    out.text = ask.subject + " " + ask.attribute + ": " + *value;
    out.asserted.push_back({ask.subject, ask.attribute, *value});
    return out;
}

Judgment ScriptedPolicy::judge_consistency(const EvidenceRecord& evidence, const GistView& gist) {
    if (!evidence.fact || evidence.fact->subject != gist.subject) return {};
    const auto believed = gist.gist.believed(evidence.fact->attribute);
    if (!believed) return {};
    if (values_conflict(*believed, evidence.fact->value)) return {Consistency::contradictory, contradiction_score_};
    return {Consistency::consistent, 0.0};
}

bool ScriptedPolicy::conflicts_with_core(const GistView& candidate, const GistView& core) {
    for (const auto& label : candidate.gist.contextual) {
        const auto parsed = parse_fact_label(label);
        if (!parsed) continue;
        if (auto held = core.gist.believed(parsed->first); held && values_conflict(*held, parsed->second)) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Protocol
// ---------------------------------------------------------------------------

namespace {

json encode_record(const EvidenceRecord& r) {
    json j{{"subject", r.subject}, {"text", r.text}, {"source", r.source}, {"strength", r.strength},
           {"fact", nullptr},      {"gist", nullptr}};
    if (r.fact) j["fact"] = *r.fact;
    if (r.gist) j["gist"] = *r.gist;
    return j;
}

EvidenceRecord decode_record(const json& j) {
    EvidenceRecord r;
    r.subject = field<std::string>(j, "subject");
    r.text = field<std::string>(j, "text");
    r.source = field<std::string>(j, "source");
    r.strength = field<double>(j, "strength");
    if (!field<json>(j, "fact").is_null()) r.fact = field<Fact>(j, "fact");
    if (!field<json>(j, "gist").is_null()) r.gist = field<ValenceVector>(j, "gist");
    return r;
}

json encode_view(const GistView& g) { return json{{"subject", g.subject}, {"gist", g.gist}}; }
GistView decode_view(const json& j) { return {field<std::string>(j, "subject"), field<ValenceVector>(j, "gist")}; }

std::string consistency_name(Consistency c) {
    switch (c) {
        case Consistency::consistent: return "consistent";
        case Consistency::contradictory: return "contradictory";
        case Consistency::neutral: return "neutral";
    }
    return "neutral";
}

}  // namespace

json encode_respond_request(const PolicyQuery& query, std::span<const EvidenceRecord> context) {
    json ctx = json::array();
    for (const auto& r : context) ctx.push_back(encode_record(r));
    json q{{"text", query.text}, {"concepts", query.concepts}, {"ask", nullptr}};
    if (query.ask) q["ask"] = json::array({query.ask->subject, query.ask->attribute});
    return json{{"kind", "respond"}, {"query", q}, {"context", ctx}};
}

json encode_judge_request(const EvidenceRecord& evidence, const GistView& gist) {
    return json{{"kind", "judge"}, {"evidence", encode_record(evidence)}, {"gist", encode_view(gist)}};
}

json encode_conflict_request(const GistView& candidate, const GistView& core) {
    return json{{"kind", "conflict"}, {"candidate", encode_view(candidate)}, {"core", encode_view(core)}};
}

json encode(const PolicyResponse& r) {
    return json{{"text", r.text}, {"facts", r.asserted}, {"thoughts", r.thoughts}};
}

json encode(const Judgment& j) { return json{{"judgment", consistency_name(j.verdict)}, {"intensity", j.score}}; }

PolicyResponse decode_response(const json& j) {
    PolicyResponse r;
    r.text = field<std::string>(j, "text");
    r.asserted = field<std::vector<Fact>>(j, "facts");
    if (j.contains("thoughts")) r.thoughts = field<std::vector<std::string>>(j, "thoughts");
    return r;
}

Judgment decode_judgment(const json& j) {
    const auto name = field<std::string>(j, "judgment");
    Judgment out;
    if (name == "consistent") {
        out.verdict = Consistency::consistent;
    } else if (name == "contradictory") {
        out.verdict = Consistency::contradictory;
    } else if (name == "neutral") {
        out.verdict = Consistency::neutral;
    } else {
        throw SchemaError("unknown judgment '" + name + "'");
    }
    out.score = clamp01(field<double>(j, "intensity"));
    return out;
}

json StreamPolicy::roundtrip(const json& request) {
    out_ << request.dump() << '\n' << std::flush;
    std::string line;
    if (!std::getline(in_, line)) throw StateError("policy process closed its output");
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("policy response: ") + e.what());
    }
}

PolicyResponse StreamPolicy::respond(const PolicyQuery& query, std::span<const EvidenceRecord> context) {
    return decode_response(roundtrip(encode_respond_request(query, context)));
}

Judgment StreamPolicy::judge_consistency(const EvidenceRecord& evidence, const GistView& gist) {
    return decode_judgment(roundtrip(encode_judge_request(evidence, gist)));
}

bool StreamPolicy::conflicts_with_core(const GistView& candidate, const GistView& core) {
    return field<bool>(roundtrip(encode_conflict_request(candidate, core)), "conflict");
}

std::size_t serve_policy(ExecutivePolicy& policy, std::istream& in, std::ostream& out) {
    std::size_t served = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json reply;
        try {
            const json req = json::parse(line);
            const auto kind = field<std::string>(req, "kind");
            if (kind == "respond") {
                const json q = field<json>(req, "query");
                PolicyQuery query;
                query.text = field<std::string>(q, "text");
                query.concepts = field<std::vector<std::string>>(q, "concepts");
                if (!field<json>(q, "ask").is_null()) query.ask = field<Fact>(q, "ask");
                std::vector<EvidenceRecord> ctx;
                for (const auto& r : field<json>(req, "context")) ctx.push_back(decode_record(r));
                reply = encode(policy.respond(query, ctx));
            } else if (kind == "judge") {
                reply = encode(policy.judge_consistency(decode_record(field<json>(req, "evidence")),
                                                        decode_view(field<json>(req, "gist"))));
            } else if (kind == "conflict") {
                reply = json{{"conflict", policy.conflicts_with_core(decode_view(field<json>(req, "candidate")),
                                                                     decode_view(field<json>(req, "core")))}};
            } else {
                reply = json{{"error", "unknown request kind '" + kind + "'"}};
            }
        } catch (const std::exception& e) {
            reply = json{{"error", e.what()}};
        }
        out << reply.dump() << '\n' << std::flush;
        ++served;
    }
    return served;
}

}  // namespace engram

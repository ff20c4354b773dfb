#include "engram/serialization.hpp"

namespace engram {

using nlohmann::json;

void to_json(json& j, const NodeId& id) { j = id.value; }
void from_json(const json& j, NodeId& id) { id.value = j.get<std::uint64_t>(); }

void to_json(json& j, const SalienceTag& t) {
    j = json{{"thematic", t.thematic}, {"emotional", t.emotional}, {"urgency", t.urgency},
             {"novelty", t.novelty},   {"trust", t.trust},         {"goal", t.goal}};
}

void from_json(const json& j, SalienceTag& t) {
    t.thematic = field<double>(j, "thematic");
    t.emotional = field<double>(j, "emotional");
    t.urgency = field<double>(j, "urgency");
    t.novelty = field<double>(j, "novelty");
    t.trust = field<double>(j, "trust");
    t.goal = field<double>(j, "goal");
}

void to_json(json& j, const Fact& f) { j = json::array({f.subject, f.attribute, f.value}); }

void from_json(const json& j, Fact& f) {
    if (!j.is_array() || j.size() < 2 || j.size() > 3) throw SchemaError("fact must be [subject, attribute, value]");
    f.subject = j[0].get<std::string>();
    f.attribute = j[1].get<std::string>();
    f.value = j.size() == 3 ? j[2].get<std::string>() : std::string{};
}

void to_json(json& j, const ValenceVector& g) {
    json assoc = json::array();
    for (const auto& a : g.associative) assoc.push_back(json::array({a.target.value, a.weight}));
    j = json{{"emotional", {{"valence", g.emotional.valence}, {"arousal", g.emotional.arousal}}},
             {"associative", assoc},
             {"contextual", g.contextual},
             {"density", g.density},
             {"precision", g.precision}};
}

void from_json(const json& j, ValenceVector& g) {
    const auto emo = field<json>(j, "emotional");
    g.emotional.valence = field<double>(emo, "valence");
    g.emotional.arousal = field<double>(emo, "arousal");
    g.associative.clear();
    for (const auto& a : field<json>(j, "associative")) {
        if (!a.is_array() || a.size() != 2) throw SchemaError("associative entry must be [id, weight]");
        g.associative.push_back({NodeId{a[0].get<std::uint64_t>()}, a[1].get<double>()});
    }
    g.contextual = field<std::set<std::string>>(j, "contextual");
    g.density = field<double>(j, "density");
    g.precision = field<double>(j, "precision");
}

}  // namespace engram

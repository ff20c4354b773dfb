#include "engram/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace engram {

using nlohmann::json;

namespace {

constexpr const char* kTrustPrefix = "gateway.trust.";

struct Field {
    const char* key;
    std::function<json(const EngineConfig&)> get;
    std::function<void(EngineConfig&, const json&)> set;
};

template <typename T, typename M>
Field member(const char* key, M member_ptr) {
    return {key, [member_ptr](const EngineConfig& c) { return json(std::invoke(member_ptr, c)); },
            [member_ptr, key](EngineConfig& c, const json& v) {
                try {
                    std::invoke(member_ptr, c) = v.get<T>();
                } catch (const json::exception&) {
                    throw SchemaError(std::string("bad type for config key '") + key + "'");
                }
            }};
}

#define ENGRAM_FIELD(T, key, path) \
    member<T>(key, [](auto& c) -> decltype(auto) { return (c.path); })

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        ENGRAM_FIELD(double, "gateway.channel_threshold", gateway.channel_threshold),
        ENGRAM_FIELD(double, "gateway.inbound_activation_threshold", gateway.inbound_activation_threshold),
        ENGRAM_FIELD(double, "gateway.identity_discount", gateway.identity_discount),
        ENGRAM_FIELD(double, "gateway.promotion_threshold", gateway.promotion_threshold),
        ENGRAM_FIELD(double, "gateway.boundary_threshold", gateway.boundary_threshold),
        ENGRAM_FIELD(double, "gateway.amplify_factor", gateway.amplify_factor),
        ENGRAM_FIELD(double, "gateway.displace_thematic", gateway.displace_thematic),
        ENGRAM_FIELD(double, "gateway.trust_unknown", trust.unknown),
        ENGRAM_FIELD(std::vector<std::string>, "gateway.goals", goals),
        ENGRAM_FIELD(std::size_t, "wm.capacity", wm.capacity),
        ENGRAM_FIELD(double, "wm.drift_decay", wm.drift_decay),
        ENGRAM_FIELD(double, "wm.interference_overlap", wm.interference_overlap),
        ENGRAM_FIELD(double, "wm.interference_penalty", wm.interference_penalty),
        ENGRAM_FIELD(double, "graph.w_init", graph.w_init),
        ENGRAM_FIELD(double, "graph.reinforce", graph.reinforce),
        ENGRAM_FIELD(double, "graph.testing_effect", graph.testing_effect),
        ENGRAM_FIELD(double, "graph.density_scale", graph.density_scale),
        ENGRAM_FIELD(std::int64_t, "graph.compress_age", graph.compress_age),
        ENGRAM_FIELD(std::size_t, "graph.k_assoc", graph.k_assoc),
        ENGRAM_FIELD(double, "graph.w_core", graph.w_core),
        ENGRAM_FIELD(double, "graph.spread_decay", graph.spread_decay),
        ENGRAM_FIELD(int, "graph.hop_limit", graph.hop_limit),
        ENGRAM_FIELD(double, "graph.activation_floor", graph.activation_floor),
        ENGRAM_FIELD(double, "executive.route_density", executive.route_density),
        ENGRAM_FIELD(double, "executive.route_novelty", executive.route_novelty),
        ENGRAM_FIELD(double, "executive.precise_match", executive.precise_match),
        ENGRAM_FIELD(double, "executive.precise_precision", executive.precise_precision),
        ENGRAM_FIELD(double, "executive.null_match", executive.null_match),
        ENGRAM_FIELD(double, "executive.open_salience", executive.open_salience),
        ENGRAM_FIELD(double, "executive.close_density", executive.close_density),
        ENGRAM_FIELD(std::size_t, "executive.close_evidence", executive.close_evidence),
        ENGRAM_FIELD(double, "executive.close_ratio", executive.close_ratio),
        ENGRAM_FIELD(int, "executive.step_cap", executive.step_cap),
        ENGRAM_FIELD(double, "executive.abort_growth", executive.abort_growth),
        ENGRAM_FIELD(double, "executive.theta_base", executive.theta_base),
        ENGRAM_FIELD(double, "executive.theta_k", executive.theta_k),
        ENGRAM_FIELD(double, "executive.emotional_blend", executive.emotional_blend),
        ENGRAM_FIELD(double, "executive.override_relevance", executive.override_relevance),
        ENGRAM_FIELD(double, "executive.attack_trust", executive.attack_trust),
        ENGRAM_FIELD(std::size_t, "executive.search_budget", executive.search_budget),
        ENGRAM_FIELD(std::uint64_t, "harness.seed", harness.seed),
        ENGRAM_FIELD(std::int64_t, "harness.window", harness.window),
        ENGRAM_FIELD(std::size_t, "harness.baseline_k", harness.baseline_k),
        ENGRAM_FIELD(std::string, "paths.affect_lexicon", paths.affect_lexicon),
        ENGRAM_FIELD(std::string, "paths.urgency_lexicon", paths.urgency_lexicon),
        ENGRAM_FIELD(std::string, "paths.override_lexicon", paths.override_lexicon),
        ENGRAM_FIELD(std::string, "paths.journal", paths.journal),
    };
    return table;
}

#undef ENGRAM_FIELD

void check_unit(const char* key, double v) {
    if (!in_unit(v)) throw ValidationError(std::string("config key '") + key + "' must lie in [0,1]");
}

void validate(const EngineConfig& c) {
    check_unit("gateway.channel_threshold", c.gateway.channel_threshold);
    check_unit("gateway.inbound_activation_threshold", c.gateway.inbound_activation_threshold);
    check_unit("gateway.promotion_threshold", c.gateway.promotion_threshold);
    check_unit("gateway.trust_unknown", c.trust.unknown);
    for (const auto& [src, t] : c.trust.sources) check_unit("gateway.trust.*", t);
    check_unit("wm.drift_decay", c.wm.drift_decay);
    check_unit("graph.spread_decay", c.graph.spread_decay);
    check_unit("graph.w_core", c.graph.w_core);
    if (c.wm.capacity == 0) throw ValidationError("config key 'wm.capacity' must be positive");
    if (c.graph.k_assoc == 0) throw ValidationError("config key 'graph.k_assoc' must be positive");
    if (c.graph.density_scale <= 0) throw ValidationError("config key 'graph.density_scale' must be positive");
    if (c.executive.step_cap <= 0) throw ValidationError("config key 'executive.step_cap' must be positive");
    if (c.executive.search_budget == 0) throw ValidationError("config key 'executive.search_budget' must be positive");
    if (c.harness.window <= 0) throw ValidationError("config key 'harness.window' must be positive");
    if (c.harness.baseline_k == 0) throw ValidationError("config key 'harness.baseline_k' must be positive");
    if (c.gateway.identity_discount >= c.gateway.channel_threshold)
        throw ValidationError("gateway.identity_discount must stay below gateway.channel_threshold");
}

}  // namespace

json EngineConfig::to_json() const {
    json out = json::object();
    for (const auto& f : fields()) out[f.key] = f.get(*this);
    for (const auto& [src, t] : trust.sources) out[kTrustPrefix + src] = t;
    out["executive.formation"] = to_string(executive.formation);
    return out;
}

EngineConfig EngineConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("config must be a JSON object");
    EngineConfig c;
    for (const auto& [key, value] : doc.items()) {
        if (key.rfind(kTrustPrefix, 0) == 0 && key.size() > std::string(kTrustPrefix).size()) {
            if (!value.is_number()) throw SchemaError("bad type for config key '" + key + "'");
            c.trust.sources[key.substr(std::string(kTrustPrefix).size())] = value.get<double>();
            continue;
        }
        if (key == "executive.formation") {
            if (!value.is_string()) throw SchemaError("bad type for config key '" + key + "'");
            c.executive.formation = formation_mode_from_string(value.get<std::string>());
            continue;
        }
        auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return key == f.key; });
        if (it == fields().end()) throw SchemaError("unknown config key '" + key + "'");
        it->set(c, value);
    }
    validate(c);
    return c;
}

EngineConfig EngineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return from_json(json::parse(ss.str()));
    } catch (const json::parse_error& e) {
        throw ParseError("config '" + path + "': " + e.what());
    }
}

EngineConfig EngineConfig::resolve(const std::string& path) {
    if (!path.empty()) return load(path);
    if (const char* env = std::getenv("ENGRAM_CONFIG"); env && *env) return load(env);
    return {};
}

}  // namespace engram

#pragma once
// JSON encodings of the shared value types. Objects use nlohmann::json's
// sorted keys, so dumps are byte-stable.

#include "engram/core.hpp"

#include <nlohmann/json.hpp>

namespace engram {

void to_json(nlohmann::json& j, const NodeId& id);
void from_json(const nlohmann::json& j, NodeId& id);
void to_json(nlohmann::json& j, const SalienceTag& tag);
void from_json(const nlohmann::json& j, SalienceTag& tag);
void to_json(nlohmann::json& j, const Fact& fact);
void from_json(const nlohmann::json& j, Fact& fact);
void to_json(nlohmann::json& j, const ValenceVector& gist);
void from_json(const nlohmann::json& j, ValenceVector& gist);

/// Reads a required field, raising SchemaError that names it.
template <typename T>
T field(const nlohmann::json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw SchemaError(std::string("missing field '") + name + "'");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError(std::string("bad type for field '") + name + "'");
    }
}

}  // namespace engram

#pragma once
// Engine configuration as a flat JSON object with dotted keys, one per
// module default. Unknown keys are rejected.

#include "engram/executive.hpp"
#include "engram/gateway.hpp"
#include "engram/memory_graph.hpp"
#include "engram/working_memory.hpp"

#include <nlohmann/json.hpp>
#include <string>

namespace engram {

struct HarnessConfig {
    std::uint64_t seed = 42;
    std::int64_t window = 100;  // turns per report window
    std::size_t baseline_k = 5;
};

struct PathConfig {
    std::string affect_lexicon;    // empty: bundled
    std::string urgency_lexicon;   // empty: bundled
    std::string override_lexicon;  // empty: bundled
    std::string journal;           // empty: no journal
};

struct EngineConfig {
    GateConfig gateway;
    TrustTable trust;
    std::vector<std::string> goals;  // goal-affinity concept labels
    WMConfig wm;
    GraphConfig graph;
    ExecutiveConfig executive;
    HarnessConfig harness;
    PathConfig paths;

    /// Flat dotted-key object holding every field.
    [[nodiscard]] nlohmann::json to_json() const;
    /// Starts from defaults and applies `doc`; unknown keys or bad values throw.
    static EngineConfig from_json(const nlohmann::json& doc);
    static EngineConfig load(const std::string& path);
    /// `path` if nonempty, else $ENGRAM_CONFIG if set, else defaults.
    static EngineConfig resolve(const std::string& path);
};

}  // namespace engram

#pragma once
// Programmatic scenario generators. Every generator is a pure function of
// its seed, so bundled scenarios can be regenerated byte-for-byte.

#include "engram/engine.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace engram {

/// Portable helpers over mt19937_64 (no implementation-defined distributions).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : g_(seed) {}
    std::uint64_t next() { return g_(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(g_() % n); }
    double unit() { return static_cast<double>(g_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }
    /// Rank in [0, n) drawn with probability proportional to 1 / (rank + 1)^s.
    std::size_t zipf(std::size_t n, double s);

private:
    std::mt19937_64 g_;
};

using Scenario = std::vector<ScenarioEvent>;

/// Mixed-topic conversation: topics persist for a few turns, then switch.
Scenario mixed_topics(std::size_t turns, std::uint64_t seed);

/// Regular domain: a fixed concept clustering sampled with Zipf frequencies,
/// interleaving statements and queries. `skip` events are generated and
/// dropped first, so a suffix continues the same stream.
Scenario regular_domain(std::size_t turns, std::uint64_t seed, std::size_t skip = 0);

/// Early self-referencing disclosures, then varied topics.
Scenario identity_stream(std::size_t turns, std::uint64_t seed);

/// Facts established and probed, with noisy sources, compression-age gaps,
/// updates, thinly evidenced entities and questions about entities never
/// mentioned.
Scenario facts_scenario(std::uint64_t seed);

/// Gists formed about trips, later primed by cue utterances before each probe.
struct PrimingScenario {
    Scenario events;
    std::size_t probes = 0;
};
PrimingScenario priming_scenario(std::uint64_t seed);

/// Belief formation, then spaced single contradictions, then co-present ones.
Scenario rigidity_scenario(std::uint64_t seed);

/// Technical discussion with one emotional off-topic disclosure and a probe.
struct SalienceScenario {
    Scenario events;
    std::string disclosure;  // text of the emotional segment
    std::string probe;       // text of the probe query
};
SalienceScenario salience_scenario(std::uint64_t seed);

/// Identity formation, then injection attacks from a low-trust source.
struct AttackScenario {
    Scenario formation;
    Scenario attacks;
};
AttackScenario attack_scenario(std::uint64_t seed);

/// Random-outcome stream about a single concept.
Scenario gambling_scenario(std::size_t turns, std::uint64_t seed);

/// Single-concept ambient stimuli from an unlisted source, each unrelated to
/// the one before.
Scenario sub_salience_stream(std::size_t turns, std::uint64_t seed);

/// Each concept is first heard as a rumor, then through interleaved document
/// statements with some noise; probes follow.
Scenario formation_scenario(std::uint64_t seed);

/// Stable beliefs, then a long run with no contradicting evidence.
Scenario stability_scenario(std::size_t turns, std::uint64_t seed);

}  // namespace engram

#pragma once
// Core value types shared by every layer of the engine: identifiers,
// salience tags, valence vectors, fact tuples and the error hierarchy.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace engram {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

struct NodeId {
    std::uint64_t value = 0;

    constexpr auto operator<=>(const NodeId&) const = default;
    [[nodiscard]] std::string to_string() const { return "n" + std::to_string(value); }
};

struct ItemId {
    std::uint64_t value = 0;

    constexpr auto operator<=>(const ItemId&) const = default;
};

/// The reserved SELF concept is always the first node of a graph.
inline constexpr NodeId kSelfId{1};
inline constexpr const char* kSelfLabel = "self";

struct NodeIdHash {
    std::size_t operator()(NodeId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
struct ItemIdHash {
    std::size_t operator()(ItemId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};

using NodeSet = std::set<NodeId>;

inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
inline bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

// ---------------------------------------------------------------------------
// Salience
// ---------------------------------------------------------------------------

/// Six-channel salience score. Any single channel can carry an item through
/// a gate, so the aggregate is the channel maximum.
struct SalienceTag {
    double thematic = 0.0;
    double emotional = 0.0;
    double urgency = 0.0;
    double novelty = 0.0;
    double trust = 0.0;
    double goal = 0.0;

    static constexpr std::size_t kChannels = 6;

    [[nodiscard]] double aggregate() const {
        return std::max({thematic, emotional, urgency, novelty, trust, goal});
    }
    [[nodiscard]] bool valid() const {
        return in_unit(thematic) && in_unit(emotional) && in_unit(urgency) && in_unit(novelty) &&
               in_unit(trust) && in_unit(goal);
    }
    /// Channel i in declaration order (thematic, emotional, urgency, novelty, trust, goal).
    [[nodiscard]] double channel(std::size_t i) const;
    double& channel(std::size_t i);

    bool operator==(const SalienceTag&) const = default;
};

// ---------------------------------------------------------------------------
// Facts
// ---------------------------------------------------------------------------

/// A (subject, attribute, value) claim. Subjects are concept labels.
struct Fact {
    std::string subject;
    std::string attribute;
    std::string value;

    bool operator==(const Fact&) const = default;
    auto operator<=>(const Fact&) const = default;
};

/// Contextual labels that carry a believed attribute value use this prefix:
/// "fact:<attribute>=<value>".
inline constexpr const char* kFactLabelPrefix = "fact:";

std::string fact_label(const std::string& attribute, const std::string& value);
/// Parses a fact label into (attribute, value); nullopt for ordinary labels.
std::optional<std::pair<std::string, std::string>> parse_fact_label(const std::string& label);

// ---------------------------------------------------------------------------
// Valence vector (the gist payload)
// ---------------------------------------------------------------------------

struct Emotion {
    double valence = 0.0;  // [-1, 1]
    double arousal = 0.0;  // [0, 1]

    bool operator==(const Emotion&) const = default;
};

struct Association {
    NodeId target;
    double weight = 0.0;  // (0, 1]

    bool operator==(const Association&) const = default;
};

inline constexpr const char* kSelfContext = "self";

struct ValenceVector {
    Emotion emotional;
    std::vector<Association> associative;  // weight descending
    std::set<std::string> contextual;
    double density = 0.0;
    double precision = 0.0;

    [[nodiscard]] bool references_self() const { return contextual.contains(kSelfContext); }
    /// Believed value for an attribute, read from the contextual fact labels.
    [[nodiscard]] std::optional<std::string> believed(const std::string& attribute) const;

    bool operator==(const ValenceVector&) const = default;
};

/// Throws ValidationError when any component is out of range or the
/// associative list is unsorted or longer than k_assoc.
void validate(const ValenceVector& gist, std::size_t k_assoc);

/// Sorts by weight descending (ties by target id) and truncates to k_assoc.
void normalize_associations(std::vector<Association>& assoc, std::size_t k_assoc);

// ---------------------------------------------------------------------------
// Misc helpers
// ---------------------------------------------------------------------------

/// Lowercased alphanumeric tokens.
std::vector<std::string> tokenize(const std::string& text);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string content_hash(const std::string& text);

}  // namespace engram

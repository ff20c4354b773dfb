#pragma once
// The reasoning slot of the executive. The engine only ever talks to an
// ExecutivePolicy; ScriptedPolicy is the deterministic in-tree policy and
// StreamPolicy forwards every call over a line-delimited JSON protocol so an
// external model process can occupy the slot.

#include "engram/core.hpp"

#include <iosfwd>
#include <nlohmann/json.hpp>
#include <span>

namespace engram {

/// One piece of material the policy may read: a working-memory item, a
/// search hit or a piece of evidence.
struct EvidenceRecord {
    std::string subject;  // label of the concept the record is about
    std::string text;
    std::string source;
    std::optional<Fact> fact;
    std::optional<ValenceVector> gist;  // set when the record is a gist
    double strength = 0.0;              // activation or search score
};

struct GistView {
    std::string subject;
    ValenceVector gist;
};

struct PolicyQuery {
    std::string text;
    std::vector<std::string> concepts;
    std::optional<Fact> ask;  // subject + attribute being asked; value unused
};

struct PolicyResponse {
    std::string text;
    std::vector<Fact> asserted;
    std::vector<std::string> thoughts;  // generated conclusions; logged, never stored
};

enum class Consistency { consistent, contradictory, neutral };

struct Judgment {
    Consistency verdict = Consistency::neutral;
    double score = 0.0;  // contradiction strength in [0,1]; 0 unless contradictory
};

class ExecutivePolicy {
public:
    virtual ~ExecutivePolicy() = default;
    virtual PolicyResponse respond(const PolicyQuery& query, std::span<const EvidenceRecord> context) = 0;
    virtual Judgment judge_consistency(const EvidenceRecord& evidence, const GistView& gist) = 0;
    /// Whether a candidate gist conflicts with a core (identity) gist.
    virtual bool conflicts_with_core(const GistView& candidate, const GistView& core) = 0;
};

/// Lexical value comparison: "not X" negates X and listed antonyms map onto
/// each other's negation. Returns true when two values cannot both hold.
bool values_conflict(const std::string& a, const std::string& b);

class ScriptedPolicy final : public ExecutivePolicy {
public:
    explicit ScriptedPolicy(double contradiction_score = 0.7) : contradiction_score_(contradiction_score) {}

    PolicyResponse respond(const PolicyQuery& query, std::span<const EvidenceRecord> context) override;
    Judgment judge_consistency(const EvidenceRecord& evidence, const GistView& gist) override;
    bool conflicts_with_core(const GistView& candidate, const GistView& core) override;

private:
    double contradiction_score_;
};

// --- line-delimited JSON protocol ------------------------------------------

nlohmann::json encode_respond_request(const PolicyQuery& query, std::span<const EvidenceRecord> context);
nlohmann::json encode_judge_request(const EvidenceRecord& evidence, const GistView& gist);
nlohmann::json encode_conflict_request(const GistView& candidate, const GistView& core);
nlohmann::json encode(const PolicyResponse& response);
nlohmann::json encode(const Judgment& judgment);
PolicyResponse decode_response(const nlohmann::json& j);
Judgment decode_judgment(const nlohmann::json& j);

/// Client side: writes one request line, blocks for one response line.
class StreamPolicy final : public ExecutivePolicy {
public:
    StreamPolicy(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

    PolicyResponse respond(const PolicyQuery& query, std::span<const EvidenceRecord> context) override;
    Judgment judge_consistency(const EvidenceRecord& evidence, const GistView& gist) override;
    bool conflicts_with_core(const GistView& candidate, const GistView& core) override;

private:
    nlohmann::json roundtrip(const nlohmann::json& request);

    std::istream& in_;
    std::ostream& out_;
};

/// Server side: answers requests from `in` with `policy` until EOF.
/// Returns the number of requests served.
std::size_t serve_policy(ExecutivePolicy& policy, std::istream& in, std::ostream& out);

}  // namespace engram

#pragma once
// Scenario files, the term-frequency baseline, the scenario runner and the
// windowed report.

#include "engram/engine.hpp"

#include <iosfwd>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace engram {

// --- scenarios -----------------------------------------------------------------

nlohmann::json to_json(const ScenarioEvent& e);
ScenarioEvent event_from_json(const nlohmann::json& j);
/// One event per line; blank lines are skipped. Errors name the line.
std::vector<ScenarioEvent> parse_scenario(std::istream& in);
std::vector<ScenarioEvent> load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const std::vector<ScenarioEvent>& events);

// --- baseline ----------------------------------------------------------------------

struct BaselineHit {
    std::size_t index = 0;
    double score = 0.0;
};

/// Stores every segment verbatim and retrieves by term-frequency cosine.
class BaselineRetriever {
public:
    void add(const std::string& text, std::optional<Fact> fact = std::nullopt);
    /// Top-k by cosine, ties broken by insertion order; empty corpus gives [].
    [[nodiscard]] std::vector<BaselineHit> retrieve(const std::string& query, std::size_t k) const;
    /// The top-1 segment's value, asserted for the asked subject and attribute.
    [[nodiscard]] std::optional<Fact> answer(const std::string& query, const Fact& ask) const;

    [[nodiscard]] std::size_t size() const { return docs_.size(); }
    [[nodiscard]] const std::string& text(std::size_t i) const { return docs_.at(i).text; }

private:
    struct Doc {
        std::string text;
        std::optional<Fact> fact;
        std::map<std::string, double> tf;
        double norm = 0.0;
    };
    std::vector<Doc> docs_;
};

double tf_cosine(const std::string& a, const std::string& b);

// --- runs ----------------------------------------------------------------------------

/// Ground truth seen so far, keyed by (subject, attribute).
using TruthTable = std::map<std::pair<std::string, std::string>, std::string>;

/// True when an asserted fact contradicts a known ground-truth tuple.
bool contradicts(const Fact& asserted, const TruthTable& truth);

struct RunResult {
    std::vector<MetricsRecord> records;
    TruthTable truth;
};

/// Feeds events through the engine in order and scores probe assertions.
RunResult run_scenario(Engine& engine, const std::vector<ScenarioEvent>& events, TruthTable truth = {});

/// Baseline counterpart: stores every content segment, answers probes from
/// the top-1 match. Returns asserted_false per probe, in order.
struct BaselineRun {
    std::size_t probes = 0;
    std::size_t asserted = 0;
    std::size_t asserted_false = 0;
};
BaselineRun run_baseline(BaselineRetriever& baseline, const std::vector<ScenarioEvent>& events);

void write_metrics(std::ostream& out, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics(std::istream& in);
std::vector<MetricsRecord> load_metrics(const std::string& path);

// --- report ------------------------------------------------------------------------

struct WindowRow {
    std::int64_t window = 0;
    std::size_t records = 0;
    std::size_t routed = 0;
    double s2_fraction = 0.0;
    double mean_cost = 0.0;
    double hallucination_rate = 0.0;
    double identity_presence = 0.0;
};

std::vector<WindowRow> summarize(const std::vector<MetricsRecord>& records, std::int64_t window = 100);
std::string report_csv(const std::vector<WindowRow>& rows);
nlohmann::json report_json(const std::vector<WindowRow>& rows);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side has no variance.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace engram

#include "engram/harness.hpp"

#include "engram/serialization.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace engram {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

json to_json(const ScenarioEvent& e) {
    json j{{"turn", e.turn},       {"type", to_string(e.type)}, {"text", e.text},     {"source", e.source},
           {"concepts", e.concepts}, {"affect", e.affect},      {"stakes", e.stakes}};
    if (e.expected_answer) j["expected_answer"] = *e.expected_answer;
    if (e.fact) {
        j["fact"] = e.type == EventType::probe || e.type == EventType::query
                        ? json::array({e.fact->subject, e.fact->attribute})
                        : json(*e.fact);
    }
    return j;
}

ScenarioEvent event_from_json(const json& j) {
    if (!j.is_object()) throw SchemaError("event must be a JSON object");
    static const std::set<std::string> known{"turn",   "type",   "text",           "source", "concepts",
                                             "affect", "stakes", "expected_answer", "fact"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw SchemaError("unknown field '" + key + "'");
    }
    ScenarioEvent e;
    e.turn = field<std::int64_t>(j, "turn");
    e.type = event_type_from_string(field<std::string>(j, "type"));
    if (j.contains("text")) e.text = field<std::string>(j, "text");
    if (j.contains("source")) e.source = field<std::string>(j, "source");
    if (j.contains("concepts")) e.concepts = field<std::vector<std::string>>(j, "concepts");
    if (j.contains("affect")) e.affect = field<double>(j, "affect");
    if (j.contains("stakes")) e.stakes = field<bool>(j, "stakes");
    if (j.contains("expected_answer") && !j["expected_answer"].is_null())
        e.expected_answer = field<std::string>(j, "expected_answer");
    if (j.contains("fact") && !j["fact"].is_null()) e.fact = field<Fact>(j, "fact");

    if (!in_unit(e.affect)) throw ValidationError("affect must lie in [0,1]");
    if (e.is_content() && e.text.empty()) throw ValidationError("content events need text");
    if (e.type == EventType::probe && (!e.expected_answer || !e.fact))
        throw ValidationError("probes need expected_answer and fact");
    if (e.type == EventType::ground_truth && (!e.fact || e.fact->value.empty()))
        throw ValidationError("ground_truth events need a full fact");
    return e;
}

std::vector<ScenarioEvent> parse_scenario(std::istream& in) {
    std::vector<ScenarioEvent> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(event_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(n) + ": " + e.what());
        } catch (const std::runtime_error& e) {
            throw ParseError("line " + std::to_string(n) + ": " + e.what());
        }
        if (out.size() > 1 && out.back().turn < out[out.size() - 2].turn)
            throw ParseError("line " + std::to_string(n) + ": turns must be non-decreasing");
    }
    return out;
}

std::vector<ScenarioEvent> load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open scenario '" + path + "'");
    return parse_scenario(in);
}

void write_scenario(std::ostream& out, const std::vector<ScenarioEvent>& events) {
    for (const auto& e : events) out << to_json(e).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Baseline
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, double> term_frequencies(const std::string& text) {
    std::map<std::string, double> tf;
    for (const auto& t : tokenize(text)) tf[t] += 1.0;
    return tf;
}

double norm_of(const std::map<std::string, double>& tf) {
    double s = 0.0;
    for (const auto& [t, c] : tf) s += c * c;
    return std::sqrt(s);
}

double cosine(const std::map<std::string, double>& a, double na, const std::map<std::string, double>& b, double nb) {
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0.0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& [t, c] : small) {
        if (auto it = large.find(t); it != large.end()) dot += c * it->second;
    }
    return dot / (na * nb);
}

}  // namespace

double tf_cosine(const std::string& a, const std::string& b) {
    const auto ta = term_frequencies(a);
    const auto tb = term_frequencies(b);
    return cosine(ta, norm_of(ta), tb, norm_of(tb));
}

void BaselineRetriever::add(const std::string& text, std::optional<Fact> fact) {
    Doc d{text, std::move(fact), term_frequencies(text), 0.0};
    d.norm = norm_of(d.tf);
    docs_.push_back(std::move(d));
}

std::vector<BaselineHit> BaselineRetriever::retrieve(const std::string& query, std::size_t k) const {
    if (k == 0) throw ValidationError("k must be at least 1");
    const auto q = term_frequencies(query);
    const double nq = norm_of(q);
    std::vector<BaselineHit> hits;
    hits.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) hits.push_back({i, cosine(q, nq, docs_[i].tf, docs_[i].norm)});
    std::stable_sort(hits.begin(), hits.end(), [](const BaselineHit& a, const BaselineHit& b) { return a.score > b.score; });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::optional<Fact> BaselineRetriever::answer(const std::string& query, const Fact& ask) const {
    const auto top = retrieve(query, 1);
    if (top.empty() || !docs_[top.front().index].fact) return std::nullopt;
    return Fact{ask.subject, ask.attribute, docs_[top.front().index].fact->value};
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

bool contradicts(const Fact& asserted, const TruthTable& truth) {
    auto it = truth.find({asserted.subject, asserted.attribute});
    return it != truth.end() && it->second != asserted.value;
}

RunResult run_scenario(Engine& engine, const std::vector<ScenarioEvent>& events, TruthTable truth) {
    RunResult out;
    out.truth = std::move(truth);
    out.records.reserve(events.size());
    for (const auto& e : events) {
        if (e.type == EventType::ground_truth) out.truth[{e.fact->subject, e.fact->attribute}] = e.fact->value;
        MetricsRecord rec = engine.process(e);
        if (e.type == EventType::probe) {
            const bool excused = rec.verdict == "approximate" && rec.qualified;
            for (const auto& f : rec.asserted) rec.asserted_false |= !excused && contradicts(f, out.truth);
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

BaselineRun run_baseline(BaselineRetriever& baseline, const std::vector<ScenarioEvent>& events) {
    BaselineRun out;
    TruthTable truth;
    for (const auto& e : events) {
        if (e.type == EventType::ground_truth) {
            truth[{e.fact->subject, e.fact->attribute}] = e.fact->value;
        } else if (e.is_content()) {
            baseline.add(e.text, e.fact);
        } else if (e.type == EventType::probe) {
            ++out.probes;
            if (auto f = baseline.answer(e.text, *e.fact)) {
                ++out.asserted;
                out.asserted_false += contradicts(*f, truth) ? 1 : 0;
            }
        }
    }
    return out;
}

void write_metrics(std::ostream& out, const std::vector<MetricsRecord>& records) {
    for (const auto& r : records) out << r.to_json().dump() << '\n';
}

std::vector<MetricsRecord> read_metrics(std::istream& in) {
    std::vector<MetricsRecord> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(MetricsRecord::from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(n) + ": " + e.what());
        } catch (const SchemaError& e) {
            throw SchemaError("line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::vector<MetricsRecord> load_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open metrics '" + path + "'");
    return read_metrics(in);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

std::vector<WindowRow> summarize(const std::vector<MetricsRecord>& records, std::int64_t window) {
    if (window <= 0) throw ValidationError("window must be positive");
    std::map<std::int64_t, WindowRow> rows;
    std::map<std::int64_t, std::size_t> s2, probes, halluc, identity;
    std::map<std::int64_t, double> cost;
    for (const auto& r : records) {
        const std::int64_t w = r.turn / window;
        WindowRow& row = rows[w];
        row.window = w;
        ++row.records;
        identity[w] += r.identity_in_wm ? 1 : 0;
        if (r.mode == "S1" || r.mode == "S2") {
            ++row.routed;
            s2[w] += r.mode == "S2" ? 1 : 0;
            cost[w] += static_cast<double>(r.cost);
        }
        if (r.type == "probe") {
            ++probes[w];
            halluc[w] += r.asserted_false ? 1 : 0;
        }
    }
    std::vector<WindowRow> out;
    for (auto& [w, row] : rows) {
        if (row.routed) {
            row.s2_fraction = static_cast<double>(s2[w]) / static_cast<double>(row.routed);
            row.mean_cost = cost[w] / static_cast<double>(row.routed);
        }
        if (probes[w]) row.hallucination_rate = static_cast<double>(halluc[w]) / static_cast<double>(probes[w]);
        row.identity_presence = static_cast<double>(identity[w]) / static_cast<double>(row.records);
        out.push_back(row);
    }
    return out;
}

std::string report_csv(const std::vector<WindowRow>& rows) {
    std::ostringstream s;
    s << "window,records,routed,s2_fraction,mean_cost,hallucination_rate,identity_presence\n";
    s << std::setprecision(6);
    for (const auto& r : rows) {
        s << r.window << ',' << r.records << ',' << r.routed << ',' << r.s2_fraction << ',' << r.mean_cost << ','
          << r.hallucination_rate << ',' << r.identity_presence << '\n';
    }
    return s.str();
}

json report_json(const std::vector<WindowRow>& rows) {
    json windows = json::array();
    std::vector<double> idx, s2;
    for (const auto& r : rows) {
        windows.push_back(json{{"window", r.window},
                               {"records", r.records},
                               {"routed", r.routed},
                               {"s2_fraction", r.s2_fraction},
                               {"mean_cost", r.mean_cost},
                               {"hallucination_rate", r.hallucination_rate},
                               {"identity_presence", r.identity_presence}});
        idx.push_back(static_cast<double>(r.window));
        s2.push_back(r.s2_fraction);
    }
    return json{{"windows", windows}, {"s2_spearman", spearman(idx, s2)}};
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("spearman needs equal-length inputs");
    if (x.size() < 2) return 0.0;
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace engram

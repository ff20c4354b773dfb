#include "support.hpp"

#include "engram/harness.hpp"
#include "engram/scenarios.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace engram;

TEST_CASE("term-frequency cosine on a five-segment corpus") {
    BaselineRetriever b;
    b.add("red apple pie");
    b.add("green apple");
    b.add("red red car");
    b.add("blue sky");
    b.add("apple red");
    const auto hits = b.retrieve("red apple", 5);
    REQUIRE(hits.size() == 5);
    // hand-computed: q = (red 1, apple 1), |q| = sqrt 2
    const std::vector<std::pair<std::size_t, double>> want{
        {4, 1.0}, {0, 2.0 / std::sqrt(6.0)}, {2, 2.0 / std::sqrt(10.0)}, {1, 0.5}, {3, 0.0}};
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(hits[i].index == want[i].first);
        CHECK(hits[i].score == doctest::Approx(want[i].second).epsilon(1e-12));
    }
    CHECK(b.retrieve("red apple", 2).size() == 2);
    CHECK_THROWS_AS((void)b.retrieve("x", 0), ValidationError);
    CHECK(BaselineRetriever{}.retrieve("x", 3).empty());
    CHECK(tf_cosine("a b", "") == 0.0);
}

TEST_CASE("baseline ties go to insertion order and answers use top-1") {
    BaselineRetriever b;
    b.add("y x", Fact{"x", "color", "blue"});
    b.add("x y", Fact{"x", "color", "red"});
    const auto hits = b.retrieve("x y", 2);
    CHECK(hits[0].index == 0);
    CHECK(hits[1].index == 1);
    CHECK(b.answer("x y", Fact{"x", "color", ""})->value == "blue");
    b.add("zzz");
    CHECK_FALSE(b.answer("zzz", Fact{"x", "color", ""}));
}

TEST_CASE("scenario files round-trip and report errors by line") {
    const auto events = facts_scenario(5);
    std::stringstream s;
    write_scenario(s, events);
    const auto back = parse_scenario(s);
    REQUIRE(back.size() == events.size());
    std::stringstream again;
    write_scenario(again, back);
    CHECK(again.str() == s.str());

    auto fails_at = [](const std::string& text, const std::string& where) {
        std::stringstream in(text);
        try {
            parse_scenario(in);
        } catch (const ParseError& e) {
            return std::string(e.what()).find(where) != std::string::npos;
        }
        return false;
    };
    const std::string ok = R"({"turn":1,"type":"utterance","text":"hi"})";
    CHECK(fails_at(ok + "\n{bad json\n", "line 2"));
    CHECK(fails_at(ok + "\n\n" + R"({"turn":2,"type":"utterance","text":"hi","colour":1})", "line 3"));
    CHECK(fails_at(R"({"turn":1,"type":"shout","text":"hi"})", "line 1"));
    CHECK(fails_at(R"({"turn":1,"type":"utterance"})", "line 1"));
    CHECK(fails_at(R"({"turn":1,"type":"utterance","text":"a","affect":2})", "line 1"));
    CHECK(fails_at(R"({"turn":1,"type":"probe","text":"a"})", "line 1"));
    CHECK(fails_at(ok + "\n" + R"({"turn":0,"type":"utterance","text":"hi"})", "line 2"));
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.jsonl"), NotFoundError);
}

TEST_CASE("probe scoring counts contradictions of known truth only") {
    TruthTable t{{{"x", "color"}, "red"}};
    CHECK(contradicts(Fact{"x", "color", "blue"}, t));
    CHECK_FALSE(contradicts(Fact{"x", "color", "red"}, t));
    CHECK_FALSE(contradicts(Fact{"y", "color", "blue"}, t));
}

TEST_CASE("metrics round-trip and windowed report") {
    std::vector<MetricsRecord> recs;
    for (int i = 0; i < 6; ++i) {
        MetricsRecord r;
        r.turn = i * 50;
        r.type = i == 5 ? "probe" : "utterance";
        r.mode = i % 2 ? "S2" : "S1";
        r.verdict = "-";
        r.cost = static_cast<std::uint64_t>(i);
        r.identity_in_wm = i < 3;
        r.asserted_false = i == 5;
        r.asserted = {Fact{"a", "b", "c"}};
        recs.push_back(r);
    }
    std::stringstream s;
    write_metrics(s, recs);
    const auto back = read_metrics(s);
    REQUIRE(back.size() == recs.size());
    CHECK(back[5].to_json() == recs[5].to_json());

    const auto rows = summarize(recs, 100);
    REQUIRE(rows.size() == 3);  // turns 0,50 | 100,150 | 200,250
    CHECK(rows[0].records == 2);
    CHECK(rows[0].s2_fraction == doctest::Approx(0.5));
    CHECK(rows[0].mean_cost == doctest::Approx(0.5));
    CHECK(rows[1].identity_presence == doctest::Approx(0.5));
    CHECK(rows[2].hallucination_rate == doctest::Approx(1.0));
    const auto csv = report_csv(rows);
    CHECK(csv.rfind("window,records,routed", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(report_json(rows).at("windows").size() == 3);
    CHECK(report_json(rows).contains("s2_spearman"));
    CHECK_THROWS_AS(summarize(recs, 0), ValidationError);
}

TEST_CASE("spearman matches an independent rank correlation") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 1, 1}, {1, 2, 3}) == 0.0);
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> v(0, 9);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x, y;
        for (int i = 0, n = 2 + t % 30; i < n; ++i) {
            x.push_back(v(rng));
            y.push_back(v(rng) + 0.5 * x.back());
        }
        worst = std::max(worst, std::abs(spearman(x, y) - oracle::spearman(x, y)));
    }
    CHECK(worst <= 1e-12);
}

#include "support.hpp"

#include "engram/serialization.hpp"

#include <doctest.h>

#include <random>

using namespace engram;

namespace {

SalienceTag tag_of(double agg) {
    SalienceTag t;
    t.thematic = agg;
    return t;
}

ValenceVector simple_gist(double density = 0.5, double precision = 0.8) {
    ValenceVector g;
    g.density = density;
    g.precision = precision;
    return g;
}

}  // namespace

TEST_CASE("graph starts with SELF") {
    MemoryGraph g;
    CHECK(g.concept_count() == 1);
    CHECK(g.find_concept(kSelfLabel) == kSelfId);
}

TEST_CASE("add_concept is idempotent and rejects empty labels") {
    MemoryGraph g;
    const auto a = g.add_concept("tea", 0);
    CHECK(g.add_concept("tea", 5) == a);
    CHECK(g.concept_count() == 2);
    CHECK_THROWS_AS(g.add_concept("", 0), ValidationError);
}

TEST_CASE("co-occurrence edges start at w_init and reinforce") {
    MemoryGraph g;
    const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0);
    std::vector<NodeId> refs{a, b};
    g.add_episode("a and b", refs, tag_of(0.7), 1);
    CHECK(*g.edge_weight(a, b) == doctest::Approx(0.3));
    g.add_episode("a and b again", refs, tag_of(0.7), 2);
    CHECK(*g.edge_weight(a, b) == doctest::Approx(0.45));
    // episode links carry the aggregate salience
    const auto eps = g.linked_episodes(a);
    REQUIRE(eps.size() == 2);
    CHECK(*g.edge_weight(a, eps[0]) == doctest::Approx(0.7));
}

TEST_CASE("add_episode validation") {
    MemoryGraph g;
    const auto a = g.add_concept("a", 0);
    CHECK_THROWS_AS(g.add_episode("x", {}, tag_of(0.5), 1), ValidationError);
    CHECK_THROWS_AS(g.add_episode("x", {NodeId{999}}, tag_of(0.5), 1), NotFoundError);
    SalienceTag bad;
    bad.urgency = 1.5;
    CHECK_THROWS_AS(g.add_episode("x", {a}, bad, 1), ValidationError);
}

TEST_CASE("reconsolidation applies the testing effect, capped at 1") {
    MemoryGraph g;
    const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0), c = g.add_concept("c", 0);
    g.connect(a, b, 0.3, 0);
    g.connect(a, c, 0.98, 0);
    std::vector<NodeId> seeds{b, c};
    g.reconsolidate(a, seeds, false, 1);
    CHECK(*g.edge_weight(a, b) == doctest::Approx(0.3));
    g.reconsolidate(a, seeds, true, 1);
    CHECK(*g.edge_weight(a, b) == doctest::Approx(0.35));
    CHECK(*g.edge_weight(a, c) == doctest::Approx(1.0));
}

TEST_CASE("density examples") {
    MemoryGraph g;
    const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0);
    CHECK(g.local_density(a) == 0.0);
    g.connect(a, b, 1.0, 0);
    CHECK(g.local_density(a) == doctest::Approx(1.0 - std::exp(-0.2)));
    CHECK(g.local_density(a) == doctest::Approx(0.181).epsilon(0.002));
    // episode links do not count toward density
    g.add_episode("only a", {a}, tag_of(1.0), 1);
    CHECK(g.local_density(a) == doctest::Approx(1.0 - std::exp(-0.2)));
}

TEST_CASE("spread examples") {
    SUBCASE("single edge, no decay") {
        MemoryGraph g;
        const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0);
        g.connect(a, b, 0.5, 0);
        const auto act = g.spread_activation({{a, 1.0}}, 1.0, 3, 0.05);
        CHECK(act.at(a) == doctest::Approx(1.0));
        CHECK(act.at(b) == doctest::Approx(0.5));
    }
    SUBCASE("chain") {
        MemoryGraph g;
        const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0), c = g.add_concept("c", 0);
        g.connect(a, b, 0.5, 0);
        g.connect(b, c, 0.5, 0);
        const auto act = g.spread_activation({{a, 1.0}}, 0.8, 2, 0.05);
        CHECK(act.at(b) == doctest::Approx(0.4));
        CHECK(act.at(c) == doctest::Approx(0.16));
        const auto one_hop = g.spread_activation({{a, 1.0}}, 0.8, 1, 0.05);
        CHECK_FALSE(one_hop.contains(c));
    }
    SUBCASE("diamond paths sum") {
        MemoryGraph g;
        const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0), c = g.add_concept("c", 0),
                   d = g.add_concept("d", 0);
        g.connect(a, b, 0.5, 0);
        g.connect(a, c, 0.5, 0);
        g.connect(b, d, 0.5, 0);
        g.connect(c, d, 0.5, 0);
        const auto act = g.spread_activation({{a, 1.0}}, 1.0, 2, 0.05);
        CHECK(act.at(d) == doctest::Approx(0.5));
    }
    SUBCASE("floor drops weak nodes and totals clamp") {
        MemoryGraph g;
        const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0), c = g.add_concept("c", 0);
        g.connect(a, b, 0.04, 0);
        g.connect(a, c, 1.0, 0);
        g.connect(b, c, 1.0, 0);
        const auto act = g.spread_activation({{a, 1.0}, {b, 1.0}}, 1.0, 1, 0.05);
        CHECK(act.at(c) == doctest::Approx(1.0));
        CHECK(act.at(b) == doctest::Approx(1.0));
    }
}

TEST_CASE("spread matches brute-force tuple enumeration on 200 random graphs") {
    std::mt19937_64 rng(20240611);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = std::uniform_int_distribution<int>(1, 12)(rng);
        const auto sg = oracle::random_graph(rng, n, 20);
        MemoryGraph g;
        const auto ids = load_small(g, sg);
        std::map<int, double> seeds;
        std::map<NodeId, double> gseeds;
        const int k = std::uniform_int_distribution<int>(1, std::min(3, n))(rng);
        for (int s = 0; s < k; ++s) {
            const int v = std::uniform_int_distribution<int>(0, n - 1)(rng);
            const double a = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
            seeds[v] = a;
            gseeds[ids[v]] = a;
        }
        const double decay = std::uniform_real_distribution<double>(0.5, 1.0)(rng);
        const int hops = std::uniform_int_distribution<int>(1, 4)(rng);
        const auto want = oracle::spread(sg, seeds, decay, hops, 0.05);
        const auto got = g.spread_activation(gseeds, decay, hops, 0.05);
        for (int i = 0; i < n; ++i) {
            if (want[i] < 0) {
                CHECK_FALSE(got.contains(ids[i]));
                continue;
            }
            REQUIRE(got.contains(ids[i]));
            worst = std::max(worst, std::abs(got.at(ids[i]) - want[i]));
        }
        CHECK(got.size() == static_cast<std::size_t>(std::count_if(want.begin(), want.end(),
                                                                   [](double v) { return v >= 0; })));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("deliberate search matches exhaustive path scoring") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = std::uniform_int_distribution<int>(1, 12)(rng);
        const auto sg = oracle::random_graph(rng, n, 20);
        MemoryGraph g;
        const auto ids = load_small(g, sg);
        const int q = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const auto want = oracle::relevance(sg, {q});
        CostMeter meter;
        std::vector<NodeId> query{ids[q]};
        const auto hits = g.deliberate_search(query, 1000, meter);
        std::size_t reachable = 0;
        for (int i = 0; i < n; ++i) reachable += want[i] >= 0 ? 1 : 0;
        REQUIRE(hits.size() == reachable);
        CHECK(meter.node_visits == reachable);
        for (std::size_t h = 0; h < hits.size(); ++h) {
            const auto idx = std::find(ids.begin(), ids.end(), hits[h].id) - ids.begin();
            REQUIRE(idx < n);
            CHECK(std::abs(hits[h].score - want[idx]) <= 1e-12);
            if (h > 0) {
                CHECK(hits[h - 1].score >= hits[h].score);
                if (hits[h - 1].score == hits[h].score) CHECK(hits[h - 1].id < hits[h].id);
            }
        }
    }
}

TEST_CASE("deliberate search respects the budget and rejects zero") {
    MemoryGraph g;
    const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0), c = g.add_concept("c", 0);
    g.connect(a, b, 0.9, 0);
    g.connect(b, c, 0.9, 0);
    CostMeter meter;
    std::vector<NodeId> q{a};
    CHECK(g.deliberate_search(q, 2, meter).size() == 2);
    CHECK(meter.node_visits == 2);
    CHECK_THROWS_AS((void)g.deliberate_search(q, 0, meter), ValidationError);
}

TEST_CASE("write_gist validates and links identity gists to SELF") {
    MemoryGraph g;
    const auto key = GistWriteKeyTestAccess::key();
    const auto role = g.add_concept("role", 0);
    auto gist = simple_gist();
    gist.contextual.insert(kSelfContext);
    g.write_gist(key, role, gist, 0.95, 3, GistSource::investigation, 1);
    REQUIRE(g.edge_weight(kSelfId, role));
    CHECK(*g.edge_weight(kSelfId, role) == doctest::Approx(1.0));
    CHECK(g.is_identity_gist(role));
    CHECK(g.self_linked(role));
    CHECK(g.identity_gists().size() == 1);
    CHECK(g.gist_audit().back().source == GistSource::investigation);

    auto bad = simple_gist(0.5, 1.2);
    CHECK_THROWS_AS(g.write_gist(key, role, bad, 0.5, 4, GistSource::catharsis, 2), ValidationError);
    CHECK(g.gist_lookup(role)->precision == doctest::Approx(0.8));
    CHECK_THROWS_AS(g.write_gist(key, role, gist, 1.5, 4, GistSource::catharsis, 2), ValidationError);
    CHECK_THROWS_AS(g.write_gist(key, NodeId{999}, gist, 0.5, 4, GistSource::catharsis, 2), NotFoundError);

    auto unsorted = simple_gist();
    unsorted.associative = {{kSelfId, 0.2}, {role, 0.9}};
    const auto other = g.add_concept("other", 0);
    CHECK_THROWS_AS(g.write_gist(key, other, unsorted, 0.5, 4, GistSource::catharsis, 2), ValidationError);
}

TEST_CASE("weak self-referencing gist does not get a core link") {
    MemoryGraph g;
    const auto c = g.add_concept("hobby", 0);
    auto gist = simple_gist();
    gist.contextual.insert(kSelfContext);
    g.write_gist(GistWriteKeyTestAccess::key(), c, gist, 0.5, 1, GistSource::investigation, 1);
    CHECK_FALSE(g.is_identity_gist(c));
    CHECK_FALSE(g.edge_weight(kSelfId, c).has_value());
}

TEST_CASE("gist lookup costs one node access regardless of graph size") {
    for (int size : {10, 1000, 20000}) {
        MemoryGraph g;
        NodeId last;
        for (int i = 0; i < size; ++i) last = g.add_concept("c" + std::to_string(i), 0);
        g.write_gist(GistWriteKeyTestAccess::key(), last, simple_gist(), 0.5, 1, GistSource::investigation, 1);
        const auto before = g.lookup_ops();
        CHECK(g.gist_lookup(last).has_value());
        CHECK_FALSE(g.gist_lookup(kSelfId).has_value());
        CHECK(g.lookup_ops() - before == 2);
    }
}

TEST_CASE("compression keeps structure and is idempotent") {
    MemoryGraph g;
    const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0);
    const auto ep = g.add_episode("a met b at the market", {a, b}, tag_of(0.8), 1, Fact{"a", "met", "b"});
    const auto edges = g.edge_count();
    const auto w = *g.edge_weight(a, b);
    CHECK(g.compress_tick(201) == 0);
    CHECK(g.compress_tick(202) == 1);
    const auto& e = g.episode(ep);
    CHECK(e.degraded);
    CHECK_FALSE(e.fact.has_value());
    CHECK(e.content.find("a,b") != std::string::npos);
    CHECK(e.concept_refs == std::vector<NodeId>{a, b});
    CHECK(g.edge_count() == edges);
    CHECK(*g.edge_weight(a, b) == w);
    const auto digest = e.content;
    CHECK(g.compress_tick(500) == 0);
    CHECK(g.episode(ep).content == digest);
}

TEST_CASE("graph JSON round-trip is byte-identical") {
    MemoryGraph g;
    const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0), c = g.add_concept("c", 1);
    g.add_episode("a b", {a, b}, tag_of(0.7), 1, Fact{"a", "likes", "b"});
    g.add_episode("b c", {b, c}, tag_of(0.65), 2);
    auto gist = simple_gist(0.4, 0.9);
    gist.associative = {{b, 0.45}};
    gist.contextual = {"fact:likes=b", "src:user"};
    g.write_gist(GistWriteKeyTestAccess::key(), a, gist, 0.7, 3, GistSource::investigation, 1);
    g.compress_tick(300);
    const auto text = g.to_json().dump();
    const auto back = MemoryGraph::from_json(nlohmann::json::parse(text));
    CHECK(back.to_json().dump() == text);
    CHECK(back.serialize_concept(a) == g.serialize_concept(a));
    CHECK(back.find_concept("c") == c);
    CHECK(back.gist_lookup(a) == g.gist_lookup(a));
}

TEST_CASE("journal replay rebuilds the same graph") {
    struct Lines : JournalSink {
        std::vector<std::string> lines;
        void append(const std::string& l) override { lines.push_back(l); }
    } sink;
    MemoryGraph g;
    g.set_journal(&sink);
    const auto a = g.add_concept("a", 0), b = g.add_concept("b", 0);
    g.add_episode("a b", {a, b}, tag_of(0.7), 1);
    g.connect(a, b, 0.9, 2);
    std::vector<NodeId> seeds{b};
    g.reconsolidate(a, seeds, true, 3);
    g.write_gist(GistWriteKeyTestAccess::key(), a, simple_gist(), 0.6, 4, GistSource::investigation, 1);
    MemoryGraph r;
    for (const auto& l : sink.lines) r.apply_journal_line(l);
    CHECK(r.to_json().dump() == g.to_json().dump());
}

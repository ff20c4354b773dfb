#include "engram/core.hpp"
#include "engram/lexicon.hpp"
#include "engram/serialization.hpp"

#include <doctest.h>

using namespace engram;

TEST_CASE("salience aggregate is the channel maximum") {
    SalienceTag t;
    t.urgency = 0.7;
    t.trust = 0.2;
    CHECK(t.aggregate() == 0.7);
    CHECK(t.valid());
    t.channel(3) = 0.9;
    CHECK(t.novelty == 0.9);
    CHECK(t.aggregate() == 0.9);
    t.goal = -0.1;
    CHECK_FALSE(t.valid());
}

TEST_CASE("fact labels round-trip") {
    const auto l = fact_label("color", "green");
    CHECK(l == "fact:color=green");
    const auto p = parse_fact_label(l);
    REQUIRE(p);
    CHECK(p->first == "color");
    CHECK(p->second == "green");
    CHECK_FALSE(parse_fact_label("src:user"));
    ValenceVector g;
    g.contextual = {l, "self"};
    CHECK(g.believed("color") == "green");
    CHECK_FALSE(g.believed("size"));
    CHECK(g.references_self());
}

TEST_CASE("valence vector validation") {
    ValenceVector g;
    CHECK_NOTHROW(validate(g, 8));
    g.emotional.valence = -1.0;
    g.emotional.arousal = 1.0;
    CHECK_NOTHROW(validate(g, 8));
    g.emotional.valence = -1.1;
    CHECK_THROWS_AS(validate(g, 8), ValidationError);
    g.emotional.valence = 0;
    g.density = 1.01;
    CHECK_THROWS_AS(validate(g, 8), ValidationError);
    g.density = 0.5;
    for (std::uint64_t i = 0; i < 9; ++i) g.associative.push_back({NodeId{i + 2}, 0.5});
    CHECK_THROWS_AS(validate(g, 8), ValidationError);
    normalize_associations(g.associative, 8);
    CHECK(g.associative.size() == 8);
    CHECK(g.associative.front().target == NodeId{2});
    CHECK_NOTHROW(validate(g, 8));
}

TEST_CASE("associations sort by weight, then id") {
    std::vector<Association> a{{NodeId{5}, 0.2}, {NodeId{3}, 0.9}, {NodeId{2}, 0.2}};
    normalize_associations(a, 8);
    CHECK(a[0].target == NodeId{3});
    CHECK(a[1].target == NodeId{2});
    CHECK(a[2].target == NodeId{5});
}

TEST_CASE("tokenize lowercases and splits on punctuation") {
    CHECK(tokenize("Hello, World! it's 42") == std::vector<std::string>{"hello", "world", "it's", "42"});
    CHECK(tokenize("  ").empty());
}

TEST_CASE("content hash is FNV-1a") {
    CHECK(content_hash("") == "cbf29ce484222325");
    CHECK(content_hash("a") == "af63dc4c8601ec8c");
}

TEST_CASE("value types JSON round-trip") {
    ValenceVector g;
    g.emotional = {-0.4, 0.6};
    g.associative = {{NodeId{7}, 0.8}};
    g.contextual = {"fact:a=b"};
    g.density = 0.3;
    g.precision = 0.9;
    nlohmann::json j = g;
    CHECK(j.get<ValenceVector>() == g);
    SalienceTag t;
    t.goal = 0.25;
    nlohmann::json jt = t;
    CHECK(jt.get<SalienceTag>() == t);
    CHECK_THROWS_AS(field<double>(nlohmann::json::object(), "x"), SchemaError);
    CHECK_THROWS_AS(field<double>(nlohmann::json{{"x", "text"}}, "x"), SchemaError);
}

TEST_CASE("lexicon parsing") {
    const auto lex = Lexicon::parse("# comment\nscared\t0.8\nhappy\t-0.5\nurgent\n", 0.6);
    CHECK(lex.size() == 3);
    CHECK(lex.lookup("urgent") == 0.6);
    CHECK(lex.strongest({"happy", "scared"}) == 0.8);
    CHECK(lex.strongest({"happy"}) == -0.5);
    CHECK(lex.strongest({"nothing"}) == 0.0);
    CHECK(lex.any({"x", "urgent"}));
    CHECK_THROWS_AS(Lexicon::parse("a\tlots\n", 0.5), ParseError);
    CHECK_THROWS_AS(Lexicon::parse("a\t2\n", 0.5), ParseError);
    CHECK_THROWS_AS(Lexicon::parse("two words\n", 0.5), ParseError);
    CHECK_THROWS_AS(Lexicon::load("/nonexistent/lexicon.txt", 0.5), NotFoundError);
    CHECK(Lexicon::parse(bundled_affect_lexicon(), 0.5).size() > 0);
    CHECK(Lexicon::parse(bundled_override_lexicon(), 0.5).size() > 0);
}

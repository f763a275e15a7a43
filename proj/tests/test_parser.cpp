#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace kahania;

TEST_CASE("basic parses", "[parser]") {
    CHECK(parse("1 + 2*3") == integer(7));
    CHECK(parse("z^2") == pow(sym("z"), integer(2)));
    CHECK(parse("2^3^2") == integer(512));  // right-associative
    CHECK(parse("-z^2") == neg(pow(sym("z"), integer(2))));
    CHECK(parse("(1+z)/(1-z)") ==
          mul({add({integer(1), sym("z")}),
               pow(add({integer(1), neg(sym("z"))}), integer(-1))}));
    CHECK(parse("sqrt(z)") == sqrt_(sym("z")));
    CHECK(parse("ComplexInfinity").kind() == Kind::ComplexInfinity);
    CHECK(parse("Indeterminate").kind() == Kind::Indeterminate);
}

TEST_CASE("decimals become exact rationals", "[parser]") {
    CHECK(parse("0.5") == rational(1, 2));
    CHECK(parse("1.25") == rational(5, 4));
    CHECK(parse("2.") == integer(2));
}

TEST_CASE("parse errors carry positions", "[parser]") {
    auto bad = [](const std::string& s) {
        try {
            parse(s);
        } catch (const ParseError& e) {
            SourceSpan sp = e.span();
            CHECK(sp.begin <= s.size());
            CHECK(sp.end >= sp.begin);
            return;
        }
        FAIL("expected ParseError for: " << s);
    };
    bad("1 + ");
    bad("sin(");
    bad("1 @ 2");
    bad("(1+2");
    bad("z z");
    CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("parse-render round trip on random expressions", "[parser][property]") {
    std::mt19937 rng(7u);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        Expr e = simplify(testutil::random_expr(rng, 5));
        std::string s = render(e);
        Expr back;
        INFO("expr: " << s);
        REQUIRE_NOTHROW(back = parse(s));
        CHECK(back == e);
        ++checked;
    }
    CHECK(checked == 500);
}

TEST_CASE("json schema", "[parser]") {
    nlohmann::json j = to_json(parse("z^2 + 1/3"));
    REQUIRE(j["op"] == "Add");
    REQUIRE(j["args"].is_array());
    bool saw_rat = false, saw_pow = false;
    for (const auto& a : j["args"]) {
        if (a["op"] == "Rat") {
            saw_rat = true;
            CHECK(a["num"] == 1);
            CHECK(a["den"] == 3);
        }
        if (a["op"] == "Pow") saw_pow = true;
    }
    CHECK(saw_rat);
    CHECK(saw_pow);
    CHECK(to_json(sym("alpha")) == nlohmann::json({{"op", "Sym"}, {"name", "alpha"}}));
    CHECK(to_json(integer(-4)) == nlohmann::json({{"op", "Int"}, {"num", -4}}));
}

TEST_CASE("latex rendering", "[parser]") {
    CHECK(render(rational(1, 2), RenderFormat::Latex) == "\\frac{1}{2}");
    CHECK(render(sym("alpha"), RenderFormat::Latex) == "\\alpha ");
    std::string p = render(parse("(1+alpha)^(-1)"), RenderFormat::Latex);
    CHECK(p == "\\left(1 + \\alpha \\right)^{-1}");
    CHECK(render(sqrt_(sym("z")), RenderFormat::Latex) == "\\sqrt{z}");
    std::string m = render(parse("(1+z)*z"), RenderFormat::Latex);
    CHECK(m.find("\\left(") != std::string::npos);  // sum factor parenthesized
}

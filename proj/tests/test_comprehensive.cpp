#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace kahania;

static const Consequent* find_arm(const PiecewiseAntiderivative& pw,
                                  const std::set<std::string>& when) {
    for (const Consequent& c : pw.consequents) {
        std::set<std::string> got;
        for (const Constraint& k : c.when) got.insert(k.display());
        if (got == when) return &c;
    }
    return nullptr;
}

TEST_CASE("square-root reciprocal comprehensive", "[comprehensive]") {
    Expr f = parse("1/(z*sqrt(z^2-alpha^2))");
    auto pw = build_comprehensive(f, "z", {"alpha"});
    REQUIRE(pw.consequents.size() == 1);
    const Consequent* arm = find_arm(pw, {"alpha=0"});
    REQUIRE(arm != nullptr);
    CHECK(equivalent(arm->body, parse("-1/sqrt(z^2)")));
    CHECK(equivalent(pw.genericBody, parse("arccot(alpha/sqrt(z^2-alpha^2))/alpha")));

    auto kz = kahanianize(pw, "z", integer(1));
    CHECK(kz.kahanianized);
    CHECK(equivalent(kz.consequents[0].body, parse("-1/sqrt(z^2) + 1")));
    CHECK(equivalent(kz.genericBody,
                     parse("arccot(alpha/sqrt(z^2-alpha^2))/alpha"
                           " - arccot(alpha/sqrt(1-alpha^2))/alpha")));
}

TEST_CASE("arms are ordered most-constrained first and selected first-match",
          "[comprehensive]") {
    Expr f = parse("(alpha^(lambda*z) - alpha^(sigma*z))^2");
    auto pw = build_comprehensive(f, "z", {"alpha", "lambda", "sigma"});
    for (std::size_t i = 1; i < pw.consequents.size(); ++i)
        CHECK(pw.consequents[i - 1].when.size() >= pw.consequents[i].when.size());

    // sigma = 0 binding picks the sigma=0 arm, not the generic one
    Binding b{{"alpha", {3.0, 0.0}}, {"lambda", {1.0, 0.0}}, {"sigma", {0.0, 0.0}},
              {"z", {0.7, 0.0}}};
    const Expr& sel = select_arm(pw, b);
    const Consequent* arm = find_arm(pw, {"sigma=0"});
    REQUIRE(arm != nullptr);
    CHECK(sel == arm->body);

    // a fully generic binding falls through to the generic body
    b["sigma"] = {2.0, 0.0};
    CHECK(select_arm(pw, b) == pw.genericBody);
}

TEST_CASE("kahanianize preserves each arm's derivative", "[comprehensive][property]") {
    Expr f = parse("(alpha^(lambda*z) - alpha^(sigma*z))^2");
    auto pw = build_comprehensive(f, "z", {"alpha", "lambda", "sigma"});
    auto kz = kahanianize(pw, "z", integer(0));
    REQUIRE(kz.consequents.size() == pw.consequents.size());
    for (std::size_t i = 0; i < pw.consequents.size(); ++i) {
        const Consequent& a = pw.consequents[i];
        const Consequent& k = kz.consequents[i];
        if (a.unevaluated || is_special_atom(a.body)) continue;
        CHECK(is_zero_equiv(differentiate(add({k.body, neg(a.body)}), "z")));
        // and the kahanianized arm vanishes at the anchor
        CHECK(is_zero_equiv(substitute(k.body, "z", integer(0))));
    }
}

TEST_CASE("continuity check on the kahanianized square-root example",
          "[comprehensive]") {
    Expr f = parse("1/(z*sqrt(z^2-alpha^2))");
    auto kz = kahanianize(build_comprehensive(f, "z", {"alpha"}), "z", integer(1));
    auto rep = continuity_check(kz, "z");
    REQUIRE_FALSE(rep.checks.empty());
    CHECK(rep.allPass);
    bool saw = false;
    for (const auto& c : rep.checks)
        if (c.applicable) {
            saw = true;
            CHECK(c.pass);
        }
    CHECK(saw);
}

TEST_CASE("continuity check reports the pole of the raw generic arm",
          "[comprehensive]") {
    Expr f = parse("1/(z*sqrt(z^2-alpha^2))");
    auto pw = build_comprehensive(f, "z", {"alpha"});
    auto rep = continuity_check(pw, "z");
    REQUIRE_FALSE(rep.checks.empty());
    CHECK_FALSE(rep.allPass);
    bool saw_pole = false;
    for (const auto& c : rep.checks)
        if (c.applicable && !c.pass && c.method == "pole") {
            saw_pole = true;
            CHECK(c.witness.rfind("Pole(", 0) == 0);
        }
    CHECK(saw_pole);
}

TEST_CASE("special-atom arms are skipped, not failed", "[comprehensive]") {
    Expr f = parse("alpha^(lambda*z)");
    auto pw = build_comprehensive(f, "z", {"alpha", "lambda"});
    auto rep = continuity_check(pw, "z");
    bool saw_skip = false;
    for (const auto& c : rep.checks)
        if (!c.applicable && c.method.rfind("skipped", 0) == 0) saw_skip = true;
    CHECK(saw_skip);
}

TEST_CASE("json serialization schema", "[comprehensive]") {
    Expr f = parse("z^alpha");
    auto pw = kahanianize(build_comprehensive(f, "z", {"alpha"}), "z", integer(1));
    nlohmann::json j = to_json(pw);
    REQUIRE(j.contains("arms"));
    REQUIRE(j.contains("otherwise"));
    REQUIRE(j["kahanian"] == true);
    REQUIRE(j["arms"].is_array());
    REQUIRE(j["arms"].size() == 1);
    const auto& arm = j["arms"][0];
    CHECK(arm["when"] == nlohmann::json::array({"alpha=-1"}));
    CHECK(arm.contains("unless"));
    CHECK(arm["body"].contains("op"));
}

TEST_CASE("kahanianize refuses non-constant anchors", "[comprehensive]") {
    auto pw = build_comprehensive(parse("z^alpha"), "z", {"alpha"});
    CHECK_THROWS_AS(kahanianize(pw, "z", sym("w")), InfiniteAnchor);
}

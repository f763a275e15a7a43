#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace kahania;

TEST_CASE("quadrature reference values", "[verify]") {
    Binding empty;
    QuadratureResult q =
        quadrature(parse("1/z"), "z", {1.0, 0.0}, {2.0, 0.0}, empty, 1e-12);
    REQUIRE(q.converged);
    CHECK(std::abs(q.value.real() - 0.69314718055994531) < 1e-10);
    CHECK(std::abs(q.value.imag()) < 1e-12);

    q = quadrature(parse("sin(z)"), "z", {0.0, 0.0}, {3.141592653589793, 0.0}, empty);
    REQUIRE(q.converged);
    CHECK(std::abs(q.value.real() - 2.0) < 1e-8);

    q = quadrature(parse("exp(z)"), "z", {0.0, 0.0}, {1.0, 0.0}, empty);
    REQUIRE(q.converged);
    CHECK(std::abs(q.value.real() - 1.718281828459045) < 1e-8);
}

TEST_CASE("quadrature additivity", "[verify][property]") {
    Binding b{{"alpha", {0.7, 0.0}}};
    Expr f = parse("z^2*cos(alpha*z)");
    Complex a{-1.0, 0.0}, m{0.4, 0.3}, c{2.0, 0.0};
    QuadratureResult whole = quadrature(f, "z", a, c, b);
    QuadratureResult left = quadrature(f, "z", a, m, b);
    QuadratureResult right = quadrature(f, "z", m, c, b);
    REQUIRE(whole.converged);
    REQUIRE(left.converged);
    REQUIRE(right.converged);
    // path independence of an entire integrand: split through a complex midpoint
    CHECK(std::abs(whole.value - (left.value + right.value)) < 1e-8);
}

TEST_CASE("degenerate and exhausted quadrature", "[verify]") {
    Binding empty;
    QuadratureResult q = quadrature(parse("exp(z)"), "z", {1.0, 2.0}, {1.0, 2.0}, empty);
    CHECK(q.converged);
    CHECK(std::abs(q.value) == 0.0);

    // a hard singular integrand on a tiny budget must not claim convergence
    q = quadrature(parse("1/sqrt(z^2)"), "z", {1e-9, 0.0}, {1.0, 0.0}, empty, 1e-12, 200);
    CHECK_FALSE(q.converged);
    CHECK(q.evaluations <= 202);
}

TEST_CASE("round-trip accepts true antiderivatives", "[verify][property]") {
    struct Fix {
        const char* f;
        const char* G;
    };
    const Fix fixtures[] = {
        {"z^3", "z^4/4"},
        {"cos(z)", "sin(z)"},
        {"1/z", "ln(z)"},
        {"exp(lambda*z)", "exp(lambda*z)/lambda"},
    };
    for (const auto& fx : fixtures) {
        RoundtripReport rep = diff_roundtrip_check(parse(fx.G), parse(fx.f), "z");
        INFO(fx.f << " / worst " << rep.worstWitness);
        CHECK(rep.pass);
        CHECK(rep.samples == 50);
        CHECK(rep.maxRelDeviation <= 1e-9);
    }
}

TEST_CASE("round-trip rejects wrong candidates", "[verify]") {
    RoundtripReport rep = diff_roundtrip_check(parse("z^4/4 + z"), parse("z^3"), "z");
    CHECK_FALSE(rep.pass);
    CHECK(rep.maxRelDeviation > 1e-3);
    CHECK_FALSE(rep.worstWitness.empty());
}

TEST_CASE("round-trip respects constraint margins", "[verify]") {
    // samples near alpha = -1 would blow up; the margin keeps them out
    Expr f = parse("z^alpha");
    Expr G = antiderivative(f, "z");
    std::vector<Constraint> avoid{Constraint{add({sym("alpha"), integer(1)})}};
    RoundtripReport rep = diff_roundtrip_check(G, f, "z", avoid);
    CHECK(rep.pass);
    CHECK(rep.samples == 50);
}

TEST_CASE("quadrature cross-checks the symbolic engine", "[verify][property]") {
    const char* fixtures[] = {"sin(2*z+1)", "ln(2*z+3)", "z^4", "exp(3*z)"};
    Binding empty;
    for (const char* fx : fixtures) {
        Expr f = parse(fx);
        Expr G = antiderivative(f, "z");
        Binding b1{{"z", {0.5, 0.0}}}, b2{{"z", {1.9, 0.0}}};
        Complex expect = eval_numeric(G, b2) - eval_numeric(G, b1);
        QuadratureResult q = quadrature(f, "z", {0.5, 0.0}, {1.9, 0.0}, empty);
        REQUIRE(q.converged);
        INFO(fx);
        CHECK(std::abs(q.value - expect) < 1e-8);
    }
}

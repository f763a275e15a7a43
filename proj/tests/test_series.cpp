#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace kahania;

static Expr coeff(const SeriesExpansion& s, int k) {
    if (k < s.minOrder) return integer(0);
    std::size_t i = static_cast<std::size_t>(k - s.minOrder);
    return i < s.coefficients.size() ? s.coefficients[i] : integer(0);
}

TEST_CASE("power-minus-one family about the degenerate exponent", "[series]") {
    // z^a/a as a Laurent series in a about 0: 1/a + ln z + (ln z)^2/2 * a + ...
    Expr e = parse("z^a/a");
    SeriesExpansion s = laurent_series(e, "a", integer(0), 1);
    REQUIRE(s.minOrder == -1);
    CHECK(coeff(s, -1) == integer(1));
    CHECK(equivalent(coeff(s, 0), parse("ln(z)")));
    CHECK(equivalent(coeff(s, 1), parse("ln(z)^2/2")));
    Binding b{{"z", {1.7, 0.0}}, {"a", {0.01, 0.0}}};
    Complex truth = eval_numeric(e, b);
    Complex approx{0.0, 0.0};
    for (int k = s.minOrder; k <= s.truncationOrder; ++k)
        approx += eval_numeric(coeff(s, k), b) * std::pow(Complex(0.01, 0.0), k);
    CHECK(std::abs(truth - approx) < 1e-4);
}

TEST_CASE("simple limits", "[series]") {
    auto lr = limit(parse("sin(z)/z"), "z", integer(0));
    REQUIRE(lr.is_finite());
    CHECK(lr.value == integer(1));

    lr = limit(parse("(exp(z)-1)/z"), "z", integer(0));
    REQUIRE(lr.is_finite());
    CHECK(lr.value == integer(1));

    lr = limit(parse("(z^a - 1)/a"), "a", integer(0));
    REQUIRE(lr.is_finite());
    CHECK(equivalent(lr.value, parse("ln(z)")));

    lr = limit(parse("(1-cos(z))/z^2"), "z", integer(0));
    REQUIRE(lr.is_finite());
    CHECK(lr.value == rational(1, 2));
}

TEST_CASE("limits at non-zero points", "[series]") {
    auto lr = limit(parse("(z^2-4)/(z-2)"), "z", integer(2));
    REQUIRE(lr.is_finite());
    CHECK(lr.value == integer(4));

    lr = limit(parse("sin(z - 1)/(z^2 - 1)"), "z", integer(1));
    REQUIRE(lr.is_finite());
    CHECK(equivalent(lr.value, rational(1, 2)));
}

TEST_CASE("pole detection", "[series]") {
    auto lr = limit(parse("1/z^2"), "z", integer(0));
    REQUIRE(lr.is_pole());
    CHECK(lr.order == 2);

    lr = limit(parse("1/sin(z)"), "z", integer(0));
    REQUIRE(lr.is_pole());
    CHECK(lr.order == 1);

    // logarithmic divergence reports the weakest pole order
    lr = limit(parse("ln(z)"), "z", integer(0));
    REQUIRE(lr.is_pole());
    CHECK(lr.order == 1);
}

TEST_CASE("pole order property", "[series][property]") {
    for (int m = 1; m <= 5; ++m) {
        Expr e = mul({parse("exp(z)"), pow(sym("z"), integer(-m))});
        auto lr = limit(e, "z", integer(0));
        REQUIRE(lr.is_pole());
        CHECK(lr.order == m);
    }
}

TEST_CASE("essential singularities are refused", "[series]") {
    CHECK_THROWS_AS(limit(parse("exp(1/z)"), "z", integer(0)), EssentialSingularity);
    CHECK_THROWS_AS(limit(parse("sin(1/z)"), "z", integer(0)), EssentialSingularity);
}

TEST_CASE("truncation error shrinks at the expected rate", "[series][property]") {
    // remainder of an order-n truncation scales like h^(n+1)
    const char* fixtures[] = {"exp(z)", "1/(1-z)", "ln(1+z)", "sqrt(1+z)", "arccot(1+z)"};
    for (const char* fx : fixtures) {
        Expr f = parse(fx);
        SeriesExpansion s = laurent_series(f, "z", integer(0), 6);
        auto rem = [&](double h) {
            Binding b{{"z", {h, 0.0}}};
            Complex truth = eval_numeric(f, b);
            Complex approx{0.0, 0.0};
            for (int k = s.minOrder; k <= 6; ++k)
                approx += eval_numeric(coeff(s, k), b) * std::pow(Complex(h, 0.0), k);
            return std::abs(truth - approx);
        };
        double r1 = rem(0.1), r2 = rem(0.05);
        INFO(fx << " r1=" << r1 << " r2=" << r2);
        CHECK(r1 < 1e-6);
        // halving h should shrink the remainder by about 2^7; demand at least 2^5
        if (r1 > 1e-14) CHECK(r2 < r1 / 32.0);
    }
}

TEST_CASE("series of an identically zero expression", "[series]") {
    SeriesExpansion s = laurent_series(parse("z - z"), "z", integer(0), 4);
    CHECK(s.coefficients.empty());
    auto lr = limit(parse("0"), "z", integer(0));
    REQUIRE(lr.is_finite());
    CHECK(is_zero(lr.value));
}

TEST_CASE("parameters ride along as symbolic coefficients", "[series]") {
    SeriesExpansion s = laurent_series(parse("exp(alpha*z)"), "z", integer(0), 3);
    CHECK(s.minOrder == 0);
    CHECK(coeff(s, 0) == integer(1));
    CHECK(coeff(s, 1) == sym("alpha"));
    CHECK(equivalent(coeff(s, 2), parse("alpha^2/2")));
    CHECK(equivalent(coeff(s, 3), parse("alpha^3/6")));
}

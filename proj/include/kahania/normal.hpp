#pragma once

#include <map>
#include <vector>

#include "kahania/expr.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Rational normalization: rewrite an expression as a single fraction with a
// fully expanded numerator over a factored denominator, and the structural
// zero-equivalence test built on it. Non-rational subexpressions (exp, ln,
// sin, ...) are treated as opaque atoms.
// ---------------------------------------------------------------------------

namespace detail {

// full distribution of products/integer powers of sums, no size caps
inline Expr expand_full(const Expr& e) {
    switch (e.kind()) {
        case Kind::Add: {
            std::vector<Expr> ts;
            for (const Expr& t : e.args()) ts.push_back(expand_full(t));
            return add(std::move(ts));
        }
        case Kind::Pow: {
            Expr b = expand_full(e.arg(0));
            const Rational& ev = e.arg(1).value();
            if (b.kind() == Kind::Add && ev >= 2) {
                long n = static_cast<long>(boost::multiprecision::numerator(ev));
                std::vector<Expr> terms = {one()};
                for (long i = 0; i < n; ++i) {
                    std::vector<Expr> next;
                    for (const Expr& t : terms)
                        for (const Expr& bt : b.args()) next.push_back(mul({t, bt}));
                    terms = std::move(next);
                }
                return add(std::move(terms));
            }
            return pow(b, e.arg(1));
        }
        case Kind::Mul: {
            std::vector<Expr> factors;
            bool any_sum = false;
            for (const Expr& f : e.args()) {
                Expr g = expand_full(f);
                any_sum = any_sum || g.kind() == Kind::Add;
                factors.push_back(std::move(g));
            }
            if (!any_sum) return mul(std::move(factors));
            std::vector<Expr> terms = {one()};
            for (const Expr& f : factors) {
                std::vector<Expr> next;
                if (f.kind() == Kind::Add) {
                    for (const Expr& t : terms)
                        for (const Expr& ft : f.args()) next.push_back(mul({t, ft}));
                } else {
                    for (const Expr& t : terms) next.push_back(mul({t, f}));
                }
                terms = std::move(next);
            }
            return add(std::move(terms));
        }
        default:
            return e;
    }
}

struct Fraction {
    Expr num;
    Expr den;  // product form, positive powers only
};

inline Fraction to_fraction(const Expr& e);

inline Fraction frac_mul(const Fraction& a, const Fraction& b) {
    return {mul({a.num, b.num}), mul({a.den, b.den})};
}

// factor multiset of a positive-power product
inline std::map<Expr, Rational, ExprLess> den_factors(const Expr& den, Rational& content) {
    std::map<Expr, Rational, ExprLess> fs;
    auto one_factor = [&](const Expr& f) {
        if (is_number(f)) {
            content *= f.value();
        } else if (f.kind() == Kind::Pow) {
            fs[f.arg(0)] += f.arg(1).value();
        } else {
            fs[f] += 1;
        }
    };
    if (den.kind() == Kind::Mul)
        for (const Expr& f : den.args()) one_factor(f);
    else
        one_factor(den);
    return fs;
}

inline Expr from_factors(const std::map<Expr, Rational, ExprLess>& fs,
                         const Rational& content) {
    std::vector<Expr> out;
    if (content != 1) out.push_back(number(content));
    for (const auto& [b, e] : fs)
        if (e != 0) out.push_back(pow(b, number(e)));
    return out.empty() ? one() : mul(std::move(out));
}

// least-common-multiple denominator, so repeated factors are not duplicated
inline Fraction frac_add(const Fraction& a, const Fraction& b) {
    if (a.den == b.den) return {add({a.num, b.num}), a.den};
    Rational ca(1), cb(1);
    auto fa = den_factors(a.den, ca);
    auto fb = den_factors(b.den, cb);
    std::map<Expr, Rational, ExprLess> l = fa;
    for (const auto& [f, e] : fb)
        if (auto it = l.find(f); it == l.end() || it->second < e) l[f] = e;
    Rational cl = ca * cb /
                  Rational(boost::multiprecision::gcd(
                               boost::multiprecision::numerator(ca) *
                                   boost::multiprecision::denominator(cb),
                               boost::multiprecision::numerator(cb) *
                                   boost::multiprecision::denominator(ca)),
                           boost::multiprecision::denominator(ca) *
                               boost::multiprecision::denominator(cb));
    auto cofactor = [&](const std::map<Expr, Rational, ExprLess>& f,
                        const Rational& c) {
        std::map<Expr, Rational, ExprLess> co = l;
        for (const auto& [g, e] : f) co[g] -= e;
        return from_factors(co, cl / c);
    };
    return {add({mul({a.num, cofactor(fa, ca)}), mul({b.num, cofactor(fb, cb)})}),
            from_factors(l, cl)};
}

inline Fraction to_fraction(const Expr& e) {
    switch (e.kind()) {
        case Kind::Add: {
            Fraction acc = to_fraction(e.arg(0));
            for (std::size_t i = 1; i < e.arity(); ++i)
                acc = frac_add(acc, to_fraction(e.arg(i)));
            return acc;
        }
        case Kind::Mul: {
            Fraction acc{one(), one()};
            for (const Expr& f : e.args()) acc = frac_mul(acc, to_fraction(f));
            return acc;
        }
        case Kind::Pow: {
            const Rational& ev = e.arg(1).value();
            Fraction b = to_fraction(e.arg(0));
            if (ev < 0)
                return {pow(b.den, number(-ev)), pow(b.num, number(-ev))};
            return {pow(b.num, number(ev)), pow(b.den, number(ev))};
        }
        case Kind::Number: {
            const Rational& v = e.value();
            return {number(Rational(boost::multiprecision::numerator(v))),
                    number(Rational(boost::multiprecision::denominator(v)))};
        }
        default:
            return {e, one()};
    }
}

}  // namespace detail

/// e as (expanded numerator) / (factored denominator), one expression.
inline Expr rational_normal(const Expr& e) {
    detail::Fraction f = detail::to_fraction(simplify(e));
    Expr num = detail::expand_full(f.num);
    return mul({num, pow(f.den, integer(-1))});
}

/// True when e is 0 as a rational combination of its transcendental atoms:
/// the expanded numerator of its single-fraction form cancels structurally.
inline bool is_zero_equiv(const Expr& e) {
    Expr s = simplify(e);
    if (is_zero(s)) return true;
    if (contains_special(s)) return false;
    detail::Fraction f = detail::to_fraction(s);
    return is_zero(simplify(detail::expand_full(f.num)));
}

/// Structural-up-to-rational-normalization equality.
inline bool equivalent(const Expr& a, const Expr& b) {
    if (a == b) return true;
    return is_zero_equiv(add({a, neg(b)}));
}

}  // namespace kahania

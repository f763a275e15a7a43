#pragma once

#include <algorithm>
#include <cassert>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kahania/errors.hpp"

namespace kahania {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

enum class Kind {
    Number,   // exact rational (integers have denominator 1)
    Symbol,
    Add,
    Mul,
    Pow,      // exponent is always an exact integer Number
    Exp,
    Ln,
    Sin,
    Cos,
    ArcCot,
    Sqrt,
    ComplexInfinity,
    Indeterminate,
};

class Expr;
int compare(const Expr& a, const Expr& b);

struct ExprNode {
    Kind kind;
    Rational value;          // Kind::Number
    std::string name;        // Kind::Symbol
    std::vector<Expr> args;  // composite kinds
};

/// Immutable symbolic expression value. Copies share structure.
class Expr {
public:
    Expr();  // zero

    Kind kind() const { return node_->kind; }
    const Rational& value() const { return node_->value; }
    const std::string& name() const { return node_->name; }
    const std::vector<Expr>& args() const { return node_->args; }
    std::size_t arity() const { return node_->args.size(); }
    const Expr& arg(std::size_t i) const { return node_->args[i]; }

    bool operator==(const Expr& o) const { return compare(*this, o) == 0; }
    bool operator!=(const Expr& o) const { return compare(*this, o) != 0; }

    static Expr make(ExprNode n) {
        return Expr(std::make_shared<const ExprNode>(std::move(n)));
    }

private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const ExprNode> node_;
};

struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

// ---------------------------------------------------------------------------
// Canonicalizing factories
// ---------------------------------------------------------------------------

Expr number(Rational v);
Expr integer(long v);
Expr sym(const std::string& name);
Expr add(std::vector<Expr> terms);
Expr mul(std::vector<Expr> factors);
Expr pow(const Expr& base, const Expr& exponent);
Expr exp_(const Expr& u);
Expr ln_(const Expr& u);
Expr sin_(const Expr& u);
Expr cos_(const Expr& u);
Expr arccot_(const Expr& u);
Expr sqrt_(const Expr& u);
Expr complex_infinity();
Expr indeterminate();

inline Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
inline Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({integer(-1), b})}); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
inline Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, integer(-1))}); }
inline Expr operator-(const Expr& a) { return mul({integer(-1), a}); }

namespace detail {

inline const Expr& zero() {
    static const Expr e = Expr::make({Kind::Number, Rational(0), {}, {}});
    return e;
}
inline const Expr& one() {
    static const Expr e = Expr::make({Kind::Number, Rational(1), {}, {}});
    return e;
}

inline int kind_rank(Kind k) { return static_cast<int>(k); }

}  // namespace detail

inline Expr::Expr() : node_(nullptr) { *this = detail::zero(); }

inline int compare(const Expr& a, const Expr& b) {
    int ra = detail::kind_rank(a.kind()), rb = detail::kind_rank(b.kind());
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (a.kind()) {
        case Kind::Number:
            if (a.value() == b.value()) return 0;
            return a.value() < b.value() ? -1 : 1;
        case Kind::Symbol: {
            int c = a.name().compare(b.name());
            return c < 0 ? -1 : (c > 0 ? 1 : 0);
        }
        case Kind::ComplexInfinity:
        case Kind::Indeterminate:
            return 0;
        default: {
            std::size_t n = std::min(a.arity(), b.arity());
            for (std::size_t i = 0; i < n; ++i) {
                int c = compare(a.arg(i), b.arg(i));
                if (c != 0) return c;
            }
            if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
            return 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Small predicates and helpers
// ---------------------------------------------------------------------------

inline bool is_number(const Expr& e) { return e.kind() == Kind::Number; }
inline bool is_zero(const Expr& e) { return is_number(e) && e.value() == 0; }
inline bool is_one(const Expr& e) { return is_number(e) && e.value() == 1; }
inline bool is_integer_number(const Expr& e) {
    return is_number(e) && boost::multiprecision::denominator(e.value()) == 1;
}
inline bool is_special_atom(const Expr& e) {
    return e.kind() == Kind::ComplexInfinity || e.kind() == Kind::Indeterminate;
}

inline bool contains_special(const Expr& e) {
    if (is_special_atom(e)) return true;
    for (const Expr& a : e.args())
        if (contains_special(a)) return true;
    return false;
}

inline bool contains_symbol(const Expr& e, const std::string& name) {
    if (e.kind() == Kind::Symbol) return e.name() == name;
    for (const Expr& a : e.args())
        if (contains_symbol(a, name)) return true;
    return false;
}

inline void free_symbols(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == Kind::Symbol) out.insert(e.name());
    for (const Expr& a : e.args()) free_symbols(a, out);
}

inline std::set<std::string> free_symbols(const Expr& e) {
    std::set<std::string> s;
    free_symbols(e, s);
    return s;
}

inline std::size_t node_count(const Expr& e) {
    std::size_t n = 1;
    for (const Expr& a : e.args()) n += node_count(a);
    return n;
}

/// Split a canonical term into (numeric coefficient, remaining factor).
inline std::pair<Rational, Expr> split_coeff(const Expr& e) {
    if (is_number(e)) return {e.value(), detail::one()};
    if (e.kind() == Kind::Mul && e.arity() > 0 && is_number(e.arg(0))) {
        if (e.arity() == 2) return {e.arg(0).value(), e.arg(1)};
        std::vector<Expr> rest(e.args().begin() + 1, e.args().end());
        return {e.arg(0).value(), Expr::make({Kind::Mul, Rational(), {}, std::move(rest)})};
    }
    return {Rational(1), e};
}

/// Sign of the leading canonical term; used to normalize sin/cos arguments.
inline bool negative_leading(const Expr& e) {
    switch (e.kind()) {
        case Kind::Number: return e.value() < 0;
        case Kind::Mul:
            return e.arity() > 0 && is_number(e.arg(0)) && e.arg(0).value() < 0;
        case Kind::Add: return e.arity() > 0 && negative_leading(e.arg(0));
        default: return false;
    }
}

namespace detail {

inline bool square_root_exact(const BigInt& v, BigInt& out) {
    if (v < 0) return false;
    BigInt r = boost::multiprecision::sqrt(v);
    if (r * r == v) { out = r; return true; }
    return false;
}

// |exponent| cap for eager numeric powers; larger stays symbolic.
constexpr long kNumericPowCap = 4096;

// Distribute Mul over Add (no power expansion). Used to keep the arguments
// of Exp/Sin/Cos in distributed canonical form so that like terms merge.
Expr distribute_sums(const Expr& u);

// Extract numeric content and common symbolic factors from an Add.
// Returns true and fills (extracted, reduced) when something was pulled out;
// extracted * reduced == input. Mul and Pow normalize Add operands through
// this so that e.g. (a/z + 1/z) * (a+1)^-1 cancels.
bool factor_add(const Expr& addExpr, std::vector<Expr>& extracted, Expr& reduced);

inline bool rational_pow(const Rational& base, const BigInt& e, Rational& out) {
    if (e > kNumericPowCap || e < -kNumericPowCap) return false;
    long n = e.convert_to<long>();
    bool inv = n < 0;
    unsigned long m = inv ? static_cast<unsigned long>(-n) : static_cast<unsigned long>(n);
    Rational acc(1), b = base;
    while (m) {
        if (m & 1) acc *= b;
        b *= b;
        m >>= 1;
    }
    if (inv) {
        if (acc == 0) return false;
        acc = Rational(1) / acc;
    }
    out = acc;
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factory implementations
// ---------------------------------------------------------------------------

inline Expr number(Rational v) {
    return Expr::make({Kind::Number, std::move(v), {}, {}});
}

inline Expr rational(long num, long den) { return number(Rational(num, den)); }

inline Expr integer(long v) { return number(Rational(v)); }

inline Expr sym(const std::string& name) {
    return Expr::make({Kind::Symbol, Rational(), name, {}});
}

inline Expr complex_infinity() {
    static const Expr e = Expr::make({Kind::ComplexInfinity, Rational(), {}, {}});
    return e;
}

inline Expr indeterminate() {
    static const Expr e = Expr::make({Kind::Indeterminate, Rational(), {}, {}});
    return e;
}

inline Expr neg(const Expr& e) { return mul({integer(-1), e}); }

inline Expr add(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    std::vector<Expr> stack(terms.rbegin(), terms.rend());
    while (!stack.empty()) {
        Expr t = stack.back();
        stack.pop_back();
        if (t.kind() == Kind::Add) {
            for (auto it = t.args().rbegin(); it != t.args().rend(); ++it) stack.push_back(*it);
        } else {
            flat.push_back(t);
        }
    }
    bool has_ci = false;
    Rational num(0);
    std::map<Expr, Rational, ExprLess> coeffs;
    for (const Expr& t : flat) {
        if (t.kind() == Kind::Indeterminate) return indeterminate();
        if (t.kind() == Kind::ComplexInfinity) { has_ci = true; continue; }
        if (is_number(t)) { num += t.value(); continue; }
        auto [c, key] = split_coeff(t);
        coeffs[key] += c;
    }
    if (has_ci) return complex_infinity();

    // c*R*sin(u)^2 + c*R*cos(u)^2 -> c*R
    bool merged = true;
    while (merged) {
        merged = false;
        for (auto it = coeffs.begin(); it != coeffs.end(); ++it) {
            if (it->second == 0) continue;
            const Expr key = it->first;
            std::vector<Expr> factors =
                key.kind() == Kind::Mul ? key.args() : std::vector<Expr>{key};
            for (std::size_t i = 0; i < factors.size() && !merged; ++i) {
                const Expr& f = factors[i];
                if (!(f.kind() == Kind::Pow && f.arg(0).kind() == Kind::Sin &&
                      is_number(f.arg(1)) && f.arg(1).value() == 2))
                    continue;
                std::vector<Expr> partner_fs = factors;
                partner_fs[i] = Expr::make(
                    {Kind::Pow, Rational(), {},
                     {Expr::make({Kind::Cos, Rational(), {}, {f.arg(0).arg(0)}}),
                      integer(2)}});
                Expr partner = mul(partner_fs);
                auto jt = coeffs.find(partner);
                if (jt == coeffs.end() || jt->second != it->second) continue;
                Rational c = it->second;
                std::vector<Expr> residual_fs = factors;
                residual_fs.erase(residual_fs.begin() + static_cast<long>(i));
                coeffs.erase(jt);
                coeffs.erase(it);
                if (residual_fs.empty()) {
                    num += c;
                } else {
                    Expr residual = mul(residual_fs);
                    if (is_number(residual))
                        num += c * residual.value();
                    else
                        coeffs[residual] += c;
                }
                merged = true;
            }
            if (merged) break;
        }
    }

    std::vector<Expr> out;
    if (num != 0) out.push_back(number(num));
    for (const auto& [key, c] : coeffs) {
        if (c == 0) continue;
        if (c == 1) {
            out.push_back(key);
        } else if (key.kind() == Kind::Mul) {
            std::vector<Expr> fs;
            fs.push_back(number(c));
            fs.insert(fs.end(), key.args().begin(), key.args().end());
            out.push_back(Expr::make({Kind::Mul, Rational(), {}, std::move(fs)}));
        } else {
            out.push_back(Expr::make({Kind::Mul, Rational(), {}, {number(c), key}}));
        }
    }
    if (out.empty()) return detail::zero();
    if (out.size() == 1) return out[0];
    return Expr::make({Kind::Add, Rational(), {}, std::move(out)});
}

inline Expr mul(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    std::vector<Expr> stack(factors.rbegin(), factors.rend());
    while (!stack.empty()) {
        Expr f = stack.back();
        stack.pop_back();
        if (f.kind() == Kind::Mul) {
            for (auto it = f.args().rbegin(); it != f.args().rend(); ++it) stack.push_back(*it);
        } else {
            flat.push_back(f);
        }
    }
    // pull content out of Add factors so shared factors can cancel
    {
        std::vector<Expr> expanded;
        bool any = false;
        for (const Expr& f : flat) {
            std::vector<Expr> ex;
            Expr red;
            if (f.kind() == Kind::Add && detail::factor_add(f, ex, red)) {
                any = true;
                for (Expr& x : ex) expanded.push_back(std::move(x));
                expanded.push_back(red);
            } else {
                expanded.push_back(f);
            }
        }
        if (any) return mul(std::move(expanded));
    }
    bool has_ci = false;
    Rational coeff(1);
    std::vector<Expr> rest;
    for (const Expr& f : flat) {
        if (f.kind() == Kind::Indeterminate) return indeterminate();
        if (f.kind() == Kind::ComplexInfinity) { has_ci = true; continue; }
        if (is_number(f)) { coeff *= f.value(); continue; }
        rest.push_back(f);
    }
    if (has_ci) return coeff == 0 ? indeterminate() : complex_infinity();
    if (coeff == 0) return detail::zero();

    // combine exponents per base; Exp factors merge additively
    std::vector<Expr> exp_parts;
    std::map<Expr, std::vector<Expr>, ExprLess> bases;
    for (const Expr& f : rest) {
        if (f.kind() == Kind::Exp) {
            exp_parts.push_back(f.arg(0));
        } else if (f.kind() == Kind::Pow) {
            bases[f.arg(0)].push_back(f.arg(1));
        } else {
            bases[f].push_back(detail::one());
        }
    }
    std::vector<Expr> rebuilt;
    bool needs_rerun = false;
    if (!exp_parts.empty()) {
        Expr u = exp_parts.size() == 1 ? exp_parts[0] : add(std::move(exp_parts));
        // absorb integer powers of b into the exponent when a ln(b) term is
        // already present: b^n * exp(... c*ln(b) ...) = exp(... + n*ln(b))
        for (auto it = bases.begin(); it != bases.end();) {
            const Expr& b = it->first;
            Expr lb = Expr::make({Kind::Ln, Rational(), {}, {b}});
            auto has_ln_factor = [&](const Expr& term) {
                if (term == lb) return true;
                if (term.kind() != Kind::Mul) return false;
                for (const Expr& f : term.args())
                    if (f == lb) return true;
                return false;
            };
            bool present = false;
            if (u.kind() == Kind::Add) {
                for (const Expr& t : u.args())
                    if (has_ln_factor(t)) { present = true; break; }
            } else {
                present = has_ln_factor(u);
            }
            if (present) {
                Expr et = it->second.size() == 1 ? it->second[0] : add(it->second);
                u = add({u, mul({et, ln_(b)})});
                it = bases.erase(it);
            } else {
                ++it;
            }
        }
        Expr g = exp_(u);
        if (g.kind() != Kind::Exp) needs_rerun = true;
        rebuilt.push_back(g);
    }
    for (auto& [b, exps] : bases) {
        Expr et = exps.size() == 1 ? exps[0] : add(exps);
        Expr p = pow(b, et);
        if (p.kind() == Kind::Number || p.kind() == Kind::Mul || is_special_atom(p) ||
            p.kind() == Kind::Exp)
            needs_rerun = true;
        rebuilt.push_back(p);
    }
    if (needs_rerun) {
        rebuilt.push_back(number(coeff));
        return mul(std::move(rebuilt));
    }
    std::sort(rebuilt.begin(), rebuilt.end(), ExprLess{});
    if (rebuilt.empty()) return number(coeff);
    if (coeff == 1 && rebuilt.size() == 1) return rebuilt[0];
    std::vector<Expr> out;
    if (coeff != 1) out.push_back(number(coeff));
    out.insert(out.end(), rebuilt.begin(), rebuilt.end());
    if (out.size() == 1) return out[0];
    return Expr::make({Kind::Mul, Rational(), {}, std::move(out)});
}

inline Expr pow(const Expr& base, const Expr& exponent) {
    if (base.kind() == Kind::Indeterminate || exponent.kind() == Kind::Indeterminate)
        return indeterminate();
    if (exponent.kind() == Kind::ComplexInfinity) return indeterminate();
    if (base.kind() == Kind::ComplexInfinity) {
        if (is_number(exponent)) {
            if (exponent.value() > 0) return complex_infinity();
            if (exponent.value() < 0) return detail::zero();
            return indeterminate();
        }
        return indeterminate();
    }
    if (is_number(exponent)) {
        const Rational& ev = exponent.value();
        if (ev == 0) {
            if (is_zero(base)) return indeterminate();
            return detail::one();
        }
        if (ev == 1) return base;
        if (boost::multiprecision::denominator(ev) == 1) {
            BigInt n = boost::multiprecision::numerator(ev);
            if (is_number(base)) {
                if (base.value() == 0) {
                    return n > 0 ? detail::zero() : complex_infinity();
                }
                Rational r;
                if (detail::rational_pow(base.value(), n, r)) return number(r);
                return Expr::make({Kind::Pow, Rational(), {}, {base, exponent}});
            }
            if (base.kind() == Kind::Mul) {
                std::vector<Expr> fs;
                for (const Expr& f : base.args()) fs.push_back(pow(f, exponent));
                return mul(std::move(fs));
            }
            if (base.kind() == Kind::Add) {
                std::vector<Expr> ex;
                Expr red;
                if (detail::factor_add(base, ex, red)) {
                    std::vector<Expr> fs;
                    for (const Expr& x : ex) fs.push_back(pow(x, exponent));
                    fs.push_back(pow(red, exponent));
                    return mul(std::move(fs));
                }
            }
            if (base.kind() == Kind::Pow) {
                // inner exponent is an exact integer by construction
                return pow(base.arg(0), mul({base.arg(1), exponent}));
            }
            if (base.kind() == Kind::Exp) return exp_(mul({exponent, base.arg(0)}));
            if (base.kind() == Kind::Sqrt) {
                // (sqrt u)^n = u^q * sqrt(u)^r with n = 2q + r, r in {0,1}
                // (floor division keeps sqrt out of Pow bases entirely)
                BigInt q = (n - (n < 0 ? 1 : 0)) / 2, r = n - 2 * q;
                Expr whole = pow(base.arg(0), number(Rational(q)));
                if (r == 0) return whole;
                return mul({whole, base});
            }
            return Expr::make({Kind::Pow, Rational(), {}, {base, exponent}});
        }
        // non-integer rational exponent
        if (ev == Rational(1, 2)) return sqrt_(base);
        if (ev == Rational(-1, 2)) return pow(sqrt_(base), integer(-1));
        return exp_(mul({exponent, ln_(base)}));
    }
    // symbolic exponent
    return exp_(mul({exponent, ln_(base)}));
}

inline Expr exp_(const Expr& u) {
    if (u.kind() == Kind::Indeterminate || u.kind() == Kind::ComplexInfinity)
        return indeterminate();
    if (is_zero(u)) return detail::one();
    {
        Expr v = detail::distribute_sums(u);
        if (v != u) return exp_(v);
    }
    if (u.kind() == Kind::Ln) return u.arg(0);
    if (u.kind() == Kind::Mul && u.arity() == 2 && is_number(u.arg(0)) &&
        u.arg(1).kind() == Kind::Ln) {
        const Rational& c = u.arg(0).value();
        if (boost::multiprecision::denominator(c) == 1)
            return pow(u.arg(1).arg(0), u.arg(0));
        if (c == Rational(1, 2)) return sqrt_(u.arg(1).arg(0));
    }
    return Expr::make({Kind::Exp, Rational(), {}, {u}});
}

inline Expr ln_(const Expr& u) {
    if (u.kind() == Kind::Indeterminate) return indeterminate();
    if (u.kind() == Kind::ComplexInfinity) return complex_infinity();
    if (is_one(u)) return detail::zero();
    if (is_zero(u)) return complex_infinity();
    return Expr::make({Kind::Ln, Rational(), {}, {u}});
}

inline Expr sin_(const Expr& u) {
    if (u.kind() == Kind::Indeterminate || u.kind() == Kind::ComplexInfinity)
        return indeterminate();
    if (is_zero(u)) return detail::zero();
    {
        Expr v = detail::distribute_sums(u);
        if (v != u) return sin_(v);
    }
    if (negative_leading(u)) return neg(sin_(neg(u)));
    return Expr::make({Kind::Sin, Rational(), {}, {u}});
}

inline Expr cos_(const Expr& u) {
    if (u.kind() == Kind::Indeterminate || u.kind() == Kind::ComplexInfinity)
        return indeterminate();
    if (is_zero(u)) return detail::one();
    {
        Expr v = detail::distribute_sums(u);
        if (v != u) return cos_(v);
    }
    if (negative_leading(u)) return cos_(neg(u));
    return Expr::make({Kind::Cos, Rational(), {}, {u}});
}

inline Expr arccot_(const Expr& u) {
    if (u.kind() == Kind::Indeterminate) return indeterminate();
    if (u.kind() == Kind::ComplexInfinity) return detail::zero();
    return Expr::make({Kind::ArcCot, Rational(), {}, {u}});
}

inline Expr sqrt_(const Expr& u) {
    if (u.kind() == Kind::Indeterminate) return indeterminate();
    if (u.kind() == Kind::ComplexInfinity) return complex_infinity();
    if (is_number(u) && u.value() >= 0) {
        BigInt rn, rd;
        if (detail::square_root_exact(boost::multiprecision::numerator(u.value()), rn) &&
            detail::square_root_exact(boost::multiprecision::denominator(u.value()), rd))
            return number(Rational(rn, rd));
    }
    return Expr::make({Kind::Sqrt, Rational(), {}, {u}});
}

namespace detail {

inline bool factor_add(const Expr& addExpr, std::vector<Expr>& extracted, Expr& reduced) {
    if (addExpr.kind() != Kind::Add) return false;
    struct Term {
        Rational coeff;
        std::vector<std::pair<Expr, BigInt>> factors;  // base -> integer exponent
    };
    std::vector<Term> terms;
    for (const Expr& t : addExpr.args()) {
        auto [c, key] = split_coeff(t);
        Term term;
        term.coeff = c;
        if (!is_one(key)) {
            std::vector<Expr> fs = key.kind() == Kind::Mul ? key.args() : std::vector<Expr>{key};
            for (const Expr& f : fs) {
                if (f.kind() == Kind::Pow && is_integer_number(f.arg(1)))
                    term.factors.emplace_back(f.arg(0),
                                              boost::multiprecision::numerator(f.arg(1).value()));
                else
                    term.factors.emplace_back(f, BigInt(1));
            }
        }
        terms.push_back(std::move(term));
    }
    // numeric content, sign following the leading term
    BigInt gn(0), ld(1);
    for (const Term& t : terms) {
        gn = boost::multiprecision::gcd(gn, boost::multiprecision::numerator(t.coeff));
        ld = boost::multiprecision::lcm(ld, boost::multiprecision::denominator(t.coeff));
    }
    Rational content(gn, ld);
    if (terms[0].coeff < 0) content = -content;
    // common symbolic factors: min exponent per base, present in every term
    std::map<Expr, BigInt, ExprLess> common;
    bool first = true;
    for (const Term& t : terms) {
        std::map<Expr, BigInt, ExprLess> here;
        for (const auto& [b, e] : t.factors) here[b] += e;
        if (first) {
            common = here;
            first = false;
        } else {
            for (auto it = common.begin(); it != common.end();) {
                auto jt = here.find(it->first);
                if (jt == here.end()) {
                    it = common.erase(it);
                } else {
                    if (jt->second < it->second) it->second = jt->second;
                    ++it;
                }
            }
        }
        if (common.empty() && content == 1) return false;
    }
    for (auto it = common.begin(); it != common.end();)
        it = it->second == 0 ? common.erase(it) : std::next(it);
    if (content == 1 && common.empty()) return false;

    extracted.clear();
    if (content != 1) extracted.push_back(number(content));
    for (const auto& [b, e] : common)
        extracted.push_back(pow(b, number(Rational(e))));
    std::vector<Expr> newTerms;
    for (const Term& t : terms) {
        std::vector<Expr> fs;
        fs.push_back(number(t.coeff / content));
        std::map<Expr, BigInt, ExprLess> here;
        for (const auto& [b, e] : t.factors) here[b] += e;
        for (const auto& [b, e] : here) {
            BigInt rem = e;
            auto ct = common.find(b);
            if (ct != common.end()) rem -= ct->second;
            if (rem != 0) fs.push_back(pow(b, number(Rational(rem))));
        }
        newTerms.push_back(mul(std::move(fs)));
    }
    reduced = add(std::move(newTerms));
    return true;
}

inline Expr distribute_sums(const Expr& u) {
    if (u.kind() == Kind::Add) {
        std::vector<Expr> ts;
        ts.reserve(u.arity());
        bool changed = false;
        for (const Expr& a : u.args()) {
            Expr d = distribute_sums(a);
            if (d != a) changed = true;
            ts.push_back(d);
        }
        return changed ? add(std::move(ts)) : u;
    }
    if (u.kind() == Kind::Mul) {
        bool any = false;
        for (const Expr& f : u.args())
            if (f.kind() == Kind::Add) { any = true; break; }
        if (!any) return u;
        std::vector<Expr> terms{one()};
        for (const Expr& f : u.args()) {
            std::vector<Expr> next;
            if (f.kind() == Kind::Add) {
                for (const Expr& t : terms)
                    for (const Expr& a : f.args()) next.push_back(mul({t, a}));
            } else {
                for (const Expr& t : terms) next.push_back(mul({t, f}));
            }
            terms = std::move(next);
        }
        return add(std::move(terms));
    }
    return u;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Rebuild through the canonicalizing factories. Idempotent.
inline Expr simplify(const Expr& e) {
    switch (e.kind()) {
        case Kind::Number:
        case Kind::Symbol:
        case Kind::ComplexInfinity:
        case Kind::Indeterminate:
            return e;
        default: break;
    }
    std::vector<Expr> args;
    args.reserve(e.arity());
    for (const Expr& a : e.args()) args.push_back(simplify(a));
    switch (e.kind()) {
        case Kind::Add: return add(std::move(args));
        case Kind::Mul: return mul(std::move(args));
        case Kind::Pow: return pow(args[0], args[1]);
        case Kind::Exp: return exp_(args[0]);
        case Kind::Ln: return ln_(args[0]);
        case Kind::Sin: return sin_(args[0]);
        case Kind::Cos: return cos_(args[0]);
        case Kind::ArcCot: return arccot_(args[0]);
        case Kind::Sqrt: return sqrt_(args[0]);
        default: return e;
    }
}

inline Expr substitute(const Expr& e, const std::string& name, const Expr& val) {
    switch (e.kind()) {
        case Kind::Symbol: return e.name() == name ? val : e;
        case Kind::Number:
        case Kind::ComplexInfinity:
        case Kind::Indeterminate:
            return e;
        default: break;
    }
    std::vector<Expr> args;
    args.reserve(e.arity());
    for (const Expr& a : e.args()) args.push_back(substitute(a, name, val));
    switch (e.kind()) {
        case Kind::Add: return add(std::move(args));
        case Kind::Mul: return mul(std::move(args));
        case Kind::Pow: return pow(args[0], args[1]);
        case Kind::Exp: return exp_(args[0]);
        case Kind::Ln: return ln_(args[0]);
        case Kind::Sin: return sin_(args[0]);
        case Kind::Cos: return cos_(args[0]);
        case Kind::ArcCot: return arccot_(args[0]);
        case Kind::Sqrt: return sqrt_(args[0]);
        default: return e;
    }
}

inline Expr substitute(const Expr& e, const Expr& s, const Expr& val) {
    assert(s.kind() == Kind::Symbol);
    return substitute(e, s.name(), val);
}

inline Expr differentiate(const Expr& e, const std::string& var) {
    if (!contains_symbol(e, var)) {
        if (is_special_atom(e)) throw UnsupportedForm("cannot differentiate a special atom");
        return detail::zero();
    }
    switch (e.kind()) {
        case Kind::Symbol:
            return detail::one();
        case Kind::Add: {
            std::vector<Expr> parts;
            for (const Expr& a : e.args()) parts.push_back(differentiate(a, var));
            return add(std::move(parts));
        }
        case Kind::Mul: {
            std::vector<Expr> parts;
            for (std::size_t i = 0; i < e.arity(); ++i) {
                std::vector<Expr> fs;
                for (std::size_t j = 0; j < e.arity(); ++j)
                    fs.push_back(i == j ? differentiate(e.arg(j), var) : e.arg(j));
                parts.push_back(mul(std::move(fs)));
            }
            return add(std::move(parts));
        }
        case Kind::Pow: {
            // canonical Pow exponent is an exact integer constant
            const Expr& b = e.arg(0);
            const Expr& n = e.arg(1);
            return mul({n, pow(b, add({n, integer(-1)})), differentiate(b, var)});
        }
        case Kind::Exp:
            return mul({differentiate(e.arg(0), var), e});
        case Kind::Ln:
            return mul({differentiate(e.arg(0), var), pow(e.arg(0), integer(-1))});
        case Kind::Sin:
            return mul({differentiate(e.arg(0), var), cos_(e.arg(0))});
        case Kind::Cos:
            return neg(mul({differentiate(e.arg(0), var), sin_(e.arg(0))}));
        case Kind::Sqrt:
            return mul({rational(1, 2), differentiate(e.arg(0), var),
                        pow(e, integer(-1))});
        case Kind::ArcCot: {
            Expr u = e.arg(0);
            return neg(mul({differentiate(u, var),
                            pow(add({detail::one(), pow(u, integer(2))}), integer(-1))}));
        }
        default:
            throw UnsupportedForm("cannot differentiate a special atom");
    }
}

inline Expr differentiate(const Expr& e, const Expr& var) {
    assert(var.kind() == Kind::Symbol);
    return differentiate(e, var.name());
}

// ---------------------------------------------------------------------------
// Numeric evaluation (complex double, principal branches)
// ---------------------------------------------------------------------------

using Binding = std::map<std::string, Complex>;

inline double to_double(const Rational& v) { return v.convert_to<double>(); }

inline Complex eval_numeric(const Expr& e, const Binding& b) {
    switch (e.kind()) {
        case Kind::Number:
            return Complex(to_double(e.value()), 0.0);
        case Kind::Symbol: {
            auto it = b.find(e.name());
            if (it == b.end()) throw UnboundSymbol(e.name());
            return it->second;
        }
        case Kind::Add: {
            Complex s = 0.0;
            for (const Expr& a : e.args()) s += eval_numeric(a, b);
            return s;
        }
        case Kind::Mul: {
            Complex p = 1.0;
            for (const Expr& a : e.args()) p *= eval_numeric(a, b);
            return p;
        }
        case Kind::Pow: {
            Complex base = eval_numeric(e.arg(0), b);
            const Rational& ev = e.arg(1).value();
            if (boost::multiprecision::denominator(ev) == 1 &&
                boost::multiprecision::numerator(ev) <= detail::kNumericPowCap &&
                boost::multiprecision::numerator(ev) >= -detail::kNumericPowCap) {
                long n = boost::multiprecision::numerator(ev).convert_to<long>();
                bool inv = n < 0;
                unsigned long m = inv ? -n : n;
                Complex acc = 1.0, bb = base;
                while (m) {
                    if (m & 1) acc *= bb;
                    bb *= bb;
                    m >>= 1;
                }
                if (inv) {
                    if (acc == Complex(0.0)) throw DomainError("division by zero");
                    return Complex(1.0) / acc;
                }
                return acc;
            }
            return std::pow(base, to_double(ev));
        }
        case Kind::Exp:
            return std::exp(eval_numeric(e.arg(0), b));
        case Kind::Ln: {
            Complex v = eval_numeric(e.arg(0), b);
            if (v == Complex(0.0)) throw DomainError("ln of zero");
            return std::log(v);
        }
        case Kind::Sin:
            return std::sin(eval_numeric(e.arg(0), b));
        case Kind::Cos:
            return std::cos(eval_numeric(e.arg(0), b));
        case Kind::Sqrt:
            return std::sqrt(eval_numeric(e.arg(0), b));
        case Kind::ArcCot: {
            // pinned convention: arccot(w) = arctan(1/w), arccot(0) = pi/2
            Complex w = eval_numeric(e.arg(0), b);
            if (w == Complex(0.0)) return Complex(1.5707963267948966, 0.0);
            return std::atan(Complex(1.0) / w);
        }
        default:
            throw DomainError("cannot evaluate a special atom numerically");
    }
}

}  // namespace kahania

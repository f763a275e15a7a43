#pragma once

#include <map>
#include <string>
#include <vector>

#include "kahania/expr.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Truncated Laurent expansion in one parameter about a finite exact point,
// plus the limit classifier built on it.
// ---------------------------------------------------------------------------

struct SeriesExpansion {
    std::string variable;
    Expr point = Expr{};
    int minOrder = 0;
    std::vector<Expr> coefficients;  // indexed from minOrder; empty <=> identically 0
    int truncationOrder = 0;
};

struct LimitResult {
    enum class Kind { Finite, Pole, Indeterminate };
    Kind kind = Kind::Indeterminate;
    Expr value = Expr{};  // Finite only
    int order = 0;        // Pole only

    static LimitResult finite(Expr v) { return {Kind::Finite, std::move(v), 0}; }
    static LimitResult pole(int m) { return {Kind::Pole, Expr{}, m}; }
    static LimitResult indeterminate() { return {Kind::Indeterminate, Expr{}, 0}; }
    bool is_finite() const { return kind == Kind::Finite; }
    bool is_pole() const { return kind == Kind::Pole; }
};

namespace detail {

inline constexpr int kInfOrder = 1 << 20;
inline const std::string kEps = "$eps";  // local expansion variable
inline const std::string kLog = "$log";  // formal ln($eps), internal only

// Raised when a cancellation consumed every computed term of a series whose
// leading coefficient is needed; the driver escalates the working order.
struct NeedMoreOrder {};

// Sparse truncated Laurent series: coefficient Exprs (free of $eps) keyed by
// order; orders >= top are unknown (top == kInfOrder means exact).
struct SRep {
    std::map<int, Expr> c;
    int top = kInfOrder;

    int min_or_top() const { return c.empty() ? top : c.begin()->first; }
};

class SeriesCtx {
public:
    explicit SeriesCtx(int working_order) : W_(working_order) {}

    SRep series(const Expr& e) {
        if (!contains_symbol(e, kEps)) {
            SRep s;
            if (!is_zero(e)) s.c.emplace(0, e);
            return s;
        }
        switch (e.kind()) {
            case Kind::Symbol: {  // must be $eps itself
                SRep s;
                s.c.emplace(1, detail::one());
                return s;
            }
            case Kind::Add: {
                SRep s = series(e.arg(0));
                for (std::size_t i = 1; i < e.arity(); ++i) s = add_s(s, series(e.arg(i)));
                return s;
            }
            case Kind::Mul: {
                SRep s = series(e.arg(0));
                for (std::size_t i = 1; i < e.arity(); ++i) s = mul_s(s, series(e.arg(i)));
                return s;
            }
            case Kind::Pow: {
                // canonical invariant: exponent is an exact integer
                BigInt n = boost::multiprecision::numerator(e.arg(1).value());
                SRep b = series(e.arg(0));
                if (n < 0) {
                    b = inverse(b);
                    n = -n;
                }
                SRep r;
                r.c.emplace(0, detail::one());
                for (BigInt i = 0; i < n; ++i) r = mul_s(r, b);
                return r;
            }
            case Kind::Exp: return exp_s(series(e.arg(0)));
            case Kind::Ln: return ln_s(series(e.arg(0)));
            case Kind::Sin: return trig_s(series(e.arg(0)), /*is_sin=*/true);
            case Kind::Cos: return trig_s(series(e.arg(0)), /*is_sin=*/false);
            case Kind::Sqrt: return sqrt_s(series(e.arg(0)));
            case Kind::ArcCot: return arccot_s(series(e.arg(0)));
            default:
                throw UnsupportedForm("series expansion of special atoms is not defined");
        }
    }

private:
    int W_;

    void put(SRep& s, int k, const Expr& v) {
        if (k >= s.top || k > W_) return;
        auto it = s.c.find(k);
        Expr nv = it == s.c.end() ? v : add({it->second, v});
        if (is_zero(nv))
            s.c.erase(k);
        else if (it == s.c.end())
            s.c.emplace(k, std::move(nv));
        else
            it->second = std::move(nv);
    }

    void clamp(SRep& s) {
        int cap = std::min(s.top, W_ + 1);
        for (auto it = s.c.begin(); it != s.c.end();)
            it = (it->first >= cap) ? s.c.erase(it) : std::next(it);
        if (s.top != kInfOrder || !s.c.empty()) s.top = std::min(s.top, W_ + 1);
    }

    SRep add_s(const SRep& a, const SRep& b) {
        SRep s;
        s.top = std::min(a.top, b.top);
        for (const auto& [k, v] : a.c) put(s, k, v);
        for (const auto& [k, v] : b.c) put(s, k, v);
        clamp(s);
        return s;
    }

    SRep mul_s(const SRep& a, const SRep& b) {
        SRep s;
        if (a.c.empty() && a.top == kInfOrder) return a;  // exact zero
        if (b.c.empty() && b.top == kInfOrder) return b;
        long t1 = (long)a.top + b.min_or_top();
        long t2 = (long)b.top + a.min_or_top();
        s.top = (int)std::min((long)kInfOrder, std::min(t1, t2));
        for (const auto& [i, u] : a.c)
            for (const auto& [j, v] : b.c) {
                if (i + j >= s.top || i + j > W_) continue;
                put(s, i + j, mul({u, v}));
            }
        clamp(s);
        return s;
    }

    SRep scale(const SRep& a, const Expr& factor, int shift) {
        SRep s;
        s.top = a.top == kInfOrder ? kInfOrder : a.top + shift;
        for (const auto& [k, v] : a.c) put(s, k + shift, mul({factor, v}));
        clamp(s);
        return s;
    }

    // 1/a; symbolic leading coefficients are assumed nonzero (generic case).
    SRep inverse(const SRep& a) {
        if (a.c.empty()) {
            if (a.top == kInfOrder)
                throw UnsupportedForm("division by an identically zero series");
            throw NeedMoreOrder{};  // leading term cancelled away: escalate
        }
        int m = a.c.begin()->first;
        Expr lead = a.c.begin()->second;
        // a = lead * eps^m * (1 + t),  1/a = lead^-1 eps^-m * sum (-t)^j
        SRep t = tail_of(a, m, lead);
        SRep s = compose_geometric(t);
        return scale(s, pow(lead, integer(-1)), -m);
    }

    // t = a / (lead * eps^m) - 1, which has min order >= 1
    SRep tail_of(const SRep& a, int m, const Expr& lead) {
        SRep t;
        t.top = a.top == kInfOrder ? kInfOrder : a.top - m;
        Expr inv_lead = pow(lead, integer(-1));
        for (const auto& [k, v] : a.c)
            if (k != m) put(t, k - m, mul({inv_lead, v}));
        clamp(t);
        return t;
    }

    // sum_{j>=0} coeff(j) * t^j for t with min order >= 1
    template <typename CoeffFn>
    SRep compose(const SRep& t, CoeffFn coeff) {
        SRep s;
        s.top = std::min(t.top, W_ + 1);
        SRep p;  // t^j
        p.c.emplace(0, detail::one());
        int tmin = std::max(1, t.min_or_top());
        for (int j = 0; j * tmin <= W_; ++j) {
            Rational cj = coeff(j);
            if (cj != 0)
                for (const auto& [k, v] : p.c) put(s, k, mul({number(cj), v}));
            p = mul_s(p, t);
            if (p.c.empty() && p.top == kInfOrder) break;
        }
        clamp(s);
        return s;
    }

    SRep compose_geometric(const SRep& t) {  // 1/(1+t)
        return compose(t, [](int j) { return (j % 2 == 0) ? Rational(1) : Rational(-1); });
    }

    SRep exp_s(const SRep& u) {
        if (u.min_or_top() < 0 && !u.c.empty())
            throw EssentialSingularity("exp of a series with a pole");
        Expr c0 = constant_term(u);
        if (contains_symbol(c0, kLog))
            throw UnsupportedForm("exp of a logarithmic series term");
        SRep t = drop_constant(u);
        SRep s = compose(t, [f = Rational(1)](int j) mutable {
            if (j > 0) f *= j;
            return Rational(1) / f;
        });
        return is_zero(c0) ? s : scale(s, exp_(c0), 0);
    }

    SRep ln_s(const SRep& u) {
        if (u.c.empty()) {
            if (u.top == kInfOrder) throw UnsupportedForm("ln of an identically zero series");
            throw NeedMoreOrder{};
        }
        int m = u.c.begin()->first;
        Expr lead = u.c.begin()->second;
        SRep t = tail_of(u, m, lead);
        SRep s = compose(t, [](int j) {
            return j == 0 ? Rational(0)
                          : Rational((j % 2 == 1) ? 1 : -1) / j;
        });
        Expr c0 = ln_(lead);
        if (m != 0) c0 = add({c0, mul({integer(m), sym(kLog)})});
        put(s, 0, c0);
        clamp(s);
        return s;
    }

    SRep sqrt_s(const SRep& u) {
        if (u.c.empty()) {
            if (u.top == kInfOrder) return u;  // sqrt(0) = 0
            throw NeedMoreOrder{};
        }
        int m = u.c.begin()->first;
        if (m % 2 != 0)
            throw UnsupportedForm("sqrt of a series with odd leading order (fractional powers)");
        Expr lead = u.c.begin()->second;
        SRep t = tail_of(u, m, lead);
        // binomial series for (1+t)^(1/2)
        Rational acc(1);
        SRep s = compose(t, [&](int j) {
            if (j == 0) return Rational(1);
            acc *= Rational(3 - 2 * j, 2 * j);  // C(1/2,j) = C(1/2,j-1)*(1/2-j+1)/j
            return acc;
        });
        return scale(s, sqrt_(lead), m / 2);
    }

    SRep trig_s(const SRep& u, bool is_sin) {
        if (u.min_or_top() < 0 && !u.c.empty())
            throw EssentialSingularity("sin/cos of a series with a pole");
        Expr c0 = constant_term(u);
        if (contains_symbol(c0, kLog))
            throw UnsupportedForm("sin/cos of a logarithmic series term");
        SRep t = drop_constant(u);
        SRep sinT = compose(t, [f = Rational(1)](int j) mutable {
            if (j > 0) f *= j;
            if (j % 2 == 0) return Rational(0);
            return Rational((j % 4 == 1) ? 1 : -1) / f;
        });
        SRep cosT = compose(t, [f = Rational(1)](int j) mutable {
            if (j > 0) f *= j;
            if (j % 2 == 1) return Rational(0);
            return Rational((j % 4 == 0) ? 1 : -1) / f;
        });
        // sin(c0+t) = sin c0 cos t + cos c0 sin t ; cos(c0+t) = cos c0 cos t - sin c0 sin t
        if (is_sin)
            return add_s(scale(cosT, sin_(c0), 0), scale(sinT, cos_(c0), 0));
        return add_s(scale(cosT, cos_(c0), 0), scale(sinT, neg(sin_(c0)), 0));
    }

    SRep arccot_s(const SRep& u) {
        if (!u.c.empty() && u.c.begin()->first < 0) {
            // arccot(u) = arctan(1/u); 1/u has positive min order
            SRep v = inverse(u);
            return compose(v, [](int j) {
                return j % 2 == 0 ? Rational(0) : Rational((j % 4 == 1) ? 1 : -1) / j;
            });
        }
        Expr c0 = constant_term(u);
        if (contains_symbol(c0, kLog))
            throw UnsupportedForm("arccot of a logarithmic series term");
        // d/deps arccot(u) = -u' / (1 + u^2); integrate termwise
        SRep one_s;
        one_s.c.emplace(0, detail::one());
        SRep du = derivative(u);
        SRep w = mul_s(scale(du, integer(-1), 0), inverse(add_s(one_s, mul_s(u, u))));
        SRep s;
        s.top = w.top == kInfOrder ? kInfOrder : w.top + 1;
        for (const auto& [k, v] : w.c) {
            if (k == -1)
                throw UnsupportedForm("arccot expansion produced a logarithmic term");
            put(s, k + 1, mul({rational(1, k + 1), v}));
        }
        put(s, 0, arccot_(c0));
        clamp(s);
        return s;
    }

    SRep derivative(const SRep& u) {
        SRep s;
        s.top = u.top == kInfOrder ? kInfOrder : u.top - 1;
        for (const auto& [k, v] : u.c)
            if (k != 0) put(s, k - 1, mul({integer(k), v}));
        clamp(s);
        return s;
    }

    static Expr constant_term(const SRep& u) {
        auto it = u.c.find(0);
        return it == u.c.end() ? detail::zero() : it->second;
    }

    static SRep drop_constant(const SRep& u) {
        SRep t = u;
        t.c.erase(0);
        return t;
    }
};

// Substitute sym = point + $eps and expand about $eps = 0 with escalating
// working order 4 -> 8 -> 12 (doubled when `order` demands a higher floor).
// Returns the series; sets *exhausted when every escalation cancelled totally.
inline SRep expand_about(const Expr& e, const std::string& symname, const Expr& point,
                         int order, bool* exhausted) {
    Expr g = substitute(e, symname, add({point, sym(kEps)}));
    *exhausted = false;
    int base = std::max(4, order + 4);
    for (int W : {base, 2 * base, 3 * base}) {
        try {
            SRep s = SeriesCtx(W).series(g);
            if (!s.c.empty() || s.top == kInfOrder) return s;
        } catch (const NeedMoreOrder&) {
            // fall through to the next working order
        }
    }
    *exhausted = true;
    return SRep{};
}

}  // namespace detail

inline SeriesExpansion laurent_series(const Expr& e, const std::string& symname,
                                      const Expr& point, int order) {
    bool exhausted = false;
    detail::SRep s = detail::expand_about(e, symname, point, order, &exhausted);
    if (exhausted)
        throw UnsupportedForm("series terms cancelled beyond the escalation cap");
    SeriesExpansion out;
    out.variable = symname;
    out.point = point;
    out.truncationOrder = order;
    if (s.c.empty()) {  // identically zero
        out.minOrder = 0;
        return out;
    }
    if (s.top <= order)
        throw UnsupportedForm("requested truncation order exceeds the computable range");
    out.minOrder = s.c.begin()->first;
    for (int k = out.minOrder; k <= order; ++k) {
        auto it = s.c.find(k);
        Expr ck = it == s.c.end() ? detail::zero() : simplify(it->second);
        if (contains_symbol(ck, detail::kLog))
            throw UnsupportedForm("series coefficient contains a logarithmic term");
        out.coefficients.push_back(std::move(ck));
    }
    return out;
}

inline LimitResult limit(const Expr& e, const std::string& symname, const Expr& point) {
    bool exhausted = false;
    detail::SRep s = detail::expand_about(e, symname, point, 0, &exhausted);
    if (exhausted) return LimitResult::indeterminate();
    if (s.c.empty()) return LimitResult::finite(detail::zero());
    int m = s.c.begin()->first;
    if (m < 0) return LimitResult::pole(-m);
    if (m > 0) return LimitResult::finite(detail::zero());
    Expr c0 = s.c.begin()->second;
    // a surviving ln(eps) in the constant term is a genuine (logarithmic)
    // divergence; reported with the weakest pole order
    if (contains_symbol(c0, detail::kLog)) return LimitResult::pole(1);
    return LimitResult::finite(simplify(c0));
}

}  // namespace kahania

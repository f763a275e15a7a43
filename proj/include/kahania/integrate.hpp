#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kahania/expr.hpp"
#include "kahania/parser.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Rule-based generic antidifferentiation for the supported integrand class:
// constants, z^m, z^a via Exp(a ln z), Exp(linear-in-z), Sin/Cos(affine),
// c*Ln(affine), and the table entry 1/(z*sqrt(z^2-a^2)).
// ---------------------------------------------------------------------------

namespace detail {

// split a canonical term into (z-free prefactor, z-dependent factors)
inline void split_term(const Expr& term, const std::string& z, Expr& prefactor,
                       std::vector<Expr>& core) {
    std::vector<Expr> pre;
    auto classify = [&](const Expr& f) {
        (contains_symbol(f, z) ? core : pre).push_back(f);
    };
    if (term.kind() == Kind::Mul)
        for (const Expr& f : term.args()) classify(f);
    else
        classify(term);
    prefactor = pre.empty() ? one() : mul(std::move(pre));
}

// decompose e (z-dependent, additive) as p*z + q*ln(z) + r with p,q,r z-free;
// returns false when any term is not of that shape
inline bool linear_in_z_and_lnz(const Expr& e, const std::string& z, Expr& p, Expr& q,
                                Expr& r) {
    std::vector<Expr> ps, qs, rs;
    Expr zsym = sym(z);
    Expr lnz = ln_(zsym);
    auto one_term = [&](const Expr& t) -> bool {
        if (!contains_symbol(t, z)) { rs.push_back(t); return true; }
        if (t == zsym) { ps.push_back(one()); return true; }
        if (t == lnz) { qs.push_back(one()); return true; }
        if (t.kind() != Kind::Mul) return false;
        std::vector<Expr> rest;
        int nz = 0, nl = 0;
        for (const Expr& f : t.args()) {
            if (f == zsym) { ++nz; continue; }
            if (f == lnz) { ++nl; continue; }
            if (contains_symbol(f, z)) return false;
            rest.push_back(f);
        }
        if (nz + nl != 1) return false;
        (nz ? ps : qs).push_back(rest.empty() ? one() : mul(std::move(rest)));
        return true;
    };
    if (e.kind() == Kind::Add) {
        for (const Expr& t : e.args())
            if (!one_term(t)) return false;
    } else if (!one_term(e)) {
        return false;
    }
    p = ps.empty() ? zero() : add(std::move(ps));
    q = qs.empty() ? zero() : add(std::move(qs));
    r = rs.empty() ? zero() : add(std::move(rs));
    return true;
}

// affine u = p*z + q (no ln z part)
inline bool affine_in_z(const Expr& e, const std::string& z, Expr& p, Expr& q) {
    Expr ql;
    if (!linear_in_z_and_lnz(e, z, p, ql, q)) return false;
    return is_zero(ql) && !is_zero(p);
}

// recover `a` from the z-free part s of w = z^2 + s, i.e. a = sqrt(-s),
// collapsing the common perfect-square shapes so w = z^2 - a^2 yields a itself
inline Expr square_side(const Expr& s) {
    Expr m = neg(s);
    if (m.kind() == Kind::Pow && is_number(m.arg(1)) && m.arg(1).value() == 2)
        return m.arg(0);
    if (is_number(m) && m.value() > 0) {
        BigInt rn, rd;
        if (square_root_exact(boost::multiprecision::numerator(m.value()), rn) &&
            square_root_exact(boost::multiprecision::denominator(m.value()), rd))
            return number(Rational(rn, rd));
    }
    return sqrt_(m);
}

}  // namespace detail

struct Rule {
    std::string name;
    // term is one canonical additive term; returns its antiderivative or nullopt
    std::function<std::optional<Expr>(const Expr& term, const std::string& z)> apply;
};

inline const std::vector<Rule>& rule_table() {
    static const std::vector<Rule> table = [] {
        std::vector<Rule> rules;

        // table entry first, before generic power matching can split it up:
        // c/(z*sqrt(z^2-a^2)) -> (c/a) arccot(a/sqrt(z^2-a^2))
        rules.push_back({"arccot-table", [](const Expr& term, const std::string& z)
                                             -> std::optional<Expr> {
            Expr c;
            std::vector<Expr> core;
            detail::split_term(term, z, c, core);
            if (core.size() != 3) return std::nullopt;
            // canonical shape of 1/(z*sqrt(w)) is z^-1 * v^-1 * sqrt(w) where
            // v is w up to an extracted sign
            Expr zinv = pow(sym(z), integer(-1));
            std::optional<Expr> w, v;
            bool saw_zinv = false;
            for (const Expr& f : core) {
                if (f == zinv && !saw_zinv) { saw_zinv = true; continue; }
                if (f.kind() == Kind::Sqrt && !w) {
                    w = f.arg(0);
                    continue;
                }
                if (f.kind() == Kind::Pow && is_number(f.arg(1)) &&
                    f.arg(1).value() == -1 && !v) {
                    v = f.arg(0);
                    continue;
                }
                return std::nullopt;
            }
            if (!(saw_zinv && w && v)) return std::nullopt;
            int sign;
            if (*v == *w)
                sign = 1;
            else if (*v == neg(*w))
                sign = -1;
            else
                return std::nullopt;
            // w must be z^2 + s with s z-free and nonzero
            Expr z2 = pow(sym(z), integer(2));
            Expr s;
            if (w->kind() == Kind::Add) {
                std::vector<Expr> rest;
                bool found = false;
                for (const Expr& t : w->args()) {
                    if (t == z2 && !found) { found = true; continue; }
                    if (contains_symbol(t, z)) return std::nullopt;
                    rest.push_back(t);
                }
                if (!found || rest.empty()) return std::nullopt;
                s = add(std::move(rest));
            } else {
                return std::nullopt;
            }
            Expr a = detail::square_side(s);
            Expr inv_sqrt_w = pow(sqrt_(*w), integer(-1));
            return mul({c, integer(sign), pow(a, integer(-1)),
                        arccot_(mul({a, inv_sqrt_w}))});
        }});

        // c*z^m*sqrt(z^2) (degenerate radicand of the table entry, a = 0):
        // antiderivative c*z^(m+1)*sqrt(z^2)/(m+2)
        rules.push_back({"power-abs", [](const Expr& term, const std::string& z)
                                          -> std::optional<Expr> {
            Expr c;
            std::vector<Expr> core;
            detail::split_term(term, z, c, core);
            Expr z2 = pow(sym(z), integer(2));
            Rational m(0);
            bool saw_sqrt = false, saw_pow = false;
            for (const Expr& f : core) {
                if (f.kind() == Kind::Sqrt && f.arg(0) == z2 && !saw_sqrt) {
                    saw_sqrt = true;
                } else if (f == sym(z) && !saw_pow) {
                    m = 1;
                    saw_pow = true;
                } else if (f.kind() == Kind::Pow && f.arg(0) == sym(z) && !saw_pow) {
                    m = f.arg(1).value();
                    saw_pow = true;
                } else {
                    return std::nullopt;
                }
            }
            if (!saw_sqrt || m == -2) return std::nullopt;
            Rational m2 = m + 2;
            return mul({c, number(1 / m2), pow(sym(z), number(m + 1)),
                        sqrt_(z2)});
        }});

        // z-free term -> c*z
        rules.push_back({"constant", [](const Expr& term, const std::string& z)
                                         -> std::optional<Expr> {
            if (contains_symbol(term, z)) return std::nullopt;
            return mul({term, sym(z)});
        }});

        // c*z^m for exact integer m: z^(m+1)/(m+1), or ln z when m = -1
        rules.push_back({"power", [](const Expr& term, const std::string& z)
                                      -> std::optional<Expr> {
            Expr c;
            std::vector<Expr> core;
            detail::split_term(term, z, c, core);
            if (core.size() != 1) return std::nullopt;
            const Expr& f = core[0];
            Rational m;
            if (f == sym(z)) {
                m = 1;
            } else if (f.kind() == Kind::Pow && f.arg(0) == sym(z)) {
                m = f.arg(1).value();
            } else {
                return std::nullopt;
            }
            if (m == -1) return mul({c, ln_(sym(z))});
            Rational m1 = m + 1;
            return mul({c, number(1 / m1), pow(sym(z), number(m1))});
        }});

        // c*Exp(p*z + q*ln z + r): covers exp(bz), a^(bz), z^a, z^a-free mixes
        rules.push_back({"exponential", [](const Expr& term, const std::string& z)
                                            -> std::optional<Expr> {
            Expr c;
            std::vector<Expr> core;
            detail::split_term(term, z, c, core);
            if (core.size() != 1 || core[0].kind() != Kind::Exp) return std::nullopt;
            Expr u = core[0].arg(0);
            Expr p, q, r;
            if (!detail::linear_in_z_and_lnz(u, z, p, q, r)) return std::nullopt;
            bool has_p = !is_zero(p), has_q = !is_zero(q);
            if (has_p && has_q) return std::nullopt;  // z * ln z mixes unsupported
            if (has_p) return mul({c, pow(p, integer(-1)), exp_(u)});
            if (!has_q) return std::nullopt;  // z-free: constant rule's job
            if (is_number(q) && q.value() == -1)  // e^r / z -> e^r ln z
                return mul({c, exp_(r), ln_(sym(z))});
            Expr q1 = add({q, detail::one()});
            return mul({c, pow(q1, integer(-1)), exp_(add({u, ln_(sym(z))}))});
        }});

        // c*Sin(p*z+q) -> -c*Cos(u)/p ; c*Cos(p*z+q) -> c*Sin(u)/p
        rules.push_back({"trig", [](const Expr& term, const std::string& z)
                                     -> std::optional<Expr> {
            Expr c;
            std::vector<Expr> core;
            detail::split_term(term, z, c, core);
            if (core.size() != 1) return std::nullopt;
            const Expr& f = core[0];
            if (f.kind() != Kind::Sin && f.kind() != Kind::Cos) return std::nullopt;
            Expr p, q;
            if (!detail::affine_in_z(f.arg(0), z, p, q)) return std::nullopt;
            if (f.kind() == Kind::Sin)
                return mul({c, integer(-1), pow(p, integer(-1)), cos_(f.arg(0))});
            return mul({c, pow(p, integer(-1)), sin_(f.arg(0))});
        }});

        // c*Ln(p*z+q) -> c*(u/p)*(ln u - 1)
        rules.push_back({"logarithm", [](const Expr& term, const std::string& z)
                                          -> std::optional<Expr> {
            Expr c;
            std::vector<Expr> core;
            detail::split_term(term, z, c, core);
            if (core.size() != 1 || core[0].kind() != Kind::Ln) return std::nullopt;
            const Expr& u = core[0].arg(0);
            Expr p, q;
            if (!detail::affine_in_z(u, z, p, q)) return std::nullopt;
            return mul({c, pow(p, integer(-1)), u,
                        add({ln_(u), integer(-1)})});
        }});

        return rules;
    }();
    return table;
}

namespace detail {

// cross-product of the factors' terms, multiplying one term at a time so the
// canonicalizer never sees a product of whole sums (which it would re-collapse)
inline Expr distribute(const std::vector<Expr>& factors) {
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

// distribute products of sums / small integer powers of sums
inline Expr expand(const Expr& e) {
    switch (e.kind()) {
        case Kind::Add: {
            std::vector<Expr> ts;
            for (const Expr& t : e.args()) ts.push_back(expand(t));
            return add(std::move(ts));
        }
        case Kind::Pow: {
            Expr b = expand(e.arg(0));
            const Rational& ev = e.arg(1).value();
            if (b.kind() == Kind::Add && ev >= 2 && ev <= 4) {
                long n = static_cast<long>(boost::multiprecision::numerator(ev));
                std::vector<Expr> copies(static_cast<std::size_t>(n), b);
                return distribute(copies);
            }
            return pow(b, e.arg(1));
        }
        case Kind::Mul: {
            std::vector<Expr> factors;
            std::size_t sums = 0;
            for (const Expr& f : e.args()) {
                Expr g = expand(f);
                if (g.kind() == Kind::Add) ++sums;
                factors.push_back(std::move(g));
            }
            if (sums == 0 || sums > 3) return mul(std::move(factors));
            return distribute(factors);
        }
        default:
            return e;
    }
}

// integrator-side prepass: split logarithms of products/powers so the affine
// Ln rule can reach each factor
inline Expr split_logs(const Expr& e) {
    if (e.arity() == 0) return e;
    std::vector<Expr> args;
    for (const Expr& a : e.args()) args.push_back(split_logs(a));
    if (e.kind() == Kind::Ln) {
        const Expr& u = args[0];
        auto piece = [](const Expr& f) -> Expr {
            if (f.kind() == Kind::Pow) return mul({f.arg(1), ln_(f.arg(0))});
            if (f.kind() == Kind::Sqrt) return mul({rational(1, 2), ln_(f.arg(0))});
            if (f.kind() == Kind::Exp) return f.arg(0);
            return ln_(f);
        };
        if (u.kind() == Kind::Mul) {
            std::vector<Expr> parts;
            for (const Expr& f : u.args()) parts.push_back(piece(f));
            return add(std::move(parts));
        }
        if (u.kind() == Kind::Pow || u.kind() == Kind::Sqrt || u.kind() == Kind::Exp)
            return piece(u);
        return ln_(u);
    }
    ExprNode n{e.kind(), e.value(), e.name(), std::move(args)};
    return simplify(Expr::make(std::move(n)));
}

}  // namespace detail

/// Generic antiderivative G with d/dz G = f outside special parameter sets.
/// No constant of integration is attached.
inline Expr antiderivative(const Expr& f, const std::string& z) {
    if (contains_special(f))
        throw UnsupportedForm("cannot integrate an expression containing special atoms");
    Expr g = detail::expand(detail::split_logs(simplify(f)));
    std::vector<Expr> terms;
    if (g.kind() == Kind::Add)
        terms.assign(g.args().begin(), g.args().end());
    else
        terms.push_back(g);
    std::vector<Expr> results;
    for (const Expr& t : terms) {
        bool done = false;
        for (const Rule& r : rule_table()) {
            if (auto got = r.apply(t, z)) {
                results.push_back(std::move(*got));
                done = true;
                break;
            }
        }
        if (!done)
            throw UnsupportedForm("no integration rule matches term: " + render(t));
    }
    return add(std::move(results));
}

}  // namespace kahania

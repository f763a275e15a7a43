#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kahania/expr.hpp"
#include "kahania/integrate.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Discovery of the parameter constraints where the generic antiderivative
// fails, and construction of each special case's integrand + antiderivative.
// ---------------------------------------------------------------------------

struct Constraint {
    Expr lhs = Expr{};  // parameter-only linear form; the condition is lhs = 0

    bool operator==(const Constraint& o) const { return lhs == o.lhs; }
    bool operator<(const Constraint& o) const { return compare(lhs, o.lhs) < 0; }

    // "alpha=1" for a solved single-parameter form, otherwise "lambda+sigma=0";
    // exclusions render with "!=" instead of "="
    std::string display(bool excluded = false) const;
};

struct SpecialCase {
    std::vector<Constraint> constraints;         // conjunction, all = 0
    std::vector<Constraint> residualExclusions;  // must NOT hold
    std::map<std::string, Expr> solution;        // param -> substituted value
    Expr integrand = Expr{};                     // f specialized
    Expr consequent = Expr{};                    // antiderivative, or special atom
    bool unevaluated = false;                    // specialization/integration failed
    std::string error;                           // failure reason when unevaluated
};

namespace detail {

// e as sum of rational-coefficient monomials in the given parameters:
// coeffs[p]*p + ... + c0; false when any term is nonlinear or non-parameter
inline bool linear_form(const Expr& e, const std::set<std::string>& params,
                        std::map<std::string, Rational>& coeffs, Rational& c0) {
    coeffs.clear();
    c0 = 0;
    auto term = [&](const Expr& t) -> bool {
        if (is_number(t)) { c0 += t.value(); return true; }
        if (t.kind() == Kind::Symbol && params.count(t.name())) {
            coeffs[t.name()] += 1;
            return true;
        }
        if (t.kind() == Kind::Mul && t.arity() == 2 && is_number(t.arg(0)) &&
            t.arg(1).kind() == Kind::Symbol && params.count(t.arg(1).name())) {
            coeffs[t.arg(1).name()] += t.arg(0).value();
            return true;
        }
        return false;
    };
    bool ok = true;
    if (e.kind() == Kind::Add) {
        for (const Expr& t : e.args()) ok = ok && term(t);
    } else {
        ok = term(e);
    }
    for (auto it = coeffs.begin(); it != coeffs.end();)
        it = (it->second == 0) ? coeffs.erase(it) : std::next(it);
    return ok;
}

inline Expr linear_expr(const std::map<std::string, Rational>& coeffs, const Rational& c0) {
    std::vector<Expr> terms;
    if (c0 != 0) terms.push_back(number(c0));
    for (const auto& [name, c] : coeffs) terms.push_back(mul({number(c), sym(name)}));
    return terms.empty() ? zero() : add(std::move(terms));
}

// canonical representative: clear the gcd of coefficients, make the first
// parameter's coefficient positive
inline std::optional<Constraint> normalize_constraint(const Expr& lhs,
                                                      const std::set<std::string>& params) {
    std::map<std::string, Rational> coeffs;
    Rational c0;
    if (!linear_form(lhs, params, coeffs, c0)) return std::nullopt;
    if (coeffs.empty()) return std::nullopt;  // constant: not a parameter condition
    Rational scale = coeffs.begin()->second;
    for (auto& [n, c] : coeffs) c /= scale;
    c0 /= scale;
    BigInt l(1);
    for (const auto& [n, c] : coeffs)
        l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(c));
    l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(c0));
    Rational m(l);
    for (auto& [n, c] : coeffs) c *= m;
    c0 *= m;
    BigInt g = boost::multiprecision::numerator(c0 == 0 ? Rational(0) : c0);
    if (g < 0) g = -g;
    for (const auto& [n, c] : coeffs) {
        BigInt cn = boost::multiprecision::numerator(c);
        if (cn < 0) cn = -cn;
        g = g == 0 ? cn : boost::multiprecision::gcd(g, cn);
    }
    if (g > 1) {
        Rational inv(BigInt(1), g);
        for (auto& [n, c] : coeffs) c *= inv;
        c0 *= inv;
    }
    return Constraint{linear_expr(coeffs, c0)};
}

}  // namespace detail

inline std::string Constraint::display(bool excluded) const {
    const char* rel = excluded ? "!=" : "=";
    std::map<std::string, Rational> coeffs;
    Rational c0;
    std::set<std::string> syms = free_symbols(lhs);
    if (detail::linear_form(lhs, syms, coeffs, c0) && coeffs.size() == 1 &&
        coeffs.begin()->second == 1) {
        std::ostringstream os;
        os << coeffs.begin()->first << rel << (-c0);
        return os.str();
    }
    std::ostringstream os;
    detail::render_plain(lhs, os, 0);
    os << rel << '0';
    return os.str();
}

namespace detail {

inline void collect_constraints(const Expr& e, const std::string& z,
                                const std::set<std::string>& params,
                                std::set<Constraint>& out, bool in_exp = false) {
    // denominators: z-free bases of negative integer powers
    if (e.kind() == Kind::Pow && e.arg(1).value() < 0 && !contains_symbol(e.arg(0), z)) {
        const Expr& b = e.arg(0);
        if (b.kind() == Kind::Ln && b.arg(0).kind() == Kind::Symbol &&
            params.count(b.arg(0).name())) {
            // ln(p) = 0  <=>  p = 1
            out.insert(Constraint{add({b.arg(0), integer(-1)})});
        } else if (auto c = normalize_constraint(b, params)) {
            out.insert(*c);
        } else if (!free_symbols(b).empty()) {
            throw NonlinearConstraint("denominator not linear in parameters: " + render(b));
        }
    }
    // base-zero degeneracy: parameter p used as a logarithm base inside exp,
    // i.e. p appears as the base of a symbolic power
    if (in_exp && e.kind() == Kind::Ln && e.arg(0).kind() == Kind::Symbol &&
        params.count(e.arg(0).name()))
        out.insert(Constraint{e.arg(0)});
    for (const Expr& a : e.args())
        collect_constraints(a, z, params, out, in_exp || e.kind() == Kind::Exp);
}

}  // namespace detail

/// Constraints at which G = antiderivative(f) degenerates: vanishing z-free
/// denominators, ln(p) = 0 denominators (as p - 1), base-zero degeneracies,
/// and z-power exponents that can reach -1.
inline std::vector<Constraint> discover_constraints(const Expr& f, const Expr& G,
                                                    const std::string& z,
                                                    const std::set<std::string>& params) {
    std::set<Constraint> found;
    detail::collect_constraints(G, z, params, found);
    // exponent = -1 degeneracies of z-power terms in f
    Expr g = detail::expand(detail::split_logs(simplify(f)));
    std::vector<Expr> terms;
    if (g.kind() == Kind::Add)
        terms.assign(g.args().begin(), g.args().end());
    else
        terms.push_back(g);
    for (const Expr& t : terms) {
        Expr c;
        std::vector<Expr> core;
        detail::split_term(t, z, c, core);
        if (core.size() != 1 || core[0].kind() != Kind::Exp) continue;
        Expr p, q, r;
        if (!detail::linear_in_z_and_lnz(core[0].arg(0), z, p, q, r)) continue;
        if (is_zero(q) || is_number(q)) continue;
        if (auto nc = detail::normalize_constraint(add({q, detail::one()}), params))
            found.insert(*nc);
    }
    return {found.begin(), found.end()};
}

namespace detail {

// exact Gauss-Jordan solve of { lhs_i = 0 }; returns false on inconsistency.
// Pivots run through parameters in sorted order, so each pivot parameter is
// expressed in terms of the later (free) ones.
inline bool solve_constraints(const std::vector<Constraint>& cs,
                              const std::set<std::string>& params,
                              std::map<std::string, Expr>& solution) {
    std::vector<std::string> vars(params.begin(), params.end());
    std::size_t n = vars.size();
    std::vector<std::vector<Rational>> m;  // rows of n coeffs + constant
    for (const Constraint& c : cs) {
        std::map<std::string, Rational> coeffs;
        Rational c0;
        if (!linear_form(c.lhs, params, coeffs, c0)) return false;
        std::vector<Rational> row(n + 1);
        for (std::size_t j = 0; j < n; ++j)
            if (auto it = coeffs.find(vars[j]); it != coeffs.end()) row[j] = it->second;
        row[n] = c0;
        m.push_back(std::move(row));
    }
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_col;
    for (std::size_t col = 0; col < n && rank < m.size(); ++col) {
        std::size_t sel = rank;
        while (sel < m.size() && m[sel][col] == 0) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[rank], m[sel]);
        Rational inv = 1 / m[rank][col];
        for (auto& x : m[rank]) x *= inv;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == rank || m[i][col] == 0) continue;
            Rational fgt = m[i][col];
            for (std::size_t j = 0; j <= n; ++j) m[i][j] -= fgt * m[rank][j];
        }
        pivot_col.push_back(col);
        ++rank;
    }
    for (std::size_t i = rank; i < m.size(); ++i)
        if (m[i][n] != 0) return false;  // 0 = nonzero
    solution.clear();
    for (std::size_t i = 0; i < rank; ++i) {
        std::size_t col = pivot_col[i];
        std::vector<Expr> rhs;
        if (m[i][n] != 0) rhs.push_back(number(-m[i][n]));
        for (std::size_t j = col + 1; j < n; ++j)
            if (m[i][j] != 0) rhs.push_back(mul({number(-m[i][j]), sym(vars[j])}));
        solution.emplace(vars[col], rhs.empty() ? zero() : add(std::move(rhs)));
    }
    return true;
}

inline Expr apply_solution(const Expr& e, const std::map<std::string, Expr>& solution) {
    Expr r = e;
    for (const auto& [name, val] : solution) r = substitute(r, name, val);
    return simplify(r);
}

}  // namespace detail

/// Specialize f under a consistent conjunction of constraints: substitute the
/// exact solution, re-simplify, and re-integrate. An undefined specialized
/// integrand yields the corresponding special atom as consequent.
inline SpecialCase specialize(const Expr& f, const std::vector<Constraint>& cs,
                              const std::string& z) {
    std::set<std::string> params;
    for (const Constraint& c : cs)
        for (const std::string& s : free_symbols(c.lhs)) params.insert(s);
    SpecialCase sc;
    sc.constraints = cs;
    if (!detail::solve_constraints(cs, params, sc.solution))
        throw NonlinearConstraint("inconsistent constraint conjunction");
    sc.integrand = detail::apply_solution(f, sc.solution);
    if (contains_special(sc.integrand))
        sc.consequent = sc.integrand.kind() == Kind::ComplexInfinity ? complex_infinity()
                                                                     : indeterminate();
    else
        sc.consequent = antiderivative(sc.integrand, z);
    return sc;
}

/// Enumerate all special cases of f: base constraints from discover_constraints,
/// consistent subsets up to size 3, deduplicated by solved substitution,
/// exclusions = remaining base constraints reduced under the substitution.
inline std::vector<SpecialCase> all_special_cases(const Expr& f, const Expr& G,
                                                  const std::string& z,
                                                  const std::set<std::string>& params) {
    std::vector<Constraint> base = discover_constraints(f, G, z, params);
    std::size_t n = base.size();
    struct Entry {
        SpecialCase sc;
        std::size_t subset_size;
    };
    std::vector<Entry> entries;
    auto solution_key = [](const std::map<std::string, Expr>& sol) {
        std::string k;
        for (const auto& [name, val] : sol) k += name + ":" + render(val) + ";";
        return k;
    };
    std::map<std::string, std::size_t> seen;  // solution -> entry index
    std::vector<std::size_t> idx;
    auto consider = [&](const std::vector<std::size_t>& subset) {
        std::vector<Constraint> cs;
        for (std::size_t i : subset) cs.push_back(base[i]);
        std::map<std::string, Expr> sol;
        std::set<std::string> cparams;
        for (const Constraint& c : cs)
            for (const std::string& s : free_symbols(c.lhs)) cparams.insert(s);
        if (!detail::solve_constraints(cs, cparams, sol)) return;  // inconsistent
        std::string key = solution_key(sol);
        auto it = seen.find(key);
        if (it != seen.end()) return;  // same case already produced
        SpecialCase sc;
        try {
            sc = specialize(f, cs, z);
        } catch (const std::exception& ex) {
            // recorded as unevaluated with its conditions, never dropped silently
            sc = SpecialCase{};
            sc.constraints = cs;
            sc.solution = sol;
            sc.integrand = detail::apply_solution(f, sol);
            sc.unevaluated = true;
            sc.error = ex.what();
        }
        // exclusions: the other base constraints, reduced under this case
        for (std::size_t i = 0; i < n; ++i) {
            bool in_subset = std::find(subset.begin(), subset.end(), i) != subset.end();
            if (in_subset) continue;
            Expr reduced = detail::apply_solution(base[i].lhs, sol);
            auto rc = detail::normalize_constraint(reduced, params);
            if (!rc) continue;  // reduced to a constant: vacuous
            bool dup = false;
            for (const Constraint& e : sc.residualExclusions)
                if (e == *rc) { dup = true; break; }
            for (const Constraint& e : sc.constraints)
                if (e == *rc) { dup = true; break; }
            if (!dup) sc.residualExclusions.push_back(*rc);
        }
        seen.emplace(key, entries.size());
        entries.push_back({std::move(sc), subset.size()});
    };
    for (std::size_t i = 0; i < n; ++i) consider({i});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) consider({i, j});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) consider({i, j, k});
    std::vector<SpecialCase> out;
    for (Entry& e : entries) out.push_back(std::move(e.sc));
    return out;
}

}  // namespace kahania

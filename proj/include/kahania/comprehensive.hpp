#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kahania/kahanian.hpp"
#include "kahania/normal.hpp"
#include "kahania/parser.hpp"
#include "kahania/series.hpp"
#include "kahania/special_cases.hpp"
#include "kahania/verify.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Piecewise comprehensive antiderivative: one consequent per special parameter
// case plus the generic arm, optional per-arm Kahanian normalization, and the
// cross-arm parametric continuity check.
// ---------------------------------------------------------------------------

struct Consequent {
    std::vector<Constraint> when;    // conjunction, all = 0
    std::vector<Constraint> unless;  // exclusions, all != 0
    std::map<std::string, Expr> solution;
    Expr body = Expr{};  // antiderivative, or a special atom
    bool unevaluated = false;
    std::string error;
};

struct PiecewiseAntiderivative {
    std::vector<Consequent> consequents;  // most-constrained first
    Expr genericBody = Expr{};
    bool kahanianized = false;
    std::string var;
    std::set<std::string> params;
    Expr integrand = Expr{};
};

/// Enumerate every special case of f and place the generic antiderivative
/// last; failed specializations are carried as unevaluated consequents.
inline PiecewiseAntiderivative build_comprehensive(const Expr& f, const std::string& z,
                                                   const std::set<std::string>& params) {
    PiecewiseAntiderivative pw;
    pw.var = z;
    pw.params = params;
    pw.integrand = simplify(f);
    Expr G = antiderivative(f, z);
    pw.genericBody = G;
    for (SpecialCase& sc : all_special_cases(f, G, z, params)) {
        Consequent c;
        c.when = std::move(sc.constraints);
        c.unless = std::move(sc.residualExclusions);
        c.solution = std::move(sc.solution);
        c.body = sc.consequent;
        c.unevaluated = sc.unevaluated;
        c.error = std::move(sc.error);
        pw.consequents.push_back(std::move(c));
    }
    std::stable_sort(pw.consequents.begin(), pw.consequents.end(),
                     [](const Consequent& a, const Consequent& b) {
                         return a.when.size() > b.when.size();
                     });
    return pw;
}

/// Add a Kahanian constant to every non-atom arm so all arms share the anchor.
inline PiecewiseAntiderivative kahanianize(const PiecewiseAntiderivative& pw,
                                           const std::string& z, const Expr& anchor) {
    if (!is_number(anchor))
        throw InfiniteAnchor("anchor must be a finite exact constant, got " +
                             render(anchor));
    PiecewiseAntiderivative out = pw;
    auto shift = [&](Expr& body, const std::string& which) {
        try {
            Expr C = kahanian_constant(body, z, anchor);
            body = simplify(add({body, C}));
        } catch (const InvalidAnchor& e) {
            throw InvalidAnchor(which + ": " + e.what());
        }
    };
    shift(out.genericBody, "generic arm");
    for (Consequent& c : out.consequents) {
        if (c.unevaluated || is_special_atom(c.body)) continue;
        std::string which = "arm";
        for (const Constraint& k : c.when) which += " " + k.display();
        shift(c.body, which);
    }
    out.kahanianized = true;
    return out;
}

// ---------------------------------------------------------------------------
// Continuity check
// ---------------------------------------------------------------------------

struct ContinuityCheck {
    std::string arm;        // display of the arm's conditions
    std::string direction;  // "param -> value" approach direction
    bool applicable = false;
    bool pass = false;
    LimitResult limitResult;
    std::string method;   // "symbolic", "numeric", or failure witness
    std::string witness;  // detail on failure
};

struct ContinuityReport {
    std::vector<ContinuityCheck> checks;
    bool allPass = true;  // over applicable checks
};

namespace detail {

inline bool numeric_convergence(const Expr& generic, const Expr& body,
                                const std::string& p, const Expr& point,
                                const std::set<std::string>& others, unsigned seed,
                                std::string& witness) {
    std::mt19937 rng(seed);
    const double deltas[] = {1e-2, 1e-3, 1e-4};
    int tested = 0, attempts = 0;
    while (tested < 10 && attempts < 400) {
        ++attempts;
        Binding b = random_binding(others, rng);
        try {
            Complex pc = eval_numeric(point, b);
            Complex target = eval_numeric(body, b);
            double prev = std::numeric_limits<double>::infinity();
            double final_gap = 0.0;
            bool mono = true;
            for (double d : deltas) {
                Binding bb = b;
                bb[p] = pc + Complex(d, 0.0);
                double gap = std::abs(eval_numeric(generic, bb) - target);
                if (gap > prev + 1e-7) mono = false;
                prev = gap;
                final_gap = gap;
            }
            ++tested;
            if (!mono || final_gap > 1e-4 * (1.0 + std::abs(target))) {
                std::ostringstream os;
                os << "no convergence at " << describe_binding(b) << "final gap "
                   << final_gap;
                witness = os.str();
                return false;
            }
        } catch (const EvalError&) {
            continue;
        }
    }
    if (tested == 0) {
        witness = "no evaluable sample points";
        return false;
    }
    return true;
}

}  // namespace detail

/// Verify limit(generic arm, p -> p_c) = arm body for every arm with a finite
/// body: symbolically first, then by numeric convergence. Multi-constraint
/// arms are checked along each single-parameter direction separately, holding
/// the other constrained parameters at their special values.
inline ContinuityReport continuity_check(const PiecewiseAntiderivative& pw,
                                         const std::string& z) {
    ContinuityReport rep;
    for (const Consequent& c : pw.consequents) {
        std::string armdesc;
        for (const Constraint& k : c.when)
            armdesc += (armdesc.empty() ? "" : " && ") + k.display();
        if (c.unevaluated || is_special_atom(c.body)) {
            ContinuityCheck chk;
            chk.arm = armdesc;
            chk.direction = "-";
            chk.applicable = false;
            chk.method = c.unevaluated ? "skipped: unevaluated arm"
                                       : "skipped: special-atom arm";
            rep.checks.push_back(std::move(chk));
            continue;
        }
        for (const auto& [p, value] : c.solution) {
            ContinuityCheck chk;
            chk.arm = armdesc;
            chk.direction = p + " -> " + render(value);
            chk.applicable = true;
            // hold the other constrained parameters at their special values
            Expr generic = pw.genericBody;
            for (const auto& [q, qval] : c.solution)
                if (q != p) generic = substitute(generic, q, qval);
            generic = simplify(generic);
            if (contains_special(generic)) {
                chk.applicable = false;
                chk.method = "skipped: generic arm undefined along this direction";
                rep.checks.push_back(std::move(chk));
                continue;
            }
            try {
                chk.limitResult = limit(generic, p, value);
            } catch (const std::exception& e) {
                chk.pass = false;
                chk.method = "limit failed";
                chk.witness = e.what();
                rep.allPass = false;
                rep.checks.push_back(std::move(chk));
                continue;
            }
            if (chk.limitResult.is_pole()) {
                chk.pass = false;
                chk.method = "pole";
                chk.witness = "Pole(" + std::to_string(chk.limitResult.order) + ")";
            } else if (chk.limitResult.is_finite() &&
                       equivalent(chk.limitResult.value, c.body)) {
                chk.pass = true;
                chk.method = "symbolic";
            } else {
                std::set<std::string> others = pw.params;
                others.erase(p);
                others.insert(free_symbols(c.body).begin(), free_symbols(c.body).end());
                others.insert(z);
                std::string witness;
                chk.pass = detail::numeric_convergence(generic, c.body, p, value,
                                                       others, 20260824u, witness);
                chk.method = "numeric";
                chk.witness = witness;
            }
            if (chk.applicable && !chk.pass) rep.allPass = false;
            rep.checks.push_back(std::move(chk));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Evaluation and JSON serialization
// ---------------------------------------------------------------------------

/// First-match-wins arm selection for a full parameter binding (exact check of
/// each arm's equalities and exclusions), generic arm as fallback.
inline const Expr& select_arm(const PiecewiseAntiderivative& pw, const Binding& b,
                              double tol = 1e-12) {
    for (const Consequent& c : pw.consequents) {
        bool match = !c.unevaluated;
        for (const Constraint& k : c.when)
            if (match && std::abs(eval_numeric(k.lhs, b)) > tol) match = false;
        for (const Constraint& k : c.unless)
            if (match && std::abs(eval_numeric(k.lhs, b)) <= tol) match = false;
        if (match) return c.body;
    }
    return pw.genericBody;
}

inline nlohmann::json to_json(const PiecewiseAntiderivative& pw) {
    nlohmann::json arms = nlohmann::json::array();
    for (const Consequent& c : pw.consequents) {
        nlohmann::json when = nlohmann::json::array();
        for (const Constraint& k : c.when) when.push_back(k.display());
        nlohmann::json unless = nlohmann::json::array();
        for (const Constraint& k : c.unless) unless.push_back(k.display(true));
        nlohmann::json body;
        if (c.unevaluated)
            body = nlohmann::json{{"op", "Unevaluated"}, {"error", c.error}};
        else
            body = to_json(c.body);
        arms.push_back({{"when", std::move(when)},
                        {"unless", std::move(unless)},
                        {"body", std::move(body)}});
    }
    return {{"arms", std::move(arms)},
            {"otherwise", to_json(pw.genericBody)},
            {"kahanian", pw.kahanianized}};
}

}  // namespace kahania

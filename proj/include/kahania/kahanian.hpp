#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kahania/expr.hpp"
#include "kahania/integrate.hpp"
#include "kahania/normal.hpp"
#include "kahania/series.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Semidefinite integration with anchor points, Kahanian constant extraction,
// anchor selection, and definite integration through parameter limits.
// ---------------------------------------------------------------------------

struct KahanianResult {
    Expr generic = Expr{};           // G(z;p)
    Expr anchor = Expr{};            // A, exact finite constant
    Expr kahanianConstant = Expr{};  // C(p) = -G(A;p)
    Expr continuousForm = Expr{};    // P = G + C
    std::vector<std::pair<Expr, std::string>> anchorTried;  // (candidate, outcome)
};

inline const std::vector<Expr>& default_anchor_candidates() {
    static const std::vector<Expr> c = {integer(1), integer(0), integer(-1), integer(2)};
    return c;
}

/// C(p) = -G(A;p) as a single rational-form expression in the parameters.
inline Expr kahanian_constant(const Expr& G, const std::string& z, const Expr& A) {
    Expr at = simplify(substitute(G, z, A));
    if (contains_special(at))
        throw InvalidAnchor("G is undefined at anchor " + render(A));
    return rational_normal(neg(at));
}

/// P(z;p) = G(z;p) - G(A;p): continuous across all finite parameter values
/// wherever the integrand is parameter-continuous.
inline Expr semidefinite(const Expr& f, const std::string& z, const Expr& A) {
    if (!is_number(A))
        throw InfiniteAnchor("anchor must be a finite exact constant, got " + render(A));
    Expr G = antiderivative(f, z);
    Expr C = kahanian_constant(G, z, A);
    return simplify(add({G, C}));
}

/// First candidate with Kahanian constant 0 wins; otherwise smallest node
/// count, ties broken by candidate order. Invalid anchors are skipped.
inline KahanianResult select_anchor(const Expr& G, const std::string& z,
                                    const std::vector<Expr>& candidates =
                                        default_anchor_candidates()) {
    KahanianResult best;
    best.generic = G;
    bool have = false;
    std::size_t best_nodes = 0;
    for (const Expr& A : candidates) {
        if (!is_number(A)) {
            best.anchorTried.emplace_back(A, "rejected: not a finite exact constant");
            continue;
        }
        Expr C;
        try {
            C = kahanian_constant(G, z, A);
        } catch (const InvalidAnchor& e) {
            best.anchorTried.emplace_back(A, std::string("invalid: ") + e.what());
            continue;
        }
        std::size_t nodes = node_count(C);
        best.anchorTried.emplace_back(A, "valid, constant node count " +
                                             std::to_string(nodes));
        if (is_zero(C)) {
            best.anchor = A;
            best.kahanianConstant = C;
            best.continuousForm = simplify(add({G, C}));
            return best;
        }
        if (!have || nodes < best_nodes) {
            have = true;
            best_nodes = nodes;
            best.anchor = A;
            best.kahanianConstant = C;
        }
    }
    if (!have) throw NoValidAnchor("every anchor candidate made G undefined");
    best.continuousForm = simplify(add({G, best.kahanianConstant}));
    return best;
}

namespace detail {

// value of G at a z-endpoint, switching to a z-limit when direct substitution
// is undefined (improper integrals)
inline Expr endpoint_value(const Expr& G, const std::string& z, const Expr& p) {
    Expr direct = simplify(substitute(G, z, p));
    if (!contains_special(direct)) return direct;
    LimitResult lr = limit(G, z, p);
    if (lr.is_pole())
        throw DivergentIntegral("antiderivative diverges at endpoint " + render(p));
    if (!lr.is_finite()) return indeterminate();
    return lr.value;
}

}  // namespace detail

/// D = G(b;p) - G(a;p) kept together as one expression; with atPoint (p, p_c)
/// the whole difference is taken through the parameter limit, since the
/// per-term limits need not exist separately.
inline Expr definite_with_limit(const Expr& f, const std::string& z, const Expr& a,
                                const Expr& b,
                                std::optional<std::pair<std::string, Expr>> atPoint =
                                    std::nullopt) {
    Expr G = antiderivative(f, z);
    Expr gb = detail::endpoint_value(G, z, b);
    Expr ga = detail::endpoint_value(G, z, a);
    if (gb.kind() == Kind::Indeterminate || ga.kind() == Kind::Indeterminate)
        return indeterminate();
    Expr D = simplify(add({gb, neg(ga)}));
    if (!atPoint) return D;
    LimitResult lr = limit(D, atPoint->first, atPoint->second);
    if (lr.is_pole())
        throw DivergentIntegral("definite integral diverges as " + atPoint->first +
                                " -> " + render(atPoint->second));
    if (!lr.is_finite()) return indeterminate();
    return lr.value;
}

}  // namespace kahania

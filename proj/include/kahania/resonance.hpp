#pragma once

#include <string>
#include <vector>

#include "kahania/integrate.hpp"
#include "kahania/kahanian.hpp"
#include "kahania/normal.hpp"
#include "kahania/series.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Variation-of-parameters demo for x'' + k^2 x = cos(omega t), exercising
// Kahanian antiderivatives end to end.
// ---------------------------------------------------------------------------

/// Rewrite products of two sines/cosines into sums (one pass, bottom-up):
/// cosA cosB = (cos(A-B)+cos(A+B))/2, sinA sinB = (cos(A-B)-cos(A+B))/2,
/// sinA cosB = (sin(A+B)+sin(A-B))/2. Kept out of global simplify.
inline Expr product_to_sum(const Expr& e) {
    if (e.arity() == 0) return e;
    std::vector<Expr> args;
    for (const Expr& a : e.args()) args.push_back(product_to_sum(a));
    if (e.kind() == Kind::Mul) {
        for (std::size_t i = 0; i < args.size(); ++i) {
            Kind ki = args[i].kind();
            if (ki != Kind::Sin && ki != Kind::Cos) continue;
            for (std::size_t j = i + 1; j < args.size(); ++j) {
                Kind kj = args[j].kind();
                if (kj != Kind::Sin && kj != Kind::Cos) continue;
                Expr A = args[i].arg(0), B = args[j].arg(0);
                Expr sum = add({A, B}), diff = add({A, neg(B)});
                Expr repl;
                if (ki == Kind::Cos && kj == Kind::Cos)
                    repl = mul({rational(1, 2), add({cos_(diff), cos_(sum)})});
                else if (ki == Kind::Sin && kj == Kind::Sin)
                    repl = mul({rational(1, 2), add({cos_(diff), neg(cos_(sum))})});
                else if (ki == Kind::Sin)  // sin(A) cos(B)
                    repl = mul({rational(1, 2), add({sin_(sum), sin_(diff)})});
                else  // cos(A) sin(B) = (sin(A+B) - sin(A-B))/2
                    repl = mul({rational(1, 2), add({sin_(sum), neg(sin_(diff))})});
                std::vector<Expr> rest;
                for (std::size_t m = 0; m < args.size(); ++m)
                    if (m != i && m != j) rest.push_back(args[m]);
                rest.push_back(repl);
                return product_to_sum(mul(std::move(rest)));
            }
        }
    }
    ExprNode n{e.kind(), e.value(), e.name(), std::move(args)};
    return simplify(Expr::make(std::move(n)));
}

struct OscillatorSolution {
    Expr u1 = Expr{};
    Expr u2 = Expr{};
    Expr wronskian = Expr{};
    Expr particular = Expr{};     // x_p(t)
    Expr resonantLimit = Expr{};  // limit of x_p as omega -> k (when finite)
    LimitResult resonantStatus;
    bool usedKahanian = false;
};

/// Particular integral of x'' + k^2 x = cos(omega t) by variation of
/// parameters on the basis {cos kt, sin kt}; with kahanian=true, u1 is
/// anchored at A = 0, which removes the resonance pole at omega = k.
inline OscillatorSolution particular_integral(const std::string& k,
                                              const std::string& omega,
                                              const std::string& t, bool kahanian) {
    OscillatorSolution sol;
    sol.usedKahanian = kahanian;
    Expr kt = mul({sym(k), sym(t)});
    Expr x1 = cos_(kt), x2 = sin_(kt);
    Expr forcing = cos_(mul({sym(omega), sym(t)}));
    sol.wronskian = simplify(add({mul({x1, differentiate(x2, t)}),
                                  neg(mul({x2, differentiate(x1, t)}))}));
    Expr winv = pow(sol.wronskian, integer(-1));
    Expr f1 = product_to_sum(mul({integer(-1), x2, forcing, winv}));
    Expr f2 = product_to_sum(mul({x1, forcing, winv}));
    sol.u1 = kahanian ? semidefinite(f1, t, integer(0)) : antiderivative(f1, t);
    sol.u2 = antiderivative(f2, t);  // already zero at t = 0: no Kahanian needed
    Expr raw = detail::expand(add({mul({sol.u1, x1}), mul({sol.u2, x2})}));
    sol.particular = simplify(rational_normal(product_to_sum(raw)));
    sol.resonantStatus = limit(sol.particular, omega, sym(k));
    if (sol.resonantStatus.is_finite())
        sol.resonantLimit = sol.resonantStatus.value;
    else
        sol.resonantLimit = indeterminate();
    return sol;
}

}  // namespace kahania

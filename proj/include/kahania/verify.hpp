#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "kahania/expr.hpp"
#include "kahania/special_cases.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Independent numeric oracles: adaptive Simpson quadrature along straight
// complex segments, and differentiation round-trip sampling.
// ---------------------------------------------------------------------------

struct QuadratureResult {
    Complex value{0.0, 0.0};
    double errorEstimate = 0.0;
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

struct QuadState {
    const Expr* f;
    const std::string* z;
    Binding binding;
    Complex a, delta;  // segment a + t*delta, t in [0,1]
    long budget;
    long evals = 0;
    double tol;

    Complex sample(double t) {
        ++evals;
        binding[*z] = a + t * delta;
        return eval_numeric(*f, binding) * delta;
    }
};

inline Complex simpson(const Complex& fl, const Complex& fm, const Complex& fr, double h) {
    return (h / 6.0) * (fl + 4.0 * fm + fr);
}

inline void adaptive(QuadState& st, double lo, double hi, Complex fl, Complex fm,
                     Complex fr, Complex whole, double tol, Complex& acc, double& err,
                     bool& ok, int depth) {
    if (st.evals + 2 > st.budget || depth > 48) {
        acc += whole;
        err += std::abs(whole) * 1e-3 + tol;
        ok = false;
        return;
    }
    double mid = 0.5 * (lo + hi);
    Complex flm = st.sample(0.5 * (lo + mid));
    Complex fmr = st.sample(0.5 * (mid + hi));
    Complex left = simpson(fl, flm, fm, mid - lo);
    Complex right = simpson(fm, fmr, fr, hi - mid);
    Complex better = left + right;
    double e = std::abs(better - whole) / 15.0;
    // absolute-plus-relative acceptance
    if (e <= tol * (1.0 + std::abs(better))) {
        acc += better + (better - whole) / 15.0;  // Richardson extrapolation
        err += e;
        return;
    }
    adaptive(st, lo, mid, fl, flm, fm, left, 0.5 * tol, acc, err, ok, depth + 1);
    adaptive(st, mid, hi, fm, fmr, fr, right, 0.5 * tol, acc, err, ok, depth + 1);
}

}  // namespace detail

/// Adaptive Simpson along the straight segment from a to b. Never reports
/// converged=true past the budget.
inline QuadratureResult quadrature(const Expr& f, const std::string& z, Complex a,
                                   Complex b, const Binding& bindings,
                                   double tol = 1e-9, long budget = 100000) {
    detail::QuadState st{&f, &z, bindings, a, b - a, budget, 0, tol};
    QuadratureResult r;
    if (std::abs(st.delta) == 0.0) {
        r.converged = true;
        return r;
    }
    Complex fl = st.sample(0.0), fm = st.sample(0.5), fr = st.sample(1.0);
    Complex whole = detail::simpson(fl, fm, fr, 1.0);
    Complex acc{0.0, 0.0};
    double err = 0.0;
    bool ok = true;
    detail::adaptive(st, 0.0, 1.0, fl, fm, fr, whole, tol, acc, err, ok, 0);
    r.value = acc;
    r.errorEstimate = err;
    r.evaluations = st.evals;
    r.converged = ok;
    return r;
}

struct RoundtripReport {
    bool pass = false;
    double maxRelDeviation = 0.0;
    int samples = 0;
    std::string worstWitness;  // rendering of the worst binding
};

namespace detail {

inline Binding random_binding(const std::set<std::string>& symbols, std::mt19937& rng) {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    Binding b;
    for (const std::string& s : symbols) b[s] = Complex(d(rng), d(rng));
    return b;
}

inline bool clear_of_constraints(const Binding& b, const std::vector<Constraint>& avoid,
                                 double margin) {
    for (const Constraint& c : avoid) {
        try {
            if (std::abs(eval_numeric(c.lhs, b)) < margin) return false;
        } catch (const EvalError&) {
            return false;
        }
    }
    return true;
}

inline std::string describe_binding(const Binding& b) {
    std::ostringstream os;
    for (const auto& [name, v] : b)
        os << name << "=(" << v.real() << "," << v.imag() << ") ";
    return os.str();
}

}  // namespace detail

/// Samples random (z, params) bindings, parameters kept >= `margin` away from
/// every constraint surface in `avoid`; pass iff the relative deviation of
/// d/dz G from f stays within tol at every sample.
inline RoundtripReport diff_roundtrip_check(const Expr& G, const Expr& f,
                                            const std::string& z,
                                            const std::vector<Constraint>& avoid = {},
                                            int samples = 50, double tol = 1e-9,
                                            unsigned seed = 20260824,
                                            double margin = 0.1) {
    Expr dG = differentiate(G, z);
    std::set<std::string> symbols = free_symbols(f);
    for (const std::string& s : free_symbols(G)) symbols.insert(s);
    symbols.insert(z);
    std::mt19937 rng(seed);
    RoundtripReport rep;
    rep.pass = true;
    int taken = 0, attempts = 0;
    while (taken < samples && attempts < samples * 200) {
        ++attempts;
        Binding b = detail::random_binding(symbols, rng);
        if (!detail::clear_of_constraints(b, avoid, margin)) continue;
        Complex lhs, rhs;
        try {
            lhs = eval_numeric(dG, b);
            rhs = eval_numeric(f, b);
        } catch (const EvalError&) {
            continue;  // singular sample: perturb by redrawing
        }
        if (!std::isfinite(lhs.real()) || !std::isfinite(lhs.imag()) ||
            !std::isfinite(rhs.real()) || !std::isfinite(rhs.imag()))
            continue;
        ++taken;
        double dev = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
        if (dev > rep.maxRelDeviation) {
            rep.maxRelDeviation = dev;
            rep.worstWitness = detail::describe_binding(b);
        }
        if (dev > tol) rep.pass = false;
    }
    rep.samples = taken;
    if (taken < samples) rep.pass = false;
    return rep;
}

}  // namespace kahania

// kahania: command-line surface for the symbolic integration engine.

#include <complex>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kahania/kahania.hpp"

namespace {

using namespace kahania;

enum class Format { Text, Json, Latex };

Format parse_format(const std::string& s) {
    if (s == "json") return Format::Json;
    if (s == "latex") return Format::Latex;
    return Format::Text;
}

std::string render_fmt(const Expr& e, Format f) {
    switch (f) {
        case Format::Json: return to_json(e).dump();
        case Format::Latex: return render(e, RenderFormat::Latex);
        default: return render(e, RenderFormat::Plain);
    }
}

double tolerance_from_env() {
    if (const char* v = std::getenv("KAHANIA_TOL")) {
        try {
            double t = std::stod(v);
            if (t > 0) return t;
        } catch (...) {
        }
    }
    return 1e-9;
}

std::set<std::string> split_params(const std::string& csv) {
    std::set<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(item);
    return out;
}

std::pair<std::string, Expr> parse_limit_flag(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
        throw CLI::ValidationError("--limit expects the form param=value");
    return {s.substr(0, eq), parse(s.substr(eq + 1))};
}

struct Range {
    double lo, hi;
    long n;
};

Range parse_range(const std::string& s) {
    Range r;
    char c1, c2;
    std::istringstream is(s);
    if (!(is >> r.lo >> c1 >> r.hi >> c2 >> r.n) || c1 != ':' || c2 != ':' || r.n < 2)
        throw CLI::ValidationError("range expects lo:hi:n with n >= 2, got '" + s + "'");
    return r;
}

void print_kahanian(const KahanianResult& r, Format fmt, std::ostream& os) {
    if (fmt == Format::Json) {
        nlohmann::json tried = nlohmann::json::array();
        for (const auto& [cand, outcome] : r.anchorTried)
            tried.push_back({{"candidate", to_json(cand)}, {"outcome", outcome}});
        os << nlohmann::json{{"generic", to_json(r.generic)},
                             {"anchor", to_json(r.anchor)},
                             {"kahanianConstant", to_json(r.kahanianConstant)},
                             {"continuousForm", to_json(r.continuousForm)},
                             {"anchorTried", std::move(tried)}}
                  .dump()
           << "\n";
        return;
    }
    os << "G = " << render_fmt(r.generic, fmt) << "\n";
    os << "anchor = " << render_fmt(r.anchor, fmt) << "\n";
    os << "C = " << render_fmt(r.kahanianConstant, fmt) << "\n";
    os << "P = " << render_fmt(r.continuousForm, fmt) << "\n";
    for (const auto& [cand, outcome] : r.anchorTried)
        os << "tried " << render(cand) << ": " << outcome << "\n";
}

void print_piecewise(const PiecewiseAntiderivative& pw, Format fmt, std::ostream& os) {
    if (fmt == Format::Json) {
        os << to_json(pw).dump() << "\n";
        return;
    }
    for (const auto& c : pw.consequents) {
        os << "if";
        bool first = true;
        for (const auto& k : c.when) {
            os << (first ? " " : " and ") << k.display();
            first = false;
        }
        for (const auto& k : c.unless) os << (first ? " " : " and ") << k.display(true);
        os << ": ";
        if (c.unevaluated)
            os << "Unevaluated (" << c.error << ")";
        else
            os << render_fmt(c.body, fmt);
        os << "\n";
    }
    os << "otherwise: " << render_fmt(pw.genericBody, fmt) << "\n";
}

void print_resonance(const OscillatorSolution& s, Format fmt, std::ostream& os) {
    if (fmt == Format::Json) {
        nlohmann::json j{{"u1", to_json(s.u1)},
                         {"u2", to_json(s.u2)},
                         {"wronskian", to_json(s.wronskian)},
                         {"particular", to_json(s.particular)},
                         {"usedKahanian", s.usedKahanian}};
        if (s.resonantStatus.is_finite())
            j["resonantLimit"] = to_json(s.resonantLimit);
        else if (s.resonantStatus.is_pole())
            j["resonantLimit"] = {{"pole", s.resonantStatus.order}};
        else
            j["resonantLimit"] = {{"op", "Indeterminate"}};
        os << j.dump() << "\n";
        return;
    }
    os << "W = " << render_fmt(s.wronskian, fmt) << "\n";
    os << "u1 = " << render_fmt(s.u1, fmt) << "\n";
    os << "u2 = " << render_fmt(s.u2, fmt) << "\n";
    os << "x_p = " << render_fmt(s.particular, fmt) << "\n";
    if (s.resonantStatus.is_finite())
        os << "resonant limit = " << render_fmt(s.resonantLimit, fmt) << "\n";
    else if (s.resonantStatus.is_pole())
        os << "resonant limit = Pole(" << s.resonantStatus.order << ")\n";
    else
        os << "resonant limit = Indeterminate\n";
}

std::string format_cell(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

int run(int argc, char** argv) {
    CLI::App app{"kahania: parameter-aware symbolic integration"};
    app.require_subcommand(1);

    std::string expr_text, var = "z", format_name = "text", params_csv, anchor_text;
    std::string from_text, to_text, limit_text, against_text, param_name;
    std::string zrange_text, prange_text;
    bool kahanian_flag = false;
    long consequent_index = -1;

    auto add_expr_var = [&](CLI::App* sub, bool need_expr = true) {
        if (need_expr) sub->add_option("expr", expr_text, "integrand")->required();
        sub->add_option("--var", var, "integration variable");
        sub->add_option("--format", format_name, "text|json|latex");
    };

    CLI::App* c_int = app.add_subcommand("integrate", "generic antiderivative");
    add_expr_var(c_int);

    CLI::App* c_kah = app.add_subcommand("kahanian", "anchored antiderivative");
    add_expr_var(c_kah);
    c_kah->add_option("--anchor", anchor_text, "anchor candidate (exact constant)");

    CLI::App* c_comp = app.add_subcommand("comprehensive", "piecewise antiderivative");
    add_expr_var(c_comp);
    c_comp->add_option("--params", params_csv, "comma-separated parameter names")
        ->required();
    c_comp->add_flag("--kahanian", kahanian_flag, "add Kahanian constants to all arms");
    c_comp->add_option("--anchor", anchor_text, "anchor for --kahanian (default 1)");

    CLI::App* c_def = app.add_subcommand("definite", "definite integral, limits kept together");
    add_expr_var(c_def);
    c_def->add_option("--from", from_text, "lower endpoint")->required();
    c_def->add_option("--to", to_text, "upper endpoint")->required();
    c_def->add_option("--limit", limit_text, "parameter limit param=value");

    CLI::App* c_ver = app.add_subcommand("verify", "numeric differentiation round-trip");
    add_expr_var(c_ver);
    c_ver->add_option("--against", against_text, "candidate antiderivative to check");

    CLI::App* c_res = app.add_subcommand("resonance", "forced-oscillator demo");
    c_res->add_option("--format", format_name, "text|json|latex");
    c_res->add_flag("--kahanian", kahanian_flag, "use anchored u1");

    CLI::App* c_grid = app.add_subcommand("grid", "CSV over a (var, param) lattice");
    add_expr_var(c_grid);
    c_grid->add_option("--param", param_name, "parameter name")->required();
    c_grid->add_option("--zrange", zrange_text, "lo:hi:n for the variable")->required();
    c_grid->add_option("--prange", prange_text, "lo:hi:n for the parameter")->required();
    c_grid->add_option("--consequent", consequent_index,
                       "evaluate this arm of the comprehensive antiderivative "
                       "(arm count selects the generic arm)");
    c_grid->add_flag("--kahanian", kahanian_flag, "kahanianize before arm selection");
    c_grid->add_option("--anchor", anchor_text, "anchor for --kahanian (default 1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n";
        return 1;
    }

    Format fmt = parse_format(format_name);
    double tol = tolerance_from_env();

    try {
        if (c_int->parsed()) {
            std::cout << render_fmt(antiderivative(parse(expr_text), var), fmt) << "\n";
        } else if (c_kah->parsed()) {
            Expr G = antiderivative(parse(expr_text), var);
            std::vector<Expr> candidates = anchor_text.empty()
                                               ? default_anchor_candidates()
                                               : std::vector<Expr>{parse(anchor_text)};
            print_kahanian(select_anchor(G, var, candidates), fmt, std::cout);
        } else if (c_comp->parsed()) {
            auto pw = build_comprehensive(parse(expr_text), var, split_params(params_csv));
            if (kahanian_flag)
                pw = kahanianize(pw, var,
                                 anchor_text.empty() ? integer(1) : parse(anchor_text));
            print_piecewise(pw, fmt, std::cout);
        } else if (c_def->parsed()) {
            std::optional<std::pair<std::string, Expr>> at;
            if (!limit_text.empty()) at = parse_limit_flag(limit_text);
            Expr d = definite_with_limit(parse(expr_text), var, parse(from_text),
                                         parse(to_text), at);
            std::cout << render_fmt(d, fmt) << "\n";
        } else if (c_ver->parsed()) {
            Expr f = parse(expr_text);
            Expr G = against_text.empty() ? antiderivative(f, var) : parse(against_text);
            std::set<std::string> ps = free_symbols(f);
            ps.erase(var);
            std::vector<Constraint> avoid;
            try {
                avoid = discover_constraints(f, G, var, ps);
            } catch (const NonlinearConstraint&) {
            }
            RoundtripReport rep = diff_roundtrip_check(G, f, var, avoid, 50, tol);
            std::cout << (rep.pass ? "PASS" : "FAIL") << " samples=" << rep.samples
                      << " maxRelDeviation=" << rep.maxRelDeviation;
            if (!rep.pass && !rep.worstWitness.empty())
                std::cout << " worst: " << rep.worstWitness;
            std::cout << "\n";
            if (!rep.pass) return 2;
        } else if (c_res->parsed()) {
            print_resonance(particular_integral("k", "omega", "t", kahanian_flag), fmt,
                            std::cout);
        } else if (c_grid->parsed()) {
            Range zr = parse_range(zrange_text), pr = parse_range(prange_text);
            Expr f = parse(expr_text);
            Expr target = f;
            if (consequent_index >= 0) {
                auto pw = build_comprehensive(f, var, {param_name});
                if (kahanian_flag)
                    pw = kahanianize(pw, var,
                                     anchor_text.empty() ? integer(1) : parse(anchor_text));
                long arms = static_cast<long>(pw.consequents.size());
                if (consequent_index < arms)
                    target = pw.consequents[consequent_index].body;
                else if (consequent_index == arms)
                    target = pw.genericBody;
                else
                    throw CLI::ValidationError("--consequent out of range (0.." +
                                               std::to_string(arms) + ")");
            }
            std::ostream& os = std::cout;
            os << var;
            for (long j = 0; j < pr.n; ++j) {
                double p = pr.lo + (pr.hi - pr.lo) * j / (pr.n - 1);
                os << ',' << format_cell(p);
            }
            os << "\n";
            for (long i = 0; i < zr.n; ++i) {
                double zv = zr.lo + (zr.hi - zr.lo) * i / (zr.n - 1);
                os << format_cell(zv);
                for (long j = 0; j < pr.n; ++j) {
                    double p = pr.lo + (pr.hi - pr.lo) * j / (pr.n - 1);
                    std::string cell = "nan";
                    try {
                        Binding b{{var, {zv, 0.0}}, {param_name, {p, 0.0}}};
                        Complex v = eval_numeric(target, b);
                        cell = format_cell(v.real());
                    } catch (const std::exception&) {
                    }
                    os << ',' << cell;
                }
                os << "\n";
            }
        }
    } catch (const ParseError& e) {
        std::cerr << "ParseError: " << e.what() << "\n";
        return 1;
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const UnsupportedForm& e) {
        std::cout << "UnsupportedForm " << e.what() << "\n";
        return 2;
    } catch (const NonlinearConstraint& e) {
        std::cout << "NonlinearConstraint " << e.what() << "\n";
        return 2;
    } catch (const InfiniteAnchor& e) {
        std::cout << "InfiniteAnchor " << e.what() << "\n";
        return 2;
    } catch (const InvalidAnchor& e) {
        std::cout << "InvalidAnchor " << e.what() << "\n";
        return 2;
    } catch (const NoValidAnchor& e) {
        std::cout << "NoValidAnchor " << e.what() << "\n";
        return 2;
    } catch (const DivergentIntegral& e) {
        std::cout << "DivergentIntegral " << e.what() << "\n";
        return 2;
    } catch (const EssentialSingularity& e) {
        std::cout << "EssentialSingularity " << e.what() << "\n";
        return 2;
    } catch (const EvalError& e) {
        std::cout << "EvalError " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }

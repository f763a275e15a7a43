#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kahania/expr.hpp"

namespace kahania {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace detail {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
};

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto push = [&](Tok k, std::size_t b, std::size_t e) {
        out.push_back({k, src.substr(b, e - b), {b, e}});
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        std::size_t b = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < src.size() &&
             std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            if (i < src.size() && src[i] == '.') {
                ++i;
                while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
            }
            push(Tok::Number, b, i);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_'))
                ++i;
            push(Tok::Ident, b, i);
            continue;
        }
        switch (c) {
            case '+': push(Tok::Plus, b, ++i); break;
            case '-': push(Tok::Minus, b, ++i); break;
            case '*': push(Tok::Star, b, ++i); break;
            case '/': push(Tok::Slash, b, ++i); break;
            case '^': push(Tok::Caret, b, ++i); break;
            case '(': push(Tok::LParen, b, ++i); break;
            case ')': push(Tok::RParen, b, ++i); break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", {b, b + 1});
        }
    }
    out.push_back({Tok::End, "", {src.size(), src.size()}});
    return out;
}

inline bool is_function_name(const std::string& s) {
    return s == "exp" || s == "ln" || s == "sin" || s == "cos" || s == "arccot" ||
           s == "sqrt";
}

// Recursive-descent parser. Precedence: ^ > unary- > * / > + -, with ^
// right-associative (its right operand may carry a unary minus).
class Parser {
public:
    explicit Parser(const std::string& src) : toks_(lex(src)) {}

    Expr parse() {
        Expr e = expression();
        expect(Tok::End, "end of input");
        return e;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek() const { return toks_[pos_]; }
    Token next() { return toks_[pos_++]; }
    bool accept(Tok k) {
        if (peek().kind == k) { ++pos_; return true; }
        return false;
    }
    void expect(Tok k, const std::string& what) {
        if (!accept(k))
            throw ParseError("expected " + what + ", found '" +
                                 (peek().kind == Tok::End ? "end of input" : peek().text) + "'",
                             peek().span);
    }

    Expr expression() {
        Expr e = term();
        for (;;) {
            if (accept(Tok::Plus))
                e = add({e, term()});
            else if (accept(Tok::Minus))
                e = add({e, neg(term())});
            else
                return e;
        }
    }

    Expr term() {
        Expr e = factor();
        for (;;) {
            if (accept(Tok::Star))
                e = mul({e, factor()});
            else if (accept(Tok::Slash))
                e = mul({e, pow(factor(), integer(-1))});
            else
                return e;
        }
    }

    Expr factor() {
        if (accept(Tok::Minus)) return neg(factor());
        return power();
    }

    Expr power() {
        Expr base = primary();
        if (accept(Tok::Caret)) return pow(base, factor());
        return base;
    }

    Expr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number: {
                next();
                return number(parse_number(t.text));
            }
            case Tok::Ident: {
                next();
                if (t.text == "ComplexInfinity") return complex_infinity();
                if (t.text == "Indeterminate") return indeterminate();
                if (is_function_name(t.text)) {
                    expect(Tok::LParen, "'(' after function name '" + t.text + "'");
                    Expr arg = expression();
                    expect(Tok::RParen, "')'");
                    if (t.text == "exp") return exp_(arg);
                    if (t.text == "ln") return ln_(arg);
                    if (t.text == "sin") return sin_(arg);
                    if (t.text == "cos") return cos_(arg);
                    if (t.text == "arccot") return arccot_(arg);
                    return sqrt_(arg);
                }
                return sym(t.text);
            }
            case Tok::LParen: {
                next();
                Expr e = expression();
                expect(Tok::RParen, "')'");
                return e;
            }
            default:
                throw ParseError("expected a number, name or '(', found '" +
                                     (t.kind == Tok::End ? "end of input" : t.text) + "'",
                                 t.span);
        }
    }

    // decimal literals become exact rationals: 0.5 -> 1/2
    static Rational parse_number(const std::string& s) {
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(BigInt(s));
        std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
        BigInt num = ip.empty() ? BigInt(0) : BigInt(ip);
        BigInt den(1);
        for (char c : fp) {
            num = num * 10 + (c - '0');
            den *= 10;
        }
        return Rational(num, den);
    }
};

}  // namespace detail

/// Parse the expression grammar into a simplified (canonical) Expr.
inline Expr parse(const std::string& text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Printers
// ---------------------------------------------------------------------------

enum class RenderFormat { Plain, Latex, Json };

namespace detail {

// precedence levels: 0 add, 1 mul, 2 unary minus, 3 pow, 4 atom
inline void render_plain(const Expr& e, std::ostream& os, int parent);
inline int precedence(const Expr& e);

inline void render_paren(const Expr& e, std::ostream& os, int prec, int parent) {
    if (prec < parent) {
        os << '(';
        render_plain(e, os, 0);
        os << ')';
    } else {
        render_plain(e, os, parent);
    }
}

inline std::string function_name(Kind k) {
    switch (k) {
        case Kind::Exp: return "exp";
        case Kind::Ln: return "ln";
        case Kind::Sin: return "sin";
        case Kind::Cos: return "cos";
        case Kind::ArcCot: return "arccot";
        case Kind::Sqrt: return "sqrt";
        default: return "?";
    }
}

inline void render_plain(const Expr& e, std::ostream& os, int parent) {
    switch (e.kind()) {
        case Kind::Number: {
            const Rational& v = e.value();
            bool negative = v < 0;
            bool frac = boost::multiprecision::denominator(v) != 1;
            int prec = negative ? 2 : (frac ? 1 : 4);
            if (prec < parent) {
                os << '(' << v << ')';
            } else {
                os << v;
            }
            return;
        }
        case Kind::Symbol: os << e.name(); return;
        case Kind::ComplexInfinity: os << "ComplexInfinity"; return;
        case Kind::Indeterminate: os << "Indeterminate"; return;
        case Kind::Add: {
            bool wrap = parent > 0;
            if (wrap) os << '(';
            for (std::size_t i = 0; i < e.arity(); ++i) {
                const Expr& t = e.arg(i);
                if (i == 0) {
                    render_plain(t, os, 1);
                } else if (negative_leading(t)) {
                    os << " - ";
                    render_plain(neg(t), os, 1);
                } else {
                    os << " + ";
                    render_plain(t, os, 1);
                }
            }
            if (wrap) os << ')';
            return;
        }
        case Kind::Mul: {
            std::size_t start = 0;
            bool minus = false;
            Rational coeff(1);
            if (is_number(e.arg(0))) {
                coeff = e.arg(0).value();
                start = 1;
                if (coeff < 0) {
                    minus = true;
                    coeff = -coeff;
                }
            }
            int prec = minus ? 2 : 1;
            bool wrap = parent > prec;
            if (wrap) os << '(';
            if (minus) os << '-';
            bool first = true;
            if (coeff != 1 || start == 0 || e.arity() == 1) {
                if (start == 1) {
                    render_plain(number(coeff), os, 2);
                    first = false;
                }
            }
            for (std::size_t i = start; i < e.arity(); ++i) {
                if (!first) os << '*';
                render_paren(e.arg(i), os, precedence(e.arg(i)), 2);
                first = false;
            }
            if (wrap) os << ')';
            return;
        }
        case Kind::Pow: {
            bool wrap = parent > 3;
            if (wrap) os << '(';
            render_paren(e.arg(0), os, precedence(e.arg(0)), 4);
            os << '^';
            const Expr& x = e.arg(1);
            if (is_number(x) && x.value() >= 0 &&
                boost::multiprecision::denominator(x.value()) == 1) {
                os << x.value();
            } else {
                os << '(';
                render_plain(x, os, 0);
                os << ')';
            }
            if (wrap) os << ')';
            return;
        }
        default: {
            os << function_name(e.kind()) << '(';
            render_plain(e.arg(0), os, 0);
            os << ')';
            return;
        }
    }
}

inline int precedence(const Expr& e) {
    switch (e.kind()) {
        case Kind::Add: return 0;
        case Kind::Mul:
            return (is_number(e.arg(0)) && e.arg(0).value() < 0) ? 2 : 1;
        case Kind::Number:
            if (e.value() < 0) return 2;
            return boost::multiprecision::denominator(e.value()) != 1 ? 1 : 4;
        case Kind::Pow: return 3;
        default: return 4;
    }
}

inline void render_latex(const Expr& e, std::ostream& os, int parent) {
    switch (e.kind()) {
        case Kind::Number: {
            const Rational& v = e.value();
            if (boost::multiprecision::denominator(v) == 1) {
                os << v;
            } else {
                if (v < 0) os << '-';
                os << "\\frac{" << boost::multiprecision::abs(boost::multiprecision::numerator(v))
                   << "}{" << boost::multiprecision::denominator(v) << '}';
            }
            return;
        }
        case Kind::Symbol: {
            static const std::vector<std::string> greek = {
                "alpha", "beta", "gamma", "delta", "epsilon", "lambda",
                "sigma", "omega", "tau",  "pi",    "mu",      "nu"};
            for (const auto& g : greek)
                if (e.name() == g) { os << '\\' << g << ' '; return; }
            os << e.name();
            return;
        }
        case Kind::ComplexInfinity: os << "\\tilde\\infty"; return;
        case Kind::Indeterminate: os << "\\mathrm{Indeterminate}"; return;
        case Kind::Add:
            if (parent > 0) os << "\\left(";
            for (std::size_t i = 0; i < e.arity(); ++i) {
                const Expr& t = e.arg(i);
                if (i > 0 && negative_leading(t)) {
                    os << " - ";
                    render_latex(neg(t), os, 1);
                } else {
                    if (i > 0) os << " + ";
                    render_latex(t, os, 1);
                }
            }
            if (parent > 0) os << "\\right)";
            return;
        case Kind::Mul: {
            bool wrap = parent > 1;
            if (wrap) os << "\\left(";
            for (std::size_t i = 0; i < e.arity(); ++i) {
                if (i) os << " \\, ";
                render_latex(e.arg(i), os, 2);
            }
            if (wrap) os << "\\right)";
            return;
        }
        case Kind::Pow:
            if (precedence(e.arg(0)) < 4) {
                os << "\\left(";
                render_latex(e.arg(0), os, 0);
                os << "\\right)";
            } else {
                render_latex(e.arg(0), os, 4);
            }
            os << "^{";
            render_latex(e.arg(1), os, 0);
            os << '}';
            return;
        case Kind::Exp:
            os << "e^{";
            render_latex(e.arg(0), os, 0);
            os << '}';
            return;
        case Kind::Sqrt:
            os << "\\sqrt{";
            render_latex(e.arg(0), os, 0);
            os << '}';
            return;
        case Kind::Ln:
        case Kind::Sin:
        case Kind::Cos:
            os << '\\' << function_name(e.kind()) << "\\left(";
            render_latex(e.arg(0), os, 0);
            os << "\\right)";
            return;
        case Kind::ArcCot:
            os << "\\operatorname{arccot}\\left(";
            render_latex(e.arg(0), os, 0);
            os << "\\right)";
            return;
    }
}

inline nlohmann::json big_to_json(const BigInt& v) {
    if (v >= std::numeric_limits<std::int64_t>::min() &&
        v <= std::numeric_limits<std::int64_t>::max())
        return v.convert_to<std::int64_t>();
    return v.str();
}

}  // namespace detail

/// Canonical JSON AST serialization (schema fixed: op/args/name/num/den).
inline nlohmann::json to_json(const Expr& e) {
    using nlohmann::json;
    switch (e.kind()) {
        case Kind::Number: {
            const Rational& v = e.value();
            if (boost::multiprecision::denominator(v) == 1)
                return json{{"op", "Int"},
                            {"num", detail::big_to_json(boost::multiprecision::numerator(v))}};
            return json{{"op", "Rat"},
                        {"num", detail::big_to_json(boost::multiprecision::numerator(v))},
                        {"den", detail::big_to_json(boost::multiprecision::denominator(v))}};
        }
        case Kind::Symbol: return json{{"op", "Sym"}, {"name", e.name()}};
        case Kind::ComplexInfinity: return json{{"op", "ComplexInfinity"}};
        case Kind::Indeterminate: return json{{"op", "Indeterminate"}};
        default: {
            static const char* names[] = {"",    "",   "Add", "Mul",    "Pow",  "Exp",
                                          "Ln",  "Sin", "Cos", "ArcCot", "Sqrt", "",
                                          ""};
            json args = json::array();
            for (const Expr& a : e.args()) args.push_back(to_json(a));
            return json{{"op", names[static_cast<int>(e.kind())]}, {"args", std::move(args)}};
        }
    }
}

inline std::string render(const Expr& e, RenderFormat fmt = RenderFormat::Plain) {
    std::ostringstream os;
    switch (fmt) {
        case RenderFormat::Plain: detail::render_plain(e, os, 0); break;
        case RenderFormat::Latex: detail::render_latex(e, os, 0); break;
        case RenderFormat::Json: os << to_json(e).dump(); break;
    }
    return os.str();
}

}  // namespace kahania

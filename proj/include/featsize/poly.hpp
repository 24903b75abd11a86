#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "featsize/common.hpp"

namespace featsize {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One monomial term. The exponent vector is dense (size = nvars of the
// owning polynomial).
struct Term {
    Complex coeff;
    std::vector<int> expo;

    int degree() const {
        int d = 0;
        for (int e : expo) d += e;
        return d;
    }
};

// graded-lex, higher first: larger total degree wins, ties broken by
// lexicographically larger exponent vector
inline bool term_order(const Term& a, const Term& b) {
    int da = a.degree(), db = b.degree();
    if (da != db) return da > db;
    return a.expo > b.expo;
}

class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    static Polynomial constant(int nvars, Complex c) {
        Polynomial p(nvars);
        if (c != Complex(0.0)) p.terms_.push_back({c, std::vector<int>(nvars, 0)});
        return p;
    }

    static Polynomial variable(int nvars, int var, Complex scale = 1.0) {
        Polynomial p(nvars);
        std::vector<int> e(nvars, 0);
        e[var] = 1;
        if (scale != Complex(0.0)) p.terms_.push_back({scale, std::move(e)});
        return p;
    }

    int nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& t : terms_) d = std::max(d, t.degree());
        return d;
    }

    void add_term(Complex c, std::vector<int> expo) {
        terms_.push_back({c, std::move(expo)});
        dirty_ = true;
    }

    // sort graded-lex, merge duplicate exponent vectors, drop exact zeros
    void normalize() {
        if (!dirty_) return;
        std::sort(terms_.begin(), terms_.end(), term_order);
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (auto& t : terms_) {
            if (!out.empty() && out.back().expo == t.expo)
                out.back().coeff += t.coeff;
            else
                out.push_back(std::move(t));
        }
        std::erase_if(out, [](const Term& t) { return t.coeff == Complex(0.0); });
        terms_ = std::move(out);
        dirty_ = false;
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (const auto& t : o.terms_) terms_.push_back(t);
        dirty_ = true;
        normalize();
        return *this;
    }

    Polynomial& operator-=(const Polynomial& o) {
        for (const auto& t : o.terms_) terms_.push_back({-t.coeff, t.expo});
        dirty_ = true;
        normalize();
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r(a.nvars_);
        r.terms_.reserve(a.terms_.size() * b.terms_.size());
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_) {
                std::vector<int> e(a.nvars_);
                for (int i = 0; i < a.nvars_; ++i) e[i] = ta.expo[i] + tb.expo[i];
                r.terms_.push_back({ta.coeff * tb.coeff, std::move(e)});
            }
        r.dirty_ = true;
        r.normalize();
        return r;
    }

    friend Polynomial operator*(Complex c, Polynomial p) {
        for (auto& t : p.terms_) t.coeff *= c;
        p.normalize();
        return p;
    }

    Polynomial operator-() const { return Complex(-1.0) * (*this); }

    Polynomial derivative(int var) const {
        Polynomial r(nvars_);
        for (const auto& t : terms_) {
            if (t.expo[var] == 0) continue;
            std::vector<int> e = t.expo;
            Complex c = t.coeff * static_cast<double>(e[var]);
            --e[var];
            r.terms_.push_back({c, std::move(e)});
        }
        r.dirty_ = true;
        r.normalize();
        return r;
    }

    Complex eval(const Complex* x) const {
        Complex s = 0.0;
        for (const auto& t : terms_) {
            Complex m = t.coeff;
            for (int v = 0; v < nvars_; ++v) {
                int e = t.expo[v];
                if (e == 0) continue;
                Complex p = x[v];
                // binary powering keeps evaluation order fixed
                Complex acc = 1.0;
                while (e > 0) {
                    if (e & 1) acc *= p;
                    p *= p;
                    e >>= 1;
                }
                m *= acc;
            }
            s += m;
        }
        return s;
    }

    Complex eval(const ComplexPoint& x) const { return eval(x.data()); }

    // substitute variable `var` by polynomial `repl` (same ring)
    Polynomial substitute(int var, const Polynomial& repl) const {
        int maxe = 0;
        for (const auto& t : terms_) maxe = std::max(maxe, t.expo[var]);
        std::vector<Polynomial> pow(maxe + 1);
        pow[0] = constant(nvars_, 1.0);
        for (int k = 1; k <= maxe; ++k) pow[k] = pow[k - 1] * repl;
        Polynomial r(nvars_);
        for (const auto& t : terms_) {
            Polynomial base(nvars_);
            std::vector<int> e = t.expo;
            e[var] = 0;
            base.terms_.push_back({t.coeff, std::move(e)});
            base.dirty_ = true;
            base.normalize();
            r += base * pow[t.expo[var]];
        }
        return r;
    }

    // re-index into a ring with new_nvars variables; var_map[i] = new index
    Polynomial embedded(int new_nvars, const std::vector<int>& var_map) const {
        Polynomial r(new_nvars);
        for (const auto& t : terms_) {
            std::vector<int> e(new_nvars, 0);
            for (int i = 0; i < nvars_; ++i) e[var_map[i]] = t.expo[i];
            r.terms_.push_back({t.coeff, std::move(e)});
        }
        r.dirty_ = true;
        r.normalize();
        return r;
    }

    bool operator==(const Polynomial& o) const {
        return nvars_ == o.nvars_ && terms_ == o.terms_;
    }

private:
    int nvars_ = 0;
    std::vector<Term> terms_;
    bool dirty_ = false;
};

inline bool operator==(const Term& a, const Term& b) {
    return a.coeff == b.coeff && a.expo == b.expo;
}

struct PolySystem {
    std::vector<Polynomial> polys;
    int nvars = 0;
    std::vector<std::string> var_names;  // defaults to x1..xn
    std::optional<int> codim_hint;

    int neqs() const { return static_cast<int>(polys.size()); }

    void default_names() {
        var_names.resize(nvars);
        for (int i = 0; i < nvars; ++i) var_names[i] = "x" + std::to_string(i + 1);
    }
};

inline ComplexPoint evaluate(const PolySystem& sys, const ComplexPoint& p) {
    ComplexPoint out(sys.polys.size());
    for (std::size_t i = 0; i < sys.polys.size(); ++i) out[i] = sys.polys[i].eval(p);
    return out;
}

// row i = gradient of polys[i]
inline std::vector<ComplexPoint> jacobian(const PolySystem& sys, const ComplexPoint& p) {
    std::vector<ComplexPoint> J(sys.polys.size(), ComplexPoint(sys.nvars));
    for (std::size_t i = 0; i < sys.polys.size(); ++i)
        for (int v = 0; v < sys.nvars; ++v)
            J[i][v] = sys.polys[i].derivative(v).eval(p);
    return J;
}

inline std::vector<int> total_degrees(const PolySystem& sys) {
    std::vector<int> d;
    d.reserve(sys.polys.size());
    for (const auto& p : sys.polys) d.push_back(p.degree());
    return d;
}

inline PolySystem embed(const PolySystem& sys, int new_nvars, const std::vector<int>& var_map) {
    PolySystem out;
    out.nvars = new_nvars;
    out.default_names();
    out.codim_hint = sys.codim_hint;
    for (const auto& p : sys.polys) out.polys.push_back(p.embedded(new_nvars, var_map));
    return out;
}

// ---------------------------------------------------------------------------
// text format
//
//   poly   := term (('+'|'-') term)*
//   term   := coeff ('*' factor)* | factor ('*' factor)*
//   factor := var ('^' int)?
//   var    := 'x' k           (k >= 1)
//   coeff  := decimal | int | int '/' int
//
// one polynomial per line, '#' starts a comment, parenthesized subexpressions
// are accepted on input
// ---------------------------------------------------------------------------

namespace detail {

class PolyParser {
public:
    PolyParser(const std::string& s, int nvars) : s_(s), nvars_(nvars) {}

    Polynomial parse() {
        Polynomial p = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return p;
    }

    // scan variable indices to infer nvars before the real parse
    static int max_var_index(const std::string& s) {
        int mx = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == 'x' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
                int v = 0;
                std::size_t j = i + 1;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
                    v = v * 10 + (s[j++] - '0');
                mx = std::max(mx, v);
            }
        }
        return mx;
    }

private:
    Polynomial expr() {
        skip_ws();
        bool neg = false;
        if (peek() == '+' || peek() == '-') neg = (get() == '-');
        Polynomial p = product();
        if (neg) p = -p;
        for (;;) {
            skip_ws();
            char c = peek();
            if (c == '+' || c == '-') {
                get();
                Polynomial q = product();
                if (c == '-') p -= q; else p += q;
            } else {
                return p;
            }
        }
    }

    Polynomial product() {
        Polynomial p = power();
        for (;;) {
            skip_ws();
            if (peek() == '*') {
                get();
                p = p * power();
            } else if (peek() == '/') {
                get();
                skip_ws();
                double d = number();
                if (d == 0.0) fail("division by zero");
                p = Complex(1.0 / d) * p;
            } else {
                return p;
            }
        }
    }

    Polynomial power() {
        Polynomial p = atom();
        skip_ws();
        if (peek() == '^') {
            get();
            skip_ws();
            int e = integer();
            if (e < 0) fail("negative exponent");
            Polynomial r = Polynomial::constant(nvars_, 1.0);
            for (int i = 0; i < e; ++i) r = r * p;
            return r;
        }
        return p;
    }

    Polynomial atom() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            get();
            Polynomial p = expr();
            skip_ws();
            if (get() != ')') fail("expected ')'");
            return p;
        }
        if (c == 'x') {
            get();
            if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected variable index");
            int v = integer();
            if (v < 1 || v > nvars_) fail("variable index out of range");
            return Polynomial::variable(nvars_, v - 1);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return Polynomial::constant(nvars_, number());
        }
        fail("unexpected character");
        return {};
    }

    double number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
            ++pos_;
        // exponent part of a decimal literal
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;  // 'e' did not begin an exponent
            }
        }
        if (pos_ == start) fail("expected number");
        return std::stod(s_.substr(start, pos_ - start));
    }

    int integer() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) fail("expected integer");
        return std::stoi(s_.substr(start, pos_ - start));
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
    }
    char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
    char get() { return pos_ < s_.size() ? s_[pos_++] : '\0'; }
    [[noreturn]] void fail(const std::string& m) const {
        throw ParseError("polynomial parse error at position " + std::to_string(pos_) + ": " + m);
    }

    const std::string& s_;
    int nvars_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Polynomial parse_polynomial(const std::string& text, int nvars) {
    return detail::PolyParser(text, nvars).parse();
}

// Parses one system from text: one polynomial per line, '#' comments, blank
// lines skipped. nvars is the max variable index seen (or the override).
inline PolySystem parse_system(const std::string& text, int nvars_override = 0) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        bool blank = true;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
        if (!blank) lines.push_back(line);
    }
    int nv = nvars_override;
    if (nv == 0)
        for (const auto& l : lines)
            nv = std::max(nv, detail::PolyParser::max_var_index(l));
    if (nv == 0) throw ParseError("no variables found in system text");
    PolySystem sys;
    sys.nvars = nv;
    sys.default_names();
    for (const auto& l : lines) sys.polys.push_back(parse_polynomial(l, nv));
    return sys;
}

namespace detail {

inline std::string format_coeff_mag(double v) {
    return format_double(v);
}

}  // namespace detail

// canonical text form: graded-lex order, explicit '*', '^' powers;
// real coefficients only (complex-coefficient polynomials print the
// imaginary part in a non-grammar (a+bi) form for diagnostics)
inline std::string to_text(const Polynomial& p, const std::vector<std::string>& names) {
    if (p.is_zero()) return "0";
    Polynomial q = p;
    q.normalize();
    std::string out;
    bool first = true;
    for (const auto& t : q.terms()) {
        Complex c = t.coeff;
        bool negative = (c.imag() == 0.0 && c.real() < 0);
        if (first) {
            if (negative) out += "-";
            first = false;
        } else {
            out += negative ? " - " : " + ";
        }
        if (negative) c = -c;

        std::string mono;
        for (std::size_t v = 0; v < t.expo.size(); ++v) {
            if (t.expo[v] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += names[v];
            if (t.expo[v] > 1) mono += "^" + std::to_string(t.expo[v]);
        }

        std::string cs;
        if (c.imag() == 0.0) {
            if (c.real() != 1.0 || mono.empty()) cs = detail::format_coeff_mag(c.real());
        } else {
            cs = "(" + format_double(c.real()) + "+" + format_double(c.imag()) + "i)";
        }

        if (cs.empty()) out += mono;
        else if (mono.empty()) out += cs;
        else out += cs + "*" + mono;
    }
    return out;
}

inline std::string to_text(const PolySystem& sys) {
    std::string out;
    for (const auto& p : sys.polys) {
        out += to_text(p, sys.var_names);
        out += "\n";
    }
    return out;
}

}  // namespace featsize

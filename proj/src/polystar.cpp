#include "psq/polystar.hpp"

#include "psq/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <utility>

namespace psq {

namespace {

void add_term(TermMap& terms, const Monomial& key, cplx c) {
    if (c == cplx(0.0)) return;
    auto [it, fresh] = terms.emplace(key, c);
    if (!fresh) {
        it->second += c;
        if (it->second == cplx(0.0)) terms.erase(it);
    }
}

// n (n-1) ... (n-r+1); zero when r > n.
double falling(int n, int r) {
    if (r > n) return 0.0;
    double v = 1.0;
    for (int t = 0; t < r; ++t) v *= n - t;
    return v;
}

double binomial(int n, int r) {
    if (r < 0 || r > n) return 0.0;
    double v = 1.0;
    for (int t = 1; t <= r; ++t) v = v * (n - r + t) / t;
    return v;
}

// i^e computed exactly.
cplx i_power(int e) {
    switch (((e % 4) + 4) % 4) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
    }
}

std::string format_coefficient(cplx c) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", c.real(), c.imag());
    return buf;
}

std::string render(const TermMap& terms, const char* xs, const char* ps) {
    if (terms.empty()) return "0";
    std::string out;
    for (const auto& [key, c] : terms) {
        if (!out.empty()) out += " + ";
        out += format_coefficient(c);
        auto factor = [&](const char* name, int e) {
            if (e == 0) return;
            out += '*';
            out += name;
            if (e != 1) out += '^' + std::to_string(e);
        };
        factor("hbar", key.k);
        factor(xs, key.n);
        factor(ps, key.m);
    }
    return out;
}

double max_diff(const TermMap& a, const TermMap& b) {
    double m = 0.0;
    for (const auto& [key, c] : a) {
        auto it = b.find(key);
        m = std::max(m, std::abs(c - (it == b.end() ? cplx(0.0) : it->second)));
    }
    for (const auto& [key, c] : b)
        if (!a.count(key)) m = std::max(m, std::abs(c));
    return m;
}

cplx lookup(const TermMap& terms, int n, int m, int k) {
    auto it = terms.find(Monomial{n, m, k});
    return it == terms.end() ? cplx(0.0) : it->second;
}

} // namespace

// ---------------------------------------------------------------- PolyH

PolyH PolyH::monomial(int n, int m, int k, cplx c) {
    PolyH f;
    f.add(n, m, k, c);
    return f;
}

void PolyH::add(int n, int m, int k, cplx c) {
    if (n < 0 || m < 0) throw InvalidArgument("negative polynomial degree");
    add_term(terms_, Monomial{n, m, k}, c);
}

cplx PolyH::coefficient(int n, int m, int k) const { return lookup(terms_, n, m, k); }

int PolyH::degree() const {
    int d = 0;
    for (const auto& [key, c] : terms_) d = std::max(d, key.n + key.m);
    return d;
}

int PolyH::max_hbar() const {
    int d = 0;
    for (const auto& [key, c] : terms_) d = std::max(d, key.k);
    return d;
}

PolyH PolyH::hbar_slice(int k) const {
    PolyH out;
    for (const auto& [key, c] : terms_)
        if (key.k == k) out.add(key.n, key.m, key.k, c);
    return out;
}

PolyH PolyH::conj() const {
    PolyH out;
    for (const auto& [key, c] : terms_) out.add(key.n, key.m, key.k, std::conj(c));
    return out;
}

PolyH& PolyH::operator+=(const PolyH& o) {
    for (const auto& [key, c] : o.terms_) add_term(terms_, key, c);
    return *this;
}

PolyH& PolyH::operator-=(const PolyH& o) {
    for (const auto& [key, c] : o.terms_) add_term(terms_, key, -c);
    return *this;
}

PolyH& PolyH::operator*=(cplx s) {
    if (s == cplx(0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [key, c] : terms_) c *= s;
    return *this;
}

cplx PolyH::evaluate(double x, double p, double hbar) const {
    cplx s = 0.0;
    for (const auto& [key, c] : terms_)
        s += c * std::pow(hbar, key.k) * std::pow(x, key.n) * std::pow(p, key.m);
    return s;
}

std::string PolyH::str() const { return render(terms_, "x", "p"); }

PolyH operator+(PolyH a, const PolyH& b) { return a += b; }
PolyH operator-(PolyH a, const PolyH& b) { return a -= b; }
PolyH operator-(PolyH a) { return a *= -1.0; }
PolyH operator*(cplx s, PolyH a) { return a *= s; }

PolyH operator*(const PolyH& a, const PolyH& b) {
    PolyH out;
    for (const auto& [ka, ca] : a.terms())
        for (const auto& [kb, cb] : b.terms()) out.add(ka.n + kb.n, ka.m + kb.m, ka.k + kb.k, ca * cb);
    return out;
}

PolyH derivative(const PolyH& f, int rx, int sp) {
    PolyH out;
    for (const auto& [key, c] : f.terms()) {
        double d = falling(key.n, rx) * falling(key.m, sp);
        if (d != 0.0) out.add(key.n - rx, key.m - sp, key.k, c * d);
    }
    return out;
}

double max_coefficient_diff(const PolyH& a, const PolyH& b) { return max_diff(a.terms(), b.terms()); }

// f *_sigma g = sum_{r,s} (i hbar)^{r+s} sigma^r (-sigma_bar)^s / (r! s!)
//               (d_x^r d_p^s f)(d_x^s d_p^r g).
// On monomials the factorials fold into integers:
//   C(a,r) (d)_r C(b,s) (c)_s  for f = x^a p^b, g = x^c p^d.
PolyH pstar(const PolyH& f, const PolyH& g, double sigma) {
    const double sigma_bar = 1.0 - sigma;
    PolyH out;
    for (const auto& [kf, cf] : f.terms())
        for (const auto& [kg, cg] : g.terms()) {
            const int a = kf.n, b = kf.m, c = kg.n, d = kg.m;
            for (int r = 0; r <= std::min(a, d); ++r)
                for (int s = 0; s <= std::min(b, c); ++s) {
                    double count = binomial(a, r) * falling(d, r) * binomial(b, s) * falling(c, s);
                    cplx coef = cf * cg * i_power(r + s) * (count * std::pow(sigma, r) * std::pow(-sigma_bar, s));
                    out.add(a - r + c - s, b - s + d - r, kf.k + kg.k + r + s, coef);
                }
        }
    return out;
}

PolyH ppoisson(const PolyH& f, const PolyH& g) {
    return derivative(f, 1, 0) * derivative(g, 0, 1) - derivative(f, 0, 1) * derivative(g, 1, 0);
}

// ----------------------------------------------------------- OperatorNF

OperatorNF OperatorNF::monomial(int n, int m, int k, cplx c) {
    OperatorNF a;
    a.add(n, m, k, c);
    return a;
}

void OperatorNF::add(int n, int m, int k, cplx c) {
    if (n < 0 || m < 0) throw InvalidArgument("negative operator degree");
    add_term(terms_, Monomial{n, m, k}, c);
}

cplx OperatorNF::coefficient(int n, int m, int k) const { return lookup(terms_, n, m, k); }

OperatorNF& OperatorNF::operator+=(const OperatorNF& o) {
    for (const auto& [key, c] : o.terms_) add_term(terms_, key, c);
    return *this;
}

OperatorNF& OperatorNF::operator*=(cplx s) {
    if (s == cplx(0.0)) {
        terms_.clear();
        return *this;
    }
    for (auto& [key, c] : terms_) c *= s;
    return *this;
}

std::string OperatorNF::str() const { return render(terms_, "q", "p"); }

OperatorNF operator+(OperatorNF a, const OperatorNF& b) { return a += b; }
OperatorNF operator-(OperatorNF a, const OperatorNF& b) { return a += (-1.0) * b; }
OperatorNF operator*(cplx s, OperatorNF a) { return a *= s; }

double max_coefficient_diff(const OperatorNF& a, const OperatorNF& b) { return max_diff(a.terms(), b.terms()); }

namespace {

// p^b q^c in standard order, by repeated use of p q^c = q^c p - i hbar c q^{c-1}.
const OperatorNF& reorder(int b, int c) {
    thread_local std::map<std::pair<int, int>, OperatorNF> memo;
    auto key = std::make_pair(b, c);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    OperatorNF out;
    if (b == 0 || c == 0) {
        out = OperatorNF::monomial(c, b);
    } else {
        // p^{b-1} (q^c p - i hbar c q^{c-1})
        for (const auto& [key1, c1] : reorder(b - 1, c).terms()) out.add(key1.n, key1.m + 1, key1.k, c1);
        for (const auto& [key2, c2] : reorder(b - 1, c - 1).terms())
            out.add(key2.n, key2.m, key2.k + 1, c2 * cplx(0.0, -static_cast<double>(c)));
    }
    return memo.emplace(key, std::move(out)).first->second;
}

} // namespace

OperatorNF nf_multiply(const OperatorNF& a, const OperatorNF& b) {
    OperatorNF out;
    for (const auto& [ka, ca] : a.terms())
        for (const auto& [kb, cb] : b.terms())
            for (const auto& [kr, cr] : reorder(ka.m, kb.n).terms())
                out.add(ka.n + kr.n, kr.m + kb.m, ka.k + kb.k + kr.k, ca * cb * cr);
    return out;
}

OperatorNF nf_adjoint(const OperatorNF& a) {
    OperatorNF out;
    for (const auto& [key, c] : a.terms())
        for (const auto& [kr, cr] : reorder(key.m, key.n).terms())
            out.add(kr.n, kr.m, key.k + kr.k, std::conj(c) * cr);
    return out;
}

// ----------------------------------------------------------- DiffOpWord

DiffOpWord::DiffOpWord(std::vector<Generator> gens) {
    for (const auto& g : gens) {
        if (g.a < 0 || g.b < 0 || g.r < 0 || g.s < 0) throw InvalidArgument("negative exponent in word generator");
        if (g.c == cplx(0.0)) continue;
        if (g.a + g.b >= g.r + g.s)
            throw InvalidArgument("word generator does not lower the polynomial degree; exponential would not terminate");
        gens_.push_back(g);
    }
}

DiffOpWord DiffOpWord::gaussian(double alpha, double beta) {
    return DiffOpWord({{0.5 * alpha, 1, 0, 0, 2, 0}, {0.5 * beta, 1, 0, 0, 0, 2}});
}

DiffOpWord DiffOpWord::gauge(double delta) { return DiffOpWord({{cplx(0.0, delta), 1, 0, 0, 1, 1}}); }

DiffOpWord DiffOpWord::three_parameter(double a, double b, double c) {
    return DiffOpWord({{cplx(0.0, -a), 1, 0, 0, 1, 1}, {cplx(0.0, b), 1, 1, 0, 0, 2}, {-c, 2, 0, 0, 0, 3}});
}

DiffOpWord DiffOpWord::negated() const {
    DiffOpWord w = *this;
    for (auto& g : w.gens_) g.c = -g.c;
    return w;
}

DiffOpWord DiffOpWord::conjugated() const {
    DiffOpWord w = *this;
    for (auto& g : w.gens_) g.c = std::conj(g.c);
    return w;
}

PolyH DiffOpWord::apply_generator_sum(const PolyH& f) const {
    PolyH out;
    for (const auto& g : gens_) {
        PolyH d = derivative(f, g.r, g.s);
        for (const auto& [key, c] : d.terms()) out.add(key.n + g.a, key.m + g.b, key.k + g.k, g.c * c);
    }
    return out;
}

PolyH apply_word(const DiffOpWord& S, const PolyH& f, bool inverse) {
    DiffOpWord w = inverse ? S.negated() : S;
    PolyH sum = f, term = f;
    for (int n = 1; !term.is_zero(); ++n) {
        term = w.apply_generator_sum(term);
        term *= 1.0 / n;
        sum += term;
    }
    return sum;
}

// ------------------------------------------------------------ orderings

// The sigma-ordered kernel e^{i xi q/hbar} e^{-i eta p/hbar} e^{-i sigma xi eta/hbar}
// differs from the standard one by e^{-i sigma xi eta/hbar}. Acting on the
// symbol e^{i(xi x - eta p)/hbar}, xi eta equals hbar^2 d_x d_p, so
// A_sigma = standard quantization of exp(-i hbar sigma d_x d_p) A,
// and standard quantization sends x^n p^m to q^n p^m.
OperatorNF sigma_order(const PolyH& f, double sigma) {
    PolyH corrected = apply_word(DiffOpWord::gauge(-sigma), f);
    OperatorNF out;
    for (const auto& [key, c] : corrected.terms()) out.add(key.n, key.m, key.k, c);
    return out;
}

OperatorNF sigma_S_order(const PolyH& f, double sigma, const DiffOpWord& S) {
    return sigma_order(apply_word(S, f, true), sigma);
}

PolyH standard_symbol(const OperatorNF& a) {
    PolyH out;
    for (const auto& [key, c] : a.terms()) out.add(key.n, key.m, key.k, c);
    return out;
}

// --------------------------------------------------------------- parser

namespace {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    PolyH parse() {
        PolyH f = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& what) {
        throw InvalidArgument("polynomial expression: " + what + " at position " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    PolyH expr() {
        PolyH f = term();
        for (;;) {
            if (accept('+')) f += term();
            else if (accept('-')) f -= term();
            else return f;
        }
    }

    PolyH term() {
        PolyH f = unary();
        for (;;) {
            if (accept('*')) {
                f = f * unary();
            } else if (accept('/')) {
                PolyH d = unary();
                if (d.terms().size() != 1 || d.terms().begin()->first != Monomial{0, 0, 0})
                    fail("division by a non-constant");
                f *= 1.0 / d.terms().begin()->second;
            } else {
                return f;
            }
        }
    }

    PolyH power() {
        PolyH base = primary();
        if (!accept('^')) return base;
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (start == pos_) fail("exponent must be a non-negative integer");
        int e = std::stoi(s_.substr(start, pos_ - start));
        PolyH out(1.0);
        for (int t = 0; t < e; ++t) out = out * base;
        return out;
    }

    PolyH unary() {
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    PolyH primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        if (accept('(')) {
            PolyH f = expr();
            if (!accept(')')) fail("missing ')'");
            return f;
        }
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            double v = std::strtod(s_.c_str() + pos_, &end);
            pos_ = static_cast<std::size_t>(end - s_.c_str());
            return PolyH(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string name = s_.substr(start, pos_ - start);
            if (name == "x" || name == "q") return PolyH::x();
            if (name == "p") return PolyH::p();
            if (name == "hbar") return PolyH::hbar();
            if (name == "i") return PolyH(cplx(0.0, 1.0));
            pos_ = start;
            fail("unknown symbol '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

} // namespace

PolyH parse_polynomial(const std::string& text) { return Parser(text).parse(); }

} // namespace psq

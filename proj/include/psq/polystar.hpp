#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

namespace psq {

using cplx = std::complex<double>;

// Exponent triple of a monomial hbar^k * x^n * p^m (or hbar^k q^n p^m for
// operators). k may be negative: truncated star exponentials carry 1/hbar.
// Ordered lexicographically by (k, n, m), which is also the print order.
struct Monomial {
    int n = 0;
    int m = 0;
    int k = 0;
    auto operator<=>(const Monomial& o) const {
        if (auto c = k <=> o.k; c != 0) return c;
        if (auto c = n <=> o.n; c != 0) return c;
        return m <=> o.m;
    }
    bool operator==(const Monomial&) const = default;
};

using TermMap = std::map<Monomial, cplx>;

// Sparse polynomial in (x, p) with hbar as a formal grading variable.
class PolyH {
public:
    PolyH() = default;
    PolyH(cplx c) { add(0, 0, 0, c); }

    static PolyH x() { return monomial(1, 0); }
    static PolyH p() { return monomial(0, 1); }
    static PolyH hbar() { return monomial(0, 0, 1); }
    static PolyH monomial(int n, int m, int k = 0, cplx c = 1.0);

    void add(int n, int m, int k, cplx c);
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    cplx coefficient(int n, int m, int k = 0) const;

    int degree() const;         // max n+m
    int max_hbar() const;
    PolyH hbar_slice(int k) const;   // terms with hbar^k, hbar factor kept
    PolyH conj() const;

    PolyH& operator+=(const PolyH& o);
    PolyH& operator-=(const PolyH& o);
    PolyH& operator*=(cplx s);
    bool operator==(const PolyH& o) const { return terms_ == o.terms_; }

    cplx evaluate(double x, double p, double hbar) const;
    std::string str() const;

private:
    TermMap terms_;
};

PolyH operator+(PolyH a, const PolyH& b);
PolyH operator-(PolyH a, const PolyH& b);
PolyH operator-(PolyH a);
PolyH operator*(cplx s, PolyH a);
inline PolyH operator*(PolyH a, cplx s) { return s * std::move(a); }
// Commutative pointwise product.
PolyH operator*(const PolyH& a, const PolyH& b);

PolyH derivative(const PolyH& f, int rx, int sp);
// Largest coefficient magnitude of a - b.
double max_coefficient_diff(const PolyH& a, const PolyH& b);

// f *_sigma g, exact finite double sum.
PolyH pstar(const PolyH& f, const PolyH& g, double sigma);
PolyH ppoisson(const PolyH& f, const PolyH& g);

// Standard-ordered operator sum c hbar^k q^n p^m (all q left of all p).
class OperatorNF {
public:
    OperatorNF() = default;
    OperatorNF(cplx c) { add(0, 0, 0, c); }
    static OperatorNF q() { return monomial(1, 0); }
    static OperatorNF p() { return monomial(0, 1); }
    static OperatorNF monomial(int n, int m, int k = 0, cplx c = 1.0);

    void add(int n, int m, int k, cplx c);
    const TermMap& terms() const { return terms_; }
    cplx coefficient(int n, int m, int k = 0) const;
    OperatorNF& operator+=(const OperatorNF& o);
    OperatorNF& operator*=(cplx s);
    bool operator==(const OperatorNF& o) const { return terms_ == o.terms_; }
    std::string str() const;

private:
    TermMap terms_;
};

OperatorNF operator+(OperatorNF a, const OperatorNF& b);
OperatorNF operator-(OperatorNF a, const OperatorNF& b);
OperatorNF operator*(cplx s, OperatorNF a);
double max_coefficient_diff(const OperatorNF& a, const OperatorNF& b);

OperatorNF nf_multiply(const OperatorNF& a, const OperatorNF& b);
OperatorNF nf_adjoint(const OperatorNF& a);

// exp of a finite sum of generators c hbar^k x^a p^b d_x^r d_p^s. Each
// generator must lower the polynomial degree (a + b < r + s), so the
// exponential series terminates on every polynomial.
class DiffOpWord {
public:
    struct Generator {
        cplx c;
        int k = 0;
        int a = 0, b = 0;
        int r = 0, s = 0;
    };

    DiffOpWord() = default;
    explicit DiffOpWord(std::vector<Generator> gens);

    static DiffOpWord identity() { return DiffOpWord(); }
    // exp(hbar alpha/2 d_x^2 + hbar beta/2 d_p^2)
    static DiffOpWord gaussian(double alpha, double beta);
    // exp(i hbar delta d_x d_p), carrying *_sigma to *_{sigma+delta}
    static DiffOpWord gauge(double delta);
    // exp(-i hbar a d_x d_p + i hbar b x d_p^2 - hbar^2 c d_p^3)
    static DiffOpWord three_parameter(double a, double b, double c);

    const std::vector<Generator>& generators() const { return gens_; }
    bool is_identity() const { return gens_.empty(); }
    DiffOpWord negated() const;
    // Word of the conjugated automorphism f -> (S f*)*.
    DiffOpWord conjugated() const;
    // Single application of the generator sum (no exponential).
    PolyH apply_generator_sum(const PolyH& f) const;

private:
    std::vector<Generator> gens_;
};

PolyH apply_word(const DiffOpWord& S, const PolyH& f, bool inverse = false);

// sigma-ordered operator of the symbol f, in standard order.
OperatorNF sigma_order(const PolyH& f, double sigma);
// (S^{-1} f) sigma-ordered.
OperatorNF sigma_S_order(const PolyH& f, double sigma, const DiffOpWord& S);
// Symbol of a standard-ordered operator read back as a polynomial (q->x, p->p).
PolyH standard_symbol(const OperatorNF& a);

// Parses expressions such as "0.5*p^2 + 0.5*x^2 - i*hbar*x*p + 1/6*p^3".
// Symbols: x, p, hbar, i; operators + - * / ^ and parentheses. Division and
// exponents must have constant divisors and non-negative integer powers.
PolyH parse_polynomial(const std::string& text);

} // namespace psq

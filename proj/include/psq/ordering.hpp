#pragma once

#include "psq/gridcore.hpp"
#include "psq/polystar.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace psq {

struct IdentitySmoother {};

// exp(hbar alpha/2 d_x^2 + hbar beta/2 d_p^2).
struct GaussianSmoother {
    double alpha = 0.0;
    double beta = 0.0;
};

// S^{-1} = F(-i hbar d_x, i hbar d_p): multiplier F(xi,eta) for S^{-1}, 1/F for S.
struct CohenSmoother {
    std::function<cplx(double, double)> F;
    std::string label = "cohen";
};

using Smoother = std::variant<IdentitySmoother, GaussianSmoother, CohenSmoother, DiffOpWord>;

struct OrderingSpec {
    double sigma = 0.5;
    Smoother smoother = IdentitySmoother{};

    double sigma_bar() const { return 1.0 - sigma; }
    bool has_identity_smoother() const;

    static OrderingSpec moyal() { return {}; }
    static OrderingSpec gaussian(double sigma, double alpha, double beta) {
        return {sigma, GaussianSmoother{alpha, beta}};
    }
};

// Checks sigma is finite and, for Cohen multipliers, F(0,0) = 1 and
// grad F(0,0) = 0 (central differences).
void validate_spec(const OrderingSpec& spec);

// The smoother as an exact symbolic word, if it has one (Cohen does not).
std::optional<DiffOpWord> smoother_word(const OrderingSpec& spec);

// Spec of the conjugated smoother S-bar with sigma replaced by 1 - sigma.
OrderingSpec conjugate_spec(const OrderingSpec& spec);

std::string smoother_kind(const OrderingSpec& spec);

// Observable acting on fields through Bopp shifts: a sum of functions of x
// alone, functions of p alone, and polynomials in (x, p, hbar).
struct ObservableTerm {
    enum class Kind { x_only, p_only, poly };
    Kind kind = Kind::poly;
    std::function<cplx(double)> fn;
    PolyH poly;
};

class ObservableSpec {
public:
    ObservableSpec() = default;
    ObservableSpec(const PolyH& f) { add_poly(f); }

    static ObservableSpec x_only(std::function<cplx(double)> v) {
        ObservableSpec a;
        a.add_x_only(std::move(v));
        return a;
    }
    static ObservableSpec p_only(std::function<cplx(double)> t) {
        ObservableSpec a;
        a.add_p_only(std::move(t));
        return a;
    }

    void add_poly(const PolyH& f);
    void add_x_only(std::function<cplx(double)> v);
    void add_p_only(std::function<cplx(double)> t);

    const std::vector<ObservableTerm>& terms() const { return terms_; }
    // Sum of the polynomial terms; nullopt if any function term is present.
    std::optional<PolyH> as_polynomial() const;

    ObservableSpec& operator+=(const ObservableSpec& o);

private:
    std::vector<ObservableTerm> terms_;
};

inline ObservableSpec operator+(ObservableSpec a, const ObservableSpec& b) { return a += b; }

} // namespace psq

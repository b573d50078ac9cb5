#include "psq/ordering.hpp"

#include "psq/error.hpp"

#include <cmath>

namespace psq {

bool OrderingSpec::has_identity_smoother() const {
    if (std::holds_alternative<IdentitySmoother>(smoother)) return true;
    if (auto* g = std::get_if<GaussianSmoother>(&smoother)) return g->alpha == 0.0 && g->beta == 0.0;
    if (auto* w = std::get_if<DiffOpWord>(&smoother)) return w->is_identity();
    return false;
}

void validate_spec(const OrderingSpec& spec) {
    if (!std::isfinite(spec.sigma)) throw InvalidArgument("sigma must be finite");
    if (auto* g = std::get_if<GaussianSmoother>(&spec.smoother)) {
        if (!std::isfinite(g->alpha) || !std::isfinite(g->beta))
            throw InvalidArgument("smoother parameters must be finite");
    }
    if (auto* c = std::get_if<CohenSmoother>(&spec.smoother)) {
        if (!c->F) throw InvalidArgument("Cohen multiplier is empty");
        const double h = 1e-5;
        cplx f0 = c->F(0.0, 0.0);
        cplx dxi = (c->F(h, 0.0) - c->F(-h, 0.0)) / (2 * h);
        cplx deta = (c->F(0.0, h) - c->F(0.0, -h)) / (2 * h);
        if (std::abs(f0 - 1.0) > 1e-12) throw InvalidArgument("Cohen multiplier must satisfy F(0,0) = 1");
        if (std::abs(dxi) > 1e-6 || std::abs(deta) > 1e-6)
            throw InvalidArgument("Cohen multiplier must have vanishing gradient at the origin");
    }
}

std::optional<DiffOpWord> smoother_word(const OrderingSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::optional<DiffOpWord> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IdentitySmoother>) return DiffOpWord::identity();
            else if constexpr (std::is_same_v<T, GaussianSmoother>) return DiffOpWord::gaussian(s.alpha, s.beta);
            else if constexpr (std::is_same_v<T, DiffOpWord>) return s;
            else return std::nullopt;
        },
        spec.smoother);
}

OrderingSpec conjugate_spec(const OrderingSpec& spec) {
    OrderingSpec out = spec;
    out.sigma = spec.sigma_bar();
    if (auto* c = std::get_if<CohenSmoother>(&out.smoother)) {
        // (S f*)* has multiplier conj(F(-xi,-eta)).
        auto F = c->F;
        c->F = [F](double xi, double eta) { return std::conj(F(-xi, -eta)); };
        c->label += "-conjugate";
    } else if (auto* w = std::get_if<DiffOpWord>(&out.smoother)) {
        *w = w->conjugated();
    }
    return out;
}

std::string smoother_kind(const OrderingSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, IdentitySmoother>) return "identity";
            else if constexpr (std::is_same_v<T, GaussianSmoother>) return "gaussian";
            else if constexpr (std::is_same_v<T, CohenSmoother>) return "cohen";
            else return "word";
        },
        spec.smoother);
}

void ObservableSpec::add_poly(const PolyH& f) {
    if (f.is_zero()) return;
    terms_.push_back({ObservableTerm::Kind::poly, {}, f});
}

void ObservableSpec::add_x_only(std::function<cplx(double)> v) {
    terms_.push_back({ObservableTerm::Kind::x_only, std::move(v), {}});
}

void ObservableSpec::add_p_only(std::function<cplx(double)> t) {
    terms_.push_back({ObservableTerm::Kind::p_only, std::move(t), {}});
}

std::optional<PolyH> ObservableSpec::as_polynomial() const {
    PolyH sum;
    for (const auto& t : terms_) {
        if (t.kind != ObservableTerm::Kind::poly) return std::nullopt;
        sum += t.poly;
    }
    return sum;
}

ObservableSpec& ObservableSpec::operator+=(const ObservableSpec& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
}

} // namespace psq

#include "psq/spectra.hpp"

#include "fourier_detail.hpp"
#include "psq/error.hpp"
#include "psq/parallel.hpp"
#include "psq/starnum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace psq {

namespace {

constexpr cplx I(0.0, 1.0);

void require_state(const QuasiDistribution& s, const char* where) {
    if (!s.normalized) throw InvalidArgument(std::string(where) + ": state is not flagged as normalized");
}

std::string monomial_name(int n, int m) {
    std::ostringstream os;
    if (n == 0 && m == 0) return "1";
    if (n > 0) os << "x" << (n > 1 ? "^" + std::to_string(n) : "");
    if (n > 0 && m > 0) os << "*";
    if (m > 0) os << "p" << (m > 1 ? "^" + std::to_string(m) : "");
    return os.str();
}

// t[d] = (1/N) sum_k g(k) e^{i k d dx / hbar}: the periodic Toeplitz kernel of
// the momentum multiplier g. The Nyquist mode carries the even part of g.
std::vector<cplx> momentum_kernel(const std::function<cplx(double)>& g, const Axis& axis, double hbar) {
    std::size_t N = axis.n;
    std::vector<cplx> gk(N);
    for (std::size_t k = 0; k < N; ++k) gk[k] = g(axis.conj_point(k, hbar));
    double knyq = axis.conj_point(0, hbar);
    gk[0] = 0.5 * (g(knyq) + g(-knyq));
    std::vector<cplx> t(N);
    double dx = axis.step();
    parallel_for(N, [&](std::size_t d) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < N; ++k)
            s += gk[k] * std::polar(1.0, axis.conj_point(k, hbar) * double(d) * dx / hbar);
        t[d] = s / double(N);
    });
    return t;
}

bool word_touches_x(const DiffOpWord& w) {
    for (const auto& g : w.generators())
        if (g.s == 0) return true;
    return false;
}

bool word_touches_p(const DiffOpWord& w) {
    for (const auto& g : w.generators())
        if (g.r == 0) return true;
    return false;
}

double frame_ratio(const std::vector<cplx>& v) {
    std::size_t n = v.size();
    std::size_t w = std::max<std::size_t>(2, n / 16);
    double all = 0.0, edge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = std::abs(v[i]);
        all = std::max(all, a);
        if (i < w || i >= n - w) edge = std::max(edge, a);
    }
    return all > 0.0 ? edge / all : 0.0;
}

double resolution_defect(const WaveFunction& f) {
    std::vector<cplx> s = f.values;
    detail::to_conjugate(s.data(), f.axis, f.hbar, -1, detail::single_line());
    return std::max(frame_ratio(f.values), frame_ratio(s));
}

} // namespace

cplx expectation(const ObservableSpec& A, const QuasiDistribution& state) {
    require_state(state, "expectation");
    const OrderingSpec& spec = state.spec;
    PhaseField rho = state.rho();
    bool multiplier = spec.has_identity_smoother() || std::holds_alternative<GaussianSmoother>(spec.smoother);
    if (!multiplier) return integrate(bopp_apply(A, rho, Side::left, spec));

    // int S(S^{-1}A *_sigma S^{-1}rho) = int G(S^{-1}A) S^{-1}rho with
    // G = exp(i hbar (1 - 2 sigma) d_x d_p); the Gaussian S^{-1} is its own
    // transpose, so the whole weight moves onto the observable.
    auto word = *smoother_word(spec);
    const auto* gauss = std::get_if<GaussianSmoother>(&spec.smoother);
    PolyH weight;
    PhaseField fn_weight(rho.grid);
    for (const auto& t : A.terms()) {
        switch (t.kind) {
        case ObservableTerm::Kind::poly: {
            PolyH a = apply_word(word, t.poly, true);
            a = apply_word(DiffOpWord::gauge(1.0 - 2.0 * spec.sigma), a);
            weight += apply_word(word, a, true);
            break;
        }
        case ObservableTerm::Kind::x_only:
            if (gauss && gauss->alpha != 0.0)
                throw Unsupported("unsupported smoother/term combination: function of x under a smoother acting on x");
            fn_weight += PhaseField::sample(rho.grid, [&](double x, double) { return t.fn(x); });
            break;
        case ObservableTerm::Kind::p_only:
            if (gauss && gauss->beta != 0.0)
                throw Unsupported("unsupported smoother/term combination: function of p under a smoother acting on p");
            fn_weight += PhaseField::sample(rho.grid, [&](double, double p) { return t.fn(p); });
            break;
        }
    }
    fn_weight += sample_observable(ObservableSpec(weight), rho.grid);
    return integrate(hadamard(fn_weight, rho));
}

cplx expectation(const ObservableSpec& A, const MixedState& state) {
    cplx s = 0.0;
    for (const auto& c : state.components()) s += c.weight * expectation(A, c.state);
    return s;
}

namespace {

template <class State>
double uncertainty_impl(const State& state, Quadrature which) {
    PolyH a = which == Quadrature::x ? PolyH::x() : PolyH::p();
    double m1 = expectation(ObservableSpec(a), state).real();
    double m2 = expectation(ObservableSpec(a * a), state).real();
    double var = m2 - m1 * m1;
    if (var < -1e-10)
        throw NumericalPrecondition("uncertainty: negative variance " + std::to_string(var) + " beyond -1e-10");
    return std::sqrt(std::max(var, 0.0));
}

} // namespace

double uncertainty(const QuasiDistribution& state, Quadrature which) { return uncertainty_impl(state, which); }
double uncertainty(const MixedState& state, Quadrature which) { return uncertainty_impl(state, which); }

StargenResidual stargen_residual(const ObservableSpec& H, const QuasiDistribution& psi, double E) {
    return stargen_residual(H, psi, E, E);
}

StargenResidual stargen_residual(const ObservableSpec& H, const QuasiDistribution& psi, double E_left,
                                 double E_right) {
    const PhaseField& f = psi.psi_field;
    double nrm = l2_norm(f);
    if (nrm == 0.0) throw InvalidArgument("stargen_residual: zero field");
    PhaseField l = bopp_apply(H, f, Side::left, psi.spec);
    PhaseField r = bopp_apply(H, f, Side::right, psi.spec);
    return {l2_norm(l - E_left * f) / nrm, l2_norm(r - E_right * f) / nrm};
}

OrderedOperator::OrderedOperator(const ObservableSpec& A, const OrderingSpec& spec, const Axis& axis, double hbar)
    : axis_(axis), hbar_(hbar), n_(axis.n), m_(axis.n * axis.n, 0.0) {
    if (n_ < 2 || n_ % 2 != 0) throw InvalidArgument("OrderedOperator: axis size must be even and at least 2");
    if (n_ > 4096) throw InvalidArgument("OrderedOperator: axis size above 4096 is not supported by the dense solver");
    validate_spec(spec);
    auto word = smoother_word(spec);
    if (!word) throw Unsupported("unsupported smoother/term combination: Cohen multiplier has no operator word");

    std::vector<double> xs(n_);
    for (std::size_t i = 0; i < n_; ++i) xs[i] = axis.point(i);

    // Polynomial part: S^{-1} A, then the symmetric symbol of its sigma-ordering.
    PolyH poly;
    for (const auto& t : A.terms()) {
        if (t.kind == ObservableTerm::Kind::poly) {
            poly += t.poly;
        } else if (t.kind == ObservableTerm::Kind::x_only) {
            if (word_touches_x(*word))
                throw Unsupported("unsupported smoother/term combination: function of x under a smoother acting on x");
            for (std::size_t i = 0; i < n_; ++i) m_[i * n_ + i] += t.fn(xs[i]);
        } else {
            if (word_touches_p(*word))
                throw Unsupported("unsupported smoother/term combination: function of p under a smoother acting on p");
            auto ker = momentum_kernel(t.fn, axis, hbar);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j) m_[i * n_ + j] += ker[(i + n_ - j) % n_];
        }
    }
    if (poly.is_zero()) return;

    PolyH pulled = apply_word(*word, poly, true);
    PolyH weyl = apply_word(DiffOpWord::gauge(0.5 - spec.sigma), pulled);
    std::map<std::pair<int, int>, cplx> coef;
    for (const auto& [k, c] : weyl.terms()) coef[{k.n, k.m}] += c * std::pow(hbar, k.k);

    std::map<int, std::vector<cplx>> kernels;
    for (const auto& [nm, c] : coef) {
        if (std::abs(c.imag()) > 1e-12 * std::max(1.0, std::abs(c)))
            bad_terms_.push_back(monomial_name(nm.first, nm.second));
        int m = nm.second;
        if (!kernels.count(m))
            kernels[m] = momentum_kernel([m](double k) -> cplx { return std::pow(k, m); }, axis, hbar);
    }
    parallel_for(n_, [&](std::size_t i) {
        for (std::size_t j = 0; j < n_; ++j) {
            double mid = 0.5 * (xs[i] + xs[j]);
            cplx s = 0.0;
            for (const auto& [nm, c] : coef) s += c * std::pow(mid, nm.first) * kernels.at(nm.second)[(i + n_ - j) % n_];
            m_[i * n_ + j] += s;
        }
    });
}

WaveFunction OrderedOperator::apply(const WaveFunction& psi) const {
    if (!(psi.axis == axis_)) throw GridMismatch("OrderedOperator::apply: axis mismatch");
    std::vector<cplx> out(n_, 0.0);
    parallel_for(n_, [&](std::size_t i) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += m_[i * n_ + j] * psi.values[j];
        out[i] = s;
    });
    return WaveFunction(axis_, psi.hbar, std::move(out));
}

WaveFunction OrderedOperator::apply_adjoint(const WaveFunction& psi) const {
    if (!(psi.axis == axis_)) throw GridMismatch("OrderedOperator::apply_adjoint: axis mismatch");
    std::vector<cplx> out(n_, 0.0);
    parallel_for(n_, [&](std::size_t i) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n_; ++j) s += std::conj(m_[j * n_ + i]) * psi.values[j];
        out[i] = s;
    });
    return WaveFunction(axis_, psi.hbar, std::move(out));
}

double OrderedOperator::hermiticity_defect() const {
    double d = 0.0, a = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
            d += std::norm(m_[i * n_ + j] - std::conj(m_[j * n_ + i]));
            a += std::norm(m_[i * n_ + j]);
        }
    return a > 0.0 ? std::sqrt(d / a) : 0.0;
}

SpectralResult spectrum_via_schrodinger(const ObservableSpec& H, const OrderingSpec& spec, int n_levels,
                                        const Axis& axis, double hbar, const SpectrumOptions& opts) {
    if (n_levels < 1 || std::size_t(n_levels) > axis.n)
        throw InvalidArgument("spectrum_via_schrodinger: n_levels must lie in [1, axis size]");
    OrderedOperator op(H, spec, axis, hbar);
    double defect = op.hermiticity_defect();
    if (!op.non_hermitian_terms().empty() || defect > opts.hermiticity_tolerance) {
        std::string names;
        for (const auto& t : op.non_hermitian_terms()) names += (names.empty() ? "" : ", ") + t;
        std::ostringstream os;
        os << "spectrum_via_schrodinger: ordered operator is not Hermitian (relative defect " << defect << ")";
        if (!names.empty()) os << "; complex coefficient on symmetric-form term(s) " << names;
        throw InvalidArgument(os.str());
    }

    std::size_t N = op.size();
    Eigen::MatrixXcd M(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) M(i, j) = 0.5 * (op(i, j) + std::conj(op(j, i)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
    if (es.info() != Eigen::Success) throw NumericalPrecondition("spectrum_via_schrodinger: eigensolver failed");

    SpectralResult r;
    r.ordering = spec;
    double scale = 1.0 / std::sqrt(axis.step());
    for (int n = 0; n < n_levels; ++n) {
        r.energies.push_back(es.eigenvalues()(n));
        std::vector<cplx> v(N);
        std::size_t big = 0;
        for (std::size_t i = 0; i < N; ++i) {
            v[i] = es.eigenvectors()(i, n) * scale;
            if (std::abs(v[i]) > std::abs(v[big])) big = i;
        }
        cplx ph = std::abs(v[big]) > 0 ? std::conj(v[big]) / std::abs(v[big]) : 1.0;
        for (auto& c : v) c *= ph;
        r.wavefunctions.emplace_back(axis, hbar, std::move(v));
    }

    // Re-orthonormalize inside each near-degenerate cluster.
    for (int a = 0; a < n_levels; ++a) {
        for (int b = 0; b < a; ++b)
            if (std::abs(r.energies[a] - r.energies[b]) < opts.degeneracy_window)
                r.wavefunctions[a] += -r.wavefunctions[b].inner(r.wavefunctions[a]) * r.wavefunctions[b];
        r.wavefunctions[a] *= 1.0 / r.wavefunctions[a].norm();
    }

    int reliable = 0;
    double worst = 0.0;
    for (int n = 0; n < n_levels; ++n) {
        double d = resolution_defect(r.wavefunctions[n]);
        if (d <= opts.resolution_tolerance && reliable == n) ++reliable;
        worst = std::max(worst, d);
    }
    if (reliable < n_levels) {
        std::ostringstream os;
        os << "spectrum_via_schrodinger: n_levels = " << n_levels << " exceeds the reliable resolution; only "
           << reliable << " level(s) keep boundary and spectral-frame amplitude below " << opts.resolution_tolerance
           << " (worst " << worst << ")";
        throw NumericalPrecondition(os.str());
    }

    if (opts.compute_residuals) {
        for (int n = 0; n < n_levels; ++n) {
            QuasiDistribution q = eigenfield(r, n, n);
            r.residuals.push_back(stargen_residual(H, q, r.energies[n]));
        }
    }
    return r;
}

QuasiDistribution eigenfield(const SpectralResult& r, int m, int n) {
    if (m < 0 || n < 0 || std::size_t(m) >= r.wavefunctions.size() || std::size_t(n) >= r.wavefunctions.size())
        throw InvalidArgument("eigenfield: level index out of range");
    // Left star action lands on the second factor.
    return twisted_tensor(r.wavefunctions[n], r.wavefunctions[m], r.ordering);
}

GaugeSpectrumReport gauge_spectrum_check(const ObservableSpec& H, const std::vector<double>& sigmas,
                                         const std::vector<Smoother>& smoothers, int n_levels, const Axis& axis,
                                         double hbar, const SpectrumOptions& opts) {
    GaugeSpectrumReport rep;
    for (const auto& sm : smoothers)
        for (double s : sigmas) {
            OrderingSpec spec{s, sm};
            rep.orderings.push_back(spec);
            rep.spectra.push_back(spectrum_via_schrodinger(H, spec, n_levels, axis, hbar, opts).energies);
        }
    for (std::size_t a = 0; a < rep.spectra.size(); ++a)
        for (std::size_t b = a + 1; b < rep.spectra.size(); ++b)
            for (int n = 0; n < n_levels; ++n)
                rep.max_deviation = std::max(rep.max_deviation, std::abs(rep.spectra[a][n] - rep.spectra[b][n]));
    rep.consistent = rep.max_deviation <= 1e-7;
    return rep;
}

} // namespace psq

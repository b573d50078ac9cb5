#include "psq/starnum.hpp"

#include "psq/error.hpp"
#include "psq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

namespace psq {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double factorial(int n) {
    double v = 1.0;
    for (int t = 2; t <= n; ++t) v *= t;
    return v;
}

// ------------------------------------------------- twisted convolution

PhaseField twisted_convolution(const PhaseField& f, const PhaseField& g, double sigma) {
    const PhaseGrid& grid = f.grid;
    const std::size_t nx = grid.nx(), np = grid.np();
    const std::size_t cx = nx / 2, cp = np / 2;
    const double hbar = grid.hbar, sigma_bar = 1.0 - sigma;

    SpectralField A = fourier_full(f);
    SpectralField B = fourier_full(g);

    // A'(k,l) = Ff e^{i(sigma_bar - sigma) xi_k eta_l / hbar}
    std::vector<double> are(nx * np), aim(nx * np), bre(nx * np), bim(nx * np);
    std::vector<double> row_a(nx, 0.0), row_b(nx, 0.0);
    for (std::size_t k = 0; k < nx; ++k)
        for (std::size_t l = 0; l < np; ++l) {
            std::size_t idx = k * np + l;
            cplx a = A.values[idx] * std::polar(1.0, (sigma_bar - sigma) * grid.xi(k) * grid.eta(l) / hbar);
            are[idx] = a.real();
            aim[idx] = a.imag();
            bre[idx] = B.values[idx].real();
            bim[idx] = B.values[idx].imag();
            row_a[k] = std::max(row_a[k], std::abs(a));
            row_b[k] = std::max(row_b[k], std::abs(B.values[idx]));
        }
    const double max_a = *std::max_element(row_a.begin(), row_a.end());
    const double max_b = *std::max_element(row_b.begin(), row_b.end());
    // Row pairs whose product cannot reach 1e-18 of the peak product are skipped.
    const double skip_below = 1e-18 * max_a * max_b;

    const double scale = grid.dxi() * grid.deta() / (two_pi * hbar);
    SpectralField out{grid, std::vector<cplx>(nx * np)};

    parallel_for(nx, [&](std::size_t k0) {
        std::vector<double> acc_re(np, 0.0), acc_im(np, 0.0);
        std::vector<double> ure(np), uim(np), cre(np), cim(np);
        std::vector<cplx> e2(np);
        for (std::size_t l = 0; l < np; ++l)
            e2[l] = std::polar(1.0, -sigma_bar * grid.xi(k0) * grid.eta(l) / hbar);
        std::size_t k_lo = k0 + cx + 1 > nx ? k0 + cx + 1 - nx : 0;
        std::size_t k_hi = std::min(nx - 1, k0 + cx);
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            std::size_t kb = k0 + cx - k;
            if (row_a[k] * row_b[kb] <= skip_below) continue;
            for (std::size_t l = 0; l < np; ++l) {
                cplx u = cplx(are[k * np + l], aim[k * np + l]) * e2[l];
                ure[l] = u.real();
                uim[l] = u.imag();
            }
            std::fill(cre.begin(), cre.end(), 0.0);
            std::fill(cim.begin(), cim.end(), 0.0);
            const double* br = &bre[kb * np];
            const double* bi = &bim[kb * np];
            for (std::size_t l = 0; l < np; ++l) {
                const double ur = ure[l], ui = uim[l];
                if (ur == 0.0 && ui == 0.0) continue;
                // l0 - l + cp in [0, np)
                std::size_t l0_lo = l > cp ? l - cp : 0;
                std::size_t l0_hi = std::min(np, l + np - cp);
                const double* brs = br + cp - l;
                const double* bis = bi + cp - l;
                for (std::size_t l0 = l0_lo; l0 < l0_hi; ++l0) {
                    cre[l0] += ur * brs[l0] - ui * bis[l0];
                    cim[l0] += ur * bis[l0] + ui * brs[l0];
                }
            }
            for (std::size_t l0 = 0; l0 < np; ++l0) {
                cplx e1 = std::polar(1.0, sigma * grid.xi(k) * grid.eta(l0) / hbar);
                cplx c = e1 * cplx(cre[l0], cim[l0]);
                acc_re[l0] += c.real();
                acc_im[l0] += c.imag();
            }
        }
        for (std::size_t l0 = 0; l0 < np; ++l0) out(k0, l0) = scale * cplx(acc_re[l0], acc_im[l0]);
    });
    return inverse_fourier_full(out);
}

PhaseGrid padded_grid(const PhaseGrid& g) {
    double hx = 0.5 * (g.x.hi - g.x.lo), hp = 0.5 * (g.p.hi - g.p.lo);
    return make_grid(2 * g.nx(), 2 * g.np(), g.x.lo - hx, g.x.hi + hx, g.p.lo - hp, g.p.hi + hp, g.hbar);
}

PhaseField embed(const PhaseField& f, const PhaseGrid& big) {
    PhaseField out(big);
    std::size_t ox = f.grid.nx() / 2, op = f.grid.np() / 2;
    for (std::size_t i = 0; i < f.grid.nx(); ++i)
        for (std::size_t j = 0; j < f.grid.np(); ++j) out(i + ox, j + op) = f(i, j);
    return out;
}

PhaseField crop(const PhaseField& big, const PhaseGrid& small) {
    PhaseField out(small);
    std::size_t ox = small.nx() / 2, op = small.np() / 2;
    for (std::size_t i = 0; i < small.nx(); ++i)
        for (std::size_t j = 0; j < small.np(); ++j) out(i, j) = big(i + ox, j + op);
    return out;
}

// ------------------------------------------------------- multipliers

template <typename Mult>
PhaseField apply_multiplier(const PhaseField& f, Mult&& m, const SmootherOptions& opts) {
    SpectralField F = fourier_full(f);
    const PhaseGrid& g = f.grid;
    double total = 0.0, dropped = 0.0;
    for (std::size_t k = 0; k < g.nx(); ++k)
        for (std::size_t l = 0; l < g.np(); ++l) {
            cplx& v = F(k, l);
            cplx factor = m(g.xi(k), g.eta(l));
            total += std::norm(v);
            if (!(std::abs(factor) <= opts.max_amplification)) {
                dropped += std::norm(v);
                v = 0.0;
            } else {
                v *= factor;
            }
        }
    if (total > 0.0 && std::sqrt(dropped / total) > opts.discard_tolerance)
        throw NumericalPrecondition("deconvolution ill-posed for this field: relative spectral content " +
                                    std::to_string(std::sqrt(dropped / total)) +
                                    " lies beyond the amplification cutoff " +
                                    std::to_string(opts.max_amplification));
    return inverse_fourier_full(F);
}

// exp(G) f for a word with field-level generators. G is split into N equal
// slices with |G/N| <= 1/2 on the lattice (bound from the largest spectral
// multiplier and coordinate), each slice summed by Taylor to convergence.
PhaseField apply_word_field(const DiffOpWord& word, const PhaseField& f) {
    const PhaseGrid& g = f.grid;
    const double kx = std::numbers::pi / g.dx(), kp = std::numbers::pi / g.dp();
    const double xm = std::max(std::abs(g.x.lo), std::abs(g.x.hi));
    const double pm = std::max(std::abs(g.p.lo), std::abs(g.p.hi));
    double bound = 0.0;
    for (const auto& gen : word.generators())
        bound += std::abs(gen.c) * std::pow(g.hbar, gen.k) * std::pow(xm, gen.a) * std::pow(pm, gen.b) *
                 std::pow(kx, gen.r) * std::pow(kp, gen.s);
    const int slices = std::max(1, static_cast<int>(std::ceil(2.0 * bound)));
    auto apply_gens = [&](const PhaseField& h) {
        PhaseField out(g);
        for (const auto& gen : word.generators()) {
            PhaseField d = spectral_derivative(h, gen.r, gen.s);
            cplx c = gen.c * std::pow(g.hbar, gen.k) / double(slices);
            for (std::size_t i = 0; i < g.nx(); ++i) {
                double xa = std::pow(g.x.point(i), gen.a);
                for (std::size_t j = 0; j < g.np(); ++j)
                    out(i, j) += c * xa * std::pow(g.p.point(j), gen.b) * d(i, j);
            }
        }
        return out;
    };
    PhaseField sum = f;
    for (int step = 0; step < slices; ++step) {
        PhaseField term = sum;
        bool converged = false;
        for (int n = 1; n <= 60 && !converged; ++n) {
            term = apply_gens(term);
            term *= 1.0 / n;
            sum += term;
            converged = l2_norm(term) <= 1e-17 * std::max(l2_norm(sum), 1e-300);
        }
        if (!converged)
            throw NumericalPrecondition("smoother word series did not converge on this field");
    }
    return sum;
}

// ------------------------------------------------------------ Bopp

PhaseField sample_poly(const PolyH& A, const PhaseGrid& g) { return sample_polynomial(A, g); }

PhaseField bopp_poly(const PolyH& A, const PhaseField& psi, Side side, double sigma) {
    const PhaseGrid& g = psi.grid;
    const double hbar = g.hbar, sigma_bar = 1.0 - sigma;
    int deg_x = 0, deg_p = 0;
    for (const auto& [key, c] : A.terms()) {
        deg_x = std::max(deg_x, key.n);
        deg_p = std::max(deg_p, key.m);
    }
    std::map<std::pair<int, int>, PhaseField> dpsi;
    auto psi_derivative = [&](int a, int b) -> const PhaseField& {
        auto key = std::make_pair(a, b);
        auto it = dpsi.find(key);
        if (it == dpsi.end()) it = dpsi.emplace(key, spectral_derivative(psi, a, b)).first;
        return it->second;
    };
    PhaseField out(g);
    // left : sum (-1)^s (i hbar)^{r+s} sigma^r sigma_bar^s/(r!s!) (d_x^r d_p^s A)(d_x^s d_p^r Psi)
    // right: sum (-1)^s (i hbar)^{r+s} sigma^r sigma_bar^s/(r!s!) (d_x^r d_p^s Psi)(d_x^s d_p^r A)
    const int r_max = side == Side::left ? deg_x : deg_p;
    const int s_max = side == Side::left ? deg_p : deg_x;
    for (int r = 0; r <= r_max; ++r)
        for (int s = 0; s <= s_max; ++s) {
            PolyH dA = side == Side::left ? derivative(A, r, s) : derivative(A, s, r);
            if (dA.is_zero()) continue;
            cplx coef = std::pow(cplx(0.0, hbar), r + s) * std::pow(sigma, r) * std::pow(-sigma_bar, s) /
                        (factorial(r) * factorial(s));
            const PhaseField& d = side == Side::left ? psi_derivative(s, r) : psi_derivative(r, s);
            PhaseField a = sample_polynomial(dA, g);
            for (std::size_t q = 0; q < out.values.size(); ++q) out.values[q] += coef * a.values[q] * d.values[q];
        }
    return out;
}

PhaseField bopp_x_only(const std::function<cplx(double)>& V, const PhaseField& psi, Side side, double sigma) {
    const PhaseGrid& g = psi.grid;
    // (x, y) representation: i hbar d_p -> y.
    PhaseField mixed = fourier_partial(psi, FourierAxis::p, Direction::inverse);
    const double shift = side == Side::left ? sigma : -(1.0 - sigma);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t l = 0; l < g.np(); ++l) mixed(i, l) *= V(g.x.point(i) + shift * g.eta(l));
    return fourier_partial(mixed, FourierAxis::p, Direction::forward);
}

PhaseField bopp_p_only(const std::function<cplx(double)>& T, const PhaseField& psi, Side side, double sigma) {
    const PhaseGrid& g = psi.grid;
    // (u, p) representation: -i hbar d_x -> u.
    PhaseField mixed = fourier_partial(psi, FourierAxis::x, Direction::forward);
    const double shift = side == Side::left ? 1.0 - sigma : -sigma;
    for (std::size_t k = 0; k < g.nx(); ++k)
        for (std::size_t j = 0; j < g.np(); ++j) mixed(k, j) *= T(g.p.point(j) + shift * g.xi(k));
    return fourier_partial(mixed, FourierAxis::x, Direction::inverse);
}

PhaseField bopp_sigma(const ObservableSpec& A, const PhaseField& psi, Side side, double sigma) {
    PhaseField out(psi.grid);
    for (const auto& t : A.terms()) {
        switch (t.kind) {
        case ObservableTerm::Kind::poly: out += bopp_poly(t.poly, psi, side, sigma); break;
        case ObservableTerm::Kind::x_only: out += bopp_x_only(t.fn, psi, side, sigma); break;
        case ObservableTerm::Kind::p_only: out += bopp_p_only(t.fn, psi, side, sigma); break;
        }
    }
    return out;
}

} // namespace

// ------------------------------------------------------------ public

PhaseField sample_polynomial(const PolyH& A, const PhaseGrid& g) {
    PhaseField out(g);
    const std::size_t nx = g.nx(), np = g.np();
    std::vector<double> xs(nx), ps(np);
    std::vector<cplx> row(np);
    for (const auto& [key, c] : A.terms()) {
        cplx ch = c * std::pow(g.hbar, key.k);
        for (std::size_t j = 0; j < np; ++j) row[j] = ch * std::pow(g.p.point(j), key.m);
        for (std::size_t i = 0; i < nx; ++i) {
            double xn = std::pow(g.x.point(i), key.n);
            cplx* o = &out(i, 0);
            for (std::size_t j = 0; j < np; ++j) o[j] += xn * row[j];
        }
    }
    return out;
}

// S^{-1} A term by term; function terms only where the smoother leaves that variable alone.
ObservableSpec pull_back_observable(const ObservableSpec& A, const OrderingSpec& spec) {
    if (spec.has_identity_smoother()) return A;
    auto word = smoother_word(spec);
    const auto* gauss = std::get_if<GaussianSmoother>(&spec.smoother);
    ObservableSpec out;
    for (const auto& t : A.terms()) {
        switch (t.kind) {
        case ObservableTerm::Kind::poly:
            if (!word) throw Unsupported("unsupported smoother/term combination: polynomial term with a Cohen multiplier");
            out.add_poly(apply_word(*word, t.poly, true));
            break;
        case ObservableTerm::Kind::x_only:
            if (!gauss || gauss->alpha != 0.0)
                throw Unsupported("unsupported smoother/term combination: function of x under a smoother acting on x");
            out.add_x_only(t.fn);
            break;
        case ObservableTerm::Kind::p_only:
            if (!gauss || gauss->beta != 0.0)
                throw Unsupported("unsupported smoother/term combination: function of p under a smoother acting on p");
            out.add_p_only(t.fn);
            break;
        }
    }
    return out;
}

PhaseField star_sigma(const PhaseField& f, const PhaseField& g, double sigma, const StarOptions& opts,
                      StarReport* report) {
    require_same_grid(f, g, "star_sigma");
    require_finite(f, "star_sigma");
    require_finite(g, "star_sigma");
    if (report) {
        report->tail_f = tail_mass(f);
        report->tail_g = tail_mass(g);
        report->tail_warning = report->tail_f > opts.tail_threshold || report->tail_g > opts.tail_threshold;
    }
    if (opts.zero_pad) {
        PhaseGrid big = padded_grid(f.grid);
        return crop(twisted_convolution(embed(f, big), embed(g, big), sigma), f.grid);
    }
    return twisted_convolution(f, g, sigma);
}

PhaseField star_sigma_S(const PhaseField& f, const PhaseField& g, const OrderingSpec& spec, const StarOptions& opts,
                        StarReport* report) {
    validate_spec(spec);
    if (spec.has_identity_smoother()) return star_sigma(f, g, spec.sigma, opts, report);
    PhaseField fs = apply_smoother(spec, f, Direction::inverse);
    PhaseField gs = apply_smoother(spec, g, Direction::inverse);
    return apply_smoother(spec, star_sigma(fs, gs, spec.sigma, opts, report), Direction::forward);
}

PhaseField apply_smoother(const OrderingSpec& spec, const PhaseField& f, Direction dir, const SmootherOptions& opts) {
    validate_spec(spec);
    if (spec.has_identity_smoother()) return f;
    const double hbar = f.grid.hbar;
    const double sign = dir == Direction::forward ? -1.0 : 1.0;
    if (auto* gs = std::get_if<GaussianSmoother>(&spec.smoother)) {
        const double a = gs->alpha, b = gs->beta;
        return apply_multiplier(
            f, [&](double xi, double eta) { return cplx(std::exp(sign * (a * xi * xi + b * eta * eta) / (2 * hbar))); },
            opts);
    }
    if (auto* cs = std::get_if<CohenSmoother>(&spec.smoother)) {
        const auto& F = cs->F;
        if (dir == Direction::inverse) return apply_multiplier(f, [&](double xi, double eta) { return F(xi, eta); }, opts);
        return apply_multiplier(f, [&](double xi, double eta) { return 1.0 / F(xi, eta); }, opts);
    }
    const auto& word = std::get<DiffOpWord>(spec.smoother);
    return apply_word_field(dir == Direction::forward ? word : word.negated(), f);
}

PhaseField bopp_apply(const ObservableSpec& A, const PhaseField& psi, Side side, const OrderingSpec& spec) {
    validate_spec(spec);
    require_finite(psi, "bopp_apply");
    if (spec.has_identity_smoother()) return bopp_sigma(A, psi, side, spec.sigma);
    ObservableSpec pulled = pull_back_observable(A, spec);
    PhaseField chi = apply_smoother(spec, psi, Direction::inverse);
    return apply_smoother(spec, bopp_sigma(pulled, chi, side, spec.sigma), Direction::forward);
}

PhaseField gauge_transform(const PhaseField& f, double sigma_from, double sigma_to) {
    if (sigma_from == sigma_to) return f;
    const double d = sigma_to - sigma_from, hbar = f.grid.hbar;
    SmootherOptions unbounded{std::numeric_limits<double>::infinity(), 1.0};
    return apply_multiplier(f, [&](double xi, double eta) { return std::polar(1.0, d * xi * eta / hbar); }, unbounded);
}

PhaseField star_commutator(const PhaseField& f, const PhaseField& g, const OrderingSpec& spec) {
    return star_sigma_S(f, g, spec) - star_sigma_S(g, f, spec);
}

PhaseField moyal_bracket(const PhaseField& f, const PhaseField& g, const OrderingSpec& spec) {
    return star_commutator(f, g, spec) * cplx(0.0, -1.0 / f.grid.hbar);
}

PhaseField poisson_bracket(const PhaseField& f, const PhaseField& g) {
    require_same_grid(f, g, "poisson_bracket");
    return hadamard(spectral_derivative(f, 1, 0), spectral_derivative(g, 0, 1)) -
           hadamard(spectral_derivative(f, 0, 1), spectral_derivative(g, 1, 0));
}

PhaseField involution_dagger(const PhaseField& A, const OrderingSpec& spec) {
    validate_spec(spec);
    PhaseField a = A.conj();
    const double sigma = spec.sigma, sigma_bar = spec.sigma_bar();
    const double hbar = A.grid.hbar;
    if (spec.has_identity_smoother()) return gauge_transform(a, sigma_bar, sigma);
    if (std::holds_alternative<DiffOpWord>(spec.smoother)) {
        OrderingSpec bar = conjugate_spec(spec);
        PhaseField t = apply_smoother(bar, a, Direction::inverse);
        t = gauge_transform(t, sigma_bar, sigma);
        return apply_smoother(spec, t, Direction::forward);
    }
    // Multiplier smoothers commute with the gauge map: one combined multiplier
    // m(xi,eta) e^{i(sigma - sigma_bar) xi eta/hbar} / m-bar(xi,eta).
    std::function<cplx(double, double)> m, mbar;
    if (auto* gs = std::get_if<GaussianSmoother>(&spec.smoother)) {
        m = [a_ = gs->alpha, b_ = gs->beta, hbar](double xi, double eta) {
            return cplx(std::exp(-(a_ * xi * xi + b_ * eta * eta) / (2 * hbar)));
        };
        mbar = m;
    } else {
        auto F = std::get<CohenSmoother>(spec.smoother).F;
        m = [F](double xi, double eta) { return 1.0 / F(xi, eta); };
        mbar = [F](double xi, double eta) { return 1.0 / std::conj(F(-xi, -eta)); };
    }
    return apply_multiplier(
        a,
        [&](double xi, double eta) {
            return m(xi, eta) / mbar(xi, eta) * std::polar(1.0, (sigma - sigma_bar) * xi * eta / hbar);
        },
        SmootherOptions{});
}

PhaseField sample_observable(const ObservableSpec& A, const PhaseGrid& g) {
    PhaseField out(g);
    for (const auto& t : A.terms()) {
        switch (t.kind) {
        case ObservableTerm::Kind::poly: out += sample_poly(t.poly, g); break;
        case ObservableTerm::Kind::x_only:
            out += PhaseField::sample(g, [&](double x, double) { return t.fn(x); });
            break;
        case ObservableTerm::Kind::p_only:
            out += PhaseField::sample(g, [&](double, double p) { return t.fn(p); });
            break;
        }
    }
    return out;
}

} // namespace psq

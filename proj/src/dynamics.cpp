#include "psq/dynamics.hpp"

#include "fourier_detail.hpp"
#include "psq/error.hpp"
#include "psq/spectra.hpp"
#include "psq/starnum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace psq {

namespace {

constexpr cplx I(0.0, 1.0);

double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

PolyH shift_hbar(const PolyH& f, int dk) {
    PolyH out;
    for (const auto& [m, c] : f.terms()) out.add(m.n, m.m, m.k + dk, c);
    return out;
}

// [[f, g]] = (f * g - g * f) / (i hbar) with formal hbar.
PolyH poly_bracket(const PolyH& f, const PolyH& g, double sigma) {
    PolyH comm = pstar(f, g, sigma) - pstar(g, f, sigma);
    return shift_hbar(comm, -1) * cplx(-I);
}

PhaseField sample_poly(const PolyH& f, const PhaseGrid& g) { return sample_polynomial(f, g); }

DiffOpWord require_word(const OrderingSpec& spec, const char* where) {
    validate_spec(spec);
    auto w = smoother_word(spec);
    if (!w) throw Unsupported(std::string(where) + ": Cohen smoothers have no symbolic word");
    return *w;
}

PolyH require_poly(const ObservableSpec& A, const char* where) {
    auto p = A.as_polynomial();
    if (!p) throw Unsupported(std::string(where) + ": needs a polynomial observable");
    return *p;
}

void check_tail(const PolyH& last, const PolyH& sum, const PhaseGrid& grid, int K, const char* where) {
    double nl = l2_norm(sample_poly(last, grid));
    double ns = l2_norm(sample_poly(sum, grid));
    double ratio = ns > 0.0 ? nl / ns : nl;
    if (!(ratio < 1e-8)) {
        std::ostringstream os;
        os << where << ": tail bound violated; the order-" << K << " term is " << ratio
           << " of the sum on the grid (need < 1e-8); reduce t or raise K";
        throw NumericalPrecondition(os.str());
    }
}

struct Series {
    PolyH sum;
    PolyH last;
};

Series exp_series(const PolyH& H, double t, int K, double sigma) {
    PolyH term(1.0);
    Series s{term, term};
    for (int k = 1; k <= K; ++k) {
        term = shift_hbar(pstar(H, term, sigma), -1) * cplx(-I * t / double(k));
        s.sum += term;
        s.last = term;
    }
    if (K == 0) s.last = PolyH(1.0);
    return s;
}

void require_order(int K, const char* where) {
    if (K < 0 || K > 20) throw InvalidArgument(std::string(where) + ": order K must lie in [0, 20]");
}

bool records(const EvolutionConfig& cfg, int s) {
    return s == 0 || s == cfg.steps || (cfg.snapshot_every > 0 && s % cfg.snapshot_every == 0);
}

// ---------------------------------------------------------------- Schrodinger

struct SplitParts {
    std::vector<cplx> V;  // on the axis points
    std::vector<cplx> T;  // on the centered conjugate lattice
};

SplitParts natural_parts(const ObservableSpec& H, const OrderingSpec& spec, const Axis& ax, double hbar) {
    ObservableSpec pulled = pull_back_observable(H, spec);
    SplitParts s{std::vector<cplx>(ax.n, 0.0), std::vector<cplx>(ax.n, 0.0)};
    auto add_T = [&](const std::function<cplx(double)>& g) {
        for (std::size_t k = 0; k < ax.n; ++k) {
            double pk = ax.conj_point(k, hbar);
            // Nyquist mode: even part, as in the ordered matrix.
            s.T[k] += k == 0 ? 0.5 * (g(pk) + g(-pk)) : g(pk);
        }
    };
    for (const auto& t : pulled.terms()) {
        switch (t.kind) {
        case ObservableTerm::Kind::x_only:
            for (std::size_t i = 0; i < ax.n; ++i) s.V[i] += t.fn(ax.point(i));
            break;
        case ObservableTerm::Kind::p_only: add_T(t.fn); break;
        case ObservableTerm::Kind::poly:
            for (const auto& [m, c] : t.poly.terms()) {
                if (m.n > 0 && m.m > 0)
                    throw InvalidArgument("evolve_schrodinger: split-step needs H = T(p) + V(x); term x^" +
                                          std::to_string(m.n) + " p^" + std::to_string(m.m) +
                                          " couples x and p; use matrix_exponential");
                cplx ch = c * std::pow(hbar, m.k);
                if (m.m == 0)
                    for (std::size_t i = 0; i < ax.n; ++i) s.V[i] += ch * std::pow(ax.point(i), m.n);
                else
                    add_T([&](double p) -> cplx { return ch * std::pow(p, m.m); });
            }
            break;
        }
    }
    double scale = 1.0, im = 0.0;
    for (auto v : s.V) scale = std::max(scale, std::abs(v)), im = std::max(im, std::abs(v.imag()));
    for (auto v : s.T) scale = std::max(scale, std::abs(v)), im = std::max(im, std::abs(v.imag()));
    if (im > 1e-12 * scale) throw InvalidArgument("evolve_schrodinger: H is not Hermitian (complex T or V)");
    return s;
}

using Stepper = std::function<void(WaveFunction&)>;

Stepper split_stepper(const ObservableSpec& H, const OrderingSpec& spec, const Axis& ax, double hbar, double dt) {
    SplitParts parts = natural_parts(H, spec, ax, hbar);
    std::vector<cplx> half_v(ax.n), full_t(ax.n);
    for (std::size_t i = 0; i < ax.n; ++i) half_v[i] = std::exp(-I * parts.V[i].real() * dt / (2 * hbar));
    for (std::size_t k = 0; k < ax.n; ++k) full_t[k] = std::exp(-I * parts.T[k].real() * dt / hbar);
    return [half_v, full_t, ax, hbar](WaveFunction& f) {
        for (std::size_t i = 0; i < ax.n; ++i) f.values[i] *= half_v[i];
        detail::to_conjugate(f.values.data(), ax, hbar, -1, detail::single_line());
        for (std::size_t k = 0; k < ax.n; ++k) f.values[k] *= full_t[k];
        detail::from_conjugate(f.values.data(), ax, hbar, -1, detail::single_line());
        for (std::size_t i = 0; i < ax.n; ++i) f.values[i] *= half_v[i];
    };
}

Stepper matrix_stepper(const ObservableSpec& H, const OrderingSpec& spec, const Axis& ax, double hbar, double dt) {
    OrderedOperator op(H, spec, ax, hbar);
    if (op.hermiticity_defect() > 1e-10) {
        std::string names;
        for (const auto& t : op.non_hermitian_terms()) names += (names.empty() ? "" : ", ") + t;
        throw InvalidArgument("evolve_schrodinger: ordered H is not Hermitian" +
                              (names.empty() ? std::string() : " (terms " + names + ")"));
    }
    const Eigen::Index n = Eigen::Index(ax.n);
    Eigen::MatrixXcd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = op(std::size_t(i), std::size_t(j));
    Eigen::MatrixXcd Hm = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hm);
    Eigen::VectorXcd phase(n);
    for (Eigen::Index k = 0; k < n; ++k) phase(k) = std::exp(-I * es.eigenvalues()(k) * dt / hbar);
    Eigen::MatrixXcd U = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    return [U](WaveFunction& f) {
        Eigen::Map<Eigen::VectorXcd> v(f.values.data(), Eigen::Index(f.values.size()));
        Eigen::VectorXcd w = U * v;
        v = w;
    };
}

// ---------------------------------------------------------------- phase space

double max_abs_on_grid(const PolyH& f, const PhaseGrid& g) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.np(); ++j) m = std::max(m, std::abs(f.evaluate(g.x.point(i), g.p.point(j), g.hbar)));
    return m;
}

double fn_derivative(const std::function<cplx(double)>& f, double u) {
    double h = 1e-3 * std::max(1.0, std::abs(u));
    return std::abs((-f(u + 2 * h) + 8.0 * f(u + h) - 8.0 * f(u - h) + f(u - 2 * h)) / (12 * h));
}

PolyH classical_symbol(const PolyH& f) { return f.hbar_slice(0); }

} // namespace

void validate_config(const EvolutionConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InvalidArgument("evolution: dt must be positive and finite");
    if (cfg.steps < 1) throw InvalidArgument("evolution: steps must be positive");
    if (!std::isfinite(cfg.dt * cfg.steps)) throw InvalidArgument("evolution: dt * steps must be finite");
    if (cfg.snapshot_every < 0) throw InvalidArgument("evolution: snapshot_every must be non-negative");
    if (cfg.method == EvolutionMethod::star_exponential) require_order(cfg.order, "evolution");
}

EvolutionResult evolve_schrodinger(const WaveFunction& phi0, const ObservableSpec& H, const OrderingSpec& spec,
                                   const EvolutionConfig& cfg) {
    validate_config(cfg);
    validate_spec(spec);
    const Axis& ax = phi0.axis;
    const double hbar = phi0.hbar;
    Stepper step;
    switch (cfg.method) {
    case EvolutionMethod::split_step_schrodinger: step = split_stepper(H, spec, ax, hbar, cfg.dt); break;
    case EvolutionMethod::matrix_exponential: step = matrix_stepper(H, spec, ax, hbar, cfg.dt); break;
    default: throw InvalidArgument("evolve_schrodinger: method must be split_step_schrodinger or matrix_exponential");
    }
    std::vector<std::pair<std::string, OrderedOperator>> ops;
    for (const auto& o : cfg.observables) ops.emplace_back(o.name, OrderedOperator(o.A, spec, ax, hbar));
    PhaseGrid grid = cfg.snapshot_grid ? *cfg.snapshot_grid : make_square_grid(ax.n, 0.5 * (ax.hi - ax.lo), hbar);
    if (cfg.snapshot_grid && (grid.x.n != ax.n || grid.x.lo != ax.lo || grid.x.hi != ax.hi || grid.hbar != hbar))
        throw GridMismatch("evolve_schrodinger: snapshot grid x axis must match the wavefunction axis");

    EvolutionResult out;
    auto record = [&](int s, const WaveFunction& f) {
        out.times.push_back(s * cfg.dt);
        out.wavefunctions.push_back(f);
        double n = f.norm();
        out.norms.push_back(n);
        out.masses.push_back(n * n);
        std::map<std::string, cplx> e;
        for (const auto& [name, op] : ops) e[name] = f.inner(op.apply(f)) / (n * n);
        out.expectations.push_back(std::move(e));
        if (cfg.tensor_snapshots) out.snapshots.push_back(twisted_tensor(f, f, spec, grid));
    };
    WaveFunction f = phi0;
    record(0, f);
    for (int s = 1; s <= cfg.steps; ++s) {
        step(f);
        if (records(cfg, s)) record(s, f);
    }
    return out;
}

double rk4_stability_bound(const ObservableSpec& H, const OrderingSpec& spec, const PhaseGrid& g, bool classical) {
    validate_spec(spec);
    ObservableSpec Hs = classical ? H : pull_back_observable(H, spec);
    const double sigma = spec.sigma, sb = 1.0 - sigma, hbar = g.hbar, dx = g.dx(), dp = g.dp();
    double rate = 0.0;
    for (const auto& t : Hs.terms()) {
        switch (t.kind) {
        case ObservableTerm::Kind::poly: {
            PolyH P = classical ? classical_symbol(t.poly) : t.poly;
            int deg = P.degree();
            for (int r = 0; r <= deg; ++r)
                for (int s = 0; r + s <= deg; ++s) {
                    if (r + s == 0 || (classical && r + s > 1)) continue;
                    double c = std::abs(std::pow(sigma, r) * std::pow(-sb, s) - std::pow(sigma, s) * std::pow(-sb, r)) /
                               (factorial(r) * factorial(s));
                    if (c < 1e-15) continue;
                    PolyH D = derivative(P, r, s);
                    if (D.is_zero()) continue;
                    double M = max_abs_on_grid(D, g);
                    rate = std::max(rate, std::pow(hbar, r + s - 1) * c * M / (std::pow(dx, s) * std::pow(dp, r)));
                }
            break;
        }
        case ObservableTerm::Kind::x_only:
            for (std::size_t i = 0; i < g.nx(); ++i) {
                double x = g.x.point(i);
                if (classical) {
                    rate = std::max(rate, fn_derivative(t.fn, x) / dp);
                    continue;
                }
                for (std::size_t l = 0; l < g.np(); ++l) {
                    double y = g.eta(l);
                    rate = std::max(rate, std::abs(t.fn(x + sigma * y) - t.fn(x - sb * y)) / hbar);
                }
            }
            break;
        case ObservableTerm::Kind::p_only:
            for (std::size_t j = 0; j < g.np(); ++j) {
                double p = g.p.point(j);
                if (classical) {
                    rate = std::max(rate, fn_derivative(t.fn, p) / dx);
                    continue;
                }
                for (std::size_t k = 0; k < g.nx(); ++k) {
                    double u = g.xi(k);
                    rate = std::max(rate, std::abs(t.fn(p + sb * u) - t.fn(p - sigma * u)) / hbar);
                }
            }
            break;
        }
    }
    return rate > 0.0 ? 0.5 / rate : std::numeric_limits<double>::infinity();
}

PolyH star_exponential_symbol(const PolyH& H, double t, int K, double sigma) {
    require_order(K, "star_exponential");
    return exp_series(H, t, K, sigma).sum;
}

PhaseField star_exponential(const ObservableSpec& H, double t, int K, const OrderingSpec& spec, const PhaseGrid& grid) {
    require_order(K, "star_exponential");
    DiffOpWord w = require_word(spec, "star_exponential");
    PolyH Hs = apply_word(w, require_poly(H, "star_exponential"), true);
    Series s = exp_series(Hs, t, K, spec.sigma);
    PolyH sum = apply_word(w, s.sum), last = apply_word(w, s.last);
    if (K > 0 && t != 0.0) check_tail(last, sum, grid, K, "star_exponential");
    return sample_poly(sum, grid);
}

PolyH heisenberg_observable(const PolyH& A, const PolyH& H, double t, int K, const OrderingSpec& spec,
                            const PhaseGrid& grid) {
    require_order(K, "heisenberg_observable");
    DiffOpWord w = require_word(spec, "heisenberg_observable");
    PolyH As = apply_word(w, A, true), Hs = apply_word(w, H, true);
    PolyH term = As, sum = As;
    for (int k = 1; k <= K; ++k) {
        term = poly_bracket(term, Hs, spec.sigma) * cplx(t / k);
        sum += term;
    }
    PolyH out = apply_word(w, sum);
    if (K > 0 && t != 0.0 && !term.is_zero()) check_tail(apply_word(w, term), out, grid, K, "heisenberg_observable");
    return out;
}

EvolutionResult evolve_phase_space(const QuasiDistribution& rho0, const ObservableSpec& H, const EvolutionConfig& cfg) {
    validate_config(cfg);
    const OrderingSpec& spec = rho0.spec;
    validate_spec(spec);
    const PhaseGrid& g = rho0.psi_field.grid;
    const double hbar = g.hbar, dt = cfg.dt;
    const OrderingSpec bare{spec.sigma};
    if (!cfg.observables.empty() && !rho0.normalized)
        throw InvalidArgument("evolve_phase_space: expectations need a state flagged as normalized");

    EvolutionResult out;
    std::function<void(PhaseField&)> step;
    PhaseField chi;

    if (cfg.method == EvolutionMethod::phase_space_rk4) {
        if (cfg.classical && !spec.has_identity_smoother())
            throw InvalidArgument("evolve_phase_space: the classical flow needs the identity smoother");
        out.stability_bound = rk4_stability_bound(H, spec, g, cfg.classical);
        if (dt > out.stability_bound) {
            std::ostringstream os;
            os << "evolve_phase_space: dt = " << dt << " exceeds the RK4 stability bound; use dt <= "
               << out.stability_bound;
            throw NumericalPrecondition(os.str());
        }
        std::function<PhaseField(const PhaseField&)> rhs;
        if (cfg.classical) {
            // d rho/dt = dH/dx d rho/dp - dH/dp d rho/dx
            PhaseField hx(g), hp(g);
            for (const auto& t : H.terms()) {
                switch (t.kind) {
                case ObservableTerm::Kind::poly: {
                    PolyH c = classical_symbol(t.poly);
                    hx += sample_poly(derivative(c, 1, 0), g);
                    hp += sample_poly(derivative(c, 0, 1), g);
                    break;
                }
                case ObservableTerm::Kind::x_only:
                    hx += PhaseField::sample(g, [&](double x, double) -> cplx {
                        double h = 1e-3 * std::max(1.0, std::abs(x));
                        return (-t.fn(x + 2 * h) + 8.0 * t.fn(x + h) - 8.0 * t.fn(x - h) + t.fn(x - 2 * h)) / (12 * h);
                    });
                    break;
                case ObservableTerm::Kind::p_only:
                    hp += PhaseField::sample(g, [&](double, double p) -> cplx {
                        double h = 1e-3 * std::max(1.0, std::abs(p));
                        return (-t.fn(p + 2 * h) + 8.0 * t.fn(p + h) - 8.0 * t.fn(p - h) + t.fn(p - 2 * h)) / (12 * h);
                    });
                    break;
                }
            }
            rhs = [hx, hp](const PhaseField& f) {
                return hadamard(hx, spectral_derivative(f, 0, 1)) - hadamard(hp, spectral_derivative(f, 1, 0));
            };
            chi = rho0.psi_field;
        } else {
            ObservableSpec Hs = pull_back_observable(H, spec);
            rhs = [Hs, bare, hbar](const PhaseField& f) {
                PhaseField d = bopp_apply(Hs, f, Side::left, bare) - bopp_apply(Hs, f, Side::right, bare);
                d *= cplx(-I / hbar);
                return d;
            };
            chi = apply_smoother(spec, rho0.psi_field, Direction::inverse);
        }
        step = [rhs, dt](PhaseField& f) {
            PhaseField k1 = rhs(f);
            PhaseField k2 = rhs(f + (0.5 * dt) * k1);
            PhaseField k3 = rhs(f + (0.5 * dt) * k2);
            PhaseField k4 = rhs(f + dt * k3);
            f += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        };
    } else if (cfg.method == EvolutionMethod::star_exponential) {
        // U(dt) * rho * U(-dt) = exp(-i dt ad_H / hbar) rho, since left and
        // right star multiplication commute; K Taylor terms of repeated Bopp actions.
        ObservableSpec Hs = pull_back_observable(H, spec);
        const int K = cfg.order;
        step = [Hs, bare, hbar, dt, K](PhaseField& f) {
            PhaseField term = f, sum = f;
            for (int k = 1; k <= K; ++k) {
                term = bopp_apply(Hs, term, Side::left, bare) - bopp_apply(Hs, term, Side::right, bare);
                term *= cplx(-I * dt / (hbar * k));
                sum += term;
            }
            double ratio = l2_norm(term) / l2_norm(sum);
            if (K > 0 && !(ratio < 1e-8)) {
                std::ostringstream os;
                os << "evolve_phase_space: star-exponential tail bound violated; the order-" << K << " term is "
                   << ratio << " of the step (need < 1e-8); reduce dt or raise the order";
                throw NumericalPrecondition(os.str());
            }
            f = std::move(sum);
        };
        chi = apply_smoother(spec, rho0.psi_field, Direction::inverse);
    } else {
        throw InvalidArgument("evolve_phase_space: method must be phase_space_rk4 or star_exponential");
    }

    const bool smoothed = !cfg.classical;
    auto record = [&](int s, const PhaseField& f) {
        out.times.push_back(s * dt);
        QuasiDistribution q{smoothed ? apply_smoother(spec, f, Direction::forward) : f, spec, rho0.normalized,
                            std::nullopt};
        out.norms.push_back(l2_norm(f));
        out.masses.push_back(integrate(q.psi_field).real() / std::sqrt(2 * std::numbers::pi * hbar));
        std::map<std::string, cplx> e;
        for (const auto& o : cfg.observables) e[o.name] = expectation(o.A, q);
        out.expectations.push_back(std::move(e));
        out.snapshots.push_back(std::move(q));
    };
    record(0, chi);
    for (int s = 1; s <= cfg.steps; ++s) {
        step(chi);
        if (!chi.all_finite()) throw NumericalPrecondition("evolve_phase_space: non-finite field at step " + std::to_string(s));
        if (records(cfg, s)) record(s, chi);
    }
    return out;
}

namespace {

std::optional<ObservableSpec> bracket_observable(const ObservableSpec& A, const ObservableSpec& H,
                                                 const OrderingSpec& spec) {
    auto a = A.as_polynomial();
    auto h = H.as_polynomial();
    auto w = smoother_word(spec);
    if (!a || !h || !w) return std::nullopt;
    PolyH b = poly_bracket(apply_word(*w, *a, true), apply_word(*w, *h, true), spec.sigma);
    return ObservableSpec(apply_word(*w, b));
}

template <class Evolve>
HeisenbergTrajectory trajectory(const ObservableSpec& A, const ObservableSpec& H, const OrderingSpec& spec,
                                EvolutionConfig cfg, Evolve&& evolve) {
    cfg.snapshot_every = 1;
    cfg.observables = {{"A", A}};
    auto br = bracket_observable(A, H, spec);
    if (br) cfg.observables.push_back({"bracket", *br});
    EvolutionResult r = evolve(cfg);
    HeisenbergTrajectory t;
    t.times = r.times;
    for (const auto& e : r.expectations) {
        t.values.push_back(e.at("A"));
        if (br) t.bracket_values.push_back(e.at("bracket"));
    }
    if (br)
        for (std::size_t k = 1; k + 1 < t.values.size(); ++k) {
            cplx d = (t.values[k + 1] - t.values[k - 1]) / (2 * cfg.dt);
            t.max_residual = std::max(t.max_residual, std::abs(d - t.bracket_values[k]));
        }
    return t;
}

} // namespace

HeisenbergTrajectory heisenberg_trajectory(const ObservableSpec& A, const QuasiDistribution& state0,
                                           const ObservableSpec& H, const EvolutionConfig& cfg) {
    return trajectory(A, H, state0.spec, cfg, [&](const EvolutionConfig& c) { return evolve_phase_space(state0, H, c); });
}

HeisenbergTrajectory heisenberg_trajectory(const ObservableSpec& A, const WaveFunction& state0,
                                           const ObservableSpec& H, const OrderingSpec& spec,
                                           const EvolutionConfig& cfg) {
    EvolutionConfig c0 = cfg;
    c0.tensor_snapshots = false;
    return trajectory(A, H, spec, c0, [&](const EvolutionConfig& c) { return evolve_schrodinger(state0, H, spec, c); });
}

} // namespace psq

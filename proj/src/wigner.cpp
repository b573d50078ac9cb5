#include "psq/wigner.hpp"

#include "fourier_detail.hpp"
#include "psq/error.hpp"
#include "psq/field_io.hpp"
#include "psq/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace psq {

namespace {

using json = nlohmann::json;

constexpr double two_pi = 2.0 * std::numbers::pi;

// Largest relative amplitude of f in its boundary frame or outer spectral frame.
double band_limit_defect(const WaveFunction& f) {
    const std::size_t n = f.axis.n, w = std::max<std::size_t>(2, n / 16);
    auto frame_fraction = [&](const std::vector<cplx>& v) {
        double total = 0.0, edge = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double a = std::norm(v[i]);
            total += a;
            if (i < w || i >= n - w) edge += a;
        }
        return total > 0.0 ? std::sqrt(edge / total) : 0.0;
    };
    std::vector<cplx> spec = f.values;
    detail::to_conjugate(spec.data(), f.axis, f.hbar, -1, detail::single_line());
    return std::max(frame_fraction(f.values), frame_fraction(spec));
}

// rows[l][i] = f(x_i + shift_l), band-limited, zero where x_i + shift_l leaves the span.
std::vector<cplx> shifted_rows(const WaveFunction& f, const std::vector<double>& shifts) {
    const Axis& ax = f.axis;
    const std::size_t n = ax.n, rows = shifts.size();
    std::vector<cplx> spec = f.values;
    detail::to_conjugate(spec.data(), ax, f.hbar, -1, detail::single_line());
    std::vector<cplx> out(rows * n);
    for (std::size_t l = 0; l < rows; ++l)
        for (std::size_t k = 0; k < n; ++k) {
            // kernel e^{-iuk/hbar}: f(u + a) <-> e^{iak/hbar} F(k); Nyquist kept real
            double phase = shifts[l] * ax.conj_point(k, f.hbar) / f.hbar;
            cplx m = k == 0 ? cplx(std::cos(phase)) : std::polar(1.0, phase);
            out[l * n + k] = m * spec[k];
        }
    detail::from_conjugate(out.data(), ax, f.hbar, -1, detail::Lines{rows, 1, n});
    const double lo = ax.lo, hi = ax.hi;
    for (std::size_t l = 0; l < rows; ++l)
        for (std::size_t i = 0; i < n; ++i) {
            double u = ax.point(i) + shifts[l];
            if (u < lo || u >= hi) out[l * n + i] = 0.0;
        }
    return out;
}

void require_same_axis(const WaveFunction& a, const WaveFunction& b) {
    if (a.axis.n != b.axis.n || a.axis.lo != b.axis.lo || a.axis.hi != b.axis.hi || a.hbar != b.hbar)
        throw GridMismatch("twisted_tensor: wavefunctions live on different axes");
}

double weight_sum_tolerance = 1e-12;

} // namespace

PhaseField QuasiDistribution::rho() const { return psi_field * cplx(1.0 / std::sqrt(two_pi * psi_field.grid.hbar)); }

MixedState::MixedState(std::vector<MixedComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("mixed state needs at least one component");
    double sum = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight >= 0.0 && c.weight <= 1.0)) throw InvalidArgument("mixture weight outside [0, 1]");
        require_same_grid(c.state.psi_field, components_.front().state.psi_field, "MixedState");
        if (c.state.spec.sigma != components_.front().state.spec.sigma ||
            smoother_kind(c.state.spec) != smoother_kind(components_.front().state.spec))
            throw InvalidArgument("mixture components use different orderings");
        sum += c.weight;
    }
    if (std::abs(sum - 1.0) > weight_sum_tolerance) throw InvalidArgument("mixture weights do not sum to 1");
}

QuasiDistribution MixedState::combined() const {
    QuasiDistribution q;
    q.spec = components_.front().state.spec;
    q.psi_field = PhaseField(components_.front().state.psi_field.grid);
    q.normalized = true;
    for (const auto& c : components_) {
        q.psi_field += c.state.psi_field * cplx(c.weight);
        q.normalized = q.normalized && c.state.normalized;
    }
    return q;
}

QuasiDistribution twisted_tensor(const WaveFunction& phi, const WaveFunction& psi, const OrderingSpec& spec,
                                 const PhaseGrid& grid, const TensorOptions& opts) {
    require_same_axis(phi, psi);
    validate_spec(spec);
    if (grid.x.n != phi.axis.n || grid.x.lo != phi.axis.lo || grid.x.hi != phi.axis.hi || grid.hbar != phi.hbar)
        throw GridMismatch("twisted_tensor: grid x axis differs from the wavefunction axis");
    for (const WaveFunction* f : {&phi, &psi}) {
        double defect = band_limit_defect(*f);
        if (defect > opts.interpolation_tolerance)
            throw NumericalPrecondition("twisted_tensor: interpolation error estimate " + std::to_string(defect) +
                                        " exceeds tolerance; wavefunction is not resolved on this axis");
    }
    const std::size_t nx = grid.nx(), np = grid.np();
    const double sigma = spec.sigma, sigma_bar = spec.sigma_bar();
    // y runs over the conjugate lattice of the p axis
    std::vector<double> shift_phi(np), shift_psi(np);
    for (std::size_t l = 0; l < np; ++l) {
        shift_phi[l] = -sigma_bar * grid.eta(l);
        shift_psi[l] = sigma * grid.eta(l);
    }
    std::vector<cplx> a = shifted_rows(phi, shift_phi);
    std::vector<cplx> b = shifted_rows(psi, shift_psi);
    PhaseField mixed(grid);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t l = 0; l < np; ++l) mixed(i, l) = std::conj(a[l * nx + i]) * b[l * nx + i];
    // The y integral stops at the ends of the conjugate lattice of the p axis.
    const std::size_t frame = std::max<std::size_t>(2, np / 16);
    double peak = 0.0, edge = 0.0;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t l = 0; l < np; ++l) {
            double v = std::abs(mixed(i, l));
            peak = std::max(peak, v);
            if (l < frame || l >= np - frame) edge = std::max(edge, v);
        }
    if (peak > 0.0 && edge / peak > opts.interpolation_tolerance)
        throw NumericalPrecondition("twisted_tensor: y integral truncated (relative amplitude " + std::to_string(edge / peak) +
                                    " at the ends of the conjugate p lattice); refine the p axis");
    QuasiDistribution q;
    q.spec = spec;
    q.psi_field = apply_smoother(spec, fourier_partial(mixed, FourierAxis::p, Direction::forward), Direction::forward);
    q.normalized = phi.values == psi.values && std::abs(phi.norm() - 1.0) < 1e-8;
    q.source = std::make_pair(phi, psi);
    return q;
}

QuasiDistribution twisted_tensor(const WaveFunction& phi, const WaveFunction& psi, const OrderingSpec& spec,
                                 const TensorOptions& opts) {
    const Axis& ax = phi.axis;
    return twisted_tensor(phi, psi, spec, make_grid(ax.n, ax.n, ax.lo, ax.hi, ax.lo, ax.hi, phi.hbar), opts);
}

cplx h_inner(const PhaseField& a, const PhaseField& b, const OrderingSpec& spec) {
    require_same_grid(a, b, "h_inner");
    if (spec.has_identity_smoother()) return l2_inner(a, b);
    return l2_inner(apply_smoother(spec, a, Direction::inverse), apply_smoother(spec, b, Direction::inverse));
}

double h_norm(const PhaseField& a, const OrderingSpec& spec) { return std::sqrt(std::abs(h_inner(a, a, spec))); }

std::vector<double> marginal(const QuasiDistribution& state, MarginalAxis axis, const SmootherOptions& opts) {
    const PhaseField& psi = state.psi_field;
    const PhaseGrid& g = psi.grid;
    const double scale = 1.0 / std::sqrt(two_pi * g.hbar);
    const bool along_x = axis == MarginalAxis::x;
    const Axis& ax = along_x ? g.x : g.p;

    if (std::holds_alternative<DiffOpWord>(state.spec.smoother) && !state.spec.has_identity_smoother()) {
        PhaseField w = apply_smoother(state.spec, psi, Direction::inverse, opts);
        std::vector<double> out(ax.n, 0.0);
        for (std::size_t i = 0; i < g.nx(); ++i)
            for (std::size_t j = 0; j < g.np(); ++j) {
                double v = w(i, j).real() * scale;
                if (along_x) out[i] += v * g.dp();
                else out[j] += v * g.dx();
            }
        return out;
    }

    // Integrating over the other variable keeps only the eta = 0 (or xi = 0)
    // line of the spectrum, so S^{-1} reduces to a 1D multiplier.
    std::vector<cplx> line(ax.n, 0.0);
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.np(); ++j) line[along_x ? i : j] += psi(i, j) * (along_x ? g.dp() : g.dx());
    if (!state.spec.has_identity_smoother()) {
        const int s = along_x ? -1 : +1;
        detail::to_conjugate(line.data(), ax, g.hbar, s, detail::single_line());
        double total = 0.0, dropped = 0.0;
        for (std::size_t k = 0; k < ax.n; ++k) {
            double c = ax.conj_point(k, g.hbar);
            cplx m;
            if (auto* gs = std::get_if<GaussianSmoother>(&state.spec.smoother)) {
                double a = along_x ? gs->alpha : gs->beta;
                m = std::exp(a * c * c / (2 * g.hbar));
            } else {
                const auto& F = std::get<CohenSmoother>(state.spec.smoother).F;
                m = along_x ? F(c, 0.0) : F(0.0, c);
            }
            total += std::norm(line[k]);
            if (!(std::abs(m) <= opts.max_amplification)) {
                dropped += std::norm(line[k]);
                line[k] = 0.0;
            } else {
                line[k] *= m;
            }
        }
        if (total > 0.0 && std::sqrt(dropped / total) > opts.discard_tolerance)
            throw NumericalPrecondition("deconvolution ill-posed for this field: marginal spectrum extends past the "
                                        "amplification cutoff");
        detail::from_conjugate(line.data(), ax, g.hbar, s, detail::single_line());
    }
    std::vector<double> out(ax.n);
    for (std::size_t k = 0; k < ax.n; ++k) out[k] = line[k].real() * scale;
    return out;
}

PurityReport purity_check(const QuasiDistribution& state) {
    // Residuals in the H norm, evaluated on chi = S^{-1} Psi: S^{-1}(Psi * Psi) = chi *_sigma chi and
    // S^{-1} Psi^dagger = gauge_{sigma_bar -> sigma}(chi^*), so no product is ever deconvolved.
    const OrderingSpec& spec = state.spec;
    PhaseField chi = spec.has_identity_smoother() ? state.psi_field
                                                  : apply_smoother(spec, state.psi_field, Direction::inverse);
    PurityReport r;
    r.hermiticity = l2_norm(chi - gauge_transform(chi.conj(), spec.sigma_bar(), spec.sigma));
    r.idempotence = l2_norm(star_sigma(chi, chi, spec.sigma) - chi * cplx(1.0 / std::sqrt(two_pi * chi.grid.hbar)));
    r.normalization = std::abs(l2_norm(chi) - 1.0);
    r.is_pure = r.hermiticity < purity_tolerance && r.idempotence < purity_tolerance &&
                r.normalization < purity_tolerance;
    return r;
}

WaveFunction hermite_basis_function(const Axis& axis, double hbar, int n, double omega) {
    if (n < 0) throw InvalidArgument("oscillator level must be non-negative");
    const double s = std::sqrt(hbar / omega);
    return WaveFunction::sample(axis, hbar, [&](double x) -> cplx {
        double y = x / s;
        double h0 = std::pow(std::numbers::pi, -0.25) / std::sqrt(s) * std::exp(-y * y / 2);
        if (n == 0) return h0;
        double h1 = std::sqrt(2.0) * y * h0;
        for (int k = 1; k < n; ++k) {
            double h2 = std::sqrt(2.0 / (k + 1)) * y * h1 - std::sqrt(double(k) / (k + 1)) * h0;
            h0 = h1;
            h1 = h2;
        }
        return h1;
    });
}

double basis_idempotence_check(int i, int j, int k, int l, const OrderingSpec& spec, const PhaseGrid& grid) {
    auto basis = [&](int n) { return hermite_basis_function(grid.x, grid.hbar, n); };
    PhaseField a = twisted_tensor(basis(i), basis(j), spec, grid).psi_field;
    PhaseField b = twisted_tensor(basis(k), basis(l), spec, grid).psi_field;
    PhaseField prod = star_sigma_S(a, b, spec);
    if (i != l) return l2_norm(prod);
    PhaseField kj = twisted_tensor(basis(k), basis(j), spec, grid).psi_field;
    return l2_norm(prod - kj * cplx(1.0 / std::sqrt(two_pi * grid.hbar)));
}

std::string quasi_sidecar(const QuasiDistribution& q) {
    json j;
    j["sigma"] = q.spec.sigma;
    json s;
    s["kind"] = smoother_kind(q.spec);
    s["alpha"] = 0.0;
    s["beta"] = 0.0;
    if (auto* g = std::get_if<GaussianSmoother>(&q.spec.smoother)) {
        s["alpha"] = g->alpha;
        s["beta"] = g->beta;
    } else if (auto* c = std::get_if<CohenSmoother>(&q.spec.smoother)) {
        s["label"] = c->label;
    } else if (auto* w = std::get_if<DiffOpWord>(&q.spec.smoother)) {
        json gens = json::array();
        for (const auto& gen : w->generators())
            gens.push_back({{"re", gen.c.real()}, {"im", gen.c.imag()}, {"k", gen.k}, {"a", gen.a},
                            {"b", gen.b}, {"r", gen.r}, {"s", gen.s}});
        s["generators"] = gens;
    }
    j["smoother"] = s;
    j["normalized"] = q.normalized;
    return j.dump(2);
}

void save_quasi(const std::string& field_path, const QuasiDistribution& q) {
    save_field(field_path, q.psi_field);
    std::ofstream out(field_path + ".json");
    if (!out) throw IoError("cannot open " + field_path + ".json for writing");
    out << quasi_sidecar(q) << '\n';
    if (!out) throw IoError("write failed for " + field_path + ".json");
}

QuasiDistribution load_quasi(const std::string& field_path) {
    QuasiDistribution q;
    q.psi_field = load_field(field_path);
    std::ifstream in(field_path + ".json");
    if (!in) throw IoError("cannot open " + field_path + ".json");
    json j;
    try {
        in >> j;
        q.spec.sigma = j.at("sigma").get<double>();
        q.normalized = j.at("normalized").get<bool>();
        const json& s = j.at("smoother");
        std::string kind = s.at("kind").get<std::string>();
        if (kind == "gaussian") {
            q.spec.smoother = GaussianSmoother{s.at("alpha").get<double>(), s.at("beta").get<double>()};
        } else if (kind == "word") {
            std::vector<DiffOpWord::Generator> gens;
            for (const auto& g : s.at("generators"))
                gens.push_back({cplx(g.at("re").get<double>(), g.at("im").get<double>()), g.at("k").get<int>(),
                                g.at("a").get<int>(), g.at("b").get<int>(), g.at("r").get<int>(),
                                g.at("s").get<int>()});
            q.spec.smoother = DiffOpWord(gens);
        } else if (kind == "cohen") {
            throw Unsupported("a Cohen multiplier cannot be restored from a sidecar");
        } else if (kind != "identity") {
            throw IoError("unknown smoother kind '" + kind + "' in " + field_path + ".json");
        }
    } catch (const json::exception& e) {
        throw IoError("malformed sidecar " + field_path + ".json: " + e.what());
    }
    return q;
}

} // namespace psq

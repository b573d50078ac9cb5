#include "fourier_detail.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

namespace psq::detail {

namespace {

using PlanKey = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, int>;

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan get_plan(std::size_t n, int sign, const Lines& lines) {
    static std::map<PlanKey, fftw_plan> cache;
    PlanKey key{n, lines.count, lines.stride, lines.dist, sign};
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::size_t extent = (lines.count - 1) * lines.dist + (n - 1) * lines.stride + 1;
    std::vector<cplx> scratch(extent);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    int len = static_cast<int>(n);
    fftw_plan plan = fftw_plan_many_dft(1, &len, static_cast<int>(lines.count),
                                        buf, nullptr, static_cast<int>(lines.stride),
                                        static_cast<int>(lines.dist),
                                        buf, nullptr, static_cast<int>(lines.stride),
                                        static_cast<int>(lines.dist),
                                        sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, plan);
    return plan;
}

} // namespace

void raw_dft(cplx* data, std::size_t n, int sign, Lines lines) {
    fftw_plan plan = get_plan(n, sign, lines);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

// With u_i = lo + i d and k_k = (k - n/2) dk, dk d = 2 pi hbar / n:
//   e^{s i k_k u_i/hbar} = e^{s i k_k lo/hbar} (-1)^i e^{s 2 pi i k i/n}.
void to_conjugate(cplx* data, const Axis& axis, double hbar, int s, Lines lines) {
    const std::size_t n = axis.n;
    const double scale = axis.step() / std::sqrt(2.0 * std::numbers::pi * hbar);
    std::vector<cplx> post(n);
    for (std::size_t k = 0; k < n; ++k)
        post[k] = scale * std::polar(1.0, s * axis.conj_point(k, hbar) * axis.lo / hbar);
    for (std::size_t b = 0; b < lines.count; ++b)
        for (std::size_t i = 1; i < n; i += 2) data[b * lines.dist + i * lines.stride] *= -1.0;
    raw_dft(data, n, s < 0 ? FFTW_FORWARD : FFTW_BACKWARD, lines);
    for (std::size_t b = 0; b < lines.count; ++b)
        for (std::size_t k = 0; k < n; ++k) data[b * lines.dist + k * lines.stride] *= post[k];
}

void from_conjugate(cplx* data, const Axis& axis, double hbar, int s, Lines lines) {
    const std::size_t n = axis.n;
    const double scale = axis.conj_step(hbar) / std::sqrt(2.0 * std::numbers::pi * hbar);
    std::vector<cplx> pre(n);
    for (std::size_t k = 0; k < n; ++k)
        pre[k] = scale * std::polar(1.0, -s * axis.conj_point(k, hbar) * axis.lo / hbar);
    for (std::size_t b = 0; b < lines.count; ++b)
        for (std::size_t k = 0; k < n; ++k) data[b * lines.dist + k * lines.stride] *= pre[k];
    raw_dft(data, n, s < 0 ? FFTW_BACKWARD : FFTW_FORWARD, lines);
    for (std::size_t b = 0; b < lines.count; ++b)
        for (std::size_t i = 1; i < n; i += 2) data[b * lines.dist + i * lines.stride] *= -1.0;
}

} // namespace psq::detail

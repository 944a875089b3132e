#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "roughwave/grid.hpp"

namespace roughwave::testing {

// Fourier multiplier -i c xi_1/|xi| applied to f zero-padded to pad*N,
// sampled back on the original cells. c = 2 pi turns the Riesz multiplier
// into the one for the kernel x_1/|x|^3.
inline GridFunction riesz_multiplier(const GridFunction& f, double c, std::size_t pad = 4) {
    const Domain& dom = f.domain();
    const std::size_t n = dom.resolution(), m = pad * n;
    const double h = dom.cell_size();
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m * m));
    for (std::size_t k = 0; k < m * m; ++k) buf[k][0] = buf[k][1] = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) buf[i * m + j][0] = f(i, j);
    fftw_plan fwd = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(m), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_2d(static_cast<int>(m), static_cast<int>(m), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    const double period = static_cast<double>(m) * h;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            const double x1 = (a < m / 2 ? double(a) : double(a) - double(m)) / period;
            const double x2 = (b < m / 2 ? double(b) : double(b) - double(m)) / period;
            const double r = std::hypot(x1, x2);
            const std::complex<double> mult = r == 0.0 ? 0.0 : std::complex<double>(0.0, -c * x1 / r);
            std::complex<double> v(buf[a * m + b][0], buf[a * m + b][1]);
            v *= mult / static_cast<double>(m * m);
            buf[a * m + b][0] = v.real();
            buf[a * m + b][1] = v.imag();
        }
    fftw_execute(bwd);
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = buf[i * m + j][0];
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
    return GridFunction(dom, std::move(out));
}

inline double relative_l2(const GridFunction& got, const GridFunction& want) {
    return lp_norm(got - want, 2.0) / lp_norm(want, 2.0);
}

}  // namespace roughwave::testing

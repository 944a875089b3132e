#include "roughwave/convolution.hpp"

#include <algorithm>
#include <cstdint>

#include "roughwave/parallel.hpp"

namespace roughwave {

namespace {

// Squared-length range of the offsets x - y with x in dst and y in src.
void offset_range(const CellRect& src, const CellRect& dst, std::int64_t& lo, std::int64_t& hi) {
    const std::int64_t di_lo = dst.i0 - (src.i1 - 1), di_hi = dst.i1 - 1 - src.i0;
    const std::int64_t dj_lo = dst.j0 - (src.j1 - 1), dj_hi = dst.j1 - 1 - src.j0;
    auto nearest = [](std::int64_t a, std::int64_t b) -> std::int64_t {
        if (a <= 0 && b >= 0) return 0;
        return std::min(std::abs(a), std::abs(b));
    };
    auto farthest = [](std::int64_t a, std::int64_t b) { return std::max(std::abs(a), std::abs(b)); };
    const std::int64_t ni = nearest(di_lo, di_hi), nj = nearest(dj_lo, dj_hi);
    const std::int64_t fi = farthest(di_lo, di_hi), fj = farthest(dj_lo, dj_hi);
    lo = ni * ni + nj * nj;
    hi = fi * fi + fj * fj;
}

void accumulate_row(const double* __restrict fvals, std::int64_t n, const OffsetKernel& k,
                    const CellRect& src, const CellRect& dst, std::int64_t i, double* __restrict orow,
                    double scale) {
    const std::int64_t r = k.radius();
    const std::int64_t di_lo = std::max(-r, i - (src.i1 - 1));
    const std::int64_t di_hi = std::min(r, i - src.i0);
    const std::int64_t dj_min = dst.j0 - (src.j1 - 1);
    const std::int64_t dj_max = dst.j1 - 1 - src.j0;
    for (std::int64_t di = di_lo; di <= di_hi; ++di) {
        const auto span = k.row_span(di);
        const std::int64_t lo = std::max(span.first, dj_min);
        const std::int64_t hi = std::min(span.last, dj_max);
        if (lo > hi) continue;
        const double* krow = k.row(di);
        const double* frow = fvals + (i - di) * n;
        for (std::int64_t dj = lo; dj <= hi; ++dj) {
            const double kv = krow[dj];
            if (kv == 0.0) continue;
            const double w = kv * scale;
            const std::int64_t jlo = std::max(dst.j0, src.j0 + dj);
            const std::int64_t jhi = std::min(dst.j1, src.j1 + dj);
            double* __restrict o = orow + (jlo - dst.j0);
            const double* __restrict s = frow + (jlo - dj);
            const std::int64_t len = jhi - jlo;
            for (std::int64_t t = 0; t < len; ++t) o[t] += w * s[t];
        }
    }
}

}  // namespace

void accumulate_convolution(const GridFunction& f, const OffsetKernel& k, const CellRect& src_raw,
                            const CellRect& dst_raw, std::span<double> out, double scale) {
    const CellRect box = full_rect(f.domain());
    const CellRect src = src_raw.intersect(box);
    const CellRect dst = dst_raw;
    if (src.empty() || dst.empty() || k.empty()) return;
    std::int64_t lo = 0, hi = 0;
    offset_range(src, dst, lo, hi);
    if (lo > k.max_r2() || hi < k.min_r2()) return;
    const auto n = static_cast<std::int64_t>(f.domain().resolution());
    const double* fvals = f.values().data();
    const std::int64_t width = dst.cols();
    auto row = [&](std::size_t t) {
        const std::int64_t i = dst.i0 + static_cast<std::int64_t>(t);
        accumulate_row(fvals, n, k, src, dst, i, out.data() + t * static_cast<std::size_t>(width), scale);
    };
    const std::size_t rows = static_cast<std::size_t>(dst.rows());
    if (jobs() > 1 && dst.area() * std::min<std::int64_t>(src.area(), k.width() * k.width()) > (1 << 22))
        parallel_for(0, rows, row);
    else
        for (std::size_t t = 0; t < rows; ++t) row(t);
}

GridFunction convolve(const GridFunction& f, const OffsetKernel& k) {
    const CellRect box = full_rect(f.domain());
    std::vector<double> out(f.size(), 0.0);
    accumulate_convolution(f, k, box, box, out, f.domain().cell_area());
    return GridFunction(f.domain(), std::move(out));
}

}  // namespace roughwave

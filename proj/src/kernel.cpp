#include "roughwave/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "roughwave/sum.hpp"

namespace roughwave {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Fixed antisymmetric sector pattern: sixteen sectors, value on sector s+8 is
// minus the value on sector s.
double rough_profile(double theta) {
    static constexpr double levels[8] = {0.9, -0.35, 0.6, 1.0, -0.8, 0.15, -0.55, 0.3};
    double t = theta / two_pi * 16.0;
    t -= 16.0 * std::floor(t / 16.0);
    const int sector = static_cast<int>(t) % 16;
    return sector < 8 ? levels[sector] : -levels[sector - 8];
}

}  // namespace

RoughKernel::RoughKernel(std::vector<double> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 4) throw std::invalid_argument("kernel needs at least 4 angular samples");
    for (double v : samples_)
        if (!std::isfinite(v)) throw std::invalid_argument("kernel samples must be finite");
    const double mean = compensated_sum(samples_) / static_cast<double>(samples_.size());
    for (double& v : samples_) v -= mean;
    for (double v : samples_) sup_ = std::max(sup_, std::abs(v));
}

RoughKernel RoughKernel::preset(std::string_view name, std::size_t m) {
    std::vector<double> v(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double theta = two_pi * static_cast<double>(k) / static_cast<double>(m);
        // Exact quarter-turn positions keep the sign presets symmetric.
        const bool on_vertical = 4 * k == m || 4 * k == 3 * m;
        const bool on_diagonal = (8 * k) % m == 0 && ((8 * k) / m) % 2 == 1;
        if (name == "cos")
            v[k] = std::cos(theta);
        else if (name == "sin")
            v[k] = std::sin(theta);
        else if (name == "cos2")
            v[k] = std::cos(2.0 * theta);
        else if (name == "sign")
            v[k] = on_vertical ? 0.0 : sign_of(std::cos(theta));
        else if (name == "sign4")
            v[k] = on_diagonal ? 0.0 : sign_of(std::cos(2.0 * theta));
        else if (name == "rough")
            v[k] = rough_profile(theta);
        else if (name == "zero")
            v[k] = 0.0;
        else
            throw std::invalid_argument("unknown kernel preset '" + std::string(name) + "'");
    }
    return RoughKernel(std::move(v));
}

RoughKernel RoughKernel::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("kernel spec must be an object");
    for (const auto& [key, _] : j.items())
        if (key != "preset" && key != "angles" && key != "values")
            throw ParseError("unknown kernel key '" + key + "'");
    if (j.contains("preset")) {
        if (j.contains("values")) throw ParseError("kernel spec has both preset and values");
        const std::size_t m = j.contains("angles") ? j.at("angles").get<std::size_t>() : 512;
        return preset(j.at("preset").get<std::string>(), m);
    }
    if (!j.contains("values")) throw ParseError("kernel spec needs 'preset' or 'values'");
    auto values = j.at("values").get<std::vector<double>>();
    if (j.contains("angles") && j.at("angles").get<std::size_t>() != values.size())
        throw ParseError("kernel 'angles' does not match the number of values");
    return RoughKernel(std::move(values));
}

nlohmann::json RoughKernel::to_json() const {
    return nlohmann::json{{"angles", samples_.size()}, {"values", samples_}};
}

double RoughKernel::at_angle(double theta) const noexcept {
    const double m = static_cast<double>(samples_.size());
    double t = theta / two_pi * m;
    t -= m * std::floor(t / m);
    auto k = static_cast<std::size_t>(t);
    if (k >= samples_.size()) k = 0;
    const double frac = t - static_cast<double>(k);
    const std::size_t k1 = (k + 1) % samples_.size();
    return samples_[k] + frac * (samples_[k1] - samples_[k]);
}

double RoughKernel::operator()(double x, double y) const {
    if (x == 0.0 && y == 0.0) throw DomainError("kernel direction undefined at the origin");
    return at_angle(std::atan2(y, x));
}

double PartitionBump::step(double u) noexcept {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

double PartitionBump::cutoff(double t) noexcept { return step(2.0 - t); }

double PartitionBump::bump(double r) noexcept { return cutoff(r) - cutoff(2.0 * r); }

double PartitionBump::bump(double r, int j) noexcept { return bump(std::ldexp(r, -j)); }

OffsetKernel::OffsetKernel(std::int64_t radius)
    : radius_(radius),
      values_(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)), 0.0),
      spans_(static_cast<std::size_t>(2 * radius + 1)) {
    if (radius < 0) throw std::invalid_argument("negative kernel radius");
}

double OffsetKernel::at(std::int64_t di, std::int64_t dj) const noexcept {
    if (di < -radius_ || di > radius_ || dj < -radius_ || dj > radius_) return 0.0;
    return values_[static_cast<std::size_t>((di + radius_) * width() + (dj + radius_))];
}

void OffsetKernel::finalize() {
    min_r2_ = std::numeric_limits<std::int64_t>::max();
    max_r2_ = -1;
    for (std::int64_t di = -radius_; di <= radius_; ++di) {
        RowSpan span;
        const double* r = row(di);
        for (std::int64_t dj = -radius_; dj <= radius_; ++dj) {
            if (r[dj] == 0.0) continue;
            if (span.first > span.last) span.first = dj;
            span.last = dj;
            const std::int64_t r2 = di * di + dj * dj;
            min_r2_ = std::min(min_r2_, r2);
            max_r2_ = std::max(max_r2_, r2);
        }
        spans_[static_cast<std::size_t>(di + radius_)] = span;
    }
    if (max_r2_ < 0) {
        min_r2_ = 1;
        max_r2_ = 0;
    }
}

double OffsetKernel::sum() const { return compensated_sum(values_); }

double OffsetKernel::abs_sum() const {
    CompensatedSum s;
    for (double v : values_) s.add(std::abs(v));
    return s.value();
}

OffsetKernel OffsetKernel::cropped(std::int64_t radius) const {
    OffsetKernel out(radius);
    const std::int64_t r = std::min(radius, radius_);
    for (std::int64_t di = -r; di <= r; ++di)
        for (std::int64_t dj = -r; dj <= r; ++dj) out.set(di, dj, at(di, dj));
    out.finalize();
    return out;
}

OffsetKernel& OffsetKernel::operator+=(const OffsetKernel& o) {
    if (o.radius_ > radius_) {
        OffsetKernel grown = cropped(o.radius_);
        *this = std::move(grown);
    }
    for (std::int64_t di = -o.radius_; di <= o.radius_; ++di)
        for (std::int64_t dj = -o.radius_; dj <= o.radius_; ++dj) {
            const double v = o.at(di, dj);
            if (v != 0.0) set(di, dj, at(di, dj) + v);
        }
    finalize();
    return *this;
}

OffsetKernel OffsetKernel::operator-(const OffsetKernel& o) const {
    const std::int64_t r = std::max(radius_, o.radius_);
    OffsetKernel out(r);
    for (std::int64_t di = -r; di <= r; ++di)
        for (std::int64_t dj = -r; dj <= r; ++dj) out.set(di, dj, at(di, dj) - o.at(di, dj));
    out.finalize();
    return out;
}

namespace {

double mollifier_shape(double r) noexcept {
    const double u = 4.0 * r;
    if (u >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

double mollifier_constant() {
    // Radial Simpson rule; r * shape(r) is not flat at r = 0, so trapezoid is only second order there.
    constexpr int n = 40000;
    const double dr = 0.25 / n;
    CompensatedSum s;
    for (int k = 1; k < n; ++k) {
        const double r = k * dr;
        s.add((k % 2 == 1 ? 4.0 : 2.0) * r * mollifier_shape(r));
    }
    return 1.0 / (two_pi * s.value() * dr / 3.0);
}

}  // namespace

Mollifier Mollifier::standard() {
    static const double c = mollifier_constant();
    return Mollifier(c, false);
}

Mollifier Mollifier::delta() { return Mollifier(0.0, true); }

double Mollifier::profile(double r) const noexcept { return c_ * mollifier_shape(r); }

OffsetKernel Mollifier::sampled(int s, const Domain& dom) const {
    const double h = dom.cell_size();
    if (delta_) {
        OffsetKernel k(0);
        k.set(0, 0, 1.0 / dom.cell_area());
        k.finalize();
        return k;
    }
    const double support = std::ldexp(0.25, s);
    const auto radius = static_cast<std::int64_t>(std::floor(support / h));
    OffsetKernel k(radius);
    const double scale = std::ldexp(1.0, -2 * s);
    CompensatedSum total;
    for (std::int64_t di = -radius; di <= radius; ++di)
        for (std::int64_t dj = -radius; dj <= radius; ++dj) {
            const double r = h * std::sqrt(static_cast<double>(di * di + dj * dj));
            const double v = scale * profile(std::ldexp(r, -s));
            k.set(di, dj, v);
            total.add(v);
        }
    const double norm = total.value() * dom.cell_area();
    OffsetKernel out(radius);
    for (std::int64_t di = -radius; di <= radius; ++di)
        for (std::int64_t dj = -radius; dj <= radius; ++dj) out.set(di, dj, k.at(di, dj) / norm);
    out.finalize();
    return out;
}

int finest_resolvable_scale(const Domain& dom) {
    // smallest j with 2^(j-1) >= h
    int j = static_cast<int>(std::ceil(std::log2(dom.cell_size()) - 1e-12)) + 1;
    while (std::ldexp(1.0, j - 2) >= dom.cell_size()) --j;
    while (std::ldexp(1.0, j - 1) < dom.cell_size()) ++j;
    return j;
}

int coarsest_relevant_scale(const Domain& dom) {
    const double reach =
        dom.cell_size() * std::sqrt(2.0) * static_cast<double>(dom.resolution() - 1);
    int j = finest_resolvable_scale(dom);
    while (std::ldexp(1.0, j) <= reach) ++j;
    return j;  // 2^(j-1) <= reach < 2^j
}

namespace {

void require_resolvable(int j, const Domain& dom) {
    if (std::ldexp(1.0, j - 1) < dom.cell_size())
        throw ScaleRangeError("kernel piece at scale 2^" + std::to_string(j) +
                              " starts below one cell");
}

std::int64_t natural_radius(int j, const Domain& dom) {
    return static_cast<std::int64_t>(std::ceil(std::ldexp(2.0, j) / dom.cell_size()));
}

}  // namespace

KernelPiece build_kernel_piece(const RoughKernel& k, int j, const Domain& dom) {
    require_resolvable(j, dom);
    const double h = dom.cell_size();
    const std::int64_t natural = natural_radius(j, dom);
    const std::int64_t stored =
        std::min<std::int64_t>(natural, 2 * (static_cast<std::int64_t>(dom.resolution()) - 1));

    // Cancellation correction over the natural support.
    CompensatedSum raw, radial;
    for (std::int64_t di = -natural; di <= natural; ++di)
        for (std::int64_t dj = -natural; dj <= natural; ++dj) {
            const std::int64_t r2 = di * di + dj * dj;
            if (r2 == 0) continue;
            const double r = h * std::sqrt(static_cast<double>(r2));
            const double b = PartitionBump::bump(r, j);
            if (b == 0.0) continue;
            const double base = b / (r * r);
            raw.add(k(static_cast<double>(di), static_cast<double>(dj)) * base);
            radial.add(base);
        }
    KernelPiece piece;
    piece.j = j;
    piece.support_radius = natural;
    piece.correction = radial.value() > 0.0 ? raw.value() / radial.value() : 0.0;
    piece.table = OffsetKernel(stored);

    CompensatedSum integral, l1;
    for (std::int64_t di = -natural; di <= natural; ++di)
        for (std::int64_t dj = -natural; dj <= natural; ++dj) {
            const std::int64_t r2 = di * di + dj * dj;
            if (r2 == 0) continue;
            const double r = h * std::sqrt(static_cast<double>(r2));
            const double b = PartitionBump::bump(r, j);
            if (b == 0.0) continue;
            const double v =
                (k(static_cast<double>(di), static_cast<double>(dj)) - piece.correction) * b / (r * r);
            integral.add(v);
            l1.add(std::abs(v));
            if (std::abs(di) <= stored && std::abs(dj) <= stored) piece.table.set(di, dj, v);
        }
    piece.table.finalize();
    piece.integral = integral.value() * dom.cell_area();
    piece.l1_norm = l1.value() * dom.cell_area();
    return piece;
}

OffsetKernel full_kernel(const RoughKernel& k, const Domain& dom) {
    const auto radius = static_cast<std::int64_t>(dom.resolution()) - 1;
    const double h = dom.cell_size();
    OffsetKernel out(radius);
    for (std::int64_t di = -radius; di <= radius; ++di)
        for (std::int64_t dj = -radius; dj <= radius; ++dj) {
            const std::int64_t r2 = di * di + dj * dj;
            if (r2 == 0) continue;
            out.set(di, dj,
                    k(static_cast<double>(di), static_cast<double>(dj)) / (h * h * static_cast<double>(r2)));
        }
    out.finalize();
    return out;
}

KernelBank build_kernel_bank(const RoughKernel& k, const Domain& dom) {
    return build_kernel_bank(k, dom, finest_resolvable_scale(dom), coarsest_relevant_scale(dom));
}

KernelBank build_kernel_bank(const RoughKernel& k, const Domain& dom, int j_min, int j_max) {
    if (j_max < j_min) throw ScaleRangeError("empty piece range");
    KernelBank bank{dom, {}, OffsetKernel(0), k.sup_norm()};
    for (int j = j_min; j <= j_max; ++j) bank.pieces.push_back(build_kernel_piece(k, j, dom));

    const double h = dom.cell_size();
    const std::int64_t radius =
        std::min<std::int64_t>(natural_radius(j_min - 1, dom), static_cast<std::int64_t>(dom.resolution()) - 1);
    OffsetKernel near(radius);
    for (std::int64_t di = -radius; di <= radius; ++di)
        for (std::int64_t dj = -radius; dj <= radius; ++dj) {
            const std::int64_t r2 = di * di + dj * dj;
            if (r2 == 0) continue;
            const double r = h * std::sqrt(static_cast<double>(r2));
            const double weight = PartitionBump::cutoff(std::ldexp(r, -(j_min - 1)));
            if (weight == 0.0) continue;
            near.set(di, dj, k(static_cast<double>(di), static_cast<double>(dj)) * weight / (r * r));
        }
    near.finalize();
    bank.near_field = std::move(near);
    return bank;
}

OffsetKernel mollify_piece(const KernelPiece& piece, const Mollifier& moll, int s, const Domain& dom) {
    const auto span = static_cast<std::int64_t>(dom.resolution()) - 1;
    if (moll.is_delta()) return piece.table.cropped(std::min(span, piece.table.radius()));
    if (std::ldexp(1.0, s) < dom.cell_size() * (1.0 - 1e-12))
        throw ScaleRangeError("mollification scale 2^" + std::to_string(s) + " is below one cell");
    const OffsetKernel psi = moll.sampled(s, dom);
    if (psi.radius() > span) throw ScaleRangeError("mollifier wider than the domain");
    const std::int64_t out_radius = std::min(span, piece.support_radius + psi.radius());
    OffsetKernel out(out_radius);
    std::vector<double> acc(static_cast<std::size_t>(out.width() * out.width()), 0.0);
    const double area = dom.cell_area();
    const std::int64_t w = out.width();
    for (std::int64_t a = -psi.radius(); a <= psi.radius(); ++a)
        for (std::int64_t b = -psi.radius(); b <= psi.radius(); ++b) {
            const double weight = psi.at(a, b) * area;
            if (weight == 0.0) continue;
            for (std::int64_t di = -out_radius; di <= out_radius; ++di) {
                const std::int64_t si = di - a;
                if (si < -piece.table.radius() || si > piece.table.radius()) continue;
                const double* src = piece.table.row(si);
                double* dst = acc.data() + (di + out_radius) * w + out_radius;
                const std::int64_t lo = std::max(-out_radius, -piece.table.radius() + b);
                const std::int64_t hi = std::min(out_radius, piece.table.radius() + b);
                for (std::int64_t dj = lo; dj <= hi; ++dj) dst[dj] += weight * src[dj - b];
            }
        }
    for (std::int64_t di = -out_radius; di <= out_radius; ++di)
        for (std::int64_t dj = -out_radius; dj <= out_radius; ++dj)
            out.set(di, dj, acc[static_cast<std::size_t>((di + out_radius) * w + dj + out_radius)]);
    out.finalize();
    return out;
}

OffsetKernel mollified_kernel(std::span<const KernelPiece> pieces, const Mollifier& moll, int l,
                              const Domain& dom) {
    if (l < 0) throw std::invalid_argument("mollification index l must be >= 0");
    OffsetKernel total(0);
    total.finalize();
    for (const auto& p : pieces) total += mollify_piece(p, moll, p.j - l, dom);
    return total;
}

std::vector<OffsetKernel> difference_kernel(std::span<const KernelPiece> pieces, const Mollifier& moll,
                                            int m, const Domain& dom) {
    if (m < 1) throw std::invalid_argument("difference index m must be >= 1");
    std::vector<OffsetKernel> out;
    out.reserve(pieces.size());
    for (const auto& p : pieces) {
        const OffsetKernel fine = mollify_piece(p, moll, p.j - (1 << m), dom);
        const OffsetKernel coarse = mollify_piece(p, moll, p.j - (1 << (m - 1)), dom);
        out.push_back(fine - coarse);
    }
    return out;
}

}  // namespace roughwave

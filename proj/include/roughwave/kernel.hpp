#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roughwave/grid.hpp"

namespace roughwave {

// Angular profile on the unit circle: M equispaced samples at 2*pi*k/M,
// linearly interpolated, mean removed at construction.
class RoughKernel {
public:
    explicit RoughKernel(std::vector<double> samples);

    static RoughKernel preset(std::string_view name, std::size_t samples = 512);
    static RoughKernel from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    double at_angle(double theta) const noexcept;
    // Value at the direction of (x, y); throws DomainError at the origin.
    double operator()(double x, double y) const;
    double sup_norm() const noexcept { return sup_; }
    std::span<const double> samples() const noexcept { return samples_; }

private:
    std::vector<double> samples_;
    double sup_ = 0.0;
};

// Radial smooth partition: cutoff(t) = 1 for t <= 1, 0 for t >= 2, and
// bump(r) = cutoff(r) - cutoff(2r), supported in [1/2, 2].
class PartitionBump {
public:
    static double step(double u) noexcept;
    static double cutoff(double t) noexcept;
    static double bump(double r) noexcept;
    // bump at scale 2^j: bump(2^-j r)
    static double bump(double r, int j) noexcept;
};

// Values of a kernel at integer cell offsets (di, dj), |di|, |dj| <= radius.
// Entries are kernel values; discrete convolutions multiply by the cell area.
class OffsetKernel {
public:
    struct RowSpan {
        std::int64_t first = 1;
        std::int64_t last = 0;  // empty when first > last
    };

    OffsetKernel() = default;
    explicit OffsetKernel(std::int64_t radius);

    std::int64_t radius() const noexcept { return radius_; }
    double at(std::int64_t di, std::int64_t dj) const noexcept;
    void set(std::int64_t di, std::int64_t dj, double v) noexcept {
        values_[static_cast<std::size_t>((di + radius_) * width() + (dj + radius_))] = v;
    }
    const double* row(std::int64_t di) const noexcept {
        return values_.data() + (di + radius_) * width() + radius_;
    }
    std::span<const double> values() const noexcept { return values_; }
    std::int64_t width() const noexcept { return 2 * radius_ + 1; }

    // Recomputes row spans and radial extent; call after the last set().
    void finalize();
    RowSpan row_span(std::int64_t di) const noexcept {
        return spans_[static_cast<std::size_t>(di + radius_)];
    }
    // Squared offset length range over nonzero entries, in cell units.
    std::int64_t min_r2() const noexcept { return min_r2_; }
    std::int64_t max_r2() const noexcept { return max_r2_; }
    bool empty() const noexcept { return max_r2_ < min_r2_; }

    double sum() const;
    double abs_sum() const;
    OffsetKernel cropped(std::int64_t radius) const;

    OffsetKernel& operator+=(const OffsetKernel& o);
    OffsetKernel operator-(const OffsetKernel& o) const;

private:
    std::int64_t radius_ = 0;
    std::vector<double> values_{0.0};
    std::vector<RowSpan> spans_{RowSpan{}};
    std::int64_t min_r2_ = 1;
    std::int64_t max_r2_ = 0;
};

// psi(x) = c exp(-1 / (1 - (4|x|)^2)) for |x| < 1/4, unit integral.
class Mollifier {
public:
    static Mollifier standard();
    // Test mollifier whose every rescaling is the discrete delta.
    static Mollifier delta();

    bool is_delta() const noexcept { return delta_; }
    double normalization() const noexcept { return c_; }
    double profile(double r) const noexcept;  // psi at radius r
    // psi_s(x) = 2^{-2s} psi(2^{-s} x) sampled on the grid and renormalized so
    // the discrete integral is exactly one.
    OffsetKernel sampled(int s, const Domain& dom) const;

private:
    Mollifier(double c, bool delta) : c_(c), delta_(delta) {}
    double c_;
    bool delta_;
};

// Dyadic piece K_j(x) = Omega(x') |x|^-2 bump(2^-j x), minus a multiple of
// |x|^-2 bump(2^-j x) that makes its discrete integral vanish.
struct KernelPiece {
    int j = 0;
    double correction = 0.0;
    // Natural support radius in cells.
    std::int64_t support_radius = 0;
    // Table cropped to twice the domain span, enough for any mollification.
    OffsetKernel table;
    // Discrete integral and L1 norm over the natural support.
    double integral = 0.0;
    double l1_norm = 0.0;
};

// Smallest j whose piece support starts at or beyond one cell.
int finest_resolvable_scale(const Domain& dom);
// Largest j whose piece still meets offsets inside the domain.
int coarsest_relevant_scale(const Domain& dom);

KernelPiece build_kernel_piece(const RoughKernel& k, int j, const Domain& dom);

// Pieces j_min..j_max plus the near-field remainder below the finest piece.
// near_field + sum of pieces is the full grid kernel up to the pieces'
// cancellation corrections, which vanish for symmetric profiles.
struct KernelBank {
    Domain domain;
    std::vector<KernelPiece> pieces;
    OffsetKernel near_field;
    double omega_sup = 0.0;
};

KernelBank build_kernel_bank(const RoughKernel& k, const Domain& dom);
KernelBank build_kernel_bank(const RoughKernel& k, const Domain& dom, int j_min, int j_max);

// The full grid kernel Omega(z') |z|^-2 for z != 0, radius N - 1.
OffsetKernel full_kernel(const RoughKernel& k, const Domain& dom);

// K_j * psi_s by direct summation, cropped to radius N - 1.
OffsetKernel mollify_piece(const KernelPiece& piece, const Mollifier& moll, int s, const Domain& dom);
// Sum over pieces of K_j * psi_{j-l}.
OffsetKernel mollified_kernel(std::span<const KernelPiece> pieces, const Mollifier& moll, int l,
                              const Domain& dom);
// Per piece: K_j * psi_{j-2^m} - K_j * psi_{j-2^{m-1}}.
std::vector<OffsetKernel> difference_kernel(std::span<const KernelPiece> pieces, const Mollifier& moll,
                                            int m, const Domain& dom);

}  // namespace roughwave

#pragma once

#include <span>
#include <utility>
#include <vector>

#include "roughwave/dyadic.hpp"
#include "roughwave/grid.hpp"
#include "roughwave/kernel.hpp"

namespace roughwave {

// Truncation radii h * 2^k, k = 0..K, with h * 2^K at least the diameter.
struct TruncationGrid {
    std::vector<double> epsilons;

    static TruncationGrid geometric(const Domain& dom);
};

// Partial sums P_k on a target rectangle, stored layer-major.
struct LayeredField {
    CellRect frame;
    std::size_t layers = 0;
    std::vector<double> data;

    double at(std::size_t k, std::int64_t i, std::int64_t j) const noexcept {
        return data[k * static_cast<std::size_t>(frame.area()) +
                    static_cast<std::size_t>((i - frame.i0) * frame.cols() + (j - frame.j0))];
    }
};

// An operator realized as an ordered stack of kernel layers. P_k is the sum of
// layers k..L-1 applied to f. Maximal kinds return max_k |P_k|; linear kinds
// return P_0.
class OperatorHandle {
public:
    enum class Kind {
        singular,
        truncated,
        maximal_truncation,
        lacunary,
        piece_sum,
        mollified,
        lacunary_mollified,
        difference_sup,
        zero
    };

    static OperatorHandle singular(const RoughKernel& k, const Domain& dom);
    static OperatorHandle truncated(const RoughKernel& k, const Domain& dom, double eps);
    static OperatorHandle maximal_truncation(const RoughKernel& k, const Domain& dom, const TruncationGrid& grid);
    // T**: finest partial sum includes the near field, so it equals T.
    static OperatorHandle lacunary(const KernelBank& bank);
    // Lacunary sup over the given pieces only.
    static OperatorHandle lacunary(std::span<const KernelPiece> pieces, const Domain& dom, double omega_sup);
    // Linear sum of the bank's pieces, without the near field.
    static OperatorHandle piece_sum(const KernelBank& bank);
    static OperatorHandle mollified(const KernelBank& bank, const Mollifier& moll, int l);
    static OperatorHandle lacunary_mollified(const KernelBank& bank, const Mollifier& moll, int l);
    static OperatorHandle difference_sup(const KernelBank& bank, const Mollifier& moll, int m);
    static OperatorHandle zero(const Domain& dom);
    static OperatorHandle from_layers(Kind kind, const Domain& dom, std::vector<OffsetKernel> layers,
                                      bool maximal, double omega_sup);

    Kind kind() const noexcept { return kind_; }
    bool is_maximal() const noexcept { return maximal_; }
    const Domain& domain() const noexcept { return domain_; }
    double omega_sup() const noexcept { return omega_sup_; }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    const std::vector<OffsetKernel>& layers() const noexcept { return layers_; }

    GridFunction apply(const GridFunction& f) const;
    // Partial sums of T(f restricted to the union of sources) on target.
    LayeredField partial_sums(const GridFunction& f, std::span<const CellRect> sources,
                              const CellRect& target) const;
    // max_k |P_k| (maximal kinds) or |P_0| (linear kinds) of a layered field.
    void magnitudes(const LayeredField& sums, std::vector<double>& out) const;

private:
    OperatorHandle(Kind kind, const Domain& dom, std::vector<OffsetKernel> layers, bool maximal, double sup)
        : kind_(kind), domain_(dom), layers_(std::move(layers)), maximal_(maximal), omega_sup_(sup) {}

    Kind kind_;
    Domain domain_;
    std::vector<OffsetKernel> layers_;
    bool maximal_;
    double omega_sup_;
};

GridFunction singular_integral(const GridFunction& f, const RoughKernel& k);
GridFunction truncated_integral(const GridFunction& f, const RoughKernel& k, double eps);
GridFunction maximal_truncation(const GridFunction& f, const RoughKernel& k, const TruncationGrid& grid);
GridFunction lacunary_maximal(const GridFunction& f, std::span<const KernelPiece> pieces);
GridFunction mollified_operator(const GridFunction& f, const KernelBank& bank, const Mollifier& moll, int l);
GridFunction lacunary_mollified(const GridFunction& f, const KernelBank& bank, const Mollifier& moll, int l);
GridFunction difference_sup(const GridFunction& f, const KernelBank& bank, const Mollifier& moll, int m);

// M_r f = (max over family cubes containing x of <|f|^r>_Q)^{1/r}; f is
// zero-extended and cubes reaching outside the box count their full measure.
GridFunction hl_maximal(const GridFunction& f, const CubeFamily& family, double r = 1.0);

// Non-increasing rearrangement of a step function given as (value, measure).
class Rearrangement {
public:
    explicit Rearrangement(std::vector<std::pair<double, double>> value_measure);

    // h*(t), right-continuous; 0 beyond the total measure.
    double operator()(double t) const noexcept;
    // |{|h| > alpha}|
    double distribution(double alpha) const noexcept;
    double total_measure() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

private:
    std::vector<double> values_;      // descending
    std::vector<double> cumulative_;  // cumulative measure through each value
};

// Index (1-based) of the order statistic that realizes the rearrangement at
// lambda * n on an n-cell cube: the ceil((1 - lambda) n)-th smallest.
std::size_t rearrangement_rank(std::size_t n, double lambda);

// |T(f chi_{outside 3Q})| sampled on the cells of Q inside the box, row-major.
std::vector<double> excised_profile(const GridFunction& f, const OperatorHandle& t, const Cube& q);

// Grand maximal M_{lambda,T} for every lambda and sharp maximal M_{p,T} for
// every p (p = infinity allowed), from one pass over the contained family cubes.
struct TruncatedMaximals {
    std::vector<GridFunction> grand;
    std::vector<GridFunction> sharp;
};
TruncatedMaximals truncated_maximals(const GridFunction& f, const OperatorHandle& t, const CubeFamily& family,
                                     std::span<const double> lambdas, std::span<const double> ps);

GridFunction grand_maximal(const GridFunction& f, double lambda, const OperatorHandle& t,
                           const CubeFamily& family);
GridFunction sharp_maximal(const GridFunction& f, double p, const OperatorHandle& t, const CubeFamily& family);

GridFunction commutator_maximal(const GridFunction& f, const GridFunction& b, const RoughKernel& k,
                                const TruncationGrid& grid);

// sup over contained family cubes of <|b - b_Q|>_Q.
double bmo_seminorm(const GridFunction& b, const CubeFamily& family);

}  // namespace roughwave

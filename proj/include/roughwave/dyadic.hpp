#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughwave/grid.hpp"

namespace roughwave {

// Half-open cell index rectangle [i0, i1) x [j0, j1).
struct CellRect {
    std::int64_t i0 = 0, i1 = 0, j0 = 0, j1 = 0;

    bool empty() const noexcept { return i1 <= i0 || j1 <= j0; }
    std::int64_t rows() const noexcept { return empty() ? 0 : i1 - i0; }
    std::int64_t cols() const noexcept { return empty() ? 0 : j1 - j0; }
    std::int64_t area() const noexcept { return rows() * cols(); }
    bool contains(std::int64_t i, std::int64_t j) const noexcept {
        return i >= i0 && i < i1 && j >= j0 && j < j1;
    }
    bool contains(const CellRect& o) const noexcept {
        return o.empty() || (o.i0 >= i0 && o.i1 <= i1 && o.j0 >= j0 && o.j1 <= j1);
    }
    CellRect intersect(const CellRect& o) const noexcept;
    bool operator==(const CellRect&) const = default;
};

CellRect full_rect(const Domain& dom) noexcept;
// Cells of outer not in inner, as at most four disjoint rectangles.
std::vector<CellRect> rect_difference(const CellRect& outer, const CellRect& inner);
// Bounding rectangle of the nonzero cells (empty when f vanishes).
CellRect support_rect(const GridFunction& f);

// Axis-parallel square in cell units; cells are members by center inclusion.
struct Cube {
    std::int64_t i0 = 0, j0 = 0;
    std::int64_t side = 1;

    std::int64_t cell_count() const noexcept { return side * side; }
    CellRect rect() const noexcept { return {i0, i0 + side, j0, j0 + side}; }
    // Dilate about the center by an odd integer factor.
    Cube dilate(std::int64_t factor) const;
    bool contains(const Cube& o) const noexcept { return rect().contains(o.rect()); }

    std::array<double, 2> lower_corner(const Domain& dom) const noexcept;
    double side_length(const Domain& dom) const noexcept {
        return static_cast<double>(side) * dom.cell_size();
    }
    double measure(const Domain& dom) const noexcept {
        return static_cast<double>(cell_count()) * dom.cell_area();
    }

    auto operator<=>(const Cube&) const = default;
};

// Nested grid-aligned cubes of side factor * 2^k cells for k in [k_min, k_max].
// At scale k the corners sit at origin + shift_k * 2^k + side * t, where the
// per-axis shift is 0, +1 or -1 and follows shift_{k+1} = 2 shift_k mod 3.
class DyadicLattice {
public:
    DyadicLattice(std::int64_t factor, std::array<std::int64_t, 2> origin, std::array<int, 2> residue,
                  int k_min, int k_max);

    // Cells up to the whole box, aligned at the domain corner.
    static DyadicLattice standard(const Domain& dom);

    std::int64_t factor() const noexcept { return factor_; }
    int k_min() const noexcept { return k_min_; }
    int k_max() const noexcept { return k_max_; }
    std::array<int, 2> residue() const noexcept { return residue_; }
    std::int64_t side(int k) const noexcept { return factor_ << k; }
    std::int64_t offset(int k, int axis) const noexcept;

    Cube cube_containing(std::int64_t i, std::int64_t j, int k) const noexcept;
    // Coarsest to finest.
    std::vector<Cube> cubes_containing(std::int64_t i, std::int64_t j) const;
    std::vector<Cube> cubes_containing(const Domain& dom, double x, double y) const;
    // Scale of Q if it is a cube of this lattice, else -1.
    int scale_of(const Cube& q) const noexcept;
    std::array<Cube, 4> children(const Cube& q) const;
    // Cubes at scale k meeting (or contained in) the rectangle.
    std::vector<Cube> cubes_at(int k, const CellRect& region, bool contained) const;

private:
    std::int64_t factor_;
    std::array<std::int64_t, 2> origin_;
    std::array<int, 2> residue_;
    int k_min_, k_max_;
};

// The 3^2 lattices whose cubes are exactly the 3-dilates of D's cubes.
std::vector<DyadicLattice> three_lattice_cover(const DyadicLattice& d);

// The cube family behind every "sup over cubes containing x": single cells
// together with the nine cover lattices of the standard lattice.
class CubeFamily {
public:
    enum class Reach { contained, intersecting };

    explicit CubeFamily(const Domain& dom);

    const Domain& domain() const noexcept { return domain_; }
    const DyadicLattice& base() const noexcept { return base_; }
    const std::vector<DyadicLattice>& lattices() const noexcept { return lattices_; }

    // Cells first, then each lattice from fine to coarse. Cubes that extend
    // beyond the box are visited only with Reach::intersecting.
    void for_each(Reach reach, const std::function<void(const Cube&)>& fn) const;
    std::vector<Cube> cubes(Reach reach) const;

private:
    Domain domain_;
    DyadicLattice base_;
    std::vector<DyadicLattice> lattices_;
};

// Sorted linear cell indices.
using CellSet = std::vector<std::uint32_t>;

struct SparseFamily {
    std::vector<Cube> cubes;
    std::vector<CellSet> witnesses;
    double eta = 0.5;
    int escalations = 0;
};

struct SparseVerification {
    bool ok = false;
    double worst_ratio = 0.0;
    std::size_t overlap_count = 0;
    std::size_t outside_count = 0;  // witness cells not inside their cube
};

SparseVerification verify_sparse(const SparseFamily& s, const Domain& dom);

nlohmann::json to_json(const SparseFamily& s, const Domain& dom);
SparseFamily sparse_from_json(const nlohmann::json& j, const Domain& dom);

std::vector<std::array<std::uint32_t, 2>> run_length_encode(const CellSet& cells);
CellSet run_length_decode(const std::vector<std::array<std::uint32_t, 2>>& runs);

}  // namespace roughwave

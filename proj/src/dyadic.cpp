#include "roughwave/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roughwave {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) noexcept { return -floor_div(-a, b); }

}  // namespace

CellRect CellRect::intersect(const CellRect& o) const noexcept {
    CellRect r{std::max(i0, o.i0), std::min(i1, o.i1), std::max(j0, o.j0), std::min(j1, o.j1)};
    if (r.empty()) return CellRect{};
    return r;
}

CellRect full_rect(const Domain& dom) noexcept {
    const auto n = static_cast<std::int64_t>(dom.resolution());
    return {0, n, 0, n};
}

std::vector<CellRect> rect_difference(const CellRect& outer, const CellRect& inner_raw) {
    std::vector<CellRect> out;
    const CellRect inner = outer.intersect(inner_raw);
    if (outer.empty()) return out;
    if (inner.empty()) {
        out.push_back(outer);
        return out;
    }
    auto push = [&](CellRect r) {
        if (!r.empty()) out.push_back(r);
    };
    push({outer.i0, inner.i0, outer.j0, outer.j1});
    push({inner.i1, outer.i1, outer.j0, outer.j1});
    push({inner.i0, inner.i1, outer.j0, inner.j0});
    push({inner.i0, inner.i1, inner.j1, outer.j1});
    return out;
}

CellRect support_rect(const GridFunction& f) {
    const auto n = static_cast<std::int64_t>(f.domain().resolution());
    CellRect r{n, 0, n, 0};
    bool any = false;
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j)
            if (f(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) != 0.0) {
                any = true;
                r.i0 = std::min(r.i0, i);
                r.i1 = std::max(r.i1, i + 1);
                r.j0 = std::min(r.j0, j);
                r.j1 = std::max(r.j1, j + 1);
            }
    return any ? r : CellRect{};
}

Cube Cube::dilate(std::int64_t factor) const {
    if (factor < 1 || factor % 2 == 0) throw std::invalid_argument("cube dilation factor must be odd");
    const std::int64_t grow = (factor - 1) / 2 * side;
    return Cube{i0 - grow, j0 - grow, side * factor};
}

std::array<double, 2> Cube::lower_corner(const Domain& dom) const noexcept {
    const double h = dom.cell_size();
    return {-dom.half_width() + static_cast<double>(i0) * h, -dom.half_width() + static_cast<double>(j0) * h};
}

DyadicLattice::DyadicLattice(std::int64_t factor, std::array<std::int64_t, 2> origin,
                             std::array<int, 2> residue, int k_min, int k_max)
    : factor_(factor), origin_(origin), residue_(residue), k_min_(k_min), k_max_(k_max) {
    if (factor < 1) throw std::invalid_argument("lattice factor must be positive");
    if (k_min < 0 || k_max < k_min) throw std::invalid_argument("bad lattice scale range");
    for (int r : residue)
        if (r < 0 || r > 2) throw std::invalid_argument("lattice residue must be 0, 1 or 2");
}

DyadicLattice DyadicLattice::standard(const Domain& dom) {
    return DyadicLattice(1, {0, 0}, {0, 0}, 0, dom.log2_resolution());
}

std::int64_t DyadicLattice::offset(int k, int axis) const noexcept {
    const int r0 = residue_[static_cast<std::size_t>(axis)];
    const int rk = (k % 2 == 0) ? r0 : (2 * r0) % 3;
    const std::int64_t shift = rk == 0 ? 0 : (rk == 1 ? 1 : -1);
    return origin_[static_cast<std::size_t>(axis)] + (shift << k);
}

Cube DyadicLattice::cube_containing(std::int64_t i, std::int64_t j, int k) const noexcept {
    const std::int64_t s = side(k);
    const std::int64_t oi = offset(k, 0), oj = offset(k, 1);
    return Cube{oi + floor_div(i - oi, s) * s, oj + floor_div(j - oj, s) * s, s};
}

std::vector<Cube> DyadicLattice::cubes_containing(std::int64_t i, std::int64_t j) const {
    std::vector<Cube> out;
    for (int k = k_max_; k >= k_min_; --k) out.push_back(cube_containing(i, j, k));
    return out;
}

std::vector<Cube> DyadicLattice::cubes_containing(const Domain& dom, double x, double y) const {
    const double h = dom.cell_size();
    const auto i = static_cast<std::int64_t>(std::floor((x + dom.half_width()) / h));
    const auto j = static_cast<std::int64_t>(std::floor((y + dom.half_width()) / h));
    const auto n = static_cast<std::int64_t>(dom.resolution());
    if (i < 0 || i >= n || j < 0 || j >= n) throw DomainError("point outside the domain");
    return cubes_containing(i, j);
}

int DyadicLattice::scale_of(const Cube& q) const noexcept {
    for (int k = k_min_; k <= k_max_; ++k) {
        if (side(k) != q.side) continue;
        const std::int64_t s = side(k);
        if ((q.i0 - offset(k, 0)) % s == 0 && (q.j0 - offset(k, 1)) % s == 0) return k;
        return -1;
    }
    return -1;
}

std::array<Cube, 4> DyadicLattice::children(const Cube& q) const {
    const int k = scale_of(q);
    if (k < 0) throw std::invalid_argument("cube is not in this lattice");
    if (k == k_min_) throw std::invalid_argument("finest lattice cubes have no children");
    const std::int64_t s = side(k - 1);
    return {Cube{q.i0, q.j0, s}, Cube{q.i0, q.j0 + s, s}, Cube{q.i0 + s, q.j0, s},
            Cube{q.i0 + s, q.j0 + s, s}};
}

std::vector<Cube> DyadicLattice::cubes_at(int k, const CellRect& region, bool contained) const {
    std::vector<Cube> out;
    if (region.empty()) return out;
    const std::int64_t s = side(k);
    const std::int64_t oi = offset(k, 0), oj = offset(k, 1);
    std::int64_t ai0, ai1, aj0, aj1;
    if (contained) {
        ai0 = ceil_div(region.i0 - oi, s);
        ai1 = floor_div(region.i1 - oi, s) - 1;
        aj0 = ceil_div(region.j0 - oj, s);
        aj1 = floor_div(region.j1 - oj, s) - 1;
    } else {
        ai0 = floor_div(region.i0 - oi, s);
        ai1 = floor_div(region.i1 - 1 - oi, s);
        aj0 = floor_div(region.j0 - oj, s);
        aj1 = floor_div(region.j1 - 1 - oj, s);
    }
    for (std::int64_t a = ai0; a <= ai1; ++a)
        for (std::int64_t b = aj0; b <= aj1; ++b) out.push_back(Cube{oi + a * s, oj + b * s, s});
    return out;
}

std::vector<DyadicLattice> three_lattice_cover(const DyadicLattice& d) {
    if (d.factor() != 1 || d.residue() != std::array<int, 2>{0, 0})
        throw std::invalid_argument("three-lattice cover needs an unshifted dyadic lattice");
    std::vector<DyadicLattice> out;
    const std::array<std::int64_t, 2> origin{d.offset(0, 0), d.offset(0, 1)};
    for (int rx = 0; rx < 3; ++rx)
        for (int ry = 0; ry < 3; ++ry) out.emplace_back(3, origin, std::array<int, 2>{rx, ry}, d.k_min(), d.k_max());
    return out;
}

CubeFamily::CubeFamily(const Domain& dom)
    : domain_(dom), base_(DyadicLattice::standard(dom)), lattices_(three_lattice_cover(base_)) {}

void CubeFamily::for_each(Reach reach, const std::function<void(const Cube&)>& fn) const {
    const auto n = static_cast<std::int64_t>(domain_.resolution());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) fn(Cube{i, j, 1});
    const CellRect box = full_rect(domain_);
    for (const auto& lat : lattices_)
        for (int k = lat.k_min(); k <= lat.k_max(); ++k)
            for (const Cube& q : lat.cubes_at(k, box, reach == Reach::contained)) fn(q);
}

std::vector<Cube> CubeFamily::cubes(Reach reach) const {
    std::vector<Cube> out;
    for_each(reach, [&](const Cube& q) { out.push_back(q); });
    return out;
}

SparseVerification verify_sparse(const SparseFamily& s, const Domain& dom) {
    SparseVerification v;
    v.worst_ratio = 1.0;
    if (s.cubes.size() != s.witnesses.size()) return v;
    std::vector<std::uint32_t> claims(dom.cell_count(), 0);
    const auto n = static_cast<std::int64_t>(dom.resolution());
    bool ratios_ok = true;
    for (std::size_t q = 0; q < s.cubes.size(); ++q) {
        const Cube& cube = s.cubes[q];
        std::size_t inside = 0;
        for (std::uint32_t c : s.witnesses[q]) {
            if (c >= dom.cell_count()) {
                ++v.outside_count;
                continue;
            }
            const std::int64_t i = c / n, j = c % n;
            if (!cube.rect().contains(i, j)) {
                ++v.outside_count;
                continue;
            }
            ++inside;
            if (claims[c]++ > 0) ++v.overlap_count;
        }
        const double ratio = static_cast<double>(inside) / static_cast<double>(cube.cell_count());
        v.worst_ratio = std::min(v.worst_ratio, ratio);
        if (static_cast<double>(inside) < s.eta * static_cast<double>(cube.cell_count())) ratios_ok = false;
    }
    v.ok = ratios_ok && v.overlap_count == 0 && v.outside_count == 0;
    return v;
}

std::vector<std::array<std::uint32_t, 2>> run_length_encode(const CellSet& cells) {
    std::vector<std::array<std::uint32_t, 2>> runs;
    for (std::uint32_t c : cells) {
        if (!runs.empty() && runs.back()[0] + runs.back()[1] == c)
            ++runs.back()[1];
        else
            runs.push_back({c, 1});
    }
    return runs;
}

CellSet run_length_decode(const std::vector<std::array<std::uint32_t, 2>>& runs) {
    CellSet out;
    for (const auto& [start, len] : runs)
        for (std::uint32_t k = 0; k < len; ++k) out.push_back(start + k);
    return out;
}

nlohmann::json to_json(const SparseFamily& s, const Domain& dom) {
    nlohmann::json cubes = nlohmann::json::array();
    for (std::size_t q = 0; q < s.cubes.size(); ++q) {
        const Cube& c = s.cubes[q];
        const auto corner = c.lower_corner(dom);
        cubes.push_back({{"lower_corner", {corner[0], corner[1]}},
                         {"side", c.side_length(dom)},
                         {"cell_corner", {c.i0, c.j0}},
                         {"cell_side", c.side},
                         {"witness_cell_count", s.witnesses[q].size()},
                         {"witness_runs", run_length_encode(s.witnesses[q])}});
    }
    return nlohmann::json{{"eta", s.eta},
                          {"escalations", s.escalations},
                          {"half_width", dom.half_width()},
                          {"resolution", dom.resolution()},
                          {"cubes", std::move(cubes)}};
}

SparseFamily sparse_from_json(const nlohmann::json& j, const Domain& dom) {
    SparseFamily s;
    s.eta = j.at("eta").get<double>();
    s.escalations = j.value("escalations", 0);
    for (const auto& c : j.at("cubes")) {
        const auto corner = c.at("cell_corner").get<std::array<std::int64_t, 2>>();
        s.cubes.push_back(Cube{corner[0], corner[1], c.at("cell_side").get<std::int64_t>()});
        auto runs = c.at("witness_runs").get<std::vector<std::array<std::uint32_t, 2>>>();
        s.witnesses.push_back(run_length_decode(runs));
        if (s.witnesses.back().size() != c.at("witness_cell_count").get<std::size_t>())
            throw ParseError("witness count does not match its runs");
    }
    (void)dom;
    return s;
}

}  // namespace roughwave

#include "roughwave/czd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "roughwave/sum.hpp"

namespace roughwave {

double CZDecomposition::level_threshold(int l) const {
    if (l == 0) return std::exp2(c1) * threshold;
    return std::exp2(c1 * std::ldexp(1.0, l)) * threshold;
}

GridFunction CZDecomposition::piece_function(std::size_t index, int part) const {
    const Domain& dom = original.domain();
    const CZLevelPiece& p = pieces.at(index);
    std::vector<double> v(dom.cell_count(), 0.0);
    if (part != 0) {
        const CellRect r = cubes[p.cube].rect();
        const double sign = part == 1 ? 1.0 : -1.0;
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j)
                v[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = sign * p.mean;
    }
    if (part != 1)
        for (std::uint32_t c : p.cells) v[c] += original.values()[c];
    return GridFunction(dom, std::move(v));
}

namespace {

void find_stopping_cubes(const GridFunction& f, const DyadicLattice& lattice, const Cube& q, int k, double threshold,
                         std::vector<Cube>& out) {
    const CellRect r = q.rect();
    CompensatedSum s;
    for (std::int64_t i = r.i0; i < r.i1; ++i)
        for (std::int64_t j = r.j0; j < r.j1; ++j)
            s.add(std::abs(f(static_cast<std::size_t>(i), static_cast<std::size_t>(j))));
    if (s.value() == 0.0) return;
    if (s.value() / static_cast<double>(q.cell_count()) > threshold) {
        out.push_back(q);
        return;
    }
    if (k == lattice.k_min()) return;
    for (const Cube& c : lattice.children(q)) find_stopping_cubes(f, lattice, c, k - 1, threshold, out);
}

}  // namespace

CZDecomposition cz_decompose(const GridFunction& f, double lambda, const DyadicLattice& lattice, double c1) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
    if (!(c1 > 0.0 && c1 < 0.25)) throw std::invalid_argument("c1 must lie in (0, 1/4)");
    const Domain& dom = f.domain();
    const CellRect box = full_rect(dom);
    CZDecomposition dec{lambda, c1, 1.0 / lambda, f, {}, GridFunction(dom), {}, 0};

    for (const Cube& top : lattice.cubes_at(lattice.k_max(), box, true))
        find_stopping_cubes(f, lattice, top, lattice.k_max(), dec.threshold, dec.cubes);
    std::sort(dec.cubes.begin(), dec.cubes.end());

    std::vector<double> good(f.values().begin(), f.values().end());
    double top_value = 0.0;
    for (const Cube& q : dec.cubes) {
        const CellRect r = q.rect();
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j)
                top_value = std::max(top_value, std::abs(f(static_cast<std::size_t>(i), static_cast<std::size_t>(j))));
    }
    int l_max = 0;
    while (dec.level_threshold(l_max) < top_value) ++l_max;
    dec.max_level = l_max;

    for (std::size_t qi = 0; qi < dec.cubes.size(); ++qi) {
        const Cube& q = dec.cubes[qi];
        const CellRect r = q.rect();
        std::vector<CZLevelPiece> levels(static_cast<std::size_t>(l_max));
        std::vector<CompensatedSum> sums(static_cast<std::size_t>(l_max));
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j) {
                const auto c = static_cast<std::uint32_t>(dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
                const double v = f.values()[c];
                const double a = std::abs(v);
                if (a <= dec.level_threshold(0)) continue;
                good[c] = 0.0;
                int l = 1;
                while (a > dec.level_threshold(l)) ++l;
                levels[static_cast<std::size_t>(l - 1)].cells.push_back(c);
                sums[static_cast<std::size_t>(l - 1)].add(v);
            }
        for (int l = 1; l <= l_max; ++l) {
            auto& piece = levels[static_cast<std::size_t>(l - 1)];
            if (piece.cells.empty()) continue;
            piece.cube = qi;
            piece.level = l;
            piece.mean = sums[static_cast<std::size_t>(l - 1)].value() / static_cast<double>(q.cell_count());
            dec.pieces.push_back(std::move(piece));
        }
    }
    dec.good = GridFunction(dom, std::move(good));
    return dec;
}

GridFunction aggregate(const CZDecomposition& dec, CZAggregate which, int l, int j) {
    const Domain& dom = dec.original.domain();
    std::vector<double> v(dom.cell_count(), 0.0);
    const int part = which == CZAggregate::g_all ? 0 : (which == CZAggregate::g_averaged ? 1 : 2);
    for (std::size_t k = 0; k < dec.pieces.size(); ++k) {
        const auto& p = dec.pieces[k];
        if (p.level != l) continue;
        if (j >= 0 && dec.cubes[p.cube].side != (std::int64_t{1} << j)) continue;
        const GridFunction b = dec.piece_function(k, part);
        for (std::size_t c = 0; c < v.size(); ++c) v[c] += b.values()[c];
    }
    return GridFunction(dom, std::move(v));
}

CZConstants cz_constants(const CZDecomposition& dec) {
    CZConstants out;
    const Domain& dom = dec.original.domain();
    const double area = dom.cell_area();
    const double f1 = lp_norm(dec.original, 1.0);

    std::vector<double> recon(dec.good.values().begin(), dec.good.values().end());
    std::vector<double> avg_abs(dom.cell_count(), 0.0);
    for (std::size_t k = 0; k < dec.pieces.size(); ++k) {
        const auto& p = dec.pieces[k];
        const GridFunction b1 = dec.piece_function(k, 1);
        const GridFunction b2 = dec.piece_function(k, 2);
        CompensatedSum integral, l1, level_mass;
        for (std::size_t c = 0; c < recon.size(); ++c) {
            recon[c] += b1.values()[c] + b2.values()[c];
            avg_abs[c] += std::abs(b1.values()[c]);
            integral.add(b2.values()[c]);
            l1.add(std::abs(b2.values()[c]));
        }
        for (std::uint32_t c : p.cells) level_mass.add(std::abs(dec.original.values()[c]));
        if (l1.value() > 0.0) out.mean_zero = std::max(out.mean_zero, std::abs(integral.value()) / l1.value());
        if (level_mass.value() > 0.0) out.l1_ratio = std::max(out.l1_ratio, l1.value() / level_mass.value());
    }
    for (std::size_t c = 0; c < recon.size(); ++c)
        out.reconstruction = std::max(out.reconstruction, std::abs(recon[c] - dec.original.values()[c]));

    std::vector<double> g1_sum(dom.cell_count(), 0.0);
    for (int l = 1; l <= dec.max_level; ++l) {
        const GridFunction gl = aggregate(dec, CZAggregate::g_all, l);
        const GridFunction g1 = aggregate(dec, CZAggregate::g_averaged, l);
        for (std::size_t c = 0; c < g1_sum.size(); ++c) g1_sum[c] += std::abs(g1.values()[c]);
        if (f1 > 0.0) {
            const double l2 = lp_norm(gl, 2.0);
            out.ii = std::max(out.ii, l2 * l2 / (dec.level_threshold(l) * f1));
        }
    }
    double sup_avg = 0.0;
    for (double v : avg_abs) sup_avg = std::max(sup_avg, v);
    out.iii = sup_avg / dec.threshold;
    out.iv = dec.good.sup_norm() / dec.level_threshold(0);
    if (f1 > 0.0) {
        CompensatedSum s1, s2;
        for (double v : g1_sum) {
            s1.add(v);
            s2.add(v * v);
        }
        out.eq2_6 = s1.value() * area / f1;
        out.eq2_6_l2 = s2.value() * area * dec.lambda / f1;
    }

    std::vector<char> in_union(dom.cell_count(), 0), in_dilate(dom.cell_count(), 0);
    const CellRect box = full_rect(dom);
    for (const Cube& q : dec.cubes) {
        const CellRect r = q.rect();
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j)
                in_union[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = 1;
        // 72 P: centered dilate, rounded out to whole cells.
        const std::int64_t grow = (71 * q.side + 1) / 2;
        const CellRect d = CellRect{q.i0 - grow, q.i0 + q.side + grow, q.j0 - grow, q.j0 + q.side + grow}.intersect(box);
        for (std::int64_t i = d.i0; i < d.i1; ++i)
            for (std::int64_t j = d.j0; j < d.j1; ++j)
                in_dilate[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] = 1;
    }
    out.measure_of_union = static_cast<double>(std::count(in_union.begin(), in_union.end(), 1)) * area;
    out.dilate_measure = static_cast<double>(std::count(in_dilate.begin(), in_dilate.end(), 1)) * area;
    return out;
}

nlohmann::json cz_report(const CZDecomposition& dec, const CZConstants& c) {
    return nlohmann::json{{"lambda", dec.lambda},
                          {"c1", dec.c1},
                          {"num_cubes", dec.cubes.size()},
                          {"measure_of_union", c.measure_of_union},
                          {"constants", {{"ii", c.ii}, {"iii", c.iii}, {"iv", c.iv}, {"eq2_6", c.eq2_6}}},
                          {"diagnostics",
                           {{"eq2_6_l2", c.eq2_6_l2},
                            {"mean_zero", c.mean_zero},
                            {"l1_ratio", c.l1_ratio},
                            {"reconstruction", c.reconstruction},
                            {"dilate_measure", c.dilate_measure},
                            {"max_level", dec.max_level}}}};
}

}  // namespace roughwave

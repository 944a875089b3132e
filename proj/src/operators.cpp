#include "roughwave/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "roughwave/convolution.hpp"
#include "roughwave/parallel.hpp"
#include "roughwave/sum.hpp"

namespace roughwave {

namespace {

std::int64_t span_of(const Domain& dom) { return static_cast<std::int64_t>(dom.resolution()) - 1; }

// Offsets with lo <= |z| < hi (lengths in cell units; hi may be infinite).
OffsetKernel ring(const RoughKernel& k, const Domain& dom, double lo, double hi) {
    const std::int64_t radius =
        std::isinf(hi) ? span_of(dom) : std::min(span_of(dom), static_cast<std::int64_t>(std::ceil(hi)));
    const double h = dom.cell_size();
    const double lo2 = lo * lo * (1.0 - 1e-12);
    const double hi2 = std::isinf(hi) ? std::numeric_limits<double>::infinity() : hi * hi * (1.0 - 1e-12);
    OffsetKernel out(radius);
    for (std::int64_t di = -radius; di <= radius; ++di)
        for (std::int64_t dj = -radius; dj <= radius; ++dj) {
            const auto r2 = static_cast<double>(di * di + dj * dj);
            if (r2 == 0.0 || r2 < lo2 || r2 >= hi2) continue;
            out.set(di, dj, k(static_cast<double>(di), static_cast<double>(dj)) / (h * h * r2));
        }
    out.finalize();
    return out;
}

std::vector<OffsetKernel> truncation_layers(const RoughKernel& k, const Domain& dom, const TruncationGrid& grid) {
    if (grid.epsilons.empty()) throw std::invalid_argument("empty truncation grid");
    const double h = dom.cell_size();
    if (grid.epsilons.front() < h * (1.0 - 1e-12)) throw std::invalid_argument("truncation radius below one cell");
    for (std::size_t i = 1; i < grid.epsilons.size(); ++i)
        if (!(grid.epsilons[i] > grid.epsilons[i - 1]))
            throw std::invalid_argument("truncation radii must increase");
    std::vector<OffsetKernel> layers;
    for (std::size_t i = 0; i < grid.epsilons.size(); ++i) {
        const double lo = grid.epsilons[i] / h;
        const double hi = i + 1 < grid.epsilons.size() ? grid.epsilons[i + 1] / h
                                                       : std::numeric_limits<double>::infinity();
        layers.push_back(ring(k, dom, lo, hi));
    }
    return layers;
}

void require_resolvable(const KernelBank& bank, int shift) {
    for (const auto& p : bank.pieces)
        if (std::ldexp(1.0, p.j - shift) < bank.domain.cell_size() * (1.0 - 1e-12))
            throw ScaleRangeError("piece 2^" + std::to_string(p.j) + " is not resolvable after mollification at 2^" +
                                  std::to_string(p.j - shift));
}

}  // namespace

TruncationGrid TruncationGrid::geometric(const Domain& dom) {
    TruncationGrid g;
    const double h = dom.cell_size();
    int k = 0;
    for (;; ++k) {
        g.epsilons.push_back(std::ldexp(h, k));
        if (g.epsilons.back() >= dom.diameter()) break;
    }
    return g;
}

OperatorHandle OperatorHandle::from_layers(Kind kind, const Domain& dom, std::vector<OffsetKernel> layers,
                                           bool maximal, double omega_sup) {
    if (!maximal && layers.size() > 1) throw std::invalid_argument("linear operators take a single layer");
    return OperatorHandle(kind, dom, std::move(layers), maximal, omega_sup);
}

OperatorHandle OperatorHandle::singular(const RoughKernel& k, const Domain& dom) {
    std::vector<OffsetKernel> layers;
    layers.push_back(full_kernel(k, dom));
    return OperatorHandle(Kind::singular, dom, std::move(layers), false, k.sup_norm());
}

OperatorHandle OperatorHandle::truncated(const RoughKernel& k, const Domain& dom, double eps) {
    if (eps < dom.cell_size() * (1.0 - 1e-12)) throw std::invalid_argument("truncation radius below one cell");
    std::vector<OffsetKernel> layers;
    layers.push_back(ring(k, dom, eps / dom.cell_size(), std::numeric_limits<double>::infinity()));
    return OperatorHandle(Kind::truncated, dom, std::move(layers), false, k.sup_norm());
}

OperatorHandle OperatorHandle::maximal_truncation(const RoughKernel& k, const Domain& dom,
                                                  const TruncationGrid& grid) {
    return OperatorHandle(Kind::maximal_truncation, dom, truncation_layers(k, dom, grid), true, k.sup_norm());
}

OperatorHandle OperatorHandle::lacunary(const KernelBank& bank) {
    std::vector<OffsetKernel> layers;
    const std::int64_t span = span_of(bank.domain);
    for (const auto& p : bank.pieces) layers.push_back(p.table.cropped(std::min(span, p.table.radius())));
    if (layers.empty()) layers.push_back(OffsetKernel(0));
    layers.front() += bank.near_field;
    return OperatorHandle(Kind::lacunary, bank.domain, std::move(layers), true, bank.omega_sup);
}

OperatorHandle OperatorHandle::lacunary(std::span<const KernelPiece> pieces, const Domain& dom, double omega_sup) {
    std::vector<OffsetKernel> layers;
    const std::int64_t span = span_of(dom);
    for (const auto& p : pieces) layers.push_back(p.table.cropped(std::min(span, p.table.radius())));
    return OperatorHandle(Kind::lacunary, dom, std::move(layers), true, omega_sup);
}

OperatorHandle OperatorHandle::piece_sum(const KernelBank& bank) {
    OffsetKernel total(0);
    total.finalize();
    const std::int64_t span = span_of(bank.domain);
    for (const auto& p : bank.pieces) total += p.table.cropped(std::min(span, p.table.radius()));
    std::vector<OffsetKernel> layers;
    layers.push_back(std::move(total));
    return OperatorHandle(Kind::piece_sum, bank.domain, std::move(layers), false, bank.omega_sup);
}

OperatorHandle OperatorHandle::mollified(const KernelBank& bank, const Mollifier& moll, int l) {
    if (l < 0) throw std::invalid_argument("mollification index l must be >= 0");
    if (!moll.is_delta()) require_resolvable(bank, l);
    std::vector<OffsetKernel> layers;
    layers.push_back(mollified_kernel(bank.pieces, moll, l, bank.domain));
    return OperatorHandle(Kind::mollified, bank.domain, std::move(layers), false, bank.omega_sup);
}

OperatorHandle OperatorHandle::lacunary_mollified(const KernelBank& bank, const Mollifier& moll, int l) {
    if (l < 0) throw std::invalid_argument("mollification index l must be >= 0");
    if (!moll.is_delta()) require_resolvable(bank, l);
    std::vector<OffsetKernel> layers;
    for (const auto& p : bank.pieces) layers.push_back(mollify_piece(p, moll, p.j - l, bank.domain));
    return OperatorHandle(Kind::lacunary_mollified, bank.domain, std::move(layers), true, bank.omega_sup);
}

OperatorHandle OperatorHandle::difference_sup(const KernelBank& bank, const Mollifier& moll, int m) {
    if (m < 1) throw std::invalid_argument("difference index m must be >= 1");
    if (!moll.is_delta()) require_resolvable(bank, 1 << m);
    return OperatorHandle(Kind::difference_sup, bank.domain, difference_kernel(bank.pieces, moll, m, bank.domain),
                          true, bank.omega_sup);
}

OperatorHandle OperatorHandle::zero(const Domain& dom) { return OperatorHandle(Kind::zero, dom, {}, true, 0.0); }

LayeredField OperatorHandle::partial_sums(const GridFunction& f, std::span<const CellRect> sources,
                                          const CellRect& target) const {
    require_same_domain(f.domain(), domain_);
    LayeredField out;
    out.frame = target;
    out.layers = layers_.size();
    const auto area = static_cast<std::size_t>(target.area());
    out.data.assign(out.layers * area, 0.0);
    const double cell_area = domain_.cell_area();
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        std::span<double> slot(out.data.data() + l * area, area);
        for (const CellRect& s : sources) accumulate_convolution(f, layers_[l], s, target, slot, cell_area);
    }
    for (std::size_t l = layers_.size(); l-- > 1;) {
        const double* above = out.data.data() + l * area;
        double* here = out.data.data() + (l - 1) * area;
        for (std::size_t c = 0; c < area; ++c) here[c] += above[c];
    }
    return out;
}

void OperatorHandle::magnitudes(const LayeredField& sums, std::vector<double>& out) const {
    const auto area = static_cast<std::size_t>(sums.frame.area());
    out.assign(area, 0.0);
    const std::size_t used = maximal_ ? sums.layers : std::min<std::size_t>(1, sums.layers);
    for (std::size_t l = 0; l < used; ++l) {
        const double* p = sums.data.data() + l * area;
        for (std::size_t c = 0; c < area; ++c) out[c] = std::max(out[c], std::abs(p[c]));
    }
}

GridFunction OperatorHandle::apply(const GridFunction& f) const {
    const CellRect box = full_rect(domain_);
    const CellRect supp = support_rect(f);
    if (supp.empty() || layers_.empty()) return GridFunction(domain_);
    const CellRect sources[] = {supp};
    const LayeredField sums = partial_sums(f, sources, box);
    if (!maximal_) {
        std::vector<double> v(sums.data.begin(), sums.data.begin() + static_cast<std::ptrdiff_t>(box.area()));
        return GridFunction(domain_, std::move(v));
    }
    std::vector<double> v;
    magnitudes(sums, v);
    return GridFunction(domain_, std::move(v));
}

GridFunction singular_integral(const GridFunction& f, const RoughKernel& k) {
    return OperatorHandle::singular(k, f.domain()).apply(f);
}

GridFunction truncated_integral(const GridFunction& f, const RoughKernel& k, double eps) {
    return OperatorHandle::truncated(k, f.domain(), eps).apply(f);
}

GridFunction maximal_truncation(const GridFunction& f, const RoughKernel& k, const TruncationGrid& grid) {
    return OperatorHandle::maximal_truncation(k, f.domain(), grid).apply(f);
}

GridFunction lacunary_maximal(const GridFunction& f, std::span<const KernelPiece> pieces) {
    return OperatorHandle::lacunary(pieces, f.domain(), 0.0).apply(f);
}

GridFunction mollified_operator(const GridFunction& f, const KernelBank& bank, const Mollifier& moll, int l) {
    return OperatorHandle::mollified(bank, moll, l).apply(f);
}

GridFunction lacunary_mollified(const GridFunction& f, const KernelBank& bank, const Mollifier& moll, int l) {
    return OperatorHandle::lacunary_mollified(bank, moll, l).apply(f);
}

GridFunction difference_sup(const GridFunction& f, const KernelBank& bank, const Mollifier& moll, int m) {
    return OperatorHandle::difference_sup(bank, moll, m).apply(f);
}

namespace {

// Cubes grouped so that each group is pairwise disjoint.
std::vector<std::vector<Cube>> disjoint_groups(const CubeFamily& family, CubeFamily::Reach reach) {
    std::vector<std::vector<Cube>> groups;
    const Domain& dom = family.domain();
    const auto n = static_cast<std::int64_t>(dom.resolution());
    std::vector<Cube> cells;
    cells.reserve(dom.cell_count());
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) cells.push_back(Cube{i, j, 1});
    groups.push_back(std::move(cells));
    const CellRect box = full_rect(dom);
    for (const auto& lat : family.lattices())
        for (int k = lat.k_min(); k <= lat.k_max(); ++k) {
            auto cubes = lat.cubes_at(k, box, reach == CubeFamily::Reach::contained);
            if (!cubes.empty()) groups.push_back(std::move(cubes));
        }
    return groups;
}

}  // namespace

GridFunction hl_maximal(const GridFunction& f, const CubeFamily& family, double r) {
    if (!(r >= 1.0)) throw std::invalid_argument("hl_maximal needs r >= 1");
    require_same_domain(f.domain(), family.domain());
    const Domain& dom = f.domain();
    const CellRect box = full_rect(dom);
    std::vector<double> powered(f.size());
    for (std::size_t c = 0; c < f.size(); ++c) {
        const double a = std::abs(f.values()[c]);
        powered[c] = r == 1.0 ? a : std::pow(a, r);
    }
    std::vector<double> best(powered);
    for (const auto& group : disjoint_groups(family, CubeFamily::Reach::intersecting)) {
        if (group.front().side == 1) continue;
        parallel_for(0, group.size(), [&](std::size_t g) {
            const Cube& q = group[g];
            const CellRect rc = q.rect().intersect(box);
            CompensatedSum s;
            for (std::int64_t i = rc.i0; i < rc.i1; ++i)
                for (std::int64_t j = rc.j0; j < rc.j1; ++j)
                    s.add(powered[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))]);
            const double avg = s.value() / static_cast<double>(q.cell_count());
            for (std::int64_t i = rc.i0; i < rc.i1; ++i)
                for (std::int64_t j = rc.j0; j < rc.j1; ++j) {
                    double& b = best[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
                    b = std::max(b, avg);
                }
        });
    }
    if (r != 1.0)
        for (double& b : best) b = std::pow(b, 1.0 / r);
    return GridFunction(dom, std::move(best));
}

Rearrangement::Rearrangement(std::vector<std::pair<double, double>> vm) {
    for (auto& [v, m] : vm) {
        if (!(m > 0.0)) throw std::invalid_argument("rearrangement measures must be positive");
        v = std::abs(v);
    }
    std::stable_sort(vm.begin(), vm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    CompensatedSum total;
    for (const auto& [v, m] : vm) {
        total.add(m);
        values_.push_back(v);
        cumulative_.push_back(total.value());
    }
}

double Rearrangement::operator()(double t) const noexcept {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), t);
    if (it == cumulative_.end()) return 0.0;
    return values_[static_cast<std::size_t>(it - cumulative_.begin())];
}

double Rearrangement::distribution(double alpha) const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size() && values_[k] > alpha; ++k) m = cumulative_[k];
    return m;
}

std::size_t rearrangement_rank(std::size_t n, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
    const auto above = static_cast<std::size_t>(std::floor(lambda * static_cast<double>(n) * (1.0 + 1e-12)));
    return n - std::min(above, n - 1);
}

namespace {

// Profile of |T(f chi_{supp \ 3Q})| on Q, with the global partial sums given.
void cube_profile(const GridFunction& f, const OperatorHandle& t, const LayeredField& global, const CellRect& supp,
                  const Cube& q, std::vector<double>& out) {
    const CellRect target = q.rect().intersect(full_rect(f.domain()));
    const auto area = static_cast<std::size_t>(target.area());
    const CellRect inner = q.dilate(3).rect().intersect(supp);
    if (supp.empty() || inner == supp || t.layer_count() == 0) {
        out.assign(area, 0.0);
        return;
    }
    if (inner.empty()) {
        LayeredField local;
        local.frame = target;
        local.layers = global.layers;
        local.data.resize(local.layers * area);
        for (std::size_t l = 0; l < local.layers; ++l)
            for (std::int64_t i = target.i0; i < target.i1; ++i)
                for (std::int64_t j = target.j0; j < target.j1; ++j)
                    local.data[l * area + static_cast<std::size_t>((i - target.i0) * target.cols() + (j - target.j0))] =
                        global.at(l, i, j);
        t.magnitudes(local, out);
        return;
    }
    if (inner.area() <= supp.area() - inner.area()) {
        const CellRect sources[] = {inner};
        LayeredField local = t.partial_sums(f, sources, target);
        for (std::size_t l = 0; l < local.layers; ++l)
            for (std::int64_t i = target.i0; i < target.i1; ++i)
                for (std::int64_t j = target.j0; j < target.j1; ++j) {
                    double& v =
                        local.data[l * area + static_cast<std::size_t>((i - target.i0) * target.cols() + (j - target.j0))];
                    v = global.at(l, i, j) - v;
                }
        t.magnitudes(local, out);
    } else {
        const auto sources = rect_difference(supp, inner);
        const LayeredField local = t.partial_sums(f, sources, target);
        t.magnitudes(local, out);
    }
}

}  // namespace

std::vector<double> excised_profile(const GridFunction& f, const OperatorHandle& t, const Cube& q) {
    const CellRect box = full_rect(f.domain());
    const CellRect target = q.rect().intersect(box);
    const CellRect inner = q.dilate(3).rect().intersect(box);
    const auto sources = rect_difference(box, inner);
    const LayeredField local = t.partial_sums(f, sources, target);
    std::vector<double> out;
    t.magnitudes(local, out);
    return out;
}

TruncatedMaximals truncated_maximals(const GridFunction& f, const OperatorHandle& t, const CubeFamily& family,
                                     std::span<const double> lambdas, std::span<const double> ps) {
    require_same_domain(f.domain(), family.domain());
    require_same_domain(f.domain(), t.domain());
    for (double l : lambdas)
        if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
    for (double p : ps)
        if (!(p > 0.0)) throw std::invalid_argument("sharp maximal needs p > 0");
    const Domain& dom = f.domain();
    const CellRect box = full_rect(dom);
    const CellRect supp = support_rect(f);
    LayeredField global;
    if (!supp.empty()) {
        const CellRect sources[] = {supp};
        global = t.partial_sums(f, sources, box);
    }
    std::vector<std::vector<double>> grand(lambdas.size(), std::vector<double>(dom.cell_count(), 0.0));
    std::vector<std::vector<double>> sharp(ps.size(), std::vector<double>(dom.cell_count(), 0.0));
    if (!supp.empty()) {
        for (const auto& group : disjoint_groups(family, CubeFamily::Reach::contained)) {
            parallel_for(0, group.size(), [&](std::size_t g) {
                const Cube& q = group[g];
                std::vector<double> profile;
                cube_profile(f, t, global, supp, q, profile);
                const CellRect rc = q.rect();
                auto assign = [&](std::vector<double>& dst, double v) {
                    if (v == 0.0) return;
                    for (std::int64_t i = rc.i0; i < rc.i1; ++i)
                        for (std::int64_t j = rc.j0; j < rc.j1; ++j) {
                            double& d = dst[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
                            d = std::max(d, v);
                        }
                };
                const std::size_t n = profile.size();
                for (std::size_t a = 0; a < ps.size(); ++a) {
                    double v = 0.0;
                    if (std::isinf(ps[a])) {
                        for (double x : profile) v = std::max(v, x);
                    } else {
                        double top = 0.0;
                        for (double x : profile) top = std::max(top, x);
                        if (top > 0.0) {
                            CompensatedSum s;
                            for (double x : profile) s.add(std::pow(x / top, ps[a]));
                            v = top * std::pow(s.value() / static_cast<double>(n), 1.0 / ps[a]);
                        }
                    }
                    assign(sharp[a], v);
                }
                if (!lambdas.empty()) {
                    std::vector<double> sorted = profile;
                    for (std::size_t a = 0; a < lambdas.size(); ++a) {
                        const std::size_t rank = rearrangement_rank(n, lambdas[a]);
                        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                                         sorted.end());
                        assign(grand[a], sorted[rank - 1]);
                    }
                }
            });
        }
    }
    TruncatedMaximals out;
    for (auto& g : grand) out.grand.emplace_back(dom, std::move(g));
    for (auto& s : sharp) out.sharp.emplace_back(dom, std::move(s));
    return out;
}

GridFunction grand_maximal(const GridFunction& f, double lambda, const OperatorHandle& t, const CubeFamily& family) {
    const double lambdas[] = {lambda};
    return std::move(truncated_maximals(f, t, family, lambdas, {}).grand.front());
}

GridFunction sharp_maximal(const GridFunction& f, double p, const OperatorHandle& t, const CubeFamily& family) {
    const double ps[] = {p};
    return std::move(truncated_maximals(f, t, family, {}, ps).sharp.front());
}

GridFunction commutator_maximal(const GridFunction& f, const GridFunction& b, const RoughKernel& k,
                                const TruncationGrid& grid) {
    require_same_domain(f.domain(), b.domain());
    const Domain& dom = f.domain();
    const OperatorHandle t = OperatorHandle::maximal_truncation(k, dom, grid);
    const CellRect box = full_rect(dom);
    const CellRect supp = support_rect(f);
    if (supp.empty()) return GridFunction(dom);
    const CellRect sources[] = {supp};
    const LayeredField pf = t.partial_sums(f, sources, box);
    const LayeredField pbf = t.partial_sums(b * f, sources, box);
    std::vector<double> out(dom.cell_count(), 0.0);
    const std::size_t area = dom.cell_count();
    for (std::size_t l = 0; l < pf.layers; ++l)
        for (std::size_t c = 0; c < area; ++c) {
            const double v = b.values()[c] * pf.data[l * area + c] - pbf.data[l * area + c];
            out[c] = std::max(out[c], std::abs(v));
        }
    return GridFunction(dom, std::move(out));
}

double bmo_seminorm(const GridFunction& b, const CubeFamily& family) {
    double best = 0.0;
    family.for_each(CubeFamily::Reach::contained, [&](const Cube& q) {
        if (q.side == 1) return;
        const CellRect r = q.rect();
        CompensatedSum s;
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j) s.add(b(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        const double mean = s.value() / static_cast<double>(q.cell_count());
        CompensatedSum dev;
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j)
                dev.add(std::abs(b(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) - mean));
        best = std::max(best, dev.value() / static_cast<double>(q.cell_count()));
    });
    return best;
}

}  // namespace roughwave

#include "roughwave/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "roughwave/errors.hpp"
#include "roughwave/parallel.hpp"
#include "roughwave/sum.hpp"

namespace roughwave {

void SparseBuildParams::validate() const {
    if (!(threshold_multiplier > 1.0)) throw std::invalid_argument("threshold multiplier must exceed 1");
    if (!(eta_target > 0.0 && eta_target <= 0.75)) throw std::invalid_argument("eta target must lie in (0, 3/4]");
    if (max_depth < 0) throw std::invalid_argument("max depth must be nonnegative");
    if (!(escalation_factor > 1.0)) throw std::invalid_argument("escalation factor must exceed 1");
    if (max_escalations < 0) throw std::invalid_argument("max escalations must be nonnegative");
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0, 1)");
}

namespace {

std::size_t offset_in(const CellRect& frame, std::int64_t i, std::int64_t j) {
    return static_cast<std::size_t>((i - frame.i0) * frame.cols() + (j - frame.j0));
}

// T(f chi_{3P}) on P for every proper cube P of the standard lattice.
class LocalSums {
public:
    LocalSums(const GridFunction& f, const OperatorHandle& t) : n_(static_cast<std::int64_t>(f.domain().resolution())) {
        const CellRect box = full_rect(f.domain());
        const CellRect supp = support_rect(f);
        const int top = f.domain().log2_resolution();
        fields_.resize(static_cast<std::size_t>(top));
        for (int k = 0; k < top; ++k) {
            const std::int64_t per_row = n_ >> k;
            auto& level = fields_[static_cast<std::size_t>(k)];
            level.resize(static_cast<std::size_t>(per_row * per_row));
            parallel_for(0, level.size(), [&](std::size_t idx) {
                const Cube p{static_cast<std::int64_t>(idx) / per_row << k, static_cast<std::int64_t>(idx) % per_row << k,
                             std::int64_t{1} << k};
                const CellRect src = p.dilate(3).rect().intersect(box).intersect(supp);
                if (src.empty()) return;
                const CellRect sources[] = {src};
                level[idx] = t.partial_sums(f, sources, p.rect());
            });
        }
    }

    // Empty data means the field vanishes.
    const LayeredField& at(const Cube& p, int k) const {
        const std::int64_t per_row = n_ >> k;
        return fields_[static_cast<std::size_t>(k)][static_cast<std::size_t>((p.i0 >> k) * per_row + (p.j0 >> k))];
    }

private:
    std::int64_t n_;
    std::vector<std::vector<LayeredField>> fields_;
};

// M_loc on the cells of Q, row-major in Q.
std::vector<double> local_grand_maximal(const GridFunction& f, const OperatorHandle& t, const LocalSums& locals,
                                        const Cube& q, int q_scale, double lambda) {
    const CellRect box = full_rect(f.domain());
    const CellRect frame = q.rect();
    std::vector<double> out(static_cast<std::size_t>(frame.area()), 0.0);
    const CellRect src = q.dilate(3).rect().intersect(box).intersect(support_rect(f));
    if (src.empty() || t.layer_count() == 0) return out;
    const CellRect sources[] = {src};
    const LayeredField global = t.partial_sums(f, sources, frame);

    std::vector<double> profile, sorted;
    LayeredField diff;
    for (int k = q_scale - 1; k >= 0; --k) {
        const std::int64_t side = std::int64_t{1} << k;
        for (std::int64_t a = frame.i0; a < frame.i1; a += side)
            for (std::int64_t b = frame.j0; b < frame.j1; b += side) {
                const Cube p{a, b, side};
                const LayeredField& local = locals.at(p, k);
                diff.frame = p.rect();
                diff.layers = global.layers;
                const auto area = static_cast<std::size_t>(p.cell_count());
                diff.data.assign(diff.layers * area, 0.0);
                for (std::size_t l = 0; l < diff.layers; ++l)
                    for (std::int64_t i = a; i < a + side; ++i)
                        for (std::int64_t j = b; j < b + side; ++j) {
                            const std::size_t c = offset_in(diff.frame, i, j);
                            const double near = local.data.empty() ? 0.0 : local.data[l * area + c];
                            diff.data[l * area + c] = global.at(l, i, j) - near;
                        }
                t.magnitudes(diff, profile);
                sorted = profile;
                const std::size_t rank = rearrangement_rank(area, lambda);
                std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
                const double v = sorted[rank - 1];
                if (v == 0.0) continue;
                for (std::int64_t i = a; i < a + side; ++i)
                    for (std::int64_t j = b; j < b + side; ++j) {
                        double& d = out[offset_in(frame, i, j)];
                        d = std::max(d, v);
                    }
            }
    }
    return out;
}

struct StopData {
    std::vector<double> mloc;
    double mloc_threshold = 0.0;  // median, or mean when the median vanishes
    double orlicz_average = 0.0;
};

StopData stop_data(const GridFunction& f, const OperatorHandle& t, const LocalSums& locals, const Cube& q, int k,
                   double lambda) {
    StopData s;
    s.mloc = local_grand_maximal(f, t, locals, q, k, lambda);
    std::vector<double> sorted = s.mloc;
    const std::size_t mid = (sorted.size() - 1) / 2;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
    s.mloc_threshold = sorted[mid];
    if (s.mloc_threshold == 0.0) s.mloc_threshold = compensated_sum(s.mloc) / static_cast<double>(s.mloc.size());
    s.orlicz_average = luxemburg_norm(f, q.dilate(3), YoungFunction::phi());
    return s;
}

struct Node {
    Cube cube;
    int scale = 0;
    int depth = 0;
};

struct Split {
    std::vector<Node> children;
    CellSet witness;
};

Split split_cube(const GridFunction& f, const Node& node, const StopData& s, double a, int max_depth) {
    const Domain& dom = f.domain();
    const CellRect frame = node.cube.rect();
    const std::int64_t side = node.cube.side;
    // prefix counts of E over Q
    std::vector<std::int64_t> pre(static_cast<std::size_t>((side + 1) * (side + 1)), 0);
    auto pidx = [side](std::int64_t i, std::int64_t j) { return static_cast<std::size_t>(i * (side + 1) + j); };
    for (std::int64_t i = 0; i < side; ++i)
        for (std::int64_t j = 0; j < side; ++j) {
            const auto gi = static_cast<std::size_t>(frame.i0 + i), gj = static_cast<std::size_t>(frame.j0 + j);
            const bool in_e = std::abs(f(gi, gj)) > a * s.orlicz_average ||
                              s.mloc[static_cast<std::size_t>(i * side + j)] > a * s.mloc_threshold;
            pre[pidx(i + 1, j + 1)] = pre[pidx(i, j + 1)] + pre[pidx(i + 1, j)] - pre[pidx(i, j)] + (in_e ? 1 : 0);
        }
    Split out;
    std::vector<char> covered(static_cast<std::size_t>(side * side), 0);
    if (node.scale > 0 && node.depth < max_depth && pre[pidx(side, side)] > 0) {
        std::vector<Node> stack;
        for (int c = 3; c >= 0; --c)
            stack.push_back({Cube{frame.i0 + (c / 2) * (side / 2), frame.j0 + (c % 2) * (side / 2), side / 2},
                             node.scale - 1, node.depth + 1});
        while (!stack.empty()) {
            const Node p = stack.back();
            stack.pop_back();
            const std::int64_t i0 = p.cube.i0 - frame.i0, j0 = p.cube.j0 - frame.j0, ps = p.cube.side;
            const std::int64_t hits = pre[pidx(i0 + ps, j0 + ps)] - pre[pidx(i0, j0 + ps)] - pre[pidx(i0 + ps, j0)] +
                                      pre[pidx(i0, j0)];
            if (hits == 0) continue;
            if (2 * hits > p.cube.cell_count()) {
                out.children.push_back(p);
                for (std::int64_t i = i0; i < i0 + ps; ++i)
                    for (std::int64_t j = j0; j < j0 + ps; ++j) covered[static_cast<std::size_t>(i * side + j)] = 1;
                continue;
            }
            if (p.scale == 0) continue;
            const std::int64_t h = ps / 2;
            for (int c = 3; c >= 0; --c)
                stack.push_back({Cube{p.cube.i0 + (c / 2) * h, p.cube.j0 + (c % 2) * h, h}, p.scale - 1, p.depth});
        }
    }
    for (std::int64_t i = 0; i < side; ++i)
        for (std::int64_t j = 0; j < side; ++j)
            if (!covered[static_cast<std::size_t>(i * side + j)])
                out.witness.push_back(static_cast<std::uint32_t>(
                    dom.index(static_cast<std::size_t>(frame.i0 + i), static_cast<std::size_t>(frame.j0 + j))));
    return out;
}

}  // namespace

SparseFamily build_sparse_family(const GridFunction& f, const OperatorHandle& t, double r,
                                 const SparseBuildParams& params) {
    params.validate();
    if (!(r > 1.0)) throw std::invalid_argument("sparse domination needs r > 1");
    require_same_domain(f.domain(), t.domain());
    if (f.sup_norm() == 0.0) throw DomainError("sparse family needs f not identically zero");
    if (!std::isfinite(f.sup_norm())) throw DomainError("sparse family needs bounded f");
    const Domain& dom = f.domain();
    const LocalSums locals(f, t);
    const Node root{Cube{0, 0, static_cast<std::int64_t>(dom.resolution())}, dom.log2_resolution(), 0};

    std::map<Cube, StopData> cache;
    double a = params.threshold_multiplier;
    double worst = 1.0;
    for (int attempt = 0; attempt <= params.max_escalations; ++attempt) {
        SparseFamily family;
        family.escalations = attempt;
        worst = 1.0;
        std::vector<Node> level{root};
        while (!level.empty()) {
            std::vector<const StopData*> data(level.size(), nullptr);
            {
                std::vector<std::size_t> missing;
                for (std::size_t q = 0; q < level.size(); ++q)
                    if (!cache.count(level[q].cube)) missing.push_back(q);
                std::vector<StopData> fresh(missing.size());
                parallel_for(0, missing.size(), [&](std::size_t m) {
                    const Node& nd = level[missing[m]];
                    fresh[m] = stop_data(f, t, locals, nd.cube, nd.scale, params.lambda);
                });
                for (std::size_t m = 0; m < missing.size(); ++m)
                    cache.emplace(level[missing[m]].cube, std::move(fresh[m]));
                for (std::size_t q = 0; q < level.size(); ++q) data[q] = &cache.at(level[q].cube);
            }
            std::vector<Split> splits(level.size());
            parallel_for(0, level.size(),
                         [&](std::size_t q) { splits[q] = split_cube(f, level[q], *data[q], a, params.max_depth); });
            std::vector<Node> next;
            for (std::size_t q = 0; q < level.size(); ++q) {
                const double ratio =
                    static_cast<double>(splits[q].witness.size()) / static_cast<double>(level[q].cube.cell_count());
                worst = std::min(worst, ratio);
                family.cubes.push_back(level[q].cube);
                family.witnesses.push_back(std::move(splits[q].witness));
                for (const Node& c : splits[q].children) next.push_back(c);
            }
            level = std::move(next);
        }
        if (worst >= params.eta_target) {
            family.eta = params.eta_target;
            return family;
        }
        a *= params.escalation_factor;
    }
    std::ostringstream msg;
    msg << "sparse construction missed eta " << params.eta_target << " after " << params.max_escalations
        << " escalations; worst witness ratio " << worst;
    throw ConstructionError(msg.str());
}

double bilinear_form(const SparseFamily& s, const GridFunction& f, const GridFunction& g, const YoungFunction& a,
                     const YoungFunction& b) {
    require_same_domain(f.domain(), g.domain());
    const Domain& dom = f.domain();
    std::vector<double> terms(s.cubes.size(), 0.0);
    parallel_for(0, s.cubes.size(), [&](std::size_t q) {
        const Cube& cube = s.cubes[q];
        const auto n = static_cast<double>(cube.cell_count());
        const auto fv = cube_abs_values(f, cube);
        if (fv.empty()) return;
        const auto gv = cube_abs_values(g, cube);
        if (gv.empty()) return;
        const double fa = a.kind() == YoungFunction::Kind::power ? power_average(fv, n, a.exponent())
                                                                 : luxemburg_norm(fv, n, a);
        const double ga = b.kind() == YoungFunction::Kind::power ? power_average(gv, n, b.exponent())
                                                                 : luxemburg_norm(gv, n, b);
        terms[q] = fa * ga * cube.measure(dom);
    });
    return compensated_sum(terms);
}

std::optional<double> domination_ratio(const GridFunction& f, const GridFunction& g,
                                       const GridFunction& tstar_output, const SparseFamily& s, double r,
                                       double omega_sup) {
    const double rp = dual_exponent(r);
    const YoungFunction lr = YoungFunction::power(r);
    const double denom =
        omega_sup * (rp * bilinear_form(s, f, g, YoungFunction::power(1.0), lr) +
                     bilinear_form(s, f, g, YoungFunction::phi(), lr));
    const double num = std::abs(integrate(g * tstar_output));
    if (g.sup_norm() == 0.0) return 0.0;
    if (!(denom > 0.0)) return std::nullopt;
    return num / denom;
}

nlohmann::json sparse_run_report(double r, const SparseFamily& s, double ratio) {
    const double eta = [&] {
        double w = 1.0;
        for (std::size_t q = 0; q < s.cubes.size(); ++q)
            w = std::min(w, static_cast<double>(s.witnesses[q].size()) / static_cast<double>(s.cubes[q].cell_count()));
        return w;
    }();
    return {{"r", r}, {"num_cubes", s.cubes.size()}, {"eta_achieved", eta}, {"escalations", s.escalations},
            {"ratio", ratio}};
}

}  // namespace roughwave

#include "roughwave/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "roughwave/sum.hpp"

namespace roughwave {

namespace {

// 2-D prefix sums in extended precision; rect sums by inclusion-exclusion.
class PrefixSums {
public:
    PrefixSums(const Domain& dom, const std::vector<double>& v) : n_(static_cast<std::int64_t>(dom.resolution())) {
        s_.assign(static_cast<std::size_t>((n_ + 1) * (n_ + 1)), 0.0L);
        for (std::int64_t i = 0; i < n_; ++i) {
            long double row = 0.0L;
            for (std::int64_t j = 0; j < n_; ++j) {
                row += v[static_cast<std::size_t>(i * n_ + j)];
                at(i + 1, j + 1) = at(i, j + 1) + row;
            }
        }
    }
    double sum(const CellRect& r) const {
        if (r.empty()) return 0.0;
        return static_cast<double>(at(r.i1, r.j1) - at(r.i0, r.j1) - at(r.i1, r.j0) + at(r.i0, r.j0));
    }

private:
    long double& at(std::int64_t i, std::int64_t j) { return s_[static_cast<std::size_t>(i * (n_ + 1) + j)]; }
    long double at(std::int64_t i, std::int64_t j) const { return s_[static_cast<std::size_t>(i * (n_ + 1) + j)]; }
    std::int64_t n_;
    std::vector<long double> s_;
};

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double number(const std::string& s, std::string_view spec) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (...) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw ParseError("bad number in weight spec '" + std::string(spec) + "'");
    return v;
}

double ap_functional(double avg_w, double avg_dual, double p) { return avg_w * std::pow(avg_dual, p - 1.0); }

}  // namespace

Weight::Weight(GridFunction values) : values_(std::move(values)) {
    for (double v : values_.values())
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("weights must be positive and finite");
}

Weight Weight::constant(const Domain& dom, double c) {
    return Weight(GridFunction(dom, std::vector<double>(dom.cell_count(), c)));
}

Weight Weight::power(const Domain& dom, double a, double x0, double y0) {
    if (!(a > -2.0)) throw std::invalid_argument("power weight exponent must exceed -2");
    const double reg = dom.cell_size() / 2.0;
    return Weight(GridFunction::generate(
        dom, [&](double x, double y) { return std::pow(std::hypot(x - x0, y - y0) + reg, a); }));
}

Weight Weight::preset(const Domain& dom, std::string_view spec) {
    const auto parts = split(spec, ':');
    if (parts[0] == "const" && parts.size() == 2) return constant(dom, number(parts[1], spec));
    if (parts[0] == "power" && (parts.size() == 2 || parts.size() == 4)) {
        const double a = number(parts[1], spec);
        const double x0 = parts.size() == 4 ? number(parts[2], spec) : 0.0;
        const double y0 = parts.size() == 4 ? number(parts[3], spec) : 0.0;
        return power(dom, a, x0, y0);
    }
    if (parts[0] == "indicator-mix" && parts.size() == 6) {
        const double base = number(parts[1], spec), amp = number(parts[2], spec);
        const double x0 = number(parts[3], spec), y0 = number(parts[4], spec), rad = number(parts[5], spec);
        return Weight(GridFunction::generate(
            dom, [&](double x, double y) { return base + (std::hypot(x - x0, y - y0) < rad ? amp : 0.0); }));
    }
    throw ParseError("unknown weight spec '" + std::string(spec) + "'");
}

double Weight::ap(double p, const CubeFamily& family) const {
    if (!(p > 1.0)) throw std::invalid_argument("A_p needs p > 1");
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->constants.find(p); it != cache_->constants.end()) return it->second;
    }
    const double v = ap_constant(*this, p, family);
    std::lock_guard lock(cache_->mutex);
    return cache_->constants.emplace(p, v).first->second;
}

double Weight::a1(const CubeFamily& family) const {
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->constants.find(1.0); it != cache_->constants.end()) return it->second;
    }
    const double v = a1_constant(*this, family);
    std::lock_guard lock(cache_->mutex);
    return cache_->constants.emplace(1.0, v).first->second;
}

double Weight::ainf(const CubeFamily& family) const {
    const double key = std::numeric_limits<double>::infinity();
    {
        std::lock_guard lock(cache_->mutex);
        if (auto it = cache_->constants.find(key); it != cache_->constants.end()) return it->second;
    }
    const double v = ainf_constant(*this, family);
    std::lock_guard lock(cache_->mutex);
    return cache_->constants.emplace(key, v).first->second;
}

double ap_constant(const Weight& w, double p, const CubeFamily& family) {
    if (!(p > 1.0)) throw std::invalid_argument("A_p needs p > 1");
    require_same_domain(w.domain(), family.domain());
    const Domain& dom = w.domain();
    const double pd = p / (p - 1.0);
    std::vector<double> dual(dom.cell_count());
    for (std::size_t c = 0; c < dual.size(); ++c) dual[c] = std::pow(w.values().values()[c], 1.0 - pd);
    const std::vector<double> wv(w.values().values().begin(), w.values().values().end());
    const PrefixSums sw(dom, wv), sd(dom, dual);
    double best = 0.0;
    family.for_each(CubeFamily::Reach::contained, [&](const Cube& q) {
        if (q.side < 4) return;
        const double n = static_cast<double>(q.cell_count());
        best = std::max(best, ap_functional(sw.sum(q.rect()) / n, sd.sum(q.rect()) / n, p));
    });
    return best;
}

double ap_constant_all_squares(const Weight& w, double p, std::int64_t min_side) {
    if (!(p > 1.0)) throw std::invalid_argument("A_p needs p > 1");
    const Domain& dom = w.domain();
    const double pd = p / (p - 1.0);
    std::vector<double> dual(dom.cell_count());
    for (std::size_t c = 0; c < dual.size(); ++c) dual[c] = std::pow(w.values().values()[c], 1.0 - pd);
    const std::vector<double> wv(w.values().values().begin(), w.values().values().end());
    const PrefixSums sw(dom, wv), sd(dom, dual);
    const auto n = static_cast<std::int64_t>(dom.resolution());
    double best = 0.0;
    for (std::int64_t s = min_side; s <= n; ++s)
        for (std::int64_t i = 0; i + s <= n; ++i)
            for (std::int64_t j = 0; j + s <= n; ++j) {
                const CellRect r{i, i + s, j, j + s};
                const auto m = static_cast<double>(s * s);
                best = std::max(best, ap_functional(sw.sum(r) / m, sd.sum(r) / m, p));
            }
    return best;
}

double a1_constant(const Weight& w, const CubeFamily& family) {
    require_same_domain(w.domain(), family.domain());
    const Domain& dom = w.domain();
    const std::vector<double> wv(w.values().values().begin(), w.values().values().end());
    const PrefixSums sw(dom, wv);
    std::vector<double> mw(wv);
    family.for_each(CubeFamily::Reach::contained, [&](const Cube& q) {
        if (q.side == 1) return;
        const CellRect r = q.rect();
        const double avg = sw.sum(r) / static_cast<double>(q.cell_count());
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j) {
                double& m = mw[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
                m = std::max(m, avg);
            }
    });
    double best = 0.0;
    for (std::size_t c = 0; c < wv.size(); ++c) best = std::max(best, mw[c] / wv[c]);
    return best;
}

double ainf_constant(const Weight& w, const CubeFamily& family) {
    require_same_domain(w.domain(), family.domain());
    const Domain& dom = w.domain();
    const std::vector<double> wv(w.values().values().begin(), w.values().values().end());
    const PrefixSums sw(dom, wv);
    double best = 0.0;
    std::vector<double> local;
    family.for_each(CubeFamily::Reach::contained, [&](const Cube& q) {
        const CellRect r = q.rect();
        const double wq = sw.sum(r);
        if (q.side == 1) {
            best = std::max(best, 1.0);
            return;
        }
        local.assign(static_cast<std::size_t>(q.cell_count()), 0.0);
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j)
                local[static_cast<std::size_t>((i - r.i0) * q.side + (j - r.j0))] =
                    wv[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
        for (const auto& lat : family.lattices())
            for (int k = lat.k_min(); k <= lat.k_max(); ++k)
                for (const Cube& qq : lat.cubes_at(k, r, false)) {
                    const CellRect overlap = qq.rect().intersect(r);
                    const double v = sw.sum(overlap) / static_cast<double>(qq.cell_count());
                    for (std::int64_t i = overlap.i0; i < overlap.i1; ++i)
                        for (std::int64_t j = overlap.j0; j < overlap.j1; ++j) {
                            double& m = local[static_cast<std::size_t>((i - r.i0) * q.side + (j - r.j0))];
                            m = std::max(m, v);
                        }
                }
        best = std::max(best, compensated_sum(local) / wq);
    });
    return best;
}

double superlevel_measure(const GridFunction& f, double alpha, const Weight& w) {
    return superlevel_measure(f, alpha, w.values());
}

double weighted_lp_norm(const GridFunction& f, double p, const Weight& w) {
    require_same_domain(f.domain(), w.domain());
    const double top = f.sup_norm();
    if (top == 0.0) return 0.0;
    CompensatedSum s;
    for (std::size_t c = 0; c < f.size(); ++c)
        s.add(std::pow(std::abs(f.values()[c]) / top, p) * w.values().values()[c]);
    return top * std::pow(s.value() * f.domain().cell_area(), 1.0 / p);
}

}  // namespace roughwave

#include "roughwave/orlicz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "roughwave/sum.hpp"

namespace roughwave {

namespace {

const double e_squared = std::exp(2.0);

double average_phi(std::span<const double> v, double n, const YoungFunction& phi, double lambda) {
    CompensatedSum s;
    for (double x : v) s.add(phi(x / lambda));
    return s.value() / n;
}

}  // namespace

YoungFunction YoungFunction::power(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("power Young function needs finite p >= 1");
    return YoungFunction(Kind::power, p);
}

YoungFunction YoungFunction::parse(std::string_view spec) {
    if (spec == "phi") return phi();
    if (spec == "psi1") return psi1();
    if (spec == "psi2") return psi2();
    if (spec.starts_with("power:")) {
        const std::string rest(spec.substr(6));
        std::size_t used = 0;
        double p = 0.0;
        try {
            p = std::stod(rest, &used);
        } catch (...) {
            used = 0;
        }
        if (used == 0 || used != rest.size()) throw ParseError("bad exponent in '" + std::string(spec) + "'");
        return power(p);
    }
    throw ParseError("unknown Young function '" + std::string(spec) + "'");
}

double YoungFunction::operator()(double t) const noexcept {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::power:
            return p_ == 1.0 ? t : std::pow(t, p_);
        case Kind::phi_loglog:
            return t * std::log(std::log(e_squared + t));
        case Kind::psi1:
            return t * std::log(std::numbers::e + t);
        case Kind::psi2:
            return t * std::log(std::numbers::e + t) * std::log(std::log(e_squared + t));
    }
    return 0.0;
}

std::string YoungFunction::name() const {
    switch (kind_) {
        case Kind::power: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "power:%g", p_);
            return buf;
        }
        case Kind::phi_loglog:
            return "phi";
        case Kind::psi1:
            return "psi1";
        case Kind::psi2:
            return "psi2";
    }
    return "?";
}

LuxemburgResult luxemburg_solve(std::span<const double> v, double n, const YoungFunction& phi) {
    LuxemburgResult out;
    double top = 0.0;
    for (double x : v) top = std::max(top, x);
    if (top == 0.0) return out;

    double hi = top;
    while (average_phi(v, n, phi, hi) > 1.0) hi *= 2.0;
    double lo = top * 1e-16;
    while (average_phi(v, n, phi, lo) <= 1.0) lo *= 0.5;

    // Geometric bisection keeps the relative bracket shrinking at a fixed rate.
    int it = 0;
    for (; it < 400; ++it) {
        const double mid = lo * std::sqrt(hi / lo);
        if (!(mid > lo && mid < hi)) break;
        if (average_phi(v, n, phi, mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    out.norm = hi;
    out.average = average_phi(v, n, phi, hi);
    out.iterations = it;
    return out;
}

double luxemburg_norm(std::span<const double> v, double n, const YoungFunction& phi) {
    return luxemburg_solve(v, n, phi).norm;
}

std::vector<double> cube_abs_values(const GridFunction& f, const Cube& q) {
    std::vector<double> out;
    const CellRect r = q.rect().intersect(full_rect(f.domain()));
    for (std::int64_t i = r.i0; i < r.i1; ++i)
        for (std::int64_t j = r.j0; j < r.j1; ++j) {
            const double x = std::abs(f(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
            if (x != 0.0) out.push_back(x);
        }
    return out;
}

double luxemburg_norm(const GridFunction& f, const Cube& q, const YoungFunction& phi) {
    const auto v = cube_abs_values(f, q);
    return luxemburg_norm(v, static_cast<double>(q.cell_count()), phi);
}

double power_average(std::span<const double> v, double n, double p) {
    CompensatedSum s;
    if (p == 1.0) {
        for (double x : v) s.add(x);
        return s.value() / n;
    }
    // scaled by the max so tails do not underflow for large p
    double top = 0.0;
    for (double x : v) top = std::max(top, x);
    if (top == 0.0) return 0.0;
    for (double x : v) s.add(std::pow(x / top, p));
    return top * std::pow(s.value() / n, 1.0 / p);
}

GridFunction orlicz_maximal(const GridFunction& f, const YoungFunction& phi, const CubeFamily& family) {
    require_same_domain(f.domain(), family.domain());
    const Domain& dom = f.domain();
    const CellRect box = full_rect(dom);
    std::vector<double> out(dom.cell_count(), 0.0);
    std::vector<double> vals;
    family.for_each(CubeFamily::Reach::intersecting, [&](const Cube& q) {
        const CellRect r = q.rect().intersect(box);
        vals.clear();
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j) {
                const double x = std::abs(f(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
                if (x != 0.0) vals.push_back(x);
            }
        if (vals.empty()) return;
        const double v = luxemburg_norm(vals, static_cast<double>(q.cell_count()), phi);
        for (std::int64_t i = r.i0; i < r.i1; ++i)
            for (std::int64_t j = r.j0; j < r.j1; ++j) {
                double& o = out[dom.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
                o = std::max(o, v);
            }
    });
    return GridFunction(dom, std::move(out));
}

double dual_exponent(double r) {
    if (!(r > 1.0)) throw std::invalid_argument("exponent must exceed 1");
    return std::isinf(r) ? 1.0 : r / (r - 1.0);
}

double check_refinement_inequality(const GridFunction& f, const Cube& q, double r) {
    const double rp = dual_exponent(r);
    const auto v = cube_abs_values(f, q);
    if (v.empty()) return 0.0;
    const double n = static_cast<double>(q.cell_count());
    const double num = luxemburg_norm(v, n, YoungFunction::phi());
    const double den = std::log(1.0 + rp) * power_average(v, n, 1.0) + power_average(v, n, r);
    return num / den;
}

}  // namespace roughwave

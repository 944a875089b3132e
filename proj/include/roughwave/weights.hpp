#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "roughwave/dyadic.hpp"
#include "roughwave/grid.hpp"

namespace roughwave {

// Positive weight on the grid with lazily computed Muckenhoupt constants.
class Weight {
public:
    explicit Weight(GridFunction values);

    static Weight constant(const Domain& dom, double c = 1.0);
    // (|x - x0| + h/2)^a
    static Weight power(const Domain& dom, double a, double x0 = 0.0, double y0 = 0.0);
    // "const:c", "power:a:x0:y0", "indicator-mix:base:amp:x0:y0:radius"
    static Weight preset(const Domain& dom, std::string_view spec);

    const GridFunction& values() const noexcept { return values_; }
    const Domain& domain() const noexcept { return values_.domain(); }

    double ap(double p, const CubeFamily& family) const;
    double a1(const CubeFamily& family) const;
    double ainf(const CubeFamily& family) const;

private:
    GridFunction values_;
    struct Cache {
        std::mutex mutex;
        std::map<double, double> constants;  // p, with 1 for A_1 and infinity for A_inf
    };
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

double ap_constant(const Weight& w, double p, const CubeFamily& family);
double a1_constant(const Weight& w, const CubeFamily& family);
double ainf_constant(const Weight& w, const CubeFamily& family);

// Same functional over every grid-aligned square of side >= min_side cells.
double ap_constant_all_squares(const Weight& w, double p, std::int64_t min_side = 4);

double superlevel_measure(const GridFunction& f, double alpha, const Weight& w);
// (sum |f|^p w h^2)^{1/p}
double weighted_lp_norm(const GridFunction& f, double p, const Weight& w);

}  // namespace roughwave

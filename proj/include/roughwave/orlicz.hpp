#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roughwave/dyadic.hpp"
#include "roughwave/grid.hpp"

namespace roughwave {

class YoungFunction {
public:
    enum class Kind { power, phi_loglog, psi1, psi2 };

    static YoungFunction power(double p);
    static YoungFunction phi() { return YoungFunction(Kind::phi_loglog, 1.0); }
    static YoungFunction psi1() { return YoungFunction(Kind::psi1, 1.0); }
    static YoungFunction psi2() { return YoungFunction(Kind::psi2, 1.0); }
    // "power:p", "phi", "psi1", "psi2"
    static YoungFunction parse(std::string_view spec);

    double operator()(double t) const noexcept;
    Kind kind() const noexcept { return kind_; }
    double exponent() const noexcept { return p_; }
    std::string name() const;

private:
    YoungFunction(Kind k, double p) : kind_(k), p_(p) {}
    Kind kind_;
    double p_;
};

struct LuxemburgResult {
    double norm = 0.0;
    double average = 0.0;  // (1/|Q|) sum Phi(|f|/norm), within [1 - 1e-8, 1]
    int iterations = 0;
};

// abs_values: |f| on the cells of Q inside the box (zeros may be dropped);
// cell_count: |Q| in cells, counting cells outside the box where f = 0.
LuxemburgResult luxemburg_solve(std::span<const double> abs_values, double cell_count,
                                const YoungFunction& phi);
double luxemburg_norm(std::span<const double> abs_values, double cell_count, const YoungFunction& phi);
double luxemburg_norm(const GridFunction& f, const Cube& q, const YoungFunction& phi);

// Nonzero |f| over the cells of Q inside the box.
std::vector<double> cube_abs_values(const GridFunction& f, const Cube& q);
// <|f|^p>_Q^{1/p} with the full |Q| in the average.
double power_average(std::span<const double> abs_values, double cell_count, double p);

GridFunction orlicz_maximal(const GridFunction& f, const YoungFunction& phi, const CubeFamily& family);

// <|f|>_{Phi,Q} / (log(1 + r') <|f|>_Q + <|f|>_{r,Q}), zero for f = 0 on Q.
double check_refinement_inequality(const GridFunction& f, const Cube& q, double r);

double dual_exponent(double r);

}  // namespace roughwave

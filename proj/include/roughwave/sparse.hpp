#pragma once

#include <optional>

#include <json.hpp>

#include "roughwave/dyadic.hpp"
#include "roughwave/grid.hpp"
#include "roughwave/operators.hpp"
#include "roughwave/orlicz.hpp"

namespace roughwave {

struct SparseBuildParams {
    double threshold_multiplier = 16.0;
    double eta_target = 0.5;
    int max_depth = 64;
    double escalation_factor = 2.0;
    int max_escalations = 5;
    double lambda = 0.25;  // rearrangement level of the local grand maximal

    void validate() const;
};

// Stopping-time family in the standard lattice of the box. A cube Q is split
// along the maximal sub-cubes P with |P n E(Q)| > |P|/2, where
//   E(Q) = {|f| > A <f>_{phi,3Q}} u {M_loc > A median_Q M_loc}
// and M_loc is the grand maximal of T(f chi_3Q) over sub-cubes of Q.
SparseFamily build_sparse_family(const GridFunction& f, const OperatorHandle& t, double r,
                                 const SparseBuildParams& params = {});

// sum over Q of <|f|>_{a,Q} <|g|>_{b,Q} |Q|
double bilinear_form(const SparseFamily& s, const GridFunction& f, const GridFunction& g, const YoungFunction& a,
                     const YoungFunction& b);

// |int g T*f| / (|Omega|_inf (r' A_{L1,Lr} + A_{phi,Lr})); empty when the
// denominator vanishes.
std::optional<double> domination_ratio(const GridFunction& f, const GridFunction& g,
                                       const GridFunction& tstar_output, const SparseFamily& s, double r,
                                       double omega_sup);

nlohmann::json sparse_run_report(double r, const SparseFamily& s, double ratio);

}  // namespace roughwave

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughwave/corpus.hpp"
#include "roughwave/grid.hpp"
#include "roughwave/kernel.hpp"
#include "roughwave/report.hpp"
#include "roughwave/sparse.hpp"

namespace roughwave {

struct VerifySetup {
    Domain domain;
    RoughKernel kernel;
};

// alpha = multiplier * sup of the measured function, from 0.5 down three decades.
std::vector<double> default_alpha_multipliers();

struct DominationParams {
    CorpusSpec corpus{11, 20, {"gaussian", "indicator", "mix"}, true, false};
    std::vector<double> r_list{1.25, 1.5, 2.0, 4.0};
    SparseBuildParams sparse;
    double slope_max = 0.1;
};

struct WeakTypeParams {
    CorpusSpec corpus{21, 4, {"spike"}, false, false};
    std::vector<double> alpha_multipliers = default_alpha_multipliers();
    std::vector<std::string> weights{"const:1", "power:-0.5:0.2:0.1", "power:-1:-0.15:0.2"};
};

struct GrandMaximalParams {
    CorpusSpec corpus{22, 3, {"spike"}, false, false};
    std::vector<double> lambda_list{0.5, 0.125, 1.0 / 64.0};
    std::vector<double> alpha_multipliers = default_alpha_multipliers();
};

struct SharpWeakTypeParams {
    CorpusSpec corpus{23, 3, {"spike"}, false, false};
    std::vector<double> p_list{2.0, 4.0, 8.0};
    std::vector<double> alpha_multipliers = default_alpha_multipliers();
};

struct CoifmanFeffermanParams {
    CorpusSpec corpus{41, 4, {"mix", "spike"}, false, false};
    std::vector<double> p_list{1.5, 2.0, 4.0};
    std::vector<std::string> weights{"const:1", "power:0.5:0.2:0.1", "power:-0.5:0.2:0.1", "power:-1:-0.15:0.2"};
};

struct DecayParams {
    std::vector<int> l_list{0, 1, 2, 3, 4, 5};
    std::vector<int> m_list{1, 2, 3};
    std::size_t bank_size = 32;
    std::uint64_t seed = 71;
    double slope_max = -0.2;
};

struct RefinementParams {
    CorpusSpec corpus{31, 8, {"gaussian", "indicator", "spike", "noise"}, false, false};
    std::vector<double> r_list{1.1, 1.25, 1.5, 2.0, 4.0, 16.0};
};

struct CommutatorParams {
    CorpusSpec corpus{51, 6, {"mix", "gaussian"}, true, true};
    std::vector<double> r_list{1.25, 1.5, 2.0, 4.0};
    std::vector<std::string> weights{"const:1", "power:-0.5:0.2:0.1", "power:-1:-0.15:0.2"};
    std::vector<double> alpha_multipliers = default_alpha_multipliers();
    SparseBuildParams sparse;
    double slope_max = 0.1;
};

struct CZParams {
    CorpusSpec corpus{61, 10, {"spike", "mix", "noise"}, false, false};
    std::vector<double> lambda_list{0.5, 0.125};
    double c1 = 0.2;
    double peak = 64.0;  // corpus functions are rescaled to this sup norm
};

FitReport check_domination(const VerifySetup& s, const DominationParams& p);
FitReport check_weak_type_tstar(const VerifySetup& s, const WeakTypeParams& p);
FitReport check_grand_maximal_endpoint(const VerifySetup& s, const GrandMaximalParams& p);
FitReport check_sharp_weak_type(const VerifySetup& s, const SharpWeakTypeParams& p);
FitReport check_coifman_fefferman(const VerifySetup& s, const CoifmanFeffermanParams& p);
FitReport check_mollification_decay(const VerifySetup& s, const DecayParams& p);
FitReport check_refinement(const VerifySetup& s, const RefinementParams& p);
FitReport check_commutator(const VerifySetup& s, const CommutatorParams& p);
FitReport check_cz_properties(const VerifySetup& s, const CZParams& p);

// Registry used by the driver: name, inequality under test, default parameters.
struct CheckInfo {
    std::string name;
    std::string inequality;
    nlohmann::json defaults;
};
const std::vector<CheckInfo>& check_catalog();

// Runs the named check with parameters overriding the defaults; unknown keys
// raise ParseError. seed_override, when nonzero, replaces the corpus seed.
FitReport run_check(const std::string& name, const VerifySetup& s, const nlohmann::json& params,
                    std::uint64_t seed_override = 0);
// Parses the parameters only.
void validate_check_params(const std::string& name, const nlohmann::json& params);

}  // namespace roughwave

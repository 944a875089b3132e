#include "roughwave/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "roughwave/czd.hpp"
#include "roughwave/errors.hpp"
#include "roughwave/operators.hpp"
#include "roughwave/orlicz.hpp"
#include "roughwave/parallel.hpp"
#include "roughwave/sum.hpp"
#include "roughwave/weights.hpp"

namespace roughwave {

std::vector<double> default_alpha_multipliers() {
    std::vector<double> out;
    for (int k = 0; k <= 9; ++k) out.push_back(0.5 * std::pow(10.0, -k / 3.0));
    return out;
}

namespace {

std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

// levels are placed relative to the sup of the function whose superlevel
// sets are measured
double alpha_for(const GridFunction& measured, double multiplier) {
    return multiplier * measured.sup_norm();
}

// h^2 sum Phi(|f| / alpha) w
double young_integral(const GridFunction& f, double alpha, const YoungFunction& phi,
                      const GridFunction* w = nullptr) {
    CompensatedSum s;
    for (std::size_t c = 0; c < f.size(); ++c) {
        const double v = std::abs(f.values()[c]);
        if (v == 0.0) continue;
        s.add(phi(v / alpha) * (w ? w->values()[c] : 1.0));
    }
    return s.value() * f.domain().cell_area();
}

double pooled_slope(const std::vector<std::vector<double>>& logs, const std::vector<double>& x) {
    std::vector<double> xs, ys;
    double xm = 0.0;
    for (double v : x) xm += v;
    xm /= static_cast<double>(x.size());
    for (const auto& row : logs) {
        double ym = 0.0;
        for (double v : row) ym += v;
        ym /= static_cast<double>(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) {
            xs.push_back(x[k] - xm);
            ys.push_back(row[k] - ym);
        }
    }
    return fitted_slope(xs, ys);
}

void require_nonempty(const Corpus& c) {
    if (c.items.empty()) throw std::invalid_argument("empty corpus");
}

void require_list(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw std::invalid_argument(std::string(what) + " must not be empty");
}

struct WeightData {
    std::string spec;
    Weight weight;
    double a1 = 1.0;
    double ainf = 1.0;
};

std::vector<WeightData> load_weights(const Domain& dom, const std::vector<std::string>& specs,
                                     const CubeFamily& family, bool need_a1) {
    std::vector<WeightData> out;
    for (const auto& s : specs) {
        Weight w = Weight::preset(dom, s);
        const double a1 = need_a1 ? w.a1(family) : 0.0;
        const double ainf = w.ainf(family);
        out.push_back({s, std::move(w), a1, ainf});
    }
    return out;
}

GridFunction with_peak(const GridFunction& f, double peak) { return f * (peak / f.sup_norm()); }

}  // namespace

FitReport check_domination(const VerifySetup& s, const DominationParams& p) {
    require_list(p.r_list, "r_list");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const OperatorHandle tstar = OperatorHandle::maximal_truncation(s.kernel, s.domain, TruncationGrid::geometric(s.domain));

    struct Row {
        std::vector<std::optional<double>> ratios;
        SparseFamily family;
        SparseVerification verified;
    };
    std::vector<Row> rows(corpus.items.size());
    parallel_for(0, rows.size(), [&](std::size_t k) {
        const auto& item = corpus.items[k];
        Row& row = rows[k];
        row.family = build_sparse_family(item.f, tstar, p.r_list.front(), p.sparse);
        row.verified = verify_sparse(row.family, s.domain);
        const GridFunction tf = tstar.apply(item.f);
        for (double r : p.r_list)
            row.ratios.push_back(domination_ratio(item.f, *item.g, tf, row.family, r, s.kernel.sup_norm()));
    });

    FitReport rep;
    rep.check = "domination";
    rep.params = {{"r_list", p.r_list}, {"corpus", p.corpus.to_json()}};
    rep.bound.slope_max = p.slope_max;
    std::vector<std::vector<double>> logs;
    std::vector<double> x;
    for (double r : p.r_list) x.push_back(std::log(dual_exponent(r)));
    nlohmann::json sparse = nlohmann::json::array(), skipped = nlohmann::json::array();
    bool all_verified = true;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& row = rows[k];
        const auto& name = corpus.items[k].name;
        all_verified = all_verified && row.verified.ok;
        sparse.push_back({{"item", name},
                          {"num_cubes", row.family.cubes.size()},
                          {"escalations", row.family.escalations},
                          {"worst_ratio", row.verified.worst_ratio},
                          {"overlaps", row.verified.overlap_count},
                          {"verified", row.verified.ok}});
        bool degenerate = false;
        for (const auto& r : row.ratios) degenerate = degenerate || !r || !(*r > 0.0);
        if (degenerate) {
            skipped.push_back(name);
            continue;
        }
        std::vector<double> lr;
        for (std::size_t a = 0; a < p.r_list.size(); ++a) {
            rep.items.push_back({name + "/r=" + num(p.r_list[a]), *row.ratios[a], p.r_list[a], {}});
            lr.push_back(std::log(*row.ratios[a]));
        }
        logs.push_back(std::move(lr));
    }
    if (!logs.empty() && p.r_list.size() >= 2) rep.slope = pooled_slope(logs, x);
    rep.extra_ok = all_verified;
    rep.details = {{"sparse", sparse}, {"skipped", skipped}};
    rep.finalize();
    return rep;
}

FitReport check_weak_type_tstar(const VerifySetup& s, const WeakTypeParams& p) {
    require_list(p.alpha_multipliers, "alpha_multipliers");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const CubeFamily family(s.domain);
    const auto weights = load_weights(s.domain, p.weights, family, true);
    const OperatorHandle tstar = OperatorHandle::maximal_truncation(s.kernel, s.domain, TruncationGrid::geometric(s.domain));
    const OperatorHandle tlac = OperatorHandle::lacunary(build_kernel_bank(s.kernel, s.domain));
    const YoungFunction phi = YoungFunction::phi();

    std::vector<GridFunction> tf(corpus.items.size(), GridFunction(s.domain)), tl = tf;
    parallel_for(0, tf.size(), [&](std::size_t k) {
        tf[k] = tstar.apply(corpus.items[k].f);
        tl[k] = tlac.apply(corpus.items[k].f);
    });

    FitReport rep;
    rep.check = "weak_type_tstar";
    rep.params = {{"alpha_multipliers", p.alpha_multipliers}, {"weights", p.weights}, {"corpus", p.corpus.to_json()}};
    std::vector<double> plain, lacunary;
    for (std::size_t k = 0; k < corpus.items.size(); ++k) {
        const auto& item = corpus.items[k];
        for (double m : p.alpha_multipliers) {
            const double alpha = alpha_for(tf[k], m);
            const double rhs = young_integral(item.f, alpha, phi);
            const double r = superlevel_measure(tf[k], alpha) / rhs;
            rep.items.push_back({item.name + "/a=" + num(m), r, m, "unweighted"});
            plain.push_back(r);
            lacunary.push_back(superlevel_measure(tl[k], alpha) / rhs);
            for (const auto& w : weights) {
                const double factor = w.a1 * w.ainf * std::log(std::numbers::e + w.ainf);
                const double wr = superlevel_measure(tf[k], alpha, w.weight) /
                                  (factor * young_integral(item.f, alpha, phi, &w.weight.values()));
                rep.items.push_back({item.name + "/" + w.spec + "/a=" + num(m), wr, m, w.spec});
            }
        }
    }
    nlohmann::json wj = nlohmann::json::array();
    for (const auto& w : weights) wj.push_back({{"weight", w.spec}, {"a1", w.a1}, {"ainf", w.ainf}});
    const double mp = median_of(plain), ml = median_of(lacunary);
    rep.details = {{"weights", wj},
                   {"lacunary_comparison",
                    {{"median_tstar", mp},
                     {"median_lacunary", ml},
                     {"max_tstar", *std::max_element(plain.begin(), plain.end())},
                     {"max_lacunary", *std::max_element(lacunary.begin(), lacunary.end())},
                     {"median_ratio", mp > 0.0 ? ml / mp : 0.0}}}};
    rep.finalize();
    return rep;
}

FitReport check_grand_maximal_endpoint(const VerifySetup& s, const GrandMaximalParams& p) {
    require_list(p.lambda_list, "lambda_list");
    require_list(p.alpha_multipliers, "alpha_multipliers");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const CubeFamily family(s.domain);
    const OperatorHandle tlac = OperatorHandle::lacunary(build_kernel_bank(s.kernel, s.domain));
    const YoungFunction phi = YoungFunction::phi();

    std::vector<std::vector<GridFunction>> grand(corpus.items.size());
    parallel_for(0, grand.size(), [&](std::size_t k) {
        grand[k] = truncated_maximals(corpus.items[k].f, tlac, family, p.lambda_list, {}).grand;
    });

    FitReport rep;
    rep.check = "grand_maximal_endpoint";
    rep.params = {{"lambda_list", p.lambda_list},
                  {"alpha_multipliers", p.alpha_multipliers},
                  {"corpus", p.corpus.to_json()}};
    for (std::size_t k = 0; k < corpus.items.size(); ++k) {
        const auto& item = corpus.items[k];
        const double f1 = lp_norm(item.f, 1.0);
        for (std::size_t a = 0; a < p.lambda_list.size(); ++a) {
            const double lam = p.lambda_list[a];
            for (double m : p.alpha_multipliers) {
                const double alpha = alpha_for(grand[k][a], m);
                const double rhs = (1.0 + std::log(1.0 / lam)) * f1 / alpha + young_integral(item.f, alpha, phi);
                rep.items.push_back({item.name + "/lambda=" + num(lam) + "/a=" + num(m),
                                     superlevel_measure(grand[k][a], alpha) / rhs, m, {}});
            }
        }
    }
    rep.finalize();
    return rep;
}

FitReport check_sharp_weak_type(const VerifySetup& s, const SharpWeakTypeParams& p) {
    require_list(p.p_list, "p_list");
    require_list(p.alpha_multipliers, "alpha_multipliers");
    for (double q : p.p_list)
        if (!(q > 1.0)) throw std::invalid_argument("sharp maximal exponents must exceed 1");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const CubeFamily family(s.domain);
    const OperatorHandle tstar = OperatorHandle::maximal_truncation(s.kernel, s.domain, TruncationGrid::geometric(s.domain));
    const YoungFunction phi = YoungFunction::phi();

    std::vector<std::vector<GridFunction>> sharp(corpus.items.size());
    parallel_for(0, sharp.size(), [&](std::size_t k) {
        sharp[k] = truncated_maximals(corpus.items[k].f, tstar, family, {}, p.p_list).sharp;
    });

    FitReport rep;
    rep.check = "sharp_weak_type";
    rep.params = {{"p_list", p.p_list}, {"alpha_multipliers", p.alpha_multipliers}, {"corpus", p.corpus.to_json()}};
    for (std::size_t k = 0; k < corpus.items.size(); ++k) {
        const auto& item = corpus.items[k];
        const double f1 = lp_norm(item.f, 1.0);
        for (std::size_t a = 0; a < p.p_list.size(); ++a)
            for (double m : p.alpha_multipliers) {
                const double alpha = alpha_for(sharp[k][a], m);
                const double rhs = p.p_list[a] * f1 / alpha + young_integral(item.f, alpha, phi);
                rep.items.push_back({item.name + "/p=" + num(p.p_list[a]) + "/a=" + num(m),
                                     superlevel_measure(sharp[k][a], alpha) / rhs, m, {}});
            }
    }
    rep.finalize();
    return rep;
}

FitReport check_coifman_fefferman(const VerifySetup& s, const CoifmanFeffermanParams& p) {
    require_list(p.p_list, "p_list");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const CubeFamily family(s.domain);
    const auto weights = load_weights(s.domain, p.weights, family, false);
    const OperatorHandle tstar = OperatorHandle::maximal_truncation(s.kernel, s.domain, TruncationGrid::geometric(s.domain));

    struct Row {
        GridFunction tf, mf, mphi;
    };
    std::vector<Row> rows(corpus.items.size(), Row{GridFunction(s.domain), GridFunction(s.domain), GridFunction(s.domain)});
    parallel_for(0, rows.size(), [&](std::size_t k) {
        const auto& f = corpus.items[k].f;
        rows[k] = {tstar.apply(f), hl_maximal(f, family, 1.0), orlicz_maximal(f, YoungFunction::phi(), family)};
    });

    FitReport rep;
    rep.check = "coifman_fefferman";
    rep.params = {{"p_list", p.p_list}, {"weights", p.weights}, {"corpus", p.corpus.to_json()}};
    // asserted ratio leaves out the [w] powers; the weighted form is kept per item
    const double omega = s.kernel.sup_norm();
    nlohmann::json per_item = nlohmann::json::array();
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (const auto& w : weights)
            for (double q : p.p_list) {
                const double lhs = weighted_lp_norm(rows[k].tf, q, w.weight);
                const double mf = weighted_lp_norm(rows[k].mf, q, w.weight);
                const double mphi = weighted_lp_norm(rows[k].mphi, q, w.weight);
                const double weighted_rhs =
                    omega * (w.ainf * w.ainf * mf + w.ainf * std::log(std::numbers::e + w.ainf) * mphi);
                const std::string name = corpus.items[k].name + "/" + w.spec + "/p=" + num(q);
                rep.items.push_back({name, lhs / (omega * (mf + mphi)), q, {}});
                per_item.push_back({{"item", name}, {"ainf", w.ainf}, {"ratio_with_weight_factors", lhs / weighted_rhs}});
            }
    nlohmann::json wj = nlohmann::json::array();
    for (const auto& w : weights) wj.push_back({{"weight", w.spec}, {"ainf", w.ainf}});
    rep.details = {{"weights", wj}, {"per_item", per_item}};
    rep.finalize();
    return rep;
}

FitReport check_mollification_decay(const VerifySetup& s, const DecayParams& p) {
    if (p.l_list.empty() || p.m_list.empty()) throw std::invalid_argument("decay sweeps must not be empty");
    if (p.bank_size == 0) throw std::invalid_argument("test bank must not be empty");
    const Domain& dom = s.domain;
    const Mollifier moll = Mollifier::standard();
    const int l_max = *std::max_element(p.l_list.begin(), p.l_list.end());
    const int m_max = *std::max_element(p.m_list.begin(), p.m_list.end());
    const int j_top = coarsest_relevant_scale(dom);
    auto bank_from = [&](int shift) {
        int j = finest_resolvable_scale(dom);
        while (std::ldexp(1.0, j - shift) < dom.cell_size() * (1.0 - 1e-12)) ++j;
        if (j > j_top) throw ScaleRangeError("no kernel piece survives mollification at shift " + std::to_string(shift));
        return build_kernel_bank(s.kernel, dom, j, j_top);
    };
    const KernelBank decay_bank = bank_from(l_max);
    const KernelBank h_bank = bank_from(1 << m_max);

    // unit L2 test functions
    std::vector<GridFunction> tests;
    const std::vector<std::string> families{"noise", "oscillating", "indicator", "gaussian"};
    for (std::size_t k = 0; k < p.bank_size; ++k) {
        SeededRng rng(p.seed * 7919ULL + k);
        GridFunction f = random_function(dom, families[k % families.size()], rng);
        const double n2 = lp_norm(f, 2.0);
        if (n2 == 0.0) continue;
        tests.push_back(f * (1.0 / n2));
    }

    auto norm_estimate = [&](const OperatorHandle& op) {
        std::vector<double> r(tests.size());
        parallel_for(0, tests.size(), [&](std::size_t k) { r[k] = lp_norm(op.apply(tests[k]), 2.0); });
        return *std::max_element(r.begin(), r.end());
    };

    FitReport rep;
    rep.check = "mollification_decay";
    rep.params = {{"l_list", p.l_list}, {"m_list", p.m_list}, {"bank_size", p.bank_size}, {"seed", p.seed}};
    rep.bound.max_over_median.reset();
    rep.bound.slope_max = p.slope_max;

    const OffsetKernel full = OperatorHandle::piece_sum(decay_bank).layers().front();
    std::vector<double> ls, logs;
    std::map<int, double> by_l;
    for (int l : p.l_list) {
        const OffsetKernel diff = full - OperatorHandle::mollified(decay_bank, moll, l).layers().front();
        std::vector<OffsetKernel> layers{diff};
        const double est = norm_estimate(
            OperatorHandle::from_layers(OperatorHandle::Kind::mollified, dom, std::move(layers), false, s.kernel.sup_norm()));
        by_l[l] = est;
        rep.items.push_back({"T-T_l/l=" + std::to_string(l), est, static_cast<double>(l), "difference"});
        if (l >= 1) {
            ls.push_back(l);
            logs.push_back(std::log2(est));
        }
    }
    if (ls.size() >= 2) rep.slope = fitted_slope(ls, logs);
    bool doubling_ok = true;
    for (const auto& [l, v] : by_l)
        if (by_l.count(2 * l) && l > 0) doubling_ok = doubling_ok && by_l[2 * l] <= v + 1e-9;

    std::vector<int> ms(p.m_list.begin(), p.m_list.end());
    std::sort(ms.begin(), ms.end());
    std::vector<double> h_norms;
    for (int m : ms) {
        const double est = norm_estimate(OperatorHandle::difference_sup(h_bank, moll, m));
        h_norms.push_back(est);
        rep.items.push_back({"H_m/m=" + std::to_string(m), est, static_cast<double>(m), "lacunary_difference"});
    }
    bool strictly = true;
    for (std::size_t k = 1; k < h_norms.size(); ++k) strictly = strictly && h_norms[k] < h_norms[k - 1];
    rep.extra_ok = strictly;
    rep.details = {{"decay_bank_scales", {decay_bank.pieces.front().j, decay_bank.pieces.back().j}},
                   {"h_bank_scales", {h_bank.pieces.front().j, h_bank.pieces.back().j}},
                   {"bank_functions", tests.size()},
                   {"h_strictly_decreasing", strictly},
                   {"doubling_monotone", doubling_ok},
                   {"kappa_estimate", rep.slope ? -*rep.slope : 0.0}};
    rep.finalize();
    return rep;
}

FitReport check_refinement(const VerifySetup& s, const RefinementParams& p) {
    require_list(p.r_list, "r_list");
    for (double r : p.r_list)
        if (!(r > 1.0)) throw std::invalid_argument("refinement exponents must exceed 1");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const CubeFamily family(s.domain);
    const auto cubes = family.cubes(CubeFamily::Reach::contained);
    const YoungFunction phi = YoungFunction::phi();

    // per item, per r: worst ratio over cubes
    std::vector<std::vector<double>> worst(corpus.items.size(), std::vector<double>(p.r_list.size(), 0.0));
    for (std::size_t k = 0; k < corpus.items.size(); ++k) {
        const GridFunction& f = corpus.items[k].f;
        std::vector<std::vector<double>> per_cube(cubes.size(), std::vector<double>(p.r_list.size(), 0.0));
        parallel_for(0, cubes.size(), [&](std::size_t c) {
            const auto v = cube_abs_values(f, cubes[c]);
            if (v.empty()) return;
            const double n = static_cast<double>(cubes[c].cell_count());
            const double lux = luxemburg_norm(v, n, phi);
            const double avg = power_average(v, n, 1.0);
            for (std::size_t a = 0; a < p.r_list.size(); ++a) {
                const double r = p.r_list[a];
                per_cube[c][a] = lux / (std::log(1.0 + dual_exponent(r)) * avg + power_average(v, n, r));
            }
        });
        for (const auto& row : per_cube)
            for (std::size_t a = 0; a < row.size(); ++a) worst[k][a] = std::max(worst[k][a], row[a]);
    }

    FitReport rep;
    rep.check = "refinement";
    rep.params = {{"r_list", p.r_list}, {"corpus", p.corpus.to_json()}};
    nlohmann::json per_item = nlohmann::json::object();
    for (std::size_t a = 0; a < p.r_list.size(); ++a) {
        double m = 0.0;
        for (std::size_t k = 0; k < worst.size(); ++k) m = std::max(m, worst[k][a]);
        rep.items.push_back({"r=" + num(p.r_list[a]), m, p.r_list[a], {}});
    }
    for (std::size_t k = 0; k < worst.size(); ++k) per_item[corpus.items[k].name] = worst[k];
    rep.details = {{"per_item", per_item}, {"cubes", cubes.size()}};
    rep.finalize();
    return rep;
}

FitReport check_commutator(const VerifySetup& s, const CommutatorParams& p) {
    require_list(p.r_list, "r_list");
    require_list(p.alpha_multipliers, "alpha_multipliers");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const CubeFamily family(s.domain);
    const auto weights = load_weights(s.domain, p.weights, family, true);
    const TruncationGrid grid = TruncationGrid::geometric(s.domain);
    const OperatorHandle tstar = OperatorHandle::maximal_truncation(s.kernel, s.domain, grid);
    const YoungFunction l1 = YoungFunction::power(1.0), phi = YoungFunction::phi(), psi1 = YoungFunction::psi1(),
                        psi2 = YoungFunction::psi2();

    struct Row {
        GridFunction cf;
        double bmo = 0.0;
        std::vector<std::optional<double>> ratios;
        SparseVerification verified;
    };
    std::vector<Row> rows(corpus.items.size(), Row{GridFunction(s.domain), 0.0, {}, {}});
    parallel_for(0, rows.size(), [&](std::size_t k) {
        const auto& item = corpus.items[k];
        Row& row = rows[k];
        row.bmo = bmo_seminorm(*item.b, family);
        const GridFunction b = *item.b * (1.0 / row.bmo);
        row.cf = commutator_maximal(item.f, b, s.kernel, grid);
        const SparseFamily fam = build_sparse_family(item.f, tstar, p.r_list.front(), p.sparse);
        row.verified = verify_sparse(fam, s.domain);
        const double lhs = std::abs(integrate(*item.g * row.cf));
        for (double r : p.r_list) {
            const double rp = dual_exponent(r);
            const YoungFunction lr = YoungFunction::power(r);
            const double rhs = s.kernel.sup_norm() *
                               (rp * rp * bilinear_form(fam, item.f, *item.g, l1, lr) +
                                rp * bilinear_form(fam, item.f, *item.g, phi, lr) +
                                rp * bilinear_form(fam, item.f, *item.g, psi1, lr) +
                                bilinear_form(fam, item.f, *item.g, psi2, lr));
            row.ratios.push_back(rhs > 0.0 ? std::optional<double>(lhs / rhs) : std::nullopt);
        }
    });

    FitReport rep;
    rep.check = "commutator";
    rep.params = {{"r_list", p.r_list},
                  {"weights", p.weights},
                  {"alpha_multipliers", p.alpha_multipliers},
                  {"corpus", p.corpus.to_json()}};
    rep.bound.slope_max = p.slope_max;
    std::vector<double> x;
    for (double r : p.r_list) x.push_back(std::log(dual_exponent(r)));
    std::vector<std::vector<double>> logs;
    bool all_verified = true;
    nlohmann::json skipped = nlohmann::json::array(), bmo = nlohmann::json::object(),
                   covered = nlohmann::json::object();
    const double box = s.domain.cell_area() * static_cast<double>(s.domain.cell_count());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto& item = corpus.items[k];
        all_verified = all_verified && rows[k].verified.ok;
        bmo[item.name] = rows[k].bmo;
        // share of the box inside each level set; near 1 means the sweep hit the boundary
        std::vector<double> share;
        for (double m : p.alpha_multipliers) share.push_back(superlevel_measure(rows[k].cf, alpha_for(rows[k].cf, m)) / box);
        covered[item.name] = share;
        bool degenerate = false;
        for (const auto& r : rows[k].ratios) degenerate = degenerate || !r || !(*r > 0.0);
        if (degenerate) {
            skipped.push_back(item.name);
        } else {
            std::vector<double> lr;
            for (std::size_t a = 0; a < p.r_list.size(); ++a) {
                rep.items.push_back({item.name + "/r=" + num(p.r_list[a]), *rows[k].ratios[a], p.r_list[a], "domination"});
                lr.push_back(std::log(*rows[k].ratios[a]));
            }
            logs.push_back(std::move(lr));
        }
        for (const auto& w : weights) {
            const double factor = w.a1 * w.ainf * w.ainf * std::log(std::numbers::e + w.ainf);
            for (double m : p.alpha_multipliers) {
                const double alpha = alpha_for(rows[k].cf, m);
                const double r = superlevel_measure(rows[k].cf, alpha, w.weight) /
                                 (factor * young_integral(item.f, alpha, psi2, &w.weight.values()));
                rep.items.push_back({item.name + "/" + w.spec + "/a=" + num(m), r, m, "weak:" + w.spec});
            }
        }
    }
    if (!logs.empty() && p.r_list.size() >= 2) rep.slope = pooled_slope(logs, x);
    rep.extra_ok = all_verified;
    nlohmann::json wj = nlohmann::json::array();
    for (const auto& w : weights) wj.push_back({{"weight", w.spec}, {"a1", w.a1}, {"ainf", w.ainf}});
    rep.details = {{"weights", wj}, {"bmo", bmo}, {"level_set_box_share", covered},
                   {"skipped", skipped}, {"sparse_verified", all_verified}};
    rep.finalize();
    return rep;
}

FitReport check_cz_properties(const VerifySetup& s, const CZParams& p) {
    require_list(p.lambda_list, "lambda_list");
    const Corpus corpus = make_corpus(s.domain, p.corpus);
    require_nonempty(corpus);
    const DyadicLattice lattice = DyadicLattice::standard(s.domain);

    std::vector<std::vector<CZConstants>> consts(corpus.items.size());
    std::vector<std::vector<std::size_t>> counts(corpus.items.size());
    parallel_for(0, consts.size(), [&](std::size_t k) {
        const GridFunction f = with_peak(corpus.items[k].f, p.peak);
        for (double lam : p.lambda_list) {
            const CZDecomposition dec = cz_decompose(f, lam, lattice, p.c1);
            consts[k].push_back(cz_constants(dec));
            counts[k].push_back(dec.cubes.size());
        }
    });

    FitReport rep;
    rep.check = "cz_properties";
    rep.params = {{"lambda_list", p.lambda_list}, {"c1", p.c1}, {"peak", p.peak}, {"corpus", p.corpus.to_json()}};
    double recon = 0.0, mean_zero = 0.0, l1_ratio = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < consts.size(); ++k)
        for (std::size_t a = 0; a < p.lambda_list.size(); ++a) {
            const auto& c = consts[k][a];
            const std::string tag = corpus.items[k].name + "/lambda=" + num(p.lambda_list[a]);
            const double lam = p.lambda_list[a];
            rep.items.push_back({tag + "/ii", c.ii, lam, "ii"});
            rep.items.push_back({tag + "/iii", c.iii, lam, "iii"});
            rep.items.push_back({tag + "/iv", c.iv, lam, "iv"});
            rep.items.push_back({tag + "/eq2_6", c.eq2_6, lam, "eq2_6"});
            recon = std::max(recon, c.reconstruction);
            mean_zero = std::max(mean_zero, c.mean_zero);
            l1_ratio = std::max(l1_ratio, c.l1_ratio);
            rows.push_back({{"item", tag},
                            {"num_cubes", counts[k][a]},
                            {"measure_of_union", c.measure_of_union},
                            {"eq2_6_l2", c.eq2_6_l2},
                            {"dilate_measure", c.dilate_measure}});
        }
    rep.extra_ok = recon <= 1e-12 && mean_zero <= 1e-12 && l1_ratio <= 2.0 * (1.0 + 1e-12);
    rep.details = {{"max_reconstruction_error", recon},
                   {"max_mean_zero", mean_zero},
                   {"max_l1_ratio", l1_ratio},
                   {"decompositions", rows}};
    rep.finalize();
    return rep;
}

// ---- parameter plumbing for the driver

namespace {

class Reader {
public:
    Reader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ParseError(where_ + ": parameters must be an object");
    }

    template <class T>
    void read(const char* key, T& out) {
        seen_.push_back(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ParseError(where_ + ": bad value for '" + key + "'");
        }
    }
    void read_list(const char* key, std::vector<double>& out) {
        read(key, out);
        if (j_.contains(key) && out.empty()) throw ParseError(where_ + ": '" + std::string(key) + "' must not be empty");
    }
    void read_weights(std::vector<std::string>& out) {
        read("weights", out);
        if (out.empty()) throw ParseError(where_ + ": weights must not be empty");
        const Domain probe(1.0, 16);
        for (const auto& w : out) {
            try {
                (void)Weight::preset(probe, w);
            } catch (const std::exception& e) {
                throw ParseError(where_ + ": " + e.what());
            }
        }
    }
    void read_corpus(CorpusSpec& out) {
        seen_.push_back("corpus");
        if (!j_.contains("corpus")) return;
        nlohmann::json merged = out.to_json();
        if (!j_.at("corpus").is_object()) throw ParseError(where_ + ": corpus must be an object");
        for (const auto& [k, v] : j_.at("corpus").items()) merged[k] = v;
        try {
            out = CorpusSpec::from_json(merged);
        } catch (const nlohmann::json::exception&) {
            throw ParseError(where_ + ": bad corpus specification");
        } catch (const ParseError& e) {
            throw ParseError(where_ + ": " + e.what());
        }
    }
    void read_sparse(SparseBuildParams& out) {
        seen_.push_back("sparse");
        if (!j_.contains("sparse")) return;
        Reader r(j_.at("sparse"), where_ + ".sparse");
        r.read("threshold_multiplier", out.threshold_multiplier);
        r.read("eta_target", out.eta_target);
        r.read("max_depth", out.max_depth);
        r.read("escalation_factor", out.escalation_factor);
        r.read("max_escalations", out.max_escalations);
        r.read("lambda", out.lambda);
        r.finish();
        try {
            out.validate();
        } catch (const std::invalid_argument& e) {
            throw ParseError(where_ + ".sparse: " + e.what());
        }
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (std::find(seen_.begin(), seen_.end(), k) == seen_.end())
                throw ParseError(where_ + ": unknown key '" + k + "'");
    }

private:
    nlohmann::json j_;
    std::string where_;
    std::vector<std::string> seen_;
};

nlohmann::json sparse_json(const SparseBuildParams& s) {
    return {{"threshold_multiplier", s.threshold_multiplier}, {"eta_target", s.eta_target},
            {"max_depth", s.max_depth},                       {"escalation_factor", s.escalation_factor},
            {"max_escalations", s.max_escalations},           {"lambda", s.lambda}};
}

template <class P>
P parse_params(const nlohmann::json& j, const std::string& where, std::uint64_t seed,
               const std::function<void(Reader&, P&)>& fill) {
    P p;
    Reader r(j.is_null() ? nlohmann::json::object() : j, where);
    fill(r, p);
    r.finish();
    if constexpr (requires { p.corpus; }) {
        if (seed) p.corpus.seed = seed;
    } else {
        if (seed) p.seed = seed;
    }
    return p;
}

struct Entry {
    CheckInfo info;
    std::function<FitReport(const VerifySetup*, const nlohmann::json&, std::uint64_t)> run;  // null setup: parse only
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = [] {
        std::vector<Entry> e;
        {
            DominationParams d;
            e.push_back({{"domination",
                          "|<g, T*f>| <= C |Omega|_inf (r' A_{S,L1,Lr}(f,g) + A_{S,Lphi,Lr}(f,g)) for a sparse S",
                          {{"r_list", d.r_list}, {"corpus", d.corpus.to_json()}, {"sparse", sparse_json(d.sparse)},
                           {"slope_max", d.slope_max}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<DominationParams>(j, "domination", seed, [](Reader& r, auto& p) {
                                 r.read_list("r_list", p.r_list);
                                 r.read_corpus(p.corpus);
                                 r.read_sparse(p.sparse);
                                 r.read("slope_max", p.slope_max);
                             });
                             if (!s) return {};
                             return check_domination(*s, p);
                         }});
        }
        {
            WeakTypeParams d;
            e.push_back({{"weak_type_tstar",
                          "w({T*f > a}) <= C [w]_A1 [w]_Ainf log(e + [w]_Ainf) int phi(|f|/a) w",
                          {{"alpha_multipliers", d.alpha_multipliers}, {"weights", d.weights},
                           {"corpus", d.corpus.to_json()}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<WeakTypeParams>(j, "weak_type_tstar", seed, [](Reader& r, auto& p) {
                                 r.read_list("alpha_multipliers", p.alpha_multipliers);
                                 r.read_weights(p.weights);
                                 r.read_corpus(p.corpus);
                             });
                             if (!s) return {};
                             return check_weak_type_tstar(*s, p);
                         }});
        }
        {
            GrandMaximalParams d;
            e.push_back({{"grand_maximal_endpoint",
                          "|{M_{lambda,T**} f > a}| <= C ((1 + log 1/lambda) int |f|/a + int phi(|f|/a))",
                          {{"lambda_list", d.lambda_list}, {"alpha_multipliers", d.alpha_multipliers},
                           {"corpus", d.corpus.to_json()}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<GrandMaximalParams>(j, "grand_maximal_endpoint", seed,
                                                                       [](Reader& r, auto& p) {
                                                                           r.read_list("lambda_list", p.lambda_list);
                                                                           r.read_list("alpha_multipliers",
                                                                                       p.alpha_multipliers);
                                                                           r.read_corpus(p.corpus);
                                                                       });
                             for (double l : p.lambda_list)
                                 if (!(l > 0.0 && l < 1.0)) throw ParseError("grand_maximal_endpoint: lambda outside (0, 1)");
                             if (!s) return {};
                             return check_grand_maximal_endpoint(*s, p);
                         }});
        }
        {
            SharpWeakTypeParams d;
            e.push_back({{"sharp_weak_type",
                          "|{M_{p,T*} f > a}| <= C (p int |f|/a + int phi(|f|/a))",
                          {{"p_list", d.p_list}, {"alpha_multipliers", d.alpha_multipliers},
                           {"corpus", d.corpus.to_json()}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<SharpWeakTypeParams>(j, "sharp_weak_type", seed,
                                                                        [](Reader& r, auto& p) {
                                                                            r.read_list("p_list", p.p_list);
                                                                            r.read_list("alpha_multipliers",
                                                                                        p.alpha_multipliers);
                                                                            r.read_corpus(p.corpus);
                                                                        });
                             if (!s) return {};
                             return check_sharp_weak_type(*s, p);
                         }});
        }
        {
            CoifmanFeffermanParams d;
            e.push_back({{"coifman_fefferman",
                          "|T*f|_Lp(w) <= C |Omega| ([w]_Ainf^2 |Mf|_Lp(w) + [w]_Ainf log(e + [w]_Ainf) |M_phi f|_Lp(w))",
                          {{"p_list", d.p_list}, {"weights", d.weights}, {"corpus", d.corpus.to_json()}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<CoifmanFeffermanParams>(j, "coifman_fefferman", seed,
                                                                           [](Reader& r, auto& p) {
                                                                               r.read_list("p_list", p.p_list);
                                                                               r.read_weights(p.weights);
                                                                               r.read_corpus(p.corpus);
                                                                           });
                             if (!s) return {};
                             return check_coifman_fefferman(*s, p);
                         }});
        }
        {
            DecayParams d;
            e.push_back({{"mollification_decay",
                          "|T - T_l|_{L2->L2} <= C 2^{-kappa l} |Omega|_inf and |H_m**|_{L2->L2} <= C 2^{-kappa 2^m} |Omega|_inf",
                          {{"l_list", d.l_list}, {"m_list", d.m_list}, {"bank_size", d.bank_size}, {"seed", d.seed},
                           {"slope_max", d.slope_max}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<DecayParams>(j, "mollification_decay", seed, [](Reader& r, auto& p) {
                                 r.read("l_list", p.l_list);
                                 r.read("m_list", p.m_list);
                                 r.read("bank_size", p.bank_size);
                                 r.read("seed", p.seed);
                                 r.read("slope_max", p.slope_max);
                             });
                             if (p.l_list.empty() || p.m_list.empty())
                                 throw ParseError("mollification_decay: sweeps must not be empty");
                             for (int l : p.l_list)
                                 if (l < 0) throw ParseError("mollification_decay: l must be >= 0");
                             for (int m : p.m_list)
                                 if (m < 1) throw ParseError("mollification_decay: m must be >= 1");
                             if (!s) return {};
                             return check_mollification_decay(*s, p);
                         }});
        }
        {
            RefinementParams d;
            e.push_back({{"refinement", "<|f|>_{phi,Q} <= C (log(1 + r') <|f|>_Q + <|f|>_{r,Q})",
                          {{"r_list", d.r_list}, {"corpus", d.corpus.to_json()}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<RefinementParams>(j, "refinement", seed, [](Reader& r, auto& p) {
                                 r.read_list("r_list", p.r_list);
                                 r.read_corpus(p.corpus);
                             });
                             for (double r : p.r_list)
                                 if (!(r > 1.0)) throw ParseError("refinement: r must exceed 1");
                             if (!s) return {};
                             return check_refinement(*s, p);
                         }});
        }
        {
            CommutatorParams d;
            e.push_back({{"commutator",
                          "|<g, [b,T]*f>| <= C |Omega| (r'^2 A_{L1,Lr} + r' A_{Lphi,Lr} + r' A_{Lpsi1,Lr} + A_{Lpsi2,Lr}) "
                          "and w({[b,T]*f > a}) <= C [w]_A1 [w]_Ainf^2 log(e + [w]_Ainf) int psi2(|f|/a) w",
                          {{"r_list", d.r_list}, {"weights", d.weights}, {"alpha_multipliers", d.alpha_multipliers},
                           {"corpus", d.corpus.to_json()}, {"sparse", sparse_json(d.sparse)}, {"slope_max", d.slope_max}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<CommutatorParams>(j, "commutator", seed, [](Reader& r, auto& p) {
                                 r.read_list("r_list", p.r_list);
                                 r.read_weights(p.weights);
                                 r.read_list("alpha_multipliers", p.alpha_multipliers);
                                 r.read_corpus(p.corpus);
                                 r.read_sparse(p.sparse);
                                 r.read("slope_max", p.slope_max);
                             });
                             p.corpus.with_g = p.corpus.with_b = true;
                             if (!s) return {};
                             return check_commutator(*s, p);
                         }});
        }
        {
            CZParams d;
            e.push_back({{"cz_properties",
                          "f = g + sum b_{P,1}^l + b_{P,2}^l with int b_{P,2}^l = 0, |G^l|_2^2 <= C 2^{c1 2^l} / lambda |f|_1, "
                          "|sum |b_{P,1}^l||_inf <= C / lambda, |g|_inf <= C 2^{c1} / lambda, |sum_l |G_1^l||_1 <= C |f|_1",
                          {{"lambda_list", d.lambda_list}, {"c1", d.c1}, {"peak", d.peak}, {"corpus", d.corpus.to_json()}}},
                         [](const VerifySetup* s, const nlohmann::json& j, std::uint64_t seed) -> FitReport {
                             auto p = parse_params<CZParams>(j, "cz_properties", seed, [](Reader& r, auto& p) {
                                 r.read_list("lambda_list", p.lambda_list);
                                 r.read("c1", p.c1);
                                 r.read("peak", p.peak);
                                 r.read_corpus(p.corpus);
                             });
                             for (double l : p.lambda_list)
                                 if (!(l > 0.0 && l < 1.0)) throw ParseError("cz_properties: lambda outside (0, 1)");
                             if (!(p.c1 > 0.0 && p.c1 < 0.25)) throw ParseError("cz_properties: c1 outside (0, 1/4)");
                             if (!(p.peak > 0.0)) throw ParseError("cz_properties: peak must be positive");
                             if (!s) return {};
                             return check_cz_properties(*s, p);
                         }});
        }
        return e;
    }();
    return entries;
}

}  // namespace

const std::vector<CheckInfo>& check_catalog() {
    static const std::vector<CheckInfo> infos = [] {
        std::vector<CheckInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return infos;
}

FitReport run_check(const std::string& name, const VerifySetup& s, const nlohmann::json& params,
                    std::uint64_t seed_override) {
    for (const auto& e : registry())
        if (e.info.name == name) return e.run(&s, params, seed_override);
    throw ParseError("unknown check '" + name + "'");
}

void validate_check_params(const std::string& name, const nlohmann::json& params) {
    for (const auto& e : registry())
        if (e.info.name == name) {
            e.run(nullptr, params, 0);
            return;
        }
    throw ParseError("unknown check '" + name + "'");
}

}  // namespace roughwave

#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "roughwave/dyadic.hpp"
#include "roughwave/grid.hpp"

namespace roughwave {

// Bad part of f on one stopping cube P at one level l: the cells of P where
// t_{l-1} < |f| <= t_l, with t_l = 2^{c1 2^l} / lambda, and the mean of f over
// them taken with respect to |P|.
struct CZLevelPiece {
    std::size_t cube = 0;
    int level = 1;
    double mean = 0.0;
    std::vector<std::uint32_t> cells;
};

struct CZDecomposition {
    double lambda = 0.5;
    double c1 = 0.2;
    double threshold = 2.0;  // 1 / lambda
    GridFunction original;
    std::vector<Cube> cubes;
    GridFunction good;
    std::vector<CZLevelPiece> pieces;
    int max_level = 0;

    double level_threshold(int l) const;  // t_l; t_0 = 2^{c1} / lambda
    // part 0: b_P^l, 1: averaged part, 2: b_P^l minus averaged part
    GridFunction piece_function(std::size_t index, int part) const;
};

CZDecomposition cz_decompose(const GridFunction& f, double lambda, const DyadicLattice& lattice, double c1 = 0.2);

enum class CZAggregate { g_all, g_averaged, g_oscillating };

// G^l, G_1^l or G_2^l; restricted to stopping cubes of side 2^j cells when
// j >= 0, which gives B_j^l, B_{j,1}^l and B_{j,2}^l.
GridFunction aggregate(const CZDecomposition& dec, CZAggregate which, int l, int j = -1);

struct CZConstants {
    double ii = 0.0;         // max_l ||G^l||_2^2 / (t_l ||f||_1)
    double iii = 0.0;        // ||sum |b_{P,1}^l| ||_inf * lambda
    double iv = 0.0;         // ||g||_inf / t_0
    double eq2_6 = 0.0;      // ||sum_l |G_1^l| ||_1 / ||f||_1
    double eq2_6_l2 = 0.0;   // ||sum_l |G_1^l| ||_2^2 * lambda / ||f||_1
    double mean_zero = 0.0;  // max |int b_{P,2}^l| / ||b_{P,2}^l||_1
    double l1_ratio = 0.0;   // max ||b_{P,2}^l||_1 / int_{level set} |f|
    double reconstruction = 0.0;
    double measure_of_union = 0.0;
    double dilate_measure = 0.0;  // |union of 72 P| inside the box
};

CZConstants cz_constants(const CZDecomposition& dec);
nlohmann::json cz_report(const CZDecomposition& dec, const CZConstants& c);

}  // namespace roughwave

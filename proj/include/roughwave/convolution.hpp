#pragma once

#include <span>

#include "roughwave/dyadic.hpp"
#include "roughwave/grid.hpp"
#include "roughwave/kernel.hpp"

namespace roughwave {

// out(x) += scale * sum_z k(z) f(x - z) over target cells x in dst and source
// cells x - z in src. out holds dst row-major.
void accumulate_convolution(const GridFunction& f, const OffsetKernel& k, const CellRect& src,
                            const CellRect& dst, std::span<double> out, double scale);

// Discrete convolution h^2 sum_y k(x - y) f(y) on the whole box.
GridFunction convolve(const GridFunction& f, const OffsetKernel& k);

}  // namespace roughwave

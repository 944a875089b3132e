#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "roughwave/errors.hpp"

namespace roughwave {

// The box [-L, L)^2 split into N x N cells; samples sit at cell centers.
// Cell (i, j) has first coordinate indexed by i and second by j.
class Domain {
public:
    Domain(double half_width, std::size_t resolution);

    double half_width() const noexcept { return half_width_; }
    std::size_t resolution() const noexcept { return n_; }
    std::size_t cell_count() const noexcept { return n_ * n_; }
    double cell_size() const noexcept { return 2.0 * half_width_ / static_cast<double>(n_); }
    double cell_area() const noexcept { return cell_size() * cell_size(); }
    double diameter() const noexcept;
    double center(std::int64_t index) const noexcept {
        return -half_width_ + (static_cast<double>(index) + 0.5) * cell_size();
    }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return i * n_ + j; }
    int log2_resolution() const noexcept;

    bool operator==(const Domain&) const = default;

private:
    double half_width_;
    std::size_t n_;
};

// Piecewise-constant function on a Domain, zero outside the box.
class GridFunction {
public:
    explicit GridFunction(Domain domain);
    GridFunction(Domain domain, std::vector<double> values);

    static GridFunction generate(Domain domain, const std::function<double(double, double)>& fn);

    const Domain& domain() const noexcept { return domain_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator()(std::size_t i, std::size_t j) const noexcept {
        return values_[domain_.index(i, j)];
    }
    std::size_t size() const noexcept { return values_.size(); }

    GridFunction abs() const;
    GridFunction map(const std::function<double(double)>& fn) const;
    GridFunction operator*(double s) const;
    GridFunction operator+(const GridFunction& o) const;
    GridFunction operator-(const GridFunction& o) const;
    GridFunction operator*(const GridFunction& o) const;
    double sup_norm() const noexcept;

    bool operator==(const GridFunction&) const = default;

private:
    Domain domain_;
    std::vector<double> values_;
};

void require_same_domain(const Domain& a, const Domain& b);

double integrate(const GridFunction& f);
double lp_norm(const GridFunction& f, double p);  // p = infinity allowed
double superlevel_measure(const GridFunction& f, double alpha);
// Weighted measure w({|f| > alpha}); weight given by its cell values.
double superlevel_measure(const GridFunction& f, double alpha, const GridFunction& weight);

std::string to_csv(const GridFunction& f);
GridFunction from_csv(const Domain& domain, const std::string& csv);
// Writes <stem>.csv and the <stem>.json sidecar carrying the domain.
void save(const GridFunction& f, const std::filesystem::path& stem);
GridFunction load(const std::filesystem::path& stem);

}  // namespace roughwave

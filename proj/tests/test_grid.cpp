#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "roughwave/grid.hpp"

using namespace roughwave;

namespace {

GridFunction random_grid(const Domain& dom, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(dom.cell_count());
    for (double& x : v) x = u(gen);
    return GridFunction(dom, std::move(v));
}

}  // namespace

TEST_SUITE("grid") {
    TEST_CASE("domain validation") {
        CHECK_THROWS_AS(Domain(1.0, 8), DomainError);
        CHECK_THROWS_AS(Domain(1.0, 48), DomainError);
        CHECK_THROWS_AS(Domain(0.0, 16), DomainError);
        CHECK_THROWS_AS(Domain(-1.0, 16), DomainError);
        const Domain d(1.5, 32);
        CHECK(d.cell_size() == 2.0 * 1.5 / 32.0);
        CHECK(d.center(0) == doctest::Approx(-1.5 + d.cell_size() / 2));
        CHECK(d.index(2, 3) == 2 * 32 + 3);
    }

    TEST_CASE("values must be finite and sized") {
        const Domain d(1.0, 16);
        CHECK_THROWS_AS(GridFunction(d, std::vector<double>(10, 0.0)), DomainError);
        std::vector<double> v(d.cell_count(), 0.0);
        v[5] = std::nan("");
        CHECK_THROWS_AS(GridFunction(d, v), DomainError);
        v[5] = INFINITY;
        CHECK_THROWS_AS(GridFunction(d, v), DomainError);
    }

    TEST_CASE("binary ops need one domain") {
        const GridFunction a(Domain(1.0, 16)), b(Domain(1.0, 32)), c(Domain(2.0, 16));
        CHECK_THROWS_AS(a + b, DomainError);
        CHECK_THROWS_AS(a * c, DomainError);
    }

    TEST_CASE("integrate constants") {
        const Domain d(1.0, 16);
        CHECK(integrate(GridFunction(d, std::vector<double>(d.cell_count(), 1.0))) == doctest::Approx(4.0).epsilon(1e-15));
        CHECK(integrate(GridFunction(d)) == 0.0);
    }

    TEST_CASE("integrate gaussian against a factorized 1-D oracle") {
        const double sigma = 0.1;
        // oracle: the Gaussian separates, so its 2-D midpoint sum is the square of a 1-D one at N = 4096
        const std::size_t fine = 4096;
        const double hf = 2.0 / static_cast<double>(fine);
        long double line = 0.0L;
        for (std::size_t k = 0; k < fine; ++k) {
            const double x = -1.0 + (static_cast<double>(k) + 0.5) * hf;
            line += std::exp(-std::numbers::pi * x * x / (sigma * sigma));
        }
        const double oracle = static_cast<double>(line * line) * hf * hf;
        const GridFunction g = GridFunction::generate(Domain(1.0, 256), [&](double x, double y) {
            return std::exp(-std::numbers::pi * (x * x + y * y) / (sigma * sigma));
        });
        CHECK(std::abs(integrate(g) - oracle) <= 1e-6 * oracle);
    }

    TEST_CASE("integrate is linear") {
        const Domain d(1.0, 64);
        const GridFunction f = random_grid(d, 1), g = random_grid(d, 2);
        const double lhs = integrate(f * 2.5 + g * -0.75);
        const double rhs = 2.5 * integrate(f) - 0.75 * integrate(g);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (std::abs(2.5 * integrate(f.abs())) + 0.75 * integrate(g.abs())));
    }

    TEST_CASE("lp norms") {
        const Domain d(1.0, 32);
        const GridFunction unit_square =
            GridFunction::generate(d, [](double x, double y) { return x >= 0 && y >= 0 ? 1.0 : 0.0; });
        CHECK(lp_norm(unit_square, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
        const GridFunction c(d, std::vector<double>(d.cell_count(), -3.25));
        CHECK(lp_norm(c, INFINITY) == 3.25);
        CHECK_THROWS(lp_norm(c, 0.5));
        CHECK(lp_norm(GridFunction(d), 3.0) == 0.0);
    }

    TEST_CASE("lp norm matches a naive sum") {
        const Domain d(1.0, 64);
        const GridFunction f = random_grid(d, 7);
        long double s = 0.0L;
        for (double v : f.values()) s += std::pow(std::abs(static_cast<long double>(v)), 3.0L);
        const double oracle = std::cbrt(static_cast<double>(s) * d.cell_area());
        CHECK(std::abs(lp_norm(f, 3.0) - oracle) <= 1e-12 * oracle);
    }

    TEST_CASE("triangle inequality") {
        const Domain d(1.0, 32);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const GridFunction f = random_grid(d, 100 + seed), g = random_grid(d, 200 + seed);
            for (double p : {1.0, 1.5, 2.0, 4.0, 9.0})
                CHECK(lp_norm(f + g, p) <= lp_norm(f, p) + lp_norm(g, p) + 1e-10);
        }
    }

    TEST_CASE("superlevel measure") {
        const Domain d(1.0, 16);
        CHECK(superlevel_measure(GridFunction(d), 0.1) == 0.0);
        const GridFunction e = GridFunction::generate(d, [](double x, double y) { return x < 0 && y < 0.5 ? 2.0 : 0.0; });
        CHECK(superlevel_measure(e, 1.0) == doctest::Approx(1.0 * 1.5));
        const GridFunction w(d, std::vector<double>(d.cell_count(), 3.0));
        CHECK(superlevel_measure(e, 1.0, w) == doctest::Approx(3.0 * 1.5));
    }

    TEST_CASE("superlevel at the median covers half") {
        const Domain d(1.0, 64);
        const GridFunction f = random_grid(d, 3).abs();
        std::vector<double> sorted(f.values().begin(), f.values().end());
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        const double half = 0.5 * static_cast<double>(d.cell_count()) * d.cell_area();
        CHECK(std::abs(superlevel_measure(f, median) - half) <= d.cell_area());
    }

    TEST_CASE("superlevel measure is non-increasing") {
        const Domain d(1.0, 32);
        const GridFunction f = random_grid(d, 4);
        double prev = INFINITY;
        for (double a = 0.01; a < 1.2; a += 0.05) {
            const double m = superlevel_measure(f, a);
            CHECK(m <= prev);
            prev = m;
        }
    }

    TEST_CASE("csv round trip is bit exact") {
        const Domain d(0.75, 16);
        const GridFunction f = random_grid(d, 5) * 1e-7;
        CHECK(from_csv(d, to_csv(f)) == f);
        const auto stem = std::filesystem::temp_directory_path() / "roughwave_grid_roundtrip";
        save(f, stem);
        CHECK(load(stem) == f);
        CHECK_THROWS_AS(from_csv(d, "0,0,1\n"), ParseError);
        CHECK_THROWS_AS(from_csv(d, "0;0;1\n"), ParseError);
    }
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "roughwave/operators.hpp"
#include "roughwave/orlicz.hpp"

using namespace roughwave;

namespace {

// scalar bisection for t log log(e^2 + t) = 1, in long double
double phi_unit_root() {
    long double lo = 0.5L, hi = 2.0L;
    const long double e2 = std::exp(2.0L);
    for (int k = 0; k < 200; ++k) {
        const long double mid = 0.5L * (lo + hi);
        (mid * std::log(std::log(e2 + mid)) > 1.0L ? hi : lo) = mid;
    }
    return static_cast<double>(1.0L / (0.5L * (lo + hi)));
}

GridFunction random_positive(const Domain& dom, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(dom.cell_count());
    for (double& x : v) x = std::pow(e(gen), 2.0);
    return GridFunction(dom, std::move(v));
}

}  // namespace

TEST_SUITE("orlicz") {
    TEST_CASE("young functions") {
        const double e = std::numbers::e;
        CHECK(YoungFunction::phi()(3.0) == doctest::Approx(3.0 * std::log(std::log(e * e + 3.0))));
        CHECK(YoungFunction::psi1()(3.0) == doctest::Approx(3.0 * std::log(e + 3.0)));
        CHECK(YoungFunction::psi2()(3.0) == doctest::Approx(3.0 * std::log(e + 3.0) * std::log(std::log(e * e + 3.0))));
        CHECK(YoungFunction::power(2.5)(2.0) == doctest::Approx(std::pow(2.0, 2.5)));
        for (const auto& y : {YoungFunction::phi(), YoungFunction::psi1(), YoungFunction::psi2(), YoungFunction::power(1.0),
                              YoungFunction::power(3.0)}) {
            CHECK(y(0.0) == 0.0);
            double prev = 0.0;
            for (double t = 0.01; t < 200.0; t *= 1.05) {
                const double a = y(t / 1.05), b = y(t), c = y(t * 1.05);
                CHECK(b >= prev);
                prev = b;
                // convexity on the geometric grid: slope does not decrease
                CHECK((c - b) / (t * 0.05) >= (b - a) / (t - t / 1.05) * (1 - 1e-12));
            }
        }
        // log log(e^2 + t) >= 1 exactly from t = e^e - e^2 (about 7.76, just above e^2)
        const double from = std::exp(e) - e * e;
        CHECK(YoungFunction::phi()(e * e) < e * e);
        for (double t = from; t < 1e6; t *= 1.3) {
            CHECK(YoungFunction::phi()(t) >= t);
            CHECK(YoungFunction::psi2()(t) >= t);
        }
        CHECK(YoungFunction::phi()(1.0) < 1.0);
    }

    TEST_CASE("young function names") {
        CHECK(YoungFunction::parse("phi").kind() == YoungFunction::Kind::phi_loglog);
        CHECK(YoungFunction::parse("psi2").kind() == YoungFunction::Kind::psi2);
        CHECK(YoungFunction::parse("power:1.5").exponent() == 1.5);
        CHECK(YoungFunction::parse(YoungFunction::psi1().name()).kind() == YoungFunction::Kind::psi1);
        CHECK_THROWS(YoungFunction::parse("power:0.5"));
        CHECK_THROWS(YoungFunction::parse("power:x"));
        CHECK_THROWS(YoungFunction::parse("cosh"));
    }

    TEST_CASE("constants") {
        const std::vector<double> ones(16, 1.0);
        CHECK(luxemburg_norm(ones, 16.0, YoungFunction::phi()) == doctest::Approx(phi_unit_root()).epsilon(1e-8));
        CHECK(phi_unit_root() == doctest::Approx(0.771).epsilon(1e-3));
        const std::vector<double> c(9, 2.75);
        for (double p : {1.0, 1.5, 4.0}) CHECK(luxemburg_norm(c, 9.0, YoungFunction::power(p)) == doctest::Approx(2.75).epsilon(1e-10));
        CHECK(luxemburg_norm(std::vector<double>{}, 4.0, YoungFunction::phi()) == 0.0);
        CHECK(luxemburg_norm(std::vector<double>(4, 0.0), 4.0, YoungFunction::psi2()) == 0.0);
    }

    TEST_CASE("bisection residual and power closed form") {
        const Domain dom(1.0, 32);
        const GridFunction f = random_positive(dom, 11);
        const Cube q{4, 8, 16};
        const auto vals = cube_abs_values(f, q);
        for (const auto& y : {YoungFunction::phi(), YoungFunction::psi1(), YoungFunction::psi2()}) {
            const auto r = luxemburg_solve(vals, 256.0, y);
            CHECK(r.average <= 1.0);
            CHECK(r.average >= 1.0 - 1e-8);
            long double s = 0.0L;
            for (double v : vals) s += y(v / r.norm);
            CHECK(static_cast<double>(s / 256.0L) == doctest::Approx(r.average).epsilon(1e-12));
        }
        for (double p : {1.0, 2.0, 3.5}) {
            long double s = 0.0L;
            for (double v : vals) s += std::pow(static_cast<long double>(v), p);
            const double closed = static_cast<double>(std::pow(s / 256.0L, 1.0L / p));
            CHECK(std::abs(luxemburg_norm(f, q, YoungFunction::power(p)) - closed) <= 1e-10 * closed);
            CHECK(std::abs(power_average(vals, 256.0, p) - closed) <= 1e-12 * closed);
        }
    }

    TEST_CASE("cube reaching outside the box counts the outside as zero") {
        const Domain dom(1.0, 16);
        const GridFunction one(dom, std::vector<double>(dom.cell_count(), 1.0));
        const Cube q{-2, -2, 4};
        CHECK(luxemburg_norm(one, q, YoungFunction::power(1.0)) == doctest::Approx(0.25));
    }

    TEST_CASE("homogeneity") {
        const Domain dom(1.0, 32);
        const GridFunction f = random_positive(dom, 12);
        const Cube q{0, 0, 32};
        for (const auto& y : {YoungFunction::phi(), YoungFunction::psi1(), YoungFunction::psi2()}) {
            const double a = luxemburg_norm(f, q, y), b = luxemburg_norm(f * 3.0, q, y);
            CHECK(std::abs(b - 3.0 * a) <= 1e-9 * 3.0 * a);
        }
    }

    TEST_CASE("norm is monotone in the young function") {
        const Domain dom(1.0, 32);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const GridFunction f = random_positive(dom, 20 + seed);
            const Cube q{8, 0, 16};
            const double l1 = luxemburg_norm(f, q, YoungFunction::power(1.0));
            const double ph = luxemburg_norm(f, q, YoungFunction::phi());
            const double p1 = luxemburg_norm(f, q, YoungFunction::psi1());
            // power(1) <= psi1 and phi <= psi1 pointwise on [0, inf)
            CHECK(l1 <= p1 * (1 + 1e-9));
            CHECK(ph <= p1 * (1 + 1e-9));
        }
    }

    TEST_CASE("orlicz maximal") {
        const Domain dom(1.0, 16);
        const CubeFamily fam(dom);
        const GridFunction c(dom, std::vector<double>(dom.cell_count(), 1.5));
        const GridFunction m = orlicz_maximal(c, YoungFunction::power(1.0), fam);
        for (double v : m.values()) CHECK(v == doctest::Approx(1.5).epsilon(1e-14));
        const GridFunction f = random_positive(dom, 30);
        const GridFunction a = orlicz_maximal(f, YoungFunction::power(1.0), fam), b = hl_maximal(f, fam, 1.0);
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a.values()[k] - b.values()[k]) <= 1e-12 * b.values()[k]);
        const GridFunction p = orlicz_maximal(f, YoungFunction::psi1(), fam);
        for (std::size_t k = 0; k < a.size(); ++k) CHECK(p.values()[k] >= a.values()[k] * (1 - 1e-9));
    }

    TEST_CASE("refinement inequality") {
        const Domain dom(1.0, 16);
        const Cube q{0, 0, 16};
        const GridFunction one(dom, std::vector<double>(dom.cell_count(), 1.0));
        for (double r : {1.1, 2.0, 16.0}) CHECK(check_refinement_inequality(one, q, r) <= 1.0);
        std::vector<double> v(dom.cell_count(), 0.0);
        v[dom.index(5, 5)] = 1e6;
        const GridFunction spike(dom, v);
        for (double r : {1.1, 2.0, 16.0}) {
            const double ratio = check_refinement_inequality(spike, q, r);
            CHECK(std::isfinite(ratio));
            CHECK(ratio <= 1.0);
            CHECK(check_refinement_inequality(spike * 7.0, q, r) == doctest::Approx(ratio).epsilon(1e-9));
        }
        CHECK(check_refinement_inequality(GridFunction(dom), q, 2.0) == 0.0);
        CHECK(dual_exponent(4.0) == doctest::Approx(4.0 / 3.0));
        CHECK_THROWS(dual_exponent(1.0));
    }
}

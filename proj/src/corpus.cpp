#include "roughwave/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace roughwave {

std::int64_t SeededRng::integer(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    return std::min(hi, lo + static_cast<std::int64_t>(std::floor(uniform() * span)));
}

double SeededRng::normal() {
    // Box-Muller on the fixed uniform
    const double u = 1.0 - uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

namespace {

const std::vector<std::string> known_families{"gaussian", "indicator", "mix", "spike", "noise", "oscillating"};

void add_gaussians(std::vector<double>& v, const Domain& dom, SeededRng& rng, int count, bool positive) {
    const double l = dom.half_width();
    const double h = dom.cell_size();
    const auto n = static_cast<std::int64_t>(dom.resolution());
    for (int c = 0; c < count; ++c) {
        const double x0 = rng.uniform(-0.5 * l, 0.5 * l), y0 = rng.uniform(-0.5 * l, 0.5 * l);
        const double sigma = std::max(2.0 * h, rng.uniform(l / 16.0, l / 4.0));
        const double amp = rng.uniform(0.5, 2.0) * (positive ? 1.0 : rng.sign());
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < n; ++j) {
                const double dx = dom.center(i) - x0, dy = dom.center(j) - y0;
                v[static_cast<std::size_t>(i * n + j)] += amp * std::exp(-std::numbers::pi * (dx * dx + dy * dy) / (sigma * sigma));
            }
    }
}

void add_indicators(std::vector<double>& v, const Domain& dom, SeededRng& rng, int count, bool positive) {
    const auto n = static_cast<std::int64_t>(dom.resolution());
    for (int c = 0; c < count; ++c) {
        const std::int64_t side = rng.integer(std::max<std::int64_t>(2, n / 32), n / 4);
        const std::int64_t i0 = rng.integer(n / 8, n - n / 8 - side);
        const std::int64_t j0 = rng.integer(n / 8, n - n / 8 - side);
        const double amp = rng.uniform(0.5, 2.0) * (positive ? 1.0 : rng.sign());
        for (std::int64_t i = i0; i < i0 + side; ++i)
            for (std::int64_t j = j0; j < j0 + side; ++j) v[static_cast<std::size_t>(i * n + j)] += amp;
    }
}

void add_spikes(std::vector<double>& v, const Domain& dom, SeededRng& rng, int count) {
    const auto n = static_cast<std::int64_t>(dom.resolution());
    for (int c = 0; c < count; ++c) {
        const std::int64_t i = rng.integer(3 * n / 8, 5 * n / 8 - 1);
        const std::int64_t j = rng.integer(3 * n / 8, 5 * n / 8 - 1);
        v[static_cast<std::size_t>(i * n + j)] += rng.uniform(20.0, 200.0) * rng.sign();
    }
}

}  // namespace

GridFunction random_function(const Domain& dom, const std::string& family, SeededRng& rng) {
    std::vector<double> v(dom.cell_count(), 0.0);
    const auto n = static_cast<std::int64_t>(dom.resolution());
    if (family == "gaussian") {
        add_gaussians(v, dom, rng, static_cast<int>(rng.integer(1, 3)), false);
    } else if (family == "indicator") {
        add_indicators(v, dom, rng, static_cast<int>(rng.integer(1, 3)), false);
    } else if (family == "mix") {
        add_gaussians(v, dom, rng, static_cast<int>(rng.integer(1, 2)), false);
        add_indicators(v, dom, rng, static_cast<int>(rng.integer(1, 2)), false);
    } else if (family == "spike") {
        add_spikes(v, dom, rng, static_cast<int>(rng.integer(1, 4)));
        add_gaussians(v, dom, rng, 1, true);
        for (double& x : v) x = std::abs(x) < 1e-3 ? 0.0 : x;
    } else if (family == "noise") {
        const std::int64_t side = rng.integer(n / 8, n / 2);
        const std::int64_t i0 = rng.integer(0, n - side), j0 = rng.integer(0, n - side);
        for (std::int64_t i = i0; i < i0 + side; ++i)
            for (std::int64_t j = j0; j < j0 + side; ++j) v[static_cast<std::size_t>(i * n + j)] = rng.normal();
    } else if (family == "oscillating") {
        const double l = dom.half_width();
        const double kx = rng.uniform(-0.4, 0.4) * static_cast<double>(n) / l;
        const double ky = rng.uniform(-0.4, 0.4) * static_cast<double>(n) / l;
        const double sigma = rng.uniform(l / 8.0, l / 3.0);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < n; ++j) {
                const double x = dom.center(i), y = dom.center(j);
                v[static_cast<std::size_t>(i * n + j)] =
                    std::exp(-std::numbers::pi * (x * x + y * y) / (sigma * sigma)) * std::cos(kx * x + ky * y + phase);
            }
    } else {
        throw std::invalid_argument("unknown corpus family '" + family + "'");
    }
    return GridFunction(dom, std::move(v));
}

GridFunction random_test_function(const Domain& dom, SeededRng& rng) {
    std::vector<double> v(dom.cell_count(), 0.0);
    add_gaussians(v, dom, rng, static_cast<int>(rng.integer(1, 2)), true);
    add_indicators(v, dom, rng, 1, true);
    return GridFunction(dom, std::move(v));
}

GridFunction random_symbol(const Domain& dom, SeededRng& rng) {
    const double l = dom.half_width();
    const double a = rng.uniform(1.0, 3.0) / l, b = rng.uniform(1.0, 3.0) / l;
    const double p = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return GridFunction::generate(dom, [&](double x, double y) { return std::sin(a * x + p) + std::cos(b * y); });
}

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
    CorpusSpec s;
    for (const auto& [key, value] : j.items()) {
        if (key == "seed")
            s.seed = value.get<std::uint64_t>();
        else if (key == "size")
            s.size = value.get<std::size_t>();
        else if (key == "families")
            s.families = value.get<std::vector<std::string>>();
        else if (key == "with_g")
            s.with_g = value.get<bool>();
        else if (key == "with_b")
            s.with_b = value.get<bool>();
        else
            throw ParseError("unknown corpus key '" + key + "'");
    }
    if (s.size == 0) throw ParseError("corpus size must be positive");
    if (s.families.empty()) throw ParseError("corpus needs at least one family");
    for (const auto& f : s.families)
        if (std::find(known_families.begin(), known_families.end(), f) == known_families.end())
            throw ParseError("unknown corpus family '" + f + "'");
    return s;
}

nlohmann::json CorpusSpec::to_json() const {
    return {{"seed", seed}, {"size", size}, {"families", families}, {"with_g", with_g}, {"with_b", with_b}};
}

Corpus make_corpus(const Domain& dom, const CorpusSpec& spec) {
    Corpus c;
    c.name = "corpus-" + std::to_string(spec.seed);
    for (std::size_t k = 0; k < spec.size; ++k) {
        const std::uint64_t seed = spec.seed * 1000003ULL + k;
        SeededRng rng(seed);
        const std::string& family = spec.families[k % spec.families.size()];
        CorpusItem item{family + "-" + std::to_string(k), seed, random_function(dom, family, rng), {}, {}};
        if (item.f.sup_norm() == 0.0) item.f = random_function(dom, "gaussian", rng);
        if (spec.with_g) item.g = random_test_function(dom, rng);
        if (spec.with_b) item.b = random_symbol(dom, rng);
        c.items.push_back(std::move(item));
    }
    return c;
}

}  // namespace roughwave

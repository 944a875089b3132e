#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "roughwave/grid.hpp"

namespace roughwave {

// mt19937_64 with a fixed bit-level mapping to doubles, so streams agree
// across standard libraries.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::int64_t integer(std::int64_t lo, std::int64_t hi);  // inclusive
    double sign() { return uniform() < 0.5 ? -1.0 : 1.0; }
    double normal();

private:
    std::mt19937_64 engine_;
};

struct CorpusItem {
    std::string name;
    std::uint64_t seed = 0;
    GridFunction f;
    std::optional<GridFunction> g;
    std::optional<GridFunction> b;
};

struct Corpus {
    std::string name;
    std::vector<CorpusItem> items;
};

// Families: "gaussian", "indicator", "mix", "spike", "noise", "oscillating".
struct CorpusSpec {
    std::uint64_t seed = 1;
    std::size_t size = 20;
    std::vector<std::string> families{"mix"};
    bool with_g = false;
    bool with_b = false;

    static CorpusSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

GridFunction random_function(const Domain& dom, const std::string& family, SeededRng& rng);
// Nonnegative Gaussian and indicator mix.
GridFunction random_test_function(const Domain& dom, SeededRng& rng);
// Smooth bounded symbol for commutators.
GridFunction random_symbol(const Domain& dom, SeededRng& rng);

Corpus make_corpus(const Domain& dom, const CorpusSpec& spec);

}  // namespace roughwave

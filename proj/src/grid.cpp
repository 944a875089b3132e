#include "roughwave/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "roughwave/sum.hpp"

namespace roughwave {

Domain::Domain(double half_width, std::size_t resolution) : half_width_(half_width), n_(resolution) {
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw DomainError("half_width must be positive and finite");
    if (resolution < 16 || !std::has_single_bit(resolution))
        throw DomainError("resolution must be a power of two >= 16, got " + std::to_string(resolution));
}

double Domain::diameter() const noexcept { return 2.0 * std::sqrt(2.0) * half_width_; }

int Domain::log2_resolution() const noexcept { return std::countr_zero(n_); }

GridFunction::GridFunction(Domain domain) : domain_(domain), values_(domain.cell_count(), 0.0) {}

GridFunction::GridFunction(Domain domain, std::vector<double> values)
    : domain_(domain), values_(std::move(values)) {
    if (values_.size() != domain_.cell_count())
        throw DomainError("value count " + std::to_string(values_.size()) + " does not match N^2 = " +
                          std::to_string(domain_.cell_count()));
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("grid values must be finite");
}

GridFunction GridFunction::generate(Domain domain, const std::function<double(double, double)>& fn) {
    std::vector<double> v(domain.cell_count());
    const std::size_t n = domain.resolution();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            v[domain.index(i, j)] = fn(domain.center(static_cast<std::int64_t>(i)),
                                       domain.center(static_cast<std::int64_t>(j)));
    return GridFunction(domain, std::move(v));
}

GridFunction GridFunction::abs() const {
    return map([](double x) { return std::abs(x); });
}

GridFunction GridFunction::map(const std::function<double(double)>& fn) const {
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(), fn);
    return GridFunction(domain_, std::move(v));
}

GridFunction GridFunction::operator*(double s) const {
    return map([s](double x) { return s * x; });
}

namespace {

template <class Op>
GridFunction zip(const GridFunction& a, const GridFunction& b, Op op) {
    require_same_domain(a.domain(), b.domain());
    std::vector<double> v(a.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = op(a.values()[k], b.values()[k]);
    return GridFunction(a.domain(), std::move(v));
}

}  // namespace

GridFunction GridFunction::operator+(const GridFunction& o) const {
    return zip(*this, o, std::plus<>{});
}
GridFunction GridFunction::operator-(const GridFunction& o) const {
    return zip(*this, o, std::minus<>{});
}
GridFunction GridFunction::operator*(const GridFunction& o) const {
    return zip(*this, o, std::multiplies<>{});
}

double GridFunction::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void require_same_domain(const Domain& a, const Domain& b) {
    if (!(a == b)) throw DomainError("grid functions live on different domains");
}

double integrate(const GridFunction& f) {
    return compensated_sum(f.values()) * f.domain().cell_area();
}

double lp_norm(const GridFunction& f, double p) {
    if (std::isinf(p)) return f.sup_norm();
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm needs p >= 1");
    const double top = f.sup_norm();
    if (top == 0.0) return 0.0;
    CompensatedSum s;
    if (p == 1.0) {
        for (double v : f.values()) s.add(std::abs(v));
        return s.value() * f.domain().cell_area();
    }
    for (double v : f.values()) s.add(std::pow(std::abs(v) / top, p));
    return top * std::pow(s.value() * f.domain().cell_area(), 1.0 / p);
}

double superlevel_measure(const GridFunction& f, double alpha) {
    std::size_t count = 0;
    for (double v : f.values())
        if (std::abs(v) > alpha) ++count;
    return static_cast<double>(count) * f.domain().cell_area();
}

double superlevel_measure(const GridFunction& f, double alpha, const GridFunction& weight) {
    require_same_domain(f.domain(), weight.domain());
    CompensatedSum s;
    for (std::size_t k = 0; k < f.size(); ++k)
        if (std::abs(f.values()[k]) > alpha) s.add(weight.values()[k]);
    return s.value() * f.domain().cell_area();
}

std::string to_csv(const GridFunction& f) {
    std::string out;
    out.reserve(f.size() * 32);
    const std::size_t n = f.domain().resolution();
    char buf[64];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const int len = std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", i, j, f(i, j));
            out.append(buf, static_cast<std::size_t>(len));
        }
    return out;
}

GridFunction from_csv(const Domain& domain, const std::string& csv) {
    const std::size_t n = domain.resolution();
    std::vector<double> v(domain.cell_count(), 0.0);
    std::vector<char> seen(domain.cell_count(), 0);
    std::istringstream in(csv);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t i = 0, j = 0;
        double value = 0.0;
        char* end = nullptr;
        const char* p = line.c_str();
        i = std::strtoull(p, &end, 10);
        if (*end != ',') throw ParseError("bad CSV row " + std::to_string(lineno));
        j = std::strtoull(end + 1, &end, 10);
        if (*end != ',') throw ParseError("bad CSV row " + std::to_string(lineno));
        value = std::strtod(end + 1, &end);
        if (i >= n || j >= n) throw ParseError("cell index out of range on row " + std::to_string(lineno));
        v[domain.index(i, j)] = value;
        seen[domain.index(i, j)] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
        throw ParseError("CSV does not cover every cell");
    return GridFunction(domain, std::move(v));
}

void save(const GridFunction& f, const std::filesystem::path& stem) {
    auto csv_path = stem;
    csv_path += ".csv";
    auto json_path = stem;
    json_path += ".json";
    std::ofstream(csv_path) << to_csv(f);
    nlohmann::json header{{"half_width", f.domain().half_width()},
                          {"resolution", f.domain().resolution()}};
    std::ofstream(json_path) << header.dump(2) << '\n';
}

GridFunction load(const std::filesystem::path& stem) {
    auto csv_path = stem;
    csv_path += ".csv";
    auto json_path = stem;
    json_path += ".json";
    std::ifstream hj(json_path);
    if (!hj) throw ParseError("missing sidecar " + json_path.string());
    const auto header = nlohmann::json::parse(hj);
    const Domain dom(header.at("half_width").get<double>(), header.at("resolution").get<std::size_t>());
    std::ifstream cf(csv_path);
    if (!cf) throw ParseError("missing " + csv_path.string());
    std::stringstream buf;
    buf << cf.rdbuf();
    return from_csv(dom, buf.str());
}

}  // namespace roughwave

#include "roughwave/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "roughwave/errors.hpp"

namespace roughwave {

double median_of(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    if (sxx == 0.0) throw std::invalid_argument("slope fit needs distinct abscissae");
    return sxy / sxx;
}

void FitReport::finalize() {
    std::vector<double> ratios;
    for (const auto& it : items) ratios.push_back(it.ratio);
    max = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
    median = median_of(ratios);
    bool ok = !ratios.empty() && extra_ok;
    for (double r : ratios) ok = ok && std::isfinite(r);
    if (bound.max_over_median) {
        std::map<std::string, std::vector<double>> groups;
        for (const auto& it : items) groups[it.group].push_back(it.ratio);
        for (const auto& [name, rs] : groups)
            ok = ok && *std::max_element(rs.begin(), rs.end()) <= *bound.max_over_median * median_of(rs);
    }
    if (bound.slope_max) ok = ok && slope && *slope <= *bound.slope_max;
    pass = ok;
}

nlohmann::json to_json(const FitReport& r) {
    nlohmann::json items = nlohmann::json::array();
    for (const auto& it : r.items) {
        nlohmann::json e{{"name", it.name}, {"ratio", it.ratio}};
        if (it.parameter) e["parameter"] = *it.parameter;
        if (!it.group.empty()) e["group"] = it.group;
        items.push_back(std::move(e));
    }
    nlohmann::json bound = nlohmann::json::object();
    if (r.bound.max_over_median) bound["max_over_median"] = *r.bound.max_over_median;
    if (r.bound.slope_max) bound["slope_max"] = *r.bound.slope_max;
    nlohmann::json j{{"check", r.check},  {"params", r.params}, {"items", items},     {"max", r.max},
                     {"median", r.median}, {"bound", bound},     {"pass", r.pass},     {"details", r.details},
                     {"extra_ok", r.extra_ok}};
    if (r.slope) j["slope"] = *r.slope;
    return j;
}

FitReport fit_report_from_json(const nlohmann::json& j) {
    try {
        FitReport r;
        r.check = j.at("check").get<std::string>();
        r.params = j.at("params");
        for (const auto& e : j.at("items")) {
            FitItem it{e.at("name").get<std::string>(), e.at("ratio").get<double>(), {}, {}};
            if (e.contains("parameter")) it.parameter = e.at("parameter").get<double>();
            if (e.contains("group")) it.group = e.at("group").get<std::string>();
            r.items.push_back(std::move(it));
        }
        r.max = j.at("max").get<double>();
        r.median = j.at("median").get<double>();
        r.pass = j.at("pass").get<bool>();
        if (j.contains("slope")) r.slope = j.at("slope").get<double>();
        if (j.contains("bound")) {
            const auto& b = j.at("bound");
            r.bound.max_over_median.reset();
            if (b.contains("max_over_median")) r.bound.max_over_median = b.at("max_over_median").get<double>();
            if (j.at("bound").contains("slope_max")) r.bound.slope_max = j.at("bound").at("slope_max").get<double>();
        }
        if (j.contains("details")) r.details = j.at("details");
        if (j.contains("extra_ok")) r.extra_ok = j.at("extra_ok").get<bool>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what());
    }
}

std::string to_csv(const FitReport& r) {
    std::ostringstream out;
    out << "check,group,name,parameter,ratio\n";
    char buf[64];
    for (const auto& it : r.items) {
        out << r.check << ',' << it.group << ',' << it.name << ',';
        if (it.parameter) {
            std::snprintf(buf, sizeof buf, "%.17g", *it.parameter);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g", it.ratio);
        out << ',' << buf << '\n';
    }
    return out.str();
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

std::string to_svg(const FitReport& r) {
    const double w = 640, h = 400, ml = 70, mr = 20, mt = 40, mb = 50;
    std::vector<std::pair<double, double>> pts;
    bool log_x = true;
    for (std::size_t k = 0; k < r.items.size(); ++k) {
        const auto& it = r.items[k];
        if (!(it.ratio > 0.0) || !std::isfinite(it.ratio)) continue;
        double x = it.parameter ? *it.parameter : static_cast<double>(k + 1);
        pts.emplace_back(x, it.ratio);
        if (!(x > 0.0)) log_x = false;
    }
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << ml << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << r.check
      << (r.pass ? " (pass)" : " (fail)") << "</text>\n";
    s << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    if (!pts.empty()) {
        auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
        double x0 = std::numeric_limits<double>::max(), x1 = -x0, y0 = x0, y1 = -x0;
        for (auto [x, y] : pts) {
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, std::log10(y));
            y1 = std::max(y1, std::log10(y));
        }
        if (x1 - x0 < 1e-12) {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if (y1 - y0 < 1e-12) {
            y0 -= 0.5;
            y1 += 0.5;
        }
        auto px = [&](double x) { return ml + (tx(x) - x0) / (x1 - x0) * (w - ml - mr); };
        auto py = [&](double y) { return h - mb - (std::log10(y) - y0) / (y1 - y0) * (h - mt - mb); };
        for (auto [x, y] : pts)
            s << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"3\" fill=\"steelblue\"/>\n";
        const double med = r.median > 0.0 ? r.median : 0.0;
        if (med > 0.0) {
            const double lim = med * r.bound.max_over_median.value_or(1.0);
            for (double level : {med, lim}) {
                if (std::log10(level) < y0 || std::log10(level) > y1) continue;
                s << "<line x1=\"" << ml << "\" x2=\"" << w - mr << "\" y1=\"" << fmt(py(level)) << "\" y2=\""
                  << fmt(py(level)) << "\" stroke=\"" << (level == med ? "gray" : "firebrick")
                  << "\" stroke-dasharray=\"4 3\"/>\n";
            }
        }
        s << "<text x=\"" << ml << "\" y=\"" << h - 15 << "\" font-family=\"sans-serif\" font-size=\"12\">"
          << (log_x ? "log10 parameter " : "item ") << fmt(x0) << " .. " << fmt(x1) << "</text>\n";
        s << "<text x=\"5\" y=\"" << mt + 10 << "\" font-family=\"sans-serif\" font-size=\"12\">log10 ratio</text>\n";
        s << "<text x=\"5\" y=\"" << mt + 26 << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(y0) << " .. "
          << fmt(y1) << "</text>\n";
        if (r.slope)
            s << "<text x=\"" << w - 200 << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"12\">slope "
              << fmt(*r.slope) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

void write_report(const FitReport& r, const std::filesystem::path& dir, bool plots) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& ext, const std::string& text) {
        std::ofstream out(dir / (r.check + ext), std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (dir / (r.check + ext)).string());
        out << text;
    };
    write(".json", to_json(r).dump(2) + "\n");
    write(".csv", to_csv(r));
    if (plots) write(".svg", to_svg(r));
}

}  // namespace roughwave

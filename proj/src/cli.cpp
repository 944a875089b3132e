#include "roughwave/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "roughwave/errors.hpp"
#include "roughwave/parallel.hpp"

namespace roughwave {

namespace {

const char* const top_keys[] = {"schema_version", "domain", "kernel", "corpus", "checks", "output_dir", "plots"};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string what = e.what();
        const auto pos = what.find("syntax error");
        throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                         (pos == std::string::npos ? what : what.substr(pos)));
    }
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (std::find(std::begin(top_keys), std::end(top_keys), key) == std::end(top_keys))
            throw ParseError("unknown config key '" + key + "'");

    ExperimentConfig cfg;
    try {
        if (!j.contains("schema_version")) throw ParseError("missing schema_version");
        cfg.schema_version = j.at("schema_version").get<int>();
        if (cfg.schema_version != 1) throw ParseError("unsupported schema_version " + std::to_string(cfg.schema_version));

        if (j.contains("domain")) {
            const auto& d = j.at("domain");
            if (!d.is_object()) throw ParseError("domain must be an object");
            for (const auto& [key, _] : d.items())
                if (key != "half_width" && key != "resolution") throw ParseError("unknown domain key '" + key + "'");
            if (d.contains("half_width")) cfg.half_width = d.at("half_width").get<double>();
            if (d.contains("resolution")) cfg.resolution = d.at("resolution").get<std::size_t>();
        }
        try {
            Domain check(cfg.half_width, cfg.resolution);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("domain: ") + e.what());
        }
        if (j.contains("kernel")) cfg.kernel = j.at("kernel");
        try {
            (void)RoughKernel::from_json(cfg.kernel);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("kernel: ") + e.what());
        }
        if (j.contains("corpus")) {
            cfg.corpus = j.at("corpus");
            if (!cfg.corpus.is_object()) throw ParseError("corpus must be an object");
        }
        if (!j.contains("checks")) throw ParseError("missing checks");
        const auto& checks = j.at("checks");
        if (!checks.is_object() || checks.empty()) throw ParseError("checks must be a non-empty object");
        // object keys come back sorted; recover the written order
        const auto written = nlohmann::ordered_json::parse(text);
        std::vector<std::string> order;
        for (const auto& [name, _] : written.at("checks").items()) order.push_back(name);
        for (const auto& name : order) {
            const auto& params = checks.at(name);
            const auto& cat = check_catalog();
            if (std::none_of(cat.begin(), cat.end(), [&](const CheckInfo& c) { return c.name == name; }))
                throw ParseError("unknown check '" + name + "'");
            if (!params.is_object()) throw ParseError("parameters of '" + name + "' must be an object");
            cfg.checks.emplace_back(name, params);
        }
        if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("plots")) cfg.plots = j.at("plots").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config type error: ") + e.what());
    }

    for (auto& [name, params] : cfg.checks) {
        if (!cfg.corpus.empty()) {
            nlohmann::json merged = cfg.corpus;
            if (params.contains("corpus")) {
                if (!params.at("corpus").is_object()) throw ParseError(name + ": corpus must be an object");
                for (const auto& [k, v] : params.at("corpus").items()) merged[k] = v;
            }
            params["corpus"] = merged;
        }
        validate_check_params(name, params);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read config " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_config(s.str());
}

namespace {

struct Outcome {
    std::string name;
    bool pass = false;
    double seconds = 0.0;
};

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log) {
    const std::filesystem::path out = opts.output_dir.value_or(cfg.output_dir);
    const bool plots = cfg.plots && !opts.no_plots;
    const VerifySetup setup{Domain(cfg.half_width, cfg.resolution), RoughKernel::from_json(cfg.kernel)};
    const std::uint64_t seed = opts.seed.value_or(0);

    std::vector<FitReport> reports;
    std::vector<Outcome> outcomes;
    for (const auto& [name, params] : cfg.checks) {
        const auto start = std::chrono::steady_clock::now();
        FitReport rep;
        try {
            rep = run_check(name, setup, params, seed);
        } catch (const ParseError& e) {
            log << "config error: " << e.what() << '\n';
            return exit_config_error;
        } catch (const std::exception& e) {
            log << "compute failure in " << name << ": " << e.what() << '\n';
            return exit_compute_error;
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log << (rep.pass ? "PASS " : "FAIL ") << name << "  max " << rep.max << "  median " << rep.median;
        if (rep.slope) log << "  slope " << *rep.slope;
        char buf[32];
        std::snprintf(buf, sizeof buf, "  (%.1f s)\n", secs);
        log << buf;
        outcomes.push_back({name, rep.pass, secs});
        reports.push_back(std::move(rep));
    }

    try {
        std::filesystem::create_directories(out);
        nlohmann::json summary{{"schema_version", cfg.schema_version},
                               {"domain", {{"half_width", cfg.half_width}, {"resolution", cfg.resolution}}},
                               {"kernel", cfg.kernel},
                               {"checks", nlohmann::json::array()}};
        bool all = true;
        for (const auto& r : reports) {
            write_report(r, out, plots);
            summary["checks"].push_back({{"check", r.check}, {"pass", r.pass}, {"max", r.max}, {"median", r.median}});
            all = all && r.pass;
        }
        summary["pass"] = all;
        write_text(out / "summary.json", summary.dump(2) + "\n");
        nlohmann::json meta{{"finished_at", timestamp()}, {"jobs", jobs()}, {"seed_override", seed},
                            {"timings", nlohmann::json::object()}};
        for (const auto& o : outcomes) meta["timings"][o.name] = o.seconds;
        write_text(out / "metadata.json", meta.dump(2) + "\n");
        return all ? exit_pass : exit_check_failed;
    } catch (const std::exception& e) {
        log << "compute failure while writing reports: " << e.what() << '\n';
        return exit_compute_error;
    }
}

std::string describe() {
    std::ostringstream s;
    for (const auto& c : check_catalog()) {
        s << c.name << "\n  checks: " << c.inequality << "\n  defaults: " << c.defaults.dump() << "\n";
    }
    return s.str();
}

int rerender_reports(const std::filesystem::path& dir, std::ostream& log) {
    if (!std::filesystem::is_directory(dir)) {
        log << "no report directory " << dir.string() << '\n';
        return exit_config_error;
    }
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".json" && e.path().filename() != "summary.json" &&
            e.path().filename() != "metadata.json")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        try {
            const FitReport r = fit_report_from_json(nlohmann::json::parse(in));
            write_text(dir / (r.check + ".svg"), to_svg(r));
            log << "rendered " << r.check << ".svg\n";
        } catch (const std::exception& e) {
            log << "skipping " << f.filename().string() << ": " << e.what() << '\n';
        }
    }
    return exit_pass;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"roughwave: rough singular integrals and sparse bounds on a grid"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned job_count = 0;
    bool no_plots = false;

    auto* run = app.add_subcommand("run", "run the checks selected in a config");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (overrides the config)");
    run->add_option("--seed", seed, "replace every corpus seed");
    run->add_option("--jobs", job_count, "worker threads (default: ROUGHWAVE_JOBS or 1)");
    run->add_flag("--no-plots", no_plots, "skip SVG output");

    app.add_subcommand("describe", "list checks and their default parameters");

    auto* report = app.add_subcommand("report", "re-render plots from existing report JSON");
    report->add_option("--out", out_dir, "report directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_pass : exit_config_error;
    }

    if (app.got_subcommand("describe")) {
        std::cout << describe();
        return exit_pass;
    }
    if (app.got_subcommand("report")) return rerender_reports(out_dir, std::cerr);

    if (job_count > 0) set_jobs(job_count);
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config_error;
    }
    RunOptions opts;
    if (!out_dir.empty()) opts.output_dir = out_dir;
    if (seed != 0) opts.seed = seed;
    opts.no_plots = no_plots;
    return run_experiment(cfg, opts, std::cerr);
}

}  // namespace roughwave

#include "hyperbat/harness.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "hyperbat/errors.hpp"

namespace hyperbat {

using nlohmann::json;

std::vector<double> GridSpec::points() const {
    validate(*this);
    std::vector<double> pts(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double u = double(k) / double(count - 1);
        pts[static_cast<std::size_t>(k)] = log ? std::exp(std::log(start) + u * (std::log(stop) - std::log(start)))
                                               : start + u * (stop - start);
    }
    pts.front() = start;
    pts.back() = stop;
    return pts;
}

std::string GridSpec::to_string() const {
    std::string s = format_number(start) + ":" + format_number(stop) + ":" + std::to_string(count);
    return log ? s + ":log" : s;
}

GridSpec GridSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4)
        throw Error(ErrorKind::ConfigInvalid, "grid must be start:stop:count[:log], got '" + text + "'");
    GridSpec g;
    try {
        std::size_t used = 0;
        g.start = std::stod(parts[0], &used);
        g.stop = std::stod(parts[1]);
        g.count = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, "malformed grid '" + text + "'");
    }
    if (parts.size() == 4) {
        if (parts[3] == "log") g.log = true;
        else if (parts[3] != "lin") throw Error(ErrorKind::ConfigInvalid, "grid spacing must be 'log' or 'lin'");
    }
    validate(g);
    return g;
}

void validate(const GridSpec& grid) {
    if (grid.count < 2) throw Error(ErrorKind::ConfigInvalid, "grid count must be >= 2");
    if (!std::isfinite(grid.start) || !std::isfinite(grid.stop) || grid.stop < grid.start)
        throw Error(ErrorKind::ConfigInvalid, "grid needs finite start <= stop");
    if (grid.log && !(grid.start > 0.0)) throw Error(ErrorKind::ConfigInvalid, "log grids need positive endpoints");
}

std::string to_string(Mode m) {
    switch (m) {
    case Mode::Trace: return "trace";
    case Mode::SweepTE: return "sweep_tE";
    case Mode::SweepEmax: return "sweep_Emax";
    case Mode::Verify: return "verify";
    case Mode::Fig2a: return "fig2a";
    case Mode::Fig2b: return "fig2b";
    case Mode::Fig2c: return "fig2c";
    }
    return "trace";
}

std::optional<Mode> mode_from_string(const std::string& s) {
    for (Mode m : {Mode::Trace, Mode::SweepTE, Mode::SweepEmax, Mode::Verify, Mode::Fig2a, Mode::Fig2b, Mode::Fig2c})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

void validate(const RunConfig& config) {
    try {
        validate(config.params);
        validate(config.pulse);
    } catch (const Error& e) {
        throw Error(ErrorKind::ConfigInvalid, e.what());
    }
    if (config.grid) validate(*config.grid);
    if (config.n_max < 0) throw Error(ErrorKind::ConfigInvalid, "n_max must be >= 0");
    if (!(config.tol > 0.0) || config.tol >= 1.0) throw Error(ErrorKind::ConfigInvalid, "tol must lie in (0, 1)");
    if (config.jobs < 1) throw Error(ErrorKind::ConfigInvalid, "jobs must be >= 1");
}

json to_json(const RunConfig& c) {
    json j;
    j["schema"] = kSchemaVersion;
    j["params"] = {{"omega_b", c.params.omega_b}, {"g", c.params.g}, {"gamma", c.params.gamma}, {"Omega", c.params.Omega}};
    j["pulse"] = {{"kind", to_string(c.pulse.kind)}, {"tau", c.pulse.tau}, {"shape", to_string(c.pulse.shape)}};
    if (c.grid)
        j["grid"] = {{"start", c.grid->start}, {"stop", c.grid->stop}, {"count", c.grid->count}, {"log", c.grid->log}};
    else
        j["grid"] = nullptr;
    j["mode"] = to_string(c.mode);
    j["oracle"] = c.oracle ? "on" : "off";
    j["n_max"] = c.n_max;
    j["tol"] = c.tol;
    j["out"] = c.out;
    j["format"] = c.format == OutputFormat::Csv ? "csv" : "json";
    j["jobs"] = c.jobs;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    try {
        if (j.contains("schema") && j.at("schema").get<std::string>() != kSchemaVersion)
            throw Error(ErrorKind::ConfigInvalid, "unsupported schema '" + j.at("schema").get<std::string>() + "'");
        if (j.contains("params")) {
            const json& p = j.at("params");
            c.params.omega_b = p.value("omega_b", c.params.omega_b);
            c.params.g = p.value("g", c.params.g);
            c.params.gamma = p.value("gamma", c.params.gamma);
            c.params.Omega = p.value("Omega", c.params.Omega);
        }
        if (j.contains("pulse")) {
            const json& p = j.at("pulse");
            const auto kind = pulse_kind_from_string(p.value("kind", std::string("delta")));
            const auto shape = pulse_shape_from_string(p.value("shape", std::string("gaussian")));
            if (!kind || !shape) throw Error(ErrorKind::ConfigInvalid, "unknown pulse kind or shape");
            c.pulse = {*kind, p.value("tau", 0.0), *shape};
        }
        if (j.contains("grid") && !j.at("grid").is_null()) {
            const json& g = j.at("grid");
            if (g.is_string()) {
                c.grid = GridSpec::parse(g.get<std::string>());
            } else {
                c.grid = GridSpec{g.at("start").get<double>(), g.at("stop").get<double>(), g.at("count").get<int>(),
                                  g.value("log", false)};
            }
        }
        if (j.contains("mode")) {
            const auto m = mode_from_string(j.at("mode").get<std::string>());
            if (!m) throw Error(ErrorKind::ConfigInvalid, "unknown mode");
            c.mode = *m;
        }
        if (j.contains("oracle")) {
            const json& o = j.at("oracle");
            c.oracle = o.is_boolean() ? o.get<bool>() : o.get<std::string>() == "on";
        }
        c.n_max = j.value("n_max", c.n_max);
        c.tol = j.value("tol", c.tol);
        c.out = j.value("out", c.out);
        if (j.contains("format")) {
            const std::string f = j.at("format").get<std::string>();
            if (f != "csv" && f != "json") throw Error(ErrorKind::ConfigInvalid, "format must be csv or json");
            c.format = f == "csv" ? OutputFormat::Csv : OutputFormat::Json;
        }
        c.jobs = j.value("jobs", c.jobs);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, e.what());
    }
    validate(c);
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileIo, "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
    }
    return run_config_from_json(j);
}

int default_jobs() {
    if (const char* env = std::getenv("HYPERBAT_JOBS")) {
        int n = 0;
        const std::string s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec == std::errc() && ptr == s.data() + s.size() && n > 0) return n;
    }
    return 1;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex mu;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n && !failed; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::scoped_lock lock(mu);
                        if (!first) first = std::current_exception();
                        failed = true;
                    }
                }
            });
    }
    if (first) std::rethrow_exception(first);
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

void write_csv(std::ostream& os, const Table& table, const RunConfig& config) {
    os << "# schema: " << kSchemaVersion << "\n";
    os << "# mode: " << to_string(config.mode) << "\n";
    os << "# config: " << to_json(config).dump() << "\n";
    os << "# units:";
    for (std::size_t i = 0; i < table.units.size(); ++i) os << (i ? ", " : " ") << table.columns[i] << " [" << table.units[i] << "]";
    os << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
        os << "\n";
    }
}

void write_json(std::ostream& os, const Table& table, const RunConfig& config) {
    json j;
    j["schema"] = kSchemaVersion;
    j["config"] = to_json(config);
    j["columns"] = table.columns;
    j["units"] = table.units;
    j["rows"] = table.rows;
    os << j.dump(1) << "\n";
}

void write_table(const Table& table, const RunConfig& config) {
    auto emit = [&](std::ostream& os) {
        if (config.format == OutputFormat::Csv) write_csv(os, table, config);
        else write_json(os, table, config);
    };
    if (config.out.empty() || config.out == "-") {
        emit(std::cout);
        return;
    }
    std::ofstream os(config.out);
    if (!os) throw Error(ErrorKind::FileIo, "cannot write '" + config.out + "'");
    emit(os);
    if (!os) throw Error(ErrorKind::FileIo, "write to '" + config.out + "' failed");
}

Table read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileIo, "cannot open '" + path + "'");
    Table t;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<std::string> cells;
        for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
        if (header) {
            t.columns = cells;
            header = false;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace hyperbat

// harness.hpp - run configuration, grids, tabular output and the small
// worker pool shared by the command implementations.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperbat/params.hpp"

namespace hyperbat {

inline constexpr const char* kSchemaVersion = "hyperbat-v1";

/// start:stop:count[:log]
struct GridSpec {
    double start{0.0};
    double stop{1.0};
    int count{2};
    bool log{false};

    bool operator==(const GridSpec&) const = default;

    std::vector<double> points() const;
    std::string to_string() const;
    static GridSpec parse(const std::string& text);
};

void validate(const GridSpec& grid);

enum class Mode { Trace, SweepTE, SweepEmax, Verify, Fig2a, Fig2b, Fig2c };
enum class OutputFormat { Csv, Json };

std::string to_string(Mode m);
std::optional<Mode> mode_from_string(const std::string& s);

struct RunConfig {
    BatteryParams params{};
    PulseSpec pulse{};
    std::optional<GridSpec> grid; // empty: mode default
    Mode mode{Mode::Trace};
    bool oracle{false};
    int n_max{0}; // 0: automatic certified cutoff
    double tol{1e-8};
    std::string out; // empty: stdout (figure: ./figures)
    OutputFormat format{OutputFormat::Csv};
    int jobs{1};

    bool operator==(const RunConfig&) const = default;
};

void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
/// Missing fields keep their defaults; unknown schema versions are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

/// Default worker count: $HYPERBAT_JOBS if set and positive, else 1.
int default_jobs();

/// Runs fn(0..n-1) on up to `jobs` threads. The first exception is rethrown
/// after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> units;
    std::vector<std::vector<double>> rows;
};

/// Shortest round-trip formatting, independent of locale.
std::string format_number(double x);

void write_csv(std::ostream& os, const Table& table, const RunConfig& config);
void write_json(std::ostream& os, const Table& table, const RunConfig& config);
void write_table(const Table& table, const RunConfig& config);

/// Reads a table written by write_csv (header comments skipped).
Table read_csv(const std::string& path);

} // namespace hyperbat

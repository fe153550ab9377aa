#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwsim/environment.hpp"
#include "gwsim/simulator.hpp"

namespace gwsim {

/// Environment battery x agent config x replicate seeds.
struct SuiteSpec {
    std::vector<int> sizes{20, 100, 200};
    std::vector<int> magnitude_counts{5, 20, 100};
    AgentConfig config;
    int seeds_per_env = 1;
    std::uint64_t master_seed = 1;
    double alpha = 10.0;
    double smooth_bound = 5.0;

    void validate() const;
};

nlohmann::json to_json(const SuiteSpec& spec);
SuiteSpec suite_spec_from_json(const nlohmann::json& doc);
SuiteSpec load_suite_spec(const std::filesystem::path& path);

struct BatteryEntry {
    Environment environment;
    PreferenceProfile profile;
};

/// Environments in (size, magnitude count) order; each one's generation and
/// preference seeds depend only on the master seed and its id.
std::vector<BatteryEntry> generate_battery(const SuiteSpec& spec, int jobs = 1);

/// Replicate seed of a run: stable under growth of the battery.
std::uint64_t run_seed(std::uint64_t master_seed, const std::string& env_id, int replicate);

/// Condensed raw output of one run: metrics plus the per-iteration series
/// needed for averaging. Series index t holds the state at the start of
/// iteration t + 1 (index 0 is the initial state); only live states appear.
struct RunSummary {
    std::string env_id;
    int replicate = 0;
    std::uint64_t seed = 0;
    Metrics metrics;
    bool died = false;
    std::vector<double> happiness;
    std::vector<double> weighted_goodness;
};

RunSummary summarize_run(const RunResult& result, const std::string& env_id, int replicate, std::uint64_t seed);

struct MetricRow {
    std::string label;
    Metrics metrics;
    int runs = 0;
    int survivors = 0;
};

struct SeriesPoint {
    int t = 0;
    double happiness = 0.0;
    double weighted_goodness = 0.0;
    int alive = 0;
};

struct SuiteReport {
    std::vector<MetricRow> rows; // one per environment, battery order
    MetricRow mean;              // arithmetic mean of the rows
    std::vector<SeriesPoint> series;
    std::vector<RunSummary> runs; // ordered by (environment, replicate)
};

/// Rows are per-environment means over replicates; the mean row averages
/// rows; the series averages, at each t, the runs still alive there.
SuiteReport aggregate(std::vector<RunSummary> runs, const std::vector<std::string>& env_order);

SuiteReport run_suite(const SuiteSpec& spec, const std::vector<BatteryEntry>& battery, int jobs = 1);
SuiteReport run_suite(const SuiteSpec& spec, int jobs = 1);

struct SweepRow {
    nlohmann::json value;
    MetricRow summary;
};

struct SweepTable {
    std::string parameter;
    std::vector<SweepRow> rows;
};

/// One suite per value of `parameter` on a shared battery; each row is that
/// suite's mean row. Unknown parameters raise ConfigError listing valid keys.
SweepTable sweep(const std::string& parameter, const std::vector<nlohmann::json>& values, const SuiteSpec& base,
                 int jobs = 1);

// ---------------------------------------------------------------------------
// Export

inline constexpr const char* kSeriesConvention = "averaged over runs alive at iteration t";

void write_metrics_csv(const SuiteReport& report, std::ostream& out);
void write_series_csv(const SuiteReport& report, std::ostream& out);
void write_sweep_csv(const SweepTable& table, std::ostream& out);
void write_runs_jsonl(const SuiteReport& report, std::ostream& out);

std::vector<MetricRow> read_metrics_csv(std::istream& in);
std::vector<SeriesPoint> read_series_csv(std::istream& in);
std::vector<RunSummary> read_runs_jsonl(std::istream& in);

/// Writes metrics.csv, series.csv and runs.jsonl into `dir`.
void export_report(const SuiteReport& report, const std::filesystem::path& dir);
/// Rebuilds a report from runs.jsonl in `dir`.
SuiteReport load_report(const std::filesystem::path& dir);

} // namespace gwsim

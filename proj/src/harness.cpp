#include "gwsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "gwsim/errors.hpp"
#include "gwsim/rng.hpp"

namespace gwsim {

using nlohmann::json;

namespace {

/// Runs task(i) for i in [0, count) on `jobs` threads. The first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
    const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        threads.emplace_back([&] {
            while (!failed) {
                const std::size_t i = next++;
                if (i >= count) {
                    return;
                }
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    failed = true;
                }
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

Metrics mean_of(const std::vector<const Metrics*>& items) {
    Metrics m;
    if (items.empty()) {
        return m;
    }
    for (const Metrics* x : items) {
        m.fh += x->fh;
        m.mh += x->mh;
        m.hsd += x->hsd;
        m.ni += x->ni;
        m.wgfp += x->wgfp;
        m.mwg += x->mwg;
        m.mti += x->mti;
    }
    const double n = static_cast<double>(items.size());
    m.fh /= n;
    m.mh /= n;
    m.hsd /= n;
    m.ni /= n;
    m.wgfp /= n;
    m.mwg /= n;
    m.mti /= n;
    return m;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& text, long line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ParseError("csv line " + std::to_string(line_no) + ": '" + text + "' is not a number");
    }
}

void write_metric_cells(std::ostream& out, const Metrics& m) {
    out << ',' << m.mh << ',' << m.mwg << ',' << m.fh << ',' << m.hsd << ',' << m.ni << ',' << m.wgfp << ','
        << m.mti;
}

constexpr const char* kMetricHeader = "MH,MWG,FH,HSD,NI,WGFP,MTI";

} // namespace

void SuiteSpec::validate() const {
    if (sizes.empty() || magnitude_counts.empty()) {
        throw ConfigError("environment battery must not be empty");
    }
    if (seeds_per_env < 1) {
        throw ConfigError("seeds_per_env must be at least 1");
    }
    if (std::set<int>(sizes.begin(), sizes.end()).size() != sizes.size() ||
        std::set<int>(magnitude_counts.begin(), magnitude_counts.end()).size() != magnitude_counts.size()) {
        throw ConfigError("battery sizes and magnitude counts must be distinct");
    }
    for (int n : sizes) {
        if (n < 2) {
            throw ConfigError("battery grid sizes must be at least 2");
        }
    }
    for (int m : magnitude_counts) {
        if (m < 1) {
            throw ConfigError("battery magnitude counts must be at least 1");
        }
    }
    if (!(alpha > 0.0 && alpha <= kPreferenceDomain)) {
        throw ConfigError("alpha must lie in (0, 10]");
    }
    if (!(smooth_bound > 0.0 && smooth_bound <= 2.0 * alpha)) {
        throw ConfigError("smooth_bound must lie in (0, 2*alpha]");
    }
    config.validate();
}

json to_json(const SuiteSpec& spec) {
    return json{{"sizes", spec.sizes},
                {"magnitudes", spec.magnitude_counts},
                {"seeds_per_env", spec.seeds_per_env},
                {"master_seed", spec.master_seed},
                {"alpha", spec.alpha},
                {"smooth_bound", spec.smooth_bound},
                {"config", to_json(spec.config)}};
}

SuiteSpec suite_spec_from_json(const json& doc) {
    if (!doc.is_object()) {
        throw ConfigError("suite spec must be a JSON object");
    }
    static const std::set<std::string> known{"sizes",  "magnitudes",   "seeds_per_env", "master_seed",
                                             "alpha",  "smooth_bound", "config"};
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) {
            throw ConfigError("unknown suite spec key '" + key + "'");
        }
    }
    SuiteSpec spec;
    try {
        if (doc.contains("sizes")) spec.sizes = doc["sizes"].get<std::vector<int>>();
        if (doc.contains("magnitudes")) spec.magnitude_counts = doc["magnitudes"].get<std::vector<int>>();
        if (doc.contains("seeds_per_env")) spec.seeds_per_env = doc["seeds_per_env"].get<int>();
        if (doc.contains("master_seed")) spec.master_seed = doc["master_seed"].get<std::uint64_t>();
        if (doc.contains("alpha")) spec.alpha = doc["alpha"].get<double>();
        spec.smooth_bound = doc.contains("smooth_bound") ? doc["smooth_bound"].get<double>() : spec.alpha / 2.0;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("suite spec: ") + e.what());
    }
    if (doc.contains("config")) {
        spec.config = config_from_json(doc["config"]);
    }
    spec.validate();
    return spec;
}

SuiteSpec load_suite_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open suite spec " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": parse error at byte " + std::to_string(e.byte));
    }
    return suite_spec_from_json(doc);
}

std::vector<BatteryEntry> generate_battery(const SuiteSpec& spec, int jobs) {
    spec.validate();
    std::vector<std::pair<int, int>> cells;
    for (int n : spec.sizes) {
        for (int m : spec.magnitude_counts) {
            cells.emplace_back(n, m);
        }
    }
    std::vector<BatteryEntry> battery(cells.size());
    parallel_for(cells.size(), jobs, [&](std::size_t i) {
        const auto [n, m] = cells[i];
        const std::string id = environment_id(n, m);
        GenerationParams params{n, m, spec.alpha, spec.smooth_bound, derive_seed(spec.master_seed, id, 0)};
        battery[i].environment = generate_environment(params);
        battery[i].profile = assign_preferences(m, derive_seed(spec.master_seed, id, 1));
    });
    return battery;
}

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& env_id, int replicate) {
    return derive_seed(master_seed, env_id + "/run", static_cast<std::uint64_t>(replicate));
}

RunSummary summarize_run(const RunResult& result, const std::string& env_id, int replicate, std::uint64_t seed) {
    RunSummary s;
    s.env_id = env_id;
    s.replicate = replicate;
    s.seed = seed;
    s.metrics = result.metrics;
    s.died = result.died;
    const std::size_t n = result.records.size();
    if (n > 0) {
        s.happiness.reserve(n);
        s.weighted_goodness.reserve(n);
        s.happiness.push_back(result.initial_happiness);
        s.weighted_goodness.push_back(result.initial_weighted_goodness);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            s.happiness.push_back(result.records[i].happiness);
            s.weighted_goodness.push_back(result.records[i].weighted_goodness);
        }
    }
    return s;
}

SuiteReport aggregate(std::vector<RunSummary> runs, const std::vector<std::string>& env_order) {
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < env_order.size(); ++i) {
        rank.emplace(env_order[i], i);
    }
    for (const auto& r : runs) {
        if (!rank.contains(r.env_id)) {
            throw ValidationError("run for unknown environment " + r.env_id);
        }
    }
    std::stable_sort(runs.begin(), runs.end(), [&](const RunSummary& a, const RunSummary& b) {
        const auto ra = rank.at(a.env_id);
        const auto rb = rank.at(b.env_id);
        return ra != rb ? ra < rb : a.replicate < b.replicate;
    });

    SuiteReport report;
    std::vector<const Metrics*> row_metrics;
    for (const auto& id : env_order) {
        MetricRow row;
        row.label = id;
        std::vector<const Metrics*> items;
        for (const auto& r : runs) {
            if (r.env_id == id) {
                items.push_back(&r.metrics);
                ++row.runs;
                row.survivors += r.died ? 0 : 1;
            }
        }
        row.metrics = mean_of(items);
        report.rows.push_back(row);
    }
    for (const auto& row : report.rows) {
        row_metrics.push_back(&row.metrics);
        report.mean.runs += row.runs;
        report.mean.survivors += row.survivors;
    }
    report.mean.label = "MEAN";
    report.mean.metrics = mean_of(row_metrics);

    std::size_t length = 0;
    for (const auto& r : runs) {
        length = std::max(length, r.happiness.size());
    }
    for (std::size_t t = 0; t < length; ++t) {
        SeriesPoint p;
        p.t = static_cast<int>(t);
        for (const auto& r : runs) {
            if (t < r.happiness.size()) {
                p.happiness += r.happiness[t];
                p.weighted_goodness += r.weighted_goodness[t];
                ++p.alive;
            }
        }
        p.happiness /= p.alive;
        p.weighted_goodness /= p.alive;
        report.series.push_back(p);
    }
    report.runs = std::move(runs);
    return report;
}

SuiteReport run_suite(const SuiteSpec& spec, const std::vector<BatteryEntry>& battery, int jobs) {
    spec.validate();
    struct Task {
        std::size_t env;
        int replicate;
    };
    std::vector<Task> tasks;
    std::vector<std::string> order;
    for (std::size_t e = 0; e < battery.size(); ++e) {
        order.push_back(battery[e].environment.id());
        for (int r = 0; r < spec.seeds_per_env; ++r) {
            tasks.push_back({e, r});
        }
    }
    std::vector<RunSummary> runs(tasks.size());
    parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        const auto& entry = battery[tasks[i].env];
        const std::string& id = entry.environment.id();
        AgentConfig config = spec.config;
        config.seed = run_seed(spec.master_seed, id, tasks[i].replicate);
        try {
            runs[i] = summarize_run(run(config, entry.environment, entry.profile), id, tasks[i].replicate, config.seed);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error("run failed for environment " + id + ", seed " + std::to_string(config.seed) +
                                     ": " + e.what());
        }
    });
    return aggregate(std::move(runs), order);
}

SuiteReport run_suite(const SuiteSpec& spec, int jobs) {
    return run_suite(spec, generate_battery(spec, jobs), jobs);
}

SweepTable sweep(const std::string& parameter, const std::vector<json>& values, const SuiteSpec& base, int jobs) {
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), parameter) == keys.end()) {
        std::string valid;
        for (const auto& k : keys) {
            valid += (valid.empty() ? "" : ", ") + k;
        }
        throw ConfigError("unknown sweep parameter '" + parameter + "' (valid: " + valid + ")");
    }
    if (values.empty()) {
        throw ConfigError("sweep needs at least one value");
    }
    std::vector<SuiteSpec> specs;
    for (const auto& v : values) {
        SuiteSpec spec = base;
        spec.config = config_from_json(json{{parameter, v}}, base.config);
        spec.validate();
        specs.push_back(spec);
    }
    const auto battery = generate_battery(base, jobs);
    SweepTable table;
    table.parameter = parameter;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        table.rows.push_back({values[i], run_suite(specs[i], battery, jobs).mean});
    }
    return table;
}

// ---------------------------------------------------------------------------

void write_metrics_csv(const SuiteReport& report, std::ostream& out) {
    out.precision(17);
    out << "ENV," << kMetricHeader << '\n';
    for (const auto& row : report.rows) {
        out << row.label;
        write_metric_cells(out, row.metrics);
        out << '\n';
    }
    out << report.mean.label;
    write_metric_cells(out, report.mean.metrics);
    out << '\n';
}

void write_series_csv(const SuiteReport& report, std::ostream& out) {
    out.precision(17);
    out << "# " << kSeriesConvention << '\n';
    out << "t,mean_happiness,mean_weighted_goodness,alive_runs\n";
    for (const auto& p : report.series) {
        out << p.t << ',' << p.happiness << ',' << p.weighted_goodness << ',' << p.alive << '\n';
    }
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
    out.precision(17);
    out << table.parameter << ',' << kMetricHeader << '\n';
    for (const auto& row : table.rows) {
        out << (row.value.is_string() ? row.value.get<std::string>() : row.value.dump());
        write_metric_cells(out, row.summary.metrics);
        out << '\n';
    }
}

void write_runs_jsonl(const SuiteReport& report, std::ostream& out) {
    for (const auto& r : report.runs) {
        out << json{{"env", r.env_id},
                    {"replicate", r.replicate},
                    {"seed", r.seed},
                    {"metrics", to_json(r.metrics)},
                    {"died", r.died},
                    {"h", r.happiness},
                    {"wg", r.weighted_goodness}}
                   .dump()
            << '\n';
    }
}

std::vector<MetricRow> read_metrics_csv(std::istream& in) {
    std::vector<MetricRow> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 8) {
            throw ParseError("metrics csv line " + std::to_string(line_no) + ": expected 8 columns");
        }
        if (line_no == 1 || cells[0] == "ENV") {
            continue;
        }
        MetricRow row;
        row.label = cells[0];
        Metrics& m = row.metrics;
        m.mh = parse_number(cells[1], line_no);
        m.mwg = parse_number(cells[2], line_no);
        m.fh = parse_number(cells[3], line_no);
        m.hsd = parse_number(cells[4], line_no);
        m.ni = parse_number(cells[5], line_no);
        m.wgfp = parse_number(cells[6], line_no);
        m.mti = parse_number(cells[7], line_no);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SeriesPoint> read_series_csv(std::istream& in) {
    std::vector<SeriesPoint> points;
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 4) {
            throw ParseError("series csv line " + std::to_string(line_no) + ": expected 4 columns");
        }
        points.push_back({static_cast<int>(parse_number(cells[0], line_no)), parse_number(cells[1], line_no),
                          parse_number(cells[2], line_no), static_cast<int>(parse_number(cells[3], line_no))});
    }
    return points;
}

std::vector<RunSummary> read_runs_jsonl(std::istream& in) {
    std::vector<RunSummary> runs;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            const json doc = json::parse(line);
            RunSummary r;
            r.env_id = doc.at("env").get<std::string>();
            r.replicate = doc.at("replicate").get<int>();
            r.seed = doc.at("seed").get<std::uint64_t>();
            r.metrics = metrics_from_json(doc.at("metrics"));
            r.died = doc.at("died").get<bool>();
            r.happiness = doc.at("h").get<std::vector<double>>();
            r.weighted_goodness = doc.at("wg").get<std::vector<double>>();
            runs.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw ParseError("runs line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return runs;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    return out;
}

} // namespace

void export_report(const SuiteReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    auto metrics = open_for_write(dir / "metrics.csv");
    write_metrics_csv(report, metrics);
    auto series = open_for_write(dir / "series.csv");
    write_series_csv(report, series);
    auto runs = open_for_write(dir / "runs.jsonl");
    write_runs_jsonl(report, runs);
    if (!metrics || !series || !runs) {
        throw IoError("failed writing report to " + dir.string());
    }
}

SuiteReport load_report(const std::filesystem::path& dir) {
    std::ifstream in(dir / "runs.jsonl");
    if (!in) {
        throw IoError("cannot open " + (dir / "runs.jsonl").string());
    }
    auto runs = read_runs_jsonl(in);
    std::vector<std::string> order;
    for (const auto& r : runs) {
        if (std::find(order.begin(), order.end(), r.env_id) == order.end()) {
            order.push_back(r.env_id);
        }
    }
    return aggregate(std::move(runs), order);
}

} // namespace gwsim

#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwsim/environment.hpp"
#include "gwsim/errors.hpp"
#include "gwsim/harness.hpp"
#include "gwsim/simulator.hpp"

namespace gwsim::cli {

using nlohmann::json;

namespace {

struct GenEnvArgs {
    int size = 0;
    int magnitudes = 0;
    double alpha = 10.0;
    std::optional<double> smooth_bound;
    std::uint64_t seed = 0;
    std::string out;
    std::string heatmap;
    int heatmap_magnitude = 0;
};

struct RunArgs {
    std::string env;
    std::string config;
    std::uint64_t seed = 0;
    std::string trace;
    std::string snapshot_out;
    std::string resume;
    int stop_after = 0;
};

struct SuiteArgs {
    std::string spec;
    std::string out;
    int jobs = 1;
};

struct SweepArgs {
    std::string spec;
    std::string param;
    std::string values;
    std::string out;
    int jobs = 1;
};

struct ReportArgs {
    std::string in;
    std::string format = "csv";
    std::string out;
};

void print_metrics(std::ostream& out, const Metrics& m, bool died) {
    out << json{{"summary", to_json(m)}, {"died", died}}.dump() << '\n';
}

int cmd_gen_env(const GenEnvArgs& a, std::ostream& out) {
    GenerationParams params{a.size, a.magnitudes, a.alpha, a.smooth_bound.value_or(a.alpha / 2.0), a.seed};
    const Environment env = generate_environment(params);
    const PreferenceProfile profile = assign_preferences(a.magnitudes, derive_seed(a.seed, env.id(), 1));
    save_environment(env, profile, std::filesystem::path(a.out));
    if (!a.heatmap.empty()) {
        write_heatmap_csv(env, a.heatmap_magnitude, std::filesystem::path(a.heatmap));
    }
    out << env.id() << ' ' << a.out << '\n';
    return kExitOk;
}

int cmd_run(const RunArgs& a, std::ostream& out) {
    const auto loaded = load_environment(std::filesystem::path(a.env));
    RunResult result;
    AgentConfig config;
    if (!a.resume.empty()) {
        std::ifstream in(a.resume);
        if (!in) {
            throw IoError("cannot open snapshot " + a.resume);
        }
        Snapshot snap = read_snapshot(in);
        config = snap.config;
        if (!a.config.empty()) {
            config = load_config(a.config);
            config.seed = snap.config.seed;
        }
        result = resume(config, loaded.environment, loaded.profile, std::move(snap.agent), std::move(snap.records),
                        snap.initial_happiness, snap.initial_weighted_goodness);
    } else {
        config = a.config.empty() ? AgentConfig{} : load_config(a.config);
        config.seed = a.seed;
        validate_for(config, loaded.environment, loaded.profile);
        if (a.stop_after > 0) {
            AgentState agent = init_agent(config, loaded.environment);
            Snapshot snap;
            snap.config = config;
            snap.initial_happiness = agent.feelings.happiness;
            snap.initial_weighted_goodness =
                weighted_goodness(agent.attention, loaded.environment, loaded.profile, agent.position);
            while (agent.alive && agent.iteration < std::min(a.stop_after, config.max_iterations)) {
                snap.records.push_back(step(agent, config, loaded.environment, loaded.profile));
            }
            snap.agent = std::move(agent);
            if (a.snapshot_out.empty()) {
                throw ConfigError("--stop-after requires --snapshot");
            }
            std::ofstream snap_out(a.snapshot_out);
            if (!snap_out) {
                throw IoError("cannot open " + a.snapshot_out + " for writing");
            }
            write_snapshot(snap, snap_out);
            result.records = snap.records;
            result.died = !snap.agent.alive;
            result.metrics = summarize(result.records);
            result.initial_happiness = snap.initial_happiness;
            result.initial_weighted_goodness = snap.initial_weighted_goodness;
        } else {
            result = run(config, loaded.environment, loaded.profile);
        }
    }
    if (!a.trace.empty()) {
        write_trace(result, std::filesystem::path(a.trace));
    }
    print_metrics(out, result.metrics, result.died);
    return kExitOk;
}

int cmd_suite(const SuiteArgs& a, std::ostream& out) {
    const SuiteSpec spec = load_suite_spec(a.spec);
    const SuiteReport report = run_suite(spec, a.jobs);
    export_report(report, a.out);
    write_metrics_csv(report, out);
    return kExitOk;
}

std::vector<json> parse_values(const std::string& csv) {
    std::vector<json> values;
    std::stringstream ss(csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) {
            throw ConfigError("empty value in --values");
        }
        json v = json::parse(token, nullptr, false);
        values.push_back(v.is_discarded() ? json(token) : v);
    }
    return values;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    const SuiteSpec spec = load_suite_spec(a.spec);
    const SweepTable table = sweep(a.param, parse_values(a.values), spec, a.jobs);
    std::error_code ec;
    std::filesystem::create_directories(a.out, ec);
    if (ec) {
        throw IoError("cannot create " + a.out + ": " + ec.message());
    }
    const auto path = std::filesystem::path(a.out) / ("sweep_" + a.param + ".csv");
    std::ofstream file(path);
    if (!file) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    write_sweep_csv(table, file);
    write_sweep_csv(table, out);
    return kExitOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
    if (a.format != "csv") {
        throw ConfigError("unsupported report format '" + a.format + "' (supported: csv)");
    }
    const SuiteReport report = load_report(a.in);
    if (!a.out.empty()) {
        export_report(report, a.out);
    }
    write_metrics_csv(report, out);
    return kExitOk;
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Global-workspace agent simulator: environments, runs, suites and sweeps", "gwsim"};
    app.require_subcommand(1);
    app.footer("Agent configuration keys (JSON object, tuned defaults shown):\n" + describe_config_keys());

    GenEnvArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-env", "Generate an environment file");
    gen_cmd->add_option("--size", gen.size, "Cells per side (N)")->required();
    gen_cmd->add_option("--magnitudes", gen.magnitudes, "Number of magnitudes (m)")->required();
    gen_cmd->add_option("--alpha", gen.alpha, "Value bound alpha")->capture_default_str();
    gen_cmd->add_option("--smooth-bound", gen.smooth_bound, "Max adjacent difference (default alpha/2)");
    gen_cmd->add_option("--seed", gen.seed, "Generation seed")->required();
    gen_cmd->add_option("--out", gen.out, "Output environment file")->required();
    gen_cmd->add_option("--heatmap", gen.heatmap, "Also write one magnitude as a CSV matrix");
    gen_cmd->add_option("--heatmap-magnitude", gen.heatmap_magnitude, "Magnitude index for --heatmap")
        ->capture_default_str();

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Run one agent on an environment");
    run_cmd->add_option("--env", run_args.env, "Environment file")->required();
    run_cmd->add_option("--config", run_args.config, "Agent configuration (JSON)");
    auto* seed_opt = run_cmd->add_option("--seed", run_args.seed, "Run seed");
    run_cmd->add_option("--trace", run_args.trace, "Write the iteration trace here");
    run_cmd->add_option("--snapshot", run_args.snapshot_out, "Write a resumable snapshot here (with --stop-after)");
    run_cmd->add_option("--stop-after", run_args.stop_after, "Stop after this many iterations");
    auto* resume_opt = run_cmd->add_option("--resume", run_args.resume, "Continue from a snapshot");
    seed_opt->excludes(resume_opt);
    run_cmd->footer("Configuration keys:\n" + describe_config_keys());

    SuiteArgs suite_args;
    auto* suite_cmd = app.add_subcommand("suite", "Run a config over an environment battery");
    suite_cmd->add_option("--spec", suite_args.spec, "Suite spec (JSON)")->required();
    suite_cmd->add_option("--out", suite_args.out, "Output directory")->required();
    suite_cmd->add_option("--jobs", suite_args.jobs, "Worker threads")->capture_default_str();
    suite_cmd->footer("Configuration keys:\n" + describe_config_keys());

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one suite per value of a configuration key");
    sweep_cmd->add_option("--spec", sweep_args.spec, "Base suite spec (JSON)")->required();
    sweep_cmd->add_option("--param", sweep_args.param, "Configuration key to vary")->required();
    sweep_cmd->add_option("--values", sweep_args.values, "Comma-separated values")->required();
    sweep_cmd->add_option("--out", sweep_args.out, "Output directory")->required();
    sweep_cmd->add_option("--jobs", sweep_args.jobs, "Worker threads")->capture_default_str();
    sweep_cmd->footer("Configuration keys:\n" + describe_config_keys());

    ReportArgs report_args;
    auto* report_cmd = app.add_subcommand("report", "Re-aggregate a suite directory into tables");
    report_cmd->add_option("--in", report_args.in, "Suite output directory")->required();
    report_cmd->add_option("--format", report_args.format, "Output format")->capture_default_str();
    report_cmd->add_option("--out", report_args.out, "Also export tables into this directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen_env(gen, out);
        if (*run_cmd) {
            if (run_args.resume.empty() && seed_opt->count() == 0) {
                throw ConfigError("run requires --seed (or --resume)");
            }
            return cmd_run(run_args, out);
        }
        if (*suite_cmd) return cmd_suite(suite_args, out);
        if (*sweep_cmd) return cmd_sweep(sweep_args, out);
        if (*report_cmd) return cmd_report(report_args, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    err << app.help();
    return kExitUsage;
}

} // namespace gwsim::cli

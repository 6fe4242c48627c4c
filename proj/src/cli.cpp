#include "prescale/cli.hpp"

#include "prescale/batch_log.hpp"

#include <CLI11.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

namespace prescale {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw RuntimeFailure("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw RuntimeFailure("write failed for " + path.string());
    }
}

std::string cell(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string format_comparison(const std::array<SimulationSummary, 3>& s) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-26s%14s%14s%14s\n", "metric", "predictive", "reactive-elu", "reactive-cpu");
    out << line;
    auto row = [&](const char* name, auto fn) {
        std::snprintf(line, sizeof line, "%-26s%14s%14s%14s\n", name, fn(s[0]).c_str(), fn(s[1]).c_str(),
                      fn(s[2]).c_str());
        out << line;
    };
    row("success_rate", [](const SimulationSummary& x) { return cell(100.0 * x.success_rate, 2) + "%"; });
    row("avg_latency_ms", [](const SimulationSummary& x) { return cell(x.avg_latency_ms, 1); });
    row("median_latency_ms", [](const SimulationSummary& x) { return cell(x.median_latency_ms, 1); });
    row("p90_latency_ms", [](const SimulationSummary& x) { return cell(x.p90_latency_ms, 1); });
    row("p99_latency_ms", [](const SimulationSummary& x) { return cell(x.p99_latency_ms, 1); });
    row("errors", [](const SimulationSummary& x) { return std::to_string(x.errors); });
    row("over_threshold_fraction", [](const SimulationSummary& x) { return cell(x.over_threshold_fraction, 3); });
    row("recovery_ticks", [](const SimulationSummary& x) {
        return x.recovery_ticks ? std::to_string(*x.recovery_ticks) : std::string("-");
    });
    row("max_pods", [](const SimulationSummary& x) { return std::to_string(x.max_pods); });
    row("final_pods", [](const SimulationSummary& x) { return std::to_string(x.final_pods); });
    return out.str();
}

} // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "': expected key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;
    }

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw ConfigError("override '" + assignment + "': empty path segment");
        }
        if (!node->is_object()) {
            throw ConfigError("override '" + assignment + "': '" + part + "' is not inside an object");
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        if (node->is_null()) {
            *node = json::object();
        }
        start = dot + 1;
    }
}

Scenario load_scenario(const std::string& path_or_name, const std::vector<std::string>& overrides) {
    json doc;
    if (fs::exists(path_or_name)) {
        doc = read_json_file(path_or_name);
    } else if (path_or_name == "ramp" || path_or_name == "spike" || path_or_name == "zero") {
        doc = to_json(builtin_scenario(path_or_name));
    } else {
        throw ConfigError("scenario '" + path_or_name + "' is neither a file nor a built-in (ramp, spike, zero)");
    }
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return parse_scenario(doc);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Predictive autoscaling pipeline, load simulator and benchmark harness"};
    app.require_subcommand(1);

    std::string scenario_arg;
    std::string out_dir = "out";
    std::string scaler_arg;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;

    auto* sim = app.add_subcommand("simulate", "Run one scenario and write trace, summary, batch log and decisions");
    sim->add_option("--scenario", scenario_arg, "Scenario JSON file or built-in name (ramp, spike, zero)")->required();
    auto* sim_seed = sim->add_option("--seed", seed, "Override the scenario seed");
    sim->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    sim->add_option("--scaler", scaler_arg, "predictive, reactive-elu or reactive-cpu");
    sim->add_option("--override", overrides, "Dotted key=value applied to the scenario, repeatable");

    std::string log_path;
    std::string config_path;
    auto* rep = app.add_subcommand("replay", "Replay a batch log through the pipeline and print the decision trace");
    rep->add_option("--log", log_path, "Line-delimited JSON batch log")->required();
    rep->add_option("--config", config_path, "Scaler config JSON (defaults to the log header)");

    std::string compare_out;
    auto* cmp = app.add_subcommand("compare", "Run predictive and both reactive scalers on the same workload");
    cmp->add_option("--scenario", scenario_arg, "Scenario JSON file or built-in name")->required();
    auto* cmp_seed = cmp->add_option("--seed", seed, "Override the scenario seed");
    cmp->add_option("--override", overrides, "Dotted key=value applied to the scenario, repeatable");
    cmp->add_option("--out-dir", compare_out, "Also write compare.json here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        std::vector<std::string> all = overrides;
        if ((sim->parsed() && sim_seed->count() > 0) || (cmp->parsed() && cmp_seed->count() > 0)) {
            all.push_back("simulation.seed=" + std::to_string(seed));
        }
        if (sim->parsed() && !scaler_arg.empty()) {
            parse_scaler_kind(scaler_arg);
            all.push_back("scaler_kind=\"" + scaler_arg + "\"");
        }

        if (sim->parsed()) {
            const Scenario scenario = load_scenario(scenario_arg, all);
            const SimulationResult result = simulate(scenario);
            std::error_code ec;
            fs::create_directories(out_dir, ec);
            if (ec) {
                throw RuntimeFailure("cannot create " + out_dir + ": " + ec.message());
            }
            const fs::path dir(out_dir);
            write_file(dir / "trace.csv", trace_csv(result.trace));
            write_file(dir / "summary.json", summary_json(result.summary).dump(2) + "\n");
            write_file(dir / "batches.jsonl", result.batch_log);
            write_file(dir / "decisions.csv", result.decisions_csv);
            const auto& s = result.summary;
            out << scenario.name << " " << to_string(scenario.scaler_kind) << " seed=" << scenario.sim.seed
                << " success=" << cell(100.0 * s.success_rate, 2) << "% median=" << cell(s.median_latency_ms, 1)
                << "ms p99=" << cell(s.p99_latency_ms, 1) << "ms errors=" << s.errors << " -> " << out_dir << "\n";
            return kExitOk;
        }

        if (rep->parsed()) {
            std::ifstream in(log_path);
            if (!in) {
                throw RuntimeFailure("cannot open " + log_path);
            }
            const std::vector<LogEvent> events = read_batch_log(in);
            ScalerConfig config;
            if (!config_path.empty()) {
                config = parse_scaler_config(read_json_file(config_path));
            } else {
                for (const auto& e : events) {
                    if (e.kind == LogEvent::Kind::Header && e.config) {
                        config = *e.config;
                        break;
                    }
                }
            }
            const ReplayStats stats = replay(events, config, out);
            for (const auto& w : stats.warnings) {
                err << "warning: " << w << "\n";
            }
            return kExitOk;
        }

        if (cmp->parsed()) {
            const Scenario base = load_scenario(scenario_arg, all);
            std::array<ScalerKind, 3> kinds{ScalerKind::Predictive, ScalerKind::ReactiveElu, ScalerKind::ReactiveCpu};
            std::array<std::future<SimulationSummary>, 3> runs;
            for (std::size_t i = 0; i < kinds.size(); ++i) {
                Scenario s = base;
                s.scaler_kind = kinds[i];
                runs[i] = std::async(std::launch::async, [s] { return simulate(s).summary; });
            }
            std::array<SimulationSummary, 3> summaries;
            for (std::size_t i = 0; i < runs.size(); ++i) {
                summaries[i] = runs[i].get();
            }
            out << base.name << " seed=" << base.sim.seed << "\n" << format_comparison(summaries);
            if (!compare_out.empty()) {
                std::error_code ec;
                fs::create_directories(compare_out, ec);
                json doc = json::object();
                for (std::size_t i = 0; i < kinds.size(); ++i) {
                    doc[std::string(to_string(kinds[i]))] = summary_json(summaries[i]);
                }
                write_file(fs::path(compare_out) / "compare.json", doc.dump(2) + "\n");
            }
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const LogError& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace prescale

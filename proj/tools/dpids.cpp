// Command line front end: run the detection pipelines, generate traces and
// compile decision trees, all driven by flat key=value config files.
//
// Exit codes: 0 success, 2 bad usage or bad input files, 1 runtime failure.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpids/decision_tree.hpp"
#include "dpids/experiment.hpp"
#include "dpids/log_table.hpp"
#include "dpids/trace.hpp"

namespace {

using namespace dpids;

void write_output(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open " + path);
    }
    os << text;
    if (!os) {
        throw IoError("write failed: " + path);
    }
}

KvConfig load_kv(const std::string& path) {
    return path.empty() ? KvConfig{} : KvConfig::from_file(path);
}

std::string render_metrics(const nlohmann::json& j, const std::string& format) {
    return format == "csv" ? metrics_to_csv_text(j) : metrics_to_json_text(j);
}

int cmd_run_entropy(const std::string& config_path, std::uint64_t seed,
                    const std::string& trace_path, const std::string& out,
                    const std::string& format, const std::string& windows_out,
                    const std::string& logtable_out) {
    auto kv = load_kv(config_path);
    const auto cfg = entropy_config_from_kv(kv);
    kv.require_consumed();

    EntropyResult res = trace_path.empty()
                            ? run_entropy(cfg, seed)
                            : run_entropy_on(cfg, load_trace_file(trace_path), seed);

    if (!windows_out.empty()) {
        write_output(windows_out, res.window_log());
    }
    if (!logtable_out.empty()) {
        const LogTable table(1u << cfg.det.log2_window, cfg.det.msb_kept);
        table.write_text_file(logtable_out);
    }
    write_output(out, render_metrics(res.metrics_json(cfg, seed), format));
    return 0;
}

int cmd_run_classifier(const std::string& config_path, std::uint64_t train_seed,
                       std::uint64_t test_seed, const std::string& out,
                       const std::string& format) {
    auto kv = load_kv(config_path);
    const auto cfg = classifier_config_from_kv(kv);
    kv.require_consumed();

    const auto res = run_classifier(cfg, train_seed, test_seed);
    write_output(out, render_metrics(res.metrics_json(cfg, train_seed, test_seed),
                                     format));
    return 0;
}

int cmd_gen_trace(const std::string& config_path, std::uint64_t seed,
                  const std::string& out) {
    auto kv = load_kv(config_path);
    GenConfig gen;
    AttackConfig attack;
    bool attack_enabled = true;
    traffic_config_from_kv(kv, gen, attack, attack_enabled, 60.0);
    kv.require_consumed();
    gen.validate();
    attack.validate();

    const auto trace = build_trace(gen, attack, attack_enabled, seed);
    save_trace_file(out, trace);
    return 0;
}

int cmd_compile_tree(const std::string& tree_path, int prefix_bits,
                     const std::string& out) {
    const auto forest = Forest::from_json_file(tree_path);
    nlohmann::json j;
    j["trees"] = nlohmann::json::array();
    for (const auto& t : forest.trees()) {
        j["trees"].push_back(rules_to_json(compile_tree(t), prefix_bits));
    }
    write_output(out, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Software model of an in-network DDoS detection device"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out = "-";
    std::string format = "json";
    std::string trace_path;
    std::string windows_out;
    std::string logtable_out;
    std::string tree_path;
    std::uint64_t seed = 1;
    std::uint64_t train_seed = 1;
    std::uint64_t test_seed = 2;
    int prefix_bits = 0;

    auto* entropy = app.add_subcommand(
        "run-entropy", "Run the entropy detector over a generated or loaded trace");
    entropy->add_option("--config", config_path, "key=value config file");
    entropy->add_option("--seed", seed, "master seed (default 1)");
    entropy->add_option("--trace", trace_path, "read packets from a trace CSV");
    entropy->add_option("--out", out, "metrics output path, - for stdout");
    entropy->add_option("--format", format, "metrics format")
        ->check(CLI::IsMember({"json", "csv"}));
    entropy->add_option("--windows-out", windows_out,
                        "per-window JSON lines output path");
    entropy->add_option("--logtable-out", logtable_out,
                        "write the x*log2(x) lookup table as text");

    auto* classifier = app.add_subcommand(
        "run-classifier", "Train and score the flow classifier on two traces");
    classifier->add_option("--config", config_path, "key=value config file");
    classifier->add_option("--train-seed", train_seed, "training seed (default 1)");
    classifier->add_option("--test-seed", test_seed, "test seed (default 2)");
    classifier->add_option("--out", out, "metrics output path, - for stdout");
    classifier->add_option("--format", format, "metrics format")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic trace CSV");
    gen->add_option("--config", config_path, "key=value config file");
    gen->add_option("--seed", seed, "master seed (default 1)");
    gen->add_option("--out", out, "trace CSV output path")->required();

    auto* compile = app.add_subcommand(
        "compile-tree", "Compile decision tree JSON into match-action rules");
    compile->add_option("--tree", tree_path, "tree or forest JSON file")->required();
    compile->add_option("--prefix-bits", prefix_bits,
                        "also expand ranges to prefixes of this width")
        ->check(CLI::Range(0, 63));
    compile->add_option("--out", out, "rules output path, - for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(entropy)) {
            return cmd_run_entropy(config_path, seed, trace_path, out, format,
                                   windows_out, logtable_out);
        }
        if (app.got_subcommand(classifier)) {
            return cmd_run_classifier(config_path, train_seed, test_seed, out,
                                      format);
        }
        if (app.got_subcommand(gen)) {
            return cmd_gen_trace(config_path, seed, out);
        }
        return cmd_compile_tree(tree_path, prefix_bits, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const VersionError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const TraceOrderError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

// Experiment harness: whole runs from (config, seed) to scored results,
// plus the flat key=value config file format the CLI consumes.
//
// The master seed fans out through derive_seed so trace generation, attack
// injection and sketch hashing each get an independent stream, and one seed
// reproduces the entire experiment.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dpids/detector.hpp"
#include "dpids/hash.hpp"
#include "dpids/error.hpp"
#include "dpids/features.hpp"
#include "dpids/flow.hpp"
#include "dpids/knn.hpp"
#include "dpids/metrics.hpp"
#include "dpids/report.hpp"
#include "dpids/synthetic.hpp"
#include "dpids/trace.hpp"

namespace dpids {

// --- flat key=value config files ---------------------------------------

class KvConfig {
  public:
    KvConfig() = default;

    static KvConfig from_stream(std::istream& is) {
        KvConfig c;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("expected key = value at line " +
                                  std::to_string(lineno));
            }
            const std::string key = trim_(line.substr(0, eq));
            const std::string value = trim_(line.substr(eq + 1));
            if (key.empty() || value.empty()) {
                throw ConfigError("empty key or value at line " +
                                  std::to_string(lineno));
            }
            if (!c.kv_.emplace(key, value).second) {
                throw ConfigError("duplicate key '" + key + "'");
            }
        }
        return c;
    }

    static KvConfig from_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) {
            throw IoError("cannot open " + path);
        }
        return from_stream(is);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t def) {
        const auto raw = take_(key);
        if (!raw) return def;
        return parse_unsigned_(key, *raw);
    }

    std::uint32_t get_u32(const std::string& key, std::uint32_t def) {
        const auto v = get_u64(key, def);
        if (v > UINT32_MAX) {
            throw ConfigError("value for '" + key + "' exceeds 32 bits");
        }
        return static_cast<std::uint32_t>(v);
    }

    int get_int(const std::string& key, int def) {
        const auto raw = take_(key);
        if (!raw) return def;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(*raw, &used);
            if (used != raw->size() || v < INT32_MIN || v > INT32_MAX) {
                throw std::invalid_argument("");
            }
            return static_cast<int>(v);
        } catch (const std::exception&) {
            throw ConfigError("bad integer for '" + key + "': " + *raw);
        }
    }

    double get_double(const std::string& key, double def) {
        const auto raw = take_(key);
        if (!raw) return def;
        try {
            std::size_t used = 0;
            const double v = std::stod(*raw, &used);
            if (used != raw->size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad number for '" + key + "': " + *raw);
        }
    }

    bool get_bool(const std::string& key, bool def) {
        const auto raw = take_(key);
        if (!raw) return def;
        if (*raw == "true" || *raw == "1") return true;
        if (*raw == "false" || *raw == "0") return false;
        throw ConfigError("bad bool for '" + key + "': " + *raw);
    }

    std::string get_string(const std::string& key, const std::string& def) {
        const auto raw = take_(key);
        return raw ? *raw : def;
    }

    std::uint32_t get_ip(const std::string& key, std::uint32_t def) {
        const auto raw = take_(key);
        if (!raw) return def;
        try {
            return ip_from_string(*raw);
        } catch (const ArgumentError& e) {
            throw ConfigError(std::string(e.what()) + " for '" + key + "'");
        }
    }

    // Every key present must have been consumed by a getter.
    void require_consumed() const {
        std::string unknown;
        for (const auto& [k, v] : kv_) {
            if (!touched_.contains(k)) {
                unknown += unknown.empty() ? k : ", " + k;
            }
        }
        if (!unknown.empty()) {
            throw ConfigError("unknown config keys: " + unknown);
        }
    }

  private:
    static std::string trim_(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    std::optional<std::string> take_(const std::string& key) {
        touched_.insert(key);
        const auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        return it->second;
    }

    std::uint64_t parse_unsigned_(const std::string& key, const std::string& raw) {
        if (raw.empty() || raw[0] == '-') {
            throw ConfigError("bad unsigned for '" + key + "': " + raw);
        }
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(raw, &used);
            if (used != raw.size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("bad unsigned for '" + key + "': " + raw);
        }
    }

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> touched_;
};

// --- entropy experiment -------------------------------------------------

struct EntropyExperimentConfig {
    GenConfig gen;
    AttackConfig attack;
    bool attack_enabled = true;
    DetectorConfig det;
    double label_factor = 0.5;  // truth threshold = label_factor * fraction
    std::string estimator = "sketch";

    void validate() const {
        gen.validate();
        attack.validate();
        det.validate();
        if (label_factor <= 0.0 || label_factor >= 1.0) {
            throw ConfigError("label_factor must be in (0, 1)");
        }
        if (estimator != "sketch" && estimator != "exact") {
            throw ConfigError("estimator must be sketch or exact");
        }
    }
};

// Keys shared by every scenario config: the synthetic traffic shape and the
// attack overlay.
inline void traffic_config_from_kv(KvConfig& kv, GenConfig& gen,
                                   AttackConfig& attack, bool& attack_enabled,
                                   double default_duration_s) {
    gen.duration_us = static_cast<std::uint64_t>(
        kv.get_double("duration_s", default_duration_s) * 1e6);
    gen.pps = kv.get_u32("pps", gen.pps);
    gen.n_hosts = kv.get_u32("n_hosts", gen.n_hosts);
    gen.n_servers = kv.get_u32("n_servers", gen.n_servers);
    gen.zipf_s = kv.get_double("zipf_s", gen.zipf_s);
    attack_enabled = kv.get_bool("attack", true);
    attack.fraction = kv.get_double("attack_fraction", attack.fraction);
    attack.onset_fraction = kv.get_double("onset_fraction", attack.onset_fraction);
    attack.target_ip = kv.get_ip("target_ip", attack.target_ip);
}

inline EntropyExperimentConfig entropy_config_from_kv(KvConfig& kv) {
    EntropyExperimentConfig c;
    traffic_config_from_kv(kv, c.gen, c.attack, c.attack_enabled, 60.0);
    c.det.log2_window = kv.get_int("log2_window", c.det.log2_window);
    c.det.sketch_depth = kv.get_u32("sketch_depth",
                                    static_cast<std::uint32_t>(c.det.sketch_depth));
    c.det.sketch_width = kv.get_u32("sketch_width",
                                    static_cast<std::uint32_t>(c.det.sketch_width));
    c.det.msb_kept = kv.get_int("msb_kept", c.det.msb_kept);
    c.det.alpha_log2 = kv.get_int("alpha_log2", c.det.alpha_log2);
    c.det.k = FixedPoint::from_double(kv.get_double("k", 3.0));
    const auto policy = kv.get_string("policy", "or");
    if (policy == "or") {
        c.det.policy = AlarmPolicy::either;
    } else if (policy == "and") {
        c.det.policy = AlarmPolicy::both;
    } else {
        throw ConfigError("policy must be or/and");
    }
    c.det.warmup_windows = kv.get_u32("warmup_windows", c.det.warmup_windows);
    c.det.op_limit = kv.get_u32("op_limit", c.det.op_limit);
    c.label_factor = kv.get_double("label_factor", c.label_factor);
    c.estimator = kv.get_string("estimator", c.estimator);
    c.validate();
    return c;
}

struct EntropyWindowRow {
    WindowReport rep;
    bool truth = false;
};

struct EntropyResult {
    std::vector<EntropyWindowRow> rows;
    BinaryCounts counts;
    std::uint64_t packets = 0;
    std::uint32_t max_ops = 0;
    std::uint32_t op_limit = 0;
    // Delay in windows from first true-anomalous window to first alarm at or
    // after it; empty when the trace holds no attack windows, -1 if missed.
    std::optional<std::int64_t> detection_delay;

    nlohmann::json metrics_json(const EntropyExperimentConfig& cfg,
                                std::uint64_t seed) const {
        nlohmann::json j;
        counts.fill_json(j);
        j["windows"] = rows.size();
        std::uint64_t truths = 0, alarms = 0;
        for (const auto& r : rows) {
            truths += r.truth ? 1 : 0;
            alarms += r.rep.alarm ? 1 : 0;
        }
        j["attack_windows"] = truths;
        j["alarm_windows"] = alarms;
        j["packets"] = packets;
        if (detection_delay.has_value()) {
            j["detection_delay"] = *detection_delay;
        } else {
            j["detection_delay"] = nullptr;
        }
        j["max_ops_per_packet"] = max_ops;
        j["op_limit"] = op_limit;
        j["estimator"] = cfg.estimator;
        j["policy"] = cfg.det.policy == AlarmPolicy::either ? "or" : "and";
        j["log2_window"] = cfg.det.log2_window;
        j["warmup_windows"] = cfg.det.warmup_windows;
        j["attack_fraction"] = cfg.attack_enabled ? cfg.attack.fraction : 0.0;
        j["seed"] = seed;
        return j;
    }

    // One JSON object per line, one line per window.
    std::string window_log() const {
        std::string out;
        for (const auto& r : rows) {
            nlohmann::json j;
            j["window"] = r.rep.window_id;
            j["h_src_raw"] = r.rep.h_src.raw();
            j["h_dst_raw"] = r.rep.h_dst.raw();
            j["h_src"] = r.rep.h_src.to_double();
            j["h_dst"] = r.rep.h_dst.to_double();
            j["src_lo"] = r.rep.src_band.lower.to_double();
            j["src_hi"] = r.rep.src_band.upper.to_double();
            j["dst_lo"] = r.rep.dst_band.lower.to_double();
            j["dst_hi"] = r.rep.dst_band.upper.to_double();
            j["src_deviated"] = r.rep.src_deviated;
            j["dst_deviated"] = r.rep.dst_deviated;
            j["warmup"] = r.rep.warmup;
            j["alarm"] = r.rep.alarm;
            j["truth"] = r.truth;
            out += j.dump();
            out += "\n";
        }
        return out;
    }
};

inline std::vector<Packet> build_trace(const GenConfig& gen,
                                       const AttackConfig& attack,
                                       bool attack_enabled, std::uint64_t seed) {
    auto trace = generate_benign(gen, derive_seed(seed, 0));
    if (attack_enabled) {
        trace = inject_attack(std::move(trace), attack, derive_seed(seed, 1));
    }
    return trace;
}

template <typename Estimator>
EntropyResult run_entropy_with(const EntropyExperimentConfig& cfg,
                               const std::vector<Packet>& trace,
                               Estimator src_est, Estimator dst_est,
                               const LogTable& table) {
    EntropyDetector<Estimator> det(cfg.det, std::move(src_est),
                                   std::move(dst_est), &table);
    const auto labels =
        window_labels(trace, 1u << cfg.det.log2_window,
                      cfg.attack_enabled ? cfg.label_factor * cfg.attack.fraction
                                         : 1.0);
    EntropyResult res;
    res.packets = trace.size();
    res.op_limit = cfg.det.op_limit;
    for (const auto& p : trace) {
        if (auto rep = det.process(p.src_ip, p.dst_ip)) {
            EntropyWindowRow row;
            row.rep = *rep;
            row.truth = labels.at(rep->window_id);
            res.counts.add(row.truth, row.rep.alarm);
            res.rows.push_back(row);
        }
    }
    res.max_ops = det.max_ops_per_packet();

    std::optional<std::size_t> first_truth;
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        if (res.rows[i].truth) {
            first_truth = i;
            break;
        }
    }
    if (first_truth.has_value()) {
        res.detection_delay = -1;
        for (std::size_t i = *first_truth; i < res.rows.size(); ++i) {
            if (res.rows[i].rep.alarm) {
                res.detection_delay = static_cast<std::int64_t>(i - *first_truth);
                break;
            }
        }
    }
    return res;
}

// Scores a detector over an already materialized trace (loaded or generated).
inline EntropyResult run_entropy_on(const EntropyExperimentConfig& cfg,
                                    const std::vector<Packet>& trace,
                                    std::uint64_t seed) {
    cfg.validate();
    const LogTable table(1u << cfg.det.log2_window, cfg.det.msb_kept);
    auto det_cfg = cfg;
    det_cfg.det.seed = derive_seed(seed, 2);
    if (cfg.estimator == "exact") {
        return run_entropy_with(det_cfg, trace, ExactCounter{}, ExactCounter{},
                                table);
    }
    return run_entropy_with(
        det_cfg, trace,
        CountSketch(det_cfg.det.sketch_depth, det_cfg.det.sketch_width,
                    derive_seed(det_cfg.det.seed, 10)),
        CountSketch(det_cfg.det.sketch_depth, det_cfg.det.sketch_width,
                    derive_seed(det_cfg.det.seed, 11)),
        table);
}

inline EntropyResult run_entropy(const EntropyExperimentConfig& cfg,
                                 std::uint64_t seed) {
    cfg.validate();
    return run_entropy_on(
        cfg, build_trace(cfg.gen, cfg.attack, cfg.attack_enabled, seed), seed);
}

// --- classifier experiment ----------------------------------------------

struct ClassifierExperimentConfig {
    // Fewer, busier hosts than the entropy scenario: flows need several
    // packets each for the inter-arrival features to mean anything, and the
    // lazy classifier's cost grows with distinct flows.
    GenConfig gen{.duration_us = 20'000'000,
                  .pps = 2000,
                  .n_hosts = 64,
                  .n_servers = 16};
    AttackConfig attack;
    bool attack_enabled = true;
    CollectorConfig coll;
    KnnConfig knn;
    std::size_t knn_max_train = 8192;  // 0 = unlimited

    void validate() const {
        gen.validate();
        attack.validate();
        coll.validate();
        knn.validate();
        if (knn_max_train != 0 && knn_max_train < knn.k) {
            throw ConfigError("knn_max_train must be 0 or >= knn k");
        }
    }
};

inline ClassifierExperimentConfig classifier_config_from_kv(KvConfig& kv) {
    ClassifierExperimentConfig c;
    traffic_config_from_kv(kv, c.gen, c.attack, c.attack_enabled, 20.0);
    c.coll.slots_log2 = kv.get_int("slots_log2", c.coll.slots_log2);
    c.coll.window_us = kv.get_u64("window_us", c.coll.window_us);
    c.coll.max_flows_per_report = kv.get_u32(
        "max_flows_per_report",
        static_cast<std::uint32_t>(c.coll.max_flows_per_report));
    c.coll.op_limit = kv.get_u32("op_limit", c.coll.op_limit);
    c.knn.k = kv.get_u32("knn_k", static_cast<std::uint32_t>(c.knn.k));
    c.knn_max_train = kv.get_u64("knn_max_train", c.knn_max_train);
    c.validate();
    return c;
}

// Flow records crossing the report wire, each with its ground-truth label
// (kept aside; the wire carries no labels).
inline std::vector<LabeledFlow> collect_flows(
    const ClassifierExperimentConfig& cfg, const std::vector<Packet>& trace,
    std::uint64_t seed, std::uint64_t* evictions = nullptr,
    std::uint32_t* max_ops = nullptr) {
    auto coll_cfg = cfg.coll;
    coll_cfg.seed = derive_seed(seed, 3);
    FlowCollector coll(coll_cfg);
    std::vector<FlowWindow> windows;
    for (const auto& p : trace) {
        for (auto& w : coll.update(p)) windows.push_back(std::move(w));
    }
    for (auto& w : coll.finish()) windows.push_back(std::move(w));

    std::vector<LabeledFlow> flows;
    for (const auto& w : windows) {
        const auto parsed = parse_report(serialize_report(w));
        if (parsed.flows.size() != w.flows.size()) {
            throw InternalError("report round trip changed the flow count");
        }
        for (std::size_t i = 0; i < w.flows.size(); ++i) {
            LabeledFlow f;
            f.features = compose_features(parsed.flows[i].stats);
            f.label = 2 * w.flows[i].attack_pkts > w.flows[i].stats.pkt_count
                          ? Label::ddos
                          : Label::benign;
            flows.push_back(f);
        }
    }
    if (evictions != nullptr) *evictions = coll.evictions();
    if (max_ops != nullptr) *max_ops = coll.max_ops_per_packet();
    return flows;
}

struct ClassifierResult {
    std::size_t train_flows = 0;
    std::size_t knn_rows = 0;
    std::size_t test_flows = 0;
    BinaryCounts counts;
    std::uint64_t evictions_train = 0;
    std::uint64_t evictions_test = 0;
    std::uint32_t max_ops = 0;

    nlohmann::json metrics_json(const ClassifierExperimentConfig& cfg,
                                std::uint64_t train_seed,
                                std::uint64_t test_seed) const {
        nlohmann::json j;
        counts.fill_json(j);
        j["train_flows"] = train_flows;
        j["knn_rows"] = knn_rows;
        j["test_flows"] = test_flows;
        j["knn_k"] = cfg.knn.k;
        j["evictions_train"] = evictions_train;
        j["evictions_test"] = evictions_test;
        j["max_ops_per_packet"] = max_ops;
        j["op_limit"] = cfg.coll.op_limit;
        j["train_seed"] = train_seed;
        j["test_seed"] = test_seed;
        return j;
    }
};

inline ClassifierResult run_classifier(const ClassifierExperimentConfig& cfg,
                                       std::uint64_t train_seed,
                                       std::uint64_t test_seed) {
    cfg.validate();
    const auto train_trace =
        build_trace(cfg.gen, cfg.attack, cfg.attack_enabled, train_seed);
    const auto test_trace =
        build_trace(cfg.gen, cfg.attack, cfg.attack_enabled, test_seed);

    ClassifierResult res;
    std::uint32_t ops_train = 0, ops_test = 0;
    const auto train = collect_flows(cfg, train_trace, train_seed,
                                     &res.evictions_train, &ops_train);
    const auto test = collect_flows(cfg, test_trace, test_seed,
                                    &res.evictions_test, &ops_test);
    res.max_ops = std::max(ops_train, ops_test);
    res.train_flows = train.size();
    res.test_flows = test.size();

    // Deterministic stride subsample keeps the lazy classifier bounded on
    // large traces while preserving the window/time mix of the training set.
    std::vector<LabeledFlow> rows;
    const std::vector<LabeledFlow>* knn_train = &train;
    if (cfg.knn_max_train != 0 && train.size() > cfg.knn_max_train) {
        const std::size_t stride =
            (train.size() + cfg.knn_max_train - 1) / cfg.knn_max_train;
        rows.reserve(train.size() / stride + 1);
        for (std::size_t i = 0; i < train.size(); i += stride) {
            rows.push_back(train[i]);
        }
        knn_train = &rows;
    }
    res.knn_rows = knn_train->size();

    const KnnClassifier knn(cfg.knn, *knn_train);
    for (const auto& flow : test) {
        res.counts.add(flow.label == Label::ddos,
                       knn.classify(flow.features) == Label::ddos);
    }
    return res;
}

}  // namespace dpids

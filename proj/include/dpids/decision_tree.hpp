// Decision trees over flow features, and their compilation into prioritized
// range-rule tables (the form a switch can execute as match-action entries).
//
// Tree JSON: internal nodes {"feature": j, "threshold": t, "left":, "right":},
// leaves {"label": "benign"|"ddos"}; feature j <= t goes left. A forest is
// {"trees": [...]} and votes by majority, ties toward ddos.
//
// Compilation walks the tree in preorder, narrowing one interval per feature
// along the path; each reachable leaf becomes one rule. Earlier (preorder)
// leaves get larger priority numbers; larger wins on overlap, though leaf
// regions are disjoint by construction.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpids/error.hpp"
#include "dpids/features.hpp"
#include "dpids/label.hpp"
#include "dpids/prefix_expand.hpp"

namespace dpids {

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    std::int64_t threshold = 0;
    Label label = Label::benign;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;

    bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
  public:
    static DecisionTree from_json(const nlohmann::json& j) {
        DecisionTree t;
        t.root_ = parse_node_(j, 0);
        return t;
    }

    static DecisionTree from_json_text(const std::string& text) {
        return from_json(parse_text_(text));
    }

    Label classify(const FeatureVector& f) const {
        const TreeNode* n = root_.get();
        while (!n->is_leaf()) {
            n = f[static_cast<std::size_t>(n->feature)] <= n->threshold
                    ? n->left.get()
                    : n->right.get();
        }
        return n->label;
    }

    const TreeNode& root() const { return *root_; }

    std::size_t leaf_count() const { return count_leaves_(*root_); }

  private:
    friend class Forest;

    DecisionTree() = default;

    static nlohmann::json parse_text_(const std::string& text) {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError(std::string("tree JSON: ") + e.what());
        }
    }

    static std::unique_ptr<TreeNode> parse_node_(const nlohmann::json& j, int depth) {
        if (depth > 64) {
            throw FormatError("tree deeper than 64 levels");
        }
        if (!j.is_object()) {
            throw FormatError("tree node must be a JSON object");
        }
        auto node = std::make_unique<TreeNode>();
        if (j.contains("label")) {
            if (j.size() != 1 || !j["label"].is_string()) {
                throw FormatError("leaf must hold exactly a string label");
            }
            try {
                node->label = label_from_name(j["label"].get<std::string>());
            } catch (const ArgumentError& e) {
                throw FormatError(e.what());
            }
            return node;
        }
        if (!j.contains("feature") || !j.contains("threshold") ||
            !j.contains("left") || !j.contains("right") || j.size() != 4) {
            throw FormatError(
                "internal node needs exactly feature/threshold/left/right");
        }
        if (!j["feature"].is_number_integer() || !j["threshold"].is_number_integer()) {
            throw FormatError("feature and threshold must be integers");
        }
        const auto feature = j["feature"].get<std::int64_t>();
        if (feature < 0 || feature >= static_cast<std::int64_t>(kFeatureCount)) {
            throw FormatError("feature index out of range");
        }
        node->feature = static_cast<int>(feature);
        node->threshold = j["threshold"].get<std::int64_t>();
        node->left = parse_node_(j["left"], depth + 1);
        node->right = parse_node_(j["right"], depth + 1);
        return node;
    }

    static std::size_t count_leaves_(const TreeNode& n) {
        if (n.is_leaf()) return 1;
        return count_leaves_(*n.left) + count_leaves_(*n.right);
    }

    std::unique_ptr<TreeNode> root_;
};

struct Interval {
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    std::int64_t hi = std::numeric_limits<std::int64_t>::max();

    bool empty() const { return lo > hi; }
    bool contains(std::int64_t v) const { return v >= lo && v <= hi; }
    bool bounded() const {
        return lo != std::numeric_limits<std::int64_t>::min() ||
               hi != std::numeric_limits<std::int64_t>::max();
    }
};

struct RangeRule {
    std::array<Interval, kFeatureCount> ranges;
    std::int32_t priority = 0;
    Label label = Label::benign;

    bool matches(const FeatureVector& f) const {
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            if (!ranges[j].contains(f[j])) return false;
        }
        return true;
    }
};

// One rule per reachable leaf; contradictory paths produce no rule.
inline std::vector<RangeRule> compile_tree(const DecisionTree& tree) {
    std::vector<RangeRule> rules;
    std::array<Interval, kFeatureCount> box;

    auto walk = [&](auto&& self, const TreeNode& n) -> void {
        if (n.is_leaf()) {
            rules.push_back(RangeRule{box, 0, n.label});
            return;
        }
        const auto j = static_cast<std::size_t>(n.feature);
        const Interval saved = box[j];

        Interval left = saved;
        left.hi = std::min(left.hi, n.threshold);
        if (!left.empty()) {
            box[j] = left;
            self(self, *n.left);
        }
        if (n.threshold < std::numeric_limits<std::int64_t>::max()) {
            Interval right = saved;
            right.lo = std::max(right.lo, n.threshold + 1);
            if (!right.empty()) {
                box[j] = right;
                self(self, *n.right);
            }
        }
        box[j] = saved;
    };
    walk(walk, tree.root());

    const auto n = static_cast<std::int32_t>(rules.size());
    for (std::int32_t i = 0; i < n; ++i) {
        rules[static_cast<std::size_t>(i)].priority = n - i;
    }
    return rules;
}

class RuleTable {
  public:
    explicit RuleTable(std::vector<RangeRule> rules) : rules_(std::move(rules)) {
        if (rules_.empty()) {
            throw CompileError("rule table needs at least one rule");
        }
        for (const auto& r : rules_) {
            for (const auto& iv : r.ranges) {
                if (iv.empty()) {
                    throw CompileError("rule carries an empty feature range");
                }
            }
        }
    }

    Label classify(const FeatureVector& f) const {
        const RangeRule* best = nullptr;
        for (const auto& r : rules_) {
            if (!r.matches(f)) continue;
            if (best == nullptr || r.priority > best->priority) best = &r;
        }
        if (best == nullptr) {
            throw InternalError("rule table does not cover the query point");
        }
        return best->label;
    }

    const std::vector<RangeRule>& rules() const { return rules_; }

  private:
    std::vector<RangeRule> rules_;
};

class Forest {
  public:
    // Accepts {"trees": [node, ...]} or a bare tree node.
    static Forest from_json(const nlohmann::json& j) {
        Forest f;
        if (j.is_object() && j.contains("trees")) {
            if (j.size() != 1 || !j["trees"].is_array() || j["trees"].empty()) {
                throw FormatError("forest needs a non-empty trees array");
            }
            for (const auto& t : j["trees"]) {
                f.trees_.push_back(DecisionTree::from_json(t));
            }
        } else {
            f.trees_.push_back(DecisionTree::from_json(j));
        }
        return f;
    }

    static Forest from_json_text(const std::string& text) {
        return from_json(DecisionTree::parse_text_(text));
    }

    static Forest from_json_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) {
            throw IoError("cannot open " + path);
        }
        std::string text((std::istreambuf_iterator<char>(is)),
                         std::istreambuf_iterator<char>());
        return from_json_text(text);
    }

    Label classify(const FeatureVector& f) const {
        std::size_t ddos = 0;
        for (const auto& t : trees_) {
            if (t.classify(f) == Label::ddos) ++ddos;
        }
        return 2 * ddos >= trees_.size() ? Label::ddos : Label::benign;
    }

    // Table-backed vote: every tree compiled to its rule table.
    Label classify_compiled(const std::vector<RuleTable>& tables,
                            const FeatureVector& f) const {
        if (tables.size() != trees_.size()) {
            throw ArgumentError("compiled table count differs from tree count");
        }
        std::size_t ddos = 0;
        for (const auto& t : tables) {
            if (t.classify(f) == Label::ddos) ++ddos;
        }
        return 2 * ddos >= tables.size() ? Label::ddos : Label::benign;
    }

    std::vector<RuleTable> compile() const {
        std::vector<RuleTable> tables;
        tables.reserve(trees_.size());
        for (const auto& t : trees_) {
            tables.emplace_back(compile_tree(t));
        }
        return tables;
    }

    const std::vector<DecisionTree>& trees() const { return trees_; }

  private:
    Forest() = default;

    std::vector<DecisionTree> trees_;
};

// JSON form of a compiled rule list. Unbounded features are omitted from a
// rule; prefix_bits > 0 additionally expands each bounded range (clamped to
// the unsigned prefix domain) into its minimal prefix cover.
inline nlohmann::json rules_to_json(const std::vector<RangeRule>& rules,
                                    int prefix_bits = 0) {
    if (prefix_bits < 0 || prefix_bits > 63) {
        throw ArgumentError("prefix_bits must be in [0, 63]");
    }
    nlohmann::json out;
    out["rules"] = nlohmann::json::array();
    for (const auto& r : rules) {
        nlohmann::json jr;
        jr["priority"] = r.priority;
        jr["label"] = std::string(label_name(r.label));
        jr["ranges"] = nlohmann::json::array();
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            const Interval& iv = r.ranges[j];
            if (!iv.bounded()) continue;
            nlohmann::json jiv;
            jiv["feature"] = std::string(kFeatureNames[j]);
            jiv["lo"] = iv.lo;
            jiv["hi"] = iv.hi;
            if (prefix_bits > 0) {
                const std::int64_t cap =
                    static_cast<std::int64_t>((std::uint64_t{1} << prefix_bits) - 1);
                const std::int64_t lo = std::max<std::int64_t>(iv.lo, 0);
                const std::int64_t hi = std::min(iv.hi, cap);
                auto jps = nlohmann::json::array();
                if (lo <= hi) {
                    for (const auto& p : expand_range(static_cast<std::uint64_t>(lo),
                                                      static_cast<std::uint64_t>(hi),
                                                      prefix_bits)) {
                        jps.push_back({{"value", p.value},
                                       {"len", p.len},
                                       {"pattern", prefix_pattern(p, prefix_bits)}});
                    }
                }
                jiv["prefixes"] = std::move(jps);
            }
            jr["ranges"].push_back(std::move(jiv));
        }
        out["rules"].push_back(std::move(jr));
    }
    return out;
}

}  // namespace dpids

// k-nearest-neighbor flow classifier, the control-plane side of the split
// pipeline: the switch exports flow descriptors, this classifies them.
//
// Features are min-max normalized with the training extremes (constant
// features collapse to zero). Distance is Euclidean; neighbor ties break
// toward the lower training row, vote ties toward ddos.
#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/features.hpp"
#include "dpids/label.hpp"

namespace dpids {

struct LabeledFlow {
    FeatureVector features{};
    Label label = Label::benign;
};

struct KnnConfig {
    std::size_t k = 5;

    void validate() const {
        if (k < 1) {
            throw ConfigError("knn k must be >= 1");
        }
    }
};

class KnnClassifier {
  public:
    KnnClassifier(const KnnConfig& cfg, std::vector<LabeledFlow> training)
        : k_(cfg.k), training_(std::move(training)) {
        cfg.validate();
        if (training_.empty()) {
            throw ArgumentError("knn needs a non-empty training set");
        }
        if (k_ > training_.size()) {
            throw ArgumentError("knn k exceeds training set size");
        }
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            std::int64_t lo = training_[0].features[j];
            std::int64_t hi = lo;
            for (const auto& t : training_) {
                lo = std::min(lo, t.features[j]);
                hi = std::max(hi, t.features[j]);
            }
            min_[j] = lo;
            range_[j] = hi - lo;
        }
        normalized_.resize(training_.size());
        for (std::size_t i = 0; i < training_.size(); ++i) {
            normalized_[i] = normalize(training_[i].features);
        }
    }

    std::array<double, kFeatureCount> normalize(const FeatureVector& f) const {
        std::array<double, kFeatureCount> out{};
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            out[j] = range_[j] == 0
                         ? 0.0
                         : static_cast<double>(f[j] - min_[j]) /
                               static_cast<double>(range_[j]);
        }
        return out;
    }

    Label classify(const FeatureVector& f) const {
        const auto q = normalize(f);
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(normalized_.size());
        for (std::size_t i = 0; i < normalized_.size(); ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                const double d = q[j] - normalized_[i][j];
                d2 += d * d;
            }
            dist.emplace_back(d2, i);
        }
        // Selection, not a full sort: the (distance, row) pairs order ties by
        // lower row index, so the selected k-set matches sorted-prefix-k.
        std::nth_element(dist.begin(), dist.begin() + (k_ - 1), dist.end());
        std::size_t ddos = 0;
        for (std::size_t r = 0; r < k_; ++r) {
            if (training_[dist[r].second].label == Label::ddos) ++ddos;
        }
        return 2 * ddos >= k_ ? Label::ddos : Label::benign;
    }

    std::size_t k() const { return k_; }
    std::size_t training_size() const { return training_.size(); }
    std::int64_t feature_min(std::size_t j) const { return min_.at(j); }
    std::int64_t feature_range(std::size_t j) const { return range_.at(j); }

  private:
    std::size_t k_;
    std::vector<LabeledFlow> training_;
    std::vector<std::array<double, kFeatureCount>> normalized_;
    std::array<std::int64_t, kFeatureCount> min_{};
    std::array<std::int64_t, kFeatureCount> range_{};
};

}  // namespace dpids

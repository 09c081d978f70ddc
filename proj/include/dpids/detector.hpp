// Window-level anomaly detection over the two entropy signals.
//
// Each signal keeps an EWMA model of its legitimate value: a running mean and
// a running mean absolute deviation, both with smoothing 2^-alpha. The models
// live in alpha-scaled 64-bit registers so that deviations smaller than one
// fixed-point ulp still accumulate; all updates are shift/add. Detection is
// directional: spoofed sources push source entropy above mean + k*dev, a
// concentrated victim pulls destination entropy below mean - k*dev. Both
// comparisons are strict, so a value exactly on a threshold is legitimate.
// The alarm combines the two signals per policy. Alarmed windows do not train
// the model, so an ongoing attack cannot drag the notion of legitimate
// traffic toward itself.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>

#include "dpids/entropy.hpp"
#include "dpids/error.hpp"
#include "dpids/fixed_point.hpp"
#include "dpids/frequency.hpp"
#include "dpids/log_table.hpp"
#include "dpids/op_budget.hpp"
#include "dpids/register_array.hpp"

namespace dpids {

struct Thresholds {
    FixedPoint lower;
    FixedPoint upper;
};

struct BandEval {
    FixedPoint lower;
    FixedPoint upper;
    bool deviated;
};

// Band check on plain fixed-point values: x deviates when strictly outside
// [mean - k*dev, mean + k*dev].
inline BandEval evaluate_band(FixedPoint x, FixedPoint mean, FixedPoint dev,
                              FixedPoint k) {
    if (dev.raw() < 0) {
        throw ArgumentError("evaluate_band: deviation must be non-negative");
    }
    const FixedPoint kd = scale_shift_add(dev, k);
    BandEval r{mean - kd, mean + kd, false};
    r.deviated = x < r.lower || x > r.upper;
    return r;
}

// The model is unit-agnostic: it tracks whatever integer unit its input uses.
// The FixedPoint overloads feed raw Q28.4 values; the detector feeds the
// finer entropy_fine_raw unit instead so the deviation register resolves the
// sub-ulp window noise.
class TrafficModel {
  public:
    struct RawBand {
        std::int64_t lower = 0;
        std::int64_t upper = 0;
    };

    TrafficModel(int alpha_log2, FixedPoint k) : alpha_(alpha_log2), k_(k) {
        if (alpha_log2 < 0 || alpha_log2 > 16) {
            throw ArgumentError("TrafficModel: alpha_log2 must be in [0, 16]");
        }
        if (k.raw() < 0) {
            throw ArgumentError("TrafficModel: k must be non-negative");
        }
    }

    bool trained() const { return primed_; }

    // Directional tests against the current model, in scaled space. Strictly
    // above the upper threshold / strictly below the lower one; a value on
    // the threshold itself does not deviate. The comparison half-width is
    // floored at one input quantum: the signal cannot move by less than one
    // representable step, so a fresh model whose deviation register is still
    // zero must not flag single-step wobbles. Without the floor such a wobble
    // would alarm, freeze the model, and keep the deviation register at zero
    // forever. thresholds_raw() reports the unfloored model values, so the
    // alarm region is never wider than the reported band.
    bool deviates_above_raw(std::int64_t v) const {
        if (!primed_) return false;
        return (v << alpha_) > m_scaled_ + floored_halfwidth_();
    }

    bool deviates_below_raw(std::int64_t v) const {
        if (!primed_) return false;
        return (v << alpha_) < m_scaled_ - floored_halfwidth_();
    }

    // EWMA update: mean += (x - mean) * 2^-alpha, dev likewise on |x - mean|.
    void train_raw(std::int64_t v) {
        if (!primed_) {
            m_scaled_ = v << alpha_;
            d_scaled_ = 0;
            primed_ = true;
            return;
        }
        const std::int64_t err = v - (m_scaled_ >> alpha_);
        m_scaled_ += err;
        d_scaled_ += (err < 0 ? -err : err) - (d_scaled_ >> alpha_);
    }

    std::int64_t mean_raw() const { return m_scaled_ >> alpha_; }
    std::int64_t deviation_raw() const { return d_scaled_ >> alpha_; }

    RawBand thresholds_raw() const {
        const std::int64_t kd = scaled_band_halfwidth_();
        return {(m_scaled_ - kd) >> alpha_, (m_scaled_ + kd) >> alpha_};
    }

    bool deviates_above(FixedPoint x) const { return deviates_above_raw(x.raw()); }
    bool deviates_below(FixedPoint x) const { return deviates_below_raw(x.raw()); }

    bool deviates(FixedPoint x) const {
        return deviates_above(x) || deviates_below(x);
    }

    void train(FixedPoint x) { train_raw(x.raw()); }

    FixedPoint mean() const { return FixedPoint::from_raw(narrow_(mean_raw())); }

    FixedPoint deviation() const {
        return FixedPoint::from_raw(narrow_(deviation_raw()));
    }

    Thresholds thresholds() const {
        const RawBand b = thresholds_raw();
        return {FixedPoint::from_raw(narrow_(b.lower)),
                FixedPoint::from_raw(narrow_(b.upper))};
    }

  private:
    std::int64_t floored_halfwidth_() const {
        const std::int64_t one_quantum = std::int64_t{1} << alpha_;
        const std::int64_t kd = scaled_band_halfwidth_();
        return kd < one_quantum ? one_quantum : kd;
    }

    std::int64_t scaled_band_halfwidth_() const {
        // k.raw * d_scaled >> fraction bits, as shift-adds over k's set bits.
        std::int64_t acc = 0;
        std::uint32_t bits = static_cast<std::uint32_t>(k_.raw());
        for (int b = 0; bits != 0; ++b, bits >>= 1) {
            if (bits & 1u) acc += d_scaled_ << b;
        }
        return acc >> FixedPoint::kFractionBits;
    }

    static std::int32_t narrow_(std::int64_t v) {
        if (v < INT32_MIN || v > INT32_MAX) {
            throw ArithmeticOverflow("traffic model value exceeds 32 bits");
        }
        return static_cast<std::int32_t>(v);
    }

    int alpha_;
    FixedPoint k_;
    bool primed_ = false;
    std::int64_t m_scaled_ = 0;
    std::int64_t d_scaled_ = 0;
};

enum class AlarmPolicy { either, both };

struct DetectorConfig {
    int log2_window = 13;
    std::size_t sketch_depth = 4;
    std::size_t sketch_width = 2048;
    int msb_kept = 8;
    int alpha_log2 = 3;
    FixedPoint k = FixedPoint::from_raw(48);  // 3.0
    AlarmPolicy policy = AlarmPolicy::either;
    std::uint32_t warmup_windows = 10;
    std::uint32_t op_limit = 32;
    std::uint64_t seed = 1;

    void validate() const {
        if (log2_window < 1 || log2_window > 20) {
            throw ConfigError("log2_window must be in [1, 20]");
        }
        if (sketch_depth < 1 || sketch_width < 1) {
            throw ConfigError("sketch dimensions must be >= 1");
        }
        if (msb_kept < 1 || msb_kept > 31) {
            throw ConfigError("msb_kept must be in [1, 31]");
        }
        if (alpha_log2 < 0 || alpha_log2 > 16) {
            throw ConfigError("alpha_log2 must be in [0, 16]");
        }
        if (k.raw() < 0) {
            throw ConfigError("k must be non-negative");
        }
        if (warmup_windows < 1) {
            throw ConfigError("warmup_windows must be >= 1");
        }
        if (op_limit < 1) {
            throw ConfigError("op_limit must be >= 1");
        }
    }
};

struct WindowReport {
    std::uint32_t window_id = 0;
    FixedPoint h_src;
    FixedPoint h_dst;
    Thresholds src_band;
    Thresholds dst_band;
    bool src_deviated = false;
    bool dst_deviated = false;
    bool warmup = false;
    bool alarm = false;
};

template <typename Estimator>
class EntropyDetector {
  public:
    EntropyDetector(const DetectorConfig& cfg, Estimator src_est, Estimator dst_est,
                    const LogTable* table)
        : cfg_(cfg),
          src_pipe_(cfg.log2_window, std::move(src_est), table),
          dst_pipe_(cfg.log2_window, std::move(dst_est), table),
          src_model_(cfg.alpha_log2, cfg.k),
          dst_model_(cfg.alpha_log2, cfg.k),
          budget_(cfg.op_limit),
          window_counter_(1) {
        cfg_.validate();
    }

    // Feeds one packet's address pair; returns the window report when this
    // packet closes an observation window.
    std::optional<WindowReport> process(std::uint32_t src_ip, std::uint32_t dst_ip) {
        const std::uint8_t src[4] = {
            static_cast<std::uint8_t>(src_ip >> 24), static_cast<std::uint8_t>(src_ip >> 16),
            static_cast<std::uint8_t>(src_ip >> 8), static_cast<std::uint8_t>(src_ip)};
        const std::uint8_t dst[4] = {
            static_cast<std::uint8_t>(dst_ip >> 24), static_cast<std::uint8_t>(dst_ip >> 16),
            static_cast<std::uint8_t>(dst_ip >> 8), static_cast<std::uint8_t>(dst_ip)};
        src_pipe_.absorb(std::span<const std::uint8_t>(src, 4), &budget_);
        dst_pipe_.absorb(std::span<const std::uint8_t>(dst, 4), &budget_);
        const std::int32_t in_window =
            window_counter_.add(0, 1, &budget_);

        const std::uint32_t used = budget_.used();
        if (used > max_ops_) max_ops_ = used;
        budget_.end_of_packet_checked();

        if (static_cast<std::uint32_t>(in_window) < src_pipe_.window_size()) {
            return std::nullopt;
        }
        return close_window_();
    }

    std::uint32_t max_ops_per_packet() const { return max_ops_; }
    std::uint32_t windows_closed() const { return next_window_; }
    const TrafficModel& src_model() const { return src_model_; }
    const TrafficModel& dst_model() const { return dst_model_; }

  private:
    // Models run on the fine entropy unit (2^-4/W bits); reports carry the
    // Q28.4 values and bands shifted back down for display.
    WindowReport close_window_() {
        WindowReport r;
        r.window_id = next_window_;
        r.h_src = src_pipe_.entropy();
        r.h_dst = dst_pipe_.entropy();
        const std::int64_t fine_src = src_pipe_.entropy_fine_raw();
        const std::int64_t fine_dst = dst_pipe_.entropy_fine_raw();
        r.src_band = display_band_(src_model_);
        r.dst_band = display_band_(dst_model_);
        r.warmup = next_window_ < cfg_.warmup_windows;

        if (!r.warmup) {
            r.src_deviated = src_model_.deviates_above_raw(fine_src);
            r.dst_deviated = dst_model_.deviates_below_raw(fine_dst);
            r.alarm = cfg_.policy == AlarmPolicy::either
                          ? (r.src_deviated || r.dst_deviated)
                          : (r.src_deviated && r.dst_deviated);
        }
        if (!r.alarm) {
            src_model_.train_raw(fine_src);
            dst_model_.train_raw(fine_dst);
        }

        src_pipe_.end_of_window();
        dst_pipe_.end_of_window();
        window_counter_.reset();
        ++next_window_;
        return r;
    }

    Thresholds display_band_(const TrafficModel& m) const {
        const auto b = m.thresholds_raw();
        return {FixedPoint::from_raw(narrow_band_(b.lower >> cfg_.log2_window)),
                FixedPoint::from_raw(narrow_band_(b.upper >> cfg_.log2_window))};
    }

    static std::int32_t narrow_band_(std::int64_t v) {
        if (v < INT32_MIN || v > INT32_MAX) {
            throw ArithmeticOverflow("display band exceeds 32 bits");
        }
        return static_cast<std::int32_t>(v);
    }

    DetectorConfig cfg_;
    EntropyPipeline<Estimator> src_pipe_;
    EntropyPipeline<Estimator> dst_pipe_;
    TrafficModel src_model_;
    TrafficModel dst_model_;
    OpBudget budget_;
    Register32 window_counter_;
    std::uint32_t next_window_ = 0;
    std::uint32_t max_ops_ = 0;
};

}  // namespace dpids

// Longest-prefix-match table approximating g(x) = x*log2(x) over integer
// x in [1, max_x], the workhorse of in-pipeline entropy accounting.
//
// Values whose bit length fits msb_kept get exact entries. Longer values are
// bucketed by their top msb_kept significant bits: one prefix per bucket,
// holding g evaluated at the bucket midpoint, rounded to 28.4 fixed point.
// The table is computed off-pipeline and installed; lookups are single LPM
// matches. With msb_kept = 8 the relative error stays under 1% for x >= 2.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpids/error.hpp"
#include "dpids/fixed_point.hpp"
#include "dpids/match_table.hpp"
#include "dpids/op_budget.hpp"

namespace dpids {

class LogTable {
  public:
    struct Entry {
        std::uint32_t prefix;
        int prefix_len;
        std::int32_t value_raw;
    };

    LogTable(std::uint32_t max_x, int msb_kept = 8)
        : max_x_(max_x), msb_kept_(msb_kept), table_(MatchKind::lpm, 32) {
        if (max_x < 1) {
            throw ArgumentError("LogTable: max_x must be >= 1");
        }
        if (msb_kept < 1 || msb_kept > 31) {
            throw ArgumentError("LogTable: msb_kept must be in [1, 31]");
        }
        build_();
    }

    std::uint32_t max_x() const { return max_x_; }
    int msb_kept() const { return msb_kept_; }
    std::size_t entry_count() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    // Upper bound on the number of installed entries.
    static std::size_t expected_entries(std::uint32_t max_x, int msb_kept) {
        const int lmax = std::bit_width(max_x);
        std::size_t n = (std::size_t{1} << msb_kept) - 1;
        if (lmax > msb_kept) {
            n += static_cast<std::size_t>(lmax - msb_kept)
                 << (msb_kept - 1);
        }
        return n;
    }

    // g(x) as 28.4 fixed point; one LPM lookup.
    FixedPoint lookup(std::uint32_t x, OpBudget* budget = nullptr) const {
        if (x < 1 || x > max_x_) {
            throw ArgumentError("LogTable: x outside [1, max_x]");
        }
        const auto hit = table_.lookup(x, budget);
        if (!hit.has_value()) {
            throw InternalError("LogTable: lookup miss inside domain");
        }
        return FixedPoint::from_raw(static_cast<std::int32_t>(*hit));
    }

    void write_text(std::ostream& os) const {
        os << "xlog2 v1 max_x=" << max_x_ << " msb_kept=" << msb_kept_
           << " entries=" << entries_.size() << "\n";
        for (const auto& e : entries_) {
            os << e.prefix << "/" << e.prefix_len << " " << e.value_raw << "\n";
        }
    }

    void write_text_file(const std::string& path) const {
        std::ofstream os(path);
        if (!os) {
            throw IoError("cannot open " + path + " for writing");
        }
        write_text(os);
        if (!os.flush()) {
            throw IoError("write failed for " + path);
        }
    }

    static LogTable from_text(std::istream& is) {
        std::string line;
        std::size_t lineno = 1;
        if (!std::getline(is, line)) {
            throw ParseError("empty log table input", lineno);
        }
        std::uint32_t max_x = 0;
        int msb = 0;
        std::size_t count = 0;
        {
            std::istringstream hs(line);
            std::string tag, ver, f1, f2, f3;
            hs >> tag >> ver >> f1 >> f2 >> f3;
            if (tag != "xlog2") throw ParseError("bad log table header", lineno);
            if (ver != "v1") throw VersionError("unsupported log table version");
            if (!eat_kv_(f1, "max_x=", max_x) || !eat_kv_(f2, "msb_kept=", msb) ||
                !eat_kv_(f3, "entries=", count)) {
                throw ParseError("bad log table header fields", lineno);
            }
        }
        LogTable t(max_x, msb, Raw{});
        while (std::getline(is, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::uint32_t prefix = 0;
            int len = -1;
            std::int32_t raw = 0;
            char slash = 0;
            if (!(ls >> prefix >> slash >> len >> raw) || slash != '/') {
                throw ParseError("bad log table entry", lineno);
            }
            t.install_(Entry{prefix, len, raw});
        }
        if (t.entries_.size() != count) {
            throw ParseError("entry count mismatch: header says " +
                                 std::to_string(count) + ", got " +
                                 std::to_string(t.entries_.size()),
                             lineno);
        }
        return t;
    }

    static LogTable from_text_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) {
            throw IoError("cannot open " + path);
        }
        return from_text(is);
    }

  private:
    struct Raw {};

    LogTable(std::uint32_t max_x, int msb_kept, Raw)
        : max_x_(max_x), msb_kept_(msb_kept), table_(MatchKind::lpm, 32) {
        if (max_x < 1 || msb_kept < 1 || msb_kept > 31) {
            throw ParseError("bad log table parameters", 1);
        }
    }

    static bool eat_kv_(const std::string& field, const std::string& key,
                        auto& out) {
        if (!field.starts_with(key)) return false;
        std::istringstream vs(field.substr(key.size()));
        return static_cast<bool>(vs >> out) && vs.eof();
    }

    void install_(const Entry& e) {
        table_.add_entry({.key = e.prefix,
                          .prefix_len = e.prefix_len,
                          .action = e.value_raw});
        entries_.push_back(e);
    }

    static std::int32_t g_raw_(double x) {
        return FixedPoint::from_double(x * std::log2(x)).raw();
    }

    void build_() {
        const int m = msb_kept_;
        const std::uint32_t exact_top =
            std::min<std::uint64_t>(max_x_, (std::uint64_t{1} << m) - 1);
        for (std::uint32_t x = 1; x <= exact_top; ++x) {
            install_(Entry{x, 32, x == 1 ? 0 : g_raw_(x)});
        }
        const int lmax = std::bit_width(max_x_);
        for (int len = m + 1; len <= lmax; ++len) {
            const int shift = len - m;
            for (std::uint32_t top = 1u << (m - 1); top < (1u << m); ++top) {
                const std::uint64_t base = static_cast<std::uint64_t>(top) << shift;
                if (base > max_x_) break;
                const std::uint64_t last =
                    std::min<std::uint64_t>(base + (1ull << shift) - 1, max_x_);
                const double mid =
                    static_cast<double>(base) + static_cast<double>(last - base) / 2.0;
                install_(Entry{static_cast<std::uint32_t>(base), 32 - shift,
                               g_raw_(mid)});
            }
        }
    }

    std::uint32_t max_x_;
    int msb_kept_;
    MatchActionTable table_;
    std::vector<Entry> entries_;
};

}  // namespace dpids

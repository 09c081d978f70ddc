#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "dpids/entropy.hpp"
#include "dpids/error.hpp"
#include "dpids/frequency.hpp"
#include "dpids/log_table.hpp"

namespace dpids {
namespace {

std::vector<std::uint8_t> key32(std::uint32_t v) {
    return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
            static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

TEST(CountSketch, SingleKeyCountsExactly) {
    CountSketch cs(4, 2048, 42);
    const auto k = key32(0x0a000001);
    for (std::int32_t i = 1; i <= 100; ++i) {
        EXPECT_EQ(cs.update(k), i);
    }
    EXPECT_EQ(cs.estimate(k), 100);
    cs.reset();
    EXPECT_EQ(cs.estimate(k), 0);
    EXPECT_EQ(cs.update(k), 1);
}

TEST(CountSketch, RejectsZeroDims) {
    EXPECT_THROW(CountSketch(0, 16, 1), ArgumentError);
    EXPECT_THROW(CountSketch(4, 0, 1), ArgumentError);
}

// Every row's sign-corrected counter rises by exactly one on update, so the
// reported estimate rises by exactly one whenever the zero-floor is inactive.
TEST(CountSketch, UpdateIncrementsEstimate) {
    CountSketch cs(4, 2048, 7);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint32_t> keys(0, 499);
    for (int i = 0; i < 5000; ++i) {
        const auto k = key32(keys(rng));
        const std::int32_t before = cs.estimate(k);
        const std::int32_t after = cs.update(k);
        EXPECT_EQ(after, cs.estimate(k));
        if (before >= 1) {
            ASSERT_EQ(after, before + 1);
        } else {
            ASSERT_LE(after, 1);
        }
        ASSERT_GE(after, 0);
    }
}

TEST(CountSketch, TracksExactCountsUnderLoad) {
    CountSketch cs(4, 2048, 3);
    ExactCounter exact;
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<std::uint32_t> keys(0, 799);
    std::vector<std::uint32_t> seen;
    for (int i = 0; i < 4096; ++i) {
        const auto kv = keys(rng);
        const auto k = key32(kv);
        cs.update(k);
        exact.update(k);
        seen.push_back(kv);
    }
    double total_err = 0.0;
    int n = 0;
    for (std::uint32_t kv = 0; kv < 800; ++kv) {
        const auto k = key32(kv);
        const auto truth = exact.estimate(k);
        if (truth == 0) continue;
        const auto est = cs.estimate(k);
        ASSERT_LE(std::abs(est - truth), 16) << "key " << kv;
        total_err += std::abs(est - truth);
        ++n;
    }
    EXPECT_LT(total_err / n, 1.5);
}

TEST(CountSketch, SeedDeterminism) {
    CountSketch a(4, 512, 99), b(4, 512, 99), c(4, 512, 100);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::uint32_t> keys(0, 199);
    bool any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const auto k = key32(keys(rng));
        const auto va = a.update(k);
        EXPECT_EQ(va, b.update(k));
        any_diff |= c.update(k) != va;
    }
    EXPECT_TRUE(any_diff);
}

TEST(CountSketch, ChargesThreeOpsPerRow) {
    OpBudget budget(100);
    CountSketch cs(4, 64, 1);
    cs.update(key32(1), &budget);
    EXPECT_EQ(budget.used(), 12u);
    budget.reset();
    cs.estimate(key32(1), &budget);
    EXPECT_EQ(budget.used(), 12u);
    EXPECT_EQ(CountSketch::ops_per_access(4), 12u);
}

TEST(LogTable, ExactEntriesForSmallValues) {
    LogTable t(4096, 8);
    EXPECT_EQ(t.lookup(1).raw(), 0);
    EXPECT_EQ(t.lookup(2).raw(), 32);    // 2.0
    EXPECT_EQ(t.lookup(4).raw(), 128);   // 8.0
    EXPECT_EQ(t.lookup(8).raw(), 384);   // 24.0
    EXPECT_EQ(t.lookup(16).raw(), 1024); // 64.0
    EXPECT_EQ(t.lookup(3).raw(), 76);    // round(3*log2(3)*16)
}

TEST(LogTable, DomainChecks) {
    LogTable t(100, 8);
    EXPECT_THROW(t.lookup(0), ArgumentError);
    EXPECT_THROW(t.lookup(101), ArgumentError);
    EXPECT_NO_THROW(t.lookup(100));
    EXPECT_THROW(LogTable(0, 8), ArgumentError);
    EXPECT_THROW(LogTable(10, 0), ArgumentError);
    EXPECT_THROW(LogTable(10, 32), ArgumentError);
}

TEST(LogTable, EntryCountBounded) {
    LogTable t(1u << 20, 8);
    EXPECT_EQ(LogTable::expected_entries(1u << 20, 8), 1919u);
    EXPECT_LE(t.entry_count(), 1919u);
    EXPECT_EQ(t.entry_count(), 1792u);

    LogTable small(100, 8);  // fits entirely in exact entries
    EXPECT_EQ(small.entry_count(), 100u);
}

TEST(LogTable, RelativeErrorUnderOnePercentSampled) {
    LogTable t(1u << 20, 8);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::uint32_t> xs(4097, 1u << 20);
    auto check = [&](std::uint32_t x) {
        const double truth = x * std::log2(static_cast<double>(x));
        const double got = t.lookup(x).to_double();
        ASSERT_LE(std::abs(got - truth) / truth, 0.01) << "x=" << x;
    };
    for (std::uint32_t x = 2; x <= 4096; ++x) check(x);
    for (int i = 0; i < 20000; ++i) check(xs(rng));
    check(1u << 20);
}

TEST(LogTable, TextRoundTrip) {
    LogTable t(5000, 6);
    std::ostringstream os;
    t.write_text(os);
    std::istringstream is(os.str());
    const LogTable back = LogTable::from_text(is);
    EXPECT_EQ(back.max_x(), t.max_x());
    EXPECT_EQ(back.msb_kept(), t.msb_kept());
    ASSERT_EQ(back.entry_count(), t.entry_count());
    for (std::uint32_t x = 1; x <= 5000; x += 7) {
        EXPECT_EQ(back.lookup(x).raw(), t.lookup(x).raw());
    }
}

TEST(LogTable, RejectsMalformedText) {
    {
        std::istringstream is("nonsense header\n");
        EXPECT_THROW(LogTable::from_text(is), ParseError);
    }
    {
        std::istringstream is("xlog2 v7 max_x=4 msb_kept=2 entries=0\n");
        EXPECT_THROW(LogTable::from_text(is), VersionError);
    }
    {
        std::istringstream is("xlog2 v1 max_x=4 msb_kept=2 entries=1\n1/32/3 9\n");
        try {
            LogTable::from_text(is);
            FAIL() << "expected ParseError";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), 2u);
        }
    }
    {
        std::istringstream is("xlog2 v1 max_x=4 msb_kept=2 entries=3\n1/32 0\n");
        EXPECT_THROW(LogTable::from_text(is), ParseError);  // count mismatch
    }
}

TEST(Entropy, UniformSingleKeyIsZero) {
    LogTable table(16, 8);
    EntropyPipeline<ExactCounter> p(4, ExactCounter{}, &table);
    const auto k = key32(1);
    for (int i = 0; i < 16; ++i) p.absorb(k);
    EXPECT_EQ(p.s_value().raw(), 1024);  // g(16) = 64.0
    EXPECT_EQ(p.entropy().raw(), 0);
}

TEST(Entropy, TwoEqualKeysIsOneBit) {
    LogTable table(16, 8);
    EntropyPipeline<ExactCounter> p(4, ExactCounter{}, &table);
    for (int i = 0; i < 8; ++i) p.absorb(key32(0xA));
    for (int i = 0; i < 8; ++i) p.absorb(key32(0xB));
    EXPECT_EQ(p.s_value().raw(), 768);  // 2 * g(8) = 48.0
    EXPECT_EQ(p.entropy().raw(), 16);   // 1.0 bit
}

TEST(Entropy, AllDistinctKeysIsMax) {
    LogTable table(16, 8);
    EntropyPipeline<ExactCounter> p(4, ExactCounter{}, &table);
    for (std::uint32_t i = 0; i < 16; ++i) p.absorb(key32(i));
    EXPECT_EQ(p.s_value().raw(), 0);
    EXPECT_EQ(p.entropy().raw(), 64);  // 4.0 bits
}

TEST(Entropy, EndOfWindowResets) {
    LogTable table(16, 8);
    EntropyPipeline<ExactCounter> p(4, ExactCounter{}, &table);
    for (int i = 0; i < 16; ++i) p.absorb(key32(1));
    p.end_of_window();
    EXPECT_EQ(p.s_value().raw(), 0);
    EXPECT_EQ(p.estimator().estimate(key32(1)), 0);
    EXPECT_EQ(p.entropy().raw(), 64);  // empty window reads as max entropy
}

// Incremental S must telescope to the direct sum of g over final counts.
TEST(Entropy, IncrementalMatchesDirectSum) {
    LogTable table(4096, 8);
    EntropyPipeline<ExactCounter> p(12, ExactCounter{}, &table);
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<std::uint32_t> keys(0, 699);
    std::map<std::uint32_t, std::int32_t> counts;
    for (int i = 0; i < 4096; ++i) {
        const auto kv = keys(rng);
        p.absorb(key32(kv));
        ++counts[kv];
    }
    std::int64_t direct = 0;
    for (const auto& [kv, c] : counts) {
        direct += table.lookup(static_cast<std::uint32_t>(c)).raw();
    }
    EXPECT_EQ(p.s_value().raw(), direct);

    const std::int32_t h_direct = (12 << 4) - static_cast<std::int32_t>(direct >> 12);
    EXPECT_EQ(p.entropy().raw(), h_direct);
}

// The fine value is W*log2(W) - S itself; shifting it down must land within
// one truncation step of the Q28.4 entropy.
TEST(Entropy, FineValueCarriesTheUnshiftedRegister) {
    LogTable table(4096, 8);
    EntropyPipeline<ExactCounter> p(12, ExactCounter{}, &table);
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::uint32_t> keys(0, 899);
    for (int i = 0; i < 4096; ++i) p.absorb(key32(keys(rng)));

    const std::int64_t max_fine = std::int64_t{12 << 4} << 12;
    const std::int64_t fine = p.entropy_fine_raw();
    EXPECT_EQ(fine, max_fine - p.s_value().raw());
    EXPECT_GE(fine, 0);
    EXPECT_LE(fine, max_fine);
    const std::int64_t shifted = fine >> 12;
    EXPECT_LE(std::abs(shifted - p.entropy().raw()), 1);

    EXPECT_EQ(EntropyPipeline<ExactCounter>(4, ExactCounter{}, &table)
                  .entropy_fine_raw(),
              std::int64_t{4 << 4} << 4);  // empty window reads as max
}

TEST(Entropy, SketchTracksExactEstimator) {
    LogTable table(4096, 8);
    EntropyPipeline<CountSketch> ps(12, CountSketch(4, 2048, 77), &table);
    EntropyPipeline<ExactCounter> pe(12, ExactCounter{}, &table);
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::uint32_t> keys(0, 799);
    for (int i = 0; i < 4096; ++i) {
        const auto k = key32(keys(rng));
        ps.absorb(k);
        pe.absorb(k);
    }
    EXPECT_LE(std::abs(ps.entropy().raw() - pe.entropy().raw()), 16);  // 1 bit
}

TEST(Entropy, ChargesFifteenOpsPerPacket) {
    LogTable table(4096, 8);
    EntropyPipeline<CountSketch> p(12, CountSketch(4, 2048, 1), &table);
    OpBudget budget(100);
    p.absorb(key32(5), &budget);
    EXPECT_EQ(budget.used(), 15u);  // 12 sketch + 2 lookups + 1 S update
}

TEST(Entropy, ValidatesConstruction) {
    LogTable small(8, 4);
    EXPECT_THROW(EntropyPipeline<ExactCounter>(4, ExactCounter{}, &small),
                 ArgumentError);
    EXPECT_THROW(EntropyPipeline<ExactCounter>(0, ExactCounter{}, &small),
                 ArgumentError);
    EXPECT_THROW(EntropyPipeline<ExactCounter>(4, ExactCounter{}, nullptr),
                 ArgumentError);
}

}  // namespace
}  // namespace dpids

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace oraclenet;

namespace {

std::vector<TimedResult> at_seconds(std::initializer_list<double> ts) {
    std::vector<TimedResult> out;
    int i = 0;
    for (double t : ts) out.push_back(TimedResult{"n" + std::to_string(i++), 0.0, to_ticks(t), 0});
    return out;
}

std::vector<Ticks> stamps(const std::vector<TimedResult>& rs) {
    std::vector<Ticks> out;
    for (const auto& r : rs) out.push_back(r.timestamp);
    return out;
}

double variance_seconds(const std::vector<TimedResult>& rs) {
    std::vector<double> v;
    for (const auto& r : rs) v.push_back(to_seconds(r.timestamp));
    return population_variance(v);
}

TEST(FilterWindow, WorkedExampleKeepsFirstThree) {
    const auto kept = filter_window(at_seconds({0.0, 0.2, 0.5, 2.0}), 1.0);
    EXPECT_EQ(stamps(kept), (std::vector<Ticks>{0, 200000, 500000}));
    EXPECT_NEAR(variance_seconds(kept), 0.0422, 1e-4);
}

TEST(FilterWindow, EqualCountsPreferLowerVariance) {
    const auto kept = filter_window(at_seconds({0.0, 1.0, 10.0, 11.0}), 1.5);
    EXPECT_EQ(stamps(kept), (std::vector<Ticks>{0, 1000000}));
    const auto tighter = filter_window(at_seconds({0.0, 1.0, 10.0, 10.5}), 1.5);
    EXPECT_EQ(stamps(tighter), (std::vector<Ticks>{10000000, 10500000}));
}

TEST(FilterWindow, BoundaryIsInclusive) {
    EXPECT_EQ(filter_window(at_seconds({0.0, 1.0}), 1.0).size(), 2u);
    EXPECT_EQ(filter_window(at_seconds({0.0, 1.000001}), 1.0).size(), 1u);
}

TEST(FilterWindow, RejectsBadInput) {
    EXPECT_THROW(filter_window({}, 1.0), ContractViolation);
    EXPECT_THROW(filter_window(at_seconds({0.0}), 0.0), ContractViolation);
}

TEST(FilterWindow, KeptAndDroppedPartitionInput) {
    const auto out = filter_window_ticks(at_seconds({3.0, 0.0, 0.4, 9.0, 0.9}), to_ticks(1.0));
    EXPECT_EQ(out.kept.size() + out.dropped.size(), 5u);
    EXPECT_EQ(out.window_start, 0);
    EXPECT_EQ(out.window_end, to_ticks(0.9));
    EXPECT_EQ(out.comparisons, 5u);
}

// Property: the two-pointer filter agrees with exhaustive search.
TEST(FilterWindow, MatchesBruteForceOracle) {
    Rng rng(2024);
    for (int trial = 0; trial < 5000; ++trial) {
        const std::size_t n = 1 + rng.below(12);
        std::vector<TimedResult> rs;
        for (std::size_t i = 0; i < n; ++i) {
            rs.push_back(TimedResult{"n" + std::to_string(i), 0.0, static_cast<Ticks>(rng.below(20)), 0});
        }
        const Ticks w = 1 + static_cast<Ticks>(rng.below(8));
        const auto got = filter_window_ticks(rs, w).kept;
        const auto want = oracle::brute_force_filter(rs, w);
        ASSERT_EQ(got, want) << "trial " << trial;
    }
}

TEST(FilterWindow, OutcomeIndependentOfInputOrder) {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TimedResult> rs;
        for (int i = 0; i < 10; ++i) rs.push_back(TimedResult{"n" + std::to_string(i), 0.0, static_cast<Ticks>(rng.below(50)), 0});
        auto shuffled = rs;
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        EXPECT_EQ(filter_window_ticks(rs, 10).kept, filter_window_ticks(shuffled, 10).kept);
    }
}

TEST(RetryPolicy, GrowsWidthByHalf) {
    FilterPolicy p{1.0, 3};
    EXPECT_EQ(apply_retry_policy(3, p), RetryDecision{Accept{}});
    auto d = apply_retry_policy(2, p);
    ASSERT_TRUE(std::holds_alternative<Retry>(d));
    EXPECT_DOUBLE_EQ(std::get<Retry>(d).new_width, 1.5);
    p.window_width = std::get<Retry>(d).new_width;
    d = apply_retry_policy(1, p);
    EXPECT_DOUBLE_EQ(std::get<Retry>(d).new_width, 2.25);
}

TEST(FilterPolicy, Validation) {
    EXPECT_THROW((FilterPolicy{0.0, 1}.validate()), ContractViolation);
    EXPECT_THROW((FilterPolicy{1.0, 0}.validate()), ContractViolation);
}

// Property: once settled, no set of late arrivals (all at or after the
// settle point) changes the kept set.
TEST(FilterSettle, LateArrivalsCannotChangeSettledOutcome) {
    Rng rng(99);
    int checked = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        const std::size_t n = 2 + rng.below(8);
        const std::size_t outstanding = rng.below(4);
        const Ticks w = 5 + static_cast<Ticks>(rng.below(10));
        std::vector<TimedResult> arrived;
        for (std::size_t i = 0; i < n; ++i) {
            arrived.push_back(TimedResult{"a" + std::to_string(i), 0.0, static_cast<Ticks>(rng.below(30)), 0});
        }
        const auto ts = stamps(arrived);
        const Ticks now = *std::max_element(ts.begin(), ts.end());
        const auto when = next_settle_time(ts, outstanding, now, w);
        if (!when) continue;
        ++checked;
        const auto base = filter_window_ticks(arrived, w).kept;
        for (int k = 0; k < 10; ++k) {
            auto all = arrived;
            for (std::size_t j = 0; j < outstanding; ++j) {
                all.push_back(TimedResult{"z" + std::to_string(j), 0.0, *when + static_cast<Ticks>(rng.below(20)), 0});
            }
            ASSERT_EQ(filter_window_ticks(all, w).kept, base) << "trial " << trial;
        }
    }
    EXPECT_GT(checked, 100);
}

TEST(FilterSettle, NothingOutstandingSettlesImmediately) {
    EXPECT_TRUE(filter_outcome_settled({1, 2}, 0, 3, 5));
    EXPECT_FALSE(filter_outcome_settled({}, 0, 3, 5));
    EXPECT_FALSE(filter_outcome_settled({}, 2, 3, 5));
    EXPECT_EQ(next_settle_time({}, 1, 0, 5), std::nullopt);
}

TEST(FilterWindow, SingletonAlwaysKept) {
    for (double w : {0.001, 1.0, 50.0}) EXPECT_EQ(filter_window(at_seconds({7.5}), w).size(), 1u);
}

TEST(FilterWindow, RangeWithinWidthAndIdempotent) {
    Rng rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<TimedResult> rs;
        const std::size_t n = 1 + rng.below(15);
        for (std::size_t i = 0; i < n; ++i) rs.push_back(TimedResult{"n" + std::to_string(i), 0.0, static_cast<Ticks>(rng.below(5000000)), 0});
        const Ticks w = 1 + static_cast<Ticks>(rng.below(2000000));
        const auto kept = filter_window_ticks(rs, w).kept;
        const auto ts = stamps(kept);
        ASSERT_LE(*std::max_element(ts.begin(), ts.end()) - *std::min_element(ts.begin(), ts.end()), w);
        ASSERT_EQ(filter_window_ticks(kept, w).kept, kept);
    }
}

TEST(RetryPolicy, MinCountOneAccepts) {
    EXPECT_EQ(apply_retry_policy(5, FilterPolicy{1.0, 1}), RetryDecision{Accept{}});
}

}  // namespace

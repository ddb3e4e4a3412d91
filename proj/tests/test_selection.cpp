#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>
#include <numeric>
#include <set>

using namespace oraclenet;

namespace {

TEST(Anchor, GoldenValue) {
    const EventAnchor a = compute_anchor(to_bytes("q1"), to_bytes("beacon"));
    EXPECT_EQ(a.anchor, 4281345193859741217ULL);
}

TEST(Anchor, RejectsEmptyEventId) {
    EXPECT_THROW(compute_anchor(Bytes{}, to_bytes("b")), ContractViolation);
}

TEST(RingPriority, GoldenPositions) {
    const EventAnchor a = compute_anchor(to_bytes("q1"), to_bytes("beacon"));
    const RingPriority rp = compute_ring_priority("n007", vrf_setup(7).secret_key, a, 3.0);
    const std::vector<std::uint64_t> expected{4870679122072365424ULL, 2001031702596992427ULL,
                                              16748579472645070286ULL};
    EXPECT_EQ(rp.positions, expected);
    EXPECT_EQ(rp.winning_position, 4870679122072365424ULL);
    EXPECT_EQ(rp.distance, 589333928212624207ULL);
}

TEST(RingPriority, ClockwiseDistanceWraps) {
    EXPECT_EQ(clockwise_distance(10, 15), 5u);
    EXPECT_EQ(clockwise_distance(15, 10), std::numeric_limits<std::uint64_t>::max() - 4);
    EXPECT_EQ(clockwise_distance(7, 7), 0u);
}

TEST(RingPriority, PositionCountIsCeiling) {
    EXPECT_EQ(position_count(1.0), 1u);
    EXPECT_EQ(position_count(1.0001), 2u);
    EXPECT_EQ(position_count(3.0), 3u);
    EXPECT_EQ(position_count(3.5), 4u);
    EXPECT_THROW(position_count(0.99), ContractViolation);
    EXPECT_THROW(position_count(std::nan("")), ContractViolation);
}

TEST(RingPriority, MorePositionsNeverWorsenDistance) {
    const EventAnchor a = compute_anchor(to_bytes("q-mono"), to_bytes("b"));
    for (std::uint64_t s = 0; s < 100; ++s) {
        const Bytes sk = vrf_setup(s).secret_key;
        std::uint64_t prev = std::numeric_limits<std::uint64_t>::max();
        for (double r = 1.0; r <= 6.0; r += 1.0) {
            const auto rp = compute_ring_priority("n", sk, a, r);
            EXPECT_LE(rp.distance, prev);
            prev = rp.distance;
        }
    }
}

TEST(RingPriority, VerifiesHonestClaims) {
    KeyEscrow escrow;
    const EventAnchor a = compute_anchor(to_bytes("q-ok"), to_bytes("b"));
    for (std::uint64_t s = 0; s < 20; ++s) {
        const KeyPair kp = vrf_setup(s);
        escrow.enroll(kp);
        const double rep = 1.0 + static_cast<double>(s % 4) * 0.7;
        const auto rp = compute_ring_priority("n" + std::to_string(s), kp.secret_key, a, rep);
        EXPECT_TRUE(verify_ring_priority(escrow, kp.public_key, a, rp, position_count(rep)));
    }
}

TEST(SelectTopT, OrdersByDistanceThenNodeId) {
    std::vector<RingPriority> claims(4);
    claims[0].node_id = "b";
    claims[0].distance = 5;
    claims[1].node_id = "a";
    claims[1].distance = 5;
    claims[2].node_id = "c";
    claims[2].distance = 1;
    claims[3].node_id = "d";
    claims[3].distance = 9;
    std::uint64_t cmp = 0;
    const auto top = select_top_t(claims, 3, &cmp);
    ASSERT_EQ(top.size(), 3u);
    EXPECT_EQ(top[0].node_id, "c");
    EXPECT_EQ(top[1].node_id, "a");
    EXPECT_EQ(top[2].node_id, "b");
    EXPECT_GT(cmp, 0u);
    EXPECT_EQ(select_top_t(claims, 10).size(), 4u);
}

TEST(SelectTopT, MatchesFullSortProperty) {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<RingPriority> claims(1 + rng.below(30));
        for (std::size_t i = 0; i < claims.size(); ++i) {
            claims[i].node_id = "n" + std::to_string(i);
            claims[i].distance = rng.below(8);  // many ties
        }
        const std::size_t t = 1 + rng.below(claims.size());
        auto sorted = claims;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return higher_priority(a, b); });
        sorted.resize(t);
        EXPECT_EQ(select_top_t(claims, t), sorted);
    }
}

TEST(AssignDataSource, UsesWinningPosition) {
    RingPriority rp;
    rp.winning_position = 10;
    EXPECT_EQ(assign_data_source(rp, 4), 2u);
    EXPECT_THROW(assign_data_source(rp, 0), ContractViolation);
}

// Equal reputations: top-1 frequencies should be uniform over nodes.
TEST(SelectionStatistics, EqualReputationIsUniform) {
    const unsigned n = 20;
    std::vector<Bytes> sks;
    for (unsigned i = 0; i < n; ++i) sks.push_back(vrf_setup(1000 + i).secret_key);
    std::vector<double> wins(n, 0.0);
    const int events = 10000;
    for (int e = 0; e < events; ++e) {
        const EventAnchor a = compute_anchor(ByteWriter{}.raw("u").u64(e).bytes(), to_bytes("b"));
        std::vector<RingPriority> claims;
        for (unsigned i = 0; i < n; ++i) claims.push_back(compute_ring_priority(node_name(i, n), sks[i], a, 1.0));
        const auto top = select_top_t(claims, 1);
        wins[std::stoul(top[0].node_id.substr(1))] += 1;
    }
    EXPECT_GE(oracle::chi_square_p(wins, static_cast<double>(events) / n), 1e-3);
}

TEST(SelectionStatistics, WeightOracleSanity) {
    // One position each: every node is equally likely.
    EXPECT_NEAR(oracle::top_t_probability(1, 20, 5), 5.0 / 20.0, 1e-9);
    EXPECT_NEAR(oracle::predicted_weight_ratio(1, 20, 5), 1.0, 1e-9);
    // Top-1 with m positions vs n-1 single-position rivals: m / (m + n - 1).
    EXPECT_NEAR(oracle::top_t_probability(3, 10, 1), 3.0 / 12.0, 1e-9);
}

TEST(Anchor, DistinctBeaconsGiveDistinctAnchors) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t b = 0; b < 20000; ++b) seen.insert(compute_anchor(to_bytes("q1"), ByteWriter{}.u64(b).bytes()).anchor);
    EXPECT_EQ(seen.size(), 20000u);
    const EventAnchor a = compute_anchor(to_bytes("q1"), to_bytes("b1"));
    EXPECT_EQ(a.anchor, hash_to_ring(ByteWriter{}.raw("q1").raw("b1").bytes()));
}

TEST(RingPriority, HandEvaluatedDistances) {
    EXPECT_EQ(clockwise_distance(100, 90), std::numeric_limits<std::uint64_t>::max() - 9);
    EXPECT_EQ(clockwise_distance(100, 110), 10u);
    RingPriority rp;
    rp.distance = std::min(clockwise_distance(100, 90), clockwise_distance(100, 110));
    EXPECT_DOUBLE_EQ(rp.priority(), 0.1);
    rp.distance = 0;
    EXPECT_DOUBLE_EQ(rp.priority(), 1.0);
}

// Scaling reputations without changing any ceiling leaves selection unchanged.
TEST(SelectTopT, InvariantUnderCeilingPreservingScale) {
    std::vector<Bytes> sks;
    std::vector<double> reps;
    for (std::uint64_t i = 0; i < 30; ++i) {
        sks.push_back(vrf_setup(50 + i).secret_key);
        reps.push_back(1.0 + static_cast<double>(i % 5) + 0.4);
    }
    for (int e = 0; e < 200; ++e) {
        const EventAnchor a = compute_anchor(ByteWriter{}.raw("inv").u64(e).bytes(), to_bytes("b"));
        std::vector<RingPriority> x, y;
        for (std::size_t i = 0; i < sks.size(); ++i) {
            x.push_back(compute_ring_priority(node_name(static_cast<std::uint32_t>(i), 30), sks[i], a, reps[i]));
            y.push_back(compute_ring_priority(node_name(static_cast<std::uint32_t>(i), 30), sks[i], a, reps[i] * 1.1));
        }
        ASSERT_EQ(select_top_t(x, 10), select_top_t(y, 10));
    }
}

TEST(AssignDataSource, ModulusCases) {
    RingPriority rp;
    rp.winning_position = 17;
    EXPECT_EQ(assign_data_source(rp, 5), 2u);
    EXPECT_EQ(assign_data_source(rp, 1), 0u);
}

TEST(AssignDataSource, FourSourcesShareEvenly) {
    const Bytes sk = vrf_setup(3).secret_key;
    std::vector<int> hits(4, 0);
    for (int e = 0; e < 10000; ++e) {
        const EventAnchor a = compute_anchor(ByteWriter{}.raw("src").u64(e).bytes(), to_bytes("b"));
        ++hits[assign_data_source(compute_ring_priority("n", sk, a, 2.0), 4)];
    }
    for (int h : hits) EXPECT_NEAR(h / 10000.0, 0.25, 0.02);
}

// Distances are not predictable from the public anchor.
TEST(SelectionStatistics, AnchorDoesNotPredictDistance) {
    const Bytes sk = vrf_setup(44).secret_key;
    std::vector<double> xs, ys;
    for (int e = 0; e < 10000; ++e) {
        const EventAnchor a = compute_anchor(ByteWriter{}.raw("c").u64(e).bytes(), to_bytes("b"));
        xs.push_back(static_cast<double>(a.anchor));
        ys.push_back(static_cast<double>(compute_ring_priority("n", sk, a, 1.0).distance));
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    // |r| < 4/sqrt(n) for independent samples, overwhelmingly.
    EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.04);
}

}  // namespace

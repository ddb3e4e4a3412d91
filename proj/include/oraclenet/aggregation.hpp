// Off-chain aggregation over a temporary, priority-gated consensus network.
//
// Responders join the network as their envelopes arrive. The network holds at
// most t members; when full, a joiner with higher priority than the lowest
// member evicts it. Two leader-proposal rounds follow: round 1 fixes the set
// of revealed results, round 2 fixes the filtered set and the aggregate.
// Consensus is crash-fault only: a round commits when the leader plus a
// majority of the membership acknowledges.

#pragma once

#include "oraclenet/filtering.hpp"
#include "oraclenet/selection.hpp"

#include <map>
#include <set>
#include <variant>

namespace oraclenet {

enum class NetworkRound { Forming, Round1, Round2, Submitted };

struct NetworkMember {
    NodeId node_id;
    std::uint64_t distance = 0;

    bool operator==(const NetworkMember&) const = default;
};

struct TempNetwork {
    Bytes event_id;
    std::size_t capacity = 0;
    std::vector<NetworkMember> members;  // highest priority first
    NodeId leader;
    NetworkRound round = NetworkRound::Forming;

    bool full() const { return members.size() >= capacity; }

    bool contains(const NodeId& id) const {
        return std::any_of(members.begin(), members.end(), [&](const NetworkMember& m) { return m.node_id == id; });
    }

    std::uint64_t min_priority_distance() const { return members.empty() ? 0 : members.back().distance; }
};

struct Created {
    bool operator==(const Created&) const = default;
};
struct Joined {
    bool operator==(const Joined&) const = default;
};
struct Evicted {
    NodeId victim;
    bool operator==(const Evicted&) const = default;
};
struct Rejected {
    bool operator==(const Rejected&) const = default;
};
struct AlreadyMember {
    bool operator==(const AlreadyMember&) const = default;
};
using JoinOutcome = std::variant<Created, Joined, Evicted, Rejected, AlreadyMember>;

struct JoinResult {
    TempNetwork network;
    JoinOutcome outcome;
};

namespace detail {

inline bool member_order(const NetworkMember& a, const NetworkMember& b) {
    return higher_priority(a.distance, a.node_id, b.distance, b.node_id);
}

inline void insert_member(TempNetwork& net, NetworkMember m) {
    net.members.insert(std::upper_bound(net.members.begin(), net.members.end(), m, member_order), std::move(m));
}

}  // namespace detail

inline JoinResult join_network(std::optional<TempNetwork> net, const Bytes& event_id, std::size_t capacity,
                               const NodeId& node_id, std::uint64_t distance) {
    if (!net) {
        if (capacity == 0) throw ContractViolation("join_network: capacity must be >= 1");
        TempNetwork fresh;
        fresh.event_id = event_id;
        fresh.capacity = capacity;
        fresh.members.push_back(NetworkMember{node_id, distance});
        fresh.leader = node_id;
        return JoinResult{std::move(fresh), Created{}};
    }
    if (net->event_id != event_id) throw ContractViolation("join_network: event mismatch");
    if (net->contains(node_id)) return JoinResult{std::move(*net), AlreadyMember{}};

    NetworkMember joiner{node_id, distance};
    if (!net->full()) {
        detail::insert_member(*net, std::move(joiner));
        return JoinResult{std::move(*net), Joined{}};
    }
    if (!detail::member_order(joiner, net->members.back())) return JoinResult{std::move(*net), Rejected{}};

    NodeId victim = net->members.back().node_id;
    net->members.pop_back();
    detail::insert_member(*net, std::move(joiner));
    if (net->leader == victim) net->leader = net->members.front().node_id;
    return JoinResult{std::move(*net), Evicted{std::move(victim)}};
}

// ---------------------------------------------------------------------------
// Outliers and aggregation strategies

struct OutlierRule {
    double eps_rel = 1e-6;
    double eps_abs = 1e-9;
    double k_mad = 3.0;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw ContractViolation("median of empty set");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw ContractViolation("mean of empty set");
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

inline double population_variance(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size());
}

/// i is an outlier iff |v[i] - median| > max(eps_rel*|median| + eps_abs, k_mad * MAD).
inline std::vector<std::size_t> detect_outliers(std::span<const double> values, const OutlierRule& rule = {}) {
    if (values.empty()) throw ContractViolation("detect_outliers: empty input");
    const double med = median_of(std::vector<double>(values.begin(), values.end()));
    std::vector<double> dev(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dev[i] = std::abs(values[i] - med);
    const double mad = median_of(dev);
    const double bound = std::max(rule.eps_rel * std::abs(med) + rule.eps_abs, rule.k_mad * mad);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (dev[i] > bound) out.push_back(i);
    }
    return out;
}

enum class AggregationStrategy { Median, Mean };

inline std::string_view to_string(AggregationStrategy s) {
    return s == AggregationStrategy::Median ? "median" : "mean";
}

inline double aggregate_values(std::span<const double> values, AggregationStrategy s) {
    return s == AggregationStrategy::Median ? median_of(std::vector<double>(values.begin(), values.end()))
                                            : mean_of(values);
}

struct AggregationResult {
    Bytes event_id;
    double value = 0.0;
    AggregationStrategy strategy = AggregationStrategy::Median;
    std::vector<NodeId> contributors;
    std::map<NodeId, bool> correct_flags;            // every top-t participant
    std::map<NodeId, double> node_response_times;    // seconds, same keys
    double response_time = 0.0;
    NodeId submitter;

    /// Contract record: event_id, value, strategy, contributors, flags.
    Bytes canonical() const {
        ByteWriter w;
        w.field(event_id).f64(value).field(to_string(strategy)).u64(contributors.size());
        for (const auto& c : contributors) w.field(c);
        w.u64(correct_flags.size());
        for (const auto& [node, ok] : correct_flags) w.field(node).u64(ok ? 1 : 0);
        return std::move(w).bytes();
    }
};

// ---------------------------------------------------------------------------
// Consensus rounds

struct RoundReport {
    bool committed = false;
    NodeId leader;
    std::size_t acks = 0;
    std::size_t quorum = 0;
    std::map<NodeId, Bytes> member_state;  // canonical state held by each surviving member
};

namespace detail {

inline std::size_t majority(std::size_t n) { return n / 2 + 1; }

inline Bytes serialize_results(std::span<const TimedResult> rs) {
    ByteWriter w;
    w.u64(rs.size());
    for (const auto& r : rs) w.field(r.node_id).f64(r.value).i64(r.timestamp).u64(r.priority_distance);
    return std::move(w).bytes();
}

// Re-elects when the current leader is down: highest-priority live member.
inline bool ensure_live_leader(TempNetwork& net, const std::set<NodeId>& crashed) {
    if (!crashed.count(net.leader) && net.contains(net.leader)) return true;
    for (const auto& m : net.members) {
        if (!crashed.count(m.node_id)) {
            net.leader = m.node_id;
            return true;
        }
    }
    return false;
}

inline RoundReport commit_round(TempNetwork& net, const std::set<NodeId>& crashed, const Bytes& state) {
    RoundReport rep;
    rep.quorum = majority(net.members.size());
    if (!ensure_live_leader(net, crashed)) return rep;
    rep.leader = net.leader;
    for (const auto& m : net.members) {
        if (!crashed.count(m.node_id)) ++rep.acks;
    }
    if (rep.acks < rep.quorum) return rep;
    rep.committed = true;
    for (const auto& m : net.members) {
        if (!crashed.count(m.node_id)) rep.member_state[m.node_id] = state;
    }
    return rep;
}

}  // namespace detail

struct Round1Result {
    RoundReport report;
    std::vector<TimedResult> consensus;  // deduped, priority order, at most capacity
};

/// Leader proposes its local view; every live member adopts it on commit.
inline Round1Result run_round1(TempNetwork& net, const std::map<NodeId, std::vector<TimedResult>>& local_views,
                               const std::set<NodeId>& crashed) {
    Round1Result out;
    if (!detail::ensure_live_leader(net, crashed)) return out;
    auto view = local_views.find(net.leader);
    std::vector<TimedResult> proposal;
    if (view != local_views.end()) {
        std::set<NodeId> seen;
        for (const auto& r : view->second) {
            if (seen.insert(r.node_id).second) proposal.push_back(r);
        }
    }
    std::sort(proposal.begin(), proposal.end(), [](const TimedResult& a, const TimedResult& b) {
        return higher_priority(a.priority_distance, a.node_id, b.priority_distance, b.node_id);
    });
    if (proposal.size() > net.capacity) proposal.resize(net.capacity);

    out.report = detail::commit_round(net, crashed, detail::serialize_results(proposal));
    if (out.report.committed) {
        net.round = NetworkRound::Round1;
        out.consensus = std::move(proposal);
    }
    return out;
}

struct Round2Result {
    RoundReport report;
    std::optional<AggregationResult> result;
};

/// Agree on the filtered set and aggregate it. `consensus` is the round-1
/// set (the top-t participants whose results were revealed).
inline Round2Result run_round2_and_aggregate(TempNetwork& net, std::span<const TimedResult> consensus,
                                             std::span<const TimedResult> filtered, AggregationStrategy strategy,
                                             const std::set<NodeId>& crashed, const OutlierRule& rule = {}) {
    Round2Result out;
    if (filtered.empty()) throw ContractViolation("run_round2_and_aggregate: empty filtered set");
    out.report = detail::commit_round(net, crashed, detail::serialize_results(filtered));
    if (!out.report.committed) return out;
    net.round = NetworkRound::Round2;

    AggregationResult res;
    res.event_id = net.event_id;
    res.strategy = strategy;
    std::vector<double> values;
    values.reserve(filtered.size());
    for (const auto& r : filtered) {
        values.push_back(r.value);
        res.contributors.push_back(r.node_id);
    }
    res.value = aggregate_values(values, strategy);
    std::set<NodeId> outliers;
    for (std::size_t i : detect_outliers(values, rule)) outliers.insert(filtered[i].node_id);
    std::set<NodeId> kept(res.contributors.begin(), res.contributors.end());
    for (const auto& r : consensus) res.correct_flags[r.node_id] = kept.count(r.node_id) && !outliers.count(r.node_id);
    for (const auto& r : filtered) res.correct_flags.try_emplace(r.node_id, !outliers.count(r.node_id));
    out.result = std::move(res);
    return out;
}

/// The member that submits: the leader, or the next live member by priority.
inline std::optional<NodeId> choose_submitter(TempNetwork& net, const std::set<NodeId>& crashed) {
    if (!detail::ensure_live_leader(net, crashed)) return std::nullopt;
    return net.leader;
}

}  // namespace oraclenet

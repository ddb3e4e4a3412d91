// Reputation-weighted node selection on the hash ring.
//
// An event is anchored at G_q = H(q || beacon). Each node signs (q || beacon)
// with its VRF key, expands the signature into ceil(R) ring positions, and
// takes the smallest clockwise distance from the anchor as its priority key.
// Smaller distance means higher priority.

#pragma once

#include "oraclenet/crypto_vrf.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>

namespace oraclenet {

struct EventAnchor {
    Bytes event_id;
    Bytes beacon;
    std::uint64_t anchor = 0;

    bool operator==(const EventAnchor&) const = default;

    /// The message every node signs for this event.
    Bytes signing_input() const { return ByteWriter{}.field(event_id).field(beacon).bytes(); }
};

struct RingPriority {
    NodeId node_id;
    std::vector<std::uint64_t> positions;
    std::uint64_t winning_position = 0;
    std::uint64_t distance = 0;
    VrfOutput proof;

    bool operator==(const RingPriority&) const = default;

    /// L = 1 / max(distance, 1). Display only; ordering uses `distance`.
    double priority() const { return 1.0 / static_cast<double>(std::max<std::uint64_t>(distance, 1)); }

    /// Canonical audit record: node_id, winning_position, distance, proof hex.
    std::string audit_record() const {
        return node_id + "," + std::to_string(winning_position) + "," + std::to_string(distance) + "," +
               to_hex(proof.to_bytes());
    }
};

/// Clockwise distance from `from` to `to` on the 2^64 ring.
inline constexpr std::uint64_t clockwise_distance(std::uint64_t from, std::uint64_t to) noexcept {
    return to - from;  // unsigned wrap-around is the ring arithmetic
}

/// Strict priority order: smaller distance first, then ascending node id.
inline bool higher_priority(std::uint64_t da, const NodeId& a, std::uint64_t db, const NodeId& b) {
    if (da != db) return da < db;
    return a < b;
}

inline bool higher_priority(const RingPriority& a, const RingPriority& b) {
    return higher_priority(a.distance, a.node_id, b.distance, b.node_id);
}

inline EventAnchor compute_anchor(std::span<const std::uint8_t> event_id, std::span<const std::uint8_t> beacon) {
    if (event_id.empty()) throw ContractViolation("compute_anchor: empty event id");
    EventAnchor a;
    a.event_id.assign(event_id.begin(), event_id.end());
    a.beacon.assign(beacon.begin(), beacon.end());
    a.anchor = hash_to_ring(concat(event_id, beacon));
    return a;
}

/// Number of ring positions a reputation buys: ceil(R).
inline std::size_t position_count(double reputation) {
    if (!(reputation >= 1.0)) throw ContractViolation("reputation must be >= 1");
    return static_cast<std::size_t>(std::ceil(reputation));
}

/// k-th ring position derived from the event signature g (k starts at 1).
inline std::uint64_t ring_position(std::span<const std::uint8_t> g, std::uint64_t k) {
    return hash_to_ring(ByteWriter{}.raw(g).u64(k).bytes());
}

namespace detail {

inline void fill_positions(RingPriority& rp, std::uint64_t anchor, std::size_t count) {
    const Bytes g = rp.proof.to_bytes();
    rp.positions.resize(count);
    bool first = true;
    for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t pos = ring_position(g, k + 1);
        rp.positions[k] = pos;
        const std::uint64_t d = clockwise_distance(anchor, pos);
        if (first || d < rp.distance) {
            rp.distance = d;
            rp.winning_position = pos;
            first = false;
        }
    }
}

}  // namespace detail

inline RingPriority compute_ring_priority(const NodeId& node_id, std::span<const std::uint8_t> secret_key,
                                          const EventAnchor& anchor, double reputation) {
    const std::size_t count = position_count(reputation);
    RingPriority rp;
    rp.node_id = node_id;
    rp.proof = vrf_generate(secret_key, anchor.signing_input());
    detail::fill_positions(rp, anchor.anchor, count);
    return rp;
}

/// Accepts iff the proof verifies under `public_key`, every position
/// regenerates from the proof, and winning_position / distance are the true
/// minimum. When `expected_positions` is given (the count implied by the
/// node's on-chain reputation) the claim must carry exactly that many.
inline bool verify_ring_priority(const KeyEscrow& escrow, const Bytes& public_key, const EventAnchor& anchor,
                                 const RingPriority& claim,
                                 std::optional<std::size_t> expected_positions = std::nullopt) {
    if (claim.positions.empty()) return false;
    if (expected_positions && claim.positions.size() != *expected_positions) return false;
    if (hash_to_ring(concat(anchor.event_id, anchor.beacon)) != anchor.anchor) return false;
    if (!vrf_verify(escrow, public_key, anchor.signing_input(), claim.proof)) return false;

    RingPriority recomputed;
    recomputed.node_id = claim.node_id;
    recomputed.proof = claim.proof;
    detail::fill_positions(recomputed, anchor.anchor, claim.positions.size());
    return recomputed.positions == claim.positions && recomputed.distance == claim.distance &&
           recomputed.winning_position == claim.winning_position;
}

/// Top-t claims by priority. `comparisons`, when non-null, accumulates the
/// number of comparator calls (the selection cost counter).
inline std::vector<RingPriority> select_top_t(std::vector<RingPriority> claims, std::size_t t,
                                              std::uint64_t* comparisons = nullptr) {
    auto cmp = [comparisons](const RingPriority& a, const RingPriority& b) {
        if (comparisons) ++*comparisons;
        return higher_priority(a, b);
    };
    const std::size_t k = std::min(t, claims.size());
    std::partial_sort(claims.begin(), claims.begin() + static_cast<std::ptrdiff_t>(k), claims.end(), cmp);
    claims.resize(k);
    return claims;
}

inline std::size_t assign_data_source(const RingPriority& claim, std::size_t source_count) {
    if (source_count == 0) throw ContractViolation("assign_data_source: source_count must be >= 1");
    return static_cast<std::size_t>(claim.winning_position % source_count);
}

}  // namespace oraclenet

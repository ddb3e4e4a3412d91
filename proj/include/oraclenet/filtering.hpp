// Sliding-window timestamp filter and the minimum-count retry policy.
//
// Among the results, pick the contiguous run (in timestamp order) whose
// timestamp range is at most w, preferring (1) more results, (2) smaller
// population variance of timestamps, (3) the earliest start. Timestamps are
// integer ticks so every comparison is exact.

#pragma once

#include "oraclenet/common.hpp"

#include <algorithm>
#include <optional>
#include <variant>

namespace oraclenet {

struct TimedResult {
    NodeId node_id;
    double value = 0.0;
    Ticks timestamp = 0;
    std::uint64_t priority_distance = 0;  // the submitter's ring distance for this event

    bool operator==(const TimedResult&) const = default;
};

struct FilterPolicy {
    double window_width = 1.0;
    std::uint32_t min_count = 1;
    double growth_factor = 1.5;

    void validate() const {
        if (!(window_width > 0.0)) throw ContractViolation("window_width must be > 0");
        if (min_count < 1) throw ContractViolation("min_count must be >= 1");
    }
};

struct FilterOutcome {
    std::vector<TimedResult> kept;     // timestamp order
    std::vector<TimedResult> dropped;  // timestamp order
    Ticks window_start = 0;
    Ticks window_end = 0;
    std::uint64_t comparisons = 0;
};

namespace detail {

using Wide = __int128;

inline bool timestamp_order(const TimedResult& a, const TimedResult& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.node_id < b.node_id;
}

struct WindowScore {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    Wide spread = 0;      // count^2 * population variance

    std::size_t count() const { return end - begin; }
};

// Two-pointer sweep over sorted ticks. Only windows [leftmost(r), r] can
// attain the maximum count, so one pass visits every candidate.
inline WindowScore best_window(std::span<const Ticks> ts, Ticks width, std::uint64_t* comparisons = nullptr) {
    WindowScore best;
    if (ts.empty()) return best;
    const Ticks origin = ts.front();
    Wide sum = 0;
    Wide sum_sq = 0;
    std::size_t l = 0;
    bool have = false;
    for (std::size_t r = 0; r < ts.size(); ++r) {
        const Wide x = ts[r] - origin;
        sum += x;
        sum_sq += x * x;
        while (ts[r] - ts[l] > width) {
            const Wide y = ts[l] - origin;
            sum -= y;
            sum_sq -= y * y;
            ++l;
        }
        const std::size_t n = r - l + 1;
        const Wide spread = static_cast<Wide>(n) * sum_sq - sum * sum;
        if (comparisons) ++*comparisons;
        if (!have || n > best.count() || (n == best.count() && spread < best.spread)) {
            best = WindowScore{l, r + 1, spread};
            have = true;
        }
    }
    return best;
}

}  // namespace detail

inline FilterOutcome filter_window_ticks(std::vector<TimedResult> results, Ticks width) {
    if (results.empty()) throw ContractViolation("filter_window: empty input");
    if (width <= 0) throw ContractViolation("filter_window: width must be > 0");
    std::sort(results.begin(), results.end(), detail::timestamp_order);
    std::vector<Ticks> ts(results.size());
    std::transform(results.begin(), results.end(), ts.begin(), [](const TimedResult& r) { return r.timestamp; });

    FilterOutcome out;
    const detail::WindowScore w = detail::best_window(ts, width, &out.comparisons);
    out.window_start = ts[w.begin];
    out.window_end = ts[w.end - 1];
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto& dest = (i >= w.begin && i < w.end) ? out.kept : out.dropped;
        dest.push_back(std::move(results[i]));
    }
    return out;
}

inline std::vector<TimedResult> filter_window(std::vector<TimedResult> results, double window_seconds) {
    return filter_window_ticks(std::move(results), to_ticks(window_seconds)).kept;
}

/// True when results still outstanding cannot change the filter outcome.
/// Outstanding results carry timestamps >= `earliest_future`.
inline bool filter_outcome_settled(std::vector<Ticks> arrived, std::size_t outstanding, Ticks earliest_future,
                                   Ticks width) {
    if (outstanding == 0) return !arrived.empty();
    if (arrived.empty()) return false;
    std::sort(arrived.begin(), arrived.end());
    const std::size_t best = detail::best_window(arrived, width).count();
    // Largest count any window still reachable by a future timestamp can hold.
    std::size_t reachable = 0;
    for (std::size_t l = 0; l < arrived.size(); ++l) {
        if (arrived[l] < earliest_future - width) continue;
        const auto hi = std::upper_bound(arrived.begin(), arrived.end(), arrived[l] + width);
        reachable = std::max(reachable, static_cast<std::size_t>(hi - (arrived.begin() + static_cast<std::ptrdiff_t>(l))));
    }
    return outstanding + reachable < best;
}

/// Earliest time >= now at which filter_outcome_settled holds, assuming no
/// further arrivals; nullopt if it never will.
inline std::optional<Ticks> next_settle_time(const std::vector<Ticks>& arrived, std::size_t outstanding, Ticks now,
                                             Ticks width) {
    if (arrived.empty()) return std::nullopt;
    std::vector<Ticks> candidates{now};
    for (Ticks t : arrived) {
        if (t + width + 1 > now) candidates.push_back(t + width + 1);
    }
    std::sort(candidates.begin(), candidates.end());
    for (Ticks c : candidates) {
        if (filter_outcome_settled(arrived, outstanding, c, width)) return c;
    }
    return std::nullopt;
}

struct Accept {
    bool operator==(const Accept&) const = default;
};
struct Retry {
    double new_width = 0.0;
    bool operator==(const Retry&) const = default;
};
using RetryDecision = std::variant<Accept, Retry>;

inline RetryDecision apply_retry_policy(std::size_t filtered_count, const FilterPolicy& policy) {
    if (filtered_count >= policy.min_count) return Accept{};
    return Retry{policy.window_width * policy.growth_factor};
}

}  // namespace oraclenet

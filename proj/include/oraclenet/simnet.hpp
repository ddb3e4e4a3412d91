// Deterministic discrete-event machinery: virtual clock and event queue,
// latency model, the simulated data-source signal, node behaviours and the
// scenario configuration.

#pragma once

#include "oraclenet/aggregation.hpp"
#include "oraclenet/crypto_vrf.hpp"

#include <functional>
#include <map>
#include <optional>
#include <queue>

namespace oraclenet {

// ---------------------------------------------------------------------------
// Node behaviours

enum class BehaviorKind { Honest, FalseData, Lazy, TargetedOffline, Freeloader, SybilMember };

inline std::string_view to_string(BehaviorKind k) {
    switch (k) {
        case BehaviorKind::Honest: return "honest";
        case BehaviorKind::FalseData: return "false_data";
        case BehaviorKind::Lazy: return "lazy";
        case BehaviorKind::TargetedOffline: return "targeted_offline";
        case BehaviorKind::Freeloader: return "freeloader";
        case BehaviorKind::SybilMember: return "sybil";
    }
    return "?";
}

inline std::optional<BehaviorKind> behavior_from_string(std::string_view s) {
    for (auto k : {BehaviorKind::Honest, BehaviorKind::FalseData, BehaviorKind::Lazy, BehaviorKind::TargetedOffline,
                   BehaviorKind::Freeloader, BehaviorKind::SybilMember}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

struct NodeBehavior {
    BehaviorKind kind = BehaviorKind::Honest;
    double offset_std = 0.0;       // FalseData
    double extra_delay = 0.0;      // Lazy, seconds
    std::uint32_t trigger = 1;     // TargetedOffline: observed broadcasts before the attack lands
    std::uint32_t cluster_id = 0;  // SybilMember

    bool malicious() const { return kind != BehaviorKind::Honest; }
};

// ---------------------------------------------------------------------------
// Scenario configuration

struct SimConfig {
    // Experiment parameters
    std::uint32_t node_count = 100;
    double malicious_fraction = 0.1;
    std::uint32_t committee_size = 10;
    double window_width = 1.0;
    double alpha = 0.5;
    std::uint32_t min_count = 1;
    double latency_mean = 1.0;
    double latency_std = 0.3;
    double latency_jitter_std = -1.0;  // < 0: latency_std / 4
    std::uint32_t task_count = 1000;
    std::uint64_t seed = 1;
    // Share of the malicious nodes given each behaviour. Remainder is honest.
    std::map<BehaviorKind, double> adversary_mix{{BehaviorKind::FalseData, 0.5}, {BehaviorKind::Lazy, 0.5}};

    // Adversary parameters
    double false_offset_std = 5.0;
    double lazy_extra_delay = 2.0;
    std::uint32_t targeted_trigger = 1;
    std::uint32_t sybil_clusters = 1;

    // Data sources
    std::uint32_t source_count = 4;
    double source_base = 100.0;
    double source_drift = 0.0;
    double source_noise = 0.5;  // random-walk intensity per sqrt(second)

    // Protocol timing, seconds
    double collection_timeout = 5.0;
    double reveal_delay = 0.05;
    double round_delay = 0.05;
    double task_gap = 1.0;
    std::uint32_t max_retries = 5;
    std::uint32_t standby = 0;  // responders beyond t

    // Economics
    std::int64_t min_deposit = 100;
    std::int64_t node_funds = 1000;
    std::int64_t reward = 100;
    std::int64_t fee = 110;
    double slash_threshold = 0.0;

    // Aggregation and scoring
    AggregationStrategy strategy = AggregationStrategy::Median;
    double outlier_k_mad = 3.0;
    double eps_rel = 1e-2;
    double eps_abs = 1e-6;

    // Fault injection: committee members crashed per task at random phases
    std::uint32_t crashes_per_task = 0;

    double jitter_std() const { return latency_jitter_std < 0.0 ? latency_std / 4.0 : latency_jitter_std; }

    /// Field-level diagnostics; empty when valid.
    std::vector<std::string> validate() const {
        std::vector<std::string> errs;
        auto need = [&](bool ok, const char* msg) {
            if (!ok) errs.emplace_back(msg);
        };
        need(node_count >= 1, "nodes: must be >= 1");
        need(malicious_fraction >= 0.0 && malicious_fraction < 1.0, "malicious: must lie in [0, 1)");
        need(committee_size >= 1, "committee: must be >= 1");
        need(committee_size <= node_count, "committee: must not exceed nodes");
        need(window_width > 0.0, "window: must be > 0");
        need(alpha > 0.0 && alpha < 1.0, "alpha: must lie in (0, 1)");
        need(min_count >= 1, "zeta: must be >= 1");
        need(latency_mean > 0.0, "latency_mean: must be > 0");
        need(latency_std >= 0.0, "latency_std: must be >= 0");
        need(task_count >= 1, "tasks: must be >= 1");
        double mix = 0.0;
        for (const auto& [k, f] : adversary_mix) {
            need(f >= 0.0, "adversary_mix: fractions must be >= 0");
            mix += f;
        }
        need(mix <= 1.0 + 1e-12, "adversary_mix: fractions must sum to <= 1");
        need(source_count >= 1, "source_count: must be >= 1");
        need(source_noise >= 0.0, "source_noise: must be >= 0");
        need(collection_timeout > 0.0, "collection_timeout: must be > 0");
        need(reveal_delay >= 0.0 && round_delay >= 0.0 && task_gap >= 0.0, "delays: must be >= 0");
        need(reward >= 0 && fee >= reward, "fee: must be >= reward >= 0");
        need(node_funds >= min_deposit, "node_funds: must cover min_deposit");
        need(crashes_per_task <= committee_size, "crashes_per_task: must not exceed committee");
        need(eps_rel >= 0.0 && eps_abs >= 0.0, "eps: must be >= 0");
        return errs;
    }
};

// ---------------------------------------------------------------------------
// Latency

inline constexpr double kLatencyFloor = 0.001;

/// Normal draw N(mean, stddev^2) clamped below at 1 ms.
inline double sample_latency(double mean, double stddev, Rng& rng) {
    if (!(mean > 0.0)) throw ContractViolation("sample_latency: mean must be > 0");
    return std::max(kLatencyFloor, rng.normal(mean, stddev));
}

// ---------------------------------------------------------------------------
// Ground-truth signal: base + drift * t + noise * W(t), with W a standard
// Brownian path sampled on a 10 ms grid and linearly interpolated. The path
// depends only on the seed.

class DataSourceProcess {
public:
    static constexpr double kGridStep = 0.01;

    DataSourceProcess(double base_value, double drift_rate, double noise_std, std::uint64_t seed)
        : base_(base_value), drift_(drift_rate), noise_(noise_std), rng_(seed), path_{0.0} {}

    double base_value() const { return base_; }
    double drift_rate() const { return drift_; }
    double noise_std() const { return noise_; }

    double ground_truth(double time) const {
        if (!(time >= 0.0)) throw ContractViolation("ground_truth: time must be >= 0");
        double walk = 0.0;
        if (noise_ > 0.0) {
            const double pos = time / kGridStep;
            const auto i = static_cast<std::size_t>(pos);
            extend(i + 1);
            const double frac = pos - static_cast<double>(i);
            walk = path_[i] + (path_[i + 1] - path_[i]) * frac;
        }
        return base_ + drift_ * time + noise_ * walk;
    }

private:
    void extend(std::size_t index) const {
        const double step_sd = std::sqrt(kGridStep);
        while (path_.size() <= index) path_.push_back(path_.back() + rng_.normal(0.0, step_sd));
    }

    double base_;
    double drift_;
    double noise_;
    mutable Rng rng_;
    mutable std::vector<double> path_;
};

// ---------------------------------------------------------------------------
// Event loop

struct TraceRecord {
    Ticks time = 0;
    std::uint64_t seq = 0;
    std::string kind;
    std::string detail;

    std::string line() const {
        return std::to_string(time) + " " + std::to_string(seq) + " " + kind + (detail.empty() ? "" : " " + detail);
    }
};

enum class LoopStatus { Completed, HorizonExceeded, EventBudgetExceeded };

/// Single logical thread of simulated time. Events run in (time, sequence)
/// order; scheduling into the past is a caller bug.
class EventLoop {
public:
    using Handler = std::function<void()>;

    std::uint64_t schedule(Ticks at, std::string kind, std::string detail = {}, Handler handler = {}) {
        if (at < now_) throw ContractViolation("EventLoop: cannot schedule before the current time");
        const std::uint64_t seq = next_seq_++;
        queue_.push(Pending{at, seq, std::move(kind), std::move(detail), std::move(handler)});
        return seq;
    }

    std::uint64_t schedule_after(double seconds, std::string kind, std::string detail = {}, Handler handler = {}) {
        return schedule(now_ + to_ticks(seconds), std::move(kind), std::move(detail), std::move(handler));
    }

    LoopStatus run(Ticks horizon = std::numeric_limits<Ticks>::max(),
                   std::uint64_t max_events = std::numeric_limits<std::uint64_t>::max()) {
        std::uint64_t processed = 0;
        while (!queue_.empty()) {
            if (queue_.top().time > horizon) return LoopStatus::HorizonExceeded;
            if (processed == max_events) return LoopStatus::EventBudgetExceeded;
            Pending ev = queue_.top();
            queue_.pop();
            now_ = ev.time;
            TraceRecord rec{ev.time, ev.seq, std::move(ev.kind), std::move(ev.detail)};
            if (keep_trace_) trace_.push_back(rec);
            digest_.raw(rec.line()).raw("\n");
            if (ev.handler) ev.handler();
            ++processed;
        }
        return LoopStatus::Completed;
    }

    Ticks now() const { return now_; }
    double now_seconds() const { return to_seconds(now_); }
    bool idle() const { return queue_.empty(); }

    void keep_trace(bool keep) { keep_trace_ = keep; }
    const std::vector<TraceRecord>& trace() const { return trace_; }

    /// SHA-256 over every executed record, in execution order.
    std::string trace_digest() const { return to_hex(sha256(digest_.bytes())); }

private:
    struct Pending {
        Ticks time;
        std::uint64_t seq;
        std::string kind;
        std::string detail;
        Handler handler;
    };
    struct Later {
        bool operator()(const Pending& a, const Pending& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    std::priority_queue<Pending, std::vector<Pending>, Later> queue_;
    Ticks now_ = 0;
    std::uint64_t next_seq_ = 0;
    bool keep_trace_ = true;
    std::vector<TraceRecord> trace_;
    ByteWriter digest_;
};

struct ScheduledEvent {
    double time = 0.0;  // seconds
    std::string kind;
    std::string detail;
};

/// Runs a fixed event schedule and returns the executed trace.
inline std::vector<TraceRecord> run_event_loop(std::span<const ScheduledEvent> scenario,
                                               double horizon_seconds = std::numeric_limits<double>::infinity(),
                                               LoopStatus* status = nullptr) {
    EventLoop loop;
    for (const auto& e : scenario) loop.schedule(to_ticks(e.time), e.kind, e.detail);
    const Ticks horizon = std::isfinite(horizon_seconds) ? to_ticks(horizon_seconds) : std::numeric_limits<Ticks>::max();
    const LoopStatus s = loop.run(horizon);
    if (status) *status = s;
    return loop.trace();
}

}  // namespace oraclenet

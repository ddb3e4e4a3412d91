// Node reputation from service history:
//   R = max(floor, log10(S) * (alpha / T + (1 - alpha) * A))
// with S total services, T mean response time in seconds, A accuracy.

#pragma once

#include "oraclenet/common.hpp"

#include <algorithm>

#include <map>

namespace oraclenet {

inline constexpr double kReputationLogBase = 10.0;

struct ReputationRecord {
    NodeId node_id;
    std::uint64_t total_services = 1;
    double mean_response_time = 1.0;
    double accuracy = 1.0;
    std::uint64_t correct_count = 1;

    bool operator==(const ReputationRecord&) const = default;

    /// A new registrant: one prior service at 1 s, counted correct.
    static ReputationRecord initial(NodeId id) {
        ReputationRecord r;
        r.node_id = std::move(id);
        return r;
    }
};

struct ReputationParams {
    double alpha = 0.5;
    double reputation_floor = 1.0;
    double slash_threshold = 0.0;  // 0 disables slashing

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ContractViolation("alpha must lie in (0, 1)");
        if (slash_threshold < 0.0) throw ContractViolation("slash_threshold must be >= 0");
    }
};

inline double reputation_log(double s) {
    if constexpr (kReputationLogBase == 10.0) {
        return std::log10(s);  // exact at powers of ten
    } else {
        return std::log(s) / std::log(kReputationLogBase);
    }
}

inline double raw_reputation(const ReputationRecord& r, const ReputationParams& p) {
    const double log_s = reputation_log(static_cast<double>(r.total_services));
    return log_s * (p.alpha / r.mean_response_time + (1.0 - p.alpha) * r.accuracy);
}

inline double compute_reputation(const ReputationRecord& r, const ReputationParams& p) {
    return std::max(p.reputation_floor, raw_reputation(r, p));
}

inline ReputationRecord record_service(ReputationRecord r, double response_time, bool correct) {
    if (!(response_time > 0.0)) throw ContractViolation("record_service: response_time must be > 0");
    const double n = static_cast<double>(r.total_services);
    r.mean_response_time = (r.mean_response_time * n + response_time) / (n + 1.0);
    r.total_services += 1;
    if (correct) r.correct_count += 1;
    r.accuracy = static_cast<double>(r.correct_count) / static_cast<double>(r.total_services);
    return r;
}

inline bool should_slash(const ReputationRecord& r, const ReputationParams& p) {
    return p.slash_threshold > 0.0 && raw_reputation(r, p) < p.slash_threshold;
}

/// The reputation contract's storage. Single writer; copy for snapshots.
class ReputationStore {
public:
    explicit ReputationStore(ReputationParams params = {}) : params_(params) { params_.validate(); }

    void add_node(const NodeId& id) { records_.try_emplace(id, ReputationRecord::initial(id)); }

    bool contains(const NodeId& id) const { return records_.count(id) != 0; }

    const ReputationRecord& record(const NodeId& id) const {
        auto it = records_.find(id);
        if (it == records_.end()) throw ContractViolation("unknown node: " + id);
        return it->second;
    }

    double reputation(const NodeId& id) const { return compute_reputation(record(id), params_); }

    const ReputationRecord& record_service(const NodeId& id, double response_time, bool correct) {
        auto it = records_.find(id);
        if (it == records_.end()) throw ContractViolation("unknown node: " + id);
        it->second = oraclenet::record_service(it->second, response_time, correct);
        return it->second;
    }

    bool should_slash(const NodeId& id) const { return oraclenet::should_slash(record(id), params_); }

    const ReputationParams& params() const { return params_; }
    const std::map<NodeId, ReputationRecord>& records() const { return records_; }

private:
    ReputationParams params_;
    std::map<NodeId, ReputationRecord> records_;
};

}  // namespace oraclenet

// Simulated on-chain layer: registration, message, payment and reputation
// contracts as one serialized ledger state machine.
//
// Tokens are exact integers. Everything minted at setup stays inside
// balances + deposits + escrow + reward pool forever after.

#pragma once

#include "oraclenet/aggregation.hpp"
#include "oraclenet/crypto_vrf.hpp"
#include "oraclenet/reputation.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <numeric>

namespace oraclenet {

using Tokens = std::int64_t;

struct RequestEvent {
    std::string q;
    std::vector<std::string> sources;  // d
    Tokens reward = 0;                 // f
    std::uint32_t t = 1;
    double w = 1.0;
    Bytes beacon;  // the beacon selectors use for this event, fixed at posting

    bool valid() const { return !q.empty() && !sources.empty() && t >= 1 && w > 0.0 && reward >= 0; }
};

enum class LedgerStatus {
    Ok,
    InsufficientDeposit,
    AlreadyRegistered,
    NotRegistered,
    InsufficientFunds,
    FeeBelowReward,
    DuplicateRequest,
    InvalidRequest,
    UnknownRequest,
    AlreadyFinalized,
    NothingToConfiscate,
};

inline std::string_view to_string(LedgerStatus s) {
    switch (s) {
        case LedgerStatus::Ok: return "ok";
        case LedgerStatus::InsufficientDeposit: return "insufficient deposit";
        case LedgerStatus::AlreadyRegistered: return "already registered";
        case LedgerStatus::NotRegistered: return "not registered";
        case LedgerStatus::InsufficientFunds: return "insufficient funds";
        case LedgerStatus::FeeBelowReward: return "fee below reward";
        case LedgerStatus::DuplicateRequest: return "duplicate request";
        case LedgerStatus::InvalidRequest: return "invalid request";
        case LedgerStatus::UnknownRequest: return "unknown request";
        case LedgerStatus::AlreadyFinalized: return "already finalized";
        case LedgerStatus::NothingToConfiscate: return "nothing to confiscate";
    }
    return "?";
}

struct LedgerConfig {
    Tokens min_deposit = 100;
    ReputationParams reputation;
};

struct RegistryEntry {
    Bytes public_key;
    bool active = true;  // false once slashed
};

/// What finalize_task did, for callers that keep metrics.
struct FinalizeReport {
    std::map<NodeId, Tokens> paid;
    std::vector<NodeId> slashed;
};

class Ledger {
public:
    using Callback = std::function<void(const std::string& q, double value)>;

    // Account that absorbs the part of a fee above the reward (transaction costs).
    static constexpr std::string_view kNetworkFeeAccount = "@network";

    explicit Ledger(LedgerConfig config = {}, Bytes genesis_beacon = to_bytes("oraclenet.genesis"))
        : config_(config), reputation_(config.reputation), beacon_(std::move(genesis_beacon)) {}

    /// Scenario setup only.
    void mint(const std::string& account, Tokens amount) {
        if (amount < 0) throw ContractViolation("mint: negative amount");
        balances_[account] += amount;
        minted_ += amount;
    }

    // -- registration contract ---------------------------------------------

    LedgerStatus register_node(const NodeId& node, const Bytes& public_key, Tokens deposit) {
        if (registry_.count(node)) return LedgerStatus::AlreadyRegistered;
        if (deposit < config_.min_deposit) return LedgerStatus::InsufficientDeposit;
        if (balance(node) < deposit) return LedgerStatus::InsufficientFunds;
        balances_[node] -= deposit;
        deposits_[node] = deposit;
        registry_[node] = RegistryEntry{public_key, true};
        reputation_.add_node(node);
        return LedgerStatus::Ok;
    }

    LedgerStatus confiscate_deposit(const NodeId& node) {
        auto it = registry_.find(node);
        if (it == registry_.end()) return LedgerStatus::NotRegistered;
        Tokens& dep = deposits_[node];
        if (dep == 0) return LedgerStatus::NothingToConfiscate;
        pool_ += dep;
        dep = 0;
        it->second.active = false;
        return LedgerStatus::Ok;
    }

    // -- message + payment contracts ---------------------------------------

    void set_callback(const std::string& requester, Callback cb) { callbacks_[requester] = std::move(cb); }

    LedgerStatus post_request(const std::string& requester, RequestEvent event, Tokens fee) {
        if (!event.valid()) return LedgerStatus::InvalidRequest;
        if (escrow_.count(event.q) || results_.count(event.q)) return LedgerStatus::DuplicateRequest;
        if (fee < event.reward) return LedgerStatus::FeeBelowReward;
        if (balance(requester) < fee) return LedgerStatus::InsufficientFunds;
        balances_[requester] -= fee;
        escrow_[event.q] = Escrow{requester, fee};
        requesters_[event.q] = requester;
        event.beacon = beacon_;
        beacon_ = digest_bytes(ByteWriter{}.raw("oraclenet.beacon.post").field(beacon_).field(event.q).bytes());
        event_index_[event.q] = event_log_.size();
        event_log_.push_back(std::move(event));
        return LedgerStatus::Ok;
    }

    LedgerStatus finalize_task(const std::string& q, const AggregationResult& result,
                               FinalizeReport* report = nullptr) {
        if (results_.count(q)) return LedgerStatus::AlreadyFinalized;
        auto esc = escrow_.find(q);
        if (esc == escrow_.end()) return LedgerStatus::UnknownRequest;
        const RequestEvent& ev = event_log_[event_index_.at(q)];

        FinalizeReport local;
        FinalizeReport& rep = report ? *report : local;

        std::vector<NodeId> correct;
        for (const auto& [node, ok] : result.correct_flags) {
            if (ok && registry_.count(node)) correct.push_back(node);
        }
        Tokens fee = esc->second.amount;
        const Tokens reward = std::min(ev.reward, fee);
        if (correct.empty()) {
            balances_[esc->second.requester] += reward;
        } else {
            const Tokens n = static_cast<Tokens>(correct.size());
            for (const auto& node : correct) credit(rep, node, reward / n);
            // Dust from an uneven split goes to the submitting leader if it was correct.
            const bool submitter_correct = std::find(correct.begin(), correct.end(), result.submitter) != correct.end();
            credit(rep, submitter_correct ? result.submitter : correct.front(), reward % n);
            const Tokens pool_share = pool_ / n;
            if (pool_share > 0) {
                for (const auto& node : correct) credit(rep, node, pool_share);
                pool_ -= pool_share * n;
            }
        }
        balances_[std::string(kNetworkFeeAccount)] += fee - reward;
        escrow_.erase(esc);

        for (const auto& [node, ok] : result.correct_flags) {
            if (!reputation_.contains(node)) continue;
            auto rt = result.node_response_times.find(node);
            const double seconds = rt != result.node_response_times.end() ? rt->second : result.response_time;
            reputation_.record_service(node, seconds, ok);
            if (reputation_.should_slash(node) && confiscate_deposit(node) == LedgerStatus::Ok) {
                rep.slashed.push_back(node);
            }
        }

        results_.emplace(q, result);
        beacon_ = digest_bytes(
            ByteWriter{}.raw("oraclenet.beacon.final").field(beacon_).field(q).field(result.canonical()).bytes());

        auto cb = callbacks_.find(requesters_.at(q));
        if (cb != callbacks_.end() && cb->second) cb->second(q, result.value);
        ++callbacks_delivered_;
        return LedgerStatus::Ok;
    }

    /// A task that could not produce a result: the escrowed fee goes back.
    LedgerStatus cancel_task(const std::string& q) {
        if (results_.count(q)) return LedgerStatus::AlreadyFinalized;
        auto esc = escrow_.find(q);
        if (esc == escrow_.end()) return LedgerStatus::UnknownRequest;
        balances_[esc->second.requester] += esc->second.amount;
        escrow_.erase(esc);
        return LedgerStatus::Ok;
    }

    // -- queries ------------------------------------------------------------

    Tokens balance(const std::string& account) const {
        auto it = balances_.find(account);
        return it == balances_.end() ? 0 : it->second;
    }
    Tokens deposit(const NodeId& node) const {
        auto it = deposits_.find(node);
        return it == deposits_.end() ? 0 : it->second;
    }
    Tokens reward_pool() const { return pool_; }
    Tokens escrowed() const {
        return std::accumulate(escrow_.begin(), escrow_.end(), Tokens{0},
                               [](Tokens acc, const auto& kv) { return acc + kv.second.amount; });
    }
    Tokens total_supply() const {
        Tokens sum = pool_ + escrowed();
        for (const auto& [_, v] : balances_) sum += v;
        for (const auto& [_, v] : deposits_) sum += v;
        return sum;
    }
    Tokens minted() const { return minted_; }
    bool conserved() const { return total_supply() == minted_; }

    bool is_registered(const NodeId& node) const { return registry_.count(node) != 0; }
    bool is_active(const NodeId& node) const {
        auto it = registry_.find(node);
        return it != registry_.end() && it->second.active;
    }
    const Bytes* public_key(const NodeId& node) const {
        auto it = registry_.find(node);
        return it == registry_.end() ? nullptr : &it->second.public_key;
    }
    const std::map<NodeId, RegistryEntry>& registry() const { return registry_; }

    const Bytes& beacon() const { return beacon_; }
    const std::vector<RequestEvent>& event_log() const { return event_log_; }
    const RequestEvent* event(const std::string& q) const {
        auto it = event_index_.find(q);
        return it == event_index_.end() ? nullptr : &event_log_[it->second];
    }
    const std::map<std::string, AggregationResult>& results() const { return results_; }
    std::uint64_t callbacks_delivered() const { return callbacks_delivered_; }

    const ReputationStore& reputation() const { return reputation_; }
    double reputation_of(const NodeId& node) const { return reputation_.reputation(node); }

    /// Canonical text snapshot. One record per line, sorted by key within
    /// each section; field order is fixed.
    std::string snapshot() const {
        std::string out;
        char buf[128];
        out += "beacon " + to_hex(beacon_) + "\n";
        for (const auto& [acct, v] : balances_) out += "balance " + acct + " " + std::to_string(v) + "\n";
        for (const auto& [node, e] : registry_) {
            out += "node " + node + " deposit=" + std::to_string(deposit(node)) + " active=" + (e.active ? "1" : "0") +
                   " pk=" + to_hex(e.public_key) + "\n";
        }
        for (const auto& [q, e] : escrow_) out += "escrow " + q + " " + e.requester + " " + std::to_string(e.amount) + "\n";
        out += "pool " + std::to_string(pool_) + "\n";
        for (const auto& ev : event_log_) {
            std::snprintf(buf, sizeof buf, "%.9g", ev.w);
            out += "event " + ev.q + " t=" + std::to_string(ev.t) + " w=" + buf + " reward=" + std::to_string(ev.reward) +
                   " sources=";
            for (std::size_t i = 0; i < ev.sources.size(); ++i) out += (i ? "|" : "") + ev.sources[i];
            out += " beacon=" + to_hex(ev.beacon) + "\n";
        }
        for (const auto& [q, r] : results_) {
            std::snprintf(buf, sizeof buf, "%.17g", r.value);
            out += "result " + q + " value=" + buf + " strategy=" + std::string(to_string(r.strategy)) + " contributors=";
            for (std::size_t i = 0; i < r.contributors.size(); ++i) out += (i ? "|" : "") + r.contributors[i];
            out += "\n";
        }
        for (const auto& [node, rec] : reputation_.records()) {
            std::snprintf(buf, sizeof buf, " T=%.17g A=%.17g", rec.mean_response_time, rec.accuracy);
            out += "reputation " + node + " S=" + std::to_string(rec.total_services) + buf + "\n";
        }
        return out;
    }

private:
    struct Escrow {
        std::string requester;
        Tokens amount = 0;
    };

    static Bytes digest_bytes(const Bytes& data) {
        const Digest d = sha256(data);
        return Bytes(d.begin(), d.end());
    }

    void credit(FinalizeReport& rep, const NodeId& node, Tokens amount) {
        if (amount == 0) return;
        balances_[node] += amount;
        rep.paid[node] += amount;
    }

    LedgerConfig config_;
    ReputationStore reputation_;
    Bytes beacon_;
    Tokens minted_ = 0;
    Tokens pool_ = 0;
    std::map<std::string, Tokens> balances_;
    std::map<NodeId, Tokens> deposits_;
    std::map<NodeId, RegistryEntry> registry_;
    std::map<std::string, Escrow> escrow_;
    std::map<std::string, std::string> requesters_;
    std::vector<RequestEvent> event_log_;
    std::map<std::string, std::size_t> event_index_;
    std::map<std::string, AggregationResult> results_;
    std::map<std::string, Callback> callbacks_;
    std::uint64_t callbacks_delivered_ = 0;
};

}  // namespace oraclenet

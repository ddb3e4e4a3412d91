// End-to-end task pipeline on top of the event loop: post, select, respond,
// collect, reveal, two consensus rounds, filter, aggregate, finalize.

#pragma once

#include "oraclenet/chain_contracts.hpp"
#include "oraclenet/collection.hpp"
#include "oraclenet/simnet.hpp"

#include <cstdio>

namespace oraclenet {

enum class SchemeVariant { Full, NoReputation, NoFilter, Baseline };

inline std::string_view to_string(SchemeVariant v) {
    switch (v) {
        case SchemeVariant::Full: return "full";
        case SchemeVariant::NoReputation: return "no_reputation";
        case SchemeVariant::NoFilter: return "no_filter";
        case SchemeVariant::Baseline: return "baseline";
    }
    return "?";
}

inline std::optional<SchemeVariant> variant_from_string(std::string_view s) {
    for (auto v : {SchemeVariant::Full, SchemeVariant::NoReputation, SchemeVariant::NoFilter, SchemeVariant::Baseline}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

inline bool uses_reputation(SchemeVariant v) { return v == SchemeVariant::Full || v == SchemeVariant::NoFilter; }
inline bool uses_filter(SchemeVariant v) { return v == SchemeVariant::Full || v == SchemeVariant::NoReputation; }

enum class CrashPhase { BeforeBroadcast, AfterJoin, Round1, Round2, BeforeSubmit };

struct TaskRecord {
    std::uint32_t index = 0;
    std::string q;
    bool finalized = false;
    std::string failure;  // empty when finalized
    double posted_at = 0.0;
    double finished_at = 0.0;
    double response_time = 0.0;
    double value = 0.0;
    double truth = 0.0;
    bool accurate = false;
    double variance = 0.0;  // population variance of contributor values
    std::uint32_t retries = 0;
    double final_width = 0.0;
    std::vector<NodeId> participants;  // top t, priority order
    std::vector<NodeId> kept;
    std::vector<NodeId> dropped;
    Ticks window_start = 0;
    Ticks window_end = 0;
    std::uint64_t selection_comparisons = 0;
    std::uint64_t filter_comparisons = 0;
};

struct ReputationSample {
    std::uint32_t task = 0;
    NodeId node;
    std::uint64_t services = 0;
    double mean_response_time = 0.0;
    double accuracy = 0.0;
    double reputation = 0.0;
};

/// Per-node counters kept alongside the ledger, for metrics and tests.
struct NodeStats {
    std::uint64_t selected = 0;          // top-t appearances
    std::uint64_t revealed = 0;          // results in a round-1 consensus set
    std::uint64_t filter_dropped = 0;    // of those, removed by the window filter
    std::uint64_t outlier_flagged = 0;   // in the filtered set but judged an outlier
    std::uint64_t filtered_in = 0;       // in the filtered set
    Tokens earned = 0;
};

struct SimOptions {
    bool keep_trace = false;
    double horizon = std::numeric_limits<double>::infinity();  // seconds of simulated time
};

struct SimulationOutput {
    LoopStatus status = LoopStatus::Completed;
    std::vector<TaskRecord> tasks;
    std::vector<ReputationSample> reputation_trace;
    std::map<NodeId, NodeBehavior> behaviors;
    std::map<NodeId, NodeStats> node_stats;
    std::map<NodeId, double> final_reputation;
    std::map<NodeId, double> final_accuracy;
    std::size_t audit_violations = 0;
    bool conserved_every_task = true;
    std::string trace_digest;
    std::vector<TraceRecord> trace;
    std::string ledger_snapshot;
};

inline std::string node_name(std::uint32_t index, std::uint32_t node_count) {
    int width = 3;
    for (std::uint32_t n = node_count; n >= 1000; n /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof buf, "n%0*u", width, index);
    return buf;
}

/// Largest-remainder split of round(delta * N) malicious nodes over the
/// adversary mix; the chosen nodes are a seeded random subset.
inline std::vector<NodeBehavior> assign_behaviors(const SimConfig& cfg, Rng& rng) {
    std::vector<NodeBehavior> out(cfg.node_count);
    const auto malicious = static_cast<std::uint32_t>(std::llround(cfg.malicious_fraction * cfg.node_count));
    std::vector<std::uint32_t> order(cfg.node_count);
    for (std::uint32_t i = 0; i < cfg.node_count; ++i) order[i] = i;
    for (std::uint32_t i = cfg.node_count; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double mix_total = 0.0;
    for (const auto& [_, f] : cfg.adversary_mix) mix_total += f;
    const auto assigned = static_cast<std::uint32_t>(std::llround(mix_total * malicious));
    std::vector<std::pair<BehaviorKind, std::uint32_t>> counts;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::uint32_t used = 0;
    for (const auto& [kind, f] : cfg.adversary_mix) {
        const double exact = f * malicious;
        const auto whole = static_cast<std::uint32_t>(std::floor(exact));
        remainders.emplace_back(exact - whole, counts.size());
        counts.emplace_back(kind, whole);
        used += whole;
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; used < assigned && i < remainders.size(); ++i, ++used) ++counts[remainders[i].second].second;

    std::size_t next = 0;
    std::uint32_t sybil_index = 0;
    for (const auto& [kind, n] : counts) {
        for (std::uint32_t j = 0; j < n; ++j) {
            NodeBehavior& b = out[order[next++]];
            b.kind = kind;
            b.offset_std = cfg.false_offset_std;
            b.extra_delay = cfg.lazy_extra_delay;
            b.trigger = cfg.targeted_trigger;
            b.cluster_id = kind == BehaviorKind::SybilMember ? sybil_index++ % std::max(1u, cfg.sybil_clusters) : 0;
        }
    }
    return out;
}

/// One isolated simulated world: ledger, nodes, sources, event loop.
class Simulator {
public:
    static constexpr std::uint64_t kLabelBehavior = 1;
    static constexpr std::uint64_t kLabelNodeKey = 2;
    static constexpr std::uint64_t kLabelLatency = 3;
    static constexpr std::uint64_t kLabelSource = 4;
    static constexpr std::uint64_t kLabelSourceKey = 5;
    static constexpr std::uint64_t kLabelTask = 6;
    static constexpr std::uint64_t kLabelTempKey = 7;
    static constexpr const char* kRequester = "requester";

    Simulator(SimConfig cfg, SchemeVariant variant, SimOptions opts = {})
        : cfg_(checked(std::move(cfg))),
          variant_(variant),
          opts_(opts),
          ledger_(LedgerConfig{cfg_.min_deposit, ReputationParams{cfg_.alpha, 1.0, cfg_.slash_threshold}}),
          truth_(cfg_.source_base, cfg_.source_drift, cfg_.source_noise, derive_seed(cfg_.seed, kLabelSource)) {
        setup();
    }

    static SimConfig checked(SimConfig cfg) {
        const auto errs = cfg.validate();
        if (!errs.empty()) throw std::invalid_argument("invalid config: " + errs.front());
        return cfg;
    }

    SimulationOutput run() {
        loop_.keep_trace(opts_.keep_trace);
        loop_.schedule(0, "task.post", "", [this] { start_task(0); });
        const Ticks horizon =
            std::isfinite(opts_.horizon) ? to_ticks(opts_.horizon) : std::numeric_limits<Ticks>::max();
        out_.status = loop_.run(horizon);
        out_.audit_violations = audit_.violations();
        out_.trace_digest = loop_.trace_digest();
        if (opts_.keep_trace) out_.trace = loop_.trace();
        for (const auto& [node, rec] : ledger_.reputation().records()) {
            out_.final_reputation[node] = ledger_.reputation_of(node);
            out_.final_accuracy[node] = rec.accuracy;
        }
        out_.ledger_snapshot = ledger_.snapshot();
        return std::move(out_);
    }

    const Ledger& ledger() const { return ledger_; }
    const InformationFlowAudit& audit() const { return audit_; }
    const std::vector<NodeId>& node_ids() const { return node_ids_; }

private:
    struct Node {
        NodeId id;
        KeyPair key;
        NodeBehavior behavior;
        double latency_mean = 1.0;
        std::uint32_t observed_broadcasts = 0;  // seen by a targeting adversary
    };

    struct Task {
        std::uint32_t index = 0;
        std::string q;
        Ticks posted = 0;
        EventAnchor anchor;
        std::vector<RingPriority> participants;  // t + standby, priority order
        std::map<NodeId, std::size_t> expected_positions;
        std::map<NodeId, CrashPhase> crashes;
        std::set<NodeId> crashed_now;
        Rng rng{0};
        double width = 1.0;
        std::uint32_t attempt = 0;
        TaskRecord record;

        // per attempt
        Ticks attempt_start = 0;
        std::optional<CollectionState> collection;
        std::optional<TempNetwork> network;
        std::map<NodeId, KeyPair> temp_keys;
        std::vector<Ticks> arrivals;
        std::optional<GroupSignature> group_sig;
        std::uint64_t epoch = 0;       // one per attempt; stale responses check it
        std::uint64_t generation = 0;  // bumped on every state change; stale settle checks check it
        bool freeloaders_triggered = false;
        RevealOutcome reveal;
        std::vector<TimedResult> consensus;
    };

    void setup() {
        Rng brng(derive_seed(cfg_.seed, kLabelBehavior));
        const auto behaviors = assign_behaviors(cfg_, brng);
        Rng lrng(derive_seed(cfg_.seed, kLabelLatency));
        for (std::uint32_t i = 0; i < cfg_.node_count; ++i) {
            Node n;
            n.id = node_name(i, cfg_.node_count);
            n.key = vrf_setup(derive_seed(cfg_.seed, kLabelNodeKey, i));
            n.behavior = behaviors[i];
            n.latency_mean = sample_latency(cfg_.latency_mean, cfg_.latency_std, lrng);
            escrow_.enroll(n.key);
            ledger_.mint(n.id, cfg_.node_funds);
            if (ledger_.register_node(n.id, n.key.public_key, cfg_.min_deposit) != LedgerStatus::Ok) {
                throw std::logic_error("node registration failed");
            }
            out_.behaviors[n.id] = n.behavior;
            out_.node_stats[n.id];
            index_[n.id] = nodes_.size();
            node_ids_.push_back(n.id);
            nodes_.push_back(std::move(n));
        }
        for (std::uint32_t s = 0; s < cfg_.source_count; ++s) {
            const std::string id = "src" + std::to_string(s);
            KeyPair k = vrf_setup(derive_seed(cfg_.seed, kLabelSourceKey, s));
            escrow_.enroll(k);
            directory_.sources.emplace_back(id, k.public_key);
            source_keys_.push_back(std::move(k));
            source_ids_.push_back(id);
        }
        ledger_.mint(kRequester, cfg_.fee * static_cast<Tokens>(cfg_.task_count));
    }

    bool filtering() const { return uses_filter(variant_); }

    double selection_reputation(const NodeId& id) const {
        return uses_reputation(variant_) ? ledger_.reputation_of(id) : 1.0;
    }

    bool is_crashed(const Task& t, const NodeId& id) const { return t.crashed_now.count(id) != 0; }

    void crash_through(Task& t, CrashPhase phase) {
        for (const auto& [id, p] : t.crashes) {
            if (p <= phase) t.crashed_now.insert(id);
        }
    }

    static const std::string& event_label(const Task& t) { return t.q; }

    // -- task lifecycle -----------------------------------------------------

    void start_task(std::uint32_t k) {
        task_ = Task{};
        Task& t = task_;
        t.index = k;
        char qbuf[32];
        std::snprintf(qbuf, sizeof qbuf, "q%06u", k);
        t.q = qbuf;
        t.posted = loop_.now();
        t.rng = Rng(derive_seed(cfg_.seed, kLabelTask, k));
        t.width = cfg_.window_width;
        t.record.index = k;
        t.record.q = t.q;
        t.record.posted_at = to_seconds(t.posted);

        RequestEvent ev{t.q, source_ids_, cfg_.reward, cfg_.committee_size, cfg_.window_width, {}};
        if (ledger_.post_request(kRequester, ev, cfg_.fee) != LedgerStatus::Ok) {
            throw std::logic_error("post_request failed for " + t.q);
        }
        t.anchor = compute_anchor(to_bytes(t.q), ledger_.event(t.q)->beacon);

        std::vector<RingPriority> claims;
        claims.reserve(nodes_.size());
        for (const auto& n : nodes_) {
            if (!ledger_.is_active(n.id)) continue;
            const double r = selection_reputation(n.id);
            t.expected_positions[n.id] = position_count(r);
            claims.push_back(compute_ring_priority(n.id, n.key.secret_key, t.anchor, r));
        }
        t.participants = select_top_t(std::move(claims), cfg_.committee_size + cfg_.standby,
                                      &t.record.selection_comparisons);
        for (std::size_t i = 0; i < t.participants.size() && i < cfg_.committee_size; ++i) {
            t.record.participants.push_back(t.participants[i].node_id);
            ++out_.node_stats[t.participants[i].node_id].selected;
        }

        if (cfg_.crashes_per_task > 0) {
            std::vector<NodeId> pool = t.record.participants;
            const std::size_t c = std::min<std::size_t>(cfg_.crashes_per_task, pool.size());
            for (std::size_t i = 0; i < c; ++i) {
                const std::size_t j = i + t.rng.below(pool.size() - i);
                std::swap(pool[i], pool[j]);
                t.crashes[pool[i]] = static_cast<CrashPhase>(t.rng.below(5));
            }
            crash_through(t, CrashPhase::BeforeBroadcast);
        }
        begin_attempt();
    }

    void begin_attempt() {
        Task& t = task_;
        t.attempt_start = loop_.now();
        t.collection.emplace(to_bytes(t.q), cfg_.committee_size);
        t.network.reset();
        t.temp_keys.clear();
        t.arrivals.clear();
        t.group_sig.reset();
        t.freeloaders_triggered = false;
        t.reveal = {};
        t.consensus.clear();
        t.epoch = ++epoch_counter_;
        ++t.generation;

        const std::uint64_t key_base = derive_seed(cfg_.seed, kLabelTempKey, (std::uint64_t{t.index} << 8) | t.attempt);
        for (const auto& claim : t.participants) {
            const Node& n = nodes_[index_.at(claim.node_id)];
            t.temp_keys.emplace(n.id, vrf_setup(derive_seed(key_base, index_.at(n.id))));
            if (is_crashed(t, n.id)) continue;
            if (n.behavior.kind == BehaviorKind::TargetedOffline && n.observed_broadcasts >= n.behavior.trigger) continue;
            if (n.behavior.kind == BehaviorKind::Freeloader) continue;  // waits for someone else's broadcast
            double latency = std::max(kLatencyFloor, n.latency_mean + t.rng.normal(0.0, cfg_.jitter_std()));
            if (n.behavior.kind == BehaviorKind::Lazy) latency += n.behavior.extra_delay;
            const double offset =
                n.behavior.kind == BehaviorKind::FalseData ? t.rng.normal(0.0, n.behavior.offset_std) : 0.0;
            loop_.schedule(loop_.now() + to_ticks(latency), "node.broadcast", n.id,
                           [this, id = n.id, claim, offset, epoch = t.epoch] { respond(id, claim, offset, epoch); });
        }
        for (const auto& [id, kp] : t.temp_keys) escrow_.enroll(kp);

        loop_.schedule(loop_.now() + to_ticks(cfg_.collection_timeout), "collection.deadline", t.q,
                       [this, epoch = t.epoch] { on_deadline(epoch); });
    }

    const KeyPair& source_key_for(const RingPriority& claim, std::string* id) const {
        const std::size_t s = assign_data_source(claim, source_ids_.size());
        *id = source_ids_[s];
        return source_keys_[s];
    }

    void respond(const NodeId& id, const RingPriority& claim, double offset, std::uint64_t epoch) {
        Task& t = task_;
        if (epoch != t.epoch) return;
        const Ticks now = loop_.now();
        const double value = truth_.ground_truth(to_seconds(now)) + offset;
        std::string sid;
        const KeyPair& skey = source_key_for(claim, &sid);
        // A false-data node still holds a genuine attestation: the source
        // proof covers provenance of a reading, not its correctness.
        const SourceAttestation att = attest(skey, sid, value, now);
        const Node& n = nodes_[index_.at(id)];
        const SubmissionContext ctx{escrow_, t.anchor, n.key.public_key, t.expected_positions.at(id)};
        FeedbackEnvelope env = seal_feedback(t.temp_keys.at(id), id, value, now, att,
                                             directory_.sources[assign_data_source(claim, source_ids_.size())].second,
                                             claim, ctx);
        receive(std::move(env));
    }

    void freeload(const NodeId& id, FeedbackEnvelope copied, std::uint64_t epoch) {
        Task& t = task_;
        if (epoch != t.epoch) return;
        const KeyPair& own = t.temp_keys.at(id);
        const RingPriority* claim = nullptr;
        for (const auto& c : t.participants) {
            if (c.node_id == id) claim = &c;
        }
        FeedbackEnvelope env;
        env.event_id = copied.event_id;
        env.submitter = id;
        env.temp_public_key = own.public_key;
        env.ciphertext = copied.ciphertext;
        env.partial_signature = sign(own.secret_key, detail::partial_signature_message(env.event_id));
        env.source_proof = copied.source_proof;
        env.timestamp = loop_.now();
        env.priority_claim = *claim;
        receive(std::move(env));
    }

    void receive(FeedbackEnvelope env) {
        Task& t = task_;
        const Ticks now = loop_.now();
        Node& sender = nodes_[index_.at(env.submitter)];
        ++sender.observed_broadcasts;
        audit_.record(now, event_label(t), AuditKind::Broadcast, env.submitter);
        if (t.collection->closed()) return;

        const SubmissionContext ctx{escrow_, t.anchor, sender.key.public_key, t.expected_positions.at(env.submitter)};
        if (!validate_envelope(env, ctx)) return;

        if (!t.freeloaders_triggered) {
            t.freeloaders_triggered = true;
            for (const auto& claim : t.participants) {
                const Node& n = nodes_[index_.at(claim.node_id)];
                if (n.behavior.kind != BehaviorKind::Freeloader || n.id == env.submitter || is_crashed(t, n.id)) continue;
                loop_.schedule(now + to_ticks(kLatencyFloor), "node.copy", n.id,
                               [this, id = n.id, env, epoch = t.epoch] { freeload(id, env, epoch); });
            }
        }

        const NodeId submitter = env.submitter;
        const std::uint64_t distance = env.priority_claim.distance;
        const Ticks ts = env.timestamp;
        if (t.collection->add(std::move(env)) != CollectionState::AddStatus::Accepted) return;
        t.arrivals.push_back(ts);
        JoinResult jr = join_network(std::move(t.network), t.anchor.event_id, cfg_.committee_size, submitter, distance);
        t.network = std::move(jr.network);
        if (auto it = t.crashes.find(submitter); it != t.crashes.end() && it->second == CrashPhase::AfterJoin) {
            t.crashed_now.insert(submitter);
        }
        ++t.generation;  // invalidates a pending settle check
        if (!t.group_sig) check_close();
    }

    std::size_t outstanding() const {
        const std::size_t got = task_.collection->distinct_submitters();
        return task_.participants.size() > got ? task_.participants.size() - got : 0;
    }

    // Closing before all t results arrive must leave a membership that still
    // reaches quorum with the tolerated floor(t/3) crashes.
    std::size_t settle_min_members() const {
        const std::size_t t = cfg_.committee_size;
        return std::min(t, 2 * (t / 3) + 2);
    }

    void check_close() {
        Task& t = task_;
        if (t.collection->threshold_met()) {
            form_group_signature();
            return;
        }
        if (!filtering() || t.collection->distinct_submitters() < settle_min_members()) return;
        const Ticks width = to_ticks(t.width);
        const auto when = next_settle_time(t.arrivals, outstanding(), loop_.now(), width);
        if (!when || *when >= t.attempt_start + to_ticks(cfg_.collection_timeout)) return;
        if (*when == loop_.now()) {
            form_group_signature();
            return;
        }
        loop_.schedule(*when, "collection.settle", t.q, [this, gen = t.generation] {
            if (gen == task_.generation && !task_.group_sig) form_group_signature();
        });
    }

    void on_deadline(std::uint64_t epoch) {
        Task& t = task_;
        if (epoch != t.epoch || t.group_sig || t.collection->closed()) return;
        if (t.collection->distinct_submitters() == 0) {
            fail_task("no responses");
            return;
        }
        form_group_signature();
    }

    void form_group_signature() {
        Task& t = task_;
        const std::size_t threshold = std::min<std::size_t>(cfg_.committee_size, t.collection->distinct_submitters());
        t.group_sig = t.collection->try_group_signature(threshold);
        if (!t.group_sig) throw std::logic_error("group signature should form at the received count");
        audit_.record(loop_.now(), event_label(t), AuditKind::GroupSignature, "");
        ++t.generation;
        loop_.schedule(loop_.now() + to_ticks(cfg_.reveal_delay), "collection.reveal", t.q, [this] { reveal(); });
    }

    void reveal() {
        Task& t = task_;
        t.collection->close();
        std::map<NodeId, Bytes> keys;
        for (const auto& env : t.collection->envelopes()) {
            if (is_crashed(t, env.submitter)) continue;
            keys[env.submitter] = t.temp_keys.at(env.submitter).secret_key;
            audit_.record(loop_.now(), event_label(t), AuditKind::KeyReveal, env.submitter);
        }
        t.reveal = reveal_and_decrypt(t.collection->envelopes(), *t.group_sig, keys, escrow_, directory_, &audit_,
                                      loop_.now());
        loop_.schedule(loop_.now() + to_ticks(cfg_.round_delay), "consensus.round1", t.q, [this] { round1(); });
    }

    void round1() {
        Task& t = task_;
        crash_through(t, CrashPhase::Round1);
        std::map<NodeId, std::vector<TimedResult>> views;
        for (const auto& m : t.network->members) {
            if (!is_crashed(t, m.node_id)) views[m.node_id] = t.reveal.results;
        }
        Round1Result r1 = run_round1(*t.network, views, t.crashed_now);
        if (!r1.report.committed) {
            fail_task("round1 quorum");
            return;
        }
        t.consensus = std::move(r1.consensus);
        if (t.consensus.empty()) {
            fail_task("no revealed results");
            return;
        }
        loop_.schedule(loop_.now() + to_ticks(cfg_.round_delay), "consensus.round2", t.q, [this] { round2(); });
    }

    void round2() {
        Task& t = task_;
        std::vector<TimedResult> filtered = t.consensus;
        std::vector<TimedResult> dropped;
        if (filtering()) {
            FilterOutcome fo = filter_window_ticks(t.consensus, to_ticks(t.width));
            t.record.filter_comparisons += fo.comparisons;
            const RetryDecision d = apply_retry_policy(fo.kept.size(), FilterPolicy{t.width, cfg_.min_count, 1.5});
            if (const auto* retry = std::get_if<Retry>(&d)) {
                if (t.attempt >= cfg_.max_retries) {
                    fail_task("retries exhausted");
                    return;
                }
                retire_temp_keys();
                t.width = retry->new_width;
                ++t.attempt;
                ++t.record.retries;
                begin_attempt();
                return;
            }
            t.record.window_start = fo.window_start;
            t.record.window_end = fo.window_end;
            filtered = std::move(fo.kept);
            dropped = std::move(fo.dropped);
        }
        crash_through(t, CrashPhase::Round2);
        Round2Result r2 = run_round2_and_aggregate(*t.network, t.consensus, filtered, cfg_.strategy, t.crashed_now,
                                                   OutlierRule{1e-6, 1e-9, cfg_.outlier_k_mad});
        if (!r2.report.committed || !r2.result) {
            fail_task("round2 quorum");
            return;
        }
        AggregationResult res = std::move(*r2.result);

        for (const auto& r : t.consensus) ++out_.node_stats[r.node_id].revealed;
        for (const auto& r : dropped) {
            ++out_.node_stats[r.node_id].filter_dropped;
            t.record.dropped.push_back(r.node_id);
        }
        std::vector<double> values;
        for (const auto& r : filtered) {
            auto& st = out_.node_stats[r.node_id];
            ++st.filtered_in;
            if (!res.correct_flags.at(r.node_id)) ++st.outlier_flagged;
            t.record.kept.push_back(r.node_id);
            values.push_back(r.value);
        }

        // Every top-t participant gets a verdict and a response time.
        std::map<NodeId, Ticks> stamp;
        for (const auto& env : t.collection->envelopes()) stamp[env.submitter] = env.timestamp;
        for (const auto& id : t.record.participants) {
            res.correct_flags.try_emplace(id, false);
        }
        for (const auto& [id, _] : res.correct_flags) {
            auto it = stamp.find(id);
            const double rt = it != stamp.end() ? to_seconds(it->second - t.attempt_start) : cfg_.collection_timeout;
            res.node_response_times[id] = std::max(rt, kLatencyFloor);
        }

        const double now_s = loop_.now_seconds();
        t.record.truth = truth_.ground_truth(now_s);
        t.record.value = res.value;
        t.record.variance = population_variance(values);
        const double eps = std::max(cfg_.eps_rel * std::abs(t.record.truth), cfg_.eps_abs);
        t.record.accurate = std::abs(res.value - t.record.truth) <= eps;
        t.record.final_width = t.width;
        pending_result_ = std::move(res);
        loop_.schedule(loop_.now() + to_ticks(cfg_.round_delay), "task.submit", t.q, [this] { submit(); });
    }

    void submit() {
        Task& t = task_;
        crash_through(t, CrashPhase::BeforeSubmit);
        const auto submitter = choose_submitter(*t.network, t.crashed_now);
        if (!submitter) {
            fail_task("no live submitter");
            return;
        }
        t.network->round = NetworkRound::Submitted;
        AggregationResult res = std::move(*pending_result_);
        pending_result_.reset();
        res.submitter = *submitter;
        res.response_time = to_seconds(loop_.now() - t.posted);
        FinalizeReport report;
        if (ledger_.finalize_task(t.q, res, &report) != LedgerStatus::Ok) {
            throw std::logic_error("finalize_task rejected " + t.q);
        }
        for (const auto& [node, amount] : report.paid) out_.node_stats[node].earned += amount;
        for (const auto& [node, _] : res.correct_flags) {
            if (!ledger_.reputation().contains(node)) continue;
            const ReputationRecord& rec = ledger_.reputation().record(node);
            out_.reputation_trace.push_back(ReputationSample{t.index, node, rec.total_services,
                                                             rec.mean_response_time, rec.accuracy,
                                                             ledger_.reputation_of(node)});
        }
        t.record.finalized = true;
        t.record.response_time = res.response_time;
        finish_task();
    }

    void fail_task(std::string reason) {
        Task& t = task_;
        if (t.collection) t.collection->close();
        t.epoch = ++epoch_counter_;
        ledger_.cancel_task(t.q);
        t.record.finalized = false;
        t.record.failure = std::move(reason);
        t.record.response_time = to_seconds(loop_.now() - t.posted);
        finish_task();
    }

    void retire_temp_keys() {
        for (const auto& [_, kp] : task_.temp_keys) escrow_.retire(kp.public_key);
    }

    void finish_task() {
        Task& t = task_;
        retire_temp_keys();
        t.record.finished_at = loop_.now_seconds();
        if (!ledger_.conserved()) out_.conserved_every_task = false;
        out_.tasks.push_back(std::move(t.record));
        t.epoch = ++epoch_counter_;
        const std::uint32_t next = t.index + 1;
        if (next < cfg_.task_count) {
            loop_.schedule(loop_.now() + to_ticks(cfg_.task_gap), "task.post", "", [this, next] { start_task(next); });
        }
    }

    SimConfig cfg_;
    SchemeVariant variant_;
    SimOptions opts_;
    KeyEscrow escrow_;
    Ledger ledger_;
    DataSourceProcess truth_;
    EventLoop loop_;
    InformationFlowAudit audit_;
    std::vector<Node> nodes_;
    std::map<NodeId, std::size_t> index_;
    std::vector<NodeId> node_ids_;
    std::vector<std::string> source_ids_;
    std::vector<KeyPair> source_keys_;
    SourceDirectory directory_;
    Task task_;
    std::optional<AggregationResult> pending_result_;
    std::uint64_t epoch_counter_ = 0;
    SimulationOutput out_;
};

inline SimulationOutput simulate(const SimConfig& cfg, SchemeVariant variant, SimOptions opts = {}) {
    return Simulator(cfg, variant, opts).run();
}

}  // namespace oraclenet

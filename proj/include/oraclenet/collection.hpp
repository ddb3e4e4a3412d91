// Commit-reveal collection with a t-of-n threshold.
//
// Phase 1: each responder seals its value under a fresh temporary key and
// broadcasts the envelope with a partial signature over the event id.
// Phase 2: once t distinct partial signatures exist a group signature is
// formed; only then do responders publish their temporary secret keys and the
// values become readable.

#pragma once

#include "oraclenet/crypto_vrf.hpp"
#include "oraclenet/filtering.hpp"
#include "oraclenet/selection.hpp"

#include <map>
#include <set>

namespace oraclenet {

struct SourceAttestation {
    std::string source_id;
    double value = 0.0;
    Ticks issued_at = 0;
    Bytes signature;

    bool operator==(const SourceAttestation&) const = default;
};

inline Bytes attestation_message(std::string_view source_id, double value, Ticks issued_at) {
    return ByteWriter{}.raw("oraclenet.attest").field(source_id).f64(value).i64(issued_at).bytes();
}

inline SourceAttestation attest(const KeyPair& source_key, std::string source_id, double value, Ticks issued_at) {
    SourceAttestation a{std::move(source_id), value, issued_at, {}};
    a.signature = sign(source_key.secret_key, attestation_message(a.source_id, value, issued_at));
    return a;
}

inline bool verify_attestation(const KeyEscrow& escrow, const Bytes& source_public_key, const SourceAttestation& a) {
    return verify_signature(escrow, source_public_key, attestation_message(a.source_id, a.value, a.issued_at),
                            a.signature);
}

// The part of an attestation that travels in clear. The value is only
// recoverable after the key reveal.
struct AttestationTag {
    std::string source_id;
    Ticks issued_at = 0;
    Bytes signature;

    bool operator==(const AttestationTag&) const = default;
};

struct FeedbackEnvelope {
    Bytes event_id;
    NodeId submitter;
    Bytes temp_public_key;
    Bytes ciphertext;
    Bytes partial_signature;
    AttestationTag source_proof;
    Ticks timestamp = 0;
    RingPriority priority_claim;

    bool operator==(const FeedbackEnvelope&) const = default;

    /// Broadcast wire record. Field order: event_id, submitter, temp key,
    /// ciphertext, partial signature, source id, issued_at, signature,
    /// timestamp, winning position, distance, position count, proof.
    Bytes canonical() const {
        ByteWriter w;
        w.field(event_id).field(submitter).field(temp_public_key).field(ciphertext).field(partial_signature);
        w.field(source_proof.source_id).i64(source_proof.issued_at).field(source_proof.signature);
        w.i64(timestamp).u64(priority_claim.winning_position).u64(priority_claim.distance);
        w.u64(priority_claim.positions.size()).field(priority_claim.proof.to_bytes());
        return std::move(w).bytes();
    }
};

struct GroupSignature {
    Bytes event_id;
    std::vector<NodeId> contributing_nodes;  // priority order
    Bytes signature;

    bool operator==(const GroupSignature&) const = default;
};

namespace detail {

inline constexpr std::size_t kTagSize = 32;

inline std::uint64_t keystream(std::span<const std::uint8_t> sk, std::span<const std::uint8_t> event_id) {
    return load_be64(sha256(ByteWriter{}.raw("oraclenet.seal").field(sk).field(event_id).bytes()));
}

inline Digest integrity_tag(std::span<const std::uint8_t> sk, std::uint64_t plaintext) {
    return sha256(ByteWriter{}.raw("oraclenet.tag").field(sk).u64(plaintext).bytes());
}

inline Bytes partial_signature_message(std::span<const std::uint8_t> event_id) {
    return ByteWriter{}.raw("oraclenet.partial").field(event_id).bytes();
}

}  // namespace detail

inline Bytes seal_value(std::span<const std::uint8_t> temp_sk, std::span<const std::uint8_t> event_id, double value) {
    const std::uint64_t plain = std::bit_cast<std::uint64_t>(value);
    const Digest tag = detail::integrity_tag(temp_sk, plain);
    return ByteWriter{}.u64(plain ^ detail::keystream(temp_sk, event_id)).raw(tag).bytes();
}

/// Decrypts with a revealed key; nullopt if the key does not match the
/// envelope or the integrity tag fails.
inline std::optional<double> open_envelope(const FeedbackEnvelope& env, const Bytes& revealed_sk) {
    if (revealed_sk.size() != kSecretKeySize || derive_public_key(revealed_sk) != env.temp_public_key) {
        return std::nullopt;
    }
    if (env.ciphertext.size() != 8 + detail::kTagSize) return std::nullopt;
    const std::uint64_t plain = load_be64(env.ciphertext) ^ detail::keystream(revealed_sk, env.event_id);
    const Digest tag = detail::integrity_tag(revealed_sk, plain);
    if (!std::equal(tag.begin(), tag.end(), env.ciphertext.begin() + 8)) return std::nullopt;
    return std::bit_cast<double>(plain);
}

/// Public keys and expectations needed to check a submission before sealing
/// or on receipt.
struct SubmissionContext {
    const KeyEscrow& escrow;
    const EventAnchor& anchor;
    const Bytes& node_public_key;
    std::optional<std::size_t> expected_positions;
};

inline FeedbackEnvelope seal_feedback(const KeyPair& temp_key, const NodeId& submitter, double value, Ticks timestamp,
                                      const SourceAttestation& attestation, const Bytes& source_public_key,
                                      const RingPriority& priority_claim, const SubmissionContext& ctx) {
    if (attestation.value != value || !verify_attestation(ctx.escrow, source_public_key, attestation)) {
        throw ContractViolation("seal_feedback: source attestation does not verify");
    }
    if (priority_claim.node_id != submitter ||
        !verify_ring_priority(ctx.escrow, ctx.node_public_key, ctx.anchor, priority_claim, ctx.expected_positions)) {
        throw ContractViolation("seal_feedback: priority claim does not verify");
    }
    FeedbackEnvelope env;
    env.event_id = ctx.anchor.event_id;
    env.submitter = submitter;
    env.temp_public_key = temp_key.public_key;
    env.ciphertext = seal_value(temp_key.secret_key, env.event_id, value);
    env.partial_signature = sign(temp_key.secret_key, detail::partial_signature_message(env.event_id));
    env.source_proof = AttestationTag{attestation.source_id, attestation.issued_at, attestation.signature};
    env.timestamp = timestamp;
    env.priority_claim = priority_claim;
    return env;
}

/// Receipt-time checks every collector runs: event match, priority claim,
/// partial signature.
inline bool validate_envelope(const FeedbackEnvelope& env, const SubmissionContext& ctx) {
    return env.event_id == ctx.anchor.event_id && env.priority_claim.node_id == env.submitter &&
           verify_ring_priority(ctx.escrow, ctx.node_public_key, ctx.anchor, env.priority_claim,
                                ctx.expected_positions) &&
           verify_signature(ctx.escrow, env.temp_public_key, detail::partial_signature_message(env.event_id),
                            env.partial_signature);
}

namespace detail {

inline bool envelope_priority_order(const FeedbackEnvelope* a, const FeedbackEnvelope* b) {
    return higher_priority(a->priority_claim.distance, a->submitter, b->priority_claim.distance, b->submitter);
}

inline Bytes group_signature_bytes(const Bytes& event_id, const std::vector<const FeedbackEnvelope*>& chosen) {
    ByteWriter w;
    w.raw("oraclenet.group").field(event_id);
    for (const auto* e : chosen) w.field(e->submitter).field(e->partial_signature);
    const Digest d = sha256(w.bytes());
    return Bytes(d.begin(), d.end());
}

// First `threshold` distinct submitters in priority order; a submitter's
// first (highest-priority) envelope represents it.
inline std::vector<const FeedbackEnvelope*> pick_contributors(std::span<const FeedbackEnvelope> envelopes,
                                                              std::size_t threshold) {
    std::vector<const FeedbackEnvelope*> sorted;
    sorted.reserve(envelopes.size());
    for (const auto& e : envelopes) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(), envelope_priority_order);
    std::vector<const FeedbackEnvelope*> chosen;
    std::set<NodeId> seen;
    for (const auto* e : sorted) {
        if (chosen.size() == threshold) break;
        if (seen.insert(e->submitter).second) chosen.push_back(e);
    }
    return chosen;
}

}  // namespace detail

inline std::optional<GroupSignature> try_form_group_signature(std::span<const FeedbackEnvelope> envelopes,
                                                              std::size_t threshold) {
    if (threshold == 0) throw ContractViolation("try_form_group_signature: threshold must be >= 1");
    for (const auto& e : envelopes) {
        if (e.event_id != envelopes.front().event_id) {
            throw ContractViolation("try_form_group_signature: mixed event ids");
        }
    }
    auto chosen = detail::pick_contributors(envelopes, threshold);
    if (chosen.size() < threshold) return std::nullopt;
    GroupSignature gs;
    gs.event_id = chosen.front()->event_id;
    for (const auto* e : chosen) gs.contributing_nodes.push_back(e->submitter);
    gs.signature = detail::group_signature_bytes(gs.event_id, chosen);
    return gs;
}

inline bool verify_group_signature(const KeyEscrow& escrow, std::span<const FeedbackEnvelope> envelopes,
                                   const GroupSignature& gs) {
    std::vector<const FeedbackEnvelope*> chosen;
    std::set<NodeId> seen;
    for (const auto& node : gs.contributing_nodes) {
        if (!seen.insert(node).second) return false;
        auto it = std::find_if(envelopes.begin(), envelopes.end(),
                               [&](const FeedbackEnvelope& e) { return e.submitter == node; });
        if (it == envelopes.end() || it->event_id != gs.event_id) return false;
        if (!verify_signature(escrow, it->temp_public_key, detail::partial_signature_message(gs.event_id),
                              it->partial_signature)) {
            return false;
        }
        chosen.push_back(&*it);
    }
    return !chosen.empty() && detail::group_signature_bytes(gs.event_id, chosen) == gs.signature;
}

// ---------------------------------------------------------------------------
// Information-flow audit

enum class AuditKind { Broadcast, GroupSignature, KeyReveal, PlaintextRead };

struct AuditEntry {
    Ticks time = 0;
    std::string event_id;
    AuditKind kind = AuditKind::Broadcast;
    NodeId actor;
};

/// Append-only log of who could read what, when. A violation is any
/// plaintext read for an event that precedes (or lacks) that event's group
/// signature.
class InformationFlowAudit {
public:
    void record(Ticks time, std::string event_id, AuditKind kind, NodeId actor) {
        entries_.push_back(AuditEntry{time, std::move(event_id), kind, std::move(actor)});
    }

    std::size_t violations() const {
        std::map<std::string, Ticks> formed;
        std::size_t bad = 0;
        for (const auto& e : entries_) {
            if (e.kind == AuditKind::GroupSignature) {
                formed.try_emplace(e.event_id, e.time);
            } else if (e.kind == AuditKind::PlaintextRead) {
                auto it = formed.find(e.event_id);
                if (it == formed.end() || e.time < it->second) ++bad;
            }
        }
        return bad;
    }

    const std::vector<AuditEntry>& entries() const { return entries_; }

private:
    std::vector<AuditEntry> entries_;
};

// ---------------------------------------------------------------------------
// Reveal

struct RevealOutcome {
    std::vector<TimedResult> results;  // priority order
    std::vector<NodeId> malformed;     // key, ciphertext or attestation failed
    std::vector<NodeId> withheld;      // no key revealed
};

/// Public data needed to check a revealed result against its data source.
struct SourceDirectory {
    std::vector<std::pair<std::string, Bytes>> sources;  // (source_id, public key), in request order

    const Bytes* key_for(std::string_view id) const {
        for (const auto& [sid, pk] : sources) {
            if (sid == id) return &pk;
        }
        return nullptr;
    }
};

inline RevealOutcome reveal_and_decrypt(std::span<const FeedbackEnvelope> envelopes, const GroupSignature& group_sig,
                                        const std::map<NodeId, Bytes>& revealed_keys, const KeyEscrow& escrow,
                                        const SourceDirectory& directory, InformationFlowAudit* audit = nullptr,
                                        Ticks now = 0) {
    RevealOutcome out;
    std::vector<const FeedbackEnvelope*> ordered;
    for (const auto& e : envelopes) {
        if (e.event_id == group_sig.event_id) ordered.push_back(&e);
    }
    std::stable_sort(ordered.begin(), ordered.end(), detail::envelope_priority_order);
    const std::string event(group_sig.event_id.begin(), group_sig.event_id.end());
    std::set<NodeId> seen;
    for (const auto* env : ordered) {
        if (!seen.insert(env->submitter).second) continue;
        auto key = revealed_keys.find(env->submitter);
        if (key == revealed_keys.end()) {
            out.withheld.push_back(env->submitter);
            continue;
        }
        if (audit) audit->record(now, event, AuditKind::PlaintextRead, env->submitter);
        const auto value = open_envelope(*env, key->second);
        bool ok = value.has_value();
        if (ok) {
            // The assigned source is fixed by the winning ring position.
            const auto& srcs = directory.sources;
            ok = !srcs.empty() &&
                 srcs[assign_data_source(env->priority_claim, srcs.size())].first == env->source_proof.source_id;
        }
        if (ok) {
            const Bytes* pk = directory.key_for(env->source_proof.source_id);
            const SourceAttestation full{env->source_proof.source_id, *value, env->source_proof.issued_at,
                                         env->source_proof.signature};
            ok = pk != nullptr && verify_attestation(escrow, *pk, full);
        }
        if (!ok) {
            out.malformed.push_back(env->submitter);
            continue;
        }
        out.results.push_back(TimedResult{env->submitter, *value, env->timestamp, env->priority_claim.distance});
    }
    return out;
}

/// Per-task accumulator fed by ordered simulator events.
class CollectionState {
public:
    enum class AddStatus { Accepted, Duplicate, WrongEvent, Closed };

    CollectionState(Bytes event_id, std::size_t threshold) : event_id_(std::move(event_id)), threshold_(threshold) {
        if (threshold_ == 0) throw ContractViolation("CollectionState: threshold must be >= 1");
    }

    AddStatus add(FeedbackEnvelope env) {
        if (closed_) return AddStatus::Closed;
        if (env.event_id != event_id_) return AddStatus::WrongEvent;
        if (!submitters_.insert(env.submitter).second) return AddStatus::Duplicate;
        envelopes_.push_back(std::move(env));
        return AddStatus::Accepted;
    }

    std::size_t distinct_submitters() const { return submitters_.size(); }
    bool threshold_met() const { return submitters_.size() >= threshold_; }

    std::optional<GroupSignature> try_group_signature(std::optional<std::size_t> threshold = std::nullopt) const {
        if (envelopes_.empty()) return std::nullopt;
        return try_form_group_signature(envelopes_, threshold.value_or(threshold_));
    }

    /// Aggregation began; later envelopes are rejected.
    void close() { closed_ = true; }
    bool closed() const { return closed_; }

    const std::vector<FeedbackEnvelope>& envelopes() const { return envelopes_; }
    const Bytes& event_id() const { return event_id_; }
    std::size_t threshold() const { return threshold_; }

private:
    Bytes event_id_;
    std::size_t threshold_;
    bool closed_ = false;
    std::set<NodeId> submitters_;
    std::vector<FeedbackEnvelope> envelopes_;
};

}  // namespace oraclenet

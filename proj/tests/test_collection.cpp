#include "oraclenet/collection.hpp"

#include <gtest/gtest.h>

using namespace oraclenet;

namespace {

// A small world: three nodes, two sources, one event.
struct Fixture {
    KeyEscrow escrow;
    std::vector<KeyPair> nodes;
    std::vector<KeyPair> temps;
    std::vector<KeyPair> source_keys;
    SourceDirectory directory;
    EventAnchor anchor = compute_anchor(to_bytes("q-col"), to_bytes("beacon"));

    Fixture() {
        for (std::uint64_t i = 0; i < 3; ++i) {
            nodes.push_back(vrf_setup(100 + i));
            temps.push_back(vrf_setup(200 + i));
            escrow.enroll(nodes.back());
            escrow.enroll(temps.back());
        }
        for (std::uint64_t s = 0; s < 2; ++s) {
            source_keys.push_back(vrf_setup(300 + s));
            escrow.enroll(source_keys.back());
            directory.sources.emplace_back("src" + std::to_string(s), source_keys.back().public_key);
        }
    }

    std::string id(std::size_t i) const { return "n" + std::to_string(i); }

    RingPriority claim(std::size_t i) const { return compute_ring_priority(id(i), nodes[i].secret_key, anchor, 1.0); }

    FeedbackEnvelope envelope(std::size_t i, double value, Ticks ts) const {
        const RingPriority c = claim(i);
        const std::size_t src = assign_data_source(c, directory.sources.size());
        const SourceAttestation a = attest(source_keys[src], directory.sources[src].first, value, ts);
        const SubmissionContext ctx{escrow, anchor, nodes[i].public_key, 1};
        return seal_feedback(temps[i], id(i), value, ts, a, source_keys[src].public_key, c, ctx);
    }

    SubmissionContext ctx(std::size_t i) const { return SubmissionContext{escrow, anchor, nodes[i].public_key, 1}; }
};

TEST(Seal, RoundTripWithRevealedKey) {
    Fixture f;
    const auto env = f.envelope(0, 101.25, 5);
    EXPECT_EQ(open_envelope(env, f.temps[0].secret_key), 101.25);
    EXPECT_EQ(open_envelope(env, f.temps[1].secret_key), std::nullopt);
    auto bad = env;
    bad.ciphertext[3] ^= 1;
    EXPECT_EQ(open_envelope(bad, f.temps[0].secret_key), std::nullopt);
    bad = env;
    bad.ciphertext.pop_back();
    EXPECT_EQ(open_envelope(bad, f.temps[0].secret_key), std::nullopt);
}

TEST(Seal, CiphertextHidesValue) {
    Fixture f;
    const auto a = f.envelope(0, 1.0, 5);
    const auto b = f.envelope(0, 2.0, 5);
    EXPECT_NE(a.ciphertext, b.ciphertext);
    const std::uint64_t plain = std::bit_cast<std::uint64_t>(1.0);
    EXPECT_NE(load_be64(a.ciphertext), plain);
}

TEST(Seal, RejectsForgedAttestationOrClaim) {
    Fixture f;
    const RingPriority c = f.claim(0);
    const std::size_t src = assign_data_source(c, 2);
    const SourceAttestation a = attest(f.source_keys[src], f.directory.sources[src].first, 7.0, 1);
    EXPECT_THROW(seal_feedback(f.temps[0], f.id(0), 8.0, 1, a, f.source_keys[src].public_key, c, f.ctx(0)),
                 ContractViolation);
    EXPECT_THROW(seal_feedback(f.temps[0], f.id(1), 7.0, 1, a, f.source_keys[src].public_key, c, f.ctx(0)),
                 ContractViolation);
    EXPECT_THROW(seal_feedback(f.temps[0], f.id(0), 7.0, 1, a, f.source_keys[1 - src].public_key, c, f.ctx(0)),
                 ContractViolation);
}

TEST(Envelope, ValidationOnReceipt) {
    Fixture f;
    const auto env = f.envelope(1, 3.0, 9);
    EXPECT_TRUE(validate_envelope(env, f.ctx(1)));
    EXPECT_FALSE(validate_envelope(env, f.ctx(0)));
    auto bad = env;
    bad.partial_signature[0] ^= 1;
    EXPECT_FALSE(validate_envelope(bad, f.ctx(1)));
    bad = env;
    bad.event_id = to_bytes("other");
    EXPECT_FALSE(validate_envelope(bad, f.ctx(1)));
    bad = env;
    bad.priority_claim.distance += 1;
    EXPECT_FALSE(validate_envelope(bad, f.ctx(1)));
}

TEST(GroupSignature, NeedsThresholdDistinctSubmitters) {
    Fixture f;
    std::vector<FeedbackEnvelope> envs{f.envelope(0, 1.0, 1), f.envelope(0, 1.0, 2)};
    EXPECT_EQ(try_form_group_signature(envs, 2), std::nullopt);
    envs.push_back(f.envelope(1, 2.0, 3));
    const auto gs = try_form_group_signature(envs, 2);
    ASSERT_TRUE(gs);
    EXPECT_EQ(gs->contributing_nodes.size(), 2u);
    EXPECT_TRUE(verify_group_signature(f.escrow, envs, *gs));
    auto forged = *gs;
    forged.signature[0] ^= 1;
    EXPECT_FALSE(verify_group_signature(f.escrow, envs, forged));
    forged = *gs;
    forged.contributing_nodes.push_back(forged.contributing_nodes.front());
    EXPECT_FALSE(verify_group_signature(f.escrow, envs, forged));
    EXPECT_THROW(try_form_group_signature(envs, 0), ContractViolation);
}

TEST(GroupSignature, ContributorsInPriorityOrder) {
    Fixture f;
    std::vector<FeedbackEnvelope> envs{f.envelope(0, 1.0, 1), f.envelope(1, 1.0, 1), f.envelope(2, 1.0, 1)};
    const auto gs = try_form_group_signature(envs, 3);
    ASSERT_TRUE(gs);
    for (std::size_t i = 1; i < gs->contributing_nodes.size(); ++i) {
        const auto& a = *std::find_if(envs.begin(), envs.end(), [&](auto& e) { return e.submitter == gs->contributing_nodes[i - 1]; });
        const auto& b = *std::find_if(envs.begin(), envs.end(), [&](auto& e) { return e.submitter == gs->contributing_nodes[i]; });
        EXPECT_LT(a.priority_claim.distance, b.priority_claim.distance);
    }
}

TEST(Reveal, DecryptsClassifiesAndAudits) {
    Fixture f;
    std::vector<FeedbackEnvelope> envs{f.envelope(0, 10.0, 1), f.envelope(1, 11.0, 2), f.envelope(2, 12.0, 3)};
    const auto gs = try_form_group_signature(envs, 3);
    ASSERT_TRUE(gs);
    std::map<NodeId, Bytes> keys{{f.id(0), f.temps[0].secret_key}, {f.id(1), f.temps[2].secret_key}};
    InformationFlowAudit audit;
    audit.record(10, "q-col", AuditKind::GroupSignature, "");
    const auto out = reveal_and_decrypt(envs, *gs, keys, f.escrow, f.directory, &audit, 20);
    ASSERT_EQ(out.results.size(), 1u);
    EXPECT_EQ(out.results[0].node_id, f.id(0));
    EXPECT_EQ(out.results[0].value, 10.0);
    EXPECT_EQ(out.malformed, std::vector<NodeId>{f.id(1)});
    EXPECT_EQ(out.withheld, std::vector<NodeId>{f.id(2)});
    EXPECT_EQ(audit.violations(), 0u);
}

TEST(Reveal, WrongSourceIsMalformed) {
    Fixture f;
    auto env = f.envelope(0, 10.0, 1);
    const std::size_t src = assign_data_source(env.priority_claim, 2);
    // Attested by the other source: signature valid, assignment wrong.
    const auto other = attest(f.source_keys[1 - src], f.directory.sources[1 - src].first, 10.0, 1);
    env.source_proof = AttestationTag{other.source_id, other.issued_at, other.signature};
    std::vector<FeedbackEnvelope> envs{env};
    const auto gs = try_form_group_signature(envs, 1);
    const auto out = reveal_and_decrypt(envs, *gs, {{f.id(0), f.temps[0].secret_key}}, f.escrow, f.directory);
    EXPECT_TRUE(out.results.empty());
    EXPECT_EQ(out.malformed.size(), 1u);
}

TEST(Audit, ReadBeforeGroupSignatureIsViolation) {
    InformationFlowAudit audit;
    audit.record(5, "e", AuditKind::PlaintextRead, "a");
    audit.record(6, "e", AuditKind::GroupSignature, "");
    audit.record(7, "e", AuditKind::PlaintextRead, "b");
    audit.record(8, "f", AuditKind::PlaintextRead, "c");
    EXPECT_EQ(audit.violations(), 2u);
}

TEST(CollectionState, AddRules) {
    Fixture f;
    CollectionState st(f.anchor.event_id, 2);
    EXPECT_EQ(st.add(f.envelope(0, 1.0, 1)), CollectionState::AddStatus::Accepted);
    EXPECT_EQ(st.add(f.envelope(0, 1.0, 2)), CollectionState::AddStatus::Duplicate);
    auto wrong = f.envelope(1, 1.0, 1);
    wrong.event_id = to_bytes("x");
    EXPECT_EQ(st.add(wrong), CollectionState::AddStatus::WrongEvent);
    EXPECT_FALSE(st.threshold_met());
    EXPECT_EQ(st.try_group_signature(), std::nullopt);
    EXPECT_TRUE(st.try_group_signature(1));
    EXPECT_EQ(st.add(f.envelope(1, 1.0, 3)), CollectionState::AddStatus::Accepted);
    EXPECT_TRUE(st.threshold_met());
    st.close();
    EXPECT_EQ(st.add(f.envelope(2, 1.0, 4)), CollectionState::AddStatus::Closed);
    EXPECT_EQ(st.distinct_submitters(), 2u);
    EXPECT_THROW(CollectionState(f.anchor.event_id, 0), ContractViolation);
}

TEST(Envelope, CanonicalEncodingIsStable) {
    Fixture f;
    const auto a = f.envelope(2, 4.5, 77);
    EXPECT_EQ(a.canonical(), f.envelope(2, 4.5, 77).canonical());
    auto b = a;
    b.timestamp += 1;
    EXPECT_NE(a.canonical(), b.canonical());
}

TEST(Seal, SameValueDifferentTempKeysDiffer) {
    Fixture f;
    const RingPriority c = f.claim(0);
    const std::size_t src = assign_data_source(c, 2);
    const SourceAttestation a = attest(f.source_keys[src], f.directory.sources[src].first, 3.0, 1);
    const auto x = seal_feedback(f.temps[0], f.id(0), 3.0, 1, a, f.source_keys[src].public_key, c, f.ctx(0));
    const auto y = seal_feedback(f.temps[1], f.id(0), 3.0, 1, a, f.source_keys[src].public_key, c, f.ctx(0));
    EXPECT_NE(x.ciphertext, y.ciphertext);
    EXPECT_EQ(open_envelope(x, f.temps[0].secret_key), 3.0);
    EXPECT_EQ(open_envelope(y, f.temps[1].secret_key), 3.0);
}

}  // namespace

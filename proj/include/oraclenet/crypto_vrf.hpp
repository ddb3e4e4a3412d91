// Verifiable randomness primitives: the (setup, generate, verify) triad,
// deterministic signatures built on it, and the ring hash H.
//
// The VRF is a keyed-hash construction. Public verification is delegated to a
// KeyEscrow, a simulation-level oracle that maps public keys back to the
// secret keys it enrolled. Callers only see the setup/generate/verify
// surface, so an elliptic-curve VRF can replace this file without touching
// them.

#pragma once

#include "oraclenet/common.hpp"

#include <openssl/evp.h>

#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>

namespace oraclenet {

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(std::span<const std::uint8_t> data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
        throw std::runtime_error("EVP_Digest(sha256) failed");
    }
    return out;
}

inline std::uint64_t load_be64(std::span<const std::uint8_t> data) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | data[i];
    return v;
}

inline constexpr std::size_t kSecretKeySize = 32;

struct KeyPair {
    Bytes secret_key;
    Bytes public_key;

    bool operator==(const KeyPair&) const = default;
};

struct VrfOutput {
    std::uint64_t value = 0;
    Bytes proof;

    bool operator==(const VrfOutput&) const = default;

    /// value (8 bytes, big-endian) followed by the proof bytes.
    Bytes to_bytes() const { return ByteWriter{}.u64(value).raw(proof).bytes(); }
};

inline Bytes derive_public_key(std::span<const std::uint8_t> secret_key) {
    const Digest d = sha256(ByteWriter{}.raw("oraclenet.pk").raw(secret_key).bytes());
    return Bytes(d.begin(), d.end());
}

inline KeyPair vrf_setup(std::uint64_t rng_seed) {
    const Digest d = sha256(ByteWriter{}.raw("oraclenet.sk").u64(rng_seed).bytes());
    KeyPair kp;
    kp.secret_key = Bytes(d.begin(), d.end());
    kp.public_key = derive_public_key(kp.secret_key);
    return kp;
}

inline VrfOutput vrf_generate(std::span<const std::uint8_t> secret_key, std::span<const std::uint8_t> input) {
    if (secret_key.size() != kSecretKeySize) {
        throw ContractViolation("vrf_generate: malformed secret key");
    }
    ByteWriter w;
    w.raw(secret_key).raw(input);
    const Digest y = sha256(w.bytes());
    w.raw("proof");
    const Digest pi = sha256(w.bytes());
    return VrfOutput{load_be64(y), Bytes(pi.begin(), pi.end())};
}

/// Stand-in for public verifiability: remembers which secret key backs each
/// enrolled public key. Thread-safe.
class KeyEscrow {
public:
    void enroll(const KeyPair& kp) {
        std::unique_lock lock(mutex_);
        keys_.insert_or_assign(kp.public_key, kp.secret_key);
    }

    void retire(const Bytes& public_key) {
        std::unique_lock lock(mutex_);
        keys_.erase(public_key);
    }

    std::optional<Bytes> secret_for(const Bytes& public_key) const {
        std::shared_lock lock(mutex_);
        auto it = keys_.find(public_key);
        if (it == keys_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return keys_.size();
    }

private:
    mutable std::shared_mutex mutex_;
    std::map<Bytes, Bytes> keys_;
};

inline bool vrf_verify(const KeyEscrow& escrow, const Bytes& public_key, std::span<const std::uint8_t> input,
                       const VrfOutput& output) {
    const auto sk = escrow.secret_for(public_key);
    if (!sk || sk->size() != kSecretKeySize || derive_public_key(*sk) != public_key) return false;
    return vrf_generate(*sk, input) == output;
}

/// Deterministic, verifiable signature: the serialized VRF output over msg.
inline Bytes sign(std::span<const std::uint8_t> secret_key, std::span<const std::uint8_t> msg) {
    return vrf_generate(secret_key, msg).to_bytes();
}

inline bool verify_signature(const KeyEscrow& escrow, const Bytes& public_key, std::span<const std::uint8_t> msg,
                             std::span<const std::uint8_t> signature) {
    if (signature.size() != 8 + 32) return false;
    VrfOutput out{load_be64(signature), Bytes(signature.begin() + 8, signature.end())};
    return vrf_verify(escrow, public_key, msg, out);
}

/// H: byte string -> coordinate on the 2^64 ring.
inline std::uint64_t hash_to_ring(std::span<const std::uint8_t> data) {
    return load_be64(sha256(data));
}

}  // namespace oraclenet

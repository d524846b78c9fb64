#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "vsl/backend.hpp"
#include "vsl/sha256.hpp"

namespace vsl {

enum class MessageKind : std::uint8_t { smashed_forward = 1, gradient_backward = 2 };

std::string_view to_string(MessageKind k);

/// One cut-layer message. The payload is the smashed batch (forward) or the
/// returned gradient batch (backward); statement and proof are absent in the
/// baseline modes.
struct RoundMessage {
  MessageKind kind = MessageKind::smashed_forward;
  std::uint32_t sender = 0;
  std::uint64_t round = 0;
  Eigen::MatrixXd payload;
  double loss = 0.0;  // backward only
  std::optional<Statement> statement;
  std::optional<Proof> proof;
  std::optional<Digest> canary;  // digest of the canary activations, when enabled

  Digest payload_digest() const;
};

/// row count ∥ column count ∥ row-major LE binary64 values.
Bytes encode_matrix(const Eigen::MatrixXd& m);
Eigen::MatrixXd decode_matrix(ByteView bytes);

/// JSON envelope plus binary attachments keyed by their SHA-256 (hex).
struct WireMessage {
  nlohmann::json envelope;
  std::map<std::string, Bytes> attachments;

  std::size_t size_bytes() const;
};

WireMessage to_wire(const RoundMessage& msg);
/// Throws DecodeError when an attachment is missing or does not hash to its key.
RoundMessage from_wire(const WireMessage& wire);

/// Deterministic byte string covering every field; the ledger records its hash.
Bytes canonical_encoding(const RoundMessage& msg);

}  // namespace vsl

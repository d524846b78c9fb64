#include "vsl/message.hpp"

#include "vsl/error.hpp"

namespace vsl {
namespace {

std::string attach(WireMessage& wire, Bytes bytes) {
  std::string key = to_hex(sha256(bytes));
  wire.attachments.emplace(key, std::move(bytes));
  return key;
}

const Bytes& attachment(const WireMessage& wire, const std::string& key) {
  const auto it = wire.attachments.find(key);
  if (it == wire.attachments.end()) throw DecodeError("missing attachment " + key);
  if (to_hex(sha256(it->second)) != key) throw DecodeError("attachment digest mismatch");
  return it->second;
}

}  // namespace

std::string_view to_string(MessageKind k) {
  return k == MessageKind::smashed_forward ? "smashed-forward" : "gradient-backward";
}

Bytes encode_matrix(const Eigen::MatrixXd& m) {
  ByteWriter w;
  w.u64(static_cast<std::uint64_t>(m.rows()));
  w.u64(static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
  }
  return std::move(w).take();
}

Eigen::MatrixXd decode_matrix(ByteView bytes) {
  ByteReader r(bytes);
  const auto rows = r.u64();
  const auto cols = r.u64();
  if (rows > (1u << 24) || cols > (1u << 24) || rows * cols * 8 != r.remaining()) {
    throw DecodeError("matrix shape does not match its data");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
  }
  return m;
}

Digest RoundMessage::payload_digest() const { return sha256(encode_matrix(payload)); }

std::size_t WireMessage::size_bytes() const {
  std::size_t n = envelope.dump().size();
  for (const auto& [k, v] : attachments) n += v.size();
  return n;
}

WireMessage to_wire(const RoundMessage& msg) {
  WireMessage wire;
  auto& e = wire.envelope;
  e["kind"] = std::string(to_string(msg.kind));
  e["sender"] = msg.sender;
  e["round"] = msg.round;
  e["payload"] = attach(wire, encode_matrix(msg.payload));
  if (msg.kind == MessageKind::gradient_backward) e["loss"] = msg.loss;
  if (msg.statement) e["statement"] = attach(wire, msg.statement->encode());
  if (msg.proof) {
    e["proof"] = attach(wire, encode(*msg.proof));
    e["proof_backend"] = std::string(to_string(msg.proof->backend));
    e["statement_digest"] = to_hex(msg.proof->statement_digest);
  }
  if (msg.canary) e["canary"] = to_hex(*msg.canary);
  return wire;
}

RoundMessage from_wire(const WireMessage& wire) {
  const auto& e = wire.envelope;
  RoundMessage msg;
  try {
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "smashed-forward") {
      msg.kind = MessageKind::smashed_forward;
    } else if (kind == "gradient-backward") {
      msg.kind = MessageKind::gradient_backward;
    } else {
      throw DecodeError("unknown message kind " + kind);
    }
    msg.sender = e.at("sender").get<std::uint32_t>();
    msg.round = e.at("round").get<std::uint64_t>();
    msg.payload = decode_matrix(attachment(wire, e.at("payload").get<std::string>()));
    if (e.contains("loss")) msg.loss = e.at("loss").get<double>();
    if (e.contains("statement")) {
      msg.statement = Statement::decode(attachment(wire, e.at("statement").get<std::string>()));
    }
    if (e.contains("proof")) {
      const auto& bytes = attachment(wire, e.at("proof").get<std::string>());
      msg.proof = decode_proof(bytes);
    }
    if (e.contains("canary")) msg.canary = digest_from_hex(e.at("canary").get<std::string>());
  } catch (const nlohmann::json::exception& ex) {
    throw DecodeError(std::string("malformed envelope: ") + ex.what());
  }
  return msg;
}

Bytes canonical_encoding(const RoundMessage& msg) {
  ByteWriter w;
  w.u8(kEncodingVersion);
  w.u8(static_cast<std::uint8_t>(msg.kind));
  w.u32(msg.sender);
  w.u64(msg.round);
  w.f64(msg.kind == MessageKind::gradient_backward ? msg.loss : 0.0);
  w.bytes(view(msg.payload_digest()));
  w.u8(msg.statement ? 1 : 0);
  if (msg.statement) w.bytes(view(msg.statement->digest()));
  w.u8(msg.proof ? 1 : 0);
  if (msg.proof) w.bytes(view(sha256(encode(*msg.proof))));
  w.u8(msg.canary ? 1 : 0);
  if (msg.canary) w.bytes(view(*msg.canary));
  return std::move(w).take();
}

}  // namespace vsl

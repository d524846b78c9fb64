#include <algorithm>
#include <string>

#include "vsl/circuit.hpp"
#include "vsl/error.hpp"

namespace vsl {
namespace {

constexpr std::uint8_t kCircuitFormat = 1;

void write_quant(ByteWriter& w, const QuantParams& p) {
  w.i64(p.scale_exp);
  w.i64(p.zero_point);
  w.f64(p.eps);
  w.i64(p.q_min);
  w.i64(p.q_max);
}

QuantParams read_quant(ByteReader& r) {
  QuantParams p;
  p.scale_exp = static_cast<int>(r.i64());
  p.zero_point = r.i64();
  p.eps = r.f64();
  p.q_min = r.i64();
  p.q_max = r.i64();
  return p;
}

void write_lc(ByteWriter& w, const LinearCombination& lc) {
  w.u32(static_cast<std::uint32_t>(lc.size()));
  for (const auto& t : lc) {
    w.u32(t.var);
    const auto b = t.coeff.to_bytes_le();
    w.bytes(b);
  }
}

std::string i128_to_string(__int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string s;
  while (u != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

// Small coefficients print signed, so -1 reads as "-1" rather than P - 1.
std::string coeff_string(const Fr& c) {
  return c.fits_i128() ? i128_to_string(c.to_i128()) : c.to_decimal();
}

nlohmann::json lc_json(const LinearCombination& lc) {
  auto out = nlohmann::json::array();
  for (const auto& t : lc) out.push_back({t.var, coeff_string(t.coeff)});
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const CircuitConstants& c) {
  j = {{"eta", c.eta}, {"k", c.k}, {"u", c.u}, {"u_prime", c.u_prime}, {"w", c.w},
       {"w_prime", c.w_prime}};
}

void from_json(const nlohmann::json& j, CircuitConstants& c) {
  c.eta = j.at("eta").get<unsigned>();
  c.k = j.at("k").get<QuantParams>();
  c.u = j.at("u").get<QuantParams>();
  c.u_prime = j.at("u_prime").get<QuantParams>();
  c.w = j.at("w").get<QuantParams>();
  c.w_prime = j.at("w_prime").get<QuantParams>();
}

Bytes encode_r1cs(const ConstraintSystem& cs) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(cs.num_public));
  w.u32(static_cast<std::uint32_t>(cs.num_private));
  w.u32(static_cast<std::uint32_t>(cs.constraints.size()));
  for (const auto& c : cs.constraints) {
    write_lc(w, c.a);
    write_lc(w, c.b);
    write_lc(w, c.c);
  }
  return std::move(w).take();
}

Bytes encode_circuit(const ConstraintSystem& cs) {
  ByteWriter w;
  w.u8(kCircuitFormat);
  w.u8(static_cast<std::uint8_t>(cs.kind));
  w.u64(cs.m);
  w.u64(cs.n);
  w.u32(cs.constants.eta);
  for (const auto* p : {&cs.constants.k, &cs.constants.u, &cs.constants.u_prime, &cs.constants.w,
                        &cs.constants.w_prime}) {
    write_quant(w, *p);
  }
  w.bytes(encode_r1cs(cs));
  return std::move(w).take();
}

ConstraintSystem decode_circuit(ByteView bytes) {
  ByteReader r(bytes);
  if (r.u8() != kCircuitFormat) throw DecodeError("unsupported circuit format version");
  const std::uint8_t kind = r.u8();
  const auto m = r.u64();
  const auto n = r.u64();
  CircuitConstants c;
  c.eta = r.u32();
  c.k = read_quant(r);
  c.u = read_quant(r);
  c.u_prime = read_quant(r);
  c.w = read_quant(r);
  c.w_prime = read_quant(r);
  // Reject absurd widths before allocating anything.
  if (m > (1u << 20) || n > 64) throw DecodeError("circuit dimensions out of range");

  ConstraintSystem cs;
  try {
    switch (kind) {
      case static_cast<std::uint8_t>(CircuitKind::empty): cs = build_empty_circuit(); break;
      case static_cast<std::uint8_t>(CircuitKind::aggregation):
        cs = build_aggregation_circuit(m, n, c);
        break;
      case static_cast<std::uint8_t>(CircuitKind::update): cs = build_update_circuit(m, c); break;
      case static_cast<std::uint8_t>(CircuitKind::cut_update):
        cs = build_cut_update_circuit(m, c);
        break;
      default: throw DecodeError("unknown circuit kind");
    }
  } catch (const CircuitError& e) {
    throw DecodeError(std::string("invalid circuit header: ") + e.what());
  }
  const Bytes expected = encode_r1cs(cs);
  const ByteView rest = r.bytes(r.remaining());
  if (!std::equal(rest.begin(), rest.end(), expected.begin(), expected.end())) {
    throw DecodeError("circuit body does not match its header");
  }
  return cs;
}

Digest circuit_digest(const ConstraintSystem& cs) { return sha256(encode_circuit(cs)); }

nlohmann::json circuit_to_json(const ConstraintSystem& cs) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(cs.kind));
  j["m"] = cs.m;
  j["n"] = cs.n;
  j["constants"] = cs.constants;
  j["num_public"] = cs.num_public;
  j["num_private"] = cs.num_private;
  j["num_constraints"] = cs.constraints.size();
  j["digest"] = to_hex(circuit_digest(cs));

  auto blocks = nlohmann::json::array();
  for (const auto& b : cs.blocks) {
    blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"count", b.count},
                      {"public", b.offset <= cs.num_public}});
  }
  j["blocks"] = std::move(blocks);

  auto vars = nlohmann::json::array();
  for (std::size_t i = 0; i < cs.num_variables(); ++i) vars.push_back(cs.variable_name(i));
  j["variables"] = std::move(vars);

  auto constraints = nlohmann::json::array();
  for (const auto& c : cs.constraints) {
    constraints.push_back({{"a", lc_json(c.a)}, {"b", lc_json(c.b)}, {"c", lc_json(c.c)}});
  }
  j["constraints"] = std::move(constraints);
  return j;
}

Bytes encode_witness(const Witness& w) {
  ByteWriter out;
  out.u32(static_cast<std::uint32_t>(w.values.size()));
  for (const auto& v : w.values) {
    const auto b = v.to_bytes_le();
    out.bytes(b);
  }
  return std::move(out).take();
}

Witness decode_witness(ByteView bytes, std::size_t num_public) {
  ByteReader r(bytes);
  const auto count = r.u32();
  if (static_cast<std::size_t>(count) * Fr::kBytes != r.remaining()) {
    throw DecodeError("witness length does not match its prefix");
  }
  if (count < 1 + num_public) throw DecodeError("witness shorter than its statement");
  Witness w;
  w.num_public = num_public;
  w.values.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) w.values.push_back(Fr::from_bytes_le(r.bytes(Fr::kBytes)));
  return w;
}

}  // namespace vsl

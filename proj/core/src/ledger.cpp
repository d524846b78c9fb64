#include "vsl/ledger.hpp"

#include <chrono>
#include <fstream>

#include <json.hpp>

#include "vsl/error.hpp"

namespace vsl {
namespace {

void put_be(std::uint8_t* out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * (width - 1 - i)));
}

}  // namespace

Digest block_hash(std::uint64_t index, const Digest& prev, const Digest& payload,
                  std::uint64_t timestamp_ms, std::uint32_t sender) {
  std::uint8_t idx[8], ts[8], snd[4];
  put_be(idx, index, 8);
  put_be(ts, timestamp_ms, 8);
  put_be(snd, sender, 4);
  return sha256({ByteView(idx), view(prev), view(payload), ByteView(ts), ByteView(snd)});
}

Block genesis_block() {
  Block b;
  b.hash = block_hash(0, b.prev, b.payload, 0, 0);
  return b;
}

std::uint64_t system_clock_ms() {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(
      duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
}

Chain::Chain(Clock clock) : blocks_{genesis_block()}, clock_(std::move(clock)) {}

Chain::Chain(std::vector<Block> blocks, Clock clock)
    : blocks_(std::move(blocks)), clock_(std::move(clock)) {
  if (blocks_.empty()) blocks_.push_back(genesis_block());
}

const Block& Chain::append(const Digest& payload, std::uint32_t sender) {
  Block b;
  b.index = blocks_.size();
  b.prev = blocks_.back().hash;
  b.payload = payload;
  b.timestamp_ms = clock_();
  b.sender = sender;
  b.hash = block_hash(b.index, b.prev, b.payload, b.timestamp_ms, b.sender);
  blocks_.push_back(b);
  return blocks_.back();
}

bool verify_chain(std::span<const Block> blocks) {
  if (blocks.empty() || blocks.front() != genesis_block()) return false;
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    if (b.index != i || b.prev != blocks[i - 1].hash) return false;
    if (b.hash != block_hash(b.index, b.prev, b.payload, b.timestamp_ms, b.sender)) return false;
  }
  return true;
}

void save_chain(const std::string& path, std::span<const Block> blocks) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& b : blocks) {
    const nlohmann::json j = {{"index", b.index},         {"prev", to_hex(b.prev)},
                              {"payload", to_hex(b.payload)}, {"timestamp_ms", b.timestamp_ms},
                              {"sender", b.sender},        {"hash", to_hex(b.hash)}};
    out << j.dump() << '\n';
  }
  if (!out) throw Error("cannot write " + path);
}

std::vector<Block> load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::vector<Block> blocks;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Block b;
      b.index = j.at("index").get<std::uint64_t>();
      b.prev = digest_from_hex(j.at("prev").get<std::string>());
      b.payload = digest_from_hex(j.at("payload").get<std::string>());
      b.timestamp_ms = j.at("timestamp_ms").get<std::uint64_t>();
      b.sender = j.at("sender").get<std::uint32_t>();
      b.hash = digest_from_hex(j.at("hash").get<std::string>());
      blocks.push_back(b);
    } catch (const nlohmann::json::exception& e) {
      throw DecodeError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return blocks;
}

}  // namespace vsl

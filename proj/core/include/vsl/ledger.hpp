#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vsl/sha256.hpp"

namespace vsl {

struct Block {
  std::uint64_t index = 0;
  Digest prev{};
  Digest payload{};
  std::uint64_t timestamp_ms = 0;
  std::uint32_t sender = 0;
  Digest hash{};

  bool operator==(const Block&) const = default;
};

/// SHA-256(index BE8 ∥ prev ∥ payload ∥ timestamp BE8 ∥ sender BE4).
Digest block_hash(std::uint64_t index, const Digest& prev, const Digest& payload,
                  std::uint64_t timestamp_ms, std::uint32_t sender);

/// Index 0 with every field zero and its hash computed like any other block.
Block genesis_block();

using Clock = std::function<std::uint64_t()>;
/// Milliseconds since the Unix epoch.
std::uint64_t system_clock_ms();

/// Append-only hash chain. Appends do not look at what they record.
class Chain {
 public:
  explicit Chain(Clock clock = system_clock_ms);
  /// Adopts existing blocks as-is; call verify_chain to check them.
  Chain(std::vector<Block> blocks, Clock clock);

  const Block& append(const Digest& payload, std::uint32_t sender);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  const Block& head() const { return blocks_.back(); }

 private:
  std::vector<Block> blocks_;
  Clock clock_;
};

bool verify_chain(std::span<const Block> blocks);
inline bool verify_chain(const Chain& chain) { return verify_chain(chain.blocks()); }

/// One JSON object per line with hex digests.
void save_chain(const std::string& path, std::span<const Block> blocks);
std::vector<Block> load_chain(const std::string& path);

}  // namespace vsl

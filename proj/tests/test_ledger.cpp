#include <random>

#include <gtest/gtest.h>

#include "ledger_mutation.hpp"
#include "vsl/error.hpp"
#include "vsl/ledger.hpp"
#include "vsl/sha256.hpp"

using namespace vsl;

namespace {

Clock counter_clock() {
  return [t = std::uint64_t{1000}]() mutable { return t++; };
}

Digest payload_for(int i) {
  const std::string s = "message " + std::to_string(i);
  return sha256(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Chain make_chain(std::size_t n) {
  Chain chain(counter_clock());
  for (std::size_t i = 0; i < n; ++i) chain.append(payload_for(static_cast<int>(i)), static_cast<std::uint32_t>(i % 3));
  return chain;
}

void put_be(Bytes& out, std::uint64_t v, int bytes) {
  for (int i = bytes - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

TEST(Sha256, KnownVectors) {
  const std::string abc = "abc";
  EXPECT_EQ(to_hex(sha256(ByteView(reinterpret_cast<const std::uint8_t*>(abc.data()), 3))),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(to_hex(sha256(ByteView{})),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const Bytes a = {'a'}, bc = {'b', 'c'};
  EXPECT_EQ(sha256({a, bc}), sha256(ByteView(reinterpret_cast<const std::uint8_t*>(abc.data()), 3)));
}

TEST(Block, HashCoversBigEndianPreimage) {
  const Digest prev = payload_for(1), payload = payload_for(2);
  Bytes pre;
  put_be(pre, 7, 8);
  pre.insert(pre.end(), prev.begin(), prev.end());
  pre.insert(pre.end(), payload.begin(), payload.end());
  put_be(pre, 123456789, 8);
  put_be(pre, 0xdeadbeef, 4);
  EXPECT_EQ(block_hash(7, prev, payload, 123456789, 0xdeadbeef), sha256(pre));
}

TEST(Chain, GenesisAndLinks) {
  const auto g = genesis_block();
  EXPECT_EQ(g.index, 0u);
  EXPECT_EQ(g.hash, block_hash(0, Digest{}, Digest{}, 0, 0));
  const auto chain = make_chain(5);
  ASSERT_EQ(chain.size(), 6u);
  EXPECT_EQ(chain.blocks()[0], g);
  for (std::size_t i = 1; i < chain.size(); ++i) {
    EXPECT_EQ(chain.blocks()[i].prev, chain.blocks()[i - 1].hash);
    EXPECT_EQ(chain.blocks()[i].index, i);
  }
  EXPECT_EQ(chain.head().timestamp_ms, 1004u);
  EXPECT_TRUE(verify_chain(chain));
}

TEST(Chain, AnySingleBitMutationIsDetected) {
  const auto chain = make_chain(200);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    auto blocks = chain.blocks();
    const auto what = ledger_mutation::mutate(blocks, rng);
    ASSERT_FALSE(verify_chain(blocks)) << what;
  }
}

TEST(Chain, StructuralEditsAreDetected) {
  const auto chain = make_chain(10);
  auto removed = chain.blocks();
  removed.erase(removed.begin() + 4);
  EXPECT_FALSE(verify_chain(removed));
  auto swapped = chain.blocks();
  std::swap(swapped[3], swapped[4]);
  EXPECT_FALSE(verify_chain(swapped));
  auto no_genesis = chain.blocks();
  no_genesis.erase(no_genesis.begin());
  EXPECT_FALSE(verify_chain(no_genesis));
  EXPECT_FALSE(verify_chain(std::span<const Block>{}));
  // A rewritten block with a recomputed hash still breaks the next link.
  auto rewritten = chain.blocks();
  auto& b = rewritten[5];
  b.payload[0] ^= 1;
  b.hash = block_hash(b.index, b.prev, b.payload, b.timestamp_ms, b.sender);
  EXPECT_FALSE(verify_chain(rewritten));
}

TEST(Chain, AdoptedBlocksKeepAppending) {
  const auto chain = make_chain(3);
  Chain resumed(chain.blocks(), counter_clock());
  resumed.append(payload_for(99), 4);
  EXPECT_TRUE(verify_chain(resumed));
  EXPECT_EQ(resumed.head().index, 4u);
}

TEST(Chain, SaveLoadRoundTrip) {
  const auto chain = make_chain(20);
  const auto path = ::testing::TempDir() + "/ledger_roundtrip.jsonl";
  save_chain(path, chain.blocks());
  const auto back = load_chain(path);
  EXPECT_EQ(back, chain.blocks());
  EXPECT_TRUE(verify_chain(back));
  EXPECT_THROW(load_chain(::testing::TempDir() + "/does-not-exist.jsonl"), Error);
}

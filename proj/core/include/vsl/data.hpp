#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vsl/nn.hpp"

namespace vsl {

/// Gaussian class blobs, drawn once into a fixed-capacity pool and split
/// into per-client shards by a seeded shuffle. Shard i depends only on the
/// spec, never on how many clients take part in a run.
struct SyntheticSpec {
  std::size_t input_dim = 16;
  std::size_t num_classes = 2;
  std::size_t samples_per_client = 128;
  std::size_t max_clients = 32;
  double separation = 3.0;
  double noise = 1.0;
  std::uint64_t seed = 7;
};

std::vector<Batch> make_client_shards(const SyntheticSpec& spec, std::size_t num_clients);

/// Rows [index * batch_size, (index + 1) * batch_size) of the shard, wrapping
/// around its end.
Batch batch_slice(const Batch& shard, std::size_t index, std::size_t batch_size);

/// A batch drawn independently of the shards, used for canary checks and evaluation.
Batch make_reference_batch(const SyntheticSpec& spec, std::size_t size, std::uint64_t salt);

}  // namespace vsl

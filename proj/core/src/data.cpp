#include "vsl/data.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "vsl/error.hpp"

namespace vsl {
namespace {

Eigen::MatrixXd class_means(const SyntheticSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd means(static_cast<Eigen::Index>(spec.num_classes),
                        static_cast<Eigen::Index>(spec.input_dim));
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    Eigen::VectorXd v(means.cols());
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = dist(rng);
    means.row(c) = (spec.separation / v.norm()) * v.transpose();
  }
  return means;
}

Batch draw(const SyntheticSpec& spec, std::size_t n, std::uint64_t stream) {
  const Eigen::MatrixXd means = class_means(spec);
  std::mt19937_64 rng(spec.seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  std::normal_distribution<double> noise(0.0, spec.noise);
  Batch b;
  b.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.input_dim));
  b.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % spec.num_classes);
    b.y[i] = label;
    for (Eigen::Index k = 0; k < b.x.cols(); ++k) {
      b.x(static_cast<Eigen::Index>(i), k) = means(label, k) + noise(rng);
    }
  }
  return b;
}

void check(const SyntheticSpec& spec) {
  if (spec.input_dim == 0 || spec.num_classes < 2 || spec.samples_per_client == 0 ||
      spec.max_clients == 0) {
    throw ShapeError("invalid synthetic data spec");
  }
}

}  // namespace

std::vector<Batch> make_client_shards(const SyntheticSpec& spec, std::size_t num_clients) {
  check(spec);
  if (num_clients == 0 || num_clients > spec.max_clients) {
    throw ShapeError("client count outside [1, max_clients]");
  }
  const std::size_t pool_size = spec.samples_per_client * spec.max_clients;
  Batch pool = draw(spec, pool_size, 0);

  std::vector<std::size_t> order(pool_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(spec.seed + 1);
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  std::vector<Batch> shards(num_clients);
  for (std::size_t c = 0; c < num_clients; ++c) {
    Batch& s = shards[c];
    s.x.resize(static_cast<Eigen::Index>(spec.samples_per_client), pool.x.cols());
    s.y.resize(spec.samples_per_client);
    for (std::size_t i = 0; i < spec.samples_per_client; ++i) {
      const std::size_t src = order[c * spec.samples_per_client + i];
      s.x.row(static_cast<Eigen::Index>(i)) = pool.x.row(static_cast<Eigen::Index>(src));
      s.y[i] = pool.y[src];
    }
  }
  return shards;
}

Batch batch_slice(const Batch& shard, std::size_t index, std::size_t batch_size) {
  if (batch_size == 0 || shard.size() == 0) throw ShapeError("empty batch request");
  Batch b;
  b.x.resize(static_cast<Eigen::Index>(batch_size), shard.x.cols());
  b.y.resize(batch_size);
  const std::size_t start = (index * batch_size) % shard.size();
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t src = (start + i) % shard.size();
    b.x.row(static_cast<Eigen::Index>(i)) = shard.x.row(static_cast<Eigen::Index>(src));
    b.y[i] = shard.y[src];
  }
  return b;
}

Batch make_reference_batch(const SyntheticSpec& spec, std::size_t size, std::uint64_t salt) {
  check(spec);
  return draw(spec, size, 1 + salt);
}

}  // namespace vsl

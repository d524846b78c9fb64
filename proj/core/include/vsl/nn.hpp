#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vsl {

/// Fully connected layer y = x W + b, with W stored (in x out).
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  std::size_t in_dim() const { return static_cast<std::size_t>(weight.rows()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weight.cols()); }
  bool operator==(const DenseLayer& o) const { return weight == o.weight && bias == o.bias; }
};

/// Layer stack. Every layer but the last applies ReLU; the last is linear.
using Params = std::vector<DenseLayer>;

std::size_t parameter_count(const Params& p);
/// Zero-valued parameters with the same shapes.
Params zeros_like(const Params& p);

struct Batch {
  Eigen::MatrixXd x;  // |B| x d
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
};

struct SmashedBatch {
  Eigen::MatrixXd z;  // |B| x m
  std::uint64_t round = 0;
  std::uint32_t client_id = 0;
};

struct GradientBatch {
  Eigen::MatrixXd g_z;  // |B| x m, dL_i/dz_i per row
  double loss = 0.0;
  std::uint64_t round = 0;
};

struct ServerStepResult {
  double loss = 0.0;  // mean per-sample cross-entropy
  Params grad;        // summed over the batch
  GradientBatch grad_z;
};

struct SplitModelSpec {
  std::size_t input_dim = 16;
  std::vector<std::size_t> client_hidden = {32};
  std::size_t cut_width = 500;
  std::vector<std::size_t> server_hidden = {32};
  std::size_t num_classes = 2;
  double lr = 0.1;
};

struct SplitModel {
  Params client;
  Params server;
  std::size_t cut_width = 0;
  double lr = 0.1;

  bool operator==(const SplitModel&) const = default;
};

/// He-normal weights, zero biases, drawn from a seeded mt19937_64.
SplitModel make_split_model(const SplitModelSpec& spec, std::uint64_t seed);

/// Throws ShapeError when the stack does not chain or the widths disagree.
void validate_split_model(const SplitModel& model);

/// z_i = f_c(x_i; w_c) for every row of the batch.
SmashedBatch client_forward(const Params& w_c, const Batch& batch);

/// Logits of the server stack for a smashed batch.
Eigen::MatrixXd server_forward(const Params& w_s, const Eigen::MatrixXd& z);

/// Row-wise softmax, shifted by each row's maximum.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits);

/// Softmax cross-entropy on the server side. Throws NumericError("numeric blowup")
/// on non-finite activations.
ServerStepResult server_step(const Params& w_s, const SmashedBatch& smashed,
                             std::span<const int> labels);

/// Chain rule through the client stack: sum over i of (d f_c / d w_c)^T g_z^(i).
Params client_backward(const Params& w_c, const Batch& batch, const Eigen::MatrixXd& g_z);

/// w <- w - lr * (1/|B|) * grads, returned as a new value.
Params sgd_step(const Params& params, const Params& grads, double lr, std::size_t batch_size);

/// Index of the cut-layer bias vector: the last client layer's bias, of length m.
const Eigen::VectorXd& cut_vector(const Params& w_c);
Eigen::VectorXd& cut_vector(Params& w_c);

/// Mean loss of the full model on a batch; convenience for evaluation.
double evaluate_loss(const SplitModel& model, const Batch& batch);

}  // namespace vsl

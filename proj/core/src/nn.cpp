#include "vsl/nn.hpp"

#include <cmath>
#include <random>

#include "vsl/error.hpp"

namespace vsl {
namespace {

struct ForwardTrace {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // x W + b for each layer
  Eigen::MatrixXd output;
};

void check_stack(const Params& p, std::size_t in_dim, const char* what) {
  if (p.empty()) throw ShapeError(std::string(what) + ": empty layer stack");
  std::size_t width = in_dim;
  for (const auto& layer : p) {
    if (layer.in_dim() != width || static_cast<std::size_t>(layer.bias.size()) != layer.out_dim()) {
      throw ShapeError(std::string(what) + ": layer shapes do not chain");
    }
    width = layer.out_dim();
  }
}

ForwardTrace forward(const Params& p, const Eigen::MatrixXd& x) {
  ForwardTrace t;
  t.inputs.reserve(p.size());
  t.pre.reserve(p.size());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < p.size(); ++l) {
    Eigen::MatrixXd z = a * p[l].weight;
    z.rowwise() += p[l].bias.transpose();
    t.inputs.push_back(std::move(a));
    a = (l + 1 < p.size()) ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
    t.pre.push_back(std::move(z));
  }
  t.output = std::move(a);
  return t;
}

// Returns parameter gradients and writes d(output)/d(input) into grad_input.
Params backward(const Params& p, const ForwardTrace& t, Eigen::MatrixXd grad_out,
                Eigen::MatrixXd* grad_input) {
  Params g(p.size());
  for (std::size_t l = p.size(); l-- > 0;) {
    if (l + 1 < p.size()) {
      grad_out = grad_out.cwiseProduct((t.pre[l].array() > 0.0).cast<double>().matrix());
    }
    g[l].weight = t.inputs[l].transpose() * grad_out;
    g[l].bias = grad_out.colwise().sum().transpose();
    if (l > 0 || grad_input != nullptr) {
      Eigen::MatrixXd next = grad_out * p[l].weight.transpose();
      if (l == 0) {
        *grad_input = std::move(next);
      } else {
        grad_out = std::move(next);
      }
    }
  }
  return g;
}

void check_same_shape(const Params& a, const Params& b) {
  if (a.size() != b.size()) throw ShapeError("parameter/gradient layer count mismatch");
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].weight.rows() != b[l].weight.rows() || a[l].weight.cols() != b[l].weight.cols() ||
        a[l].bias.size() != b[l].bias.size()) {
      throw ShapeError("parameter/gradient shape mismatch");
    }
  }
}

Params make_stack(std::size_t in_dim, const std::vector<std::size_t>& hidden, std::size_t out_dim,
                  std::mt19937_64& rng) {
  Params p;
  std::size_t width = in_dim;
  auto add = [&](std::size_t out) {
    DenseLayer layer;
    layer.weight.resize(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(out));
    layer.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out));
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(width)));
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = dist(rng);
    }
    p.push_back(std::move(layer));
    width = out;
  };
  for (auto h : hidden) add(h);
  add(out_dim);
  return p;
}

}  // namespace

std::size_t parameter_count(const Params& p) {
  std::size_t n = 0;
  for (const auto& l : p) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Params zeros_like(const Params& p) {
  Params z;
  z.reserve(p.size());
  for (const auto& l : p) {
    z.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                 Eigen::VectorXd::Zero(l.bias.size())});
  }
  return z;
}

SplitModel make_split_model(const SplitModelSpec& spec, std::uint64_t seed) {
  if (spec.input_dim == 0 || spec.cut_width == 0 || spec.num_classes < 2) {
    throw ShapeError("invalid split model spec");
  }
  if (!(spec.lr > 0.0)) throw ShapeError("learning rate must be positive");
  std::mt19937_64 rng(seed);
  SplitModel m;
  m.client = make_stack(spec.input_dim, spec.client_hidden, spec.cut_width, rng);
  m.server = make_stack(spec.cut_width, spec.server_hidden, spec.num_classes, rng);
  m.cut_width = spec.cut_width;
  m.lr = spec.lr;
  return m;
}

void validate_split_model(const SplitModel& model) {
  if (model.client.empty() || model.server.empty()) throw ShapeError("empty split model");
  check_stack(model.client, model.client.front().in_dim(), "client");
  check_stack(model.server, model.cut_width, "server");
  if (model.client.back().out_dim() != model.cut_width) {
    throw ShapeError("client output width differs from cut width");
  }
}

SmashedBatch client_forward(const Params& w_c, const Batch& batch) {
  if (w_c.empty()) throw ShapeError("client: empty layer stack");
  if (static_cast<std::size_t>(batch.x.rows()) != batch.size() || batch.size() == 0) {
    throw ShapeError("batch rows and labels disagree");
  }
  check_stack(w_c, static_cast<std::size_t>(batch.x.cols()), "client");
  SmashedBatch out;
  out.z = forward(w_c, batch.x).output;
  if (!out.z.allFinite()) throw NumericError("numeric blowup");
  return out;
}

ServerStepResult server_step(const Params& w_s, const SmashedBatch& smashed,
                             std::span<const int> labels) {
  if (w_s.empty()) throw ShapeError("server: empty layer stack");
  check_stack(w_s, static_cast<std::size_t>(smashed.z.cols()), "server");
  const auto rows = smashed.z.rows();
  if (static_cast<std::size_t>(rows) != labels.size() || rows == 0) {
    throw ShapeError("smashed rows and labels disagree");
  }
  if (!smashed.z.allFinite()) throw NumericError("numeric blowup");

  ForwardTrace t = forward(w_s, smashed.z);
  const Eigen::MatrixXd& logits = t.output;
  if (!logits.allFinite()) throw NumericError("numeric blowup");
  const auto classes = logits.cols();

  Eigen::MatrixXd probs(rows, classes);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= classes) throw ShapeError("label outside class count");
    const double mx = logits.row(i).maxCoeff();
    double denom = 0.0;
    for (Eigen::Index c = 0; c < classes; ++c) {
      probs(i, c) = std::exp(logits(i, c) - mx);
      denom += probs(i, c);
    }
    probs.row(i) /= denom;
    loss += -(logits(i, y) - mx - std::log(denom));
  }

  // dL_i/dlogits_i = softmax_i - onehot(y_i); gradients are per-sample sums.
  Eigen::MatrixXd grad_logits = probs;
  for (Eigen::Index i = 0; i < rows; ++i) grad_logits(i, labels[static_cast<std::size_t>(i)]) -= 1.0;

  ServerStepResult r;
  Eigen::MatrixXd g_z;
  r.grad = backward(w_s, t, std::move(grad_logits), &g_z);
  r.loss = loss / static_cast<double>(rows);
  if (!std::isfinite(r.loss)) throw NumericError("numeric blowup");
  r.grad_z.g_z = std::move(g_z);
  r.grad_z.loss = r.loss;
  r.grad_z.round = smashed.round;
  return r;
}

Eigen::MatrixXd server_forward(const Params& w_s, const Eigen::MatrixXd& z) {
  if (w_s.empty()) throw ShapeError("server: empty layer stack");
  check_stack(w_s, static_cast<std::size_t>(z.cols()), "server");
  return forward(w_s, z).output;
}

Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    p.row(i) = (logits.row(i).array() - logits.row(i).maxCoeff()).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Params client_backward(const Params& w_c, const Batch& batch, const Eigen::MatrixXd& g_z) {
  if (w_c.empty()) throw ShapeError("client: empty layer stack");
  check_stack(w_c, static_cast<std::size_t>(batch.x.cols()), "client");
  if (g_z.rows() != batch.x.rows() ||
      static_cast<std::size_t>(g_z.cols()) != w_c.back().out_dim()) {
    throw ShapeError("gradient shape does not match client output");
  }
  ForwardTrace t = forward(w_c, batch.x);
  return backward(w_c, t, g_z, nullptr);
}

Params sgd_step(const Params& params, const Params& grads, double lr, std::size_t batch_size) {
  check_same_shape(params, grads);
  if (!(lr > 0.0)) throw ShapeError("learning rate must be positive");
  if (batch_size == 0) throw ShapeError("batch size must be positive");
  const double step = lr / static_cast<double>(batch_size);
  Params out = params;
  for (std::size_t l = 0; l < out.size(); ++l) {
    out[l].weight -= step * grads[l].weight;
    out[l].bias -= step * grads[l].bias;
  }
  return out;
}

const Eigen::VectorXd& cut_vector(const Params& w_c) {
  if (w_c.empty()) throw ShapeError("client: empty layer stack");
  return w_c.back().bias;
}

Eigen::VectorXd& cut_vector(Params& w_c) {
  if (w_c.empty()) throw ShapeError("client: empty layer stack");
  return w_c.back().bias;
}

double evaluate_loss(const SplitModel& model, const Batch& batch) {
  return server_step(model.server, client_forward(model.client, batch), batch.y).loss;
}

}  // namespace vsl

#include "slab/qnetwork.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "slab/errors.hpp"

namespace slab {

namespace {

constexpr const char* kCheckpointFormat = "slab-qnetwork-v1";

struct Activations {
  // pre[l] / post[l]: pre- and post-activation outputs of layer l.
  std::vector<std::vector<double>> pre, post;
};

}  // namespace

QNetwork::QNetwork(std::vector<int> hidden) {
  dims_.push_back(kStateDim);
  for (int h : hidden) {
    if (h < 1) throw DomainError("QNetwork: hidden sizes must be positive");
    dims_.push_back(h);
  }
  dims_.push_back(kNumActions);
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(total);
    total += static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l + 1]) +
             static_cast<std::size_t>(dims_[l + 1]);
  }
  params_.assign(total, 0.0);
}

void QNetwork::init_random(RngStream& rng) {
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
    const std::size_t w0 = weight_offset(l);
    const std::size_t b0 = bias_offset(l);
    const std::size_t end = b0 + static_cast<std::size_t>(dims_[l + 1]);
    for (std::size_t i = w0; i < end; ++i) params_[i] = (2.0 * rng.uniform() - 1.0) * bound;
  }
}

static void run_layers(const std::vector<int>& dims, const std::vector<std::size_t>& offsets,
                       std::span<const double> p, const State& s, Activations* acts,
                       std::vector<double>& out) {
  std::vector<double> x(s.begin(), s.end());
  const std::size_t layers = dims.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<std::size_t>(dims[l]);
    const auto nout = static_cast<std::size_t>(dims[l + 1]);
    const double* w = p.data() + offsets[l];
    const double* b = w + in * nout;
    std::vector<double> z(nout);
    for (std::size_t o = 0; o < nout; ++o) {
      double acc = b[o];
      const double* row = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      z[o] = acc;
    }
    if (acts) acts->pre.push_back(z);
    if (l + 1 < layers) {
      for (double& v : z) v = std::max(v, 0.0);
    }
    if (acts) acts->post.push_back(z);
    x = std::move(z);
  }
  out = std::move(x);
}

QValues QNetwork::forward(const State& s) const {
  std::vector<double> out;
  run_layers(dims_, offsets_, params_, s, nullptr, out);
  QValues q{};
  std::copy(out.begin(), out.end(), q.begin());
  return q;
}

double huber(double err, double delta) {
  const double a = std::fabs(err);
  return a <= delta ? 0.5 * err * err : delta * (a - 0.5 * delta);
}

static double huber_grad(double err, double delta) {
  if (err > delta) return delta;
  if (err < -delta) return -delta;
  return err;
}

double QNetwork::loss(std::span<const State> states, std::span<const int> actions,
                      std::span<const double> targets, double huber_delta) const {
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const QValues q = forward(states[i]);
    total += huber(q[static_cast<std::size_t>(actions[i])] - targets[i], huber_delta);
  }
  return total / static_cast<double>(states.size());
}

double QNetwork::loss_and_gradient(std::span<const State> states, std::span<const int> actions,
                                   std::span<const double> targets, double huber_delta,
                                   std::vector<double>& grad) const {
  if (states.empty() || states.size() != actions.size() || states.size() != targets.size()) {
    throw DomainError("QNetwork::loss_and_gradient: batch must be non-empty and consistent");
  }
  grad.assign(params_.size(), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(states.size());
  const std::size_t layers = num_layers();
  double total = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    Activations acts;
    std::vector<double> out;
    run_layers(dims_, offsets_, params_, states[i], &acts, out);
    const auto a = static_cast<std::size_t>(actions[i]);
    if (a >= out.size()) throw DomainError("QNetwork::loss_and_gradient: action out of range");
    const double err = out[a] - targets[i];
    total += huber(err, huber_delta);

    // delta holds dL/dz for the current layer's pre-activation.
    std::vector<double> delta(out.size(), 0.0);
    delta[a] = huber_grad(err, huber_delta) * inv_batch;
    for (std::size_t l = layers; l-- > 0;) {
      const auto in = static_cast<std::size_t>(dims_[l]);
      const auto nout = static_cast<std::size_t>(dims_[l + 1]);
      const double* input = nullptr;
      std::vector<double> state_input;
      if (l == 0) {
        state_input.assign(states[i].begin(), states[i].end());
        input = state_input.data();
      } else {
        input = acts.post[l - 1].data();
      }
      double* gw = grad.data() + weight_offset(l);
      double* gb = grad.data() + bias_offset(l);
      const double* w = params_.data() + weight_offset(l);
      std::vector<double> prev(in, 0.0);
      for (std::size_t o = 0; o < nout; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        gb[o] += d;
        for (std::size_t j = 0; j < in; ++j) {
          gw[o * in + j] += d * input[j];
          prev[j] += d * w[o * in + j];
        }
      }
      if (l > 0) {
        const auto& z = acts.pre[l - 1];
        for (std::size_t j = 0; j < in; ++j) {
          if (z[j] <= 0.0) prev[j] = 0.0;
        }
      }
      delta = std::move(prev);
    }
  }
  return total * inv_batch;
}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
  if (m_.size() != params.size()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
    t_ = 0;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

void save_checkpoint(std::ostream& out, const QNetwork& net) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["shape"] = net.shape();
  j["params"] = std::vector<double>(net.params().begin(), net.params().end());
  out << j.dump() << '\n';
}

QNetwork load_checkpoint(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint", e.what());
  }
  std::vector<int> shape;
  std::vector<double> params;
  try {
    if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
      throw ConfigError("checkpoint.format", "expected " + std::string(kCheckpointFormat));
    }
    shape = j.at("shape").get<std::vector<int>>();
    params = j.at("params").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("checkpoint", e.what());
  }
  if (shape.size() < 2 || shape.front() != kStateDim || shape.back() != kNumActions ||
      std::any_of(shape.begin(), shape.end(), [](int d) { return d < 1; })) {
    throw ConfigError("checkpoint.shape", "must start with 2, end with 4 and be positive");
  }
  QNetwork net(std::vector<int>(shape.begin() + 1, shape.end() - 1));
  if (params.size() != net.num_params()) {
    throw ConfigError("checkpoint.params", "length does not match shape");
  }
  std::copy(params.begin(), params.end(), net.params().begin());
  return net;
}

}  // namespace slab

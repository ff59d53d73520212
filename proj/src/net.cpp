#include "nf/net.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace nf::net {

using nlohmann::json;

void Gradients::set_zero() {
  for (auto& g : dW) g.setZero();
  for (auto& g : db) g.setZero();
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.dW.size() != dW.size()) throw DimMismatch("gradient shape mismatch");
  for (std::size_t l = 0; l < dW.size(); ++l) {
    dW[l] += other.dW[l];
    db[l] += other.db[l];
  }
  return *this;
}

Gradients& Gradients::operator*=(double scale) {
  for (auto& g : dW) g *= scale;
  for (auto& g : db) g *= scale;
  return *this;
}

Mlp Mlp::he_uniform(const std::vector<int>& dims, Rng& rng,
                    std::optional<double> spectral_bound) {
  if (dims.size() < 2) throw DimMismatch("mlp needs at least two dims");
  Mlp net;
  net.dims_ = dims;
  net.spectral_bound_ = spectral_bound;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) {
        w(i, j) = rng.uniform(-limit, limit);
      }
    }
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  net.init_power_vectors();
  return net;
}

void Mlp::init_power_vectors() {
  power_u_.clear();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    // Deterministic pseudo-random start so runs are reproducible.
    Rng r(0x5eed5ull + l);
    Eigen::VectorXd u(weights_[l].rows());
    for (int i = 0; i < u.size(); ++i) u[i] = r.normal();
    power_u_.push_back(u.normalized());
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  ForwardCache cache;
  return forward(x, cache);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x,
                             ForwardCache& cache) const {
  if (x.rows() != input_dim()) {
    throw DimMismatch("forward: input dim " + std::to_string(x.rows()) +
                      ", expected " + std::to_string(input_dim()));
  }
  cache.act.clear();
  cache.act.reserve(weights_.size() + 1);
  cache.act.push_back(x);
  Eigen::MatrixXd a = x;
  const int last = num_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l < last) z = z.cwiseMax(0.0);  // ReLU on hidden layers
    cache.act.push_back(z);
    a = std::move(z);
  }
  return cache.act.back();
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

void Mlp::check_cache(const ForwardCache& cache) const {
  if (static_cast<int>(cache.act.size()) != num_layers() + 1) {
    throw StaleCache("forward cache layer count mismatch");
  }
  for (int l = 0; l <= num_layers(); ++l) {
    if (cache.act[l].rows() != dims_[l]) {
      throw StaleCache("forward cache shape mismatch at layer " +
                       std::to_string(l));
    }
  }
}

Gradients Mlp::backward(const ForwardCache& cache, const Eigen::MatrixXd& d_out,
                        Eigen::MatrixXd* d_input) const {
  check_cache(cache);
  if (d_out.rows() != output_dim() ||
      d_out.cols() != cache.act.back().cols()) {
    throw DimMismatch("backward: output gradient shape mismatch");
  }
  Gradients grads = zero_gradients();
  Eigen::MatrixXd d_pre = d_out;  // linear output layer
  for (int l = num_layers() - 1; l >= 0; --l) {
    grads.dW[l].noalias() = d_pre * cache.act[l].transpose();
    grads.db[l] = d_pre.rowwise().sum();
    if (l > 0 || d_input != nullptr) {
      Eigen::MatrixXd d_act = weights_[l].transpose() * d_pre;
      if (l > 0) {
        // ReLU mask: the cached post-activation is positive iff the unit
        // was active.
        d_pre = d_act.cwiseProduct(
            (cache.act[l].array() > 0.0).cast<double>().matrix());
      } else if (d_input != nullptr) {
        *d_input = std::move(d_act);
      }
    }
  }
  return grads;
}

void Mlp::spectral_normalize(int max_iterations) {
  if (!spectral_bound_) return;
  const double bound = *spectral_bound_;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd& w = weights_[l];
    Eigen::VectorXd& u = power_u_[l];
    Eigen::VectorXd v;
    // At least three iterations, then until the estimate settles. The warm
    // start makes the steady-state cost a handful of matvecs.
    double sigma = 0.0;
    for (int it = 0; it < std::max(3, max_iterations); ++it) {
      v = (w.transpose() * u).normalized();
      u = (w * v).normalized();
      const double next = u.dot(w * v);
      const bool converged = it >= 2 && std::abs(next - sigma) <= 1e-12 * next;
      sigma = next;
      if (converged) break;
    }
    if (sigma > bound * (1.0 + 1e-9)) {
      w *= bound / sigma;
    }
  }
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (int l = 0; l < num_layers(); ++l) {
    g.dW.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  return g;
}

void Mlp::save(const std::string& path) const {
  json doc;
  doc["format_version"] = 1;
  doc["dims"] = dims_;
  if (spectral_bound_) {
    doc["spectral_bound"] = *spectral_bound_;
  } else {
    doc["spectral_bound"] = nullptr;
  }
  json layers = json::array();
  for (int l = 0; l < num_layers(); ++l) {
    json layer;
    std::vector<double> flat(weights_[l].size());
    // row-major flattening
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>(flat.data(), weights_[l].rows(),
                                               weights_[l].cols()) = weights_[l];
    layer["W"] = flat;
    layer["b"] = std::vector<double>(biases_[l].data(),
                                     biases_[l].data() + biases_[l].size());
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot write checkpoint " + path);
  out << doc.dump() << "\n";
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open checkpoint " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw IoFailure("malformed checkpoint " + path + ": " + e.what());
  }
  if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1) {
    throw SchemaMismatch("unsupported checkpoint format in " + path);
  }
  Mlp net;
  net.dims_ = doc["dims"].get<std::vector<int>>();
  if (net.dims_.size() < 2) throw SchemaMismatch("checkpoint dims invalid");
  if (!doc["spectral_bound"].is_null()) {
    net.spectral_bound_ = doc["spectral_bound"].get<double>();
  }
  const auto& layers = doc["layers"];
  if (layers.size() != net.dims_.size() - 1) {
    throw SchemaMismatch("checkpoint layer count mismatch");
  }
  for (std::size_t l = 0; l + 1 < net.dims_.size(); ++l) {
    const int rows = net.dims_[l + 1], cols = net.dims_[l];
    const auto flat = layers[l]["W"].get<std::vector<double>>();
    const auto b = layers[l]["b"].get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != rows * cols ||
        static_cast<int>(b.size()) != rows) {
      throw SchemaMismatch("checkpoint layer shape mismatch");
    }
    Eigen::MatrixXd w(rows, cols);
    w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(flat.data(), rows,
                                                         cols);
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(
        Eigen::Map<const Eigen::VectorXd>(b.data(), rows));
  }
  net.init_power_vectors();
  return net;
}

std::pair<double, Eigen::VectorXd> cross_entropy(const Eigen::VectorXd& logits,
                                                 int k) {
  if (k < 0 || k >= logits.size()) {
    throw OutOfRange("cross_entropy: class index out of range");
  }
  const double m = logits.maxCoeff();
  const Eigen::VectorXd shifted = logits.array() - m;
  const Eigen::VectorXd exps = shifted.array().exp();
  const double z = exps.sum();
  const double loss = std::log(z) - shifted[k];
  Eigen::VectorXd grad = exps / z;
  grad[k] -= 1.0;
  return {loss, std::move(grad)};
}

void SgdMomentum::step(Mlp& net, const Gradients& grads) {
  if (vel_w_.empty()) {
    for (int l = 0; l < net.num_layers(); ++l) {
      vel_w_.push_back(Eigen::MatrixXd::Zero(net.weight(l).rows(),
                                             net.weight(l).cols()));
      vel_b_.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
    }
  }
  if (static_cast<int>(grads.dW.size()) != net.num_layers()) {
    throw DimMismatch("optimizer gradient shape mismatch");
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    vel_w_[l] = momentum_ * vel_w_[l] + grads.dW[l];
    vel_b_[l] = momentum_ * vel_b_[l] + grads.db[l];
    net.weight(l) -= lr_ * vel_w_[l];
    net.bias(l) -= lr_ * vel_b_[l];
  }
}

}  // namespace nf::net

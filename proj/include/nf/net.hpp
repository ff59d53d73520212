#ifndef NF_NET_HPP
#define NF_NET_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nf/core.hpp"

namespace nf::net {

/// Per-layer weight/bias gradients, shape-congruent with the owning Mlp.
struct Gradients {
  std::vector<Eigen::MatrixXd> dW;
  std::vector<Eigen::VectorXd> db;

  void set_zero();
  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double scale);
};

/// Activations recorded by a forward pass; act[0] is the input batch and
/// act[l] the post-activation output of layer l.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> act;
};

/// Fully-connected network, ReLU on hidden layers and linear output, with an
/// optional per-layer spectral-norm cap enforced by warm-started power
/// iteration. All math is in doubles; columns are batch entries.
class Mlp {
 public:
  Mlp() = default;

  /// He-uniform fan-in initialization.
  static Mlp he_uniform(const std::vector<int>& dims, Rng& rng,
                        std::optional<double> spectral_bound = std::nullopt);

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  int num_layers() const { return static_cast<int>(weights_.size()); }

  Eigen::MatrixXd& weight(int layer) { return weights_[layer]; }
  const Eigen::MatrixXd& weight(int layer) const { return weights_[layer]; }
  Eigen::VectorXd& bias(int layer) { return biases_[layer]; }
  const Eigen::VectorXd& bias(int layer) const { return biases_[layer]; }
  std::optional<double> spectral_bound() const { return spectral_bound_; }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, ForwardCache& cache) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& x) const;

  /// Reverse-mode gradients of the scalar <d_out, net(x)> contraction.
  /// `d_input`, when given, receives the gradient w.r.t. the input batch.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& d_out,
                     Eigen::MatrixXd* d_input = nullptr) const;

  /// Power-iteration estimate of each layer's top singular value; rescales
  /// any layer exceeding the bound. No-op when no bound is set.
  void spectral_normalize(int max_iterations = 100);

  Gradients zero_gradients() const;

  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

 private:
  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  std::optional<double> spectral_bound_;
  mutable std::vector<Eigen::VectorXd> power_u_;

  void init_power_vectors();
  void check_cache(const ForwardCache& cache) const;
};

/// Softmax cross-entropy of one logit vector against class k.
/// Returns {loss, d_loss/d_logits}; the gradient is softmax(logits) - e_k.
std::pair<double, Eigen::VectorXd> cross_entropy(const Eigen::VectorXd& logits,
                                                 int k);

/// Heavy-ball SGD: v <- momentum*v + g; w <- w - lr*v.
class SgdMomentum {
 public:
  SgdMomentum(double lr, double momentum = 0.9) : lr_(lr), momentum_(momentum) {}
  void step(Mlp& net, const Gradients& grads);

 private:
  double lr_, momentum_;
  std::vector<Eigen::MatrixXd> vel_w_;
  std::vector<Eigen::VectorXd> vel_b_;
};

}  // namespace nf::net

#endif  // NF_NET_HPP

#ifndef NF_DAIML_HPP
#define NF_DAIML_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nf/dataset.hpp"
#include "nf/net.hpp"

namespace nf::daiml {

struct DaimlConfig {
  double alpha = 0.1;     // adversarial regularization weight
  double eta = 0.5;       // discriminator update probability
  double gamma = 10.0;    // cap on ||a*||
  double damping = 1e-6;  // ridge damping for the adaptation solve
  int batch_adapt = 128;  // |B^a|
  int batch_train = 256;  // |B|
  double lr_phi = 5e-4;
  double lr_h = 1e-3;
  double momentum = 0.9;
  int epochs = 500;
  int patience = 50;  // early stop after this many epochs without val improvement; 0 disables
  std::uint64_t seed = 0;
  std::vector<int> phi_dims = {data::kInputDim, 50, 60, 50, 4};
  std::vector<int> h_hidden = {128};
  double spectral_bound = 1.0;

  /// Batches must fit inside the smallest subdataset; all positives typed.
  void validate(const data::FlightDataset& ds) const;
};

/// Result of the per-batch least-squares adaptation. `a` is the capped
/// stacked coefficient vector [a_x; a_y; a_z]; `a_raw` the uncapped solve.
struct AdaptSolution {
  Eigen::VectorXd a;
  Eigen::VectorXd a_raw;
  bool capped = false;
  double conditioning = 0.0;  // smallest singular value of the batch features
};

/// Ridge-regularized least squares sharing one Gram matrix across the three
/// force axes: (Phi^T Phi + damping I) a_j = Phi^T y_j, then the norm cap
/// a <- gamma * a / ||a|| whenever ||a|| > gamma.
/// phi_outputs is (n x h), one feature row per sample; labels is (n x 3).
AdaptSolution least_squares_adapt(const Eigen::MatrixXd& phi_outputs,
                                  const Eigen::MatrixXd& labels,
                                  double damping, double gamma);

/// Backward rule for the adaptation solve: given dL/da at the capped
/// solution, returns dL/dPhi via implicit differentiation of the damped
/// normal equations (composed with the cap Jacobian when active).
Eigen::MatrixXd adapt_gradient_through_ls(const Eigen::MatrixXd& phi_outputs,
                                          const Eigen::MatrixXd& labels,
                                          const AdaptSolution& sol,
                                          double damping,
                                          const Eigen::VectorXd& d_loss_d_a);

/// Mean per-sample force-prediction loss sum_axes (y - phi a)^2 and its
/// gradients w.r.t. the feature rows and the coefficients.
struct FLoss {
  double value = 0.0;
  Eigen::MatrixXd d_phi;  // n x h
  Eigen::VectorXd d_a;    // 3h
};
FLoss f_loss(const Eigen::MatrixXd& phi_outputs, const Eigen::MatrixXd& labels,
             const Eigen::VectorXd& a);

/// One full representation-update loss evaluation:
///   L = mean_B ||y - Phi(x) a*(phi)||^2 - alpha * mean_B CE(h(phi(x)), k)
/// with a* solved on the adaptation batch and gradients flowing through the
/// solve. Returns phi gradients only; h stays fixed (the min player's step).
struct StepLoss {
  double loss = 0.0;
  double f_loss = 0.0;        // mean per-sample, training batch
  double ce_loss = 0.0;       // mean per-sample cross entropy
  int disc_correct = 0;       // argmax(h) == k count on the training batch
  AdaptSolution adapt;
  net::Gradients phi_grads;
};
StepLoss training_step(const net::Mlp& phi, const net::Mlp& h,
                       const Eigen::MatrixXd& x_adapt,
                       const Eigen::MatrixXd& y_adapt,
                       const Eigen::MatrixXd& x_train,
                       const Eigen::MatrixXd& y_train, int k,
                       const DaimlConfig& cfg);

/// Per-sample f-loss of phi on a sample group under the standard evaluation
/// protocol: per condition, adapt on an evenly strided batch and score the
/// held-out remainder.
double evaluation_f_loss(const net::Mlp& phi,
                         const std::vector<std::vector<data::Sample>>& group,
                         const DaimlConfig& cfg);

/// Scalar clustering diagnostic for the adapted coefficients: mean
/// inter-condition centroid distance over mean intra-condition spread.
double cluster_metric(const net::Mlp& phi,
                      const std::vector<std::vector<data::Sample>>& group,
                      const DaimlConfig& cfg);

struct TrainingLogRow {
  int epoch = 0;
  double train_f_loss = 0.0;
  double val_f_loss = 0.0;
  double cluster_metric = 0.0;
  double disc_acc = 0.0;
};

struct TrainingLog {
  std::vector<TrainingLogRow> rows;
  void save_csv(const std::string& path) const;
  static TrainingLog load_csv(const std::string& path);
};

struct TrainResult {
  net::Mlp phi;
  net::Mlp h;
  TrainingLog log;
  int epochs_run = 0;
};

using EpochCallback =
    std::function<void(int epoch, const net::Mlp& phi, const net::Mlp& h)>;

/// Alternating adaptation / representation / discriminator training.
/// Deterministic for a fixed (dataset, config). Throws DivergedLoss if the
/// training loss stops being finite.
TrainResult train(const data::FlightDataset& ds, const DaimlConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Uniform sample of `count` distinct entries from the pool (partial
/// Fisher-Yates; the pool order is perturbed between calls).
std::vector<int> draw_distinct(std::vector<int>& pool, int count, Rng& rng);

}  // namespace nf::daiml

#endif  // NF_DAIML_HPP

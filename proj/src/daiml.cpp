#include "nf/daiml.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nf/csv.hpp"

namespace nf::daiml {

void DaimlConfig::validate(const data::FlightDataset& ds) const {
  if (alpha < 0) throw ConfigError("daiml.alpha must be >= 0");
  if (!(eta > 0 && eta <= 1)) throw ConfigError("daiml.eta must be in (0,1]");
  if (!(gamma > 0)) throw ConfigError("daiml.gamma must be positive");
  if (!(damping >= 0)) throw ConfigError("daiml.damping must be >= 0");
  if (batch_adapt < 4) throw ConfigError("daiml.batch_adapt must be >= 4");
  if (batch_train < 1) throw ConfigError("daiml.batch_train must be >= 1");
  if (!(lr_phi > 0 && lr_h > 0)) throw ConfigError("daiml learning rates must be positive");
  if (epochs < 1) throw ConfigError("daiml.epochs must be >= 1");
  if (ds.conditions() < 2) throw ConfigError("daiml needs at least 2 wind conditions");
  std::size_t smallest = SIZE_MAX;
  for (const auto& d : ds.train) smallest = std::min(smallest, d.size());
  if (static_cast<std::size_t>(batch_adapt + batch_train) > smallest) {
    throw ConfigError("daiml batches exceed the smallest subdataset");
  }
  if (phi_dims.size() < 2 || phi_dims.front() != data::kInputDim) {
    throw ConfigError("daiml.phi_dims must start at the 11-d input");
  }
}

AdaptSolution least_squares_adapt(const Eigen::MatrixXd& phi_outputs,
                                  const Eigen::MatrixXd& labels,
                                  double damping, double gamma) {
  const int n = static_cast<int>(phi_outputs.rows());
  const int h = static_cast<int>(phi_outputs.cols());
  if (labels.rows() != n || labels.cols() != 3) {
    throw DimMismatch("least_squares_adapt: labels must be n x 3");
  }
  if (n < 4) throw TooShort("least_squares_adapt: batch must hold >= 4 samples");

  const Eigen::MatrixXd gram = phi_outputs.transpose() * phi_outputs;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double min_eig = std::max(0.0, es.eigenvalues().minCoeff());

  const Eigen::MatrixXd damped =
      gram + damping * Eigen::MatrixXd::Identity(h, h);
  const Eigen::LLT<Eigen::MatrixXd> llt(damped);

  AdaptSolution sol;
  sol.conditioning = std::sqrt(min_eig);
  sol.a_raw.resize(3 * h);
  for (int axis = 0; axis < 3; ++axis) {
    sol.a_raw.segment(axis * h, h) =
        llt.solve(phi_outputs.transpose() * labels.col(axis));
  }
  const double norm = sol.a_raw.norm();
  if (norm > gamma) {
    sol.a = sol.a_raw * (gamma / norm);
    sol.capped = true;
  } else {
    sol.a = sol.a_raw;
  }
  return sol;
}

FLoss f_loss(const Eigen::MatrixXd& phi_outputs, const Eigen::MatrixXd& labels,
             const Eigen::VectorXd& a) {
  const int n = static_cast<int>(phi_outputs.rows());
  const int h = static_cast<int>(phi_outputs.cols());
  if (a.size() != 3 * h) throw DimMismatch("f_loss: coefficient size mismatch");
  if (labels.rows() != n || labels.cols() != 3) {
    throw DimMismatch("f_loss: labels must be n x 3");
  }
  FLoss out;
  out.d_phi = Eigen::MatrixXd::Zero(n, h);
  out.d_a = Eigen::VectorXd::Zero(3 * h);
  const double inv_n = 1.0 / n;
  for (int axis = 0; axis < 3; ++axis) {
    const Eigen::VectorXd a_axis = a.segment(axis * h, h);
    const Eigen::VectorXd r = labels.col(axis) - phi_outputs * a_axis;
    out.value += inv_n * r.squaredNorm();
    out.d_phi.noalias() += (-2.0 * inv_n) * r * a_axis.transpose();
    out.d_a.segment(axis * h, h) =
        (-2.0 * inv_n) * phi_outputs.transpose() * r;
  }
  return out;
}

Eigen::MatrixXd adapt_gradient_through_ls(const Eigen::MatrixXd& phi_outputs,
                                          const Eigen::MatrixXd& labels,
                                          const AdaptSolution& sol,
                                          double damping,
                                          const Eigen::VectorXd& d_loss_d_a) {
  const int n = static_cast<int>(phi_outputs.rows());
  const int h = static_cast<int>(phi_outputs.cols());
  if (d_loss_d_a.size() != 3 * h) {
    throw DimMismatch("adapt_gradient_through_ls: gradient size mismatch");
  }

  // Chain through the cap: a = gamma * a_raw / ||a_raw||, whose Jacobian is
  // the (symmetric) scaled tangent projection.
  Eigen::VectorXd g = d_loss_d_a;
  if (sol.capped) {
    const double norm = sol.a_raw.norm();
    const Eigen::VectorXd unit = sol.a_raw / norm;
    const double gamma_over_norm = sol.a.norm() / norm;
    g = gamma_over_norm * (g - unit * unit.dot(g));
  }

  const Eigen::MatrixXd damped =
      phi_outputs.transpose() * phi_outputs +
      damping * Eigen::MatrixXd::Identity(h, h);
  const Eigen::LLT<Eigen::MatrixXd> llt(damped);

  // d a_j = G^-1 dPhi^T r_j - G^-1 Phi^T dPhi a_j  with r_j the residual at
  // the uncapped solution, so  dL/dPhi = sum_j (r_j u_j^T - Phi u_j a_j^T),
  // u_j = G^-1 g_j.
  Eigen::MatrixXd d_phi = Eigen::MatrixXd::Zero(n, h);
  for (int axis = 0; axis < 3; ++axis) {
    const Eigen::VectorXd a_axis = sol.a_raw.segment(axis * h, h);
    const Eigen::VectorXd u = llt.solve(g.segment(axis * h, h));
    const Eigen::VectorXd r = labels.col(axis) - phi_outputs * a_axis;
    d_phi.noalias() += r * u.transpose();
    d_phi.noalias() -= (phi_outputs * u) * a_axis.transpose();
  }
  return d_phi;
}

StepLoss training_step(const net::Mlp& phi, const net::Mlp& h,
                       const Eigen::MatrixXd& x_adapt,
                       const Eigen::MatrixXd& y_adapt,
                       const Eigen::MatrixXd& x_train,
                       const Eigen::MatrixXd& y_train, int k,
                       const DaimlConfig& cfg) {
  StepLoss out;

  // Adaptation step on B^a.
  net::ForwardCache cache_a;
  const Eigen::MatrixXd phi_a = phi.forward(x_adapt, cache_a).transpose();
  out.adapt = least_squares_adapt(phi_a, y_adapt, cfg.damping, cfg.gamma);

  // Representation loss on B.
  net::ForwardCache cache_b;
  const Eigen::MatrixXd phi_b = phi.forward(x_train, cache_b).transpose();
  FLoss fl = f_loss(phi_b, y_train, out.adapt.a);
  out.f_loss = fl.value;

  const int nb = static_cast<int>(x_train.cols());
  Eigen::MatrixXd d_phi_b = fl.d_phi;

  {
    // Discriminator pass; even at alpha = 0 the logits feed the accuracy
    // diagnostic.
    net::ForwardCache cache_h;
    const Eigen::MatrixXd logits = h.forward(phi_b.transpose(), cache_h);
    Eigen::MatrixXd d_logits(logits.rows(), logits.cols());
    double ce_sum = 0.0;
    for (int i = 0; i < nb; ++i) {
      auto [ce, grad] = net::cross_entropy(logits.col(i), k);
      ce_sum += ce;
      d_logits.col(i) = grad;
      int argmax = 0;
      logits.col(i).maxCoeff(&argmax);
      if (argmax == k) ++out.disc_correct;
    }
    out.ce_loss = ce_sum / nb;
    if (cfg.alpha > 0.0) {
      // The min player maximizes the discriminator loss: -alpha * CE.
      Eigen::MatrixXd d_h_input;
      d_logits *= -cfg.alpha / nb;
      h.backward(cache_h, d_logits, &d_h_input);
      d_phi_b += d_h_input.transpose();
    }
  }

  out.loss = fl.value - cfg.alpha * out.ce_loss;

  // Backprop: direct term through B, implicit term through B^a.
  out.phi_grads = phi.backward(cache_b, d_phi_b.transpose());
  const Eigen::MatrixXd d_phi_a = adapt_gradient_through_ls(
      phi_a, y_adapt, out.adapt, cfg.damping, fl.d_a);
  out.phi_grads += phi.backward(cache_a, d_phi_a.transpose());
  return out;
}

namespace {

Eigen::MatrixXd stack_inputs(const std::vector<data::Sample>& samples,
                             const std::vector<int>& idx) {
  Eigen::MatrixXd x(data::kInputDim, idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) x.col(i) = samples[idx[i]].x;
  return x;
}

Eigen::MatrixXd stack_labels(const std::vector<data::Sample>& samples,
                             const std::vector<int>& idx) {
  Eigen::MatrixXd y(idx.size(), 3);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    y.row(i) = samples[idx[i]].y.transpose();
  }
  return y;
}

std::vector<int> strided_indices(std::size_t n, int count) {
  std::vector<int> idx;
  idx.reserve(count);
  for (int i = 0; i < count; ++i) {
    idx.push_back(static_cast<int>(i * n / count));
  }
  return idx;
}

}  // namespace

double evaluation_f_loss(const net::Mlp& phi,
                         const std::vector<std::vector<data::Sample>>& group,
                         const DaimlConfig& cfg) {
  double total = 0.0;
  int conditions = 0;
  for (const auto& sub : group) {
    if (sub.empty()) continue;
    const int adapt_count =
        std::min<int>(cfg.batch_adapt, static_cast<int>(sub.size()) / 2);
    if (adapt_count < 4) continue;
    const std::vector<int> adapt_idx = strided_indices(sub.size(), adapt_count);
    std::vector<char> in_adapt(sub.size(), 0);
    for (int i : adapt_idx) in_adapt[i] = 1;
    std::vector<int> eval_idx;
    eval_idx.reserve(sub.size() - adapt_idx.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
      if (!in_adapt[i]) eval_idx.push_back(static_cast<int>(i));
    }

    const Eigen::MatrixXd phi_adapt =
        phi.forward(stack_inputs(sub, adapt_idx)).transpose();
    const AdaptSolution sol = least_squares_adapt(
        phi_adapt, stack_labels(sub, adapt_idx), cfg.damping, cfg.gamma);

    const Eigen::MatrixXd phi_eval =
        phi.forward(stack_inputs(sub, eval_idx)).transpose();
    total += f_loss(phi_eval, stack_labels(sub, eval_idx), sol.a).value;
    ++conditions;
  }
  if (conditions == 0) throw TooShort("evaluation_f_loss: no usable subdatasets");
  return total / conditions;
}

double cluster_metric(const net::Mlp& phi,
                      const std::vector<std::vector<data::Sample>>& group,
                      const DaimlConfig& cfg) {
  std::vector<Eigen::VectorXd> centroids;
  double intra_sum = 0.0;
  int intra_count = 0;
  for (const auto& sub : group) {
    const int chunk = cfg.batch_adapt;
    const int n_chunks =
        std::min<int>(8, static_cast<int>(sub.size()) / chunk);
    if (n_chunks < 1) continue;
    std::vector<Eigen::VectorXd> solutions;
    for (int c = 0; c < n_chunks; ++c) {
      const std::size_t stride = sub.size() / n_chunks;
      std::vector<int> idx;
      idx.reserve(chunk);
      for (int i = 0; i < chunk; ++i) {
        idx.push_back(static_cast<int>(c * stride + i));
      }
      const Eigen::MatrixXd feats =
          phi.forward(stack_inputs(sub, idx)).transpose();
      solutions.push_back(
          least_squares_adapt(feats, stack_labels(sub, idx), cfg.damping,
                              cfg.gamma)
              .a);
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(solutions[0].size());
    for (const auto& a : solutions) centroid += a;
    centroid /= static_cast<double>(solutions.size());
    for (const auto& a : solutions) {
      intra_sum += (a - centroid).norm();
      ++intra_count;
    }
    centroids.push_back(std::move(centroid));
  }
  if (centroids.size() < 2) {
    throw TooShort("cluster_metric: need at least two conditions");
  }
  double inter_sum = 0.0;
  int inter_count = 0;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      inter_sum += (centroids[i] - centroids[j]).norm();
      ++inter_count;
    }
  }
  const double intra = intra_sum / std::max(1, intra_count);
  const double inter = inter_sum / std::max(1, inter_count);
  return inter / std::max(intra, 1e-12);
}

void TrainingLog::save_csv(const std::string& path) const {
  csv::Writer w(path, {"epoch", "train_f_loss", "val_f_loss", "cluster_metric",
                       "discriminator_acc"});
  for (const auto& r : rows) {
    w.row({static_cast<double>(r.epoch), r.train_f_loss, r.val_f_loss,
           r.cluster_metric, r.disc_acc});
  }
  w.close();
}

TrainingLog TrainingLog::load_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  TrainingLog log;
  for (const auto& row : t.rows) {
    TrainingLogRow r;
    r.epoch = static_cast<int>(row[0]);
    r.train_f_loss = row[1];
    r.val_f_loss = row[2];
    r.cluster_metric = row[3];
    r.disc_acc = row[4];
    log.rows.push_back(r);
  }
  return log;
}

std::vector<int> draw_distinct(std::vector<int>& pool, int count, Rng& rng) {
  if (count > static_cast<int>(pool.size())) {
    throw TooShort("draw_distinct: pool smaller than the requested batch");
  }
  for (int i = 0; i < count; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  return std::vector<int>(pool.begin(), pool.begin() + count);
}

TrainResult train(const data::FlightDataset& ds, const DaimlConfig& cfg,
                  const EpochCallback& on_epoch) {
  ds.validate();
  cfg.validate(ds);
  const auto& val_group = ds.validation.empty() ? ds.train : ds.validation;

  Rng rng(cfg.seed);
  TrainResult result;
  result.phi = net::Mlp::he_uniform(cfg.phi_dims, rng, cfg.spectral_bound);
  result.phi.spectral_normalize();

  const int K = static_cast<int>(ds.conditions());
  std::vector<int> h_dims;
  h_dims.push_back(cfg.phi_dims.back());
  for (int d : cfg.h_hidden) h_dims.push_back(d);
  h_dims.push_back(K);
  result.h = net::Mlp::he_uniform(h_dims, rng);

  net::SgdMomentum opt_phi(cfg.lr_phi, cfg.momentum);
  net::SgdMomentum opt_h(cfg.lr_h, cfg.momentum);

  // Persistent index pools, partially re-shuffled per draw.
  std::vector<std::vector<int>> pools(K);
  for (int k = 0; k < K; ++k) {
    pools[k].resize(ds.train[k].size());
    std::iota(pools[k].begin(), pools[k].end(), 0);
  }

  const int iters_per_epoch = static_cast<int>(
      (ds.total_train_samples() + cfg.batch_train - 1) / cfg.batch_train);

  // Epoch 0 row records the random-feature baseline.
  TrainingLogRow row0;
  row0.epoch = 0;
  row0.val_f_loss = evaluation_f_loss(result.phi, val_group, cfg);
  row0.train_f_loss = evaluation_f_loss(result.phi, ds.train, cfg);
  row0.cluster_metric = cluster_metric(result.phi, ds.train, cfg);
  row0.disc_acc = 1.0 / K;
  result.log.rows.push_back(row0);
  if (on_epoch) on_epoch(0, result.phi, result.h);

  double best_val = row0.val_f_loss;
  int best_epoch = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double f_loss_sum = 0.0;
    long disc_correct = 0;
    long disc_total = 0;
    for (int iter = 0; iter < iters_per_epoch; ++iter) {
      const int k = static_cast<int>(rng.index(K));
      const std::vector<int> idx =
          draw_distinct(pools[k], cfg.batch_adapt + cfg.batch_train, rng);
      const std::vector<int> idx_adapt(idx.begin(),
                                       idx.begin() + cfg.batch_adapt);
      const std::vector<int> idx_train(idx.begin() + cfg.batch_adapt,
                                       idx.end());

      const Eigen::MatrixXd x_a = stack_inputs(ds.train[k], idx_adapt);
      const Eigen::MatrixXd y_a = stack_labels(ds.train[k], idx_adapt);
      const Eigen::MatrixXd x_b = stack_inputs(ds.train[k], idx_train);
      const Eigen::MatrixXd y_b = stack_labels(ds.train[k], idx_train);

      const StepLoss step =
          training_step(result.phi, result.h, x_a, y_a, x_b, y_b, k, cfg);
      if (!std::isfinite(step.loss)) {
        throw DivergedLoss("training loss became non-finite at epoch " +
                           std::to_string(epoch));
      }
      f_loss_sum += step.f_loss;
      disc_correct += step.disc_correct;
      disc_total += cfg.batch_train;

      opt_phi.step(result.phi, step.phi_grads);
      result.phi.spectral_normalize();

      if (rng.uniform() < cfg.eta) {
        // Max player: minimize CE of h on the training batch, phi frozen.
        net::ForwardCache cache_b, cache_h;
        const Eigen::MatrixXd feats = result.phi.forward(x_b, cache_b);
        const Eigen::MatrixXd logits = result.h.forward(feats, cache_h);
        Eigen::MatrixXd d_logits(logits.rows(), logits.cols());
        for (int i = 0; i < logits.cols(); ++i) {
          d_logits.col(i) = net::cross_entropy(logits.col(i), k).second;
        }
        d_logits /= static_cast<double>(logits.cols());
        const net::Gradients h_grads = result.h.backward(cache_h, d_logits);
        opt_h.step(result.h, h_grads);
      }
    }

    TrainingLogRow row;
    row.epoch = epoch;
    row.train_f_loss = f_loss_sum / iters_per_epoch;
    row.val_f_loss = evaluation_f_loss(result.phi, val_group, cfg);
    row.cluster_metric = cluster_metric(result.phi, ds.train, cfg);
    row.disc_acc = static_cast<double>(disc_correct) /
                   static_cast<double>(std::max(1L, disc_total));
    result.log.rows.push_back(row);
    result.epochs_run = epoch;
    if (on_epoch) on_epoch(epoch, result.phi, result.h);

    if (row.val_f_loss < best_val) {
      best_val = row.val_f_loss;
      best_epoch = epoch;
    } else if (cfg.patience > 0 && epoch - best_epoch >= cfg.patience) {
      break;
    }
  }
  return result;
}

}  // namespace nf::daiml

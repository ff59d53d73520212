#include "nf/controllers.hpp"

#include <cmath>

#include "nf/dataset.hpp"

namespace nf::ctrl {

ControllerGains ControllerGains::defaults(
    const sim::VehicleParams& vehicle,
    const sim::ResidualModelParams& residual, int n_params) {
  ControllerGains g;
  g.K = 3.0 * vehicle.mass * Mat3::Identity();
  g.Lambda = 3.0 * Mat3::Identity();
  g.K_I = 2.0 * vehicle.mass;
  g.Q = 0.1 * Eigen::MatrixXd::Identity(n_params, n_params);
  const double r = std::max(residual.noise_sigma * residual.noise_sigma, 1e-6);
  g.R = r * Mat3::Identity();
  g.lambda = 0.01;
  g.filter_cutoff_hz = 5.0;
  g.l1_bandwidth = 10.0;
  g.integral_clamp = 2.0 * vehicle.mass * vehicle.gravity.norm();
  return g;
}

namespace {

void check_spd(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) throw ConfigError(std::string(name) + " not square");
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw ConfigError(std::string(name) + " not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw ConfigError(std::string(name) + " not positive definite");
  }
}

}  // namespace

void ControllerGains::validate() const {
  check_spd(K, "gains.K");
  check_spd(Lambda, "gains.Lambda");
  check_spd(Q, "gains.Q");
  check_spd(R, "gains.R");
  if (lambda < 0) throw ConfigError("gains.lambda must be >= 0");
  if (!(filter_cutoff_hz > 0)) throw ConfigError("gains.filter_cutoff_hz must be positive");
}

CompositeError composite_error(const sim::SimState& state,
                               const traj::DesiredState& desired,
                               const Mat3& Lambda) {
  const Vec3 p_err = state.p - desired.pos_d;
  const Vec3 v_err = state.v - desired.vel_d;
  CompositeError e;
  e.s = v_err + Lambda * p_err;
  e.q_dot_r = desired.vel_d - Lambda * p_err;
  e.q_ddot_r = desired.acc_d - Lambda * v_err;
  return e;
}

AdaptiveState adapt_discrete(const AdaptiveState& state,
                             const Eigen::MatrixXd& phi, const Vec3& y,
                             const Vec3& s, double dt,
                             const Eigen::MatrixXd& Q, const Mat3& R,
                             double lambda) {
  const int n = static_cast<int>(state.a_hat.size());
  if (!(dt > 0)) throw OutOfRange("adapt_discrete: dt must be positive");
  if (phi.rows() != 3 || phi.cols() != n || state.P.rows() != n ||
      state.P.cols() != n || Q.rows() != n) {
    throw DimMismatch("adapt_discrete: shape mismatch");
  }

  // Propagation: damping on the estimate, process gain into the covariance.
  const double decay = 1.0 - lambda * dt;
  const Eigen::VectorXd a_minus = decay * state.a_hat;
  const Eigen::MatrixXd p_minus = decay * decay * state.P + Q * dt;

  // Update. The discrete measurement covariance R/dt makes the filtering
  // part the exact sampled equivalent of the continuous law.
  const Mat3 r_d = R / dt;
  const Mat3 innovation = phi * p_minus * phi.transpose() + r_d;
  const Eigen::LDLT<Mat3> ldlt(innovation);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0) {
    throw SingularInnovation("innovation matrix is singular (R too small)");
  }
  // K = P- phi^T S^-1
  const Eigen::MatrixXd gain =
      ldlt.solve(phi * p_minus).transpose();  // n x 3

  AdaptiveState out;
  out.a_hat = a_minus - gain * (phi * a_minus - y) +
              dt * (p_minus * (phi.transpose() * s));
  const Eigen::MatrixXd a_post =
      Eigen::MatrixXd::Identity(n, n) - gain * phi;
  out.P = a_post * p_minus * a_post.transpose() +
          gain * r_d * gain.transpose();
  out.P = 0.5 * (out.P + out.P.transpose());  // keep symmetric against roundoff
  return out;
}

sim::AttitudeThrustCmd force_to_attitude(const Vec3& u, double yaw_d,
                                         const sim::VehicleParams& params,
                                         const Quat* prev) {
  const double norm = u.norm();
  if (norm < 1e-6) {
    throw DegenerateForce("force_to_attitude: ||u|| below 1e-6 N");
  }
  const Vec3 z_b = u / norm;
  const Vec3 x_c(std::cos(yaw_d), std::sin(yaw_d), 0.0);
  Vec3 y_b = z_b.cross(x_c);
  if (y_b.norm() < 1e-9) {
    // Thrust parallel to the yaw heading; fall back to the orthogonal
    // heading to keep the frame well defined.
    y_b = z_b.cross(Vec3(-std::sin(yaw_d), std::cos(yaw_d), 0.0));
  }
  y_b.normalize();
  const Vec3 x_b = y_b.cross(z_b);

  Mat3 rot;
  rot.col(0) = x_b;
  rot.col(1) = y_b;
  rot.col(2) = z_b;

  sim::AttitudeThrustCmd cmd;
  cmd.attitude_d = Quat(rot);
  cmd.attitude_d.normalize();
  if (prev != nullptr && cmd.attitude_d.dot(*prev) < 0.0) {
    cmd.attitude_d.coeffs() = -cmd.attitude_d.coeffs();
  }
  cmd.thrust = std::min(norm, params.thrust_max);
  return cmd;
}

// ---------------------------------------------------------------------------

NonlinearBaseline::NonlinearBaseline(const sim::VehicleParams& vehicle,
                                     const ControllerGains& gains)
    : vehicle_(vehicle), gains_(gains) {}

void NonlinearBaseline::reset(const sim::SimState&) { integral_.setZero(); }

Vec3 NonlinearBaseline::tick(const sim::SimState& state,
                             const traj::DesiredState& desired,
                             const Measurement&, double dt) {
  const CompositeError e = composite_error(state, desired, gains_.Lambda);
  last_s_ = e.s;
  integral_ += gains_.K_I * e.s * dt;
  const double mag = integral_.norm();
  if (mag > gains_.integral_clamp) {
    integral_ *= gains_.integral_clamp / mag;
  }
  return vehicle_.mass * e.q_ddot_r - vehicle_.mass * vehicle_.gravity -
         gains_.K * e.s - integral_;
}

// ---------------------------------------------------------------------------

NeuralFlyController::NeuralFlyController(const sim::VehicleParams& vehicle,
                                         const ControllerGains& gains,
                                         const net::Mlp* phi)
    : vehicle_(vehicle), gains_(gains), phi_(phi) {
  n_params_ = phi_ ? 3 * phi_->output_dim() : 3;
  if (gains_.Q.rows() != n_params_) {
    throw DimMismatch("gains.Q does not match the coefficient dimension");
  }
  if (phi_) {
    lambda_ = gains_.lambda;
    // Stationary covariance of the phi = 0 dynamics, Q / (2 lambda).
    p0_ = gains_.Q / (2.0 * lambda_);
  } else {
    // Identity-regressor variant: no damping; initialize at the stationary
    // covariance sqrt(q r) of the corresponding scalar Riccati equation.
    lambda_ = 0.0;
    p0_ = Eigen::MatrixXd::Zero(3, 3);
    for (int i = 0; i < 3; ++i) {
      p0_(i, i) = std::sqrt(gains_.Q(i, i) * gains_.R(i, i));
    }
  }
  adapt_.a_hat = Eigen::VectorXd::Zero(n_params_);
  adapt_.P = p0_;
}

void NeuralFlyController::reset(const sim::SimState& initial) {
  adapt_.a_hat.setZero();
  adapt_.P = p0_;
  prev_pwm_ = initial.pwm;
  f_hat_.setZero();
}

void NeuralFlyController::set_adaptive_state(AdaptiveState state) {
  if (state.a_hat.size() != n_params_ || state.P.rows() != n_params_) {
    throw DimMismatch("adaptive state does not match the controller");
  }
  adapt_ = std::move(state);
}

Eigen::MatrixXd NeuralFlyController::regressor(
    const sim::SimState& state) const {
  if (!phi_) return Eigen::MatrixXd::Identity(3, 3);
  const Eigen::VectorXd feats =
      phi_->forward_one(data::make_input(state.v, state.q_att, prev_pwm_));
  const int h = static_cast<int>(feats.size());
  Eigen::MatrixXd reg = Eigen::MatrixXd::Zero(3, 3 * h);
  for (int axis = 0; axis < 3; ++axis) {
    reg.block(axis, axis * h, 1, h) = feats.transpose();
  }
  return reg;
}

Vec3 NeuralFlyController::tick(const sim::SimState& state,
                               const traj::DesiredState& desired,
                               const Measurement& meas, double dt) {
  const CompositeError e = composite_error(state, desired, gains_.Lambda);
  last_s_ = e.s;
  const Eigen::MatrixXd phi = regressor(state);
  if (meas.valid) {
    adapt_ = adapt_discrete(adapt_, phi, meas.y, e.s, dt, gains_.Q, gains_.R,
                            lambda_);
  }
  f_hat_ = phi * adapt_.a_hat;
  prev_pwm_ = state.pwm;
  return vehicle_.mass * e.q_ddot_r - vehicle_.mass * vehicle_.gravity -
         gains_.K * e.s - f_hat_;
}

// ---------------------------------------------------------------------------

IndiController::IndiController(const sim::VehicleParams& vehicle,
                               const ControllerGains& gains)
    : vehicle_(vehicle), gains_(gains) {}

void IndiController::reset(const sim::SimState&) { f_hat_.setZero(); }

Vec3 IndiController::tick(const sim::SimState& state,
                          const traj::DesiredState& desired,
                          const Measurement& meas, double dt) {
  const CompositeError e = composite_error(state, desired, gains_.Lambda);
  last_s_ = e.s;
  if (meas.valid) {
    // meas.y already encodes m*a_meas - m*g - u_prev; one shared first-order
    // filter keeps the acceleration and actuator terms synchronized.
    const double alpha =
        1.0 - std::exp(-2.0 * M_PI * gains_.filter_cutoff_hz * dt);
    f_hat_ += alpha * (meas.y - f_hat_);
  }
  return vehicle_.mass * e.q_ddot_r - vehicle_.mass * vehicle_.gravity -
         gains_.K * e.s - f_hat_;
}

// ---------------------------------------------------------------------------

L1Controller::L1Controller(const sim::VehicleParams& vehicle,
                           const ControllerGains& gains)
    : vehicle_(vehicle), gains_(gains) {}

void L1Controller::reset(const sim::SimState& initial) {
  v_hat_ = initial.v;
  sigma_hat_.setZero();
  f_hat_.setZero();
  u_prev_.setZero();
  e_prev_.setZero();
  ticks_ = 0;
}

Vec3 L1Controller::tick(const sim::SimState& state,
                        const traj::DesiredState& desired,
                        const Measurement& meas, double dt) {
  const CompositeError e = composite_error(state, desired, gains_.Lambda);
  last_s_ = e.s;
  const double a_s = gains_.l1_bandwidth;
  const double decay = 1.0 - a_s * dt;  // discrete predictor-error decay
  if (ticks_ >= 1) {
    const Vec3 v_err = v_hat_ - state.v;
    // Piecewise-constant adaptation: the held value that reconciles the
    // observed predictor-error step (unbiased for a constant disturbance),
    // plus the deadbeat term that nulls the current error next sample.
    Vec3 f_raw = Vec3::Zero();
    if (ticks_ >= 2) {
      f_raw = sigma_hat_ -
              (vehicle_.mass / dt) * (v_err - decay * e_prev_);
    }
    sigma_hat_ = f_raw - (vehicle_.mass / dt) * decay * v_err;
    // First-order low-pass decouples adaptation speed from the control loop.
    const double alpha =
        1.0 - std::exp(-2.0 * M_PI * gains_.filter_cutoff_hz * dt);
    f_hat_ += alpha * (f_raw - f_hat_);
    // Predictor propagation with the fresh estimate (matches the inversion).
    v_hat_ += dt * (vehicle_.gravity + (u_prev_ + sigma_hat_) / vehicle_.mass -
                    a_s * v_err);
    e_prev_ = v_err;
  } else {
    v_hat_ = state.v;
  }
  const Vec3 u = vehicle_.mass * e.q_ddot_r - vehicle_.mass * vehicle_.gravity -
                 gains_.K * e.s - f_hat_;
  // Actuator feedback drives the predictor over the next interval.
  u_prev_ = meas.u_applied;
  ++ticks_;
  return u;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Controller> make_controller(const std::string& name,
                                            const sim::VehicleParams& vehicle,
                                            const ControllerGains& gains,
                                            const net::Mlp* phi) {
  if (name == "nonlinear") {
    return std::make_unique<NonlinearBaseline>(vehicle, gains);
  }
  if (name == "indi") return std::make_unique<IndiController>(vehicle, gains);
  if (name == "l1") return std::make_unique<L1Controller>(vehicle, gains);
  if (name == "nf-constant") {
    return std::make_unique<NeuralFlyController>(vehicle, gains, nullptr);
  }
  if (name == "nf") {
    if (phi == nullptr) {
      throw ConfigError("controller 'nf' requires a basis checkpoint");
    }
    return std::make_unique<NeuralFlyController>(vehicle, gains, phi);
  }
  throw ConfigError("unknown controller '" + name + "'");
}

}  // namespace nf::ctrl

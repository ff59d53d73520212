#ifndef NF_CONTROLLERS_HPP
#define NF_CONTROLLERS_HPP

#include <memory>
#include <string>

#include "nf/net.hpp"
#include "nf/sim.hpp"
#include "nf/trajectory.hpp"

namespace nf::ctrl {

struct ControllerGains {
  Mat3 K = 7.5 * Mat3::Identity();       // N s/m, feedback on s
  Mat3 Lambda = 3.0 * Mat3::Identity();  // 1/s, composite-error gain
  double K_I = 5.0;                      // N/m, baseline integral gain
  Eigen::MatrixXd Q;                     // n x n adaptation process gain
  Mat3 R = 0.0025 * Mat3::Identity();    // measurement covariance (N^2)
  double lambda = 0.01;                  // adaptation damping, 1/s
  double filter_cutoff_hz = 5.0;         // INDI / L1 low-pass cutoff
  double l1_bandwidth = 10.0;            // L1 predictor pole, 1/s
  double integral_clamp = 49.05;         // N, anti-windup bound

  /// Defaults tuned once on a 1 m step with the baseline and shared by all
  /// methods; adaptation gains sized for an n-dimensional coefficient vector
  /// with R matched to the residual measurement noise.
  static ControllerGains defaults(const sim::VehicleParams& vehicle,
                                  const sim::ResidualModelParams& residual,
                                  int n_params);

  void validate() const;
};

/// Composite tracking error s = (v - vel_d) + Lambda (p - pos_d), plus the
/// reference velocity/acceleration used by the feedforward terms.
struct CompositeError {
  Vec3 s;
  Vec3 q_dot_r;
  Vec3 q_ddot_r;
};
CompositeError composite_error(const sim::SimState& state,
                               const traj::DesiredState& desired,
                               const Mat3& Lambda);

/// Online estimator state for the composite adaptation law.
struct AdaptiveState {
  Eigen::VectorXd a_hat;
  Eigen::MatrixXd P;
};

/// One discrete propagate/update step of the composite adaptation law.
/// Propagation applies the damping and process gain; the update applies a
/// Kalman-style gain on the force-prediction error plus the tracking-error
/// term, with a Joseph-form covariance update to keep P positive definite.
/// The discretization integrates the continuous laws exactly for the pure
/// filtering part under constant inputs (discrete noise covariance R/dt).
/// Throws SingularInnovation when the innovation matrix cannot be factored
/// (R too small).
AdaptiveState adapt_discrete(const AdaptiveState& state,
                             const Eigen::MatrixXd& phi,  // 3 x n
                             const Vec3& y, const Vec3& s, double dt,
                             const Eigen::MatrixXd& Q, const Mat3& R,
                             double lambda);

/// Decompose a desired world force into thrust magnitude and an attitude
/// aligning the body z-axis with the force direction at the commanded yaw.
/// `prev` selects the quaternion hemisphere for tick-to-tick continuity.
/// Throws DegenerateForce for ||u|| < 1e-6 N.
sim::AttitudeThrustCmd force_to_attitude(const Vec3& u, double yaw_d,
                                         const sim::VehicleParams& params,
                                         const Quat* prev = nullptr);

/// Causal residual-force measurement delivered to the controllers once the
/// trailing position window is full.
struct Measurement {
  bool valid = false;         // trailing window full and the estimate sane
  Vec3 y = Vec3::Zero();      // residual-force estimate, N
  Vec3 accel = Vec3::Zero();  // acceleration estimate behind it, m/s^2
  Vec3 u_applied = Vec3::Zero();  // rotor force in world frame (attitude
                                  // estimate x motor model), always set
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual void reset(const sim::SimState& initial) = 0;
  /// Desired world-frame force for this control interval.
  virtual Vec3 tick(const sim::SimState& state,
                    const traj::DesiredState& desired, const Measurement& meas,
                    double dt) = 0;
  /// Current disturbance estimate (the integral term for the baseline).
  virtual Vec3 force_estimate() const = 0;
  virtual Eigen::VectorXd a_hat() const { return Eigen::VectorXd(); }
  virtual double trace_P() const { return 0.0; }
  virtual std::unique_ptr<Controller> clone() const = 0;

  /// Composite error from the most recent tick (telemetry).
  Vec3 last_s() const { return last_s_; }

 protected:
  Vec3 last_s_ = Vec3::Zero();
};

/// Nonlinear feedforward + PD on s + anti-windup integral.
class NonlinearBaseline final : public Controller {
 public:
  NonlinearBaseline(const sim::VehicleParams& vehicle,
                    const ControllerGains& gains);
  std::string name() const override { return "nonlinear"; }
  void reset(const sim::SimState& initial) override;
  Vec3 tick(const sim::SimState&, const traj::DesiredState&,
            const Measurement&, double dt) override;
  Vec3 force_estimate() const override { return integral_; }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<NonlinearBaseline>(*this);
  }

 private:
  sim::VehicleParams vehicle_;
  ControllerGains gains_;
  Vec3 integral_ = Vec3::Zero();
};

/// Composite-adaptation controller. With a basis network the regressor is
/// blockdiag(phi, phi, phi) over the learned features; without one it falls
/// back to the identity regressor (the non-learning variant) with lambda = 0
/// and the stationary covariance as the initial P.
class NeuralFlyController final : public Controller {
 public:
  NeuralFlyController(const sim::VehicleParams& vehicle,
                      const ControllerGains& gains, const net::Mlp* phi);
  std::string name() const override { return phi_ ? "nf" : "nf-constant"; }
  void reset(const sim::SimState& initial) override;
  Vec3 tick(const sim::SimState&, const traj::DesiredState&,
            const Measurement&, double dt) override;
  Vec3 force_estimate() const override { return f_hat_; }
  Eigen::VectorXd a_hat() const override { return adapt_.a_hat; }
  double trace_P() const override { return adapt_.P.trace(); }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<NeuralFlyController>(*this);
  }

  const AdaptiveState& adaptive_state() const { return adapt_; }
  /// Restores a saved estimator state (telemetry replay, analysis setups).
  void set_adaptive_state(AdaptiveState state);
  /// Regressor at a given state (exposed for analysis).
  Eigen::MatrixXd regressor(const sim::SimState& state) const;
  double lambda() const { return lambda_; }

 private:
  sim::VehicleParams vehicle_;
  ControllerGains gains_;
  const net::Mlp* phi_;  // frozen, shared; null for the constant variant
  int n_params_;
  double lambda_;
  Eigen::MatrixXd p0_;
  AdaptiveState adapt_;
  Vec4 prev_pwm_ = Vec4::Zero();
  Vec3 f_hat_ = Vec3::Zero();
};

/// Incremental disturbance observer: low-passed difference between measured
/// and commanded specific force.
class IndiController final : public Controller {
 public:
  IndiController(const sim::VehicleParams& vehicle,
                 const ControllerGains& gains);
  std::string name() const override { return "indi"; }
  void reset(const sim::SimState& initial) override;
  Vec3 tick(const sim::SimState&, const traj::DesiredState&,
            const Measurement&, double dt) override;
  Vec3 force_estimate() const override { return f_hat_; }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<IndiController>(*this);
  }

 private:
  sim::VehicleParams vehicle_;
  ControllerGains gains_;
  Vec3 f_hat_ = Vec3::Zero();
};

/// Piecewise-constant adaptation on a velocity predictor with a first-order
/// low-pass on the estimate; the filtered estimate replaces the baseline's
/// integral term.
class L1Controller final : public Controller {
 public:
  L1Controller(const sim::VehicleParams& vehicle,
               const ControllerGains& gains);
  std::string name() const override { return "l1"; }
  void reset(const sim::SimState& initial) override;
  Vec3 tick(const sim::SimState&, const traj::DesiredState&,
            const Measurement&, double dt) override;
  Vec3 force_estimate() const override { return f_hat_; }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<L1Controller>(*this);
  }

  Vec3 sigma_hat() const { return sigma_hat_; }

 private:
  sim::VehicleParams vehicle_;
  ControllerGains gains_;
  Vec3 v_hat_ = Vec3::Zero();
  Vec3 sigma_hat_ = Vec3::Zero();
  Vec3 f_hat_ = Vec3::Zero();
  Vec3 u_prev_ = Vec3::Zero();
  Vec3 e_prev_ = Vec3::Zero();
  long ticks_ = 0;
};

/// Factory over the controller names used in configs/reports.
std::unique_ptr<Controller> make_controller(const std::string& name,
                                            const sim::VehicleParams& vehicle,
                                            const ControllerGains& gains,
                                            const net::Mlp* phi);

}  // namespace nf::ctrl

#endif  // NF_CONTROLLERS_HPP

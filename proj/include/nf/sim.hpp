#ifndef NF_SIM_HPP
#define NF_SIM_HPP

#include "nf/core.hpp"
#include "nf/wind.hpp"

namespace nf::sim {

struct VehicleParams {
  double mass = 2.5;  // kg
  Mat3 inertia = (Eigen::Matrix3d() << 0.08, 0, 0,  //
                  0, 0.08, 0,                       //
                  0, 0, 0.14)
                     .finished();        // kg m^2
  Vec3 gravity = Vec3(0, 0, -9.81);      // m/s^2
  double thrust_max = 54.0;              // N, total (thrust-to-weight ~2.2)
  double torque_max = 5.0;               // N m, per-axis clamp
  double att_kp = 100.0;                 // attitude loop: rad/s^2 per rad
  double att_kd = 20.0;                  // rad/s^2 per rad/s (critically damped)
  double motor_time_constant = 0.03;     // s, first-order rotor lag
  double arm_length = 0.20;              // m, X-config lever arm per axis
  double yaw_torque_coeff = 0.02;        // N m of yaw per N of rotor thrust

  /// Throws ConfigError unless mass > 0, inertia is symmetric positive
  /// definite and thrust-to-weight exceeds 1.
  void validate() const;
};

/// Synthetic ground-truth aerodynamic residual. The structure keeps the label
/// dependent on velocity, attitude and rotor command:
///
///   f = -D1 * v_rel - d2 * |v_rel| * v_rel
///       + c_att * ((R e3) x e3) x v_rel
///       + c_rot * mean(pwm) * v_rel,        v_rel = v - v_wind(t)
///
/// The attitude term vanishes at level attitude; the tilt axis (R e3) x e3
/// couples body tilt into a force orthogonal to it.
struct ResidualModelParams {
  Mat3 linear_drag = (Eigen::Matrix3d() << 0.25, 0, 0,  //
                      0, 0.25, 0,                       //
                      0, 0, 0.40)
                         .finished();  // N s/m
  double quad_drag = 0.05;             // N s^2/m^2
  double attitude_coupling = 0.3;
  double rotor_coupling = 0.2;
  double noise_sigma = 0.05;  // N, std of measurement noise on y
};

/// Full rigid-body state. Quaternion is scalar-first in every external
/// format; pwm holds the lagged normalized rotor signals in [0, 1].
struct SimState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Quat q_att = Quat::Identity();
  Vec3 omega = Vec3::Zero();
  Vec4 pwm = Vec4::Zero();
  double t = 0.0;
};

struct AttitudeThrustCmd {
  double thrust = 0.0;  // N, magnitude along body z
  Quat attitude_d = Quat::Identity();
};

/// Ground-truth residual force (deterministic; noise is added separately at
/// measurement time).
Vec3 residual_force(const SimState& state, const wind::WindCondition& wind,
                    const ResidualModelParams& params);

/// Noisy residual measurement: residual_force + N(0, noise_sigma^2 I).
Vec3 measure_residual(const SimState& state, const wind::WindCondition& wind,
                      const ResidualModelParams& params, Rng& rng);

/// Rigid-body simulator: RK4 integration of translational and rotational
/// dynamics, quaternion-error PD inner attitude loop, X-config rotor mixer
/// and first-order motor lag on the normalized rotor signals.
class Vehicle {
 public:
  explicit Vehicle(VehicleParams params);

  const VehicleParams& params() const { return params_; }

  /// Advance one physics step (dt in (0, 2 ms]). Throws NonFiniteState if
  /// the integrated state stops being finite.
  SimState step(const SimState& state, const AttitudeThrustCmd& cmd,
                const wind::WindCondition& wind,
                const ResidualModelParams& residual, double dt) const;

  /// Idealized-actuation variant for controller analysis: the given world
  /// force is applied directly and attitude/rotor states stay frozen.
  SimState step_force(const SimState& state, const Vec3& force_world,
                      const wind::WindCondition& wind,
                      const ResidualModelParams& residual, double dt) const;

  /// Desired per-rotor normalized signals for a thrust/torque pair.
  Vec4 mix_to_pwm(double thrust, const Vec3& torque) const;

  /// Actual thrust/torque produced by a set of rotor signals.
  void thrust_torque_from_pwm(const Vec4& pwm, double& thrust,
                              Vec3& torque) const;

  /// Inner-loop PD torque for a desired attitude (zero desired body rate).
  Vec3 attitude_torque(const Quat& q, const Vec3& omega,
                       const Quat& q_d) const;

  double hover_pwm() const;
  SimState hover_state(const Vec3& p) const;

 private:
  using State17 = Eigen::Matrix<double, 17, 1>;

  State17 pack(const SimState& s) const;
  SimState unpack(const State17& x, double t) const;
  State17 derivative(const State17& x, double t, const AttitudeThrustCmd& cmd,
                     const wind::WindCondition& wind,
                     const ResidualModelParams& residual) const;

  VehicleParams params_;
  Eigen::Matrix4d mix_;      // rotor forces -> [T, tau_x, tau_y, tau_z]
  Eigen::Matrix4d mix_inv_;  // [T, tau] -> rotor forces
  Mat3 inertia_inv_;
};

}  // namespace nf::sim

#endif  // NF_SIM_HPP

#include "nf/sim.hpp"

#include <algorithm>
#include <cmath>

namespace nf::sim {

namespace {

Vec3 clamp_per_axis(const Vec3& v, double limit) {
  return v.cwiseMax(-limit).cwiseMin(limit);
}

/// Rotation-vector attitude error between q and q_d (shortest path).
Vec3 attitude_error(const Quat& q, const Quat& q_d) {
  Quat q_err = q_d.conjugate() * q;
  if (q_err.w() < 0) q_err.coeffs() = -q_err.coeffs();
  const double vec_norm = q_err.vec().norm();
  if (vec_norm < 1e-12) return 2.0 * q_err.vec();
  const double angle = 2.0 * std::atan2(vec_norm, q_err.w());
  return (angle / vec_norm) * q_err.vec();
}

}  // namespace

void VehicleParams::validate() const {
  if (!(mass > 0)) throw ConfigError("vehicle.mass must be positive");
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("vehicle.inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  if (es.eigenvalues().minCoeff() <= 0) {
    throw ConfigError("vehicle.inertia must be positive definite");
  }
  if (!(thrust_max > mass * gravity.norm())) {
    throw ConfigError("vehicle.thrust_max must exceed weight");
  }
  if (!(motor_time_constant > 0)) {
    throw ConfigError("vehicle.motor_time_constant must be positive");
  }
}

Vec3 residual_force(const SimState& state, const wind::WindCondition& wind,
                    const ResidualModelParams& params) {
  const Vec3 v_rel = state.v - wind::wind_velocity(wind, state.t);
  const Mat3 R = state.q_att.toRotationMatrix();
  const Vec3 tilt = R.col(2).cross(Vec3::UnitZ());
  Vec3 f = -params.linear_drag * v_rel;
  f -= params.quad_drag * v_rel.norm() * v_rel;
  f += params.attitude_coupling * tilt.cross(v_rel);
  f += params.rotor_coupling * state.pwm.mean() * v_rel;
  return f;
}

Vec3 measure_residual(const SimState& state, const wind::WindCondition& wind,
                      const ResidualModelParams& params, Rng& rng) {
  return residual_force(state, wind, params) +
         params.noise_sigma * rng.normal3();
}

Vehicle::Vehicle(VehicleParams params) : params_(std::move(params)) {
  params_.validate();
  const double l = params_.arm_length;
  const double k = params_.yaw_torque_coeff;
  // X configuration, x forward / y left / z up. Rotor order:
  //   0: front-left  (+l, +l) spin dir +
  //   1: front-right (+l, -l) spin dir -
  //   2: rear-right  (-l, -l) spin dir +
  //   3: rear-left   (-l, +l) spin dir -
  // Row map of per-rotor thrust into [T, tau_x, tau_y, tau_z].
  mix_ << 1, 1, 1, 1,  //
      l, -l, -l, l,    //
      -l, -l, l, l,    //
      k, -k, k, -k;
  mix_inv_ = mix_.inverse();
  inertia_inv_ = params_.inertia.inverse();
}

Vec4 Vehicle::mix_to_pwm(double thrust, const Vec3& torque) const {
  Eigen::Vector4d wrench;
  wrench << thrust, torque.x(), torque.y(), torque.z();
  const double rotor_max = params_.thrust_max / 4.0;
  Vec4 pwm = (mix_inv_ * wrench) / rotor_max;
  return pwm.cwiseMax(0.0).cwiseMin(1.0);
}

void Vehicle::thrust_torque_from_pwm(const Vec4& pwm, double& thrust,
                                     Vec3& torque) const {
  const double rotor_max = params_.thrust_max / 4.0;
  const Eigen::Vector4d wrench = mix_ * (pwm * rotor_max);
  thrust = wrench[0];
  torque = wrench.tail<3>();
}

Vec3 Vehicle::attitude_torque(const Quat& q, const Vec3& omega,
                              const Quat& q_d) const {
  const Vec3 e = attitude_error(q, q_d);
  const Vec3 alpha = -params_.att_kp * e - params_.att_kd * omega;
  return clamp_per_axis(params_.inertia * alpha, params_.torque_max);
}

double Vehicle::hover_pwm() const {
  return params_.mass * params_.gravity.norm() / params_.thrust_max;
}

SimState Vehicle::hover_state(const Vec3& p) const {
  SimState s;
  s.p = p;
  s.pwm.setConstant(hover_pwm());
  return s;
}

Vehicle::State17 Vehicle::pack(const SimState& s) const {
  State17 x;
  x.segment<3>(0) = s.p;
  x.segment<3>(3) = s.v;
  x[6] = s.q_att.w();
  x[7] = s.q_att.x();
  x[8] = s.q_att.y();
  x[9] = s.q_att.z();
  x.segment<3>(10) = s.omega;
  x.segment<4>(13) = s.pwm;
  return x;
}

SimState Vehicle::unpack(const State17& x, double t) const {
  SimState s;
  s.p = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.q_att = Quat(x[6], x[7], x[8], x[9]);
  s.omega = x.segment<3>(10);
  s.pwm = x.segment<4>(13);
  s.t = t;
  return s;
}

Vehicle::State17 Vehicle::derivative(const State17& x, double t,
                                     const AttitudeThrustCmd& cmd,
                                     const wind::WindCondition& wind,
                                     const ResidualModelParams& residual) const {
  SimState s = unpack(x, t);
  // Evaluate rotations on the normalized quaternion; the raw coefficients
  // stay un-normalized inside the RK4 stages.
  const double qn = s.q_att.norm();
  Quat q = s.q_att;
  q.coeffs() /= qn;

  // Inner loop: PD torque + thrust command -> desired rotor signals.
  const double thrust_cmd =
      std::clamp(cmd.thrust, 0.0, params_.thrust_max);
  const Vec3 torque_cmd = attitude_torque(q, s.omega, cmd.attitude_d);
  const Vec4 pwm_cmd = mix_to_pwm(thrust_cmd, torque_cmd);

  // Actual wrench from the lagged rotor signals.
  double thrust_act;
  Vec3 torque_act;
  thrust_torque_from_pwm(s.pwm, thrust_act, torque_act);

  const Mat3 R = q.toRotationMatrix();
  SimState s_norm = s;
  s_norm.q_att = q;
  const Vec3 f_res = residual_force(s_norm, wind, residual);

  State17 dx;
  dx.segment<3>(0) = s.v;
  dx.segment<3>(3) = params_.gravity +
                     (R * Vec3(0, 0, thrust_act) + f_res) / params_.mass;
  const Quat omega_q(0.0, s.omega.x(), s.omega.y(), s.omega.z());
  const Quat q_dot_q = s.q_att * omega_q;
  dx[6] = 0.5 * q_dot_q.w();
  dx[7] = 0.5 * q_dot_q.x();
  dx[8] = 0.5 * q_dot_q.y();
  dx[9] = 0.5 * q_dot_q.z();
  dx.segment<3>(10) =
      inertia_inv_ *
      ((params_.inertia * s.omega).cross(s.omega) + torque_act);
  dx.segment<4>(13) = (pwm_cmd - s.pwm) / params_.motor_time_constant;
  return dx;
}

SimState Vehicle::step(const SimState& state, const AttitudeThrustCmd& cmd,
                       const wind::WindCondition& wind,
                       const ResidualModelParams& residual, double dt) const {
  if (!(dt > 0.0) || dt > 2e-3) {
    throw OutOfRange("sim step requires 0 < dt <= 2 ms");
  }
  const State17 x0 = pack(state);
  const double t = state.t;
  const State17 k1 = derivative(x0, t, cmd, wind, residual);
  const State17 k2 =
      derivative(x0 + 0.5 * dt * k1, t + 0.5 * dt, cmd, wind, residual);
  const State17 k3 =
      derivative(x0 + 0.5 * dt * k2, t + 0.5 * dt, cmd, wind, residual);
  const State17 k4 = derivative(x0 + dt * k3, t + dt, cmd, wind, residual);
  State17 x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  SimState next = unpack(x1, t + dt);
  const double qn = next.q_att.norm();
  if (!(qn > 0.0) || !x1.allFinite()) {
    throw NonFiniteState("sim state became non-finite (unstable gains or dt)");
  }
  next.q_att.coeffs() /= qn;
  next.pwm = next.pwm.cwiseMax(0.0).cwiseMin(1.0);
  return next;
}

SimState Vehicle::step_force(const SimState& state, const Vec3& force_world,
                             const wind::WindCondition& wind,
                             const ResidualModelParams& residual,
                             double dt) const {
  if (!(dt > 0.0) || dt > 2e-3) {
    throw OutOfRange("sim step requires 0 < dt <= 2 ms");
  }
  // Translational RK4 with attitude/rotor states frozen.
  auto deriv = [&](const Vec3& v, double t) -> Vec3 {
    SimState s = state;
    s.v = v;
    s.t = t;
    return params_.gravity +
           (force_world + residual_force(s, wind, residual)) / params_.mass;
  };
  const double t = state.t;
  const Vec3 v0 = state.v;
  const Vec3 k1 = deriv(v0, t);
  const Vec3 k2 = deriv(v0 + 0.5 * dt * k1, t + 0.5 * dt);
  const Vec3 k3 = deriv(v0 + 0.5 * dt * k2, t + 0.5 * dt);
  const Vec3 k4 = deriv(v0 + dt * k3, t + dt);
  // Position advances with the same staged velocities.
  const Vec3 p1 = state.p + dt * v0 +
                  (dt * dt / 6.0) * (k1 + k2 + k3);
  SimState next = state;
  next.v = v0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next.p = p1;
  next.t = t + dt;
  if (!next.p.allFinite() || !next.v.allFinite()) {
    throw NonFiniteState("sim state became non-finite in step_force");
  }
  return next;
}

}  // namespace nf::sim

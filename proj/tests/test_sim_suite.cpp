#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "nf/collect.hpp"
#include "nf/dataset.hpp"
#include "nf/runner.hpp"
#include "nf/sim.hpp"
#include "nf/stencil.hpp"
#include "nf/trajectory.hpp"
#include "nf/wind.hpp"
#include "support.hpp"

using namespace nf;

namespace {

sim::ResidualModelParams drag_only() {
  sim::ResidualModelParams rp;
  rp.attitude_coupling = 0.0;
  rp.rotor_coupling = 0.0;
  rp.noise_sigma = 0.0;
  return rp;
}

}  // namespace

TEST_SUITE("wind") {
  TEST_CASE("constant wind is time invariant") {
    const auto c = wind::WindCondition::constant(Vec3(4.2, 0, 0));
    CHECK(wind::wind_velocity(c, 0.0) == Vec3(4.2, 0, 0));
    CHECK(wind::wind_velocity(c, 17.3) == Vec3(4.2, 0, 0));
  }

  TEST_CASE("sinusoid peaks at base + amplitude") {
    const auto c = wind::WindCondition::sinusoidal(Vec3(8.5, 0, 0), 2.4, 1.0);
    const Vec3 v = wind::wind_velocity(c, M_PI / 2);
    CHECK(v.x() == doctest::Approx(10.9).epsilon(1e-12));
    CHECK(v.y() == 0.0);
    CHECK(wind::wind_velocity(c, 0.0).isApprox(Vec3(8.5, 0, 0)));
  }

  TEST_CASE("sinusoid speed stays within base +/- amplitude") {
    const auto c =
        wind::WindCondition::sinusoidal(Vec3(6.0, 3.5, 0.0), 1.7, 2.3);
    const double base = c.base_velocity.norm();
    for (int i = 0; i < 2000; ++i) {
      const double speed = wind::wind_velocity(c, i * 0.01).norm();
      CHECK(speed >= base - 1.7 - 1e-12);
      CHECK(speed <= base + 1.7 + 1e-12);
    }
  }

  TEST_CASE("degenerate sinusoid direction is rejected") {
    const auto c = wind::WindCondition::sinusoidal(Vec3::Zero(), 1.0, 1.0);
    CHECK_THROWS_AS(wind::wind_velocity(c, 1.0), DegenerateDirection);
  }
}

TEST_SUITE("trajectory") {
  TEST_CASE("figure8 starts at center with velocity along x") {
    const traj::Figure8 f8(2.5, 1.5, 6.28, Vec3(0, 0, 1.5));
    const auto d = f8.at(0.0);
    CHECK(d.pos_d.isApprox(Vec3(0, 0, 1.5)));
    CHECK(d.vel_d.x() > 0.5);
  }

  TEST_CASE("figure8 is periodic to 1e-12") {
    const traj::Figure8 f8(2.5, 1.5, 6.28, Vec3(0, 0, 1.5));
    for (double t : {0.3, 1.7, 4.4}) {
      const auto a = f8.at(t);
      const auto b = f8.at(t + 6.28);
      CHECK((a.pos_d - b.pos_d).norm() < 1e-12);
      CHECK((a.vel_d - b.vel_d).norm() < 1e-12);
    }
  }

  TEST_CASE("default figure8 peaks near the benchmark envelope") {
    // Peak speed/acceleration within a factor two of 2.7 m/s and 5.0 m/s^2.
    const traj::Figure8 f8(2.5, 1.5, 6.28, Vec3(0, 0, 1.5));
    double vmax = 0, amax = 0;
    for (int i = 0; i < 6280; ++i) {
      const auto d = f8.at(i * 1e-3);
      vmax = std::max(vmax, d.vel_d.norm());
      amax = std::max(amax, d.acc_d.norm());
    }
    CHECK(vmax > 2.7 / 2);
    CHECK(vmax < 2.7 * 2);
    CHECK(amax > 5.0 / 2);
    CHECK(amax < 5.0 * 2);
  }

  TEST_CASE("segment endpoints are rest-to-rest") {
    const auto seg =
        traj::SplineSegment::rest_to_rest(Vec3(0, 1, 2), Vec3(3, -1, 1), 2.5);
    const auto a = traj::eval_segment(seg, 0.0);
    CHECK(a.pos_d.isApprox(Vec3(0, 1, 2), 1e-12));
    CHECK(a.vel_d.norm() < 1e-12);
    CHECK(a.acc_d.norm() < 1e-12);
    const auto b = traj::eval_segment(seg, 2.5);
    CHECK(b.pos_d.isApprox(Vec3(3, -1, 1), 1e-9));
    CHECK(b.vel_d.norm() < 1e-9);
    CHECK(b.acc_d.norm() < 1e-9);
    CHECK_THROWS_AS(traj::eval_segment(seg, -0.01), OutOfRange);
    CHECK_THROWS_AS(traj::eval_segment(seg, 2.51), OutOfRange);
  }

  TEST_CASE("segment derivatives match the dual-number oracle") {
    const auto seg = traj::SplineSegment::rest_to_rest(Vec3(-1, 0.5, 2),
                                                       Vec3(2, 2, 0.7), 3.2);
    for (double tau : {0.31, 1.2, 1.7, 2.9}) {
      const auto d = traj::eval_segment(seg, tau);
      for (int axis = 0; axis < 3; ++axis) {
        const test::Dual2 o = test::eval_poly_dual(seg.coeffs[axis], tau);
        CHECK(std::abs(d.pos_d[axis] - o.v) < 1e-10);
        CHECK(std::abs(d.vel_d[axis] - o.d1) < 1e-10);
        CHECK(std::abs(d.acc_d[axis] - o.d2) < 1e-10);
      }
    }
  }

  TEST_CASE("random spline meets knot conditions and stays in bounds") {
    Rng rng(42);
    const traj::PiecewiseSplineTrajectory::Box box{Vec3(-1.5, -1.5, 0.8),
                                                   Vec3(1.5, 1.5, 2.2)};
    const auto spline = traj::PiecewiseSplineTrajectory::random(
        box, Vec3(0, 0, 1.5), 3.0, 5.0, 40.0, rng);
    REQUIRE(spline.total_duration() >= 40.0);

    // Zero velocity/acceleration/jerk at every knot; jerk via the
    // analytically differentiated coefficients (independent path).
    for (const auto& seg : spline.segments()) {
      for (double tau : {0.0, seg.duration}) {
        const auto d = traj::eval_segment(seg, tau);
        CHECK(d.vel_d.norm() < 1e-8);
        CHECK(d.acc_d.norm() < 1e-8);
        for (int axis = 0; axis < 3; ++axis) {
          double jerk = 0.0;
          for (int k = 7; k >= 3; --k) {
            jerk = jerk * tau + seg.coeffs[axis][k] * k * (k - 1) * (k - 2);
          }
          CHECK(std::abs(jerk) < 1e-8);
        }
      }
    }

    // Dense evaluation at 1 kHz stays inside the box (10 cm tolerance).
    for (double t = 0; t < spline.total_duration(); t += 1e-3) {
      const Vec3 p = spline.at(t).pos_d;
      for (int axis = 0; axis < 3; ++axis) {
        CHECK(p[axis] > box.lo[axis] - 0.1);
        CHECK(p[axis] < box.hi[axis] + 0.1);
      }
    }
  }

  TEST_CASE("same seed reproduces the waypoint sequence") {
    const traj::PiecewiseSplineTrajectory::Box box{Vec3(-1, -1, 0.8),
                                                   Vec3(1, 1, 2.2)};
    Rng a(9), b(9);
    const auto s1 = traj::PiecewiseSplineTrajectory::random(box, Vec3::Zero(),
                                                            3, 5, 20, a);
    const auto s2 = traj::PiecewiseSplineTrajectory::random(box, Vec3::Zero(),
                                                            3, 5, 20, b);
    REQUIRE(s1.waypoints().size() == s2.waypoints().size());
    for (std::size_t i = 0; i < s1.waypoints().size(); ++i) {
      CHECK(s1.waypoints()[i] == s2.waypoints()[i]);
    }
  }

  TEST_CASE("C2 continuity across joints") {
    Rng rng(5);
    const traj::PiecewiseSplineTrajectory::Box box{Vec3(-1.5, -1.5, 0.8),
                                                   Vec3(1.5, 1.5, 2.2)};
    const auto spline = traj::PiecewiseSplineTrajectory::random(
        box, Vec3(0, 0, 1.5), 3, 5, 30, rng);
    const auto& knots = spline.knot_times();
    for (std::size_t i = 1; i + 1 < knots.size(); ++i) {
      const auto left = spline.at(knots[i] - 1e-12);
      const auto right = spline.at(knots[i] + 1e-12);
      CHECK((left.pos_d - right.pos_d).norm() < 1e-8);
      CHECK((left.vel_d - right.vel_d).norm() < 1e-8);
      CHECK((left.acc_d - right.acc_d).norm() < 1e-8);
    }
  }
}

TEST_SUITE("rigid-body-sim") {
  TEST_CASE("residual force vanishes at rest in still air") {
    sim::SimState s;
    const auto f = sim::residual_force(
        s, wind::WindCondition::constant(Vec3::Zero()), drag_only());
    CHECK(f.norm() == 0.0);
  }

  TEST_CASE("hover in constant wind matches the drag formula exactly") {
    sim::ResidualModelParams rp;  // full default couplings
    sim::SimState s;              // level attitude, zero velocity, pwm = 0
    const auto wind = wind::WindCondition::constant(Vec3(4.2, 0, 0));
    const Vec3 v_rel(-4.2, 0, 0);
    const Vec3 expected =
        -(rp.linear_drag + rp.quad_drag * v_rel.norm() * Mat3::Identity()) *
        v_rel;
    const Vec3 f = sim::residual_force(s, wind, rp);
    CHECK((f - expected).norm() == 0.0);
  }

  TEST_CASE("linear term scales linearly") {
    sim::ResidualModelParams rp = drag_only();
    rp.quad_drag = 0.0;
    sim::SimState s;
    s.v = Vec3(1.0, -0.4, 0.2);
    const auto wind = wind::WindCondition::constant(Vec3::Zero());
    const Vec3 f1 = sim::residual_force(s, wind, rp);
    s.v *= 2.0;
    const Vec3 f2 = sim::residual_force(s, wind, rp);
    CHECK((f2 - 2.0 * f1).norm() < 1e-14);
  }

  TEST_CASE("drag-only residual is dissipative") {
    const auto rp = drag_only();
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      sim::SimState s;
      s.v = 3.0 * rng.normal3();
      s.q_att = Quat(rng.normal(), rng.normal(), rng.normal(), rng.normal());
      s.q_att.normalize();
      s.pwm = Vec4::Constant(rng.uniform());
      const Vec3 wind_v = 5.0 * rng.normal3();
      const auto wind = wind::WindCondition::constant(wind_v);
      const Vec3 v_rel = s.v - wind_v;
      CHECK(v_rel.dot(sim::residual_force(s, wind, rp)) <= 1e-12);
    }
  }

  TEST_CASE("hover thrust balances gravity") {
    const sim::Vehicle veh{sim::VehicleParams{}};
    auto s = veh.hover_state(Vec3(0, 0, 1.5));
    sim::AttitudeThrustCmd cmd;
    cmd.thrust = veh.params().mass * veh.params().gravity.norm();
    const auto wind = wind::WindCondition::constant(Vec3::Zero());
    for (int i = 0; i < 1000; ++i) {
      s = veh.step(s, cmd, wind, drag_only(), 1e-3);
    }
    CHECK(s.v.norm() < 1e-6);
  }

  TEST_CASE("ballistic drop matches the closed form") {
    sim::ResidualModelParams rp;
    rp.linear_drag.setZero();
    rp.quad_drag = 0.0;
    rp.attitude_coupling = 0.0;
    rp.rotor_coupling = 0.0;
    const sim::Vehicle veh{sim::VehicleParams{}};
    sim::SimState s;  // pwm = 0, so zero rotor thrust throughout
    s.p = Vec3(0, 0, 10);
    sim::AttitudeThrustCmd cmd;
    cmd.thrust = 0.0;
    const auto wind = wind::WindCondition::constant(Vec3::Zero());
    const double T = 1.2;
    for (int i = 0; i < 1200; ++i) {
      s = veh.step(s, cmd, wind, rp, 1e-3);
    }
    CHECK(std::abs(s.v.z() - (-9.81 * T)) < 1e-6);
    CHECK(std::abs(s.p.z() - (10.0 - 0.5 * 9.81 * T * T)) < 1e-6);
  }

  TEST_CASE("constant yaw torque spins up linearly") {
    sim::VehicleParams vp;
    vp.motor_time_constant = 1e9;  // freeze the rotor state
    vp.att_kp = 0;                 // inner loop disabled
    vp.att_kd = 0;
    const sim::Vehicle veh(vp);
    // Yaw-differential rotor pattern: equal thrust pairs, opposing spin.
    const double d = 0.1;
    sim::SimState s;
    s.pwm = Vec4(0.5 + d, 0.5 - d, 0.5 + d, 0.5 - d);
    double thrust;
    Vec3 torque;
    veh.thrust_torque_from_pwm(s.pwm, thrust, torque);
    REQUIRE(std::abs(torque.x()) < 1e-12);
    REQUIRE(std::abs(torque.y()) < 1e-12);
    REQUIRE(torque.z() > 0);

    sim::AttitudeThrustCmd cmd;
    const auto wind = wind::WindCondition::constant(Vec3::Zero());
    const double T = 0.5;
    for (int i = 0; i < 500; ++i) {
      s = veh.step(s, cmd, wind, drag_only(), 1e-3);
    }
    const double expected = torque.z() / vp.inertia(2, 2) * T;
    CHECK(std::abs(s.omega.z() - expected) <
          1e-9 * std::abs(expected) + 1e-12);
  }

  TEST_CASE("measured residual is exact at zero noise and deterministic") {
    sim::ResidualModelParams rp;
    rp.noise_sigma = 0.0;
    sim::SimState s;
    s.v = Vec3(1, 2, 0.5);
    const auto wind = wind::WindCondition::constant(Vec3(3, 0, 0));
    Rng rng(1);
    CHECK(sim::measure_residual(s, wind, rp, rng) ==
          sim::residual_force(s, wind, rp));

    rp.noise_sigma = 0.1;
    Rng a(7), b(7);
    for (int i = 0; i < 32; ++i) {
      CHECK(sim::measure_residual(s, wind, rp, a) ==
            sim::measure_residual(s, wind, rp, b));
    }
  }

  TEST_CASE("measurement noise has the configured statistics") {
    sim::ResidualModelParams rp;
    rp.noise_sigma = 0.1;
    sim::SimState s;
    s.v = Vec3(0.5, -1, 0.2);
    const auto wind = wind::WindCondition::constant(Vec3(2, 1, 0));
    const Vec3 truth = sim::residual_force(s, wind, rp);
    Rng rng(123);
    const int n = 100000;
    Vec3 mean = Vec3::Zero();
    for (int i = 0; i < n; ++i) {
      mean += sim::measure_residual(s, wind, rp, rng);
    }
    mean /= n;
    const double bound = 3.0 * 0.1 / std::sqrt(static_cast<double>(n));
    for (int axis = 0; axis < 3; ++axis) {
      CHECK(std::abs(mean[axis] - truth[axis]) < bound);
    }
  }

  TEST_CASE("quaternion norm stays unit over a million steps") {
    const sim::Vehicle veh{sim::VehicleParams{}};
    auto s = veh.hover_state(Vec3::Zero());
    const auto wind = wind::WindCondition::constant(Vec3::Zero());
    const auto rp = drag_only();
    sim::AttitudeThrustCmd cmd;
    cmd.thrust = veh.params().mass * 9.81;
    double worst = 0.0;
    for (int i = 0; i < 1000000; ++i) {
      // keep the attitude loop busy with an oscillating tilt command
      const double phase = i * 1e-3;
      cmd.attitude_d =
          Quat(Eigen::AngleAxisd(0.3 * std::sin(phase), Vec3::UnitX()));
      s = veh.step(s, cmd, wind, rp, 1e-3);
      worst = std::max(worst, std::abs(s.q_att.norm() - 1.0));
    }
    CHECK(worst < 1e-9);
  }

  TEST_CASE("free flight with drag never gains mechanical energy") {
    sim::VehicleParams vp;
    vp.att_kp = 0;
    vp.att_kd = 0;
    const sim::Vehicle veh(vp);
    sim::SimState s;
    s.p = Vec3(0, 0, 50);
    s.v = Vec3(3, -2, 4);
    const auto wind = wind::WindCondition::constant(Vec3::Zero());
    const auto rp = drag_only();
    sim::AttitudeThrustCmd cmd;
    cmd.thrust = 0.0;
    auto energy = [&](const sim::SimState& st) {
      return 0.5 * vp.mass * st.v.squaredNorm() + vp.mass * 9.81 * st.p.z() +
             0.5 * st.omega.dot(vp.inertia * st.omega);
    };
    double prev = energy(s);
    for (int i = 0; i < 3000; ++i) {
      s = veh.step(s, cmd, wind, rp, 1e-3);
      const double now = energy(s);
      CHECK(now <= prev + 1e-12);
      prev = now;
    }
  }

  TEST_CASE("step rejects oversized dt and detects blow-ups") {
    const sim::Vehicle veh{sim::VehicleParams{}};
    sim::SimState s;
    sim::AttitudeThrustCmd cmd;
    const auto wind = wind::WindCondition::constant(Vec3::Zero());
    CHECK_THROWS_AS(veh.step(s, cmd, wind, drag_only(), 0.01), OutOfRange);
    CHECK_THROWS_AS(veh.step(s, cmd, wind, drag_only(), 0.0), OutOfRange);
    s.v = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(veh.step(s, cmd, wind, drag_only(), 1e-3), NonFiniteState);
  }

  TEST_CASE("closed-loop runs are bit-identical under a fixed seed") {
    const sim::Vehicle veh{sim::VehicleParams{}};
    const sim::ResidualModelParams rp;
    const auto gains = ctrl::ControllerGains::defaults(veh.params(), rp, 3);
    const traj::Figure8 f8(2.5, 1.5, 6.28, Vec3(0, 0, 1.5));
    const auto wind = wind::WindCondition::constant(Vec3(4.2, 0, 0));
    ctrl::RunConfig rc;
    rc.duration = 6.28;

    auto run_once = [&]() {
      ctrl::NonlinearBaseline c(veh.params(), gains);
      return ctrl::run_flight(c, f8, ctrl::WindSchedule::constant(wind), veh,
                              rp, rc, Rng(77));
    };
    const auto r1 = run_once();
    const auto r2 = run_once();
    REQUIRE(r1.ticks.size() == r2.ticks.size());
    CHECK(r1.final_state.p == r2.final_state.p);
    CHECK(r1.final_state.v == r2.final_state.v);
    CHECK(r1.final_state.q_att.coeffs() == r2.final_state.q_att.coeffs());
    for (std::size_t i = 0; i < r1.ticks.size(); ++i) {
      CHECK(r1.ticks[i].p_err == r2.ticks[i].p_err);
      CHECK(r1.ticks[i].y_meas == r2.ticks[i].y_meas);
    }
  }
}

TEST_SUITE("data-pipeline") {
  TEST_CASE("stencil weights match the classic order-6 central formula") {
    Eigen::VectorXd grid(7);
    for (int i = 0; i < 7; ++i) grid[i] = i - 3;
    const Eigen::VectorXd w = data::fd_weights(0.0, grid, 2);
    const double expected[] = {2.0 / 180,    -27.0 / 180, 270.0 / 180,
                               -490.0 / 180, 270.0 / 180, -27.0 / 180,
                               2.0 / 180};
    for (int i = 0; i < 7; ++i) {
      CHECK(w[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("quadratic position recovers constant acceleration exactly") {
    const Vec3 a(0.7, -1.3, 2.1);
    std::vector<Vec3> pos;
    const double h = 0.02;
    for (int i = 0; i < 200; ++i) {
      const double t = i * h;
      pos.push_back(0.5 * a * t * t + Vec3(1, 2, 3) * t);
    }
    const auto qdd = data::second_derivative(pos, h);
    for (const auto& q : qdd) {
      CHECK((q - a).norm() < 1e-8);
    }
  }

  TEST_CASE("sine position differentiates to stencil accuracy") {
    const double A = 0.8, omega = 2.0 * M_PI;  // 1 Hz
    const double h = 0.02;                     // 50 Hz
    std::vector<Vec3> pos;
    for (int i = 0; i < 500; ++i) {
      pos.push_back(Vec3(A * std::sin(omega * i * h), 0, 0));
    }
    const auto qdd = data::second_derivative(pos, h);
    double worst_interior = 0, worst_edge = 0;
    for (std::size_t i = 0; i < qdd.size(); ++i) {
      const double truth = -A * omega * omega * std::sin(omega * i * h);
      const double err = std::abs(qdd[i].x() - truth);
      if (i >= 3 && i + 3 < qdd.size()) {
        worst_interior = std::max(worst_interior, err);
      } else {
        worst_edge = std::max(worst_edge, err);
      }
    }
    CHECK(worst_interior < 1e-5 * A);
    CHECK(worst_edge < 1e-3 * A);  // shifted stencils: order 5, larger constant
  }

  TEST_CASE("residual label is linear in the position series") {
    Rng rng(3);
    const double h = 0.02;
    const int n = 64;
    std::vector<Vec3> p1(n), p2(n), mix(n), zero_u(n, Vec3::Zero());
    for (int i = 0; i < n; ++i) {
      p1[i] = rng.normal3();
      p2[i] = rng.normal3();
      mix[i] = 0.3 * p1[i] + 1.7 * p2[i];
    }
    const sim::VehicleParams vp;
    const auto y1 = data::residual_label(p1, zero_u, h, vp);
    const auto y2 = data::residual_label(p2, zero_u, h, vp);
    const auto ym = data::residual_label(mix, zero_u, h, vp);
    // The -m g offset makes the label affine; subtract it before comparing.
    for (int i = 0; i < n; ++i) {
      const Vec3 lhs = ym[i] + vp.mass * vp.gravity;
      const Vec3 rhs = 0.3 * (y1[i] + vp.mass * vp.gravity) +
                       1.7 * (y2[i] + vp.mass * vp.gravity);
      CHECK((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    }
  }

  TEST_CASE("too-short series is rejected") {
    std::vector<Vec3> p(5, Vec3::Zero());
    CHECK_THROWS_AS(data::second_derivative(p, 0.02), TooShort);
  }

  TEST_CASE("noise-free labels track the true residual on a full flight") {
    const sim::Vehicle veh{sim::VehicleParams{}};
    auto rp = sim::ResidualModelParams{};
    rp.noise_sigma = 0.0;
    const auto gains = ctrl::ControllerGains::defaults(veh.params(), rp, 3);
    Rng rng(17);
    const traj::PiecewiseSplineTrajectory::Box box{Vec3(-1.5, -1.5, 0.8),
                                                   Vec3(1.5, 1.5, 2.2)};
    const auto spline = traj::PiecewiseSplineTrajectory::random(
        box, Vec3(0, 0, 1.5), 3, 5, 30, rng);
    ctrl::NonlinearBaseline controller(veh.params(), gains);
    ctrl::RunConfig rc;
    rc.duration = 30.0;
    rc.log_physics = true;
    const auto run = ctrl::run_flight(
        controller, spline,
        ctrl::WindSchedule::constant(
            wind::WindCondition::constant(Vec3(3.7, 0, 0))),
        veh, rp, rc, Rng(4));
    REQUIRE_FALSE(run.diverged);

    std::vector<Vec3> pos, u;
    for (const auto& row : run.physics) {
      pos.push_back(row.p);
      u.push_back(row.u_world);
    }
    const auto labels = data::residual_label(pos, u, 1e-3, veh.params());
    // Score at the sample instants the pipeline uses (mid control interval).
    double worst = 0.0;
    for (std::size_t i = 10; i + 10 < labels.size(); i += 20) {
      worst = std::max(worst, (labels[i] - run.physics[i].f_true).norm());
    }
    CHECK(worst < 1e-5);
  }

  TEST_CASE("collect is deterministic and shows the label distribution shift") {
    const sim::Vehicle veh{sim::VehicleParams{}};
    const sim::ResidualModelParams rp;
    const auto gains = ctrl::ControllerGains::defaults(veh.params(), rp, 3);
    data::CollectConfig cc;
    cc.conditions = {wind::WindCondition::constant(Vec3(0, 0, 0), 0),
                     wind::WindCondition::constant(Vec3(2.5, 0, 0), 1),
                     wind::WindCondition::constant(Vec3(6.1, 0, 0), 2)};
    cc.duration_per_condition = 20.0;
    cc.val_duration = 6.28;
    cc.seed = 5;
    const auto ds1 = data::collect(cc, veh, rp, gains);
    const auto ds2 = data::collect(cc, veh, rp, gains);

    // 20 s at 50 Hz per condition.
    for (const auto& sub : ds1.train) CHECK(sub.size() == 1000);

    // Bit-identical under the same seed.
    REQUIRE(ds1.train.size() == ds2.train.size());
    for (std::size_t k = 0; k < ds1.train.size(); ++k) {
      REQUIRE(ds1.train[k].size() == ds2.train[k].size());
      for (std::size_t i = 0; i < ds1.train[k].size(); ++i) {
        CHECK(ds1.train[k][i].x == ds2.train[k][i].x);
        CHECK(ds1.train[k][i].y == ds2.train[k][i].y);
      }
    }

    // Mean f_x separates conditions by more than the noise floor.
    std::vector<double> means;
    for (const auto& sub : ds1.train) {
      double m = 0;
      for (const auto& s : sub) m += s.y.x();
      means.push_back(m / sub.size());
    }
    const double noise_floor =
        3.0 * rp.noise_sigma / std::sqrt(static_cast<double>(1000));
    CHECK(means[1] - means[0] > noise_floor);
    CHECK(means[2] - means[1] > noise_floor);
  }

  TEST_CASE("dataset round-trips losslessly and validates its schema") {
    const std::string dir = "test_dataset_tmp";
    std::filesystem::remove_all(dir);

    data::FlightDataset ds;
    Rng rng(2);
    for (int k = 0; k < 2; ++k) {
      std::vector<data::Sample> sub;
      for (int i = 0; i < 50; ++i) {
        data::Sample s;
        Quat q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        q.normalize();
        s.x = data::make_input(rng.normal3(), q, Vec4::Constant(rng.uniform()));
        s.y = rng.normal3();
        s.t = 0.02 * i;
        s.k = k;
        sub.push_back(s);
      }
      ds.train.push_back(sub);
      ds.validation.push_back(sub);
    }
    ds.meta.seed = 99;
    ds.meta.config_hash = 0xabcdef;
    data::save_dataset(ds, dir);
    const auto loaded = data::load_dataset(dir);
    CHECK(loaded.meta.seed == 99);
    CHECK(loaded.meta.config_hash == 0xabcdef);
    REQUIRE(loaded.train.size() == ds.train.size());
    for (std::size_t k = 0; k < ds.train.size(); ++k) {
      REQUIRE(loaded.train[k].size() == ds.train[k].size());
      for (std::size_t i = 0; i < ds.train[k].size(); ++i) {
        CHECK(loaded.train[k][i].x == ds.train[k][i].x);  // bit-exact
        CHECK(loaded.train[k][i].y == ds.train[k][i].y);
        CHECK(loaded.train[k][i].t == ds.train[k][i].t);
      }
    }

    SUBCASE("truncated file raises IoFailure") {
      std::ofstream out(dir + "/train_0.csv", std::ios::trunc);
      out << "t,k,v_x,v_y,v_z,q_w,q_x,q_y,q_z,pwm_1,pwm_2,pwm_3,pwm_4,y_x,y_y,"
             "y_z\n0.0,0\n";
      out.close();
      CHECK_THROWS_AS(data::load_dataset(dir), IoFailure);
    }

    SUBCASE("schema version mismatch is rejected") {
      std::ofstream out(dir + "/meta.json", std::ios::trunc);
      out << R"({"schema_version": 999, "conditions": 2})";
      out.close();
      CHECK_THROWS_AS(data::load_dataset(dir), SchemaMismatch);
    }

    SUBCASE("empty subdataset violates the invariant") {
      data::FlightDataset bad = ds;
      bad.train[1].clear();
      CHECK_THROWS_AS(bad.validate(), SchemaMismatch);
    }

    SUBCASE("condition index mismatch violates the invariant") {
      data::FlightDataset bad = ds;
      bad.train[1][3].k = 0;
      CHECK_THROWS_AS(bad.validate(), SchemaMismatch);
    }

    std::filesystem::remove_all(dir);
  }
}

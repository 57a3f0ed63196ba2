// Copyright 2026 The retouch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "retouch/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "retouch/errors.hpp"
#include "retouch/simd/kernels.hpp"

namespace retouch::model {

namespace {

inline double sq(double x) { return x * x; }

}  // namespace

void RobotParams::validate() const {
  const double scalars[] = {m2, m3, m4, c2, c3, c4, l24, ix2, ix3, iy2};
  for (double x : scalars) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("robot parameters must be finite and >= 0");
  }
  for (std::size_t i = 0; i < kJoints; ++i) {
    if (!(joint_inertia[i] >= 0.0) || !(friction[i] >= 0.0))
      throw ConfigError("joint inertia and friction must be >= 0");
    if (!(cutoff[i] > 0.0) || !std::isfinite(cutoff[i]))
      throw ConfigError("cutoff frequencies must be > 0");
  }
  if (!(j_floor > 0.0)) throw ConfigError("j_floor must be > 0");
  if (!(g0 >= 0.0)) throw ConfigError("g0 must be >= 0");
}

JointVec inertia_matrix(const JointVec& q, const RobotParams& p) {
  require_finite(q, "inertia_matrix");
  const double th2 = q[1], th3 = q[2], th4 = q[3];
  const double s2 = std::sin(th2), c2 = std::cos(th2);
  const double s3 = std::sin(th3), c3 = std::cos(th3);
  const double s4 = std::sin(th4), c4 = std::cos(th4);
  const double s2s = s2 * s2, s3s = s3 * s3, s4s = s4 * s4;
  const double l2 = p.l2();
  const double k4 = sq(p.c4) * p.m4;

  double j1 = sq(p.c2) * p.m2 * s2s + sq(p.c3) * p.m3 * s2s + 2.0 * p.c3 * l2 * p.m3 * s2s;
  j1 -= 0.125 * k4 *
        (std::cos(-2.0 * th2 + th3 + 2.0 * th4) - std::cos(2.0 * th2 - th3 + 2.0 * th4) +
         std::cos(2.0 * th2 + th3 - 2.0 * th4) - std::cos(2.0 * th2 + th3 + 2.0 * th4));
  j1 += k4 * s2s * s3s * s4s - 2.0 * k4 * s2s * s4s;
  j1 += k4 * s2s + k4 * s4s - 2.0 * p.c4 * l2 * p.m4 * s2s * c4;
  j1 += 2.0 * p.c4 * l2 * p.m4 * s2 * s4 * c2 * c3 + p.ix2 * s2s;
  j1 += p.ix3 * s2s - p.iy2 * s2s + p.iy2 + sq(l2) * p.m3 * s2s;
  j1 += sq(l2) * p.m4 * s2s;

  const double j2 = sq(p.c2) * p.m2 + sq(p.c3) * p.m3 + 2.0 * p.c3 * l2 * p.m3 - k4 * s3s * s4s +
                    k4 - 2.0 * p.c4 * l2 * p.m4 * c4 + p.ix2 + p.ix3 + sq(l2) * p.m3 +
                    sq(l2) * p.m4;

  const double j3 = k4 * s4s;

  JointVec j = p.joint_inertia;
  j[0] = j1;
  j[1] = j2;
  j[2] = j3;
  for (double& x : j.v) x = std::max(x, p.j_floor);
  return j;
}

JointVec gravity_vector(const JointVec& q, const RobotParams& p) {
  require_finite(q, "gravity_vector");
  const double s2 = std::sin(q[1]), c2 = std::cos(q[1]);
  const double s3 = std::sin(q[2]), c3 = std::cos(q[2]);
  const double s4 = std::sin(q[3]), c4 = std::cos(q[3]);
  const double l2 = p.l2(), l3 = p.l3();

  JointVec g;
  g[1] = p.g0 * (p.c2 * p.m2 * s2 + p.m3 * (p.c3 + l2) * s2 +
                 p.m4 * (p.c4 * s4 * c2 * c3 + (-p.c4 * c4 + l2 + l3) * s2));
  g[2] = -p.c4 * p.g0 * p.m4 * s2 * s3 * s4;
  g[3] = p.c4 * p.g0 * p.m4 * (s2 * c3 * c4 - s4 * c2);
  return g;
}

JointVec friction_torque(const JointVec& dq, const RobotParams& p) { return hadamard(p.friction, dq); }

RobotState step_dynamics(const RobotState& s, const JointVec& tau_ref, const JointVec& tau_res,
                         const RobotParams& p, double dt) {
  if (!(dt > 0.0)) throw ConfigError("step_dynamics: dt must be > 0");
  const JointVec inertia = inertia_matrix(s.q, p);
  const JointVec grav = gravity_vector(s.q, p);
  RobotState n = s;
  simd::kernels().semi_implicit_euler(n.q.data(), n.dq.data(), tau_ref.data(), tau_res.data(),
                                      p.friction.data(), grav.data(), inertia.data(), dt);
  n.t = s.t + dt;
  n.step = s.step + 1;
  if (!n.q.all_finite() || !n.dq.all_finite()) {
    std::ostringstream os;
    os << "dynamics diverged at t=" << s.t << " (tau_ref finite: " << tau_ref.all_finite()
       << ", tau_res finite: " << tau_res.all_finite() << ")";
    throw NumericalError(os.str(), s.step);
  }
  return n;
}

Vec2 forward_kinematics_planar(const JointVec& q, const RobotParams& p) {
  const double a = q[1], b = q[1] + q[3];
  return {p.l24 * std::sin(a) + p.l_distal() * std::sin(b),
          p.l24 * std::cos(a) + p.l_distal() * std::cos(b)};
}

PlanarJacobian planar_jacobian(const JointVec& q, const RobotParams& p) {
  const double a = q[1], b = q[1] + q[3];
  const double ld = p.l_distal();
  return {p.l24 * std::cos(a) + ld * std::cos(b), ld * std::cos(b),
          -p.l24 * std::sin(a) - ld * std::sin(b), -ld * std::sin(b)};
}

Vec2 planar_velocity(const JointVec& q, const JointVec& dq, const RobotParams& p) {
  const PlanarJacobian j = planar_jacobian(q, p);
  return {j.dx_dq2 * dq[1] + j.dx_dq4 * dq[3], j.dy_dq2 * dq[1] + j.dy_dq4 * dq[3]};
}

JointVec planar_force_to_torque(const JointVec& q, Vec2 f, const RobotParams& p) {
  const PlanarJacobian j = planar_jacobian(q, p);
  JointVec tau;
  tau[1] = j.dx_dq2 * f.x + j.dy_dq2 * f.y;
  tau[3] = j.dx_dq4 * f.x + j.dy_dq4 * f.y;
  return tau;
}

// ---------------------------------------------------------------------------

void PegTaskEnv::validate() const {
  if (!(hole_clearance > 0.0)) throw ConfigError("hole_clearance must be > 0");
  if (!(insertion_depth_goal > 0.0)) throw ConfigError("insertion_depth_goal must be > 0");
  if (!(wall_stiffness >= 0.0) || !(wall_damping >= 0.0))
    throw ConfigError("wall stiffness and damping must be >= 0");
  if (!(hole_chamfer >= 0.0) || !(hole_depth > 0.0) || !(rack_half_width > 0.0))
    throw ConfigError("hole geometry must be positive");
  if (!(top_slip_force > 0.0)) throw ConfigError("top_slip_force must be > 0");
  if (insertion_depth_goal > hole_depth) throw ConfigError("insertion_depth_goal exceeds hole_depth");
  if (!(grip_threshold > 0.0) || !(grip_stiffness >= 0.0) || !(capture_radius > 0.0))
    throw ConfigError("gripper parameters must be positive");
}

std::optional<JointVec> inverse_kinematics_planar(Vec2 tip, const RobotParams& p,
                                                  const JointVec& seed, double elbow_sign) {
  const double l1 = p.l24, l2 = p.l_distal();
  const double c = (tip.x * tip.x + tip.y * tip.y - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (!(c >= -1.0 && c <= 1.0)) return std::nullopt;
  const double th4 = (elbow_sign < 0.0 ? -1.0 : 1.0) * std::acos(c);
  JointVec q = seed;
  q[3] = th4;
  q[1] = std::atan2(tip.x, tip.y) - std::atan2(l2 * std::sin(th4), l1 + l2 * std::cos(th4));
  return q;
}

const char* to_string(TubeLocation where) {
  switch (where) {
    case TubeLocation::kSource:
      return "source";
    case TubeLocation::kHeld:
      return "held";
    case TubeLocation::kTarget:
      return "target";
    case TubeLocation::kDropped:
      return "dropped";
  }
  return "?";
}

TubeState TubeState::initial(const PegTaskEnv& env) {
  TubeState t;
  t.where = TubeLocation::kSource;
  t.bottom = {env.source_hole.x, env.source_hole.y - env.insertion_depth_goal};
  return t;
}

WallForces lateral_wall_forces(double offset, double half_gap, double velocity, double stiffness,
                               double damping) {
  WallForces w;
  const double pen_left = -offset - half_gap;
  const double pen_right = offset - half_gap;
  if (pen_left > 0.0) w.from_left = std::max(0.0, stiffness * pen_left - damping * velocity);
  if (pen_right > 0.0) w.from_right = std::max(0.0, stiffness * pen_right + damping * velocity);
  return w;
}

namespace {

struct RackContact {
  Vec2 force{};
  double lateral = 0.0;
  double depth = 0.0;
  double top = 0.0;
  bool in_mouth = false;
};

// Contact of the carried tube's bottom point with one rack. In (u, depth)
// coordinates, u = |x - hole.x| and depth below the rack top, the solid is
// u > clearance with depth > max(0, clearance + chamfer - u). The point is
// pushed out along the closest exit: the hole wall, the chamfer, or the top.
RackContact rack_contact(Vec2 pt, Vec2 vel, Vec2 hole, const PegTaskEnv& env) {
  RackContact rc;
  const double e = pt.x - hole.x;
  const double u = std::abs(e);
  const double depth = hole.y - pt.y;
  if (u >= env.rack_half_width || depth <= 0.0) return rc;

  const double c = env.hole_clearance;
  const double ch = env.hole_chamfer;
  const double k = env.wall_stiffness;
  const double b = env.wall_damping;
  rc.in_mouth = u < c + ch;
  if (rc.in_mouth) rc.depth = depth;

  if (u <= c) {
    if (depth > env.hole_depth) rc.force.y = std::max(0.0, k * (depth - env.hole_depth) - b * vel.y);
    return rc;
  }

  const double sgn = e >= 0.0 ? 1.0 : -1.0;
  const double pen_wall = u - c;
  double pen_other = depth;  // flat top
  bool chamfer = false;
  if (u < c + ch) {
    const double below = depth - (c + ch - u);
    if (below <= 0.0) return rc;  // above the lead-in surface
    pen_other = below / std::sqrt(2.0);
    chamfer = true;
  }

  if (pen_wall <= pen_other) {
    const WallForces w = lateral_wall_forces(e, c, vel.x, k, b);
    rc.force.x = w.net();
    rc.lateral = w.magnitude();
  } else if (chamfer) {
    const double inv = 1.0 / std::sqrt(2.0);
    const Vec2 n{-sgn * inv, inv};
    const double vn = vel.x * n.x + vel.y * n.y;
    const double f = std::max(0.0, k * pen_other - b * vn);
    rc.force = {f * n.x, f * n.y};
    rc.lateral = std::abs(rc.force.x);
  } else {
    rc.force.y = std::max(0.0, k * pen_other - b * vel.y);
    rc.top = rc.force.y;
  }
  return rc;
}

double seated_depth(const TubeState& tube, const PegTaskEnv& env) {
  if (tube.where == TubeLocation::kSource) return std::max(0.0, env.source_hole.y - tube.bottom.y);
  if (tube.where == TubeLocation::kTarget) return std::max(0.0, env.target_hole.y - tube.bottom.y);
  return 0.0;
}

}  // namespace

ContactResult contact_torque(const RobotState& s, const PegTaskEnv& env, const RobotParams& p,
                             const TubeState& tube) {
  ContactResult r;
  const Vec2 tip = forward_kinematics_planar(s.q, p);

  bool gripping = tube.where == TubeLocation::kHeld;
  if (tube.where == TubeLocation::kSource || tube.where == TubeLocation::kTarget) {
    gripping = std::hypot(tip.x - tube.bottom.x, tip.y - tube.bottom.y) <= env.capture_radius;
  }
  if (gripping) {
    const double squeeze = s.q[7] - env.grip_contact_angle;
    if (squeeze > 0.0) r.info.grip_torque = env.grip_stiffness * squeeze;
  }
  r.info.tube_held = r.info.grip_torque >= env.grip_threshold;
  r.info.depth = seated_depth(tube, env);

  if (tube.where == TubeLocation::kHeld) {
    const Vec2 pt{tip.x + tube.grasp_offset.x, tip.y + tube.grasp_offset.y};
    const Vec2 vel = planar_velocity(s.q, s.dq, p);
    const RackContact src = rack_contact(pt, vel, env.source_hole, env);
    const RackContact dst = rack_contact(pt, vel, env.target_hole, env);
    const Vec2 f{src.force.x + dst.force.x, src.force.y + dst.force.y};
    r.info.force = f;
    r.info.lateral_force = std::max(src.lateral, dst.lateral);
    r.info.depth = std::max(src.depth, dst.depth);
    r.info.top_force = src.top + dst.top;
    r.tau_res = -planar_force_to_torque(s.q, f, p);
    // -0.0 lanes from the negation compare equal to zero; normalise them.
    for (double& x : r.tau_res.v) x = x == 0.0 ? 0.0 : x;
  }
  r.tau_res[7] = r.info.grip_torque;
  r.info.in_contact = !(r.tau_res == JointVec::zero());
  return r;
}

TubeState advance_tube(const TubeState& tube, const RobotState& s, const ContactInfo& info,
                       const PegTaskEnv& env, const RobotParams& p) {
  TubeState n = tube;
  const Vec2 tip = forward_kinematics_planar(s.q, p);
  switch (tube.where) {
    case TubeLocation::kHeld: {
      n.bottom = {tip.x + tube.grasp_offset.x, tip.y + tube.grasp_offset.y};
      if (info.top_force > env.top_slip_force) {
        n.where = TubeLocation::kDropped;
        break;
      }
      if (info.tube_held) break;
      const auto seated_in = [&](Vec2 hole) {
        return std::abs(n.bottom.x - hole.x) < env.hole_clearance + env.hole_chamfer &&
               n.bottom.y < hole.y;
      };
      if (seated_in(env.target_hole)) {
        n.where = TubeLocation::kTarget;
      } else if (seated_in(env.source_hole)) {
        n.where = TubeLocation::kSource;
      } else {
        n.where = TubeLocation::kDropped;
      }
      break;
    }
    case TubeLocation::kSource:
    case TubeLocation::kTarget:
      if (info.tube_held) {
        n.where = TubeLocation::kHeld;
        n.grasp_offset = {tube.bottom.x - tip.x, tube.bottom.y - tip.y};
      }
      break;
    case TubeLocation::kDropped:
      break;
  }
  return n;
}

}  // namespace retouch::model

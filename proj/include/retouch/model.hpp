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

#pragma once

// Manipulator model: diagonal inertia, gravity, viscous friction, fixed-step
// forward dynamics, and the planar peg-in-hole environment used as the
// test-tube transfer stand-in.

#include <cstdint>
#include <optional>

#include "retouch/joint_vec.hpp"

namespace retouch::model {

/// Identified parameters of the 7-DoF arm plus gripper (joint 8).
///
/// The closed-form inertia and gravity terms use two link lengths l2 and l3
/// while only the joint-2-to-joint-4 length is identified. We take
/// l2 = l24 and l3 = 0. The planar tool point sits at distance c4 beyond
/// joint 4.
struct RobotParams {
  double m2 = 0.0128;
  double m3 = 0.0000;
  double m4 = 0.4505;
  double c2 = 0.0002;
  double c3 = 0.0262;
  double c4 = 0.2865;
  double l24 = 0.2500;
  double ix2 = 0.0197;
  double ix3 = 0.0197;
  double iy2 = 0.0008;
  /// J4..J8 (kg m^2); lanes 0..2 are unused and kept at zero.
  JointVec joint_inertia{0.0, 0.0, 0.0, 0.0370, 0.0054, 0.0066, 0.0049, 0.0055};
  /// D1..D8 (N m s/rad).
  JointVec friction{0.0443, 0.2343, 0.0501, 0.1820, 0.0122, 0.0196, 0.0170, 0.0105};
  /// fC1..fC8 (rad/s), shared by pseudo-differentiation, DOB and RFOB.
  JointVec cutoff{10.0, 15.0, 10.0, 15.0, 90.0, 90.0, 90.0, 90.0};
  double g0 = 9.81;
  /// Lower bound on every diagonal inertia entry (J3 vanishes at theta4 = 0).
  double j_floor = 0.002;

  double l2() const { return l24; }
  double l3() const { return 0.0; }
  double l_distal() const { return c4; }

  /// Throws ConfigError on negative masses/inertias/friction, non-positive
  /// cutoffs, or j_floor <= 0.
  void validate() const;
};

struct RobotState {
  JointVec q;   // rad
  JointVec dq;  // rad/s
  double t = 0.0;
  std::int64_t step = 0;
};

/// Diagonal entries of J(q), each clamped below by p.j_floor.
JointVec inertia_matrix(const JointVec& q, const RobotParams& p);

/// Gravity torques [0, g2, g3, g4, 0, 0, 0, 0].
JointVec gravity_vector(const JointVec& q, const RobotParams& p);

/// Viscous friction torques D * dq.
JointVec friction_torque(const JointVec& dq, const RobotParams& p);

/// One semi-implicit Euler step of
///   J(q) ddq = tau_ref - tau_res - D dq - g(q)
/// where tau_res is the torque the environment exerts against the robot.
/// Throws NumericalError when the new state is not finite.
RobotState step_dynamics(const RobotState& s, const JointVec& tau_ref, const JointVec& tau_res,
                         const RobotParams& p, double dt);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

/// Tool point in the vertical plane spanned by joints 2 and 4:
///   x = l24 sin(q2) + l_d sin(q2 + q4)
///   y = l24 cos(q2) + l_d cos(q2 + q4)
/// The all-zero pose points straight up.
Vec2 forward_kinematics_planar(const JointVec& q, const RobotParams& p);

/// d(x, y)/d(q2, q4) as {dx/dq2, dx/dq4, dy/dq2, dy/dq4}.
struct PlanarJacobian {
  double dx_dq2, dx_dq4, dy_dq2, dy_dq4;
};
PlanarJacobian planar_jacobian(const JointVec& q, const RobotParams& p);

/// Tool-point velocity.
Vec2 planar_velocity(const JointVec& q, const JointVec& dq, const RobotParams& p);

/// Joint torques produced by a planar force applied at the tool point
/// (J^T f on joints 2 and 4, zero elsewhere).
JointVec planar_force_to_torque(const JointVec& q, Vec2 force, const RobotParams& p);

/// Joint-2/joint-4 angles placing the tip at `tip`, written into lanes 1 and
/// 3 of `seed` (other lanes kept). `elbow_sign` picks the sign of theta4.
/// Returns nullopt when the point is out of reach.
std::optional<JointVec> inverse_kinematics_planar(Vec2 tip, const RobotParams& p,
                                                  const JointVec& seed = {}, double elbow_sign = 1.0);

// ---------------------------------------------------------------------------
// Peg-in-hole environment

/// Two racks, each with one hole whose mouth center is given. Positions are
/// in the arm's vertical plane with the origin at joint 2. Both racks are
/// flat-topped slabs of half-width rack_half_width with a chamfered hole.
struct PegTaskEnv {
  Vec2 source_hole{0.30, 0.08};
  Vec2 target_hole{0.18, 0.08};
  double hole_clearance = 0.0005;   // m, lateral free play of the tube per side
  double hole_chamfer = 0.002;      // m, 45 degree lead-in width
  double hole_depth = 0.094;        // m
  double rack_half_width = 0.035;   // m
  double top_slip_force = 1.0;      // N, rack-top push that knocks a held tube out of the grip
  double wall_stiffness = 2000.0;   // N/m
  double wall_damping = 20.0;       // N s/m
  double grip_threshold = 0.05;     // N m, tube counts as held at or above this
  double grip_contact_angle = 0.40; // rad, joint-8 angle where fingers meet the tube
  double grip_stiffness = 1.0;      // N m/rad
  double capture_radius = 0.006;    // m
  double insertion_depth_goal = 0.03;  // m
  double lateral_force_limit = 3.0;    // N

  /// Throws ConfigError if clearance <= 0, depth goal <= 0, negative
  /// stiffness/damping/slip force, or the goal is deeper than the hole.
  void validate() const;
};

enum class TubeLocation : std::uint8_t { kSource = 0, kHeld = 1, kTarget = 2, kDropped = 3 };

const char* to_string(TubeLocation where);

/// Where the test tube is. `bottom` is the tube's lower end; while held it
/// tracks the tool point plus `grasp_offset`.
struct TubeState {
  TubeLocation where = TubeLocation::kSource;
  Vec2 bottom{};
  Vec2 grasp_offset{};

  /// Tube seated in the source hole at the goal depth.
  static TubeState initial(const PegTaskEnv& env);
  friend bool operator==(const TubeState&, const TubeState&) = default;
};

struct ContactInfo {
  bool in_contact = false;
  double lateral_force = 0.0;  // N, magnitude of the larger wall force
  double depth = 0.0;          // m, tube bottom below the mouth of the hole it is in
  bool tube_held = false;
  double grip_torque = 0.0;    // N m, gripper reaction
  Vec2 force{};                // N, rack force on the tube
  double top_force = 0.0;      // N, part of the rack force from the flat top beside a hole
  friend bool operator==(const ContactInfo&, const ContactInfo&) = default;
};

struct ContactResult {
  JointVec tau_res;  // torque the environment exerts against the robot
  ContactInfo info;
};

/// Wall forces on a point at lateral `offset` from a slot centre with free
/// play `half_gap` per side. Each wall pushes only outward from itself.
struct WallForces {
  double from_left = 0.0;   // >= 0, pushes toward +x
  double from_right = 0.0;  // >= 0, pushes toward -x
  double net() const { return from_left - from_right; }
  double magnitude() const { return from_left > from_right ? from_left : from_right; }
};
WallForces lateral_wall_forces(double offset, double half_gap, double velocity, double stiffness,
                               double damping);

/// Environment reaction for the current state: rack contact on the carried
/// tube (mapped through the planar Jacobian) and gripper reaction on joint 8.
/// Returns exactly zero torque iff info.in_contact is false.
ContactResult contact_torque(const RobotState& s, const PegTaskEnv& env, const RobotParams& p,
                             const TubeState& tube);

/// Tube bookkeeping after a control step: grasp when the gripper squeezes the
/// tube hard enough, carry while held, seat or drop on release. A held tube
/// pushed onto the flat rack top harder than top_slip_force is knocked out of
/// the grip and dropped where it is.
TubeState advance_tube(const TubeState& tube, const RobotState& s, const ContactInfo& info,
                       const PegTaskEnv& env, const RobotParams& p);

}  // namespace retouch::model

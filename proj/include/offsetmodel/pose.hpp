#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace offsetmodel {

// Upper-left-limb configuration in spherical polar angles, degrees.
// theta measures from the body-down axis, phi from body-right toward
// body-forward. Elbow angles are relative to the upper-arm frame.
struct ArmPose {
    double phi_s = 0.0;
    double theta_s = 0.0;
    double phi_e = 0.0;
    double theta_e = 0.0;
};

// Additive angular perturbation on one joint's (phi, theta) plane, degrees.
struct JointOffset2D {
    double d_phi = 0.0;
    double d_theta = 0.0;
};

// Simultaneous shoulder and elbow offsets.
struct CompositeOffset {
    JointOffset2D shoulder;
    JointOffset2D elbow;
};

struct LimbLengths {
    double upper_arm = 0.3; // meters, > 0
    double forearm = 0.25;  // meters, > 0
};

using Vec3 = std::array<double, 3>;

struct JointPositions {
    Vec3 shoulder{0.0, 0.0, 0.0};
    Vec3 elbow{0.0, 0.0, 0.0};
    Vec3 wrist{0.0, 0.0, 0.0};
};

enum class Joint { shoulder, elbow };
enum class Axis { phi, theta };

double offset_strength(const JointOffset2D& o);

// Wrap to (-180, 180].
double wrap_phi(double deg);
// Clamp to [0, 180].
double clamp_theta(double deg);

bool pose_is_valid(const ArmPose& p);
void validate_pose(const ArmPose& p); // throws InvalidInputError
bool pose_almost_equal(const ArmPose& a, const ArmPose& b, double tol = 1e-6);
bool offset_almost_equal(const CompositeOffset& a, const CompositeOffset& b, double tol = 1e-6);

// Component-wise addition with theta clamped and phi wrapped; total on
// finite input.
ArmPose apply_offset(const ArmPose& pose, const CompositeOffset& offset);

// Shoulder at the origin of a right-handed body frame (x right, y up,
// z forward). theta = 0 points body-down. The elbow frame's polar axis is
// the upper-arm direction; its azimuth reference is body-forward projected
// orthogonal to the upper arm, falling back to body-up near the forward
// pole.
JointPositions forward_kinematics(const ArmPose& pose, const LimbLengths& lengths);

// Max over joints of the L1 distance between corresponding positions.
double skeletal_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
double skeletal_distance(const JointPositions& a, const JointPositions& b);

// Upper-limb ergonomic effort proxy: upper-arm band score (1-4 over
// theta_s) plus lower-arm band score (1 when elbow flexion is in
// [60, 100] degrees, else 2). Lower is easier. This is a posture-band
// proxy, not the full RULA worksheet.
int rula_arm_score(const ArmPose& pose);

} // namespace offsetmodel

#include "offsetmodel/pose.hpp"
#include "offsetmodel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace offsetmodel {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

Vec3 add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 normalized(const Vec3& a) { return scale(a, 1.0 / norm(a)); }

// Unit direction for polar angle theta (from body-down) and azimuth phi
// (from body-right toward body-forward).
Vec3 upper_arm_direction(double phi_deg, double theta_deg) {
    const double phi = phi_deg * kDegToRad;
    const double theta = theta_deg * kDegToRad;
    return {std::sin(theta) * std::cos(phi), -std::cos(theta), std::sin(theta) * std::sin(phi)};
}

} // namespace

double offset_strength(const JointOffset2D& o) {
    return std::hypot(o.d_phi, o.d_theta);
}

double wrap_phi(double deg) {
    double w = std::fmod(deg + 180.0, 360.0);
    if (w <= 0.0) w += 360.0;
    return w - 180.0;
}

double clamp_theta(double deg) {
    return std::clamp(deg, 0.0, 180.0);
}

bool pose_is_valid(const ArmPose& p) {
    const bool finite = std::isfinite(p.phi_s) && std::isfinite(p.theta_s) &&
                        std::isfinite(p.phi_e) && std::isfinite(p.theta_e);
    return finite && p.theta_s >= 0.0 && p.theta_s <= 180.0 && p.theta_e >= 0.0 &&
           p.theta_e <= 180.0 && p.phi_s > -180.0 && p.phi_s <= 180.0 && p.phi_e > -180.0 &&
           p.phi_e <= 180.0;
}

void validate_pose(const ArmPose& p) {
    if (!pose_is_valid(p)) {
        throw InvalidInputError("arm pose out of range: theta in [0,180], phi in (-180,180]");
    }
}

bool pose_almost_equal(const ArmPose& a, const ArmPose& b, double tol) {
    return std::abs(a.phi_s - b.phi_s) <= tol && std::abs(a.theta_s - b.theta_s) <= tol &&
           std::abs(a.phi_e - b.phi_e) <= tol && std::abs(a.theta_e - b.theta_e) <= tol;
}

bool offset_almost_equal(const CompositeOffset& a, const CompositeOffset& b, double tol) {
    return std::abs(a.shoulder.d_phi - b.shoulder.d_phi) <= tol &&
           std::abs(a.shoulder.d_theta - b.shoulder.d_theta) <= tol &&
           std::abs(a.elbow.d_phi - b.elbow.d_phi) <= tol &&
           std::abs(a.elbow.d_theta - b.elbow.d_theta) <= tol;
}

ArmPose apply_offset(const ArmPose& pose, const CompositeOffset& offset) {
    ArmPose out;
    out.phi_s = wrap_phi(pose.phi_s + offset.shoulder.d_phi);
    out.theta_s = clamp_theta(pose.theta_s + offset.shoulder.d_theta);
    out.phi_e = wrap_phi(pose.phi_e + offset.elbow.d_phi);
    out.theta_e = clamp_theta(pose.theta_e + offset.elbow.d_theta);
    return out;
}

JointPositions forward_kinematics(const ArmPose& pose, const LimbLengths& lengths) {
    if (!(lengths.upper_arm > 0.0) || !(lengths.forearm > 0.0)) {
        throw InvalidInputError("limb lengths must be positive");
    }

    JointPositions out;
    const Vec3 u = upper_arm_direction(pose.phi_s, pose.theta_s);
    out.elbow = scale(u, lengths.upper_arm);

    const Vec3 body_forward{0.0, 0.0, 1.0};
    const Vec3 body_up{0.0, 1.0, 0.0};

    // Azimuth reference in the plane orthogonal to u.
    Vec3 reference = body_forward;
    if (std::abs(dot(u, body_forward)) > 1.0 - 1e-9) reference = body_up;
    const Vec3 e1 = normalized(add(reference, scale(u, -dot(reference, u))));
    const Vec3 e2 = cross(u, e1);

    const double phi_e = pose.phi_e * kDegToRad;
    const double theta_e = pose.theta_e * kDegToRad;
    const Vec3 forearm_dir =
        add(scale(u, std::cos(theta_e)),
            scale(add(scale(e1, std::cos(phi_e)), scale(e2, std::sin(phi_e))), std::sin(theta_e)));

    out.wrist = add(out.elbow, scale(forearm_dir, lengths.forearm));
    return out;
}

double skeletal_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw InvalidInputError("skeletal_distance: joint lists must be non-empty and equal-length");
    }
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double l1 = std::abs(a[i][0] - b[i][0]) + std::abs(a[i][1] - b[i][1]) +
                          std::abs(a[i][2] - b[i][2]);
        best = std::max(best, l1);
    }
    return best;
}

double skeletal_distance(const JointPositions& a, const JointPositions& b) {
    return skeletal_distance(std::vector<Vec3>{a.shoulder, a.elbow, a.wrist},
                             std::vector<Vec3>{b.shoulder, b.elbow, b.wrist});
}

int rula_arm_score(const ArmPose& pose) {
    int upper = 4;
    if (pose.theta_s <= 20.0) {
        upper = 1;
    } else if (pose.theta_s <= 45.0) {
        upper = 2;
    } else if (pose.theta_s <= 90.0) {
        upper = 3;
    }
    const double flexion = 180.0 - pose.theta_e;
    const int lower = (flexion >= 60.0 && flexion <= 100.0) ? 1 : 2;
    return upper + lower;
}

} // namespace offsetmodel

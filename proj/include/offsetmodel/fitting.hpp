#pragma once

#include "offsetmodel/dataset.hpp"
#include "offsetmodel/pose.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <shared_mutex>
#include <tuple>
#include <vector>

namespace offsetmodel {

enum class Sign { neg, pos };

// p(x) = a x^2 + b x + c over a single-axis offset x in degrees.
// a >= 0 is enforced by the fitter so inversion stays well-posed.
struct AxisQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double rmse = 0.0;

    double raw(double x) const { return (a * x + b) * x + c; }
    // Probability evaluation, clamped to [0, 1].
    double evaluate(double x) const;
};

struct AxisSample {
    double x = 0.0;     // offset, degrees
    double p_hat = 0.0; // empirical noticing probability
};

// Ordinary least squares; refits with a = 0 when curvature comes out
// negative. Needs >= 3 distinct x values.
AxisQuadratic fit_axis_quadratic(const std::vector<AxisSample>& cells);

// Signed crossings of p(x) = p. With a > 0 and p > p(0) the roots straddle
// zero; `one_sided` flags the degenerate cases (both crossings on one side,
// or a linear curve's single crossing duplicated).
struct QuadraticCrossings {
    double neg = 0.0;
    double pos = 0.0;
    bool one_sided = false;
};

QuadraticCrossings invert_quadratic(const AxisQuadratic& q, double p);

// Positive/negative crossing magnitudes at one probability, both axes of a
// joint. One-sided inversions fall back to the closer crossing's magnitude.
struct SingleAxisLevels {
    double phi_pos = 0.0;
    double phi_neg = 0.0;
    double theta_pos = 0.0;
    double theta_neg = 0.0;
};

// Quadrant ellipse: boundary x^2/a^2 + y^2/b^2 = 1 with a picked from
// (phi_pos, phi_neg) by sign(x) and b from (theta_pos, theta_neg) by
// sign(y). All semi-axes are positive magnitudes.
struct EllipseLevelSet {
    double probability = 0.0;
    double phi_pos = 0.0;
    double phi_neg = 0.0;
    double theta_pos = 0.0;
    double theta_neg = 0.0;

    // Quadrant metric: <= 1 inside, 1 on the boundary.
    double quadrant_metric(double x, double y) const;
    bool contains(double x, double y) const { return quadrant_metric(x, y) <= 1.0; }
    bool contains(const JointOffset2D& o) const { return contains(o.d_phi, o.d_theta); }

    struct Box {
        double phi_lo, phi_hi, theta_lo, theta_hi;
    };
    Box bounding_box() const { return {-phi_neg, phi_pos, -theta_neg, theta_pos}; }
};

EllipseLevelSet ellipse_from_single_axis(const SingleAxisLevels& levels, double p);

// Eq.-style linear map from pose angles to a single-axis offset value:
// value = A*phi_s + B*theta_s + C*phi_e + D*theta_e + E.
struct PoseLinearCoeffs {
    std::array<double, 5> coeffs{0.0, 0.0, 0.0, 0.0, 0.0};
    double residual_rms = 0.0;

    double predict(const ArmPose& pose) const {
        return coeffs[0] * pose.phi_s + coeffs[1] * pose.theta_s + coeffs[2] * pose.phi_e +
               coeffs[3] * pose.theta_e + coeffs[4];
    }
};

struct PoseLinearSample {
    ArmPose pose;
    double value = 0.0;
};

// Least squares over >= 5 affinely independent poses; throws
// DegenerateFitError naming the rank when the design is deficient.
PoseLinearCoeffs fit_pose_linear(const std::vector<PoseLinearSample>& samples);

struct JointQuadratics {
    AxisQuadratic phi;
    AxisQuadratic theta;
};

struct PoseQuadratics {
    JointQuadratics shoulder;
    JointQuadratics elbow;

    const JointQuadratics& joint(Joint j) const {
        return j == Joint::shoulder ? shoulder : elbow;
    }
    JointQuadratics& joint(Joint j) { return j == Joint::shoulder ? shoulder : elbow; }
};

// Per-pose quadratics plus the cross-pose linear generalization. Queries on
// catalog poses use their quadratics directly; other poses go through
// pose-linear coefficients fitted at the queried probability (cached).
class NoticeabilityModel {
public:
    NoticeabilityModel() = default;
    NoticeabilityModel(std::vector<ArmPose> poses, std::vector<PoseQuadratics> quadratics);

    // Copies drop the pose-linear cache; the mutex keeps this type
    // non-movable, so copies stand in for moves too.
    NoticeabilityModel(const NoticeabilityModel& other);
    NoticeabilityModel& operator=(const NoticeabilityModel& other);

    const std::vector<ArmPose>& poses() const { return poses_; }
    const std::vector<PoseQuadratics>& quadratics() const { return quadratics_; }

    bool empty() const { return poses_.empty(); }
    std::size_t catalog_index(const ArmPose& pose) const; // npos when absent

    // Mean of the two axes' p(0) for a catalog pose; catalog average for
    // any other pose.
    double baseline(Joint joint, const ArmPose& pose) const;

    // Smallest probability at which every quadratic involved in building
    // this joint's level set has a crossing.
    double probability_floor(Joint joint, const ArmPose& pose) const;

    // Signed single-axis crossings at probability p (direct or pose-linear).
    SingleAxisLevels single_axis_levels(Joint joint, const ArmPose& pose, double p) const;

    EllipseLevelSet level_set(Joint joint, const ArmPose& pose, double p) const;

    // Level of the quadrant-ellipse boundary through `offset`, by bisection
    // to 1e-6; baseline inside the degenerate smallest set, 1.0 outside the
    // p = 1 set.
    double probability_2d(Joint joint, const ArmPose& pose, const JointOffset2D& offset) const;

    // Pose-linear coefficients fitted over the catalog at probability p for
    // (joint, axis, sign); cached per p.
    PoseLinearCoeffs pose_linear(Joint joint, Axis axis, Sign sign, double p) const;

private:
    double axis_value(Joint joint, Axis axis, Sign sign, const ArmPose& pose, std::size_t idx,
                      double p) const;

    std::vector<ArmPose> poses_;
    std::vector<PoseQuadratics> quadratics_;
    std::array<double, 2> joint_floor_{0.0, 0.0};    // max p(0) over catalog, per joint
    std::array<double, 2> joint_baseline_{0.0, 0.0}; // mean baseline over catalog, per joint

    struct CacheKey {
        std::int64_t p_bits;
        int joint, axis, sign;
        bool operator<(const CacheKey& o) const {
            return std::tie(p_bits, joint, axis, sign) <
                   std::tie(o.p_bits, o.joint, o.axis, o.sign);
        }
    };
    mutable std::map<CacheKey, PoseLinearCoeffs> linear_cache_;
    mutable std::shared_mutex cache_mutex_;
};

// Fit quadratics for every catalog pose from a dataset's single-axis
// phase-1 cells (the zero-offset cell included per axis).
NoticeabilityModel fit_model(const NoticeabilityDataset& dataset);

// Same, from analytic cells (offset tasks paired with exact probabilities).
NoticeabilityModel fit_model_from_cells(const std::vector<ArmPose>& poses,
                                        const std::vector<ProbabilityCell>& cells);

// Heatmap export: rows d_phi,d_theta,p over a square grid of extent
// [-extent, extent] with n points per side.
std::string probability_grid_csv(const NoticeabilityModel& model, Joint joint, const ArmPose& pose,
                                 double extent, std::size_t n);

} // namespace offsetmodel

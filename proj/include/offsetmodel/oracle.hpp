#pragma once

#include "offsetmodel/dataset.hpp"
#include "offsetmodel/execution.hpp"
#include "offsetmodel/fitting.hpp"
#include "offsetmodel/offset_model.hpp"
#include "offsetmodel/pose.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace offsetmodel {

// Ground-truth curvature (probability per squared degree) of one joint's
// radial quadratic, per axis and sign.
struct OracleAxisParams {
    double k_pos = 0.0;
    double k_neg = 0.0;
};

struct OracleJointParams {
    OracleAxisParams phi;
    OracleAxisParams theta;
};

struct OraclePoseParams {
    OracleJointParams shoulder;
    OracleJointParams elbow;
};

// Stand-in for study participants. Per pose and joint the noticing
// probability grows quadratically with offset strength inside a quadrant
// ellipse; the two joints combine through the mean, with the elbow term
// shifted by the shoulder offset; responses floor at the false-positive
// rate and cap at 1 - lapse.
class SyntheticOracle {
public:
    SyntheticOracle(std::vector<ArmPose> catalog, std::vector<OraclePoseParams> params, double fp,
                    double lapse, bool shift_rule, std::uint64_t seed, bool deterministic = false);

    // Default parameter table: sign-symmetric curvatures whose joint-level
    // 50% radii vary over 11..18 degrees by pose/joint/axis.
    static SyntheticOracle with_default_params(std::vector<ArmPose> catalog, double fp = 0.02,
                                               double lapse = 0.02, std::uint64_t seed = 0,
                                               bool deterministic = false);

    const std::vector<ArmPose>& catalog() const { return catalog_; }
    double false_positive_rate() const { return fp_; }
    double lapse_rate() const { return lapse_; }
    bool deterministic() const { return deterministic_; }
    std::uint64_t seed() const { return seed_; }

    // Raw joint-level quadratic term, before combination and clamping; may
    // exceed 1.
    double joint_probability(std::size_t pose_index, Joint joint, const JointOffset2D& o) const;

    // Full composite ground truth in [fp, 1 - lapse].
    double ground_truth(std::size_t pose_index, const CompositeOffset& offset) const;

    // Ground truth of a task touching a single axis: what a fitted
    // single-axis curve is expected to recover.
    double effective_single_axis(std::size_t pose_index, Joint joint, Axis axis, double x) const;

    // Analytic crossing of the effective single-axis curve at probability p.
    double effective_crossing(std::size_t pose_index, Joint joint, Axis axis, Sign sign,
                              double p) const;

    // Boundary point of the effective single-joint level set at p along a
    // direction (degrees from the +phi axis).
    JointOffset2D effective_boundary(std::size_t pose_index, Joint joint, double p,
                                     double direction_deg) const;

    // One Bernoulli draw from the (seed, participant, task) stream; in
    // deterministic mode participant k notices iff the ground truth exceeds
    // (k + 0.5) / n_participants.
    bool respond(std::size_t pose_index, const CompositeOffset& offset, std::size_t participant,
                 std::size_t n_participants, std::size_t task_index) const;

private:
    std::vector<ArmPose> catalog_;
    std::vector<OraclePoseParams> params_;
    double fp_;
    double lapse_;
    bool shift_rule_;
    std::uint64_t seed_;
    bool deterministic_;
};

struct StudyOptions {
    std::size_t participants = 12;
    std::uint64_t seed = 0;
    // Number of catalog poses carried into phases 2 and 3 (the first ones).
    std::size_t dense_pose_count = 4;
    // When set, phase-3 shoulder offsets come from a model fitted on the
    // phase-1 data instead of the oracle's true 30% level.
    bool chained = false;
    Exec exec = Exec::parallel;
};

// Runs the three phase plans against the oracle for every participant and
// returns the merged dataset. Each response depends only on
// (seed, participant, task index), so the parallel path is bit-identical
// to the serial one.
NoticeabilityDataset simulate_study(const SyntheticOracle& oracle, const StudyOptions& options);

// Analytic probability cells for a plan: p_hat set to the oracle's ground
// truth, n_trials/n_noticed left at zero. For noise-free fitting paths.
std::vector<ProbabilityCell> exact_cells(const SyntheticOracle& oracle, const SamplingPlan& plan,
                                         const std::vector<std::size_t>& pose_index_map);

// Convenience: noise-free model fitted directly from phase-1 exact cells.
NoticeabilityModel exact_model(const SyntheticOracle& oracle);

struct AxisRecoveryEntry {
    std::size_t pose_index = 0;
    Joint joint = Joint::shoulder;
    Axis axis = Axis::phi;
    Sign sign = Sign::pos;
    double fitted = 0.0;
    double truth = 0.0;
    double abs_error = 0.0;
};

struct ShiftRecoveryEntry {
    std::size_t pose_index = 0;
    JointOffset2D shoulder;
    double center_phi = 0.0;
    double center_theta = 0.0;
    double error = 0.0; // distance to (-shoulder)
};

struct RecoveryReport {
    std::vector<AxisRecoveryEntry> axis_50pct;
    std::vector<ShiftRecoveryEntry> shift_centers;
    double mean_axis_error = 0.0;
    double max_axis_error = 0.0;
    double mean_shift_error = 0.0;
    double max_shift_error = 0.0;
    double phase2_mean_abs_dev = 0.0;
    std::size_t n_records = 0;
    std::size_t n_failed_axes = 0;
    std::size_t n_failed_shifts = 0;
};

// Fits the model from the dataset and scores it against the oracle's
// ground truth: 50% single-axis crossings per pose/axis/sign and the
// recovered elbow distribution centers against the negated shoulder
// offsets.
RecoveryReport evaluate_recovery(const NoticeabilityDataset& dataset,
                                 const SyntheticOracle& oracle);

// Least-squares center of a shifted quadratic bowl from (offset, p_hat)
// samples: fits a*x^2 + b*y^2 + c*x + d*y + e and returns the vertex.
struct BowlCenter {
    double x = 0.0;
    double y = 0.0;
    bool valid = false;
};
BowlCenter fit_bowl_center(const std::vector<std::pair<JointOffset2D, double>>& samples);

// Monte Carlo over study seeds; report i uses base_seed + i.
std::vector<RecoveryReport> recovery_monte_carlo(const std::vector<ArmPose>& catalog,
                                                 std::size_t participants, std::size_t runs,
                                                 std::uint64_t base_seed, double fp, double lapse,
                                                 bool deterministic, Exec exec);

} // namespace offsetmodel

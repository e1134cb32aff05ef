#pragma once

#include "offsetmodel/pose.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace offsetmodel {

enum class Phase : int { P1 = 1, P2 = 2, P3 = 3 };

Phase phase_from_int(int v);

struct TrialRecord {
    std::string participant;
    Phase phase = Phase::P1;
    ArmPose pose;
    CompositeOffset offset;
    bool noticed = false;
};

struct NoticeabilityDataset {
    std::vector<TrialRecord> records;
    std::vector<ArmPose> pose_catalog; // each record's pose appears here (1e-6 per angle)
};

struct PlanTask {
    std::size_t pose_index = 0;
    CompositeOffset offset;
};

struct SamplingPlan {
    Phase phase = Phase::P1;
    std::vector<PlanTask> tasks;
};

struct ProbabilityCell {
    std::size_t pose_index = 0;
    Phase phase = Phase::P1;
    CompositeOffset offset;
    std::size_t n_trials = 0;
    std::size_t n_noticed = 0;
    double p_hat = 0.0;
};

// Single-axis offsets {-15, -12, ..., 15} on each of the four axes per pose;
// 44 tasks per pose, order shuffled by seed.
SamplingPlan phase1_plan(const std::vector<ArmPose>& poses, std::uint64_t seed);

// Per joint, 2D offsets on circles r in {12..24 step 3} at directions every
// 15 degrees; 240 tasks per pose.
SamplingPlan phase2_plan(const std::vector<ArmPose>& poses, std::uint64_t seed);

// Per pose, 8 given shoulder offsets; elbow offsets on 4 circles
// (r in {9, 15, 21, 24}) of 8 directions, each circle centered at the
// negated shoulder offset; 256 tasks per pose.
SamplingPlan phase3_plan(const std::vector<ArmPose>& poses,
                         const std::vector<std::vector<JointOffset2D>>& shoulder_offsets_at_30pct,
                         std::uint64_t seed);

inline const std::vector<double>& phase3_elbow_radii() {
    static const std::vector<double> radii{9.0, 15.0, 21.0, 24.0};
    return radii;
}

// Groups records by (pose, offset) with offsets rounded to 1e-6 degrees.
// Cells keep the phase of their first record; grouping ignores phase.
std::vector<ProbabilityCell> aggregate(const NoticeabilityDataset& dataset);

// Trials CSV. Header (bit-exact):
// participant,phase,pose_phi_s,pose_theta_s,pose_phi_e,pose_theta_e,
// off_phi_s,off_theta_s,off_phi_e,off_theta_e,noticed
std::string trials_csv_header();
std::string write_trials_csv(const NoticeabilityDataset& dataset);
NoticeabilityDataset read_trials_csv_text(const std::string& text, const std::string& origin);
NoticeabilityDataset read_trials(const std::string& path);
void write_trials(const NoticeabilityDataset& dataset, const std::string& path);

// Plan CSV: trials format minus participant and noticed.
std::string plan_csv_header();
std::string write_plan_csv(const SamplingPlan& plan, const std::vector<ArmPose>& poses);

// Pose catalog CSV: phi_s,theta_s,phi_e,theta_e per row (header optional on read).
std::string write_poses_csv(const std::vector<ArmPose>& poses);
std::vector<ArmPose> read_poses_csv_text(const std::string& text, const std::string& origin);
std::vector<ArmPose> read_poses(const std::string& path);

// Index of `pose` in `catalog` within 1e-6 per angle, or npos.
std::size_t find_pose_index(const std::vector<ArmPose>& catalog, const ArmPose& pose,
                            double tol = 1e-6);

} // namespace offsetmodel

#pragma once

#include "offsetmodel/offset_model.hpp"
#include "offsetmodel/pose.hpp"

#include <string>
#include <vector>

namespace offsetmodel {

struct PoseFrame {
    double t = 0.0; // seconds; strictly increasing within a trajectory
    ArmPose pose;
};

struct AmplifiedFrame {
    double t = 0.0;
    ArmPose physical;
    CompositeOffset applied;
    ArmPose virtual_pose; // apply_offset(physical, applied)
};

// Immutable amplification state: the extreme pose, the probability budget,
// and the offset boundary points along the extreme pose's joint directions.
struct AmplifierConfig {
    const NoticeabilityModel* model = nullptr;
    ArmPose extreme;
    double max_probability = 0.75;
    double delta_s = 0.5; // shoulder share; elbow share is 1 - delta_s
    Combiner combiner = Combiner::mean;

    bool shoulder_enabled = false;
    bool elbow_enabled = false;
    // Motion-reduction variant: negates the applied offsets so the virtual
    // arm trails the physical one. Exposed as a flag only; no contract.
    bool reduce = false;
    JointOffset2D shoulder_max;      // on the level-p shoulder ellipse along (Phi_S, Theta_S)
    JointOffset2D elbow_max_centered; // level-p elbow boundary along (Phi_E, Theta_E), centered

    double delta_e() const { return 1.0 - delta_s; }
};

// Joints whose extreme direction is fully zero are left unamplified; a
// fully zero extreme pose is rejected.
AmplifierConfig configure(const NoticeabilityModel& model, const ArmPose& extreme_pose, double p,
                          double delta_s, Combiner combiner = Combiner::mean);

// Shoulder offset scales the extreme boundary point by the per-axis
// current/extreme ratio (clamped to [-1.5, 1.5]) and delta_s. The elbow
// boundary point is refreshed each frame by the applied shoulder offset
// (the elbow level set rides at its negation), then scaled the same way
// with delta_e.
AmplifiedFrame amplify_frame(const AmplifierConfig& config, const PoseFrame& frame);

std::vector<AmplifiedFrame> amplify_trajectory(const AmplifierConfig& config,
                                               const std::vector<PoseFrame>& frames);

struct PathMetrics {
    double physical_wrist_path = 0.0;
    double virtual_wrist_path = 0.0;
    double physical_elbow_path = 0.0;
    double virtual_elbow_path = 0.0;
    double physical_wrist_ratio = 0.0;
    double virtual_wrist_ratio = 0.0;
    double physical_elbow_ratio = 0.0;
    double virtual_elbow_ratio = 0.0;
    int final_physical_rula = 0;
};

// Path lengths of the wrist and elbow along both trajectories, each divided
// by the straight-line distance from the first frame's joint to the target
// pose's joint.
PathMetrics path_metrics(const std::vector<AmplifiedFrame>& frames, const LimbLengths& lengths,
                         const ArmPose& target);

// Trajectory CSV: t,phi_s,theta_s,phi_e,theta_e
std::vector<PoseFrame> read_trajectory_csv_text(const std::string& text,
                                                const std::string& origin);
std::vector<PoseFrame> read_trajectory(const std::string& path);
std::string write_trajectory_csv(const std::vector<PoseFrame>& frames);

// Amplified CSV adds off_* and v_* columns.
std::string write_amplified_csv(const std::vector<AmplifiedFrame>& frames);

} // namespace offsetmodel

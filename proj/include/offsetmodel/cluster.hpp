#pragma once

#include "offsetmodel/execution.hpp"
#include "offsetmodel/pose.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace offsetmodel {

enum class PoseProvenance { clustered, extreme, manual };

struct PoseCatalog {
    std::vector<ArmPose> poses;
    std::vector<std::string> labels;
    std::vector<PoseProvenance> provenance;

    std::size_t size() const { return poses.size(); }
};

// The four directional extremes: arm forward, upward, to the side, down.
std::vector<ArmPose> extreme_poses();

// Ten-pose default catalog: six mid-range poses plus the four extremes.
PoseCatalog default_study_catalog();

// Seeded k-medoids under the skeletal distance (unit limb lengths), the
// four extreme poses appended when not already among the medoids.
PoseCatalog select_representative_poses(const std::vector<ArmPose>& pose_sample, std::size_t k,
                                        std::uint64_t seed, Exec exec = Exec::serial);

} // namespace offsetmodel

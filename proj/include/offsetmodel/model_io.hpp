#pragma once

#include "offsetmodel/fitting.hpp"
#include "offsetmodel/pose.hpp"

#include <string>
#include <vector>

namespace offsetmodel {

inline constexpr int kModelSchemaVersion = 1;

// Standard probability levels at which pose-linear coefficients are
// embedded in the JSON for external consumers. Queries recompute them for
// arbitrary probabilities.
inline const std::vector<double>& model_export_levels() {
    static const std::vector<double> levels{0.3, 0.5, 0.75};
    return levels;
}

std::string model_to_json(const NoticeabilityModel& model);
NoticeabilityModel model_from_json(const std::string& text, const std::string& origin);

NoticeabilityModel load_model(const std::string& path);
void save_model(const NoticeabilityModel& model, const std::string& path);

// {"shoulder":[x,y,z],"elbow":[x,y,z],"wrist":[x,y,z]} in meters.
std::string joint_positions_to_json(const JointPositions& joints);

} // namespace offsetmodel

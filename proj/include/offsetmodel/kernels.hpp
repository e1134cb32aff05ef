#pragma once

#include "offsetmodel/execution.hpp"
#include "offsetmodel/fitting.hpp"
#include "offsetmodel/offset_model.hpp"
#include "offsetmodel/pose.hpp"

#include <cstdint>
#include <vector>

namespace offsetmodel {

// Square 2D grid over [-extent, extent]^2, n points per side, row-major in
// (theta, phi) with phi fastest.
struct GridSpec2D {
    double extent = 24.0;
    std::size_t n = 25;

    double coord(std::size_t i) const {
        return -extent + 2.0 * extent * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    std::size_t size() const { return n * n; }
};

// 4D grid over [-extent, extent]^4 in (s_phi, s_theta, e_phi, e_theta),
// last axis fastest.
struct GridSpec4D {
    double extent = 24.0;
    std::size_t n = 17;

    double coord(std::size_t i) const {
        return -extent + 2.0 * extent * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    std::size_t size() const { return n * n * n * n; }
    CompositeOffset offset_at(std::size_t flat) const;
};

// Single-joint probability over a 2D offset grid.
std::vector<double> probability_grid(const NoticeabilityModel& model, Joint joint,
                                     const ArmPose& pose, const GridSpec2D& grid, Exec exec);

// Applicable-set membership over a 4D composite grid (1 = member).
std::vector<std::uint8_t> membership_grid(const ApplicableSet& set, const GridSpec4D& grid,
                                          Exec exec);

// Brute-force composite-probability threshold over the same grid.
std::vector<std::uint8_t> composite_threshold_grid(const NoticeabilityModel& model,
                                                   const ArmPose& pose, double p,
                                                   Combiner combiner, const GridSpec4D& grid,
                                                   Exec exec);

// Symmetric skeletal-distance matrix (row-major n x n) over poses rendered
// with unit limb lengths.
std::vector<double> pairwise_pose_distances(const std::vector<ArmPose>& poses, Exec exec);

} // namespace offsetmodel

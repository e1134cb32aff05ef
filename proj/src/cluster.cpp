#include "offsetmodel/cluster.hpp"

#include "offsetmodel/dataset.hpp"
#include "offsetmodel/errors.hpp"
#include "offsetmodel/kernels.hpp"
#include "offsetmodel/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <tuple>

namespace offsetmodel {

std::vector<ArmPose> extreme_poses() {
    return {
        {90.0, 90.0, 0.0, 0.0}, // arm raised forward
        {0.0, 180.0, 0.0, 0.0}, // arm raised upward
        {0.0, 90.0, 0.0, 0.0},  // arm raised to the side
        {0.0, 0.0, 0.0, 0.0},   // arm down
    };
}

PoseCatalog default_study_catalog() {
    PoseCatalog catalog;
    const std::vector<ArmPose> mid{
        {30.0, 45.0, 20.0, 120.0}, {60.0, 75.0, -30.0, 90.0}, {-20.0, 60.0, 45.0, 135.0},
        {45.0, 110.0, 10.0, 60.0}, {10.0, 30.0, -60.0, 100.0}, {75.0, 95.0, 30.0, 150.0},
    };
    for (std::size_t i = 0; i < mid.size(); ++i) {
        catalog.poses.push_back(mid[i]);
        catalog.labels.push_back("pose-" + std::to_string(i));
        catalog.provenance.push_back(PoseProvenance::manual);
    }
    const std::vector<std::string> names{"extreme-forward", "extreme-upward", "extreme-side",
                                         "extreme-down"};
    const std::vector<ArmPose> extremes = extreme_poses();
    for (std::size_t i = 0; i < extremes.size(); ++i) {
        catalog.poses.push_back(extremes[i]);
        catalog.labels.push_back(names[i]);
        catalog.provenance.push_back(PoseProvenance::extreme);
    }
    return catalog;
}

PoseCatalog select_representative_poses(const std::vector<ArmPose>& pose_sample, std::size_t k,
                                        std::uint64_t seed, Exec exec) {
    const std::size_t n = pose_sample.size();
    if (k < 1 || k > n) {
        throw InvalidInputError("select_representative_poses: need 1 <= k <= sample size");
    }

    // Canonical ordering makes the result independent of input order.
    std::vector<ArmPose> sample = pose_sample;
    std::sort(sample.begin(), sample.end(), [](const ArmPose& a, const ArmPose& b) {
        return std::tie(a.phi_s, a.theta_s, a.phi_e, a.theta_e) <
               std::tie(b.phi_s, b.theta_s, b.phi_e, b.theta_e);
    });

    const std::vector<double> dist = pairwise_pose_distances(sample, exec);
    const auto d = [&](std::size_t i, std::size_t j) { return dist[i * n + j]; };

    // Seeded distinct initial medoids.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle(order, seed);
    std::vector<std::size_t> medoids(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(medoids.begin(), medoids.end());

    std::vector<std::size_t> assignment(n, 0);
    for (int iteration = 0; iteration < 100; ++iteration) {
        // Assign to the nearest medoid; ties go to the lower medoid slot.
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < k; ++m) {
                const double dm = d(i, medoids[m]);
                if (dm < best_d) {
                    best_d = dm;
                    best = m;
                }
            }
            assignment[i] = best;
        }

        // Re-pick each cluster's medoid as its total-distance minimizer.
        bool changed = false;
        for (std::size_t m = 0; m < k; ++m) {
            double best_cost = std::numeric_limits<double>::infinity();
            std::size_t best_idx = medoids[m];
            for (std::size_t candidate = 0; candidate < n; ++candidate) {
                if (assignment[candidate] != m) continue;
                double cost = 0.0;
                for (std::size_t other = 0; other < n; ++other) {
                    if (assignment[other] == m) cost += d(candidate, other);
                }
                if (cost < best_cost) {
                    best_cost = cost;
                    best_idx = candidate;
                }
            }
            if (best_idx != medoids[m]) {
                medoids[m] = best_idx;
                changed = true;
            }
        }
        if (!changed) break;
    }
    std::sort(medoids.begin(), medoids.end());

    PoseCatalog catalog;
    for (std::size_t m = 0; m < k; ++m) {
        catalog.poses.push_back(sample[medoids[m]]);
        catalog.labels.push_back("medoid-" + std::to_string(m));
        catalog.provenance.push_back(PoseProvenance::clustered);
    }
    const std::vector<std::string> names{"extreme-forward", "extreme-upward", "extreme-side",
                                         "extreme-down"};
    const std::vector<ArmPose> extremes = extreme_poses();
    for (std::size_t i = 0; i < extremes.size(); ++i) {
        if (find_pose_index(catalog.poses, extremes[i]) != static_cast<std::size_t>(-1)) continue;
        catalog.poses.push_back(extremes[i]);
        catalog.labels.push_back(names[i]);
        catalog.provenance.push_back(PoseProvenance::extreme);
    }
    return catalog;
}

} // namespace offsetmodel

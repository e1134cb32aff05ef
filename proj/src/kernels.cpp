#include "offsetmodel/kernels.hpp"

#include "offsetmodel/errors.hpp"

namespace offsetmodel {

namespace {

template <typename Fn>
void for_each_index(std::size_t count, Exec exec, const Fn& fn) {
    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long i = 0; i < static_cast<long long>(count); ++i) {
            fn(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) fn(i);
    }
}

} // namespace

CompositeOffset GridSpec4D::offset_at(std::size_t flat) const {
    const std::size_t ie_theta = flat % n;
    flat /= n;
    const std::size_t ie_phi = flat % n;
    flat /= n;
    const std::size_t is_theta = flat % n;
    flat /= n;
    const std::size_t is_phi = flat;
    CompositeOffset o;
    o.shoulder.d_phi = coord(is_phi);
    o.shoulder.d_theta = coord(is_theta);
    o.elbow.d_phi = coord(ie_phi);
    o.elbow.d_theta = coord(ie_theta);
    return o;
}

std::vector<double> probability_grid(const NoticeabilityModel& model, Joint joint,
                                     const ArmPose& pose, const GridSpec2D& grid, Exec exec) {
    if (grid.n < 2) throw InvalidInputError("probability_grid: need n >= 2");
    std::vector<double> out(grid.size());
    for_each_index(out.size(), exec, [&](std::size_t flat) {
        const std::size_t iy = flat / grid.n;
        const std::size_t ix = flat % grid.n;
        out[flat] = model.probability_2d(joint, pose, {grid.coord(ix), grid.coord(iy)});
    });
    return out;
}

std::vector<std::uint8_t> membership_grid(const ApplicableSet& set, const GridSpec4D& grid,
                                          Exec exec) {
    if (grid.n < 2) throw InvalidInputError("membership_grid: need n >= 2");
    std::vector<std::uint8_t> out(grid.size());
    for_each_index(out.size(), exec, [&](std::size_t flat) {
        out[flat] = set.contains(grid.offset_at(flat)) ? 1 : 0;
    });
    return out;
}

std::vector<std::uint8_t> composite_threshold_grid(const NoticeabilityModel& model,
                                                   const ArmPose& pose, double p,
                                                   Combiner combiner, const GridSpec4D& grid,
                                                   Exec exec) {
    if (grid.n < 2) throw InvalidInputError("composite_threshold_grid: need n >= 2");
    std::vector<std::uint8_t> out(grid.size());
    for_each_index(out.size(), exec, [&](std::size_t flat) {
        const double prob = composite_probability(model, pose, grid.offset_at(flat), combiner);
        out[flat] = prob <= p + kMembershipTolerance ? 1 : 0;
    });
    return out;
}

std::vector<double> pairwise_pose_distances(const std::vector<ArmPose>& poses, Exec exec) {
    const std::size_t n = poses.size();
    const LimbLengths unit{1.0, 1.0};
    std::vector<JointPositions> joints(n);
    for (std::size_t i = 0; i < n; ++i) joints[i] = forward_kinematics(poses[i], unit);

    std::vector<double> matrix(n * n, 0.0);
    for_each_index(n * n, exec, [&](std::size_t flat) {
        const std::size_t i = flat / n;
        const std::size_t j = flat % n;
        if (i == j) return;
        matrix[flat] = skeletal_distance(joints[i], joints[j]);
    });
    return matrix;
}

} // namespace offsetmodel

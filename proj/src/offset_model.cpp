#include "offsetmodel/offset_model.hpp"

#include "offsetmodel/csv.hpp"
#include "offsetmodel/errors.hpp"
#include "offsetmodel/rng.hpp"

#include <algorithm>
#include <cmath>

namespace offsetmodel {

double combine(Combiner kind, double p_shoulder, double p_elbow) {
    switch (kind) {
    case Combiner::mean: return 0.5 * (p_shoulder + p_elbow);
    case Combiner::max: return std::max(p_shoulder, p_elbow);
    case Combiner::noisy_or: return 1.0 - (1.0 - p_shoulder) * (1.0 - p_elbow);
    }
    throw InvalidInputError("unknown combiner");
}

Combiner combiner_from_string(const std::string& name) {
    if (name == "mean") return Combiner::mean;
    if (name == "max") return Combiner::max;
    if (name == "noisy_or" || name == "noisy-or") return Combiner::noisy_or;
    throw InvalidInputError("unknown combiner '" + name + "' (expected mean, max or noisy_or)");
}

std::string combiner_name(Combiner kind) {
    switch (kind) {
    case Combiner::mean: return "mean";
    case Combiner::max: return "max";
    case Combiner::noisy_or: return "noisy_or";
    }
    return "?";
}

double composite_probability(const NoticeabilityModel& model, const ArmPose& pose,
                             const CompositeOffset& offset, Combiner combiner) {
    const double p_s = model.probability_2d(Joint::shoulder, pose, offset.shoulder);
    const JointOffset2D shifted{offset.elbow.d_phi + offset.shoulder.d_phi,
                                offset.elbow.d_theta + offset.shoulder.d_theta};
    const double p_e = model.probability_2d(Joint::elbow, pose, shifted);
    return combine(combiner, p_s, p_e);
}

JointOffset2D max_offset_along_direction(const EllipseLevelSet& levelset, double dx, double dy) {
    const double len = std::hypot(dx, dy);
    if (!(len > 0.0)) {
        throw InvalidInputError("max_offset_along_direction: direction must be nonzero");
    }
    const double ux = dx / len;
    const double uy = dy / len;
    const double a = ux >= 0.0 ? levelset.phi_pos : levelset.phi_neg;
    const double b = uy >= 0.0 ? levelset.theta_pos : levelset.theta_neg;
    const double t = 1.0 / std::sqrt((ux * ux) / (a * a) + (uy * uy) / (b * b));
    return {t * ux, t * uy};
}

bool ApplicableSet::contains(const CompositeOffset& offset) const {
    return composite_probability(*model, pose, offset, combiner) <=
           probability + kMembershipTolerance;
}

ApplicableSetResult applicable_set(const NoticeabilityModel& model, const ArmPose& pose, double p,
                                   Combiner combiner) {
    ApplicableSetResult result;

    const double base_s = model.baseline(Joint::shoulder, pose);
    const double base_e = model.baseline(Joint::elbow, pose);
    const double combined_baseline = combine(combiner, base_s, base_e);
    if (p < combined_baseline - kMembershipTolerance) {
        result.empty = EmptySetReason{"requested probability " + csv::format_double(p) +
                                      " is below the zero-offset baseline " +
                                      csv::format_double(combined_baseline)};
        return result;
    }
    if (p > 1.0) {
        throw InvalidInputError("applicable_set: probability must be <= 1");
    }

    const double candidate_level = std::min(2.0 * p, 1.0);
    const double floor_s = model.probability_floor(Joint::shoulder, pose);
    const double floor_e = model.probability_floor(Joint::elbow, pose);
    if (candidate_level <= std::max(floor_s, floor_e)) {
        result.empty = EmptySetReason{"candidate level " + csv::format_double(candidate_level) +
                                      " is below the model's probability floor"};
        return result;
    }

    ApplicableSet set;
    set.model = &model;
    set.pose = pose;
    set.probability = p;
    set.combiner = combiner;
    set.shoulder_region = model.level_set(Joint::shoulder, pose, candidate_level);
    set.elbow_region_at_center = model.level_set(Joint::elbow, pose, candidate_level);
    result.set = set;
    return result;
}

SampleResult sample_applicable(const ApplicableSet& set, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw InvalidInputError("sample_applicable: n must be >= 1");

    SampleResult result;
    result.samples.reserve(n);
    SplitMix64 rng(seed);

    const EllipseLevelSet::Box sbox = set.shoulder_region.bounding_box();
    const EllipseLevelSet::Box ebox = set.elbow_region_at_center.bounding_box();

    constexpr std::size_t kMaxRejections = 1000000;
    std::size_t rejections = 0;
    while (result.samples.size() < n) {
        if (rejections >= kMaxRejections) {
            result.empty = EmptySetReason{
                "rejection sampling found no member after 1000000 attempts; "
                "the applicable set is empty or vanishingly small"};
            result.samples.clear();
            return result;
        }
        CompositeOffset candidate;
        candidate.shoulder.d_phi = rng.next_in(sbox.phi_lo, sbox.phi_hi);
        candidate.shoulder.d_theta = rng.next_in(sbox.theta_lo, sbox.theta_hi);
        // Elbow box rides at the negated shoulder offset.
        candidate.elbow.d_phi = -candidate.shoulder.d_phi + rng.next_in(ebox.phi_lo, ebox.phi_hi);
        candidate.elbow.d_theta =
            -candidate.shoulder.d_theta + rng.next_in(ebox.theta_lo, ebox.theta_hi);
        if (set.contains(candidate)) {
            result.samples.push_back(candidate);
            rejections = 0;
        } else {
            ++rejections;
        }
    }
    return result;
}

} // namespace offsetmodel

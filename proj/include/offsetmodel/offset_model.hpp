#pragma once

#include "offsetmodel/fitting.hpp"
#include "offsetmodel/pose.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace offsetmodel {

// Scalar combination of the shoulder and shifted-elbow probabilities.
// All kinds map [0,1]^2 -> [0,1] and are monotone in both arguments.
enum class Combiner { mean, max, noisy_or };

double combine(Combiner kind, double p_shoulder, double p_elbow);
Combiner combiner_from_string(const std::string& name);
std::string combiner_name(Combiner kind);

// Probability of noticing a composite two-joint offset. The elbow term is
// evaluated at (elbow + shoulder): the elbow distribution under a shoulder
// offset s is centered at -s.
double composite_probability(const NoticeabilityModel& model, const ArmPose& pose,
                             const CompositeOffset& offset, Combiner combiner = Combiner::mean);

// Boundary point of a quadrant ellipse along the ray t*direction, t > 0.
JointOffset2D max_offset_along_direction(const EllipseLevelSet& levelset, double dx, double dy);

// Membership tolerance on the composite probability.
inline constexpr double kMembershipTolerance = 1e-6;

// The set of composite offsets whose noticing probability stays at or below
// `probability`: candidate regions are the level-2p ellipses (the elbow one
// translated by the negated shoulder offset per member); membership is the
// exact composite-probability filter.
struct ApplicableSet {
    const NoticeabilityModel* model = nullptr;
    ArmPose pose;
    double probability = 0.0;
    Combiner combiner = Combiner::mean;
    EllipseLevelSet shoulder_region;         // level min(2p, 1)
    EllipseLevelSet elbow_region_at_center;  // level min(2p, 1), centered coordinates

    bool contains(const CompositeOffset& offset) const;
};

struct EmptySetReason {
    std::string reason;
};

// Builds the set; p below the combined zero-offset baseline yields the
// reason instead.
struct ApplicableSetResult {
    std::optional<ApplicableSet> set;
    std::optional<EmptySetReason> empty;
};

ApplicableSetResult applicable_set(const NoticeabilityModel& model, const ArmPose& pose, double p,
                                   Combiner combiner = Combiner::mean);

// Rejection sampling over the candidate regions' bounding boxes; every
// returned member passes the membership predicate. Deterministic per seed.
struct SampleResult {
    std::vector<CompositeOffset> samples;
    std::optional<EmptySetReason> empty;
};

SampleResult sample_applicable(const ApplicableSet& set, std::size_t n, std::uint64_t seed);

} // namespace offsetmodel

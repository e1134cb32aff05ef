#include "offsetmodel/cluster.hpp"
#include "offsetmodel/errors.hpp"
#include "offsetmodel/offset_model.hpp"
#include "offsetmodel/oracle.hpp"
#include "offsetmodel/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace offsetmodel;

namespace {

struct Fixture {
    std::vector<ArmPose> catalog = default_study_catalog().poses;
    SyntheticOracle oracle = SyntheticOracle::with_default_params(catalog, 0.02, 0.0);
    NoticeabilityModel model = exact_model(oracle);
};

} // namespace

TEST_CASE("combiner axioms") {
    for (Combiner kind : {Combiner::mean, Combiner::max, Combiner::noisy_or}) {
        SplitMix64 rng(17);
        for (int i = 0; i < 300; ++i) {
            const double a = rng.next_double();
            const double b = rng.next_double();
            const double c = combine(kind, a, b);
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
            // Monotone in both arguments.
            const double bump = rng.next_double() * (1.0 - a);
            CHECK(combine(kind, a + bump, b) >= c - 1e-12);
            const double bump2 = rng.next_double() * (1.0 - b);
            CHECK(combine(kind, a, b + bump2) >= c - 1e-12);
        }
    }
    CHECK(combine(Combiner::mean, 0.6, 0.0) == doctest::Approx(0.3));
    CHECK(combine(Combiner::max, 0.6, 0.0) == doctest::Approx(0.6));
    CHECK(combine(Combiner::noisy_or, 0.5, 0.5) == doctest::Approx(0.75));
    CHECK(combine(Combiner::noisy_or, 0.6, 0.0) == doctest::Approx(0.6));

    CHECK(combiner_from_string("mean") == Combiner::mean);
    CHECK(combiner_from_string("noisy_or") == Combiner::noisy_or);
    CHECK_THROWS_AS(combiner_from_string("median"), InvalidInputError);
}

TEST_CASE("composite_probability shift structure") {
    const Fixture f;
    const ArmPose& pose = f.catalog[1];

    // Zero composite combines the two baselines.
    const double base_s = f.model.baseline(Joint::shoulder, pose);
    const double base_e = f.model.baseline(Joint::elbow, pose);
    CHECK(composite_probability(f.model, pose, {}) == doctest::Approx(0.5 * (base_s + base_e)));

    // Elbow offset exactly opposite the shoulder offset lands on the
    // shifted elbow center: the elbow term collapses to its baseline.
    const JointOffset2D s{8.0, -5.0};
    const double p_s = f.model.probability_2d(Joint::shoulder, pose, s);
    const CompositeOffset cancel{s, {-s.d_phi, -s.d_theta}};
    CHECK(composite_probability(f.model, pose, cancel) ==
          doctest::Approx(0.5 * (p_s + base_e)).epsilon(1e-9));

    // Elbow-only composite degrades to the single-joint model with the
    // shoulder at baseline.
    const JointOffset2D e{6.0, 9.0};
    const double p_e = f.model.probability_2d(Joint::elbow, pose, e);
    CHECK(composite_probability(f.model, pose, {{}, e}) ==
          doctest::Approx(0.5 * (base_s + p_e)).epsilon(1e-9));
}

TEST_CASE("composite probability equals combiner of shifted terms everywhere") {
    const Fixture f;
    const ArmPose& pose = f.catalog[0];
    SplitMix64 rng(23);
    for (int i = 0; i < 100; ++i) {
        const CompositeOffset o{{rng.next_in(-20.0, 20.0), rng.next_in(-20.0, 20.0)},
                                {rng.next_in(-20.0, 20.0), rng.next_in(-20.0, 20.0)}};
        const double p_s = f.model.probability_2d(Joint::shoulder, pose, o.shoulder);
        const double p_e = f.model.probability_2d(
            Joint::elbow, pose,
            {o.elbow.d_phi + o.shoulder.d_phi, o.elbow.d_theta + o.shoulder.d_theta});
        for (Combiner kind : {Combiner::mean, Combiner::max, Combiner::noisy_or}) {
            CHECK(composite_probability(f.model, pose, o, kind) ==
                  doctest::Approx(combine(kind, p_s, p_e)));
        }
    }
}

TEST_CASE("max_offset_along_direction examples") {
    EllipseLevelSet e;
    e.probability = 0.5;
    e.phi_pos = 10.0;
    e.phi_neg = 8.0;
    e.theta_pos = 5.0;
    e.theta_neg = 5.0;

    // Semi-axes (10, 5) along (1, 1): t* = 1/sqrt(0.5/100 + 0.5/25) = sqrt(40).
    const JointOffset2D diag = max_offset_along_direction(e, 1.0, 1.0);
    const double expected = std::sqrt(40.0) / std::sqrt(2.0);
    CHECK(diag.d_phi == doctest::Approx(expected).epsilon(1e-9));
    CHECK(diag.d_theta == doctest::Approx(expected).epsilon(1e-9));
    CHECK(expected == doctest::Approx(4.4721).epsilon(1e-4));

    const JointOffset2D right = max_offset_along_direction(e, 1.0, 0.0);
    CHECK(right.d_phi == doctest::Approx(10.0));
    CHECK(right.d_theta == doctest::Approx(0.0));

    const JointOffset2D left = max_offset_along_direction(e, -1.0, 0.0);
    CHECK(left.d_phi == doctest::Approx(-8.0));

    CHECK_THROWS_AS(max_offset_along_direction(e, 0.0, 0.0), InvalidInputError);

    // Boundary points always map back onto the boundary metric.
    SplitMix64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const double dx = rng.next_in(-1.0, 1.0);
        const double dy = rng.next_in(-1.0, 1.0);
        if (std::abs(dx) + std::abs(dy) < 1e-6) continue;
        const JointOffset2D at = max_offset_along_direction(e, dx, dy);
        CHECK(e.quadrant_metric(at.d_phi, at.d_theta) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("applicable_set membership equals the composite filter and honors bounds") {
    const Fixture f;
    const ArmPose& pose = f.catalog[3];
    const double p = 0.4;
    const auto result = applicable_set(f.model, pose, p);
    REQUIRE(result.set.has_value());
    const ApplicableSet& set = *result.set;

    SplitMix64 rng(31);
    std::size_t members = 0;
    for (int i = 0; i < 2000; ++i) {
        const CompositeOffset o{{rng.next_in(-24.0, 24.0), rng.next_in(-24.0, 24.0)},
                                {rng.next_in(-24.0, 24.0), rng.next_in(-24.0, 24.0)}};
        const bool member = set.contains(o);
        const double prob = composite_probability(f.model, pose, o, set.combiner);
        CHECK(member == (prob <= p + kMembershipTolerance));
        if (member) {
            ++members;
            // Algorithm structure: members stay within the level-2p
            // candidate regions.
            const double p_s = f.model.probability_2d(Joint::shoulder, pose, o.shoulder);
            const double p_e = f.model.probability_2d(
                Joint::elbow, pose,
                {o.elbow.d_phi + o.shoulder.d_phi, o.elbow.d_theta + o.shoulder.d_theta});
            CHECK(p_s <= 2.0 * p + 2.0 * kMembershipTolerance);
            CHECK(p_e <= 2.0 * p + 2.0 * kMembershipTolerance);
        }
    }
    CHECK(members > 50); // the region is not degenerate at p = 0.4

    // The zero composite is always a member above the baseline.
    CHECK(set.contains(CompositeOffset{}));
}

TEST_CASE("applicable_set shrinks monotonically with p") {
    const Fixture f;
    const ArmPose& pose = f.catalog[0];
    const auto small = applicable_set(f.model, pose, 0.3);
    const auto large = applicable_set(f.model, pose, 0.5);
    REQUIRE(small.set.has_value());
    REQUIRE(large.set.has_value());
    SplitMix64 rng(37);
    for (int i = 0; i < 1000; ++i) {
        const CompositeOffset o{{rng.next_in(-24.0, 24.0), rng.next_in(-24.0, 24.0)},
                                {rng.next_in(-24.0, 24.0), rng.next_in(-24.0, 24.0)}};
        if (small.set->contains(o)) CHECK(large.set->contains(o));
    }
}

TEST_CASE("applicable_set under the max combiner is the product of level-p regions") {
    const Fixture f;
    const ArmPose& pose = f.catalog[2];
    const double p = 0.45;
    const auto result = applicable_set(f.model, pose, p, Combiner::max);
    REQUIRE(result.set.has_value());

    const EllipseLevelSet shoulder_p = f.model.level_set(Joint::shoulder, pose, p);
    const EllipseLevelSet elbow_p = f.model.level_set(Joint::elbow, pose, p);

    SplitMix64 rng(41);
    for (int i = 0; i < 1500; ++i) {
        const CompositeOffset o{{rng.next_in(-20.0, 20.0), rng.next_in(-20.0, 20.0)},
                                {rng.next_in(-20.0, 20.0), rng.next_in(-20.0, 20.0)}};
        // Stay away from the boundary where the 1e-6 probability tolerance
        // and the geometric test can legitimately disagree.
        const double m_s = shoulder_p.quadrant_metric(o.shoulder.d_phi, o.shoulder.d_theta);
        const double m_e = elbow_p.quadrant_metric(o.elbow.d_phi + o.shoulder.d_phi,
                                                   o.elbow.d_theta + o.shoulder.d_theta);
        if (std::abs(m_s - 1.0) < 1e-3 || std::abs(m_e - 1.0) < 1e-3) continue;
        const bool product_member = m_s <= 1.0 && m_e <= 1.0;
        CHECK(result.set->contains(o) == product_member);
    }
}

TEST_CASE("composite probability grows with shoulder strength at the shifted elbow center") {
    const Fixture f;
    const ArmPose& pose = f.catalog[2];
    for (double angle : {0.3, 1.2, 2.2, 4.4}) {
        double previous = 0.0;
        for (double r = 0.0; r <= 20.0; r += 1.0) {
            const JointOffset2D s{r * std::cos(angle), r * std::sin(angle)};
            const CompositeOffset o{s, {-s.d_phi, -s.d_theta}};
            const double p = composite_probability(f.model, pose, o);
            CHECK(p >= previous - 1e-9);
            previous = p;
        }
    }
}

TEST_CASE("applicable_set below baseline reports a reason") {
    const Fixture f;
    const auto result = applicable_set(f.model, f.catalog[0], 0.001);
    CHECK_FALSE(result.set.has_value());
    REQUIRE(result.empty.has_value());
    CHECK(result.empty->reason.find("baseline") != std::string::npos);
}

TEST_CASE("applicable_set at the baseline keeps the zero composite") {
    const Fixture f;
    const ArmPose& pose = f.catalog[0];
    const double baseline = composite_probability(f.model, pose, {});
    const auto result = applicable_set(f.model, pose, baseline);
    REQUIRE(result.set.has_value());
    CHECK(result.set->contains(CompositeOffset{}));
}

TEST_CASE("sample_applicable members, determinism and distinctness") {
    const Fixture f;
    const ArmPose& pose = f.catalog[1];
    const auto result = applicable_set(f.model, pose, 0.5);
    REQUIRE(result.set.has_value());

    const SampleResult a = sample_applicable(*result.set, 100, 12345);
    REQUIRE_FALSE(a.empty.has_value());
    REQUIRE(a.samples.size() == 100);
    for (const CompositeOffset& o : a.samples) {
        CHECK(composite_probability(f.model, pose, o, result.set->combiner) <=
              0.5 + kMembershipTolerance);
    }

    const SampleResult b = sample_applicable(*result.set, 100, 12345);
    REQUIRE(b.samples.size() == 100);
    std::set<std::string> distinct;
    bool identical = true;
    for (std::size_t i = 0; i < 100; ++i) {
        identical = identical && offset_almost_equal(a.samples[i], b.samples[i], 0.0);
        distinct.insert(std::to_string(a.samples[i].shoulder.d_phi) + "/" +
                        std::to_string(a.samples[i].elbow.d_theta));
    }
    CHECK(identical);
    CHECK(distinct.size() == 100);

    const SampleResult c = sample_applicable(*result.set, 20, 999);
    REQUIRE(c.samples.size() == 20);
    bool different = false;
    for (std::size_t i = 0; i < 20 && !different; ++i) {
        different = !offset_almost_equal(a.samples[i], c.samples[i], 1e-12);
    }
    CHECK(different);
}

#include "offsetmodel/oracle.hpp"

#include "offsetmodel/errors.hpp"
#include "offsetmodel/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace offsetmodel {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double quadrant_curvature(const OracleAxisParams& axis, double v) {
    return v >= 0.0 ? axis.k_pos : axis.k_neg;
}

} // namespace

SyntheticOracle::SyntheticOracle(std::vector<ArmPose> catalog, std::vector<OraclePoseParams> params,
                                 double fp, double lapse, bool shift_rule, std::uint64_t seed,
                                 bool deterministic)
    : catalog_(std::move(catalog)),
      params_(std::move(params)),
      fp_(fp),
      lapse_(lapse),
      shift_rule_(shift_rule),
      seed_(seed),
      deterministic_(deterministic) {
    if (catalog_.size() != params_.size() || catalog_.empty()) {
        throw InvalidInputError("oracle: need one parameter block per catalog pose");
    }
    if (fp_ < 0.0 || fp_ > 0.1 || lapse_ < 0.0 || lapse_ > 0.1) {
        throw InvalidInputError("oracle: fp and lapse must lie in [0, 0.1]");
    }
}

SyntheticOracle SyntheticOracle::with_default_params(std::vector<ArmPose> catalog, double fp,
                                                     double lapse, std::uint64_t seed,
                                                     bool deterministic) {
    std::vector<OraclePoseParams> params;
    params.reserve(catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        OraclePoseParams p;
        const auto curvature = [&](int joint, int axis) {
            // Joint-level 50% radius between 11 and 18 degrees; keeps the
            // single-axis study grid clear of the saturation ceiling.
            const double r50 = 11.0 + static_cast<double>((7 * i + 5 * joint + 3 * axis) % 8);
            const double k = 0.48 / (r50 * r50);
            return OracleAxisParams{k, k};
        };
        p.shoulder.phi = curvature(0, 0);
        p.shoulder.theta = curvature(0, 1);
        p.elbow.phi = curvature(1, 0);
        p.elbow.theta = curvature(1, 1);
        params.push_back(p);
    }
    return SyntheticOracle(std::move(catalog), std::move(params), fp, lapse, true, seed,
                           deterministic);
}

// Raw quadratic bowl of one joint. May exceed 1; the floor and ceiling are
// applied to the combined value in ground_truth, which keeps the composite
// inside the same quadratic family the fitter assumes.
double SyntheticOracle::joint_probability(std::size_t pose_index, Joint joint,
                                          const JointOffset2D& o) const {
    if (pose_index >= params_.size()) throw InvalidInputError("oracle: pose index out of range");
    const OracleJointParams& jp =
        joint == Joint::shoulder ? params_[pose_index].shoulder : params_[pose_index].elbow;
    const double kx = quadrant_curvature(jp.phi, o.d_phi);
    const double ky = quadrant_curvature(jp.theta, o.d_theta);
    return fp_ + kx * o.d_phi * o.d_phi + ky * o.d_theta * o.d_theta;
}

double SyntheticOracle::ground_truth(std::size_t pose_index, const CompositeOffset& offset) const {
    const double p_s = joint_probability(pose_index, Joint::shoulder, offset.shoulder);
    JointOffset2D elbow_arg = offset.elbow;
    if (shift_rule_) {
        elbow_arg.d_phi += offset.shoulder.d_phi;
        elbow_arg.d_theta += offset.shoulder.d_theta;
    }
    const double p_e = joint_probability(pose_index, Joint::elbow, elbow_arg);
    return std::clamp(combine(Combiner::mean, p_s, p_e), fp_, 1.0 - lapse_);
}

double SyntheticOracle::effective_single_axis(std::size_t pose_index, Joint joint, Axis axis,
                                              double x) const {
    CompositeOffset o;
    JointOffset2D& target = joint == Joint::shoulder ? o.shoulder : o.elbow;
    (axis == Axis::phi ? target.d_phi : target.d_theta) = x;
    return ground_truth(pose_index, o);
}

double SyntheticOracle::effective_crossing(std::size_t pose_index, Joint joint, Axis axis,
                                           Sign sign, double p) const {
    if (pose_index >= params_.size()) throw InvalidInputError("oracle: pose index out of range");
    if (!(p > fp_)) throw NoCrossingError("oracle: p does not exceed the false-positive floor");
    const OraclePoseParams& pp = params_[pose_index];
    const double probe = sign == Sign::pos ? 1.0 : -1.0;

    const auto axis_k = [&](const OracleJointParams& jp) {
        const OracleAxisParams& ap = axis == Axis::phi ? jp.phi : jp.theta;
        return quadrant_curvature(ap, probe);
    };

    // Effective curvature of the single-axis task curve under the mean
    // combiner: the joint's own term plus, via the shift rule, the elbow's
    // response to a shoulder offset.
    double k_eff = 0.0;
    if (joint == Joint::shoulder) {
        k_eff = 0.5 * (axis_k(pp.shoulder) + (shift_rule_ ? axis_k(pp.elbow) : 0.0));
    } else {
        k_eff = 0.5 * axis_k(pp.elbow);
    }
    if (!(k_eff > 0.0)) throw NoCrossingError("oracle: flat effective curve");
    const double magnitude = std::sqrt((p - fp_) / k_eff);
    return sign == Sign::pos ? magnitude : -magnitude;
}

JointOffset2D SyntheticOracle::effective_boundary(std::size_t pose_index, Joint joint, double p,
                                                  double direction_deg) const {
    const double ux = std::cos(direction_deg * kDegToRad);
    const double uy = std::sin(direction_deg * kDegToRad);
    const double rx = std::abs(effective_crossing(pose_index, joint, Axis::phi,
                                                  ux >= 0.0 ? Sign::pos : Sign::neg, p));
    const double ry = std::abs(effective_crossing(pose_index, joint, Axis::theta,
                                                  uy >= 0.0 ? Sign::pos : Sign::neg, p));
    const double t = 1.0 / std::sqrt((ux * ux) / (rx * rx) + (uy * uy) / (ry * ry));
    return {t * ux, t * uy};
}

bool SyntheticOracle::respond(std::size_t pose_index, const CompositeOffset& offset,
                              std::size_t participant, std::size_t n_participants,
                              std::size_t task_index) const {
    const double g = ground_truth(pose_index, offset);
    if (deterministic_) {
        const double quantile =
            (static_cast<double>(participant) + 0.5) / static_cast<double>(n_participants);
        return g > quantile;
    }
    SplitMix64 stream(mix_seed(seed_, participant, task_index));
    return stream.next_double() < g;
}

// ---------------------------------------------------------------------------
// Study simulation

namespace {

std::string participant_label(std::size_t k) {
    std::string digits = std::to_string(k);
    while (digits.size() < 2) digits.insert(digits.begin(), '0');
    return "P" + digits;
}

struct FlatTask {
    Phase phase;
    std::size_t catalog_pose; // index into the oracle catalog
    CompositeOffset offset;
};

std::vector<JointOffset2D> true_shoulder_offsets_30(const SyntheticOracle& oracle,
                                                    std::size_t pose_index) {
    std::vector<JointOffset2D> out;
    out.reserve(8);
    for (int d = 0; d < 8; ++d) {
        out.push_back(oracle.effective_boundary(pose_index, Joint::shoulder, 0.3, 45.0 * d));
    }
    return out;
}

std::vector<JointOffset2D> fitted_shoulder_offsets_30(const NoticeabilityModel& model,
                                                      const ArmPose& pose) {
    const EllipseLevelSet region = model.level_set(Joint::shoulder, pose, 0.3);
    std::vector<JointOffset2D> out;
    out.reserve(8);
    for (int d = 0; d < 8; ++d) {
        const double a = 45.0 * d * kDegToRad;
        out.push_back(max_offset_along_direction(region, std::cos(a), std::sin(a)));
    }
    return out;
}

NoticeabilityDataset run_tasks(const SyntheticOracle& oracle, const std::vector<FlatTask>& tasks,
                               const StudyOptions& options) {
    NoticeabilityDataset dataset;
    dataset.pose_catalog = oracle.catalog();
    const std::size_t n_tasks = tasks.size();
    const std::size_t total = n_tasks * options.participants;
    dataset.records.resize(total);

    const auto fill = [&](std::size_t flat) {
        const std::size_t participant = flat / n_tasks;
        const std::size_t task_idx = flat % n_tasks;
        const FlatTask& task = tasks[task_idx];
        TrialRecord& rec = dataset.records[flat];
        rec.participant = participant_label(participant);
        rec.phase = task.phase;
        rec.pose = oracle.catalog()[task.catalog_pose];
        rec.offset = task.offset;
        rec.noticed = oracle.respond(task.catalog_pose, task.offset, participant,
                                     options.participants, task_idx);
    };

    if (options.exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long flat = 0; flat < static_cast<long long>(total); ++flat) {
            fill(static_cast<std::size_t>(flat));
        }
    } else {
        for (std::size_t flat = 0; flat < total; ++flat) fill(flat);
    }
    return dataset;
}

void append_plan(std::vector<FlatTask>& out, const SamplingPlan& plan,
                 const std::vector<std::size_t>& pose_map) {
    for (const PlanTask& t : plan.tasks) {
        out.push_back({plan.phase, pose_map[t.pose_index], t.offset});
    }
}

} // namespace

NoticeabilityDataset simulate_study(const SyntheticOracle& oracle, const StudyOptions& options) {
    if (options.participants < 1) throw InvalidInputError("simulate_study: participants >= 1");
    const std::vector<ArmPose>& catalog = oracle.catalog();

    const std::size_t dense = std::min(options.dense_pose_count, catalog.size());
    std::vector<ArmPose> dense_poses(catalog.begin(), catalog.begin() + dense);
    std::vector<std::size_t> all_map(catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) all_map[i] = i;
    std::vector<std::size_t> dense_map(all_map.begin(), all_map.begin() + dense);

    std::vector<FlatTask> tasks;
    const SamplingPlan p1 = phase1_plan(catalog, mix_seed(options.seed, 1));
    append_plan(tasks, p1, all_map);

    const SamplingPlan p2 = phase2_plan(dense_poses, mix_seed(options.seed, 2));
    append_plan(tasks, p2, dense_map);

    std::vector<std::vector<JointOffset2D>> shoulder_offsets;
    shoulder_offsets.reserve(dense);
    if (options.chained) {
        // Paper-style chained protocol: derive the 30% shoulder offsets from
        // a model fitted on the phase-1 responses collected so far.
        std::vector<FlatTask> phase1_only(tasks.begin(), tasks.begin() + p1.tasks.size());
        const NoticeabilityDataset phase1_data = run_tasks(oracle, phase1_only, options);
        const NoticeabilityModel interim = fit_model(phase1_data);
        for (std::size_t i = 0; i < dense; ++i) {
            shoulder_offsets.push_back(fitted_shoulder_offsets_30(interim, dense_poses[i]));
        }
    } else {
        for (std::size_t i = 0; i < dense; ++i) {
            shoulder_offsets.push_back(true_shoulder_offsets_30(oracle, dense_map[i]));
        }
    }
    const SamplingPlan p3 = phase3_plan(dense_poses, shoulder_offsets, mix_seed(options.seed, 3));
    append_plan(tasks, p3, dense_map);

    return run_tasks(oracle, tasks, options);
}

std::vector<ProbabilityCell> exact_cells(const SyntheticOracle& oracle, const SamplingPlan& plan,
                                         const std::vector<std::size_t>& pose_index_map) {
    std::map<std::array<std::int64_t, 5>, ProbabilityCell> cells;
    for (const PlanTask& task : plan.tasks) {
        const std::size_t catalog_pose = pose_index_map[task.pose_index];
        const std::array<std::int64_t, 5> key{
            static_cast<std::int64_t>(catalog_pose), std::llround(task.offset.shoulder.d_phi * 1e6),
            std::llround(task.offset.shoulder.d_theta * 1e6),
            std::llround(task.offset.elbow.d_phi * 1e6),
            std::llround(task.offset.elbow.d_theta * 1e6)};
        auto [it, inserted] = cells.try_emplace(key);
        if (inserted) {
            it->second.pose_index = catalog_pose;
            it->second.phase = plan.phase;
            it->second.offset = task.offset;
            it->second.p_hat = oracle.ground_truth(catalog_pose, task.offset);
        }
    }
    std::vector<ProbabilityCell> out;
    out.reserve(cells.size());
    for (auto& [k, cell] : cells) out.push_back(cell);
    return out;
}

NoticeabilityModel exact_model(const SyntheticOracle& oracle) {
    std::vector<std::size_t> map(oracle.catalog().size());
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
    const SamplingPlan plan = phase1_plan(oracle.catalog(), 0);
    return fit_model_from_cells(oracle.catalog(), exact_cells(oracle, plan, map));
}

// ---------------------------------------------------------------------------
// Recovery evaluation

BowlCenter fit_bowl_center(const std::vector<std::pair<JointOffset2D, double>>& samples) {
    BowlCenter out;
    if (samples.size() < 6) return out;

    // Normal equations for [x^2, y^2, x, y, 1] -> p.
    Eigen::MatrixXd design(static_cast<Eigen::Index>(samples.size()), 5);
    Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        const auto& [o, p] = samples[static_cast<std::size_t>(i)];
        design(i, 0) = o.d_phi * o.d_phi;
        design(i, 1) = o.d_theta * o.d_theta;
        design(i, 2) = o.d_phi;
        design(i, 3) = o.d_theta;
        design(i, 4) = 1.0;
        y(i) = p;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 5) return out;
    const Eigen::VectorXd c = qr.solve(y);
    if (!(c(0) > 0.0) || !(c(1) > 0.0)) return out;
    out.x = -c(2) / (2.0 * c(0));
    out.y = -c(3) / (2.0 * c(1));
    out.valid = true;
    return out;
}

RecoveryReport evaluate_recovery(const NoticeabilityDataset& dataset,
                                 const SyntheticOracle& oracle) {
    RecoveryReport report;
    report.n_records = dataset.records.size();

    const NoticeabilityModel model = fit_model(dataset);

    // 50% single-axis crossings.
    for (std::size_t i = 0; i < model.poses().size(); ++i) {
        const std::size_t oracle_idx = find_pose_index(oracle.catalog(), model.poses()[i]);
        if (oracle_idx == static_cast<std::size_t>(-1)) continue;
        for (Joint joint : {Joint::shoulder, Joint::elbow}) {
            for (Axis axis : {Axis::phi, Axis::theta}) {
                for (Sign sign : {Sign::neg, Sign::pos}) {
                    AxisRecoveryEntry entry;
                    entry.pose_index = oracle_idx;
                    entry.joint = joint;
                    entry.axis = axis;
                    entry.sign = sign;
                    try {
                        const SingleAxisLevels levels =
                            model.single_axis_levels(joint, model.poses()[i], 0.5);
                        const double mag = axis == Axis::phi
                                               ? (sign == Sign::pos ? levels.phi_pos
                                                                    : levels.phi_neg)
                                               : (sign == Sign::pos ? levels.theta_pos
                                                                    : levels.theta_neg);
                        entry.fitted = sign == Sign::pos ? mag : -mag;
                        entry.truth = oracle.effective_crossing(oracle_idx, joint, axis, sign, 0.5);
                        entry.abs_error = std::abs(entry.fitted - entry.truth);
                        report.axis_50pct.push_back(entry);
                    } catch (const NoCrossingError&) {
                        ++report.n_failed_axes;
                    } catch (const ModelError&) {
                        ++report.n_failed_axes;
                    }
                }
            }
        }
    }

    // Elbow distribution centers from phase-3 cells grouped by shoulder
    // offset, and phase-2 agreement of the model's 2D interpolation.
    const std::vector<ProbabilityCell> cells = aggregate(dataset);
    std::map<std::array<std::int64_t, 3>, std::vector<std::pair<JointOffset2D, double>>> groups;
    double phase2_dev_sum = 0.0;
    std::size_t phase2_count = 0;
    for (const ProbabilityCell& cell : cells) {
        const bool shoulder_zero =
            cell.offset.shoulder.d_phi == 0.0 && cell.offset.shoulder.d_theta == 0.0;
        const bool elbow_zero = cell.offset.elbow.d_phi == 0.0 && cell.offset.elbow.d_theta == 0.0;
        if (!shoulder_zero && !elbow_zero) {
            groups[{static_cast<std::int64_t>(cell.pose_index),
                    std::llround(cell.offset.shoulder.d_phi * 1e6),
                    std::llround(cell.offset.shoulder.d_theta * 1e6)}]
                .push_back({cell.offset.elbow, cell.p_hat});
        }
        if (cell.phase == Phase::P2 && (shoulder_zero != elbow_zero)) {
            const Joint joint = shoulder_zero ? Joint::elbow : Joint::shoulder;
            const JointOffset2D& o = shoulder_zero ? cell.offset.elbow : cell.offset.shoulder;
            const ArmPose& pose = dataset.pose_catalog[cell.pose_index];
            const double predicted = model.probability_2d(joint, pose, o);
            phase2_dev_sum += std::abs(predicted - cell.p_hat);
            ++phase2_count;
        }
    }

    for (const auto& [key, samples] : groups) {
        const BowlCenter center = fit_bowl_center(samples);
        ShiftRecoveryEntry entry;
        entry.pose_index = static_cast<std::size_t>(key[0]);
        entry.shoulder = {static_cast<double>(key[1]) / 1e6, static_cast<double>(key[2]) / 1e6};
        if (!center.valid) {
            ++report.n_failed_shifts;
            continue;
        }
        entry.center_phi = center.x;
        entry.center_theta = center.y;
        entry.error = std::hypot(center.x + entry.shoulder.d_phi,
                                 center.y + entry.shoulder.d_theta);
        report.shift_centers.push_back(entry);
    }

    for (const AxisRecoveryEntry& e : report.axis_50pct) {
        report.mean_axis_error += e.abs_error;
        report.max_axis_error = std::max(report.max_axis_error, e.abs_error);
    }
    if (!report.axis_50pct.empty()) {
        report.mean_axis_error /= static_cast<double>(report.axis_50pct.size());
    }
    for (const ShiftRecoveryEntry& e : report.shift_centers) {
        report.mean_shift_error += e.error;
        report.max_shift_error = std::max(report.max_shift_error, e.error);
    }
    if (!report.shift_centers.empty()) {
        report.mean_shift_error /= static_cast<double>(report.shift_centers.size());
    }
    if (phase2_count > 0) {
        report.phase2_mean_abs_dev = phase2_dev_sum / static_cast<double>(phase2_count);
    }
    return report;
}

std::vector<RecoveryReport> recovery_monte_carlo(const std::vector<ArmPose>& catalog,
                                                 std::size_t participants, std::size_t runs,
                                                 std::uint64_t base_seed, double fp, double lapse,
                                                 bool deterministic, Exec exec) {
    std::vector<RecoveryReport> reports(runs);

    const auto run_one = [&](std::size_t i) {
        const std::uint64_t seed = base_seed + i;
        const SyntheticOracle oracle =
            SyntheticOracle::with_default_params(catalog, fp, lapse, seed, deterministic);
        StudyOptions options;
        options.participants = participants;
        options.seed = seed;
        options.exec = Exec::serial; // parallelism lives across runs here
        const NoticeabilityDataset data = simulate_study(oracle, options);
        reports[i] = evaluate_recovery(data, oracle);
    };

    if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long long i = 0; i < static_cast<long long>(runs); ++i) {
            run_one(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < runs; ++i) run_one(i);
    }
    return reports;
}

} // namespace offsetmodel

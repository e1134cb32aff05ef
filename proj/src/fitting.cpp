#include "offsetmodel/fitting.hpp"

#include "offsetmodel/csv.hpp"
#include "offsetmodel/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <set>

namespace offsetmodel {

namespace {

// Strength bound of the single-axis study grid; cells beyond it may sit on
// the saturation ceiling and would bias the quadratic fit.
constexpr double kSingleAxisFitRange = 15.0 + 1e-9;

double residual_rms(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& coeffs) {
    const Eigen::VectorXd r = design * coeffs - y;
    return std::sqrt(r.squaredNorm() / static_cast<double>(y.size()));
}

} // namespace

double AxisQuadratic::evaluate(double x) const {
    return std::clamp(raw(x), 0.0, 1.0);
}

AxisQuadratic fit_axis_quadratic(const std::vector<AxisSample>& cells) {
    std::set<double> distinct;
    for (const AxisSample& s : cells) distinct.insert(s.x);
    if (distinct.size() < 3) {
        throw InsufficientDataError("fit_axis_quadratic: need >= 3 distinct offsets, got " +
                                    std::to_string(distinct.size()));
    }

    const auto n = static_cast<Eigen::Index>(cells.size());
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = cells[static_cast<std::size_t>(i)].x;
        design(i, 0) = x * x;
        design(i, 1) = x;
        design(i, 2) = 1.0;
        y(i) = cells[static_cast<std::size_t>(i)].p_hat;
    }

    Eigen::VectorXd coeffs = design.colPivHouseholderQr().solve(y);
    AxisQuadratic q;
    if (coeffs(0) < 0.0) {
        // Negative curvature on noisy cells: refit as a line.
        Eigen::MatrixXd linear = design.rightCols(2);
        const Eigen::VectorXd lin = linear.colPivHouseholderQr().solve(y);
        q.a = 0.0;
        q.b = lin(0);
        q.c = lin(1);
        Eigen::VectorXd full(3);
        full << 0.0, q.b, q.c;
        q.rmse = residual_rms(design, y, full);
    } else {
        q.a = coeffs(0);
        q.b = coeffs(1);
        q.c = coeffs(2);
        q.rmse = residual_rms(design, y, coeffs);
    }
    return q;
}

QuadraticCrossings invert_quadratic(const AxisQuadratic& q, double p) {
    const double baseline = q.c; // q.raw(0)
    if (!(p > baseline)) {
        throw NoCrossingError("invert_quadratic: p = " + csv::format_double(p) +
                              " does not exceed the curve's value at zero (" +
                              csv::format_double(baseline) + ")");
    }

    QuadraticCrossings out;
    if (q.a == 0.0) {
        if (q.b == 0.0) {
            throw NoCrossingError("invert_quadratic: constant curve never reaches p");
        }
        const double root = (p - q.c) / q.b;
        out.neg = root;
        out.pos = root;
        out.one_sided = true;
        return out;
    }

    const double disc = q.b * q.b - 4.0 * q.a * (q.c - p);
    if (disc < 0.0) {
        throw NoCrossingError("invert_quadratic: no real crossing at p = " +
                              csv::format_double(p));
    }
    // Stable root pair: avoid cancellation between -b and sqrt(disc).
    const double sq = std::sqrt(disc);
    const double t = -0.5 * (q.b + (q.b >= 0.0 ? sq : -sq));
    double r1 = t / q.a;
    double r2 = (t != 0.0) ? (q.c - p) / t : -q.b / q.a - r1;
    if (r1 > r2) std::swap(r1, r2);

    out.neg = r1;
    out.pos = r2;
    out.one_sided = !(r1 <= 0.0 && r2 >= 0.0);
    return out;
}

double EllipseLevelSet::quadrant_metric(double x, double y) const {
    const double a = x >= 0.0 ? phi_pos : phi_neg;
    const double b = y >= 0.0 ? theta_pos : theta_neg;
    return (x * x) / (a * a) + (y * y) / (b * b);
}

EllipseLevelSet ellipse_from_single_axis(const SingleAxisLevels& levels, double p) {
    if (!(levels.phi_pos > 0.0) || !(levels.phi_neg > 0.0) || !(levels.theta_pos > 0.0) ||
        !(levels.theta_neg > 0.0)) {
        throw InvalidInputError("ellipse_from_single_axis: semi-axis magnitudes must be > 0");
    }
    EllipseLevelSet out;
    out.probability = p;
    out.phi_pos = levels.phi_pos;
    out.phi_neg = levels.phi_neg;
    out.theta_pos = levels.theta_pos;
    out.theta_neg = levels.theta_neg;
    return out;
}

PoseLinearCoeffs fit_pose_linear(const std::vector<PoseLinearSample>& samples) {
    if (samples.size() < 5) {
        throw InsufficientDataError("fit_pose_linear: need >= 5 samples, got " +
                                    std::to_string(samples.size()));
    }
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd design(n, 5);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = samples[static_cast<std::size_t>(i)];
        design(i, 0) = s.pose.phi_s;
        design(i, 1) = s.pose.theta_s;
        design(i, 2) = s.pose.phi_e;
        design(i, 3) = s.pose.theta_e;
        design(i, 4) = 1.0;
        y(i) = s.value;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 5) {
        throw DegenerateFitError("fit_pose_linear: pose design matrix has rank " +
                                 std::to_string(qr.rank()) +
                                 " of 5 (poses are not affinely independent)");
    }
    const Eigen::VectorXd coeffs = qr.solve(y);

    PoseLinearCoeffs out;
    for (int k = 0; k < 5; ++k) out.coeffs[static_cast<std::size_t>(k)] = coeffs(k);
    out.residual_rms = residual_rms(design, y, coeffs);
    return out;
}

// ---------------------------------------------------------------------------
// NoticeabilityModel

namespace {

const AxisQuadratic& axis_quadratic(const PoseQuadratics& pq, Joint joint, Axis axis) {
    const JointQuadratics& jq = pq.joint(joint);
    return axis == Axis::phi ? jq.phi : jq.theta;
}

// Signed crossing at p for one sign, with the closer-crossing magnitude
// fallback when the inversion is one-sided.
double signed_crossing(const AxisQuadratic& q, double p, Sign sign) {
    const QuadraticCrossings roots = invert_quadratic(q, p);
    if (roots.one_sided) {
        const double mag = std::min(std::abs(roots.neg), std::abs(roots.pos));
        return sign == Sign::pos ? mag : -mag;
    }
    return sign == Sign::pos ? roots.pos : roots.neg;
}

double pose_baseline(const PoseQuadratics& pq, Joint joint) {
    const JointQuadratics& jq = pq.joint(joint);
    return std::clamp(0.5 * (jq.phi.c + jq.theta.c), 0.0, 1.0);
}

double pose_floor(const PoseQuadratics& pq, Joint joint) {
    const JointQuadratics& jq = pq.joint(joint);
    return std::max(jq.phi.c, jq.theta.c);
}

} // namespace

NoticeabilityModel::NoticeabilityModel(std::vector<ArmPose> poses,
                                       std::vector<PoseQuadratics> quadratics)
    : poses_(std::move(poses)), quadratics_(std::move(quadratics)) {
    if (poses_.size() != quadratics_.size()) {
        throw InvalidInputError("model: pose and quadratic counts differ");
    }
    if (poses_.empty()) throw InvalidInputError("model: empty pose catalog");
    for (int j = 0; j < 2; ++j) {
        const Joint joint = j == 0 ? Joint::shoulder : Joint::elbow;
        double floor = -1e300;
        double baseline_sum = 0.0;
        for (const PoseQuadratics& pq : quadratics_) {
            floor = std::max(floor, pose_floor(pq, joint));
            baseline_sum += pose_baseline(pq, joint);
        }
        joint_floor_[static_cast<std::size_t>(j)] = floor;
        joint_baseline_[static_cast<std::size_t>(j)] =
            baseline_sum / static_cast<double>(quadratics_.size());
    }
}

NoticeabilityModel::NoticeabilityModel(const NoticeabilityModel& other)
    : poses_(other.poses_),
      quadratics_(other.quadratics_),
      joint_floor_(other.joint_floor_),
      joint_baseline_(other.joint_baseline_) {}

NoticeabilityModel& NoticeabilityModel::operator=(const NoticeabilityModel& other) {
    if (this != &other) {
        poses_ = other.poses_;
        quadratics_ = other.quadratics_;
        joint_floor_ = other.joint_floor_;
        joint_baseline_ = other.joint_baseline_;
        std::unique_lock lock(cache_mutex_);
        linear_cache_.clear();
    }
    return *this;
}

std::size_t NoticeabilityModel::catalog_index(const ArmPose& pose) const {
    return find_pose_index(poses_, pose);
}

double NoticeabilityModel::baseline(Joint joint, const ArmPose& pose) const {
    if (empty()) throw ModelError("model is empty");
    const std::size_t idx = catalog_index(pose);
    if (idx != static_cast<std::size_t>(-1)) return pose_baseline(quadratics_[idx], joint);
    return joint_baseline_[joint == Joint::shoulder ? 0 : 1];
}

double NoticeabilityModel::probability_floor(Joint joint, const ArmPose& pose) const {
    if (empty()) throw ModelError("model is empty");
    const std::size_t idx = catalog_index(pose);
    if (idx != static_cast<std::size_t>(-1)) return pose_floor(quadratics_[idx], joint);
    return joint_floor_[joint == Joint::shoulder ? 0 : 1];
}

PoseLinearCoeffs NoticeabilityModel::pose_linear(Joint joint, Axis axis, Sign sign,
                                                 double p) const {
    const CacheKey key{static_cast<std::int64_t>(std::bit_cast<std::uint64_t>(p)),
                       static_cast<int>(joint), static_cast<int>(axis), static_cast<int>(sign)};
    {
        std::shared_lock lock(cache_mutex_);
        const auto it = linear_cache_.find(key);
        if (it != linear_cache_.end()) return it->second;
    }

    std::vector<PoseLinearSample> samples;
    samples.reserve(poses_.size());
    for (std::size_t i = 0; i < poses_.size(); ++i) {
        const AxisQuadratic& q = axis_quadratic(quadratics_[i], joint, axis);
        samples.push_back({poses_[i], signed_crossing(q, p, sign)});
    }
    const PoseLinearCoeffs coeffs = fit_pose_linear(samples);

    std::unique_lock lock(cache_mutex_);
    linear_cache_.emplace(key, coeffs);
    return coeffs;
}

double NoticeabilityModel::axis_value(Joint joint, Axis axis, Sign sign, const ArmPose& pose,
                                      std::size_t idx, double p) const {
    if (idx != static_cast<std::size_t>(-1)) {
        return signed_crossing(axis_quadratic(quadratics_[idx], joint, axis), p, sign);
    }
    const double predicted = pose_linear(joint, axis, sign, p).predict(pose);
    if (sign == Sign::pos ? !(predicted > 0.0) : !(predicted < 0.0)) {
        throw ModelError("pose-linear crossing prediction has the wrong sign for this pose");
    }
    return predicted;
}

SingleAxisLevels NoticeabilityModel::single_axis_levels(Joint joint, const ArmPose& pose,
                                                        double p) const {
    if (empty()) throw ModelError("model is empty");
    const std::size_t idx = catalog_index(pose);
    SingleAxisLevels out;
    out.phi_pos = axis_value(joint, Axis::phi, Sign::pos, pose, idx, p);
    out.phi_neg = -axis_value(joint, Axis::phi, Sign::neg, pose, idx, p);
    out.theta_pos = axis_value(joint, Axis::theta, Sign::pos, pose, idx, p);
    out.theta_neg = -axis_value(joint, Axis::theta, Sign::neg, pose, idx, p);
    return out;
}

EllipseLevelSet NoticeabilityModel::level_set(Joint joint, const ArmPose& pose, double p) const {
    return ellipse_from_single_axis(single_axis_levels(joint, pose, p), p);
}

double NoticeabilityModel::probability_2d(Joint joint, const ArmPose& pose,
                                          const JointOffset2D& offset) const {
    if (empty()) throw ModelError("model is empty");
    const std::size_t idx = catalog_index(pose);

    double lo = probability_floor(joint, pose) + 1e-9;
    lo = std::max(lo, 1e-12);
    const double hi0 = 1.0;
    if (!(lo < hi0)) {
        throw ModelError("probability_2d: quadratic baselines reach 1; level sets are empty");
    }

    const auto metric = [&](double p) {
        SingleAxisLevels levels;
        levels.phi_pos = axis_value(joint, Axis::phi, Sign::pos, pose, idx, p);
        levels.phi_neg = -axis_value(joint, Axis::phi, Sign::neg, pose, idx, p);
        levels.theta_pos = axis_value(joint, Axis::theta, Sign::pos, pose, idx, p);
        levels.theta_neg = -axis_value(joint, Axis::theta, Sign::neg, pose, idx, p);
        return ellipse_from_single_axis(levels, p).quadrant_metric(offset.d_phi, offset.d_theta);
    };

    if (metric(hi0) > 1.0) return 1.0;         // outside the p = 1 set
    if (metric(lo) <= 1.0) return baseline(joint, pose); // inside the smallest set

    double a = lo;
    double b = hi0;
    while (b - a > 1e-6) {
        const double mid = 0.5 * (a + b);
        if (metric(mid) > 1.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

// ---------------------------------------------------------------------------
// Model fitting from cells

namespace {

// A cell belongs to a single-axis fit when at most one of its four offset
// components is nonzero and that component is within the study grid.
bool single_axis_cell(const CompositeOffset& o, Joint& joint, Axis& axis, double& x) {
    int nonzero = 0;
    const std::array<std::pair<Joint, Axis>, 4> axes{
        std::pair{Joint::shoulder, Axis::phi}, std::pair{Joint::shoulder, Axis::theta},
        std::pair{Joint::elbow, Axis::phi}, std::pair{Joint::elbow, Axis::theta}};
    const std::array<double, 4> values{o.shoulder.d_phi, o.shoulder.d_theta, o.elbow.d_phi,
                                       o.elbow.d_theta};
    int which = -1;
    for (int i = 0; i < 4; ++i) {
        if (values[static_cast<std::size_t>(i)] != 0.0) {
            ++nonzero;
            which = i;
        }
    }
    if (nonzero > 1) return false;
    if (nonzero == 0) {
        x = 0.0;
        return true; // the shared zero cell; caller feeds it to every axis
    }
    joint = axes[static_cast<std::size_t>(which)].first;
    axis = axes[static_cast<std::size_t>(which)].second;
    x = values[static_cast<std::size_t>(which)];
    return std::abs(x) <= kSingleAxisFitRange;
}

} // namespace

NoticeabilityModel fit_model_from_cells(const std::vector<ArmPose>& poses,
                                        const std::vector<ProbabilityCell>& cells) {
    struct AxisCells {
        std::array<std::vector<AxisSample>, 4> per_axis; // s-phi, s-theta, e-phi, e-theta
    };
    std::vector<AxisCells> grouped(poses.size());

    for (const ProbabilityCell& cell : cells) {
        if (cell.pose_index >= poses.size()) {
            throw InvalidInputError("fit_model_from_cells: cell pose index out of range");
        }
        Joint joint{};
        Axis axis{};
        double x = 0.0;
        if (!single_axis_cell(cell.offset, joint, axis, x)) continue;
        AxisCells& g = grouped[cell.pose_index];
        if (x == 0.0) {
            for (auto& v : g.per_axis) v.push_back({0.0, cell.p_hat});
        } else {
            const int slot = (joint == Joint::shoulder ? 0 : 2) + (axis == Axis::phi ? 0 : 1);
            g.per_axis[static_cast<std::size_t>(slot)].push_back({x, cell.p_hat});
        }
    }

    std::vector<ArmPose> fitted_poses;
    std::vector<PoseQuadratics> fitted;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        const AxisCells& g = grouped[i];
        const bool complete = std::all_of(g.per_axis.begin(), g.per_axis.end(),
                                          [](const auto& v) { return v.size() >= 3; });
        if (!complete) continue;
        PoseQuadratics pq;
        pq.shoulder.phi = fit_axis_quadratic(g.per_axis[0]);
        pq.shoulder.theta = fit_axis_quadratic(g.per_axis[1]);
        pq.elbow.phi = fit_axis_quadratic(g.per_axis[2]);
        pq.elbow.theta = fit_axis_quadratic(g.per_axis[3]);
        fitted_poses.push_back(poses[i]);
        fitted.push_back(pq);
    }

    if (fitted_poses.empty()) {
        throw InsufficientDataError("fit_model: no pose has enough single-axis cells");
    }
    return NoticeabilityModel(std::move(fitted_poses), std::move(fitted));
}

NoticeabilityModel fit_model(const NoticeabilityDataset& dataset) {
    return fit_model_from_cells(dataset.pose_catalog, aggregate(dataset));
}

std::string probability_grid_csv(const NoticeabilityModel& model, Joint joint, const ArmPose& pose,
                                 double extent, std::size_t n) {
    if (n < 2 || !(extent > 0.0)) {
        throw InvalidInputError("probability_grid_csv: need n >= 2 and extent > 0");
    }
    std::string out = "d_phi,d_theta,p\n";
    const double step = 2.0 * extent / static_cast<double>(n - 1);
    for (std::size_t iy = 0; iy < n; ++iy) {
        const double y = -extent + step * static_cast<double>(iy);
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double x = -extent + step * static_cast<double>(ix);
            const double p = model.probability_2d(joint, pose, {x, y});
            out += csv::format_double(x);
            out += ',';
            out += csv::format_double(y);
            out += ',';
            out += csv::format_double(p);
            out += '\n';
        }
    }
    return out;
}

} // namespace offsetmodel

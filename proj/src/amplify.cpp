#include "offsetmodel/amplify.hpp"

#include "offsetmodel/csv.hpp"
#include "offsetmodel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace offsetmodel {

namespace {

// Overshoot guard for the current/extreme angle ratios.
constexpr double kRatioClamp = 1.5;

double axis_ratio(double current, double extreme) {
    if (extreme == 0.0) return 0.0;
    return std::clamp(current / extreme, -kRatioClamp, kRatioClamp);
}

double distance(const Vec3& a, const Vec3& b) {
    return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

} // namespace

AmplifierConfig configure(const NoticeabilityModel& model, const ArmPose& extreme_pose, double p,
                          double delta_s, Combiner combiner) {
    if (!(p > 0.0) || p > 1.0) {
        throw ConfigError("configure: max probability must be in (0, 1]");
    }
    if (delta_s < 0.0 || delta_s > 1.0) {
        throw ConfigError("configure: delta_s must be in [0, 1]");
    }
    validate_pose(extreme_pose);

    AmplifierConfig config;
    config.model = &model;
    config.extreme = extreme_pose;
    config.max_probability = p;
    config.delta_s = delta_s;
    config.combiner = combiner;

    config.shoulder_enabled = extreme_pose.phi_s != 0.0 || extreme_pose.theta_s != 0.0;
    config.elbow_enabled = extreme_pose.phi_e != 0.0 || extreme_pose.theta_e != 0.0;
    if (!config.shoulder_enabled && !config.elbow_enabled) {
        throw ConfigError("configure: extreme pose is fully zero; nothing to amplify");
    }

    try {
        if (config.shoulder_enabled) {
            const EllipseLevelSet region = model.level_set(Joint::shoulder, extreme_pose, p);
            config.shoulder_max =
                max_offset_along_direction(region, extreme_pose.phi_s, extreme_pose.theta_s);
        }
        if (config.elbow_enabled) {
            const EllipseLevelSet region = model.level_set(Joint::elbow, extreme_pose, p);
            config.elbow_max_centered =
                max_offset_along_direction(region, extreme_pose.phi_e, extreme_pose.theta_e);
        }
    } catch (const NoCrossingError& e) {
        throw ConfigError(std::string("configure: probability below the model floor: ") +
                          e.what());
    }
    return config;
}

AmplifiedFrame amplify_frame(const AmplifierConfig& config, const PoseFrame& frame) {
    if (config.model == nullptr) throw ConfigError("amplify_frame: unconfigured amplifier");

    AmplifiedFrame out;
    out.t = frame.t;
    out.physical = frame.pose;

    if (config.shoulder_enabled) {
        const double r_phi = axis_ratio(frame.pose.phi_s, config.extreme.phi_s);
        const double r_theta = axis_ratio(frame.pose.theta_s, config.extreme.theta_s);
        out.applied.shoulder.d_phi = config.delta_s * r_phi * config.shoulder_max.d_phi;
        out.applied.shoulder.d_theta = config.delta_s * r_theta * config.shoulder_max.d_theta;
    }

    if (config.elbow_enabled) {
        // The elbow level set rides at the negated applied shoulder offset.
        const JointOffset2D boundary{config.elbow_max_centered.d_phi - out.applied.shoulder.d_phi,
                                     config.elbow_max_centered.d_theta -
                                         out.applied.shoulder.d_theta};
        const double r_phi = axis_ratio(frame.pose.phi_e, config.extreme.phi_e);
        const double r_theta = axis_ratio(frame.pose.theta_e, config.extreme.theta_e);
        out.applied.elbow.d_phi = config.delta_e() * r_phi * boundary.d_phi;
        out.applied.elbow.d_theta = config.delta_e() * r_theta * boundary.d_theta;
    }

    if (config.reduce) {
        out.applied.shoulder.d_phi = -out.applied.shoulder.d_phi;
        out.applied.shoulder.d_theta = -out.applied.shoulder.d_theta;
        out.applied.elbow.d_phi = -out.applied.elbow.d_phi;
        out.applied.elbow.d_theta = -out.applied.elbow.d_theta;
    }

    out.virtual_pose = apply_offset(frame.pose, out.applied);
    return out;
}

std::vector<AmplifiedFrame> amplify_trajectory(const AmplifierConfig& config,
                                               const std::vector<PoseFrame>& frames) {
    std::vector<AmplifiedFrame> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (i > 0 && !(frames[i].t > frames[i - 1].t)) {
            throw InvalidInputError("amplify_trajectory: timestamps must be strictly increasing "
                                    "(violated at frame " +
                                    std::to_string(i) + ")");
        }
        out.push_back(amplify_frame(config, frames[i]));
    }
    return out;
}

PathMetrics path_metrics(const std::vector<AmplifiedFrame>& frames, const LimbLengths& lengths,
                         const ArmPose& target) {
    if (frames.size() < 2) throw InvalidInputError("path_metrics: need at least 2 frames");

    PathMetrics m;
    JointPositions prev_phys = forward_kinematics(frames.front().physical, lengths);
    JointPositions prev_virt = forward_kinematics(frames.front().virtual_pose, lengths);
    const JointPositions first_phys = prev_phys;
    const JointPositions first_virt = prev_virt;

    for (std::size_t i = 1; i < frames.size(); ++i) {
        const JointPositions phys = forward_kinematics(frames[i].physical, lengths);
        const JointPositions virt = forward_kinematics(frames[i].virtual_pose, lengths);
        m.physical_wrist_path += distance(phys.wrist, prev_phys.wrist);
        m.physical_elbow_path += distance(phys.elbow, prev_phys.elbow);
        m.virtual_wrist_path += distance(virt.wrist, prev_virt.wrist);
        m.virtual_elbow_path += distance(virt.elbow, prev_virt.elbow);
        prev_phys = phys;
        prev_virt = virt;
    }

    const JointPositions target_pos = forward_kinematics(target, lengths);
    const double pw = distance(target_pos.wrist, first_phys.wrist);
    const double pe = distance(target_pos.elbow, first_phys.elbow);
    const double vw = distance(target_pos.wrist, first_virt.wrist);
    const double ve = distance(target_pos.elbow, first_virt.elbow);
    if (pw < 1e-12 || pe < 1e-12 || vw < 1e-12 || ve < 1e-12) {
        throw InvalidInputError("path_metrics: target coincides with the starting pose");
    }
    m.physical_wrist_ratio = m.physical_wrist_path / pw;
    m.physical_elbow_ratio = m.physical_elbow_path / pe;
    m.virtual_wrist_ratio = m.virtual_wrist_path / vw;
    m.virtual_elbow_ratio = m.virtual_elbow_path / ve;
    m.final_physical_rula = rula_arm_score(frames.back().physical);
    return m;
}

std::vector<PoseFrame> read_trajectory_csv_text(const std::string& text,
                                                const std::string& origin) {
    std::vector<PoseFrame> frames;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw IoError(origin + ": empty trajectory file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,phi_s,theta_s,phi_e,theta_e") {
        throw IoError(origin + ":1: unexpected header '" + line + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto fields = csv::split_fields(line);
        if (fields.size() != 5) {
            throw IoError(where + ": expected 5 columns, got " + std::to_string(fields.size()));
        }
        PoseFrame f;
        f.t = csv::parse_double(fields[0], where);
        f.pose.phi_s = csv::parse_double(fields[1], where);
        f.pose.theta_s = csv::parse_double(fields[2], where);
        f.pose.phi_e = csv::parse_double(fields[3], where);
        f.pose.theta_e = csv::parse_double(fields[4], where);
        validate_pose(f.pose);
        frames.push_back(f);
    }
    return frames;
}

std::vector<PoseFrame> read_trajectory(const std::string& path) {
    return read_trajectory_csv_text(csv::read_file(path), path);
}

std::string write_trajectory_csv(const std::vector<PoseFrame>& frames) {
    std::string out = "t,phi_s,theta_s,phi_e,theta_e\n";
    for (const PoseFrame& f : frames) {
        out += csv::format_double(f.t);
        out += ',';
        out += csv::format_double(f.pose.phi_s);
        out += ',';
        out += csv::format_double(f.pose.theta_s);
        out += ',';
        out += csv::format_double(f.pose.phi_e);
        out += ',';
        out += csv::format_double(f.pose.theta_e);
        out += '\n';
    }
    return out;
}

std::string write_amplified_csv(const std::vector<AmplifiedFrame>& frames) {
    std::string out =
        "t,phi_s,theta_s,phi_e,theta_e,off_phi_s,off_theta_s,off_phi_e,off_theta_e,"
        "v_phi_s,v_theta_s,v_phi_e,v_theta_e\n";
    for (const AmplifiedFrame& f : frames) {
        out += csv::format_double(f.t);
        out += ',';
        out += csv::format_double(f.physical.phi_s);
        out += ',';
        out += csv::format_double(f.physical.theta_s);
        out += ',';
        out += csv::format_double(f.physical.phi_e);
        out += ',';
        out += csv::format_double(f.physical.theta_e);
        out += ',';
        out += csv::format_double(f.applied.shoulder.d_phi);
        out += ',';
        out += csv::format_double(f.applied.shoulder.d_theta);
        out += ',';
        out += csv::format_double(f.applied.elbow.d_phi);
        out += ',';
        out += csv::format_double(f.applied.elbow.d_theta);
        out += ',';
        out += csv::format_double(f.virtual_pose.phi_s);
        out += ',';
        out += csv::format_double(f.virtual_pose.theta_s);
        out += ',';
        out += csv::format_double(f.virtual_pose.phi_e);
        out += ',';
        out += csv::format_double(f.virtual_pose.theta_e);
        out += '\n';
    }
    return out;
}

} // namespace offsetmodel

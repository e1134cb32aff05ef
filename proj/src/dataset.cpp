#include "offsetmodel/dataset.hpp"

#include "offsetmodel/csv.hpp"
#include "offsetmodel/errors.hpp"
#include "offsetmodel/rng.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

namespace offsetmodel {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

JointOffset2D polar_offset(double radius, double direction_deg) {
    const double d = direction_deg * kDegToRad;
    return {radius * std::cos(d), radius * std::sin(d)};
}

std::int64_t micro_key(double deg) {
    return std::llround(deg * 1e6);
}

using OffsetKey = std::array<std::int64_t, 4>;

OffsetKey offset_key(const CompositeOffset& o) {
    return {micro_key(o.shoulder.d_phi), micro_key(o.shoulder.d_theta), micro_key(o.elbow.d_phi),
            micro_key(o.elbow.d_theta)};
}

} // namespace

Phase phase_from_int(int v) {
    switch (v) {
    case 1: return Phase::P1;
    case 2: return Phase::P2;
    case 3: return Phase::P3;
    default: throw InvalidInputError("phase must be 1, 2 or 3");
    }
}

SamplingPlan phase1_plan(const std::vector<ArmPose>& poses, std::uint64_t seed) {
    if (poses.empty()) throw InvalidInputError("phase1_plan: pose list is empty");
    SamplingPlan plan;
    plan.phase = Phase::P1;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        for (int axis = 0; axis < 4; ++axis) {
            for (int step = -5; step <= 5; ++step) {
                const double value = 3.0 * step;
                CompositeOffset o;
                switch (axis) {
                case 0: o.shoulder.d_phi = value; break;
                case 1: o.shoulder.d_theta = value; break;
                case 2: o.elbow.d_phi = value; break;
                default: o.elbow.d_theta = value; break;
                }
                plan.tasks.push_back({i, o});
            }
        }
    }
    seeded_shuffle(plan.tasks, seed);
    return plan;
}

SamplingPlan phase2_plan(const std::vector<ArmPose>& poses, std::uint64_t seed) {
    if (poses.empty()) throw InvalidInputError("phase2_plan: pose list is empty");
    SamplingPlan plan;
    plan.phase = Phase::P2;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        for (int joint = 0; joint < 2; ++joint) {
            for (int ring = 0; ring < 5; ++ring) {
                const double radius = 12.0 + 3.0 * ring;
                for (int dir = 0; dir < 24; ++dir) {
                    const JointOffset2D o = polar_offset(radius, 15.0 * dir);
                    CompositeOffset c;
                    if (joint == 0) {
                        c.shoulder = o;
                    } else {
                        c.elbow = o;
                    }
                    plan.tasks.push_back({i, c});
                }
            }
        }
    }
    seeded_shuffle(plan.tasks, seed);
    return plan;
}

SamplingPlan phase3_plan(const std::vector<ArmPose>& poses,
                         const std::vector<std::vector<JointOffset2D>>& shoulder_offsets_at_30pct,
                         std::uint64_t seed) {
    if (poses.empty()) throw InvalidInputError("phase3_plan: pose list is empty");
    if (shoulder_offsets_at_30pct.size() != poses.size()) {
        throw InvalidInputError("phase3_plan: need one shoulder-offset list per pose");
    }
    for (const auto& offsets : shoulder_offsets_at_30pct) {
        if (offsets.size() != 8) {
            throw InvalidInputError("phase3_plan: exactly 8 shoulder offsets per pose required");
        }
    }

    SamplingPlan plan;
    plan.phase = Phase::P3;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        for (const JointOffset2D& s : shoulder_offsets_at_30pct[i]) {
            for (double radius : phase3_elbow_radii()) {
                for (int dir = 0; dir < 8; ++dir) {
                    const JointOffset2D rim = polar_offset(radius, 45.0 * dir);
                    CompositeOffset c;
                    c.shoulder = s;
                    c.elbow = {-s.d_phi + rim.d_phi, -s.d_theta + rim.d_theta};
                    plan.tasks.push_back({i, c});
                }
            }
        }
    }
    seeded_shuffle(plan.tasks, seed);
    return plan;
}

std::vector<ProbabilityCell> aggregate(const NoticeabilityDataset& dataset) {
    if (dataset.records.empty()) throw InvalidInputError("aggregate: dataset is empty");

    std::map<std::pair<std::size_t, OffsetKey>, ProbabilityCell> cells;
    for (const TrialRecord& rec : dataset.records) {
        const std::size_t pose_idx = find_pose_index(dataset.pose_catalog, rec.pose);
        if (pose_idx == static_cast<std::size_t>(-1)) {
            throw InvalidInputError("aggregate: record pose missing from pose_catalog");
        }
        const auto key = std::make_pair(pose_idx, offset_key(rec.offset));
        auto [it, inserted] = cells.try_emplace(key);
        ProbabilityCell& cell = it->second;
        if (inserted) {
            cell.pose_index = pose_idx;
            cell.phase = rec.phase;
            cell.offset = rec.offset;
        }
        cell.n_trials += 1;
        cell.n_noticed += rec.noticed ? 1 : 0;
    }

    std::vector<ProbabilityCell> out;
    out.reserve(cells.size());
    for (auto& [key, cell] : cells) {
        cell.p_hat = static_cast<double>(cell.n_noticed) / static_cast<double>(cell.n_trials);
        out.push_back(cell);
    }
    return out;
}

std::string trials_csv_header() {
    return "participant,phase,pose_phi_s,pose_theta_s,pose_phi_e,pose_theta_e,"
           "off_phi_s,off_theta_s,off_phi_e,off_theta_e,noticed";
}

std::string plan_csv_header() {
    return "phase,pose_phi_s,pose_theta_s,pose_phi_e,pose_theta_e,"
           "off_phi_s,off_theta_s,off_phi_e,off_theta_e";
}

namespace {

void append_pose_offset(std::string& out, const ArmPose& pose, const CompositeOffset& off) {
    out += csv::format_double(pose.phi_s);
    out += ',';
    out += csv::format_double(pose.theta_s);
    out += ',';
    out += csv::format_double(pose.phi_e);
    out += ',';
    out += csv::format_double(pose.theta_e);
    out += ',';
    out += csv::format_double(off.shoulder.d_phi);
    out += ',';
    out += csv::format_double(off.shoulder.d_theta);
    out += ',';
    out += csv::format_double(off.elbow.d_phi);
    out += ',';
    out += csv::format_double(off.elbow.d_theta);
}

} // namespace

std::string write_trials_csv(const NoticeabilityDataset& dataset) {
    std::string out = trials_csv_header();
    out += '\n';
    for (const TrialRecord& rec : dataset.records) {
        out += rec.participant;
        out += ',';
        out += std::to_string(static_cast<int>(rec.phase));
        out += ',';
        append_pose_offset(out, rec.pose, rec.offset);
        out += ',';
        out += rec.noticed ? '1' : '0';
        out += '\n';
    }
    return out;
}

NoticeabilityDataset read_trials_csv_text(const std::string& text, const std::string& origin) {
    NoticeabilityDataset dataset;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw IoError(origin + ": empty file (expected trials header)");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != trials_csv_header()) {
        throw IoError(origin + ":1: unexpected header '" + line + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto fields = csv::split_fields(line);
        if (fields.size() != 11) {
            throw IoError(where + ": expected 11 columns, got " + std::to_string(fields.size()));
        }
        TrialRecord rec;
        rec.participant = std::string(fields[0]);
        try {
            rec.phase = phase_from_int(static_cast<int>(csv::parse_long(fields[1], where)));
        } catch (const InvalidInputError&) {
            throw IoError(where + ": phase must be 1, 2 or 3, got '" + std::string(fields[1]) +
                          "'");
        }
        rec.pose.phi_s = csv::parse_double(fields[2], where);
        rec.pose.theta_s = csv::parse_double(fields[3], where);
        rec.pose.phi_e = csv::parse_double(fields[4], where);
        rec.pose.theta_e = csv::parse_double(fields[5], where);
        rec.offset.shoulder.d_phi = csv::parse_double(fields[6], where);
        rec.offset.shoulder.d_theta = csv::parse_double(fields[7], where);
        rec.offset.elbow.d_phi = csv::parse_double(fields[8], where);
        rec.offset.elbow.d_theta = csv::parse_double(fields[9], where);
        if (fields[10] == "0") {
            rec.noticed = false;
        } else if (fields[10] == "1") {
            rec.noticed = true;
        } else {
            throw IoError(where + ": noticed must be 0 or 1, got '" + std::string(fields[10]) +
                          "'");
        }
        try {
            validate_pose(rec.pose);
        } catch (const InvalidInputError& e) {
            throw IoError(where + ": " + e.what());
        }
        if (find_pose_index(dataset.pose_catalog, rec.pose) == static_cast<std::size_t>(-1)) {
            dataset.pose_catalog.push_back(rec.pose);
        }
        dataset.records.push_back(std::move(rec));
    }
    return dataset;
}

NoticeabilityDataset read_trials(const std::string& path) {
    return read_trials_csv_text(csv::read_file(path), path);
}

void write_trials(const NoticeabilityDataset& dataset, const std::string& path) {
    csv::write_file(path, write_trials_csv(dataset));
}

std::string write_plan_csv(const SamplingPlan& plan, const std::vector<ArmPose>& poses) {
    std::string out = plan_csv_header();
    out += '\n';
    for (const PlanTask& task : plan.tasks) {
        if (task.pose_index >= poses.size()) {
            throw InvalidInputError("plan references a pose index outside the catalog");
        }
        out += std::to_string(static_cast<int>(plan.phase));
        out += ',';
        append_pose_offset(out, poses[task.pose_index], task.offset);
        out += '\n';
    }
    return out;
}

std::string write_poses_csv(const std::vector<ArmPose>& poses) {
    std::string out = "phi_s,theta_s,phi_e,theta_e\n";
    for (const ArmPose& p : poses) {
        out += csv::format_double(p.phi_s);
        out += ',';
        out += csv::format_double(p.theta_s);
        out += ',';
        out += csv::format_double(p.phi_e);
        out += ',';
        out += csv::format_double(p.theta_e);
        out += '\n';
    }
    return out;
}

std::vector<ArmPose> read_poses_csv_text(const std::string& text, const std::string& origin) {
    std::vector<ArmPose> poses;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1 && line.find("phi_s") != std::string::npos) continue; // header
        const std::string where = origin + ":" + std::to_string(line_no);
        const auto fields = csv::split_fields(line);
        if (fields.size() != 4) {
            throw IoError(where + ": expected 4 columns, got " + std::to_string(fields.size()));
        }
        ArmPose p;
        p.phi_s = csv::parse_double(fields[0], where);
        p.theta_s = csv::parse_double(fields[1], where);
        p.phi_e = csv::parse_double(fields[2], where);
        p.theta_e = csv::parse_double(fields[3], where);
        try {
            validate_pose(p);
        } catch (const InvalidInputError& e) {
            throw IoError(where + ": " + e.what());
        }
        poses.push_back(p);
    }
    return poses;
}

std::vector<ArmPose> read_poses(const std::string& path) {
    return read_poses_csv_text(csv::read_file(path), path);
}

std::size_t find_pose_index(const std::vector<ArmPose>& catalog, const ArmPose& pose, double tol) {
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        if (pose_almost_equal(catalog[i], pose, tol)) return i;
    }
    return static_cast<std::size_t>(-1);
}

} // namespace offsetmodel

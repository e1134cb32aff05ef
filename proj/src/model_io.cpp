#include "offsetmodel/model_io.hpp"

#include "offsetmodel/csv.hpp"
#include "offsetmodel/errors.hpp"

#include <json.hpp>

namespace offsetmodel {

namespace {

using nlohmann::json;

json quadratic_to_json(const AxisQuadratic& q) {
    return json{{"a", q.a}, {"b", q.b}, {"c", q.c}, {"rmse", q.rmse}};
}

AxisQuadratic quadratic_from_json(const json& j) {
    AxisQuadratic q;
    q.a = j.at("a").get<double>();
    q.b = j.at("b").get<double>();
    q.c = j.at("c").get<double>();
    q.rmse = j.at("rmse").get<double>();
    return q;
}

const char* joint_name(Joint j) { return j == Joint::shoulder ? "shoulder" : "elbow"; }
const char* axis_name(Axis a) { return a == Axis::phi ? "phi" : "theta"; }
const char* sign_name(Sign s) { return s == Sign::pos ? "pos" : "neg"; }

} // namespace

std::string model_to_json(const NoticeabilityModel& model) {
    json root;
    root["schema_version"] = kModelSchemaVersion;

    json poses = json::array();
    for (const ArmPose& p : model.poses()) {
        poses.push_back(json{{"phi_s", p.phi_s},
                             {"theta_s", p.theta_s},
                             {"phi_e", p.phi_e},
                             {"theta_e", p.theta_e}});
    }
    root["poses"] = poses;

    json quads = json::array();
    for (const PoseQuadratics& pq : model.quadratics()) {
        quads.push_back(json{{"shoulder",
                              {{"phi", quadratic_to_json(pq.shoulder.phi)},
                               {"theta", quadratic_to_json(pq.shoulder.theta)}}},
                             {"elbow",
                              {{"phi", quadratic_to_json(pq.elbow.phi)},
                               {"theta", quadratic_to_json(pq.elbow.theta)}}}});
    }
    root["quadratics"] = quads;

    // Pose-linear coefficients at the standard export levels; derived data,
    // recomputable from the quadratics. Needs >= 5 catalog poses.
    json linear = json::array();
    if (model.poses().size() >= 5) {
        for (double p : model_export_levels()) {
            for (Joint joint : {Joint::shoulder, Joint::elbow}) {
                for (Axis axis : {Axis::phi, Axis::theta}) {
                    for (Sign sign : {Sign::neg, Sign::pos}) {
                        const PoseLinearCoeffs coeffs = model.pose_linear(joint, axis, sign, p);
                        linear.push_back(json{{"p", p},
                                              {"joint", joint_name(joint)},
                                              {"axis", axis_name(axis)},
                                              {"sign", sign_name(sign)},
                                              {"coeffs", coeffs.coeffs},
                                              {"residual_rms", coeffs.residual_rms}});
                    }
                }
            }
        }
    }
    root["pose_linear"] = linear;

    return root.dump(2) + "\n";
}

NoticeabilityModel model_from_json(const std::string& text, const std::string& origin) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(origin + ": invalid JSON: " + e.what());
    }

    try {
        const int version = root.at("schema_version").get<int>();
        if (version != kModelSchemaVersion) {
            throw IoError(origin + ": unsupported schema_version " + std::to_string(version));
        }

        std::vector<ArmPose> poses;
        for (const json& jp : root.at("poses")) {
            ArmPose p;
            p.phi_s = jp.at("phi_s").get<double>();
            p.theta_s = jp.at("theta_s").get<double>();
            p.phi_e = jp.at("phi_e").get<double>();
            p.theta_e = jp.at("theta_e").get<double>();
            poses.push_back(p);
        }

        std::vector<PoseQuadratics> quads;
        for (const json& jq : root.at("quadratics")) {
            PoseQuadratics pq;
            pq.shoulder.phi = quadratic_from_json(jq.at("shoulder").at("phi"));
            pq.shoulder.theta = quadratic_from_json(jq.at("shoulder").at("theta"));
            pq.elbow.phi = quadratic_from_json(jq.at("elbow").at("phi"));
            pq.elbow.theta = quadratic_from_json(jq.at("elbow").at("theta"));
            quads.push_back(pq);
        }

        return NoticeabilityModel(std::move(poses), std::move(quads));
    } catch (const json::exception& e) {
        throw IoError(origin + ": malformed model JSON: " + e.what());
    }
}

NoticeabilityModel load_model(const std::string& path) {
    return model_from_json(csv::read_file(path), path);
}

void save_model(const NoticeabilityModel& model, const std::string& path) {
    csv::write_file(path, model_to_json(model));
}

std::string joint_positions_to_json(const JointPositions& joints) {
    nlohmann::ordered_json root;
    root["shoulder"] = joints.shoulder;
    root["elbow"] = joints.elbow;
    root["wrist"] = joints.wrist;
    return root.dump();
}

} // namespace offsetmodel

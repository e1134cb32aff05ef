#include "offsetmodel/cli.hpp"

#include "offsetmodel/amplify.hpp"
#include "offsetmodel/cluster.hpp"
#include "offsetmodel/csv.hpp"
#include "offsetmodel/dataset.hpp"
#include "offsetmodel/errors.hpp"
#include "offsetmodel/kernels.hpp"
#include "offsetmodel/log.hpp"
#include "offsetmodel/model_io.hpp"
#include "offsetmodel/offset_model.hpp"
#include "offsetmodel/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace offsetmodel {

namespace {

using nlohmann::json;

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{
        "plan",   "simulate", "fit",           "query-prob",   "applicable-set",
        "amplify", "rula",     "cluster-poses", "eval-recovery"};
    return names;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                               diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::array<double, 4> parse_quad(const std::string& text, const std::string& what) {
    const auto fields = csv::split_fields(text);
    if (fields.size() != 4) {
        throw InvalidInputError(what + ": expected 4 comma-separated numbers, got '" + text +
                                "'");
    }
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = csv::parse_double(fields[i], what);
    return out;
}

std::array<double, 2> parse_pair(const std::string& text, const std::string& what) {
    const auto fields = csv::split_fields(text);
    if (fields.size() != 2) {
        throw InvalidInputError(what + ": expected 2 comma-separated numbers, got '" + text +
                                "'");
    }
    return {csv::parse_double(fields[0], what), csv::parse_double(fields[1], what)};
}

ArmPose parse_pose(const std::string& text) {
    const auto q = parse_quad(text, "--pose");
    ArmPose pose{q[0], q[1], q[2], q[3]};
    validate_pose(pose);
    return pose;
}

CompositeOffset parse_offset(const std::string& text) {
    const auto q = parse_quad(text, "--offset");
    return {{q[0], q[1]}, {q[2], q[3]}};
}

Joint parse_joint(const std::string& name) {
    if (name == "shoulder") return Joint::shoulder;
    if (name == "elbow") return Joint::elbow;
    throw InvalidInputError("--joint must be 'shoulder' or 'elbow'");
}

void emit(std::ostream& out, const std::string& text, const std::string& path) {
    if (path.empty()) {
        out << text;
    } else {
        csv::write_file(path, text);
    }
}

json offset_to_json(const CompositeOffset& o) {
    return json{{"shoulder", {o.shoulder.d_phi, o.shoulder.d_theta}},
                {"elbow", {o.elbow.d_phi, o.elbow.d_theta}}};
}

json region_to_json(const EllipseLevelSet& e) {
    return json{{"probability", e.probability},
                {"semi_axes",
                 {{"phi_pos", e.phi_pos},
                  {"phi_neg", e.phi_neg},
                  {"theta_pos", e.theta_pos},
                  {"theta_neg", e.theta_neg}}}};
}

json report_to_json(const RecoveryReport& r) {
    return json{{"mean_axis_error_deg", r.mean_axis_error},
                {"max_axis_error_deg", r.max_axis_error},
                {"mean_shift_error_deg", r.mean_shift_error},
                {"max_shift_error_deg", r.max_shift_error},
                {"phase2_mean_abs_dev", r.phase2_mean_abs_dev},
                {"n_records", r.n_records},
                {"n_failed_axes", r.n_failed_axes},
                {"n_failed_shifts", r.n_failed_shifts}};
}

std::vector<ArmPose> load_catalog_or_default(const std::string& path) {
    if (path.empty()) return default_study_catalog().poses;
    return read_poses(path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Noticeability model of avatar movement offsets: study planning, fitting, "
                 "queries and dynamic amplification",
                 "offset_model"};
    app.require_subcommand(1);

    // --- plan ---------------------------------------------------------
    auto* plan_cmd = app.add_subcommand("plan", "Generate a study sampling plan");
    int plan_phase = 1;
    std::string plan_poses, plan_model, plan_out;
    std::uint64_t plan_seed = 0;
    plan_cmd->add_option("--phase", plan_phase, "Study phase (1, 2 or 3)")->required();
    plan_cmd->add_option("--poses", plan_poses, "Pose catalog CSV (default: built-in catalog)");
    plan_cmd->add_option("--model", plan_model,
                         "Fitted model JSON; required for phase 3 (30% shoulder offsets)");
    plan_cmd->add_option("--seed", plan_seed, "Shuffle seed");
    plan_cmd->add_option("--out", plan_out, "Output CSV path (default: stdout)");

    // --- simulate -----------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Run a synthetic-user study");
    std::size_t sim_participants = 12;
    std::uint64_t sim_seed = 0;
    std::string sim_poses, sim_out;
    double sim_fp = 0.02, sim_lapse = 0.02;
    bool sim_noiseless = false, sim_chained = false, sim_serial = false;
    std::size_t sim_dense = 4;
    sim_cmd->add_option("--participants", sim_participants, "Simulated participants");
    sim_cmd->add_option("--seed", sim_seed, "Study seed");
    sim_cmd->add_option("--poses", sim_poses, "Pose catalog CSV (default: built-in catalog)");
    sim_cmd->add_option("--fp", sim_fp, "Oracle false-positive rate");
    sim_cmd->add_option("--lapse", sim_lapse, "Oracle lapse rate");
    sim_cmd->add_flag("--noiseless", sim_noiseless, "Deterministic threshold responses");
    sim_cmd->add_flag("--chained", sim_chained,
                      "Derive phase-3 shoulder offsets from an interim phase-1 fit");
    sim_cmd->add_option("--dense-poses", sim_dense, "Catalog poses carried into phases 2 and 3");
    sim_cmd->add_flag("--serial", sim_serial, "Disable the parallel kernel");
    sim_cmd->add_option("--out", sim_out, "Trials CSV path (default: stdout)");

    // --- fit ------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "Fit the noticeability model from trials");
    std::string fit_trials, fit_out;
    fit_cmd->add_option("--trials", fit_trials, "Trials CSV")->required();
    fit_cmd->add_option("--out", fit_out, "Model JSON path")->required();

    // --- query-prob -----------------------------------------------------
    auto* query_cmd = app.add_subcommand("query-prob", "Noticing probability of an offset");
    std::string query_model, query_pose, query_offset, query_offset2d, query_joint = "shoulder";
    std::string query_combiner = "mean", query_grid_out;
    double query_grid_extent = 24.0;
    std::size_t query_grid_n = 25;
    query_cmd->add_option("--model", query_model, "Fitted model JSON")->required();
    query_cmd->add_option("--pose", query_pose, "Pose 'phi_s,theta_s,phi_e,theta_e'")->required();
    query_cmd->add_option("--offset", query_offset,
                          "Composite offset 'off_phi_s,off_theta_s,off_phi_e,off_theta_e'");
    query_cmd->add_option("--offset2d", query_offset2d, "Single-joint offset 'd_phi,d_theta'");
    query_cmd->add_option("--joint", query_joint, "Joint for --offset2d / --grid-out");
    query_cmd->add_option("--combiner", query_combiner, "mean, max or noisy_or");
    query_cmd->add_option("--grid-out", query_grid_out, "Write a d_phi,d_theta,p grid CSV");
    query_cmd->add_option("--grid-extent", query_grid_extent, "Grid half-extent, degrees");
    query_cmd->add_option("--grid-n", query_grid_n, "Grid points per side");

    // --- applicable-set ---------------------------------------------------
    auto* set_cmd = app.add_subcommand("applicable-set",
                                       "Offsets at or below a noticing probability");
    std::string set_model, set_pose, set_combiner = "mean", set_out;
    double set_p = 0.5;
    std::size_t set_samples = 0;
    std::uint64_t set_seed = 0;
    set_cmd->add_option("--model", set_model, "Fitted model JSON")->required();
    set_cmd->add_option("--pose", set_pose, "Pose 'phi_s,theta_s,phi_e,theta_e'")->required();
    set_cmd->add_option("--p", set_p, "Target noticing probability")->required();
    set_cmd->add_option("--combiner", set_combiner, "mean, max or noisy_or");
    set_cmd->add_option("--samples", set_samples, "Number of member samples to draw");
    set_cmd->add_option("--seed", set_seed, "Sampling seed");
    set_cmd->add_option("--out", set_out, "Output JSON path (default: stdout)");

    // --- amplify ---------------------------------------------------------
    auto* amp_cmd = app.add_subcommand("amplify", "Amplify a streaming pose trajectory");
    std::string amp_model, amp_extreme, amp_in, amp_out, amp_combiner = "mean";
    std::string amp_target, amp_lengths = "0.3,0.25";
    double amp_p = 0.75, amp_delta_s = 0.5;
    bool amp_reduce = false;
    amp_cmd->add_option("--model", amp_model, "Fitted model JSON")->required();
    amp_cmd->add_option("--extreme", amp_extreme, "Extreme pose 'phi_s,theta_s,phi_e,theta_e'")
        ->required();
    amp_cmd->add_option("--p", amp_p, "Maximum noticing probability");
    amp_cmd->add_option("--delta-s", amp_delta_s, "Shoulder share of the offset");
    amp_cmd->add_option("--combiner", amp_combiner, "mean, max or noisy_or");
    amp_cmd->add_option("--in", amp_in, "Input trajectory CSV")->required();
    amp_cmd->add_option("--out", amp_out, "Amplified trajectory CSV path (default: stdout)");
    amp_cmd->add_option("--metrics-target", amp_target,
                        "Target pose; prints path metrics JSON to stdout");
    amp_cmd->add_option("--lengths", amp_lengths, "Limb lengths 'upper_arm,forearm' in meters");
    amp_cmd->add_flag("--reduce", amp_reduce, "Negate the offsets (motion reduction variant)");

    // --- rula -------------------------------------------------------------
    auto* rula_cmd = app.add_subcommand("rula", "Upper-limb ergonomic score of poses");
    std::string rula_pose, rula_poses, rula_lengths = "0.3,0.25";
    bool rula_joints = false;
    rula_cmd->add_option("--pose", rula_pose, "Pose 'phi_s,theta_s,phi_e,theta_e'");
    rula_cmd->add_option("--poses", rula_poses, "Pose catalog CSV; one score per line");
    rula_cmd->add_flag("--joints", rula_joints, "Also print joint positions as JSON");
    rula_cmd->add_option("--lengths", rula_lengths, "Limb lengths 'upper_arm,forearm' in meters");

    // --- cluster-poses -----------------------------------------------------
    auto* cluster_cmd = app.add_subcommand("cluster-poses",
                                           "Representative poses by k-medoids + extremes");
    std::string cluster_in, cluster_out;
    std::size_t cluster_k = 6;
    std::uint64_t cluster_seed = 0;
    cluster_cmd->add_option("--in", cluster_in, "Pose sample CSV")->required();
    cluster_cmd->add_option("--k", cluster_k, "Number of medoids");
    cluster_cmd->add_option("--seed", cluster_seed, "Initialization seed");
    cluster_cmd->add_option("--out", cluster_out, "Catalog CSV path (default: stdout)");

    // --- eval-recovery ------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval-recovery",
                                        "Monte Carlo model-recovery evaluation");
    std::size_t eval_participants = 12, eval_runs = 20;
    std::uint64_t eval_seed = 1;
    double eval_fp = 0.02, eval_lapse = 0.02;
    bool eval_noiseless = false, eval_serial = false;
    std::string eval_poses, eval_out;
    eval_cmd->add_option("--participants", eval_participants, "Simulated participants per run");
    eval_cmd->add_option("--runs", eval_runs, "Number of study seeds");
    eval_cmd->add_option("--seed", eval_seed, "Base seed (run i uses seed+i)");
    eval_cmd->add_option("--fp", eval_fp, "Oracle false-positive rate");
    eval_cmd->add_option("--lapse", eval_lapse, "Oracle lapse rate");
    eval_cmd->add_flag("--noiseless", eval_noiseless, "Deterministic threshold responses");
    eval_cmd->add_flag("--serial", eval_serial, "Disable the parallel kernel");
    eval_cmd->add_option("--poses", eval_poses, "Pose catalog CSV (default: built-in catalog)");
    eval_cmd->add_option("--out", eval_out, "Per-run report JSON path");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        if (!args.empty() && app.get_subcommand_no_throw(args[0]) != nullptr) {
            out << app.get_subcommand_no_throw(args[0])->help();
        } else {
            out << app.help();
        }
        return 0;
    }

    if (plan_cmd->parsed()) {
        const std::vector<ArmPose> poses = load_catalog_or_default(plan_poses);
        SamplingPlan plan;
        if (plan_phase == 1) {
            plan = phase1_plan(poses, plan_seed);
        } else if (plan_phase == 2) {
            plan = phase2_plan(poses, plan_seed);
        } else if (plan_phase == 3) {
            if (plan_model.empty()) {
                throw InvalidInputError("plan --phase 3 needs --model for the 30% shoulder "
                                        "offsets");
            }
            const NoticeabilityModel model = load_model(plan_model);
            std::vector<std::vector<JointOffset2D>> shoulder_offsets;
            for (const ArmPose& pose : poses) {
                const EllipseLevelSet region = model.level_set(Joint::shoulder, pose, 0.3);
                std::vector<JointOffset2D> eight;
                for (int d = 0; d < 8; ++d) {
                    const double a = 45.0 * d * std::numbers::pi / 180.0;
                    eight.push_back(max_offset_along_direction(region, std::cos(a), std::sin(a)));
                }
                shoulder_offsets.push_back(std::move(eight));
            }
            plan = phase3_plan(poses, shoulder_offsets, plan_seed);
        } else {
            throw InvalidInputError("plan: --phase must be 1, 2 or 3");
        }
        emit(out, write_plan_csv(plan, poses), plan_out);
        log::info("plan: " + std::to_string(plan.tasks.size()) + " tasks");
        return 0;
    }

    if (sim_cmd->parsed()) {
        const std::vector<ArmPose> catalog = load_catalog_or_default(sim_poses);
        const SyntheticOracle oracle = SyntheticOracle::with_default_params(
            catalog, sim_fp, sim_lapse, sim_seed, sim_noiseless);
        StudyOptions options;
        options.participants = sim_participants;
        options.seed = sim_seed;
        options.dense_pose_count = sim_dense;
        options.chained = sim_chained;
        options.exec = sim_serial ? Exec::serial : Exec::parallel;
        const NoticeabilityDataset dataset = simulate_study(oracle, options);
        emit(out, write_trials_csv(dataset), sim_out);
        log::info("simulate: " + std::to_string(dataset.records.size()) + " records");
        return 0;
    }

    if (fit_cmd->parsed()) {
        const NoticeabilityDataset dataset = read_trials(fit_trials);
        const NoticeabilityModel model = fit_model(dataset);
        save_model(model, fit_out);
        log::info("fit: " + std::to_string(model.poses().size()) + " poses");
        return 0;
    }

    if (query_cmd->parsed()) {
        const NoticeabilityModel model = load_model(query_model);
        const ArmPose pose = parse_pose(query_pose);
        const Combiner combiner = combiner_from_string(query_combiner);
        if (!query_grid_out.empty()) {
            const Joint joint = parse_joint(query_joint);
            csv::write_file(query_grid_out, probability_grid_csv(model, joint, pose,
                                                                 query_grid_extent, query_grid_n));
            return 0;
        }
        if (!query_offset2d.empty()) {
            const Joint joint = parse_joint(query_joint);
            const auto o = parse_pair(query_offset2d, "--offset2d");
            out << csv::format_double(model.probability_2d(joint, pose, {o[0], o[1]})) << "\n";
            return 0;
        }
        if (query_offset.empty()) {
            throw InvalidInputError("query-prob: need --offset, --offset2d or --grid-out");
        }
        const CompositeOffset offset = parse_offset(query_offset);
        out << csv::format_double(composite_probability(model, pose, offset, combiner)) << "\n";
        return 0;
    }

    if (set_cmd->parsed()) {
        const NoticeabilityModel model = load_model(set_model);
        const ArmPose pose = parse_pose(set_pose);
        const Combiner combiner = combiner_from_string(set_combiner);
        const ApplicableSetResult result = applicable_set(model, pose, set_p, combiner);

        json root;
        root["pose"] = {pose.phi_s, pose.theta_s, pose.phi_e, pose.theta_e};
        root["p"] = set_p;
        root["combiner"] = combiner_name(combiner);
        root["shift_rule"] = "elbow level set centered at the negated shoulder offset";
        if (result.empty) {
            root["empty"] = true;
            root["reason"] = result.empty->reason;
        } else {
            root["empty"] = false;
            root["shoulder_region"] = region_to_json(result.set->shoulder_region);
            root["elbow_region_at_center"] = region_to_json(result.set->elbow_region_at_center);
            if (set_samples > 0) {
                const SampleResult samples = sample_applicable(*result.set, set_samples, set_seed);
                if (samples.empty) {
                    root["n_samples"] = 0;
                    root["sampling_failed"] = samples.empty->reason;
                } else {
                    root["n_samples"] = samples.samples.size();
                    json list = json::array();
                    for (const CompositeOffset& o : samples.samples) {
                        list.push_back(offset_to_json(o));
                    }
                    root["samples"] = list;
                }
            } else {
                root["n_samples"] = 0;
            }
        }
        emit(out, root.dump(2) + "\n", set_out);
        return 0;
    }

    if (amp_cmd->parsed()) {
        const NoticeabilityModel model = load_model(amp_model);
        const ArmPose extreme = parse_pose(amp_extreme);
        const Combiner combiner = combiner_from_string(amp_combiner);
        AmplifierConfig config = configure(model, extreme, amp_p, amp_delta_s, combiner);
        config.reduce = amp_reduce;
        const std::vector<PoseFrame> frames = read_trajectory(amp_in);
        const std::vector<AmplifiedFrame> amplified = amplify_trajectory(config, frames);
        emit(out, write_amplified_csv(amplified), amp_out);

        if (!amp_target.empty()) {
            const ArmPose target = parse_pose(amp_target);
            const auto len = parse_pair(amp_lengths, "--lengths");
            const PathMetrics m = path_metrics(amplified, {len[0], len[1]}, target);
            json jm{{"physical_wrist_ratio", m.physical_wrist_ratio},
                    {"virtual_wrist_ratio", m.virtual_wrist_ratio},
                    {"physical_elbow_ratio", m.physical_elbow_ratio},
                    {"virtual_elbow_ratio", m.virtual_elbow_ratio},
                    {"physical_wrist_path_m", m.physical_wrist_path},
                    {"virtual_wrist_path_m", m.virtual_wrist_path},
                    {"physical_elbow_path_m", m.physical_elbow_path},
                    {"virtual_elbow_path_m", m.virtual_elbow_path},
                    {"final_physical_rula", m.final_physical_rula}};
            out << jm.dump(2) << "\n";
        }
        return 0;
    }

    if (rula_cmd->parsed()) {
        const auto len = parse_pair(rula_lengths, "--lengths");
        const auto emit_pose = [&](const ArmPose& p) {
            out << rula_arm_score(p);
            if (rula_joints) {
                out << " " << joint_positions_to_json(forward_kinematics(p, {len[0], len[1]}));
            }
            out << "\n";
        };
        if (!rula_pose.empty()) {
            emit_pose(parse_pose(rula_pose));
            return 0;
        }
        if (rula_poses.empty()) throw InvalidInputError("rula: need --pose or --poses");
        for (const ArmPose& p : read_poses(rula_poses)) emit_pose(p);
        return 0;
    }

    if (cluster_cmd->parsed()) {
        const std::vector<ArmPose> sample = read_poses(cluster_in);
        const PoseCatalog catalog =
            select_representative_poses(sample, cluster_k, cluster_seed);
        emit(out, write_poses_csv(catalog.poses), cluster_out);
        return 0;
    }

    if (eval_cmd->parsed()) {
        const std::vector<ArmPose> catalog = load_catalog_or_default(eval_poses);
        const std::vector<RecoveryReport> reports = recovery_monte_carlo(
            catalog, eval_participants, eval_runs, eval_seed, eval_fp, eval_lapse, eval_noiseless,
            eval_serial ? Exec::serial : Exec::parallel);

        double mean_axis = 0.0, mean_shift = 0.0;
        for (const RecoveryReport& r : reports) {
            mean_axis += r.mean_axis_error;
            mean_shift += r.mean_shift_error;
        }
        if (!reports.empty()) {
            mean_axis /= static_cast<double>(reports.size());
            mean_shift /= static_cast<double>(reports.size());
        }
        json root{{"runs", reports.size()},
                  {"participants", eval_participants},
                  {"mean_axis_error_deg", mean_axis},
                  {"mean_shift_error_deg", mean_shift}};
        json per_run = json::array();
        for (const RecoveryReport& r : reports) per_run.push_back(report_to_json(r));
        root["per_run"] = per_run;
        if (!eval_out.empty()) {
            csv::write_file(eval_out, root.dump(2) + "\n");
        }
        json summary{{"runs", reports.size()},
                     {"mean_axis_error_deg", mean_axis},
                     {"mean_shift_error_deg", mean_shift}};
        out << summary.dump(2) << "\n";
        return 0;
    }

    err << app.help() << "\n";
    return 1;
}

} // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    // Unknown-subcommand suggestion before CLI11 sees the arguments.
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
        const auto& names = subcommand_names();
        if (std::find(names.begin(), names.end(), args[0]) == names.end()) {
            std::string best;
            std::size_t best_d = std::string::npos;
            for (const std::string& name : names) {
                const std::size_t d = edit_distance(args[0], name);
                if (d < best_d) {
                    best_d = d;
                    best = name;
                }
            }
            err << "unknown subcommand '" << args[0] << "'";
            if (best_d <= best.size() / 2 + 2) err << "; did you mean '" << best << "'?";
            err << "\n";
            return 1;
        }
    }

    try {
        return run(args, out, err);
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const InvalidInputError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace offsetmodel

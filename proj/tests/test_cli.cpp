#include "offsetmodel/cli.hpp"
#include "offsetmodel/csv.hpp"
#include "offsetmodel/dataset.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace offsetmodel;

namespace {

struct CliResult {
    int status = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.status = cli_dispatch(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "offsetmodel_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::size_t line_count(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

} // namespace

TEST_CASE("unknown subcommand suggests the nearest name and exits 1") {
    const CliResult r = run_cli({"qery-prob"});
    CHECK(r.status == 1);
    CHECK(r.err.find("query-prob") != std::string::npos);
    CHECK(r.err.find("did you mean") != std::string::npos);
}

TEST_CASE("--help lists all subcommands") {
    const CliResult r = run_cli({"--help"});
    CHECK(r.status == 0);
    for (const char* name : {"plan", "simulate", "fit", "query-prob", "applicable-set", "amplify",
                             "rula", "cluster-poses", "eval-recovery"}) {
        CHECK(r.out.find(name) != std::string::npos);
    }
    const CliResult sub = run_cli({"amplify", "--help"});
    CHECK(sub.status == 0);
    CHECK(sub.out.find("--delta-s") != std::string::npos);
}

TEST_CASE("plan emits the contracted row counts") {
    const CliResult r = run_cli({"plan", "--phase", "1", "--seed", "7"});
    REQUIRE(r.status == 0);
    CHECK(line_count(r.out) == 441); // header + 44 x 10 builtin poses

    const CliResult p2 = run_cli({"plan", "--phase", "2", "--seed", "7"});
    REQUIRE(p2.status == 0);
    CHECK(line_count(p2.out) == 2401); // header + 240 x 10

    const CliResult bad = run_cli({"plan", "--phase", "9"});
    CHECK(bad.status == 1);
}

TEST_CASE("rula scores poses") {
    const CliResult r = run_cli({"rula", "--pose", "0,10,0,100"});
    REQUIRE(r.status == 0);
    CHECK(r.out == "2\n");
    const CliResult invalid = run_cli({"rula", "--pose", "0,300,0,0"});
    CHECK(invalid.status == 1);

    const CliResult joints = run_cli({"rula", "--pose", "0,0,0,0", "--joints"});
    REQUIRE(joints.status == 0);
    CHECK(joints.out.find("\"shoulder\":[") != std::string::npos);
    CHECK(joints.out.find("\"wrist\":[") != std::string::npos);
}

TEST_CASE("simulate, fit, query and applicable-set pipeline") {
    const auto dir = work_dir();
    const std::string trials = (dir / "trials.csv").string();
    const std::string model = (dir / "model.json").string();

    const CliResult sim = run_cli({"simulate", "--participants", "40", "--seed", "3", "--out",
                                   trials, "--noiseless", "--fp", "0.02", "--lapse", "0"});
    REQUIRE(sim.status == 0);
    const NoticeabilityDataset data = read_trials(trials);
    CHECK(data.records.size() == 40u * 2424u);

    const CliResult fit = run_cli({"fit", "--trials", trials, "--out", model});
    REQUIRE(fit.status == 0);

    const CliResult query = run_cli(
        {"query-prob", "--model", model, "--pose", "30,45,20,120", "--offset", "5,0,0,0"});
    REQUIRE(query.status == 0);
    const double p = std::stod(query.out);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);

    // Self-consistency: the single-joint query on a sampled on-axis cell
    // reproduces its empirical rate within the fit noise (quantized at
    // 1/80 by the threshold responder).
    const auto cells = aggregate(data);
    double worst = 0.0;
    std::size_t checked = 0;
    for (const auto& cell : cells) {
        if (cell.offset.shoulder.d_phi == 0.0) continue;
        if (cell.offset.shoulder.d_theta != 0.0 || cell.offset.elbow.d_phi != 0.0 ||
            cell.offset.elbow.d_theta != 0.0) {
            continue;
        }
        if (cell.pose_index != 0 || checked >= 5) continue;
        ++checked;
        const ArmPose& pose = data.pose_catalog[cell.pose_index];
        std::ostringstream pose_text, offset_text;
        pose_text << csv::format_double(pose.phi_s) << "," << csv::format_double(pose.theta_s)
                  << "," << csv::format_double(pose.phi_e) << ","
                  << csv::format_double(pose.theta_e);
        offset_text << csv::format_double(cell.offset.shoulder.d_phi) << ",0";
        const CliResult q = run_cli({"query-prob", "--model", model, "--pose", pose_text.str(),
                                     "--joint", "shoulder", "--offset2d", offset_text.str()});
        REQUIRE(q.status == 0);
        worst = std::max(worst, std::abs(std::stod(q.out) - cell.p_hat));
    }
    CHECK(checked == 5);
    CHECK(worst < 0.05);

    const CliResult set = run_cli({"applicable-set", "--model", model, "--pose", "30,45,20,120",
                                   "--p", "0.5", "--samples", "10", "--seed", "5"});
    REQUIRE(set.status == 0);
    const auto parsed = nlohmann::json::parse(set.out);
    CHECK(parsed.at("empty").get<bool>() == false);
    CHECK(parsed.at("combiner").get<std::string>() == "mean");
    CHECK(parsed.at("shoulder_region").at("semi_axes").contains("phi_pos"));
    CHECK(parsed.at("samples").size() == 10);

    // Grid export.
    const std::string grid = (dir / "grid.csv").string();
    const CliResult gq = run_cli({"query-prob", "--model", model, "--pose", "30,45,20,120",
                                  "--joint", "elbow", "--grid-out", grid, "--grid-n", "9"});
    REQUIRE(gq.status == 0);
    const std::string grid_text = csv::read_file(grid);
    CHECK(grid_text.rfind("d_phi,d_theta,p\n", 0) == 0);
    CHECK(line_count(grid_text) == 82); // header + 81 points
}

TEST_CASE("phase-3 plan from a fitted model and empty applicable-set reporting") {
    const auto dir = work_dir();
    const std::string trials = (dir / "p3_trials.csv").string();
    const std::string model = (dir / "p3_model.json").string();

    REQUIRE(run_cli({"simulate", "--participants", "30", "--seed", "2", "--out", trials,
                     "--noiseless", "--lapse", "0"})
                .status == 0);
    REQUIRE(run_cli({"fit", "--trials", trials, "--out", model}).status == 0);

    const CliResult p3 = run_cli({"plan", "--phase", "3", "--model", model, "--seed", "4"});
    REQUIRE(p3.status == 0);
    CHECK(line_count(p3.out) == 2561); // header + 256 x 10 builtin poses

    const CliResult missing = run_cli({"plan", "--phase", "3", "--seed", "4"});
    CHECK(missing.status == 1); // phase 3 needs --model

    const CliResult empty = run_cli(
        {"applicable-set", "--model", model, "--pose", "30,45,20,120", "--p", "0.001"});
    REQUIRE(empty.status == 0);
    const auto parsed = nlohmann::json::parse(empty.out);
    CHECK(parsed.at("empty").get<bool>() == true);
    CHECK(parsed.at("reason").get<std::string>().find("baseline") != std::string::npos);
}

TEST_CASE("amplify pipeline with metrics") {
    const auto dir = work_dir();
    const std::string trials = (dir / "amp_trials.csv").string();
    const std::string model = (dir / "amp_model.json").string();
    const std::string traj = (dir / "traj.csv").string();
    const std::string amp = (dir / "amp.csv").string();

    REQUIRE(run_cli({"simulate", "--participants", "60", "--seed", "11", "--out", trials,
                     "--noiseless", "--lapse", "0"})
                .status == 0);
    REQUIRE(run_cli({"fit", "--trials", trials, "--out", model}).status == 0);

    std::string traj_text = "t,phi_s,theta_s,phi_e,theta_e\n";
    for (int i = 0; i <= 20; ++i) {
        const double lambda = i / 20.0;
        traj_text += csv::format_double(0.05 * i) + "," + csv::format_double(90.0 * lambda) + "," +
                     csv::format_double(90.0 * lambda) + "," + csv::format_double(90.0 * lambda) +
                     "," + csv::format_double(90.0 * lambda) + "\n";
    }
    csv::write_file(traj, traj_text);

    const CliResult r = run_cli({"amplify", "--model", model, "--extreme", "90,90,90,90", "--p",
                                 "0.75", "--delta-s", "0.5", "--in", traj, "--out", amp,
                                 "--metrics-target", "90,90,90,90"});
    REQUIRE(r.status == 0);
    const auto metrics = nlohmann::json::parse(r.out);
    CHECK(metrics.at("virtual_wrist_ratio").get<double>() > 0.0);
    CHECK(metrics.at("final_physical_rula").get<int>() >= 2);

    const std::string amp_text = csv::read_file(amp);
    CHECK(line_count(amp_text) == 22);
    CHECK(amp_text.rfind("t,phi_s", 0) == 0);

    // Re-running the identical command is byte-identical.
    const CliResult again = run_cli({"amplify", "--model", model, "--extreme", "90,90,90,90",
                                     "--p", "0.75", "--delta-s", "0.5", "--in", traj, "--out", amp,
                                     "--metrics-target", "90,90,90,90"});
    REQUIRE(again.status == 0);
    CHECK(csv::read_file(amp) == amp_text);
    CHECK(again.out == r.out);
}

TEST_CASE("cluster-poses CLI and eval-recovery summary") {
    const auto dir = work_dir();
    const std::string sample = (dir / "sample.csv").string();
    std::string text = "phi_s,theta_s,phi_e,theta_e\n";
    for (int i = 0; i < 30; ++i) {
        text += csv::format_double(-40.0 + i) + "," + csv::format_double(40.0 + i) + "," +
                csv::format_double(i) + "," + csv::format_double(100.0 + i) + "\n";
    }
    csv::write_file(sample, text);
    const CliResult cluster =
        run_cli({"cluster-poses", "--in", sample, "--k", "2", "--seed", "1"});
    REQUIRE(cluster.status == 0);
    CHECK(line_count(cluster.out) == 7); // header + 2 medoids + 4 extremes

    const CliResult eval = run_cli({"eval-recovery", "--participants", "6", "--runs", "2",
                                    "--seed", "42", "--serial"});
    REQUIRE(eval.status == 0);
    const auto summary = nlohmann::json::parse(eval.out);
    CHECK(summary.at("runs").get<int>() == 2);
    CHECK(summary.at("mean_axis_error_deg").get<double>() >= 0.0);
}

TEST_CASE("missing files exit with the data-error status") {
    const CliResult fit = run_cli({"fit", "--trials", "/nonexistent/t.csv", "--out", "/tmp/m.json"});
    CHECK(fit.status == 2);
    const CliResult query = run_cli(
        {"query-prob", "--model", "/nonexistent/m.json", "--pose", "0,0,0,0", "--offset", "0,0,0,0"});
    CHECK(query.status == 2);
    const CliResult missing_flag = run_cli({"fit"});
    CHECK(missing_flag.status == 1);
}

TEST_CASE("simulate is byte-identical across runs with one seed") {
    const CliResult a =
        run_cli({"simulate", "--participants", "2", "--seed", "5", "--dense-poses", "2"});
    const CliResult b =
        run_cli({"simulate", "--participants", "2", "--seed", "5", "--dense-poses", "2"});
    REQUIRE(a.status == 0);
    CHECK(a.out == b.out);
    const CliResult c =
        run_cli({"simulate", "--participants", "2", "--seed", "6", "--dense-poses", "2"});
    CHECK(a.out != c.out);
}

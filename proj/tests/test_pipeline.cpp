#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lanemden/pipeline.hpp"

using namespace lanemden;
namespace fs = std::filesystem;

namespace {

const std::string kConstant = R"(domain = interval
nx = 257
p1 = 2
p2 = 2
alpha1 = -0.5
beta1 = -0.5
alpha2 = -0.5
beta2 = -0.5
lambda = 10
)";

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("lanemden_pipeline_" + name);
    fs::remove_all(dir);
    return dir;
}

RunResult run_in(const std::string& text, Subcommand cmd, const fs::path& dir) {
    RunOptions opt;
    opt.command = cmd;
    opt.out = dir;
    return run_text(text, opt);
}

void expect_referenced_files_exist(const nlohmann::json& m, const fs::path& dir) {
    ASSERT_TRUE(m.contains("fields"));
    for (const auto& [name, file] : m["fields"].items()) EXPECT_TRUE(fs::exists(dir / file.get<std::string>())) << name;
    if (m.contains("plots"))
        for (const auto& file : m["plots"]) EXPECT_TRUE(fs::exists(dir / file.get<std::string>()));
}

}  // namespace

TEST(Run, ConstantSolutionManifest) {
    const auto dir = fresh_dir("constant");
    const auto r = run_in(kConstant, Subcommand::solve, dir);
    EXPECT_EQ(r.exit_code, exit_status::ok);
    const auto m = nlohmann::json::parse(read_text(dir / "manifest.json"));
    EXPECT_EQ(m["schema_version"], schema_version);
    EXPECT_TRUE(m["solution"]["enclosed"].get<bool>());
    EXPECT_TRUE(m["solution"]["converged"].get<bool>());
    EXPECT_NEAR(m["solution"]["u_sup"].get<double>(), 1.587401, 1e-6);
    EXPECT_TRUE(m["certificate"]["pass"].get<bool>());
    EXPECT_EQ(m["pair"]["lambda_mode"], "explicit");
    EXPECT_TRUE(m["runtime"]["seconds"].contains("solve"));
    expect_referenced_files_exist(m, dir);
    EXPECT_TRUE(fs::exists(dir / "u.midline.csv"));
}

TEST(Run, RecipeMismatchExitsWithConfigStatus) {
    const auto dir = fresh_dir("mismatch");
    const auto r = run_in(kConstant + "recipe = T5\n", Subcommand::solve, dir);
    EXPECT_EQ(r.exit_code, exit_status::config);
    EXPECT_EQ(r.manifest["error"]["kind"], "recipe_mismatch");
    EXPECT_NE(r.manifest["error"]["message"].get<std::string>().find("beta1"), std::string::npos);
    EXPECT_EQ(nlohmann::json::parse(read_text(dir / "manifest.json"))["status"]["exit_code"], exit_status::config);
}

TEST(Run, BoundednessTwoDimensional) {
    const auto dir = fresh_dir("bounded");
    const std::string text = "domain = rectangle\nnx = 9\np1 = 2\np2 = 2\nalpha1 = -0.5\nbeta1 = -0.4\n"
                             "alpha2 = -0.4\nbeta2 = -0.5\ngamma = -0.4\n";
    const auto r = run_in(text, Subcommand::boundedness, dir);
    EXPECT_EQ(r.exit_code, exit_status::ok);
    const auto& b = r.manifest["boundedness"]["u"];
    EXPECT_TRUE(b["bounded_regime"].get<bool>());
    EXPECT_EQ(b["sup_norms"].size(), 3u);
    EXPECT_EQ(b["dimension"], 2);
}

TEST(Run, ConfigErrorsLeaveAManifest) {
    const auto dir = fresh_dir("config_error");
    std::string text = kConstant;
    text.replace(text.find("alpha1 = -0.5"), 13, "alpha1 = -1.5");
    const auto r = run_in(text, Subcommand::solve, dir);
    EXPECT_EQ(r.exit_code, exit_status::config);
    const auto m = nlohmann::json::parse(read_text(dir / "manifest.json"));
    EXPECT_EQ(m["error"]["stage"], "config");
    EXPECT_EQ(m["status"]["exit_code"], exit_status::config);
}

TEST(Run, CertificateFailureExitsWithThree) {
    const auto dir = fresh_dir("certificate");
    std::string text = kConstant;
    text.replace(text.find("lambda = 10"), 11, "lambda = 1.5");
    const auto r = run_in(text, Subcommand::solve, dir);
    EXPECT_EQ(r.exit_code, exit_status::certificate);
    EXPECT_FALSE(r.manifest["certificate"]["pass"].get<bool>());
    EXPECT_FALSE(r.manifest.contains("solution"));
}

TEST(Run, IterationLimitExitsWithFour) {
    const auto dir = fresh_dir("iterations");
    const auto r = run_in(kConstant + "max_outer_iterations = 2\n", Subcommand::solve, dir);
    EXPECT_EQ(r.exit_code, exit_status::convergence);
    EXPECT_FALSE(r.manifest["solution"]["converged"].get<bool>());
    EXPECT_TRUE(fs::exists(dir / "u.csv"));
}

TEST(Run, UniquenessSubcommand) {
    const auto dir = fresh_dir("uniqueness");
    const auto r = run_in(kConstant, Subcommand::uniqueness, dir);
    EXPECT_EQ(r.exit_code, exit_status::ok);
    const auto& u = r.manifest["uniqueness"];
    EXPECT_EQ(u["gate"]["verdict"], "pass");
    EXPECT_TRUE(u["agree"].get<bool>());
    EXPECT_LE(u["distance"].get<double>(), 1e-6);
}

TEST(Run, EigenAndTorsionSubcommands) {
    const auto dir = fresh_dir("spectral");
    std::string text = kConstant;
    text.replace(text.find("nx = 257"), 8, "nx = 33");
    const auto e = run_in(text + "p1 = 3\n", Subcommand::eigen, dir);
    EXPECT_EQ(e.exit_code, exit_status::config);  // duplicate key
    const auto r = run_in(text, Subcommand::eigen, dir);
    EXPECT_EQ(r.exit_code, exit_status::ok);
    EXPECT_GT(r.manifest["eigen"]["u"]["dirichlet"]["lambda"].get<double>(), 1.0);
    EXPECT_TRUE(r.manifest["eigen"]["u"]["restarts"]["pass"].get<bool>());
    EXPECT_EQ(r.manifest["eigen"]["v"]["neumann"]["lambda"].get<double>(), 1.0);
    const auto t = run_in(text, Subcommand::torsion, dir);
    EXPECT_EQ(t.exit_code, exit_status::ok);
    EXPECT_NEAR(t.manifest["torsion"]["u"]["neumann"]["sup"].get<double>(), 1.0, 1e-8);
    expect_referenced_files_exist(t.manifest, dir);
}

TEST(Run, DeterministicOutputs) {
    const auto dir = fresh_dir("determinism");
    auto first = run_in(kConstant, Subcommand::solve, dir).manifest;
    const std::string u = read_text(dir / "u.csv");
    const std::string v = read_text(dir / "v.csv");
    auto second = run_in(kConstant, Subcommand::solve, dir).manifest;
    EXPECT_EQ(read_text(dir / "u.csv"), u);
    EXPECT_EQ(read_text(dir / "v.csv"), v);
    first.erase("runtime");
    second.erase("runtime");
    EXPECT_EQ(first.dump(), second.dump());
}

TEST(EmitPlotData, SelectsFields) {
    const auto dir = fresh_dir("plots");
    const auto r = run_in(kConstant + "plot = none\n", Subcommand::solve, dir);
    ASSERT_EQ(r.exit_code, exit_status::ok);
    EXPECT_FALSE(fs::exists(dir / "u.midline.csv"));
    const auto one = emit_plot_data(r.manifest, dir, "u");
    ASSERT_EQ(one.size(), 2u);
    EXPECT_EQ(one[1].filename(), "u.midline.csv");
    const auto all = emit_plot_data(r.manifest, dir, "all");
    EXPECT_EQ(all.size(), 2 * r.manifest["fields"].size());
    try {
        emit_plot_data(r.manifest, dir, "w");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("available: u, u_lower, u_upper, v, v_lower, v_upper"), std::string::npos) << msg;
    }
}

TEST(Report, SummarisesExistingRun) {
    const auto dir = fresh_dir("report");
    ASSERT_EQ(run_in(kConstant + "plot = none\n", Subcommand::solve, dir).exit_code, exit_status::ok);
    const auto r = run_in(kConstant + "plot = u\n", Subcommand::report, dir);
    EXPECT_EQ(r.exit_code, exit_status::ok);
    EXPECT_TRUE(fs::exists(dir / "summary.txt"));
    EXPECT_TRUE(fs::exists(dir / "u.midline.csv"));
    EXPECT_NE(read_text(dir / "summary.txt").find("converged"), std::string::npos);
    EXPECT_EQ(run_in(kConstant, Subcommand::report, fresh_dir("report_empty")).exit_code, exit_status::config);
}

TEST(ExitStatus, EveryErrorMapsToOneStatus) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), exit_status::config);
    EXPECT_EQ(exit_code_for(RecipeMismatchError("x")), exit_status::config);
    EXPECT_EQ(exit_code_for(PreconditionError("x")), exit_status::config);
    EXPECT_EQ(exit_code_for(CertificateError("x")), exit_status::certificate);
    EXPECT_EQ(exit_code_for(SingularityError("x", 0)), exit_status::convergence);
    EXPECT_EQ(exit_code_for(EnclosureError("x")), exit_status::convergence);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), exit_status::convergence);
}

TEST(Threads, EnvironmentCap) {
    EXPECT_GE(resolve_threads(nullptr), 1u);
    EXPECT_EQ(resolve_threads("1"), 1u);
    EXPECT_LE(resolve_threads("64"), resolve_threads(nullptr));
    EXPECT_THROW(resolve_threads("0"), ConfigError);
    EXPECT_THROW(resolve_threads("two"), ConfigError);
}

TEST(Subcommands, NamesRoundTrip) {
    for (const auto& [kind, name] : subcommand_names()) EXPECT_EQ(subcommand_from_string(name), kind);
    EXPECT_EQ(subcommand_names().size(), 8u);
    EXPECT_THROW(subcommand_from_string("plot"), ConfigError);
}

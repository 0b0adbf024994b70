// End-to-end checks of the pcdenoise binary. The executable path arrives
// via the PCDN_CLI environment variable set by ctest.

#include "pcdn/cloud_io.hpp"
#include "pcdn/network.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pcdn;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* env = std::getenv("PCDN_CLI");
    return env ? env : "./tools/pcdenoise";
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string capture = (fs::temp_directory_path() / "pcdn_cli_out.txt").string();
    const std::string command = cli_path() + " " + args + " > " + capture + " 2>&1";
    const int status = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    return result;
}

std::string work_dir() {
    const std::string dir = (fs::temp_directory_path() / "pcdn_cli_work").string();
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int count_files(const std::string& dir, const std::string& needle) {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().filename().string().find(needle) != std::string::npos) ++count;
    }
    return count;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen writes the expected files and is seed-deterministic") {
    const std::string dir = work_dir() + "/gen";
    fs::remove_all(dir);
    const RunResult r = run_cli("gen --shapes cube,sphere --points 500 --levels 0.005,0.01 --out " +
                                dir + " --seed 4 --no-meshes");
    REQUIRE(r.exit_code == 0);
    CHECK(count_files(dir, "_clean") == 2);
    CHECK(count_files(dir, "gaussian") == 4);
    CHECK(fs::exists(dir + "/manifest.txt"));

    const std::string before = read_file(dir + "/cube0_gaussian_0.01.xyz");
    fs::remove_all(dir);
    REQUIRE(run_cli("gen --shapes cube,sphere --points 500 --levels 0.005,0.01 --out " + dir +
                    " --seed 4 --no-meshes")
                .exit_code == 0);
    CHECK(read_file(dir + "/cube0_gaussian_0.01.xyz") == before);
}

TEST_CASE("gen rejects negative noise levels") {
    const RunResult r = run_cli("gen --levels -1 --out " + work_dir() + "/bad");
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("usage") != std::string::npos);
}

TEST_CASE("train writes a model and a per-epoch log") {
    const std::string dir = work_dir() + "/train";
    fs::remove_all(dir);
    REQUIRE(run_cli("gen --shapes cube --points 400 --levels 0.005 --out " + dir +
                    " --seed 5 --no-meshes --patches-per-model 32 --patch-size 24")
                .exit_code == 0);

    const std::string model = dir + "/model.pcdn";
    const RunResult r = run_cli("train --manifest " + dir + "/manifest.txt --epochs 2 " +
                                "--batch 8 --encoder 8,16 --decoder 8,3 --out " + model);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(model));
    REQUIRE(fs::exists(model + ".log"));

    std::ifstream log(model + ".log");
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) ++lines;
    CHECK(lines == 3);  // header + 2 epochs

    // the saved model is loadable and matches the requested architecture
    const NetworkParams params = load_params(model);
    CHECK(params.arch.encoder_widths == std::vector<int>{8, 16});
    CHECK(params.patch_size == 24);
}

TEST_CASE("train validates flags and missing files") {
    CHECK(run_cli("train --manifest does-not-exist.txt").exit_code != 0);
    const RunResult bad_eta = run_cli("train --manifest x.txt --eta 2.0");
    CHECK(bad_eta.exit_code != 0);
    CHECK(bad_eta.output.find("usage") != std::string::npos);
}

TEST_CASE("filter with a zeroed model reproduces the input") {
    const std::string dir = work_dir() + "/filter";
    fs::remove_all(dir);
    REQUIRE(run_cli("gen --shapes cube --points 300 --levels 0.01 --out " + dir +
                    " --seed 6 --no-meshes")
                .exit_code == 0);

    Architecture arch;
    arch.encoder_widths = {8, 16};
    arch.decoder_widths = {8, 3};
    NetworkParams params = init_params(arch, 3);
    params.linear.back().weight.setZero();
    params.linear.back().bias.setZero();
    params.patch_size = 24;
    params.radius_fraction = 0.05;
    const std::string model = dir + "/zero.pcdn";
    save_params(params, model);

    const std::string input = dir + "/cube0_gaussian_0.01.xyz";
    const std::string output = dir + "/filtered.xyz";
    const RunResult r =
        run_cli("filter --model " + model + " --input " + input + " --output " + output);
    REQUIRE(r.exit_code == 0);

    const PointCloud in_cloud = load_cloud(input);
    const PointCloud out_cloud = load_cloud(output);
    REQUIRE(in_cloud.size() == out_cloud.size());
    for (std::size_t i = 0; i < in_cloud.size(); ++i) {
        CHECK((in_cloud.positions[i] - out_cloud.positions[i]).cwiseAbs().maxCoeff() < 1e-7);
    }

    // same seed, same output bytes
    const std::string output2 = dir + "/filtered2.xyz";
    REQUIRE(run_cli("filter --model " + model + " --input " + input + " --output " + output2 +
                    " --seed 9")
                .exit_code == 0);
    REQUIRE(run_cli("filter --model " + model + " --input " + input + " --output " + output +
                    " --seed 9")
                .exit_code == 0);
    CHECK(read_file(output) == read_file(output2));
}

TEST_CASE("filter reports missing models as io errors") {
    const RunResult r = run_cli("filter --model nope.pcdn --input x.xyz --output y.xyz");
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("io:") != std::string::npos);
}

TEST_CASE("eval prints cd and mse, optionally p2f") {
    const std::string dir = work_dir() + "/eval";
    fs::remove_all(dir);
    REQUIRE(run_cli("gen --shapes cube --points 300 --levels 0.005 --out " + dir + " --seed 7")
                .exit_code == 0);
    const std::string clean = dir + "/cube0_clean.xyz";

    const RunResult self = run_cli("eval --clean " + clean + " --filtered " + clean);
    REQUIRE(self.exit_code == 0);
    CHECK(self.output.find("cd=0 ") != std::string::npos);
    CHECK(self.output.find("mse=0") != std::string::npos);
    CHECK(self.output.find("p2f=") == std::string::npos);

    const RunResult with_mesh = run_cli("eval --clean " + clean + " --filtered " + clean +
                                        " --p2f " + dir + "/cube0.off");
    REQUIRE(with_mesh.exit_code == 0);
    CHECK(with_mesh.output.find("p2f=") != std::string::npos);
}

TEST_CASE("config files provide defaults and flags override them") {
    const std::string dir = work_dir() + "/config";
    fs::remove_all(dir);
    const std::string conf = work_dir() + "/gen.conf";
    std::ofstream(conf) << "points=250\nshapes=cube\nlevels=0.01\nno-meshes\n";

    const RunResult file_only = run_cli("gen --config " + conf + " --out " + dir + " --seed 2");
    REQUIRE(file_only.exit_code == 0);
    CHECK(file_only.output.find("points=250") != std::string::npos);
    CHECK(file_only.output.find("models=1") != std::string::npos);

    const RunResult overridden =
        run_cli("gen --config " + conf + " --points 99 --out " + dir + " --seed 2");
    REQUIRE(overridden.exit_code == 0);
    CHECK(overridden.output.find("points=99") != std::string::npos);

    const std::string bad = work_dir() + "/bad.conf";
    std::ofstream(bad) << "not_a_flag=1\n";
    const RunResult rejected = run_cli("gen --config " + bad + " --out " + dir);
    CHECK(rejected.exit_code != 0);
    CHECK(rejected.output.find("usage") != std::string::npos);
}

TEST_CASE("eval reports malformed clouds with file and line") {
    const std::string dir = work_dir();
    const std::string bad = dir + "/bad.xyz";
    std::ofstream(bad) << "1 2 oops\n";
    const RunResult r = run_cli("eval --clean " + bad + " --filtered " + bad);
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("parse:") != std::string::npos);
    CHECK(r.output.find(":1:") != std::string::npos);
}

}  // TEST_SUITE

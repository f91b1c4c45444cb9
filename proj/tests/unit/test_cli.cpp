#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kData = CRESCENT_DATA;

int crescent(const std::string& args)
{
    const std::string cmd = std::string(CRESCENT_BIN) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("crescent_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string toy()
{
    return (kData / "toy-radial" / "config.json").string();
}

} // namespace

TEST_CASE("validate exit codes")
{
    CHECK(crescent("validate " + toy()) == 0);
    CHECK(crescent("validate " + (kData / "solar-heavy" / "config.json").string()) == 0);

    const fs::path d = scratch("validate");
    std::ifstream in(toy());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto at = text.find("\"schema_version\": 1");
    REQUIRE(at != std::string::npos);
    text.replace(at, 19, "\"schema_version\": 7");
    std::ofstream(d / "config.json") << text;
    CHECK(crescent("validate " + (d / "config.json").string()) == 2);
    CHECK(crescent("validate " + (d / "nope.json").string()) == 2);
    CHECK(crescent("no-such-command") == 2);
    CHECK(crescent("--help") == 0);
}

TEST_CASE("simulate writes byte-identical outputs")
{
    const fs::path a = scratch("sim_a");
    const fs::path b = scratch("sim_b");
    REQUIRE(crescent("simulate " + toy() + " --seed 42 --out " + a.string()) == 0);
    REQUIRE(crescent("simulate " + toy() + " --seed 42 --out " + b.string()) == 0);
    CHECK(fs::exists(a / "trajectory.csv"));
    CHECK(fs::exists(a / "events.csv"));
    CHECK(slurp(a / "trajectory.csv") == slurp(b / "trajectory.csv"));
    CHECK(slurp(a / "events.csv") == slurp(b / "events.csv"));
}

TEST_CASE("unwritable output is a runtime error")
{
    const fs::path d = scratch("blocked");
    std::ofstream(d / "file") << "x";
    CHECK(crescent("simulate " + toy() + " --out " + (d / "file" / "sub").string()) == 1);
}

TEST_CASE("quiescent configuration gives a flat trajectory file")
{
    const fs::path d = scratch("quiet");
    REQUIRE(crescent("simulate " + (kData / "solar-heavy" / "config_quiescent.json").string() +
                     " --seed 1 --out " + d.string()) == 0);
    std::ifstream in(d / "trajectory.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("step", 0) == 0) {
            continue;
        }
        ++rows;
        std::istringstream s(line);
        std::string step, time, perf;
        std::getline(s, step, ',');
        std::getline(s, time, ',');
        std::getline(s, perf, ',');
        CHECK(std::stod(perf) == 1.0);
    }
    CHECK(rows == 139);
}

TEST_CASE("ensemble summaries ignore workers and metrics recompute them exactly")
{
    const fs::path one = scratch("ens_1");
    const fs::path eight = scratch("ens_8");
    REQUIRE(crescent("ensemble " + toy() + " --n 6 --workers 1 --out " + one.string()) == 0);
    REQUIRE(crescent("ensemble " + toy() + " --n 6 --workers 8 --out " + eight.string()) == 0);
    CHECK(slurp(one / "summary.json") == slurp(eight / "summary.json"));
    CHECK(fs::exists(one / "manifest.json"));

    const fs::path re = scratch("ens_metrics");
    REQUIRE(crescent("metrics " + one.string() + " --out " + re.string()) == 0);
    CHECK(slurp(re / "summary.json") == slurp(one / "summary.json"));
}

TEST_CASE("sweep emits one row per level")
{
    const fs::path d = scratch("sweep");
    REQUIRE(crescent("sweep " + toy() + " --levels 0.1:0.8:0.1 --n 2 --out " + d.string()) == 0);
    std::ifstream in(d / "sweep.csv");
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#' && line.rfind("level", 0) != 0) {
            ++rows;
        }
    }
    CHECK(rows == 8);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

const std::string kCli = COCURVE_CLI_PATH;

struct Sandbox {
    fs::path root;
    Sandbox() {
        root = fs::temp_directory_path() /
               ("cocurve_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()));
        fs::create_directories(root);
    }
    ~Sandbox() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
    static int counter() {
        static int c = 0;
        return c++;
    }
    std::string path(const std::string& rel) const { return (root / rel).string(); }
};

int run(const std::string& args) {
    const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("synth is reproducible byte for byte") {
    Sandbox box;
    REQUIRE(run("synth --out " + box.path("a") + " --seed 5 --years 1.0") == 0);
    REQUIRE(run("synth --out " + box.path("b") + " --seed 5 --years 1.0") == 0);
    CHECK(slurp(box.path("a/gas.csv")) == slurp(box.path("b/gas.csv")));
    CHECK(slurp(box.path("a/crude.csv")) == slurp(box.path("b/crude.csv")));
    CHECK(slurp(box.path("a/truth_params.json")) == slurp(box.path("b/truth_params.json")));

    REQUIRE(run("synth --out " + box.path("c") + " --seed 6 --years 1.0") == 0);
    CHECK(slurp(box.path("a/gas.csv")) != slurp(box.path("c/gas.csv")));
}

TEST_CASE("exit codes follow the documented mapping") {
    Sandbox box;
    REQUIRE(run("synth --out " + box.path("d") + " --seed 1 --years 1.5") == 0);

    // missing input file -> io error
    CHECK(run("calibrate --gas " + box.path("d/gas.csv") + " --crude " +
              box.path("nope.csv") + " --out " + box.path("x")) == 1);

    // corrupt params json -> data validation error
    std::ofstream(box.path("bad.json")) << "{ not json";
    CHECK(run("validate --params " + box.path("bad.json") + " --out " + box.path("v")) ==
          2);

    // constant prices -> degenerate data
    {
        std::ofstream gas(box.path("flat_gas.csv"));
        gas << "date,delivery_month,price\n";
        std::ofstream crude(box.path("flat_crude.csv"));
        crude << "date,delivery_month,price\n";
        for (int day = 1; day <= 28; ++day) {
            for (int m = 0; m < 4; ++m) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "2015-01-%02d,2015-%02d,%g\n", day, 2 + m,
                              40.0);
                gas << buf;
                crude << buf;
            }
        }
    }
    CHECK(run("calibrate --gas " + box.path("flat_gas.csv") + " --crude " +
              box.path("flat_crude.csv") + " --out " + box.path("y")) == 2);
}

TEST_CASE("calibrate then simulate then validate round trip") {
    Sandbox box;
    REQUIRE(run("synth --out " + box.path("data") + " --seed 20 --years 2.0") == 0);
    REQUIRE(run("calibrate --gas " + box.path("data/gas.csv") + " --crude " +
                box.path("data/crude.csv") + " --out " + box.path("fit") +
                " --theta-horizon 0.4 --theta-pieces 4 --fan-size 6") == 0);
    CHECK(fs::exists(box.path("fit/params.json")));
    CHECK(fs::exists(box.path("fit/calibration_report.json")));
    CHECK(fs::exists(box.path("fit/pi.csv")));
    CHECK(fs::exists(box.path("fit/moment_centered_gas.csv")));
    CHECK(fs::exists(box.path("fit/effective_config.toml")));

    REQUIRE(run("simulate --params " + box.path("fit/params.json") + " --gas " +
                box.path("data/gas.csv") + " --crude " + box.path("data/crude.csv") +
                " --out " + box.path("sim") +
                " --paths 3 --horizon 0.5 --measure q --seed 4") == 0);
    CHECK(fs::exists(box.path("sim/scenarios.csv")));
    CHECK(fs::exists(box.path("sim/scenarios.bin")));
    CHECK(fs::exists(box.path("sim/diagnostics.json")));

    // long CSV format: header plus path,t,T,energy,price rows
    {
        std::ifstream in(box.path("sim/scenarios.csv"));
        std::string header;
        std::getline(in, header);
        CHECK(header == "path,t,T,energy,price");
        std::string row;
        std::getline(in, row);
        CHECK(row.find("gas") != std::string::npos);
    }

    REQUIRE(run("validate --params " + box.path("fit/params.json") + " --motions " +
                box.path("fit/motions.csv") + " --out " + box.path("val") + " --seed 2") ==
            0);
    const std::string report = slurp(box.path("val/validation.json"));
    CHECK(report.find("\"pass\": true") != std::string::npos);
}

TEST_CASE("simulate reruns are byte identical") {
    Sandbox box;
    REQUIRE(run("synth --out " + box.path("data") + " --seed 8 --years 1.0") == 0);
    const std::string sim_args = " --gas " + box.path("data/gas.csv") + " --crude " +
                                 box.path("data/crude.csv") +
                                 " --paths 5 --horizon 0.25 --seed 99";
    REQUIRE(run("simulate --params " + box.path("data/truth_params.json") + sim_args +
                " --out " + box.path("s1")) == 0);
    REQUIRE(run("simulate --params " + box.path("data/truth_params.json") + sim_args +
                " --out " + box.path("s2")) == 0);
    CHECK(slurp(box.path("s1/scenarios.csv")) == slurp(box.path("s2/scenarios.csv")));
    CHECK(slurp(box.path("s1/scenarios.bin")) == slurp(box.path("s2/scenarios.bin")));
}

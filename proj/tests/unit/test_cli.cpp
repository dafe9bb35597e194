#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include <gfid/error.hpp>
#include <gfid/networks.hpp>
#include <gfid_cli/cli.hpp>

using namespace gfid;
using namespace gfid::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gfid-sim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kToy = std::string(GFID_TEST_DATA_DIR) + "/toy_network.json";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("layer ranges") {
    CHECK(parse_layer_range("", 3) == std::vector<std::size_t>{1, 2, 3});
    CHECK(parse_layer_range("all", 2) == std::vector<std::size_t>{1, 2});
    CHECK(parse_layer_range("1-3,5", 8) == std::vector<std::size_t>{1, 2, 3, 5});
    CHECK(parse_layer_range("4,2,2", 8) == std::vector<std::size_t>{2, 4});
    CHECK_THROWS_AS(parse_layer_range("9", 8), Error);
    CHECK_THROWS_AS(parse_layer_range("0", 8), Error);
    CHECK_THROWS_AS(parse_layer_range("3-1", 8), Error);
    CHECK_THROWS_AS(parse_layer_range("a", 8), Error);
    CHECK_THROWS_AS(parse_layer_range("1,,2", 8), Error);
  }

  TEST_CASE("channel scaling") {
    const auto vgg = builtin_network("vgg16");
    const auto l1 = std::get<ConvLayerConfig>(scale_layer(vgg.layers[0], 64));
    CHECK(l1.c_in == 1);
    CHECK(l1.c_out == 1);
    const auto l2 = std::get<ConvLayerConfig>(scale_layer(vgg.layers[1], 64));
    CHECK(l2.c_in == 1);
    const auto alex = builtin_network("alexnet");
    const auto a2 = std::get<ConvLayerConfig>(scale_layer(alex.layers[1], 3));
    CHECK(a2.c_in == 32);
    CHECK(a2.c_out == 86);
    CHECK(a2.h_in == std::get<ConvLayerConfig>(alex.layers[1]).h_in);
    const auto fc = std::get<FcLayerConfig>(scale_layer(FcLayerConfig{9216, 4096}, 1000));
    CHECK(fc.n == 10);
    CHECK(fc.m == 5);
    CHECK_THROWS_AS(scale_layer(alex.layers[0], 0), PreconditionError);
  }

  TEST_CASE("thread count from the environment") {
    ::setenv("GFID_SIM_THREADS", "3", 1);
    CHECK(threads_from_env() == 3);
    ::setenv("GFID_SIM_THREADS", "zero", 1);
    CHECK(threads_from_env() >= 1);
    ::unsetenv("GFID_SIM_THREADS");
    CHECK(threads_from_env() >= 1);
  }

  TEST_CASE("report formats") {
    const Run text = run({"report", "--network", "alexnet", "--compare"});
    CHECK(text.code == kExitOk);
    CHECK(text.out.find("published conv: 20.8 ms") != std::string::npos);
    CHECK(text.out.find("conv: ") != std::string::npos);

    const Run csv = run({"report", "--network", "alexnet", "--layers", "1-2", "--format", "csv"});
    CHECK(csv.code == kExitOk);
    CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 3);

    const Run json = run({"report", "--network", "vgg16", "--format", "json", "--compare"});
    REQUIRE(json.code == kExitOk);
    const auto doc = nlohmann::json::parse(json.out);
    CHECK(doc["layers"].size() == 16);
    CHECK(doc["reference"]["conv"]["latency_ms"] == doctest::Approx(421.8));
    CHECK(doc["layers"][0].contains("reference"));
  }

  TEST_CASE("simulate and validate") {
    const Run sim = run({"simulate", "--network", kToy, "--format", "csv"});
    CHECK(sim.code == kExitOk);
    CHECK(sim.out.rfind("layer,kind,cycles,", 0) == 0);
    const Run timing = run({"simulate", "--network", kToy, "--format", "csv", "--timing-only"});
    CHECK(timing.out == sim.out);
    const Run val = run({"validate", "--network", kToy});
    CHECK(val.code == kExitOk);
    CHECK(val.out.find("3 of 3 layers passed") != std::string::npos);
  }

  TEST_CASE("schedule") {
    const Run r = run({"schedule", "3", "1", "2"});
    CHECK(r.code == kExitOk);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 4);
    CHECK(run({"schedule", "0", "1", "2"}).code == kExitUsage);
  }

  TEST_CASE("exit codes") {
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"report"}).code == kExitUsage);
    CHECK(run({"report", "--network", "alexnet", "--format", "xml"}).code == kExitUsage);
    const Run missing = run({"report", "--network", "lenet"});
    CHECK(missing.code == kExitUsage);
    CHECK(missing.err.rfind("gfid-sim: ", 0) == 0);
    const auto dir = std::filesystem::temp_directory_path() / "gfid-no-such-dir" / "x" / "out.csv";
    CHECK(run({"report", "--network", "alexnet", "--out", dir.string()}).code == kExitUsage);
  }

  TEST_CASE("output file") {
    const auto path = std::filesystem::temp_directory_path() / "gfid_cli_report.csv";
    const Run r = run({"report", "--network", kToy, "--format", "csv", "--out", path.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.empty());
    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header == "layer,cycles,latency_ms,ma_mb,efficiency_pct");
    std::filesystem::remove(path);
  }
}

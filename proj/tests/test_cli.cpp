#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "t3dp/cli.hpp"
#include "t3dp/io.hpp"

using namespace t3dp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "t3dp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "t3dp_test_cli";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("lift prints the translation") {
  const auto r = run({"lift", "--image-w", "1920", "--image-h", "1080", "--cx", "1060", "--cy",
                      "640", "--box", "200", "--scale", "0.5", "--tx", "0.1", "--ty", "-0.2",
                      "--focal", "1000"});
  REQUIRE(r.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j[0].get<double>() == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(j[1].get<double>() == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(j[2].get<double>() == 20.0);

  const auto bad = run({"lift", "--image-w", "10", "--image-h", "10", "--cx", "5", "--cy", "5",
                        "--box", "0"});
  CHECK(bad.code == cli::kExitData);
  CHECK(bad.err.find("error") != std::string::npos);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"lift", "--image-w", "abc"}).code == cli::kExitUsage);
  CHECK(run({"simulate"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("simulate, track, eval, report") {
  const auto dets = scratch("sim.jsonl"), bin = scratch("sim.bin"), tracks = scratch("tracks.jsonl");
  REQUIRE(run({"simulate", "--people", "3", "--frames", "20", "--seed", "5", "--out", dets}).code ==
          cli::kExitOk);
  REQUIRE(run({"convert", "--in", dets, "--out", bin}).code == cli::kExitOk);
  REQUIRE(run({"track", "--detections", bin, "--out", tracks}).code == cli::kExitOk);
  CHECK(io::read_tracks(tracks).size() == 60);

  const auto ev = run({"eval", "--tracks", tracks, "--gt", dets});
  REQUIRE(ev.code == cli::kExitOk);
  const auto j = nlohmann::json::parse(ev.out);
  CHECK(j["ids"] == 0);
  CHECK(j["mota"] == 1.0);
  CHECK(j["idf1"] == 1.0);

  // Determinism: byte-identical outputs.
  const auto dets2 = scratch("sim2.jsonl");
  run({"simulate", "--people", "3", "--frames", "20", "--seed", "5", "--out", dets2});
  CHECK(slurp(dets) == slurp(dets2));

  const auto m = scratch("m.json");
  REQUIRE(run({"eval", "--tracks", tracks, "--gt", dets, "--out", m}).code == cli::kExitOk);
  const auto rep = run({"report", m});
  REQUIRE(rep.code == cli::kExitOk);
  CHECK(rep.out.rfind("name,ids,mota,idf1,fp,fn,num_gt,num_pred\n", 0) == 0);
  CHECK(rep.out.find(",0,1,1,0,0,60,60") != std::string::npos);
}

TEST_CASE("config file with flag overrides") {
  const auto cfg = scratch("cfg.json"), out = scratch("cfg_out.jsonl");
  std::ofstream(cfg) << R"({"num_people": 2, "num_frames": 5, "seed": 9})";
  REQUIRE(run({"simulate", "--config", cfg, "--frames", "3", "--out", out}).code == cli::kExitOk);
  CHECK(io::read_detections(out).size() == 6);
  std::ofstream(cfg) << R"({"num_peeple": 2})";
  CHECK(run({"simulate", "--config", cfg, "--out", out}).code == cli::kExitUsage);
}

TEST_CASE("data errors") {
  const auto bad = scratch("bad.jsonl");
  std::ofstream(bad) << "{\"frame\": 0}\n";
  CHECK(run({"track", "--detections", bad, "--out", scratch("x.jsonl")}).code == cli::kExitData);
  CHECK(run({"eval", "--tracks", scratch("missing.jsonl"), "--gt", bad}).code == cli::kExitData);

  const auto nolabels = scratch("nolabels.jsonl");
  auto dets = io::read_detections(scratch("sim.jsonl"));
  for (auto& d : dets) d.gt_id.reset();
  io::write_detections(nolabels, dets);
  CHECK(run({"train", "--detections", nolabels, "--out", scratch("w.bin")}).code ==
        cli::kExitData);
  CHECK(run({"track", "--detections", scratch("sim.jsonl"), "--beta", "1,x,0", "--out",
             scratch("x.jsonl")})
            .code == cli::kExitUsage);
}

TEST_CASE("installed binary answers") {
  const char* exe = std::getenv("T3DP_CLI");
  if (!exe) return;
  const std::string cmd = std::string(exe) +
                          " lift --image-w 1000 --image-h 1000 --cx 500 --cy 500 --box 2000 "
                          "--scale 1 --focal 1000 > " + scratch("lift.txt");
  REQUIRE(std::system(cmd.c_str()) == 0);
  const auto j = nlohmann::json::parse(slurp(scratch("lift.txt")));
  CHECK(j == nlohmann::json::array({0.0, 0.0, 1.0}));
}

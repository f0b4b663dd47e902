#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "fake_backend.hpp"
#include "snaptriage/cli.hpp"
#include "snaptriage/evaluation.hpp"
#include "test_support.hpp"

using namespace snaptriage;
using nlohmann::json;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

/// Identical 4x4 images plus a layout-labeled manifest.
json two_image_case(const TempDir& dir, const std::string& id) {
  const RasterImage a(4, 4, Rgb{10, 20, 30});
  return testsupport::write_case(dir.path(), id, a, a, {"LAYOUT_CHANGE"});
}

void write_manifest(const TempDir& dir, json cases) {
  testsupport::write_file(dir / "manifest.json", json{{"name", "cli"}, {"version", 1}, {"cases", cases}}.dump());
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("diff prints six decimals") {
  TempDir dir;
  two_image_case(dir, "same");
  const std::string ref = (dir / "cases/same/reference.png").string();
  const CliResult r = invoke({"diff", "--reference", ref, "--failure", ref, "--out", (dir / "d.png").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == "0.000000\n");
  CHECK(fs::exists(dir / "d.png"));

  write_png(dir / "black.png", RasterImage(2, 2, Rgb{0, 0, 0}));
  write_png(dir / "white.png", RasterImage(2, 2, Rgb{255, 255, 255}));
  CHECK(invoke({"diff", "--reference", (dir / "black.png").string(), "--failure", (dir / "white.png").string()}).out ==
        "1.000000\n");

  write_png(dir / "wide.png", RasterImage(3, 2, Rgb{0, 0, 0}));
  const CliResult mismatch = invoke({"diff", "--reference", (dir / "black.png").string(), "--failure", (dir / "wide.png").string()});
  CHECK(mismatch.code == cli::kExitRuntime);
  CHECK(mismatch.err.find("DimensionMismatch") != std::string::npos);
}

TEST_CASE("analyze with replay and a gate") {
  TempDir dir;
  two_image_case(dir, "btn");
  const CliResult hash = invoke({"prompt", "--hash"});
  REQUIRE(hash.code == 0);
  const std::string h = hash.out.substr(0, hash.out.size() - 1);
  CHECK(h.size() == 16);
  testsupport::write_file(dir / "fx" / "btn" / (h + ".txt"),
                          "Sure:\n```json\n" + testsupport::answer({"LAYOUT_CHANGE"}) + "\n```\n");
  const std::vector<std::string> base = {"analyze", "--backend", "replay", "--fixtures", (dir / "fx").string(),
                                         "--reference", (dir / "cases/btn/reference.png").string(),
                                         "--failure", (dir / "cases/btn/failure.png").string(), "--case-id", "btn"};
  CliResult r = invoke(base);
  CHECK(r.code == cli::kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["status"] == "analyzed");
  CHECK(j["result"]["categories"] == json({"LAYOUT_CHANGE"}));
  CHECK(j["computed_pixel_diff"] == 0.0);

  auto gated = base;
  gated.insert(gated.end(), {"--fail-on", "LAYOUT_CHANGE,COLOR_CHANGE"});
  CHECK(invoke(gated).code == cli::kExitGate);

  auto other = base;
  other.insert(other.end(), {"--fail-on", "COLOR_CHANGE"});
  CHECK(invoke(other).code == cli::kExitOk);

  // The ignore prompt hashes differently, so its fixture is missing.
  auto ignoring = base;
  ignoring.insert(ignoring.end(), {"--ignore", "LAYOUT_CHANGE"});
  r = invoke(ignoring);
  CHECK(r.code == cli::kExitRuntime);
  CHECK(r.err.find("FixtureMissing") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(invoke({}).code == cli::kExitUsage);
  CHECK(invoke({"bogus"}).code == cli::kExitUsage);
  CHECK(invoke({"diff", "--reference", "x.png"}).code == cli::kExitUsage);
  CHECK(invoke({"analyze", "--reference", "a", "--failure", "b", "--backend", "replay"}).code == cli::kExitUsage);
  CHECK(invoke({"evaluate", "--dataset", "m.json", "--mode", "sideways"}).code == cli::kExitUsage);
  CHECK(invoke({"evaluate", "--dataset", "m.json", "--backend", "heuristic", "--fail-on", "not a category"}).code ==
        cli::kExitUsage);
  CHECK(invoke({"--version"}).code == cli::kExitOk);
}

TEST_CASE("validate reports manifest problems") {
  TempDir dir;
  write_manifest(dir, {two_image_case(dir, "x"), two_image_case(dir, "x")});
  CliResult r = invoke({"validate", "--dataset", (dir / "manifest.json").string()});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("DuplicateCaseId") != std::string::npos);
  CHECK(r.err.find("cases[1].id") != std::string::npos);

  write_manifest(dir, {two_image_case(dir, "x")});
  r = invoke({"validate", "--dataset", (dir / "manifest.json").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(r.out == "ok: 1 cases\n");
  r = invoke({"validate", "--dataset", (dir / "manifest.json").string(), "--stats"});
  CHECK(json::parse(r.out)["case_count"] == 1);
}

TEST_CASE("generate, evaluate and record round trip") {
  TempDir dir;
  const std::string data = (dir / "data").string();
  CliResult r = invoke({"generate", "--out", data, "--count", "6", "--seed", "5"});
  REQUIRE(r.code == cli::kExitOk);
  const std::string manifest = (dir / "data" / "manifest.json").string();
  CHECK(invoke({"validate", "--dataset", manifest}).code == cli::kExitOk);

  r = invoke({"evaluate", "--dataset", manifest, "--backend", "heuristic", "--timestamp", "T"});
  REQUIRE(r.code == cli::kExitOk);
  const json heuristic = json::parse(r.out);
  CHECK(heuristic["summary"]["analyzed_count"] == 6);
  CHECK(heuristic["timestamp"] == "T");

  const std::string fx = (dir / "fx").string();
  r = invoke({"record", "--source", "heuristic", "--dataset", manifest, "--fixtures", fx, "--timestamp", "T",
           "--report", (dir / "rec.json").string(), "--report-md", (dir / "rec.md").string(), "--report-junit",
           (dir / "rec.xml").string()});
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.rfind("analyzed 6, failed 0", 0) == 0);
  CHECK(fs::exists(dir / "rec.md"));
  CHECK(fs::exists(dir / "rec.xml"));

  r = invoke({"evaluate", "--dataset", manifest, "--backend", "replay", "--fixtures", fx, "--timestamp", "T"});
  REQUIRE(r.code == cli::kExitOk);
  json replayed = json::parse(r.out);
  CHECK(replayed["backend"] == "replay");
  replayed["backend"] = "heuristic";
  CHECK(replayed == heuristic);

  // Every case predicts something outside an empty allow-list.
  r = invoke({"evaluate", "--dataset", manifest, "--backend", "heuristic", "--fail-on",
           "COLOR_CHANGE,PADDING_CHANGE,CONTENT_CHANGE,LAYOUT_CHANGE,TEXT_CHANGE,ANIMATION_PHASE"});
  CHECK(r.code == cli::kExitGate);
}

TEST_CASE("evaluate exits 3 when no case is analyzed") {
  TempDir dir;
  write_manifest(dir, {two_image_case(dir, "a")});
  const CliResult r = invoke({"evaluate", "--dataset", (dir / "manifest.json").string(), "--backend", "replay",
                           "--fixtures", (dir / "empty").string()});
  CHECK(r.code == cli::kExitRuntime);
  CHECK(r.err.find("FixtureMissing") != std::string::npos);
}

TEST_CASE("ifgt without designations is a usage error") {
  TempDir dir;
  write_manifest(dir, {two_image_case(dir, "a")});
  const std::string m = (dir / "manifest.json").string();
  CliResult r = invoke({"evaluate", "--dataset", m, "--backend", "heuristic", "--mode", "ifgt"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("IfgtDesignationMissing") != std::string::npos);
  r = invoke({"evaluate", "--dataset", m, "--backend", "heuristic", "--mode", "ifgt", "--ifgt-fallback"});
  CHECK(r.code == cli::kExitOk);
}

TEST_CASE("shipped replay set scores as counted by hand") {
  const fs::path data = fs::path(SNAPTRIAGE_TEST_DATA_DIR) / "replay10";
  const CliResult r = invoke({"evaluate", "--backend", "replay", "--dataset", (data / "manifest.json").string(),
                              "--fixtures", (data / "fixtures").string(), "--timestamp", "T"});
  REQUIRE(r.code == cli::kExitOk);
  const json s = json::parse(r.out)["summary"];
  // case_009 has no JSON; case_008 misses; 13 predicted labels, 12 true labels, 9 matches.
  CHECK(s["analyzed_count"] == 9);
  CHECK(s["failed_count"] == 1);
  CHECK(s["hit_count"] == 8);
  CHECK(s["true_positives"] == 9);
  CHECK(s["false_positives"] == 4);
  CHECK(s["false_negatives"] == 3);
  CHECK(s["unknown_count"] == 1);
  CHECK(r.err.find("case 'case_009'") != std::string::npos);
}

TEST_CASE("prompt subcommand") {
  const CliResult core = invoke({"prompt"});
  CHECK(core.code == 0);
  const CliResult ign = invoke({"prompt", "--ignore", "the spinner"});
  CHECK(ign.out == core.out.substr(0, core.out.size() - 1) +
                       "\n\nIGNORE the following aspect of the differences: the spinner\n"
                       "This difference is acceptable; focus on other differences that might exist.\n");
  CHECK(invoke({"prompt", "--ignore", "x", "--hash"}).out != invoke({"prompt", "--hash"}).out);
}

TEST_CASE("the installed executable runs") {
  TempDir dir;
  const std::string cmd = std::string(SNAPTRIAGE_CLI_PATH) + " prompt --hash > " + (dir / "o.txt").string();
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(testsupport::read_file(dir / "o.txt") == invoke({"prompt", "--hash"}).out);
}

}

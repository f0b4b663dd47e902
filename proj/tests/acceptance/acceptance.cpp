// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails. Criterion 7 needs a live endpoint and only runs when
// SNAPTRIAGE_LIVE_SMOKE=1.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "snaptriage/analysis.hpp"
#include "snaptriage/evaluation.hpp"
#include "snaptriage/synth.hpp"
#include "test_support.hpp"

using namespace snaptriage;
namespace ts = testsupport;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kPixelTol = 1e-12;
constexpr double kPctTol = 0.01;
constexpr double kClosedFormTol = 1e-9;
constexpr double kMinRecall = 90.0;
constexpr double kPixelBudgetS = 1.0;
constexpr double kReplayBudgetS = 5.0;
constexpr double kHeuristicBudgetS = 30.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome pixel_diff_criterion() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int w = ts::uniform(rng, 1, 8), h = ts::uniform(rng, 1, 8);
    const RasterImage a = ts::random_image(rng, w, h), b = ts::random_image(rng, w, h);
    worst = std::max(worst, std::abs(pixel_diff_score(a, b) - ts::naive_pixel_diff(a, b)));
  }
  o.require(worst <= kPixelTol, "max deviation " + fmt("%.3g", worst));
  const RasterImage img = ts::random_image(rng, 8, 8);
  o.require(pixel_diff_score(img, img) == 0.0, "identical != 0");
  o.require(pixel_diff_score(RasterImage(8, 8, Rgb{0, 0, 0}), RasterImage(8, 8, Rgb{255, 255, 255})) == 1.0,
            "black vs white != 1");
  const double s = seconds_since(t0);
  o.require(s < kPixelBudgetS, "took " + fmt("%.3f s", s));
  if (o.pass) o.detail = "200 pairs, max deviation " + fmt("%.2g", worst) + ", " + fmt("%.3f s", s);
  return o;
}

void check_metrics(Outcome& o, const MetricsSummary& s, const char* tag, std::size_t hits, long tp, long preds,
                   double hit, double recall, double precision, double f1) {
  const std::string t = std::string(tag) + " ";
  o.require(s.hit_count == hits, t + "hits " + std::to_string(s.hit_count));
  o.require(s.true_positives == tp, t + "tp " + std::to_string(s.true_positives));
  o.require(s.true_positives + s.false_negatives == 19, t + "labels");
  o.require(s.true_positives + s.false_positives == preds, t + "predictions");
  o.require(std::abs(s.hit_rate_pct - hit) <= kPctTol, t + "hit " + fmt("%.4f", s.hit_rate_pct));
  o.require(std::abs(s.recall_pct - recall) <= kPctTol, t + "recall " + fmt("%.4f", s.recall_pct));
  o.require(std::abs(s.precision_pct - precision) <= kPctTol, t + "precision " + fmt("%.4f", s.precision_pct));
  o.require(std::abs(s.f1_pct - f1) <= kPctTol, t + "f1 " + fmt("%.4f", s.f1_pct));
}

Outcome metrics_criterion() {
  Outcome o;
  check_metrics(o, aggregate(ts::matches_for(ts::seventeen_case_fixture())), "first", 13, 15, 26, 76.47, 78.95,
                57.69, 66.67);
  check_metrics(o, aggregate(ts::matches_for(ts::second_seventeen_case_fixture())), "second", 14, 16, 24, 82.35,
                84.21, 66.67, 74.42);
  if (o.pass) o.detail = "76.47/78.95/57.69/66.67 and 82.35/84.21/66.67/74.42";
  return o;
}

std::vector<CaseMatch> ignoring(std::vector<CaseMatch> ms, const char* name) {
  for (auto& m : ms) {
    m.ignored_category = parse_category(name);
    m.complied = !m.predicted.contains(*m.ignored_category);
  }
  return ms;
}

Outcome compliance_criterion() {
  Outcome o;
  std::vector<ts::LabeledPrediction> rows;
  for (int i = 0; i < 16; ++i) {
    rows.push_back({i < 5 ? std::vector<const char*>{"TEXT_CHANGE"} : std::vector<const char*>{"COLOR_CHANGE", "TEXT_CHANGE"},
                    {"COLOR_CHANGE"}});
  }
  const double a = ignore_compliance(ignoring(ts::matches_for(rows), "COLOR_CHANGE"));
  rows.push_back({{}, {"COLOR_CHANGE"}});
  const double b = ignore_compliance(ignoring(ts::matches_for(rows), "COLOR_CHANGE"));
  o.require(a == 31.25, "5/16 gave " + fmt("%.4f", a));
  o.require(std::abs(b - 35.29) <= kPctTol, "6/17 gave " + fmt("%.4f", b));

  // Ignoring a category absent from both sides must leave metrics untouched.
  std::mt19937_64 rng(99);
  const std::vector<const char*> pool = {"COLOR_CHANGE", "PADDING_CHANGE", "CONTENT_CHANGE", "LAYOUT_CHANGE",
                                         "TEXT_CHANGE", "UNKNOWN_GLOW"};
  int broken = 0;
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<ts::LabeledPrediction> r;
    for (int n = ts::uniform(rng, 1, 20); n > 0; --n) {
      ts::LabeledPrediction p;
      for (int k = ts::uniform(rng, 0, 3); k > 0; --k) p.predicted.push_back(pool[rng() % pool.size()]);
      for (int k = ts::uniform(rng, 1, 3); k > 0; --k) p.truth.push_back(pool[rng() % (pool.size() - 1)]);
      r.push_back(p);
    }
    const auto ms = ts::matches_for(r);
    if (!(adjusted_metrics(ignoring(ms, "SEMANTIC_CHANGE")) == aggregate(ms))) ++broken;
  }
  o.require(broken == 0, std::to_string(broken) + " no-op violations");
  if (o.pass) o.detail = "31.25 and " + fmt("%.2f", b) + ", no-op exact over 500 draws";
  return o;
}

Outcome prompt_criterion() {
  Outcome o;
  const std::string core = render_core_prompt(default_prompt_config());
  const std::string reason = "the loading spinner frame";
  const std::string expected = core + "\n\nIGNORE the following aspect of the differences: " + reason +
                               "\nThis difference is acceptable; focus on other differences that might exist.";
  o.require(render_ignore_prompt(core, reason) == expected, "default prompt mismatch");
  o.require(render_ignore_prompt("X", "Y") ==
                "X\n\nIGNORE the following aspect of the differences: Y\n"
                "This difference is acceptable; focus on other differences that might exist.",
            "literal mismatch");
  if (o.pass) o.detail = "byte-exact";
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SNAPTRIAGE_CLI_PATH) + " " + args;
  return std::system(cmd.c_str());
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome replay_criterion() {
  Outcome o;
  const fs::path data = fs::path(SNAPTRIAGE_TEST_DATA_DIR) / "replay10";
  ts::TempDir tmp;
  const auto t0 = std::chrono::steady_clock::now();
  std::string first;
  for (int i = 0; i < 3; ++i) {
    const fs::path out = tmp / ("run" + std::to_string(i) + ".json");
    const int code = run_cli("evaluate --backend replay --dataset " + quoted(data / "manifest.json") + " --fixtures " +
                             quoted(data / "fixtures") + " --timestamp 2024-01-01T00:00:00Z --concurrency " +
                             std::to_string(i + 1) + " --report " + quoted(out) + " > /dev/null 2>&1");
    o.require(code == 0, "run " + std::to_string(i) + " exit " + std::to_string(code));
    const std::string text = ts::read_file(out);
    if (i == 0) {
      first = text;
      const auto j = nlohmann::json::parse(text, nullptr, false);
      o.require(!j.is_discarded() && j["cases"].size() == 10, "report lacks 10 cases");
    } else {
      o.require(text == first, "run " + std::to_string(i) + " differs");
    }
  }
  const double s = seconds_since(t0);
  o.require(s < kReplayBudgetS, "took " + fmt("%.3f s", s));
  if (o.pass) o.detail = "3 identical reports, " + std::to_string(first.size()) + " bytes, " + fmt("%.3f s", s);
  return o;
}

Outcome heuristic_criterion() {
  Outcome o;
  ts::TempDir tmp;
  const auto t0 = std::chrono::steady_clock::now();
  GeneratorOptions g;
  g.out_dir = tmp.path();
  g.count = 60;
  g.seed = 7;
  for (CategoryKind k : {CategoryKind::ColorChange, CategoryKind::PaddingChange, CategoryKind::ContentChange,
                         CategoryKind::LayoutChange, CategoryKind::TextChange, CategoryKind::AnimationPhase}) {
    g.categories.emplace_back(k);
  }
  const DatasetManifest m = generate_synthetic_dataset(g);
  const fs::path report = tmp / "report.json";
  const int code = run_cli("evaluate --backend heuristic --dataset " + quoted(tmp / "manifest.json") +
                           " --timestamp T --concurrency 4 --report " + quoted(report) + " > /dev/null 2>&1");
  o.require(code == 0, "evaluate exit " + std::to_string(code));
  const auto j = nlohmann::json::parse(ts::read_file(report), nullptr, false);
  double recall = -1.0, measured_mean = -1.0;
  if (!j.is_discarded()) {
    recall = j["summary"]["recall_pct"].get<double>();
    measured_mean = j["dataset_stats"]["pixel_diff_mean"].get<double>();
  }
  double expected_mean = 0.0;
  for (const SnapshotCase& c : m.cases) expected_mean += std::stod(c.metadata.at("expected_pixel_diff"));
  expected_mean /= static_cast<double>(m.cases.size());

  o.require(recall >= kMinRecall, "recall " + fmt("%.2f", recall));
  o.require(std::abs(measured_mean - expected_mean) <= kClosedFormTol,
            "pixel mean " + fmt("%.12f", measured_mean) + " vs " + fmt("%.12f", expected_mean));
  const double s = seconds_since(t0);
  o.require(s < kHeuristicBudgetS, "took " + fmt("%.3f s", s));
  if (o.pass) {
    o.detail = "recall " + fmt("%.2f%%", recall) + ", pixel mean " + fmt("%.9f", measured_mean) + ", " +
               fmt("%.3f s", s);
  }
  return o;
}

Outcome live_criterion() {
  Outcome o;
  ts::TempDir tmp;
  GeneratorOptions g;
  g.out_dir = tmp.path();
  g.count = 1;
  g.seed = 3;
  g.categories = {Category(CategoryKind::ColorChange)};
  const DatasetManifest m = generate_synthetic_dataset(g);
  BackendConfig config;
  if (const char* e = std::getenv("SNAPTRIAGE_ENDPOINT")) config.endpoint_url = e;
  if (const char* e = std::getenv("SNAPTRIAGE_MODEL")) config.model_name = e;
  if (const char* e = std::getenv("SNAPTRIAGE_API_KEY"); e && *e) config.bearer_token = e;
  AnalysisOptions opts;
  opts.model_name = config.model_name;
  const CaseAnalysis a = analyze_case(m.cases[0], default_prompt_config(), config, opts);
  o.require(a.analyzed(), a.failure ? a.failure->message : "not analyzed");
  if (a.analyzed()) o.require(!a.result->categories.empty(), "empty categories");
  if (o.pass) o.detail = "categories: " + a.result->categories.canonical_names().front();
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    bool gated = false;
  };
  const std::vector<Criterion> criteria = {
      {"pixel_diff_score matches naive oracle", pixel_diff_criterion},
      {"seventeen-case metrics", metrics_criterion},
      {"ignore compliance and adjusted no-op", compliance_criterion},
      {"ignore prompt construction", prompt_criterion},
      {"replay evaluation is deterministic", replay_criterion},
      {"heuristic recall and closed-form pixel mean", heuristic_criterion},
      {"live smoke", live_criterion, true},
  };
  const char* live = std::getenv("SNAPTRIAGE_LIVE_SMOKE");
  const bool live_enabled = live && std::string(live) == "1";
  const auto t0 = std::chrono::steady_clock::now();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    if (c.gated && !live_enabled) {
      std::cout << "SKIP [" << i + 1 << "] " << c.name << " (set SNAPTRIAGE_LIVE_SMOKE=1)\n";
      continue;
    }
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << c.name << ": " << o.detail << '\n';
  }
  std::cout << (failed ? "FAILED" : "ALL PASSED") << " in " << fmt("%.2f s", seconds_since(t0)) << '\n';
  return failed ? 1 : 0;
}

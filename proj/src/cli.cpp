#include "snaptriage/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "snaptriage/analysis.hpp"
#include "snaptriage/evaluation.hpp"
#include "snaptriage/synth.hpp"

namespace snaptriage::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidCategory:
    case ErrorKind::ManifestParseError:
    case ErrorKind::DuplicateCaseId:
    case ErrorKind::InvalidGroundTruth:
    case ErrorKind::BrokenImagePath:
    case ErrorKind::UnsupportedCategory:
    case ErrorKind::InvalidMutation:
    case ErrorKind::EmptyIgnoreReason:
    case ErrorKind::InvalidConfig:
    case ErrorKind::MissingIgnoreDesignation:
    case ErrorKind::IfgtDesignationMissing:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

std::string env_or(const char* name, std::string_view fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::string(fallback);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::IoError, "failed writing " + path.string());
}

CategorySet parse_list(const std::vector<std::string>& raw) {
  std::vector<std::string> names;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    for (std::string part; std::getline(ss, part, ',');) {
      if (!part.empty()) names.push_back(part);
    }
  }
  return parse_category_set(names);
}

bool gate_hit(const CategorySet& predicted, const CategorySet& fail_on) {
  return std::any_of(predicted.begin(), predicted.end(), [&](const Category& c) { return fail_on.contains(c); });
}

/// Flags shared by every subcommand that talks to a backend.
struct BackendFlags {
  std::string backend = "live";
  std::string fixtures;
  std::string endpoint;
  std::string model;
  double temperature = kDefaultTemperature;
  long timeout_ms = 120'000;
  int max_retries = 2;
  int max_attempts = 3;
  std::string prompt_file;
  CLI::Option* endpoint_opt = nullptr;
  CLI::Option* model_opt = nullptr;

  void add_to(CLI::App& app, bool with_backend_choice = true) {
    if (with_backend_choice) {
      app.add_option("--backend", backend, "live, replay or heuristic")
          ->check(CLI::IsMember({"live", "replay", "heuristic"}))
          ->capture_default_str();
    }
    app.add_option("--fixtures", fixtures, "Fixture directory for the replay backend");
    endpoint_opt = app.add_option("--endpoint", endpoint, "Chat endpoint URL (env SNAPTRIAGE_ENDPOINT)");
    model_opt = app.add_option("--model", model, "Model name (env SNAPTRIAGE_MODEL)");
    app.add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
    app.add_option("--timeout-ms", timeout_ms, "Per-request timeout")->capture_default_str();
    app.add_option("--max-retries", max_retries, "Extra HTTP attempts on transport errors and 5xx")
        ->capture_default_str();
    app.add_option("--max-attempts", max_attempts, "Backend calls allowed per case when output does not parse")
        ->capture_default_str();
    app.add_option("--prompt-file", prompt_file, "Replace the prompt template");
  }

  BackendConfig config() const {
    BackendConfig c;
    c.kind = parse_backend_kind(backend);
    c.endpoint_url = endpoint_opt->count() ? endpoint : env_or("SNAPTRIAGE_ENDPOINT", kDefaultEndpoint);
    c.model_name = resolved_model();
    c.timeout = std::chrono::milliseconds(timeout_ms);
    c.max_retries = max_retries;
    c.fixture_dir = fixtures;
    if (const char* token = std::getenv("SNAPTRIAGE_API_KEY"); token && *token) c.bearer_token = token;
    if (c.kind == BackendKind::Replay && fixtures.empty()) throw UsageError("--fixtures is required for --backend replay");
    return c;
  }

  std::string resolved_model() const { return model_opt->count() ? model : env_or("SNAPTRIAGE_MODEL", kDefaultModel); }

  AnalysisOptions analysis() const {
    if (max_attempts < 1) throw UsageError("--max-attempts must be at least 1");
    return {resolved_model(), temperature, max_attempts};
  }

  PromptConfig prompt() const { return prompt_file.empty() ? default_prompt_config() : prompt_config_from_file(prompt_file); }
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Snapshot test failure triage with vision-language models", "snaptriage"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));
    std::function<int()> action;

    add_analyze(app, action);
    add_evaluate(app, action);
    add_diff(app, action);
    add_generate(app, action);
    add_validate(app, action);
    add_record(app, action);
    add_prompt(app, action);

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? kExitOk : kExitUsage;
    }
    try {
      return action();
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return exit_code_for(e.kind());
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitRuntime;
    }
  }

 private:
  void add_analyze(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("analyze", "Classify one reference/failure pair");
    auto o = std::make_shared<AnalyzeOpts>();
    sub->add_option("--reference", o->reference, "Reference PNG")->required();
    sub->add_option("--failure", o->failure, "Failure PNG")->required();
    sub->add_option("--diff", o->diff, "Pre-rendered diff PNG");
    sub->add_option("--case-id", o->case_id, "Case id (fixture key); defaults to the failure file stem");
    sub->add_option("--ignore", o->ignore, "Ask the model to ignore this aspect");
    sub->add_option("--out", o->out, "Write the result JSON here instead of stdout");
    sub->add_option("--fail-on", o->fail_on, "Exit 2 when any of these categories is predicted");
    o->flags.add_to(*sub);
    sub->callback([&action, o, this] { action = [o, this] { return analyze(*o); }; });
  }

  struct AnalyzeOpts {
    std::string reference, failure, diff, case_id, ignore, out;
    std::vector<std::string> fail_on;
    BackendFlags flags;
  };

  int analyze(const AnalyzeOpts& o) {
    const CategorySet fail_on = parse_list(o.fail_on);
    SnapshotCase c;
    c.id = o.case_id.empty() ? fs::path(o.failure).stem().string() : o.case_id;
    c.reference_path = o.reference;
    c.failure_path = o.failure;
    if (!o.diff.empty()) c.diff_path = fs::path(o.diff);
    std::optional<std::string> ignore;
    if (!o.ignore.empty()) ignore = o.ignore;

    const BackendConfig config = o.flags.config();
    auto backend = make_backend(config);
    const CaseAnalysis a = analyze_case(c, o.flags.prompt(), *backend, o.flags.analysis(), ignore);
    const std::string text = case_analysis_to_json(a).dump(2) + "\n";
    if (o.out.empty()) out_ << text;
    else write_text(o.out, text);
    if (!a.analyzed()) {
      err_ << "error: " << to_string(a.failure->kind) << ": " << a.failure->message << '\n';
      return exit_code_for(a.failure->kind);
    }
    return gate_hit(a.result->categories, fail_on) ? kExitGate : kExitOk;
  }

  struct EvaluateOpts {
    std::string dataset, mode = "default", report, report_md, report_junit, timestamp;
    std::vector<std::string> junit_allow, fail_on;
    int concurrency = 2;
    bool ifgt_fallback = false;
    BackendFlags flags;
  };

  void add_eval_flags(CLI::App& sub, EvaluateOpts& o) {
    sub.add_option("--dataset", o.dataset, "manifest.json")->required();
    sub.add_option("--mode", o.mode, "default, ifa or ifgt")
        ->check(CLI::IsMember({"default", "ifa", "ifgt"}))
        ->capture_default_str();
    sub.add_option("--report", o.report, "JSON report path");
    sub.add_option("--report-md", o.report_md, "Markdown report path");
    sub.add_option("--report-junit", o.report_junit, "JUnit XML report path");
    sub.add_option("--junit-allow", o.junit_allow, "Categories that do not fail a JUnit test case");
    sub.add_option("--timestamp", o.timestamp, "Fixed report timestamp");
    sub.add_option("--concurrency", o.concurrency, "Parallel backend calls")->capture_default_str();
    sub.add_flag("--ifgt-fallback", o.ifgt_fallback, "IFGT: ignore the first ground truth label when none is designated");
    sub.add_option("--fail-on", o.fail_on, "Exit 2 when any case predicts one of these categories");
  }

  void add_evaluate(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("evaluate", "Run a labeled dataset and report metrics");
    auto o = std::make_shared<EvaluateOpts>();
    add_eval_flags(*sub, *o);
    o->flags.add_to(*sub);
    sub->callback([&action, o, this] {
      action = [o, this] {
        auto backend = make_backend(o->flags.config());
        return evaluate(*o, *backend);
      };
    });
  }

  int evaluate(const EvaluateOpts& o, Backend& backend) {
    if (o.concurrency < 1) throw UsageError("--concurrency must be at least 1");
    const CategorySet fail_on = parse_list(o.fail_on);
    JunitOptions junit{parse_list(o.junit_allow)};
    const DatasetManifest manifest = load_manifest(o.dataset);

    EvaluationOptions opts;
    opts.mode = parse_evaluation_mode(o.mode);
    opts.prompt = o.flags.prompt();
    opts.analysis = o.flags.analysis();
    opts.concurrency = o.concurrency;
    opts.ifgt_fallback_to_first_label = o.ifgt_fallback;
    opts.timestamp = o.timestamp;
    opts.backend_name = std::string(to_string(parse_backend_kind(o.flags.backend)));
    const EvaluationReport report = evaluate_dataset(manifest, backend, opts);

    if (!o.report.empty()) write_text(o.report, render_report(report, ReportFormat::Json));
    if (!o.report_md.empty()) write_text(o.report_md, render_report(report, ReportFormat::Markdown));
    if (!o.report_junit.empty()) write_text(o.report_junit, render_report(report, ReportFormat::Junit, junit));
    if (o.report.empty() && o.report_md.empty() && o.report_junit.empty()) {
      out_ << render_report(report, ReportFormat::Json);
    } else {
      print_summary(report);
    }

    for (const CaseOutcome& c : report.cases) {
      if (c.analysis.failure) err_ << "warning: " << to_string(c.analysis.failure->kind) << ": " << c.analysis.failure->message << '\n';
    }
    if (report.summary.analyzed_count == 0) {
      err_ << "error: no case could be analyzed\n";
      return kExitRuntime;
    }
    const bool gated = std::any_of(report.cases.begin(), report.cases.end(), [&](const CaseOutcome& c) {
      return c.match && gate_hit(c.match->predicted, fail_on);
    });
    return gated ? kExitGate : kExitOk;
  }

  void print_summary(const EvaluationReport& r) {
    const MetricsSummary& s = r.summary;
    char line[256];
    std::snprintf(line, sizeof line,
                  "analyzed %zu, failed %zu | hit %.2f%% recall %.2f%% precision %.2f%% f1 %.2f%%\n",
                  s.analyzed_count, s.failed_count, s.hit_rate_pct, s.recall_pct, s.precision_pct, s.f1_pct);
    out_ << line;
    if (r.adjusted) {
      const MetricsSummary& a = *r.adjusted;
      std::snprintf(line, sizeof line,
                    "adjusted | hit %.2f%% recall %.2f%% precision %.2f%% f1 %.2f%% | IC rate %.2f%%\n",
                    a.hit_rate_pct, a.recall_pct, a.precision_pct, a.f1_pct, a.ignore_compliance_pct.value_or(0.0));
      out_ << line;
    }
  }

  void add_diff(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("diff", "Print the pixel difference score and optionally write a diff image");
    struct Opts {
      std::string reference, failure, out, mode = "highlight";
      int threshold = kDefaultHighlightThreshold;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--reference", o->reference)->required();
    sub->add_option("--failure", o->failure)->required();
    sub->add_option("--out", o->out, "Diff PNG to write");
    sub->add_option("--mode", o->mode, "absolute or highlight")
        ->check(CLI::IsMember({"absolute", "highlight"}))
        ->capture_default_str();
    sub->add_option("--threshold", o->threshold, "Highlight threshold per channel")->capture_default_str();
    sub->callback([&action, o, this] {
      action = [o, this] {
        const RasterImage ref = load_image(o->reference), fail = load_image(o->failure);
        const double score = pixel_diff_score(ref, fail);
        if (!o->out.empty()) {
          const DiffMode mode = o->mode == "absolute" ? DiffMode::Absolute : DiffMode::Highlight;
          write_png(o->out, render_diff_image(ref, fail, mode, o->threshold));
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f\n", score);
        out_ << buf;
        return kExitOk;
      };
    });
  }

  void add_generate(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("generate", "Write a synthetic labeled dataset");
    struct Opts {
      std::string out, name = "synthetic";
      int count = 17;
      std::uint64_t seed = 0;
      double multi_label_fraction = 0.0;
      std::vector<std::string> categories;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--out", o->out, "Output directory")->required();
    sub->add_option("--count", o->count, "Number of cases")->capture_default_str();
    sub->add_option("--seed", o->seed, "Generator seed")->capture_default_str();
    sub->add_option("--categories", o->categories, "Categories to draw from (default: all synthesizable)");
    sub->add_option("--multi-label-fraction", o->multi_label_fraction, "Share of cases with two labels")
        ->capture_default_str();
    sub->add_option("--name", o->name, "Dataset name")->capture_default_str();
    sub->callback([&action, o, this] {
      action = [o, this] {
        GeneratorOptions g;
        g.out_dir = o->out;
        g.count = o->count;
        g.seed = o->seed;
        g.multi_label_fraction = o->multi_label_fraction;
        g.name = o->name;
        if (o->categories.empty()) {
          for (CategoryKind k : kKnownKinds) {
            if (is_synthesizable(Category(k))) g.categories.emplace_back(k);
          }
        } else {
          const CategorySet set = parse_list(o->categories);
          g.categories.assign(set.begin(), set.end());
        }
        const DatasetManifest m = generate_synthetic_dataset(g);
        out_ << "wrote " << m.cases.size() << " cases to " << (fs::path(o->out) / "manifest.json").string() << '\n';
        return kExitOk;
      };
    });
  }

  void add_validate(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("validate", "Check a dataset manifest and its images");
    struct Opts {
      std::string dataset;
      bool stats = false;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--dataset", o->dataset, "manifest.json")->required();
    sub->add_flag("--stats", o->stats, "Also print dataset statistics as JSON");
    sub->callback([&action, o, this] {
      action = [o, this] {
        const DatasetManifest m = load_manifest(o->dataset, ManifestOptions{true});
        if (o->stats) {
          out_ << stats_to_json(compute_stats(m)).dump(2) << '\n';
        } else {
          out_ << "ok: " << m.cases.size() << " cases\n";
        }
        return kExitOk;
      };
    });
  }

  void add_record(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("record", "Run a dataset against a source backend and store replay fixtures");
    auto o = std::make_shared<EvaluateOpts>();
    auto source = std::make_shared<std::string>("live");
    add_eval_flags(*sub, *o);
    o->flags.add_to(*sub, false);
    sub->add_option("--source", *source, "live or heuristic")
        ->check(CLI::IsMember({"live", "heuristic"}))
        ->capture_default_str();
    sub->callback([&action, o, source, this] {
      action = [o, source, this] {
        if (o->flags.fixtures.empty()) throw UsageError("--fixtures is required for record");
        o->flags.backend = *source;
        auto inner = make_backend(o->flags.config());
        auto recorder = make_recording_backend(*inner, o->flags.fixtures);
        return evaluate(*o, *recorder);
      };
    });
  }

  void add_prompt(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("prompt", "Print the rendered prompt");
    struct Opts {
      std::string ignore, prompt_file;
      bool hash = false;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--ignore", o->ignore, "Render the ignore-extended prompt for this reason");
    sub->add_option("--prompt-file", o->prompt_file, "Replace the prompt template");
    sub->add_flag("--hash", o->hash, "Print only the fixture hash of the prompt");
    sub->callback([&action, o, this] {
      action = [o, this] {
        const PromptConfig config =
            o->prompt_file.empty() ? default_prompt_config() : prompt_config_from_file(o->prompt_file);
        std::string text = render_core_prompt(config);
        if (!o->ignore.empty()) text = render_ignore_prompt(text, o->ignore);
        if (o->hash) out_ << prompt_hash(text) << '\n';
        else out_ << text << '\n';
        return kExitOk;
      };
    });
  }

  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Runner(out, err).run(args);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace snaptriage::cli

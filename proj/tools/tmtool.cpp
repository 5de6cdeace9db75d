// tmtool: command-line front end for thinging-machine models.
//
// Exit codes: 0 success, 1 findings or mismatches, 2 usage errors.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tmkit/classifier.hpp"
#include "tmkit/corpus.hpp"
#include "tmkit/dsl.hpp"
#include "tmkit/export.hpp"
#include "tmkit/simulator.hpp"
#include "tmkit/validator.hpp"

#ifndef TM_FIXTURE_DIR
#define TM_FIXTURE_DIR "fixtures"
#endif

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses FILE, printing diagnostics; nullopt means the caller should stop.
std::optional<tmkit::ParseResult> load(const std::string& file, int& code) {
  tmkit::ParseResult parsed = tmkit::parse_file(file);
  for (const auto& d : parsed.diagnostics) std::cerr << tmkit::format_diagnostic(d, file) << '\n';
  if (parsed.ok()) return parsed;
  bool io = !parsed.diagnostics.empty() && parsed.diagnostics.front().code == "Io";
  code = io ? kUsage : kFindings;
  return std::nullopt;
}

// Loads and validates; prints error findings to stderr when validation fails.
std::optional<tmkit::ParseResult> load_valid(const std::string& file, int& code) {
  auto parsed = load(file, code);
  if (!parsed) return std::nullopt;
  auto report = tmkit::validate_all(*parsed->model, &parsed->spans);
  if (report.ok) return parsed;
  for (const auto& d : report.findings) std::cerr << tmkit::format_diagnostic(d, file) << '\n';
  code = kFindings;
  return std::nullopt;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw UsageError("expected true/false/1/0, got '" + text + "'");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << content;
}

std::vector<std::string> split_names(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream in(csv);
  for (std::string name; std::getline(in, name, ',');) {
    if (!name.empty()) out.push_back(name);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thinging-machine model toolkit"};
  app.name("tmtool");
  app.require_subcommand(1);

  std::string file;
  bool as_json = false;

  auto* parse_cmd = app.add_subcommand("parse", "Print the canonical form of a model");
  parse_cmd->add_option("file", file, "Model file (.tm)")->required();

  auto* validate_cmd = app.add_subcommand("validate", "Run static and dynamic checks");
  validate_cmd->add_option("file", file, "Model file (.tm)")->required();
  validate_cmd->add_flag("--json", as_json, "Print the report as JSON");

  int max_repeats = 1;
  std::vector<std::string> inputs;
  std::string trace_out;
  std::string scenario;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the token game and print the trace");
  simulate_cmd->add_option("file", file, "Model file (.tm)")->required();
  simulate_cmd->add_option("--max-repeats", max_repeats, "Replays per repeat edge")
      ->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--input", inputs, "Guard input as name=value")->take_all();
  simulate_cmd->add_option("--trace", trace_out, "Write the JSON-lines trace here");
  simulate_cmd->add_option("--scenario", scenario,
                           "Comma-separated inputs; prints the scenario matrix as CSV");

  auto* classify_cmd = app.add_subcommand("classify", "Classify focus groups");
  classify_cmd->add_option("file", file, "Model file (.tm)")->required();
  classify_cmd->add_flag("--json", as_json, "Print the report as JSON");

  std::string format;
  std::string level = "static";
  auto* export_cmd = app.add_subcommand("export", "Export a model as DOT or JSON");
  export_cmd->add_option("file", file, "Model file (.tm)")->required();
  export_cmd->add_option("--format", format, "dot or json")
      ->required()
      ->check(CLI::IsMember({"dot", "json"}));
  export_cmd->add_option("--level", level, "static or dynamic (DOT only)")
      ->check(CLI::IsMember({"static", "dynamic"}));

  std::string dir = TM_FIXTURE_DIR;
  std::string out_dir;
  auto* corpus_cmd = app.add_subcommand("corpus", "Fixture corpus");
  corpus_cmd->require_subcommand(1);
  auto* list_cmd = corpus_cmd->add_subcommand("list", "List fixtures");
  list_cmd->add_option("--dir", dir, "Corpus directory");
  auto* run_cmd = corpus_cmd->add_subcommand("run", "Check every fixture's expectation");
  run_cmd->add_option("--dir", dir, "Corpus directory");
  run_cmd->add_option("--out", out_dir, "Write traces, reports and exports here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "tmtool: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  int code = kOk;
  try {
    if (*parse_cmd) {
      auto parsed = load(file, code);
      if (!parsed) return code;
      std::cout << tmkit::render_model(*parsed->model);
    } else if (*validate_cmd) {
      auto parsed = load(file, code);
      if (!parsed) return code;
      auto report = tmkit::validate_all(*parsed->model, &parsed->spans);
      if (as_json) {
        std::cout << tmkit::report_json(report);
      } else {
        for (const auto& d : report.findings) std::cout << tmkit::format_diagnostic(d, file) << '\n';
        std::cout << (report.ok ? "ok" : "invalid") << '\n';
      }
      return report.ok ? kOk : kFindings;
    } else if (*simulate_cmd) {
      tmkit::SimConfig config;
      config.max_repeats = max_repeats;
      for (const auto& item : inputs) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--input expects name=value");
        config.inputs[item.substr(0, eq)] = parse_bool(item.substr(eq + 1));
      }
      auto parsed = load_valid(file, code);
      if (!parsed) return code;
      const auto& model = *parsed->model;
      auto chronology = tmkit::derive_chronology(model);
      if (!scenario.empty()) {
        auto matrix = tmkit::scenario_matrix(model, chronology, split_names(scenario), config);
        std::cout << tmkit::scenario_csv(matrix);
        return kOk;
      }
      auto trace = tmkit::simulate(model, chronology, config);
      std::string jsonl = tmkit::trace_jsonl(trace);
      if (trace_out.empty()) {
        std::cout << jsonl;
      } else {
        write_file(trace_out, jsonl);
        std::cout << "outcome " << tmkit::to_string(trace.outcome) << ", " << trace.records.size()
                  << " records\n";
      }
      return trace.outcome == tmkit::Outcome::Completed ? kOk : kFindings;
    } else if (*classify_cmd) {
      auto parsed = load_valid(file, code);
      if (!parsed) return code;
      auto report = tmkit::classify_model(*parsed->model);
      std::cout << (as_json ? tmkit::classification_json(report)
                            : tmkit::classification_text(report));
    } else if (*export_cmd) {
      auto parsed = load(file, code);
      if (!parsed) return code;
      if (format == "json") {
        std::cout << tmkit::export_json(*parsed->model);
      } else {
        auto dot_level = level == "dynamic" ? tmkit::DotLevel::Dynamic : tmkit::DotLevel::Static;
        std::cout << tmkit::export_dot(*parsed->model, dot_level);
      }
    } else if (*list_cmd) {
      for (const auto& f : tmkit::load_manifest(dir))
        std::cout << f.id << '\t' << f.file << '\t' << f.caption << '\n';
    } else if (*run_cmd) {
      auto summary = tmkit::run_corpus(dir);
      std::cout << summary.text();
      if (!out_dir.empty()) tmkit::write_artifacts(summary, out_dir);
      if (summary.any_missing()) return kUsage;
      return summary.all_passed() ? kOk : kFindings;
    }
  } catch (const UsageError& e) {
    std::cerr << "tmtool: " << e.what() << '\n';
    return kUsage;
  } catch (const tmkit::ModelError& e) {
    std::cerr << "tmtool: " << tmkit::to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == tmkit::ErrorCode::MalformedJson ? kUsage : kFindings;
  }
  return code;
}

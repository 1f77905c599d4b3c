#pragma once

// The `inspect` command line: run, report, reconcile, parse, classify, replay.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roboinspect/campaign.hpp"
#include "roboinspect/stats_report.hpp"

namespace roboinspect {

inline constexpr std::string_view kVersion = "0.1.0";

namespace detail {

inline std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::InvalidArgument, "cannot write " + path);
  f << text;
}

inline json parse_result_json(const ParseResult& r, const PolicyParser& parser) {
  return std::visit(
      [&](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Program>) {
          json steps = json::array();
          for (const auto& s : v.steps) steps.push_back(parser.print(s));
          return {{"kind", "Program"}, {"context", v.context}, {"steps", steps}};
        } else if constexpr (std::is_same_v<T, NonsenseRejection>) {
          return {{"kind", "NonsenseRejection"},
                  {"line", v.line},
                  {"evidence", {{"kind", v.evidence.kind}, {"location", v.evidence.location}, {"message", v.evidence.message}}}};
        } else {
          return {{"kind", "Refusal"}, {"text", v.text}};
        }
      },
      r);
}

}  // namespace detail

/// Entry point behind the `inspect` binary. Exit codes: 0 ok, 1 domain
/// error, 2 usage error. Data goes to `out`, diagnostics to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reliability harness for LLM-generated robot policy code.", "inspect"};
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every subcommand and exit");
  app.require_subcommand(0, 1);

  bool show_version = false, show_schema = false;
  std::string data_dir;
  app.add_flag("--version", show_version, "Print version information as JSON and exit");
  app.add_flag("--schema", show_schema, "Print the JSON schema of one record line and exit");
  app.add_option("--data-dir", data_dir, "Fixture directory (default: built-in data directory)");

  // run
  auto* run = app.add_subcommand("run", "Run a campaign and write JSON-lines trial records");
  std::string run_config, run_out = "-";
  bool no_feedback = false;
  std::optional<std::uint64_t> run_seed;
  std::optional<int> run_concurrency, run_trials;
  run->add_option("--config", run_config, "Campaign configuration file (JSON)")->required();
  run->add_flag("--no-feedback", no_feedback, "Disable the feedback refinement loop");
  run->add_option("--seed", run_seed, "Override campaign.base_seed");
  run->add_option("--concurrency", run_concurrency, "Override campaign.concurrency")->check(CLI::PositiveNumber);
  run->add_option("--trials", run_trials, "Override campaign.trials_per_cell")->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "Record file (default: standard output)");

  // report
  auto* report = app.add_subcommand("report", "Aggregate trial records into rate and behavior tables");
  std::string rep_records, rep_baseline, rep_format = "md", rep_out = "-";
  report->add_option("--records", rep_records, "Record file to aggregate")->required();
  report->add_option("--format", rep_format, "Output format")->check(CLI::IsMember({"md", "csv", "json"}));
  report->add_option("--baseline", rep_baseline, "No-feedback record file; adds a paired with/without summary");
  report->add_option("--out", rep_out, "Output file (default: standard output)");

  // reconcile
  auto* reconcile = app.add_subcommand("reconcile", "Check published behavior counts against published success rates");
  std::string rec_table2, rec_table3, rec_format = "md";
  double rec_tolerance = 0.01;
  reconcile->add_option("--table2", rec_table2, "Success-rate fixture (default: data/table2.json)");
  reconcile->add_option("--table3", rec_table3, "Behavior-count fixture (default: data/table3.json)");
  reconcile->add_option("--tolerance", rec_tolerance, "Largest |delta| that is not flagged")->check(CLI::NonNegativeNumber);
  reconcile->add_option("--format", rec_format, "Output format")->check(CLI::IsMember({"md", "json"}));

  // parse
  auto* parse = app.add_subcommand("parse", "Parse a completion and print the three-way result");
  std::string parse_file;
  parse->add_option("file", parse_file, "Completion text file, or - for standard input")->required();

  // classify
  auto* classify_cmd = app.add_subcommand(
      "classify", "Classify a raw completion (with --task/--level) or re-run the dispatcher over stored records");
  std::string cls_file, cls_task, cls_level, cls_config;
  std::uint64_t cls_seed = 0;
  std::optional<double> cls_margin;
  std::optional<int> cls_line;
  classify_cmd->add_option("file", cls_file, "Completion text or record file, or - for standard input")->required();
  classify_cmd->add_option("--task", cls_task, "Task id; treats the file as one raw completion");
  classify_cmd->add_option("--level", cls_level, "Instruction level for a raw completion")->check(CLI::IsMember({"A", "P", "C"}));
  classify_cmd->add_option("--seed", cls_seed, "Scene seed for a raw completion");
  classify_cmd->add_option("--line", cls_line, "Only this 1-based record line")->check(CLI::PositiveNumber);
  classify_cmd->add_option("--config", cls_config, "Campaign configuration supplying the simworld section");
  classify_cmd->add_option("--spawn-margin", cls_margin, "Override simworld.spawn_margin")->check(CLI::NonNegativeNumber);

  // replay
  auto* replay = app.add_subcommand("replay", "Re-execute recorded completions against their seeds and print the traces");
  std::string rp_records, rp_config;
  std::optional<int> rp_line;
  std::optional<double> rp_margin;
  bool rp_quiet = false;
  replay->add_option("records", rp_records, "Record file")->required();
  replay->add_option("--config", rp_config, "Campaign configuration the records were produced with");
  replay->add_option("--line", rp_line, "Replay only this 1-based line")->check(CLI::PositiveNumber);
  replay->add_option("--spawn-margin", rp_margin, "Override simworld.spawn_margin")->check(CLI::NonNegativeNumber);
  replay->add_flag("--no-trace", rp_quiet, "Print only the outcome comparison");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  auto fixtures = [&]() { return FixturePaths::in(data_dir.empty() ? default_data_dir() : std::filesystem::path(data_dir)); };

  try {
    if (show_version) {
      out << json{{"name", "roboinspect"}, {"version", kVersion}, {"record_schema", kRecordSchema}}.dump() << "\n";
      return 0;
    }
    if (show_schema) {
      out << record_json_schema().dump(2) << "\n";
      return 0;
    }

    if (*run) {
      auto cfg = CampaignConfig::load(run_config);
      if (!data_dir.empty()) cfg.fixtures = fixtures();
      if (no_feedback) cfg.feedback_enabled = false;
      if (run_seed) cfg.base_seed = *run_seed;
      if (run_concurrency) cfg.concurrency = *run_concurrency;
      if (run_trials) cfg.trials_per_cell = *run_trials;
      auto h = Harness::load(cfg.fixtures, cfg.sim);
      std::vector<TrialRecord> records;
      if (run_out == "-") {
        records = run_campaign(cfg, h, [&](const TrialRecord& r) { out << r.to_json().dump() << '\n'; });
      } else {
        JsonlSink sink(run_out);
        records = run_campaign(cfg, h, std::ref(sink));
      }
      int aborted = 0, success = 0;
      for (const auto& r : records) {
        aborted += r.aborted;
        success += !r.aborted && is_success(*r.outcome);
      }
      err << records.size() << " trials, " << success << " successes, " << aborted << " aborted\n";
      return 0;
    }

    if (*report) {
      auto records = read_records(rep_records);
      auto stats = aggregate(records);
      std::optional<std::vector<PairedTaskSummary>> paired;
      if (!rep_baseline.empty()) paired = paired_feedback(read_records(rep_baseline), records);
      auto text = emit_report(stats, *report_format_from(rep_format), paired ? &*paired : nullptr);
      detail::write_output(rep_out, text, out);
      return 0;
    }

    if (*reconcile) {
      auto f = fixtures();
      auto t2 = load_rate_fixture(load_json_file(rec_table2.empty() ? f.table2 : std::filesystem::path(rec_table2)));
      auto t3 = load_count_fixture(load_json_file(rec_table3.empty() ? f.table3 : std::filesystem::path(rec_table3)));
      auto r = reconcile_fixture(t3, t2, rec_tolerance);
      if (rec_format == "json") {
        json doc;
        doc["tolerance"] = r.tolerance;
        doc["within_tolerance"] = r.within_tolerance();
        doc["cells"] = r.rows.size();
        doc["fraction_within"] = r.fraction_within();
        doc["rows"] = json::array();
        for (const auto& row : r.rows) {
          doc["rows"].push_back({{"task", row.cell.task},
                                 {"level", to_string(row.cell.level)},
                                 {"model", row.cell.model},
                                 {"failures", row.failures},
                                 {"derived_rate", row.derived_rate},
                                 {"table_rate", row.table_rate},
                                 {"delta", row.delta},
                                 {"flagged", row.flagged},
                                 {"note", row.note}});
        }
        out << doc.dump(2) << "\n";
      } else {
        out << emit_reconciliation(r);
      }
      return 0;
    }

    if (*parse) {
      PolicyParser parser(Grammar::load(fixtures().grammar));
      out << detail::parse_result_json(parser.parse(detail::read_input(parse_file)), parser).dump(2) << "\n";
      return 0;
    }

    // Harness for classify/replay: config's simworld and fixtures, then flag overrides.
    auto harness_for = [&](const std::string& config, const std::optional<double>& margin) {
      CampaignConfig cfg = config.empty() ? CampaignConfig{} : CampaignConfig::load(config);
      if (!data_dir.empty() || config.empty()) cfg.fixtures = fixtures();
      if (margin) cfg.sim.spawn_margin = *margin;
      cfg.sim.validate();
      return Harness::load(cfg.fixtures, cfg.sim);
    };
    auto selected = [](const std::vector<TrialRecord>& records, const std::optional<int>& line) {
      if (line && static_cast<std::size_t>(*line) > records.size())
        throw Error(Errc::InvalidArgument, "record file has only " + std::to_string(records.size()) + " lines");
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < records.size(); ++i)
        if (!line || static_cast<std::size_t>(*line) == i + 1) idx.push_back(i);
      return idx;
    };

    if (*classify_cmd) {
      auto h = harness_for(cls_config, cls_margin);
      if (!cls_task.empty()) {
        if (cls_level.empty()) throw CLI::RequiredError("--level");
        const auto& task = h.tasks().find(cls_task);
        auto world = h.simulator().spawn_scene(task, cls_seed);
        auto ev = h.evaluate(task, *level_from(cls_level), world, detail::read_input(cls_file));
        out << json{{"task", task.name},
                    {"level", cls_level},
                    {"seed", cls_seed},
                    {"parse", detail::parse_result_json(ev.parsed, h.parser())},
                    {"target_out_of_workspace", ev.truth.target_out_of_workspace},
                    {"outcome", outcome_to_json(ev.outcome)}}
                   .dump(2)
            << "\n";
        return 0;
      }
      auto records = read_records(cls_file);
      for (auto i : selected(records, cls_line)) {
        const auto& r = records[i];
        json line = {{"line", i + 1}, {"cell", {{"task", r.cell.task}, {"level", to_string(r.cell.level)}, {"model", r.cell.model}}},
                     {"trial_index", r.trial_index}};
        if (r.aborted) {
          line["outcome"] = nullptr;
          line["aborted"] = true;
        } else {
          const auto& task = h.tasks().find(r.cell.task);
          auto ev = h.evaluate(task, r.cell.level, h.simulator().spawn_scene(task, r.seed), r.completion.text);
          line["outcome"] = outcome_to_json(ev.outcome);
          line["matches_record"] = ev.outcome == *r.outcome;
        }
        out << line.dump() << "\n";
      }
      return 0;
    }

    if (*replay) {
      auto h = harness_for(rp_config, rp_margin);
      auto records = read_records(rp_records);
      int mismatches = 0, replayed = 0;
      for (auto i : selected(records, rp_line)) {
        const auto& r = records[i];
        if (r.aborted) continue;
        const auto& task = h.tasks().find(r.cell.task);
        for (std::size_t a = 0; a < r.history.size(); ++a) {
          auto world = h.simulator().spawn_scene(task, r.seed);
          auto ev = h.evaluate(task, r.cell.level, world, r.history[a].completion.text);
          bool same = ev.outcome == r.history[a].outcome;
          ++replayed;
          mismatches += !same;
          out << (same ? "match    " : "MISMATCH ") << "line " << i + 1 << " attempt " << a << " " << r.cell.task << "/"
              << to_string(r.cell.level) << "/" << r.cell.model << " #" << r.trial_index << ": " << outcome_label(ev.outcome);
          if (!same) out << " (recorded " << outcome_label(r.history[a].outcome) << ")";
          out << "\n";
          if (rp_quiet || !ev.sim) continue;
          for (const auto& p : ev.sim->trace) {
            out << "  step " << p.step + 1 << " ee " << format_tuple(p.ee);
            if (p.held) out << " holding " << *p.held << " at " << format_tuple(p.held_position);
            out << "\n";
          }
        }
      }
      if (mismatches)
        throw Error(Errc::InvalidArgument, std::to_string(mismatches) + " of " + std::to_string(replayed) + " attempts differ");
      return 0;
    }

    out << app.help("", CLI::AppFormatMode::All);
    return 2;
  } catch (const CLI::ParseError& e) {
    err << "inspect: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "inspect: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "inspect: malformed JSON: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace roboinspect

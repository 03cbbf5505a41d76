#include "gazemap/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gazemap/error.hpp"
#include "gazemap/pipeline.hpp"
#include "gazemap/scenario_sim.hpp"

namespace gazemap::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json read_json(const std::string& path, const char* what) {
  json doc = json::parse(read_file(path, what), nullptr, false);
  if (doc.is_discarded()) throw FormatError(path + ": not a valid document");
  return doc;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path + "'");
  f << text;
  if (!f) throw Error("failed writing '" + path + "'");
}

struct MapArgs {
  std::string gaze, masks, meta, config, out;
  std::optional<std::int64_t> t0_us;
  bool quiet = false;
};

int cmd_map(const MapArgs& a, std::ostream& out) {
  const PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  check_config(cfg);
  const ParseResult gaze = load_gaze_stream(a.gaze);
  const MaskSet masks = load_maskset(a.masks);
  FrameTimeline tl = load_video_meta(a.meta);
  if (a.t0_us) tl.t0_us = *a.t0_us;

  const TrialRecord trial = map_trial(gaze.stream, masks, tl, cfg);
  std::vector<std::string> labels;
  for (const auto& [label, desc] : masks.class_table) labels.push_back(label);
  const TrialMetrics metrics = compute_metrics(trial, labels);
  write_file(a.out, serialize_trial_report(trial, metrics, config_to_json(cfg)));

  if (!a.quiet) {
    for (const auto& issue : gaze.issues) out << a.gaze << ":" << issue.line << ": skipped: " << issue.message << "\n";
    out << "frames " << tl.frame_count << ", fixations " << metrics.fixation_count << ", on target "
        << metrics.on_target_count << ", TFR " << format_number(metrics.tfr_reported) << "\n";
  }
  return 0;
}

int cmd_metrics(const std::vector<std::string>& reports, const std::string& format, const std::string& out_path,
                std::ostream& out) {
  std::vector<NamedMetrics> trials;
  for (const auto& path : reports) {
    TrialReport r;
    try {
      r = parse_trial_report(read_json(path, "report"));
    } catch (const FormatError& e) {
      throw FormatError(path + ": " + e.what());
    }
    trials.push_back({std::filesystem::path(path).stem().string(), r.metrics});
  }
  std::string text;
  if (format == "json") {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& t : trials) {
      nlohmann::ordered_json j;
      j["trial"] = t.name;
      const auto metrics = metrics_to_json(t.metrics);
      for (const auto& [k, v] : metrics.items()) j[k] = v;
      doc.push_back(std::move(j));
    }
    text = doc.dump(1) + "\n";
  } else {
    text = metrics_table(trials);
  }
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
  }
  return 0;
}

// A document with a "frames" array is a trial report (or scenario ground
// truth); anything else is a list of labeled rows.
bool is_report(const json& doc) { return doc.is_object() && doc.contains("frames"); }

std::vector<LabeledPoint> load_points(const std::string& path, const char* what) {
  const json doc = read_json(path, what);
  try {
    return is_report(doc) ? report_points(parse_trial_report(doc)) : parse_labeled_points(doc);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

int cmd_validate(const std::string& report_path, const std::string& truth_path, const std::string& out_path,
                 bool quiet, std::ostream& out) {
  const json sys_doc = read_json(report_path, "report");
  const std::vector<LabeledPoint> gt = load_points(truth_path, "ground truth");
  std::vector<LabeledPoint> sys;
  try {
    sys = is_report(sys_doc) ? report_points(parse_trial_report(sys_doc)) : parse_labeled_points(sys_doc);
  } catch (const FormatError& e) {
    throw FormatError(report_path + ": " + e.what());
  }
  // A full per-frame report is sampled at the ground-truth frames.
  if (is_report(sys_doc)) {
    std::map<std::int64_t, const LabeledPoint*> by_frame;
    for (const auto& p : sys) by_frame[p.frame] = &p;
    std::vector<LabeledPoint> sampled;
    for (const auto& g : gt) {
      const auto it = by_frame.find(g.frame);
      if (it == by_frame.end()) {
        throw FormatError(report_path + ": no frame " + std::to_string(g.frame) + " for the ground truth");
      }
      sampled.push_back(*it->second);
    }
    sys = std::move(sampled);
  }
  const ValidationReport report = validate(sys, gt);
  if (!out_path.empty()) write_file(out_path, validation_to_json(report).dump(1) + "\n");
  if (!quiet) out << validation_table(report);
  out << "accuracy " << format_number(report.accuracy) << " (" << report.matches << "/" << report.rows.size()
      << ")\n";
  return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& outdir, bool quiet, std::ostream& out) {
  const sim::ScenarioSpec spec = sim::load_scenario(spec_path);
  const sim::ScenarioOutput result = sim::generate(spec);
  sim::write_scenario(result, outdir);
  if (!quiet) {
    out << "wrote " << result.gaze_records << " gaze records, " << spec.timeline.frame_count << " frames to "
        << outdir << "\n";
  }
  return 0;
}

int cmd_inspect(const std::string& gaze_path, const std::string& masks_path, const std::string& meta_path,
                std::ostream& out) {
  int status = 0;
  if (!gaze_path.empty()) {
    const ParseResult r = load_gaze_stream(gaze_path);
    const StreamStats st = stream_stats(r.stream);
    out << "gaze " << gaze_path << "\n";
    out << "  record lines " << r.record_lines << ", skipped " << r.issues.size() << "\n";
    for (std::size_t k = 0; k < kSampleKindCount; ++k) {
      out << "  " << to_string(static_cast<SampleKind>(k)) << " " << st.sample_count[k] << "\n";
    }
    out << "  invalid " << st.invalid_count << ", gaps " << st.gap_count << ", rate "
        << format_number(std::round(st.measured_rate_hz * 100.0) / 100.0) << " Hz, duration "
        << format_number(static_cast<double>(r.stream.duration_us()) / 1e6) << " s\n";
    for (const auto& issue : r.issues) out << "  line " << issue.line << ": " << issue.message << "\n";
  }
  if (!masks_path.empty()) {
    const json doc = read_json(masks_path, "mask file");
    MaskSet set;
    try {
      set = parse_maskset(doc);
    } catch (const FormatError& e) {
      throw FormatError(masks_path + ": " + e.what());
    }
    const MaskValidationReport v = validate_maskset(set);
    out << "masks " << masks_path << "\n";
    out << "  resolution " << set.resolution.width << "x" << set.resolution.height << ", classes "
        << set.class_table.size() << ", frames " << v.frame_count << ", instances " << v.instance_count << "\n";
    for (const auto& viol : v.violations) out << "  invalid: " << viol.describe() << "\n";
    out << "  " << (v.ok() ? "valid" : std::to_string(v.violations.size()) + " violation(s)") << "\n";
    if (!v.ok()) status = 2;
  }
  if (!meta_path.empty()) {
    const FrameTimeline tl = load_video_meta(meta_path);
    out << "meta " << meta_path << "\n";
    out << "  fps " << format_number(tl.fps) << ", frames " << tl.frame_count << ", t0_us " << tl.t0_us
        << ", resolution " << tl.resolution.width << "x" << tl.resolution.height << "\n";
  }
  return status;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Map gaze fixations onto instance masks of egocentric video"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for every subcommand");

  MapArgs map_args;
  auto* map = app.add_subcommand("map", "Map a gaze log onto a mask file and write a trial report");
  map->add_option("--gaze", map_args.gaze, "Gaze log (one record per line)")->required();
  map->add_option("--masks", map_args.masks, "Mask file")->required();
  map->add_option("--meta", map_args.meta, "Video metadata")->required();
  map->add_option("--config", map_args.config, "Run configuration (defaults if omitted)");
  map->add_option("--out", map_args.out, "Trial report to write")->required();
  map->add_option("--t0-us", map_args.t0_us, "Override the gaze timestamp of frame 0");
  map->add_flag("--quiet", map_args.quiet, "Print nothing on success");

  std::vector<std::string> reports;
  std::string format = "csv";
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Tabulate metrics of one or more trial reports");
  metrics->add_option("reports", reports, "Trial reports")->required();
  metrics->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  metrics->add_option("--out", metrics_out, "Write to a file instead of stdout");

  std::string report_path, truth_path, validate_out;
  bool validate_quiet = false;
  auto* val = app.add_subcommand("validate", "Compare system labels with ground truth");
  val->add_option("--report", report_path, "Trial report or labeled rows")->required();
  val->add_option("--truth", truth_path, "Ground truth rows or report")->required();
  val->add_option("--out", validate_out, "Validation report to write");
  val->add_flag("--quiet", validate_quiet, "Print only the accuracy line");

  std::string spec_path, outdir;
  bool sim_quiet = false;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic trial with ground truth");
  simulate->add_option("--spec", spec_path, "Scenario spec")->required();
  simulate->add_option("--outdir", outdir, "Output directory")->required();
  simulate->add_flag("--quiet", sim_quiet, "Print nothing on success");

  std::string in_gaze, in_masks, in_meta;
  auto* inspect = app.add_subcommand("inspect", "Print gaze stream and mask file statistics; check masks");
  inspect->add_option("--gaze", in_gaze, "Gaze log");
  inspect->add_option("--masks", in_masks, "Mask file");
  inspect->add_option("--meta", in_meta, "Video metadata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (*map) return cmd_map(map_args, out);
    if (*metrics) return cmd_metrics(reports, format, metrics_out, out);
    if (*val) return cmd_validate(report_path, truth_path, validate_out, validate_quiet, out);
    if (*simulate) return cmd_simulate(spec_path, outdir, sim_quiet, out);
    if (*inspect) {
      if (in_gaze.empty() && in_masks.empty() && in_meta.empty()) {
        err << "inspect: give at least one of --gaze, --masks, --meta\n";
        return 1;
      }
      return cmd_inspect(in_gaze, in_masks, in_meta, out);
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 3;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const ContractError& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace gazemap::cli

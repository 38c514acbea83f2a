#include "commands.hpp"

#include "config_file.hpp"
#include "strand_files.hpp"

#include "hairstrand/error.hpp"
#include "hairstrand/merge.hpp"
#include "hairstrand/metrics.hpp"
#include "hairstrand/orientation.hpp"
#include "hairstrand/refine.hpp"
#include "hairstrand/synth.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

namespace hairstrand::cli {

namespace {

std::filesystem::path sidecar(const std::filesystem::path& path, const char* suffix) {
  auto p = path;
  p += suffix;
  return p;
}

std::vector<std::pair<StrandId, StrandId>> read_adjacency(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrorKind::Io, path.string(), 0, FormatError::Unit::Line, "cannot open");
  std::vector<std::pair<StrandId, StrandId>> out;
  std::string line;
  std::uint64_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream ss(line);
    StrandId a = 0, b = 0;
    std::string rest;
    if (!(ss >> a >> b) || (ss >> rest)) {
      throw FormatError(FormatErrorKind::Parse, path.string(), number, FormatError::Unit::Line,
                        "expected 'frag_a frag_b'");
    }
    out.emplace_back(a, b);
  }
  return out;
}

MatchThresholds parse_threshold_pair(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) throw std::invalid_argument(text);
    MatchThresholds t{std::stod(text.substr(0, slash)), deg_to_rad(std::stod(text.substr(slash + 1)))};
    t.validate();
    return t;
  } catch (const std::logic_error&) {
    throw InvalidArgument(fmt::format("threshold '{}' must read 'mm/deg', e.g. 2/20", text));
  }
}

struct SynthOptions {
  std::string style = "curly";
  HairstyleSpec spec;
  std::string out;
  std::string fragments;
  FragmentOptions fragment;
  std::string cloud;
  double cloud_spacing = 1.0;
  double cloud_noise = 0.0;
};

void run_synth(const SynthOptions& o, const GlobalOptions& g) {
  HairstyleSpec spec = o.spec;
  const auto style = parse_hair_style(o.style);
  if (!style) throw InvalidArgument(fmt::format("unknown style '{}'", o.style));
  spec.style = *style;
  spec.seed = g.seed;
  spec.validate();
  FragmentOptions fo = o.fragment;
  fo.seed = g.seed;

  const auto set = generate(spec);
  std::optional<FragmentGroundTruth> gt;
  if (!o.fragments.empty()) gt = fragment(set, fo);
  std::optional<OrientedPointCloud> cloud;
  if (!o.cloud.empty()) cloud = sample_oriented_cloud(set, o.cloud_spacing, o.cloud_noise, g.seed);

  save_strands(o.out, set);
  fmt::print("strands {} joints {}\n", set.size(), set.total_joints());
  if (gt) {
    save_strands(o.fragments, gt->fragments);
    std::string adjacency = "# frag_a frag_b\n";
    for (const auto& [a, b] : gt->adjacency) adjacency += fmt::format("{} {}\n", a, b);
    write_text_atomic(sidecar(o.fragments, ".adjacency"), adjacency);
    fmt::print("fragments {} adjacencies {}\n", gt->fragments.size(), gt->adjacency.size());
  }
  if (cloud) {
    write_oriented_cloud(o.cloud, *cloud);
    fmt::print("cloud_samples {}\n", cloud->size());
  }
}

struct MergeOptions {
  std::string in;
  std::string out;
  double distance = 2.0;
  double angle_deg = 20.0;
  int max_passes = 100;
  std::string adjacency;
  std::optional<double> unit_scale;
};

void run_merge(const MergeOptions& o) {
  const MergeThresholds t{o.distance, deg_to_rad(o.angle_deg)};
  t.validate();
  if (o.max_passes < 1) throw InvalidArgument("--max-passes must be at least 1");
  const auto loaded = load_strands(o.in, o.unit_scale);
  std::optional<std::vector<std::pair<StrandId, StrandId>>> adjacency;
  if (!o.adjacency.empty()) adjacency = read_adjacency(o.adjacency);

  const auto result = merge_until_stable(loaded.strands, t, o.max_passes);

  std::string log = "# pass surviving absorbed x y z\n";
  for (const auto& e : result.log) {
    log += fmt::format("{} {} {} {:.9g} {:.9g} {:.9g}\n", e.pass, e.surviving_id, e.absorbed_id, e.new_joint.x(),
                       e.new_joint.y(), e.new_joint.z());
  }
  save_strands(o.out, result.strands);
  write_text_atomic(sidecar(o.out, ".mergelog"), log);

  fmt::print("strands_in {} strands_out {} joins {} passes {}\n", loaded.strands.size(), result.strands.size(),
             result.log.size(), result.passes);
  fmt::print("average_length_in {:.6f} average_length_out {:.6f}\n", average_strand_length(loaded.strands),
             average_strand_length(result.strands));
  if (adjacency) {
    const double r = adjacency_recovery(result.strands, loaded.strands, *adjacency);
    fmt::print("adjacency_recovery {:.6f} ({} ground-truth pairs)\n", r, adjacency->size());
  }
}

struct RefineOptions {
  std::string in;
  std::string target;
  std::string out;
  RefineConfig cfg;
  double theta_s_deg = 20.0;
  double start_distance = 2.0;
  double start_angle_deg = 20.0;
  double end_distance = 4.0;
  double end_angle_deg = 40.0;
  int log_every = 100;
  std::optional<double> unit_scale;
};

void run_refine(const RefineOptions& o) {
  RefineConfig cfg = o.cfg;
  cfg.theta_s = deg_to_rad(o.theta_s_deg);
  cfg.schedule_start = {o.start_distance, deg_to_rad(o.start_angle_deg)};
  cfg.schedule_end = {o.end_distance, deg_to_rad(o.end_angle_deg)};
  cfg.validate();
  if (o.log_every < 1) throw InvalidArgument("--log-every must be at least 1");
  const auto loaded = load_strands(o.in, o.unit_scale);
  const auto target = read_oriented_cloud(o.target);
  if (target.empty() && cfg.iterations > 0) throw EmptyInput("target point cloud is empty");

  fmt::print("# iter total data smooth\n");
  auto print = [](const RefineLogLine& l) {
    fmt::print("{} {:.9g} {:.9g} {:.9g}\n", l.iteration, l.total, l.data, l.smooth);
  };
  const auto result = run_stage3(loaded.strands, target, cfg, [&](const RefineLogLine& l) {
    if (l.iteration % o.log_every == 0) print(l);
  });
  if (cfg.iterations > 0 && !result.strands.empty()) {
    RefineLogLine last;
    last.iteration = cfg.iterations;
    last.data = data_loss(result.strands, target, cfg.sample_spacing, cfg.direction_weight).value;
    last.smooth = smoothness_loss(result.strands, cfg.theta_s);
    last.total = last.data + cfg.lambda_smooth * last.smooth;
    print(last);
  }
  save_strands(o.out, result.strands);

  std::string lengths;
  for (const double l : result.merge_average_lengths) lengths += fmt::format(" {:.3f}", l);
  fmt::print(stderr, "average strand length after each merge:{}\n", lengths.empty() ? " (none)" : lengths);
  fmt::print(stderr, "strands in {} out {}\n", loaded.strands.size(), result.strands.size());
}

struct EvaluateOptions {
  std::string pred;
  std::string gt;
  std::vector<std::string> thresholds{"2/20", "4/40"};
  double spacing = 1.0;
  bool no_sc = false;
  std::string report;
  std::optional<double> unit_scale;
};

void run_evaluate(const EvaluateOptions& o) {
  if (!(o.spacing > 0.0)) throw InvalidArgument("--spacing must be positive");
  std::vector<MatchThresholds> thresholds;
  for (const auto& t : o.thresholds) thresholds.push_back(parse_threshold_pair(t));
  const auto pred = load_strands(o.pred, o.unit_scale).strands;
  const auto gt = load_strands(o.gt, o.unit_scale).strands;
  if (!o.no_sc && !has_connectivity(pred)) {
    fmt::print(stderr, "warning: prediction has no multi-segment strands; SC is not meaningful (use --no-sc)\n");
  }
  const auto reports = evaluate(pred, gt, thresholds, o.spacing, !o.no_sc);
  if (!o.report.empty()) {
    const std::filesystem::path path = o.report;
    write_text_atomic(path, path.extension() == ".json" ? to_json(reports).dump(2) + "\n" : to_key_value(reports));
  }
  fmt::print("{}", to_table(reports));
}

struct OrientOptions {
  std::string image;
  std::string out;
  GaborParams params;
  double confidence_threshold = 0.5;
};

void run_orient(const OrientOptions& o) {
  gabor_kernel(0.0, o.params.sigma, o.params.wavelength, o.params.aspect, o.params.size);
  if (o.params.num_angles < 1) throw InvalidArgument("--angles must be at least 1");
  const auto image = read_gray_image(o.image);
  const auto map = orient_map(image, o.params);
  write_orientation_map(o.out, map);

  // Circular mean on doubled angles, since theta is only defined modulo π.
  double s = 0.0, c = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < map.theta.size(); ++i) {
    if (map.confidence.values()[i] <= o.confidence_threshold) continue;
    s += std::sin(2.0 * map.theta.values()[i]);
    c += std::cos(2.0 * map.theta.values()[i]);
    ++n;
  }
  fmt::print("size {}x{}\nconfident_pixels {}\n", map.width(), map.height(), n);
  if (n > 0) {
    const double mean = wrap_pi(0.5 * std::atan2(s, c));
    fmt::print("mean_theta {:.6f}\nmean_theta_deg {:.4f}\n", mean, rad_to_deg(mean));
  }
}

struct ConvertOptions {
  std::string in;
  std::string out;
  std::optional<double> unit_scale;
};

void run_convert(const ConvertOptions& o) {
  const auto loaded = load_strands(o.in, o.unit_scale);
  save_strands(o.out, loaded.strands);
  fmt::print("strands {} joints {}\n", loaded.strands.size(), loaded.strands.total_joints());
  if (loaded.dropped_strands + loaded.dropped_joints > 0) {
    fmt::print(stderr, "warning: dropped {} strands with fewer than two points and {} repeated points\n",
               loaded.dropped_strands, loaded.dropped_joints);
  }
}

}  // namespace

std::vector<Command> add_commands(CLI::App& app, const GlobalOptions& globals) {
  std::vector<Command> commands;

  {
    auto o = std::make_shared<SynthOptions>();
    auto* sub = app.add_subcommand("synth", "Generate a synthetic hairstyle, fragments and an oriented cloud");
    sub->add_option("--style", o->style, "straight, wavy, curly or helix")->capture_default_str();
    sub->add_option("--strands", o->spec.strand_count)->capture_default_str();
    sub->add_option("--joints", o->spec.joints_per_strand)->capture_default_str();
    sub->add_option("--scalp-radius", o->spec.scalp_radius, "mm")->capture_default_str();
    sub->add_option("--length-mean", o->spec.length_mean, "mm")->capture_default_str();
    sub->add_option("--length-std", o->spec.length_std, "mm")->capture_default_str();
    sub->add_option("--curl-radius", o->spec.curl_radius, "mm")->capture_default_str();
    sub->add_option("--curl-pitch", o->spec.curl_pitch, "mm")->capture_default_str();
    sub->add_option("--wave-amplitude", o->spec.wave_amplitude, "mm")->capture_default_str();
    sub->add_option("--wave-length", o->spec.wave_length, "mm")->capture_default_str();
    sub->add_option("--droop", o->spec.droop)->capture_default_str();
    sub->add_option("-o,--out", o->out, "ground-truth strand file")->required();
    sub->add_option("--fragments", o->fragments, "fragment file; adjacency goes to <file>.adjacency");
    sub->add_option("--min-piece", o->fragment.min_length, "mm")->capture_default_str();
    sub->add_option("--max-piece", o->fragment.max_length, "mm")->capture_default_str();
    sub->add_option("--gap", o->fragment.gap, "mm")->capture_default_str();
    sub->add_option("--jitter", o->fragment.jitter_sigma, "mm")->capture_default_str();
    sub->add_option("--cloud", o->cloud, "oriented point cloud file");
    sub->add_option("--cloud-spacing", o->cloud_spacing, "mm")->capture_default_str();
    sub->add_option("--cloud-noise", o->cloud_noise, "mm")->capture_default_str();
    commands.push_back({sub, [o, &globals] { run_synth(*o, globals); }});
  }
  {
    auto o = std::make_shared<MergeOptions>();
    auto* sub = app.add_subcommand("merge", "Greedy endpoint merge of strand fragments");
    sub->add_option("input", o->in)->required();
    sub->add_option("-o,--out", o->out)->required();
    sub->add_option("--distance", o->distance, "mm")->capture_default_str();
    sub->add_option("--angle", o->angle_deg, "degrees")->capture_default_str();
    sub->add_option("--max-passes", o->max_passes)->capture_default_str();
    sub->add_option("--adjacency", o->adjacency, "ground-truth pairs; prints the recovered fraction");
    sub->add_option("--unit-scale", o->unit_scale, "mm per file unit");
    commands.push_back({sub, [o] { run_merge(*o); }});
  }
  {
    auto o = std::make_shared<RefineOptions>();
    auto& c = o->cfg;
    auto* sub = app.add_subcommand("refine", "Joint optimization with scheduled merging");
    sub->add_option("input", o->in)->required();
    sub->add_option("--target", o->target, "oriented point cloud")->required();
    sub->add_option("-o,--out", o->out)->required();
    sub->add_option("--iterations", c.iterations)->capture_default_str();
    sub->add_option("--lambda-smooth", c.lambda_smooth)->capture_default_str();
    sub->add_option("--theta-s", o->theta_s_deg, "degrees")->capture_default_str();
    sub->add_option("--direction-weight", c.direction_weight)->capture_default_str();
    sub->add_option("--sample-spacing", c.sample_spacing, "mm")->capture_default_str();
    sub->add_option("--learning-rate", c.learning_rate, "mm")->capture_default_str();
    sub->add_option("--final-learning-rate", c.final_learning_rate, "mm")->capture_default_str();
    sub->add_option("--split-length", c.split_length, "mm")->capture_default_str();
    sub->add_option("--merge-every", c.merge_every)->capture_default_str();
    sub->add_option("--max-merge-passes", c.max_merge_passes)->capture_default_str();
    sub->add_option("--mask-threshold", c.mask_threshold)->capture_default_str();
    sub->add_option("--start-distance", o->start_distance, "mm")->capture_default_str();
    sub->add_option("--start-angle", o->start_angle_deg, "degrees")->capture_default_str();
    sub->add_option("--end-distance", o->end_distance, "mm")->capture_default_str();
    sub->add_option("--end-angle", o->end_angle_deg, "degrees")->capture_default_str();
    sub->add_option("--log-every", o->log_every)->capture_default_str();
    sub->add_option("--unit-scale", o->unit_scale, "mm per file unit");
    commands.push_back({sub, [o] { run_refine(*o); }});
  }
  {
    auto o = std::make_shared<EvaluateOptions>();
    auto* sub = app.add_subcommand("evaluate", "Precision, recall, F-score and strand consistency");
    sub->add_option("--pred", o->pred)->required();
    sub->add_option("--gt", o->gt)->required();
    sub->add_option("--thresholds", o->thresholds, "mm/deg pairs")->capture_default_str()->delimiter(',');
    sub->add_option("--spacing", o->spacing, "mm")->capture_default_str();
    sub->add_flag("--no-sc", o->no_sc, "skip strand consistency");
    sub->add_option("-o,--report", o->report, "report file; JSON when it ends in .json, key-value otherwise");
    sub->add_option("--unit-scale", o->unit_scale, "mm per file unit");
    commands.push_back({sub, [o] { run_evaluate(*o); }});
  }
  {
    auto o = std::make_shared<OrientOptions>();
    auto* sub = app.add_subcommand("orient", "Gabor orientation map of a grayscale image");
    sub->add_option("image", o->image)->required();
    sub->add_option("-o,--out", o->out, "ORI1 orientation map")->required();
    sub->add_option("--angles", o->params.num_angles)->capture_default_str();
    sub->add_option("--sigma", o->params.sigma, "pixels")->capture_default_str();
    sub->add_option("--wavelength", o->params.wavelength, "pixels")->capture_default_str();
    sub->add_option("--aspect", o->params.aspect)->capture_default_str();
    sub->add_option("--kernel-size", o->params.size)->capture_default_str();
    sub->add_option("--confidence-threshold", o->confidence_threshold)->capture_default_str();
    commands.push_back({sub, [o] { run_orient(*o); }});
  }
  {
    auto o = std::make_shared<ConvertOptions>();
    auto* sub = app.add_subcommand("convert", "Convert between .hair, .data (USC) and native text");
    sub->add_option("input", o->in)->required();
    sub->add_option("output", o->out)->required();
    sub->add_option("--unit-scale", o->unit_scale, "mm per input file unit");
    commands.push_back({sub, [o] { run_convert(*o); }});
  }
  return commands;
}

}  // namespace hairstrand::cli

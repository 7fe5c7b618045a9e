#include "t3dp/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "t3dp/camera_lift.hpp"
#include "t3dp/error.hpp"
#include "t3dp/io.hpp"
#include "t3dp/pipeline.hpp"
#include "t3dp/reid.hpp"
#include "t3dp/scene_sim.hpp"

namespace t3dp::cli {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

AttentionConfig betas_from(const std::vector<double>& v) {
  AttentionConfig a{v.at(0), v.at(1), v.at(2)};
  a.validate();
  return a;
}

io::DetectionFormat format_from(const std::string& s) {
  return s == "binary" ? io::DetectionFormat::binary : io::DetectionFormat::jsonl;
}

struct SimulateArgs {
  std::string config, out, format = "jsonl";
  std::int64_t people = 5, frames = 100;
  std::uint64_t seed = 0;
  double appearance_noise = 0.0, pose_drift = 0.0, walk_speed = 0.05, focal = kDefaultFocal;
  std::vector<std::int64_t> shot_changes;
  std::vector<std::string> occlusions;
};

struct TrainArgs {
  std::string detections, out;
  std::size_t iterations = 100, window = 8;
  double lr = 0.001, margin = 10.0, z_norm = kDefaultZNorm;
  std::uint64_t seed = 0;
  std::vector<double> beta{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

struct TrackArgs {
  std::string detections, weights, out;
  double tau = 8.0, z_norm = kDefaultZNorm;
  std::size_t max_age = 24, history = 20, window = 8;
  std::vector<double> beta;
};

struct LiftArgs {
  double image_w = 0, image_h = 0, cx = 0, cy = 0, box = 0, scale = 1, tx = 0, ty = 0,
         focal = kDefaultFocal;
};

Occlusion parse_occlusion(const std::string& s) {
  Occlusion o;
  char c1 = 0, c2 = 0;
  std::istringstream ss(s);
  if (!(ss >> o.person >> c1 >> o.start_frame >> c2 >> o.length) || c1 != ':' || c2 != ':')
    throw ConfigError("occlusion must look like person:start:length, got '" + s + "'");
  return o;
}

int do_simulate(CLI::App& cmd, const SimulateArgs& a, std::ostream& err) {
  SimConfig cfg;
  if (!a.config.empty()) cfg = io::sim_config_from_json(read_text(a.config));
  if (cmd.count("--people")) cfg.num_people = a.people;
  if (cmd.count("--frames")) cfg.num_frames = a.frames;
  if (cmd.count("--seed")) cfg.seed = a.seed;
  if (cmd.count("--appearance-noise")) cfg.appearance_noise_sigma = a.appearance_noise;
  if (cmd.count("--pose-drift")) cfg.pose_drift_sigma = a.pose_drift;
  if (cmd.count("--walk-speed")) cfg.walk_speed = a.walk_speed;
  if (cmd.count("--focal")) cfg.focal = a.focal;
  if (cmd.count("--shot-change")) cfg.shot_changes = a.shot_changes;
  if (cmd.count("--occlusion")) {
    cfg.occlusions.clear();
    for (const auto& s : a.occlusions) cfg.occlusions.push_back(parse_occlusion(s));
  }
  const Scenario sc = generate(cfg);
  io::write_detections(a.out, sc.detections, format_from(a.format));
  err << "simulate: " << sc.detections.size() << " detections, " << cfg.num_people
      << " people, " << cfg.num_frames << " frames -> " << a.out << "\n";
  return kExitOk;
}

int do_train(const TrainArgs& a, std::ostream& err) {
  const auto dets = io::read_detections(a.detections);
  if (dets.empty()) throw TrainingDataError("no detections to train on");
  const AttentionConfig attention = betas_from(a.beta);
  EmbedOptions eo;
  eo.window = a.window;
  eo.z_norm = a.z_norm;
  const std::int64_t first = dets.front().frame;
  const std::int64_t count = dets.back().frame - first + 1;
  std::vector<ClipBatch> clips;
  for (auto& c : embed_detections(dets, first, count, eo))
    if (c.batch.has_identities()) clips.push_back(std::move(c.batch));
  if (clips.empty()) throw TrainingDataError("no clip carries ground-truth identities");

  LossConfig lc;
  lc.learning_rate = a.lr;
  lc.margin = a.margin;
  lc.iterations = a.iterations;
  TrainResult r = train(clips, TransformerWeights::init_uniform(AttributeDims{}, a.seed),
                        attention, lc);
  io::save_weights(a.out, r.weights, attention);
  err << "train: " << r.loss_history.size() << " steps, loss " << r.loss_history.front()
      << " -> " << r.loss_history.back() << "\n";
  return kExitOk;
}

int do_track(const TrackArgs& a, std::ostream& err) {
  const auto dets = io::read_detections(a.detections);
  TrackOptions opts;
  opts.tracker.tau = a.tau;
  opts.tracker.max_age = a.max_age;
  opts.tracker.history_len = a.history;
  opts.embed.window = a.window;
  opts.embed.z_norm = a.z_norm;
  std::optional<io::WeightsFile> wf;
  if (!a.weights.empty()) {
    wf = io::load_weights(a.weights, AttributeDims{});
    opts.weights = &wf->weights;
    opts.attention = wf->attention;
  }
  if (!a.beta.empty()) opts.attention = betas_from(a.beta);
  opts.tracker.cues = CueSelection::from_betas(opts.attention);
  opts.tracker.validate();
  const auto tracks = run_tracking(dets, opts);
  io::write_tracks(a.out, tracks);
  err << "track: " << tracks.size() << " labels ("
      << (opts.weights ? "transformer" : "raw-token") << " mode) -> " << a.out << "\n";
  return kExitOk;
}

int do_eval(const std::string& tracks_path, const std::string& gt_path,
            const std::string& out_path, std::ostream& out) {
  const auto tracks = io::read_tracks(tracks_path);
  const auto gt = io::read_detections(gt_path);
  const auto joined = join_labels(gt, tracks);
  emit(io::metrics_to_json(evaluate(joined)) + "\n", out_path, out);
  return kExitOk;
}

int do_lift(const LiftArgs& a, std::ostream& out) {
  CameraCrop c{a.image_w, a.image_h, a.cx, a.cy, a.box, a.scale, a.tx, a.ty, a.focal};
  const Vec3 t = lift_translation(c);
  out << nlohmann::json::array({t.x, t.y, t.z}).dump() << "\n";
  return kExitOk;
}

int do_report(const std::vector<std::string>& files, const std::string& out_path,
              std::ostream& out) {
  std::ostringstream csv;
  csv << "name,ids,mota,idf1,fp,fn,num_gt,num_pred\n";
  csv << std::setprecision(17);
  for (const auto& f : files) {
    const MetricReport r = io::metrics_from_json(read_text(f));
    csv << f << ',' << r.id_switches << ',' << r.mota << ',' << r.idf1 << ',' << r.fp << ','
        << r.fn << ',' << r.num_gt << ',' << r.num_pred << '\n';
  }
  emit(csv.str(), out_path, out);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-person tracking with 3D appearance, pose and location embeddings"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario as detections");
  simulate->add_option("--config", sim.config, "Scenario config (JSON); flags override it");
  simulate->add_option("--out", sim.out, "Detections output file")->required();
  simulate->add_option("--format", sim.format, "jsonl or binary")
      ->check(CLI::IsMember({"jsonl", "binary"}))
      ->capture_default_str();
  simulate->add_option("--people", sim.people, "Number of people")->capture_default_str();
  simulate->add_option("--frames", sim.frames, "Number of frames")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--appearance-noise", sim.appearance_noise, "Appearance noise sigma")
      ->capture_default_str();
  simulate->add_option("--pose-drift", sim.pose_drift, "Pose random-walk sigma")
      ->capture_default_str();
  simulate->add_option("--walk-speed", sim.walk_speed, "View units per frame")
      ->capture_default_str();
  simulate->add_option("--focal", sim.focal, "Focal length (px)")->capture_default_str();
  simulate->add_option("--shot-change", sim.shot_changes, "Frame of a shot change (repeatable)");
  simulate->add_option("--occlusion", sim.occlusions, "person:start:length (repeatable)");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train the transformer on labeled detections");
  train_cmd->add_option("--detections", tr.detections, "Detections with gt_id")->required();
  train_cmd->add_option("--out", tr.out, "Weights output file")->required();
  train_cmd->add_option("--iterations", tr.iterations, "Passes over the clips")
      ->capture_default_str();
  train_cmd->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--margin", tr.margin, "Contrastive margin m")->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Weight init seed")->capture_default_str();
  train_cmd->add_option("--window", tr.window, "Frames per clip")->capture_default_str();
  train_cmd->add_option("--z-norm", tr.z_norm, "Keypoint normalization")->capture_default_str();
  train_cmd->add_option("--beta", tr.beta, "beta_app,beta_pose,beta_loc")
      ->delimiter(',')
      ->expected(3)
      ->capture_default_str();

  TrackArgs tk;
  auto* track_cmd = app.add_subcommand("track", "Assign track ids to detections");
  track_cmd->add_option("--detections", tk.detections, "Detections file")->required();
  track_cmd->add_option("--weights", tk.weights,
                        "Transformer weights; omit for raw-token tracking");
  track_cmd->add_option("--out", tk.out, "Tracks output file")->required();
  track_cmd->add_option("--tau", tk.tau, "Affinity cap / rejection threshold")
      ->capture_default_str();
  track_cmd->add_option("--max-age", tk.max_age, "Kill tracks unmatched this many frames")
      ->capture_default_str();
  track_cmd->add_option("--history", tk.history, "Embeddings kept per track")
      ->capture_default_str();
  track_cmd->add_option("--window", tk.window, "Frames per transformer clip")
      ->capture_default_str();
  track_cmd->add_option("--z-norm", tk.z_norm, "Keypoint normalization")->capture_default_str();
  track_cmd->add_option("--beta", tk.beta,
                        "beta_app,beta_pose,beta_loc (default: from weights, else equal); "
                        "zero-weight cues are also dropped from the association distance")
      ->delimiter(',')
      ->expected(3);

  std::string ev_tracks, ev_gt, ev_out;
  auto* eval_cmd = app.add_subcommand("eval", "Score tracks against ground truth");
  eval_cmd->add_option("--tracks", ev_tracks, "Tracks file")->required();
  eval_cmd->add_option("--gt", ev_gt, "Detections file with gt_id")->required();
  eval_cmd->add_option("--out", ev_out, "Write the JSON report here instead of stdout");

  LiftArgs lf;
  auto* lift_cmd = app.add_subcommand("lift", "Print the view-space translation of a crop");
  lift_cmd->add_option("--image-w", lf.image_w, "Image width W")->required();
  lift_cmd->add_option("--image-h", lf.image_h, "Image height H")->required();
  lift_cmd->add_option("--cx", lf.cx, "Crop center x")->required();
  lift_cmd->add_option("--cy", lf.cy, "Crop center y")->required();
  lift_cmd->add_option("--box", lf.box, "Crop side b")->required();
  lift_cmd->add_option("--scale", lf.scale, "Camera scale s")->capture_default_str();
  lift_cmd->add_option("--tx", lf.tx, "Camera t_x")->capture_default_str();
  lift_cmd->add_option("--ty", lf.ty, "Camera t_y")->capture_default_str();
  lift_cmd->add_option("--focal", lf.focal, "Focal length f")->capture_default_str();

  std::vector<std::string> rp_files;
  std::string rp_out;
  auto* report_cmd = app.add_subcommand("report", "Collect metric reports into CSV");
  report_cmd->add_option("metrics", rp_files, "Metric JSON files")->required();
  report_cmd->add_option("--out", rp_out, "Write CSV here instead of stdout");

  std::string cv_in, cv_out, cv_format = "binary";
  auto* convert_cmd = app.add_subcommand("convert", "Convert detections between formats");
  convert_cmd->add_option("--in", cv_in, "Input detections")->required();
  convert_cmd->add_option("--out", cv_out, "Output detections")->required();
  convert_cmd->add_option("--format", cv_format, "jsonl or binary")
      ->check(CLI::IsMember({"jsonl", "binary"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return do_simulate(*simulate, sim, err);
    if (*train_cmd) return do_train(tr, err);
    if (*track_cmd) return do_track(tk, err);
    if (*eval_cmd) return do_eval(ev_tracks, ev_gt, ev_out, out);
    if (*lift_cmd) return do_lift(lf, out);
    if (*report_cmd) return do_report(rp_files, rp_out, out);
    if (*convert_cmd) {
      io::write_detections(cv_out, io::read_detections(cv_in), format_from(cv_format));
      return kExitOk;
    }
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace t3dp::cli

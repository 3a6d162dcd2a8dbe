// Command-line front end: synthetic scene generation, view transforms, flow
// estimation, evaluation, and visualization on equirectangular panoramas.

#include <CLI11.hpp>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "erpflow/datagen.hpp"
#include "erpflow/estimator.hpp"
#include "erpflow/flow_color.hpp"
#include "erpflow/flow_io.hpp"
#include "erpflow/image_io.hpp"
#include "erpflow/metrics.hpp"
#include "erpflow/report_io.hpp"

namespace fs = std::filesystem;
using namespace erpflow;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Scene specs are small key-value files: `key = value` or `key: value`,
// '#' starts a comment.
std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene spec " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto sep = line.find_first_of("=:");
    if (sep == std::string::npos) continue;
    const std::string key = trim(line.substr(0, sep));
    const std::string value = trim(line.substr(sep + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

SceneSpec parse_scene_spec(const std::string& path) {
  const auto kv = parse_kv_file(path);
  const auto get = [&](const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  SceneSpec spec;
  spec.seed = std::stoull(get("seed", "0"));
  spec.grid = checked_grid(std::stoi(get("width", "256")), std::stoi(get("height", "128")));

  const std::string tex = get("texture", "noise");
  if (tex == "noise") spec.texture = TextureKind::MultiscaleNoise;
  else if (tex == "checker") spec.texture = TextureKind::Checker;
  else if (tex == "dots") spec.texture = TextureKind::Dots;
  else throw std::runtime_error("unknown texture '" + tex + "' (noise|checker|dots)");

  const std::string axis = get("axis", "y");
  if (axis == "x" || axis == "X") spec.camera.axis = Axis::X;
  else if (axis == "y" || axis == "Y") spec.camera.axis = Axis::Y;
  else if (axis == "z" || axis == "Z") spec.camera.axis = Axis::Z;
  else throw std::runtime_error("unknown axis '" + axis + "' (x|y|z)");
  spec.camera.angle = std::stod(get("angle_deg", "0")) * kPi / 180.0;
  return spec;
}

int run_gen(const std::string& spec_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  SceneSpec spec = parse_scene_spec(spec_path);
  if (seed) spec.seed = *seed;
  fs::create_directories(out_dir);
  const ScenePair<float> pair = generate_pair<float>(spec);
  write_png((fs::path(out_dir) / "frame1.png").string(), pair.frame1);
  write_png((fs::path(out_dir) / "frame2.png").string(), pair.frame2);
  write_flo((fs::path(out_dir) / "gt.flo").string(), pair.gt);
  return 0;
}

int run_transform_view(const std::string& in, const std::string& direction,
                       const std::string& out) {
  ViewDirection dir;
  if (direction == "p2o") dir = ViewDirection::PrimToOrtho;
  else if (direction == "o2p") dir = ViewDirection::OrthoToPrim;
  else throw std::runtime_error("direction must be p2o or o2p");

  if (in.size() >= 4 && in.compare(in.size() - 4, 4, ".flo") == 0) {
    FlowField<float> flow = read_flo(in);
    if (dir == ViewDirection::OrthoToPrim) flow.view = ViewTag::Orthogonal;
    write_flo(out, flow_view_transform(flow, dir));
  } else {
    ErpImage<float> img = read_image(in);
    if (dir == ViewDirection::OrthoToPrim) img.view = ViewTag::Orthogonal;
    write_image(out, view_transform_image(img, dir));
  }
  return 0;
}

int run_estimate(const std::string& f1, const std::string& f2, const EstimatorConfig& cfg,
                 const std::string& out, const std::string& trace_dir) {
  const ErpImage<float> frame1 = read_image(f1);
  const ErpImage<float> frame2 = read_image(f2);
  const EstimateResult<float> result = estimate(frame1, frame2, cfg);
  write_flo(out, result.primitive);
  if (!trace_dir.empty()) {
    fs::create_directories(trace_dir);
    for (std::size_t i = 0; i < result.primitive_trace.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "iter_%02zu.flo", i + 1);
      write_flo((fs::path(trace_dir) / name).string(), result.primitive_trace[i]);
    }
  }
  return 0;
}

int run_evaluate(const std::string& pred_path, const std::string& gt_path,
                 const std::string& report_path) {
  const FlowField<float> pred = read_flo(pred_path);
  const FlowField<float> gt = read_flo(gt_path);
  const EvalReport report = evaluate(pred, gt);
  std::ofstream out(report_path);
  if (!out) throw std::runtime_error("cannot open " + report_path + " for writing");
  out << report_to_json(report);
  std::cout << report_to_table(report);
  return 0;
}

int run_distortion_map(int width, int height, const std::string& out) {
  const ErpImage<float> map = distortion_map<float>(checked_grid(width, height));
  if (out.size() >= 4 && out.compare(out.size() - 4, 4, ".pfm") == 0) {
    write_pfm(out, map);
    return 0;
  }
  // Normalize 1..cap to 0..1 for 8-bit output; brighter = more distortion.
  ErpImage<float> vis = map;
  const float cap = map.planes[0].maxCoeff();
  if (cap > 1.0f) vis.planes[0] = (map.planes[0] - 1.0f) / (cap - 1.0f);
  write_png(out, vis);
  return 0;
}

int run_viz(const std::string& flow_path, const std::string& out,
            std::optional<double> max_mag) {
  const FlowField<float> flow = read_flo(flow_path);
  write_png(out, flow_to_color(flow, max_mag));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panoramic optical-flow toolkit for equirectangular images"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  // gen
  std::string spec_path, out_dir;
  std::optional<std::uint64_t> seed;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scene pair with ground truth");
  gen->add_option("--spec", spec_path, "Scene spec file (key = value)")->required();
  gen->add_option("--out-dir", out_dir, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the spec seed");

  // transform-view
  std::string tv_in, tv_dir, tv_out;
  auto* tv = app.add_subcommand("transform-view", "Re-project an image or flow between views");
  tv->add_option("--in", tv_in, "Input image (.png/.pfm) or flow (.flo)")->required();
  tv->add_option("--direction", tv_dir, "p2o or o2p")->required();
  tv->add_option("--out", tv_out, "Output path")->required();

  // estimate
  std::string est_f1, est_f2, est_out, est_trace, est_mode = "dual";
  EstimatorConfig cfg;
  auto* est = app.add_subcommand("estimate", "Estimate optical flow for a frame pair");
  est->add_option("--frame1", est_f1, "First frame")->required();
  est->add_option("--frame2", est_f2, "Second frame")->required();
  est->add_option("--iters", cfg.iterations, "Refinement iterations");
  est->add_option("--radius", cfg.radius, "Correlation lookup radius");
  est->add_option("--mode", est_mode, "dual or primitive-only");
  est->add_option("--tau", cfg.temperature, "Soft-argmax temperature");
  est->add_option("--beta", cfg.fusion_sharpness, "Fusion confidence sharpness");
  est->add_option("--groups", cfg.groups, "Group-wise correlation groups");
  est->add_option("--downsample", cfg.downsample, "Feature downsample factor");
  est->add_flag("--symmetric-fusion", cfg.symmetric_fusion,
                "Also fuse the primitive flow into the orthogonal branch");
  est->add_option("--out", est_out, "Output .flo path")->required();
  est->add_option("--trace-dir", est_trace, "Directory for per-iteration flows");

  // evaluate
  std::string ev_pred, ev_gt, ev_report;
  auto* ev = app.add_subcommand("evaluate", "Compare a flow against ground truth");
  ev->add_option("--pred", ev_pred, "Predicted .flo")->required();
  ev->add_option("--gt", ev_gt, "Ground-truth .flo")->required();
  ev->add_option("--report", ev_report, "Output JSON report")->required();

  // distortion-map
  int dm_w = 0, dm_h = 0;
  std::string dm_out;
  auto* dm = app.add_subcommand("distortion-map", "Write the latitude distortion map");
  dm->add_option("--width", dm_w, "Panorama width")->required();
  dm->add_option("--height", dm_h, "Panorama height")->required();
  dm->add_option("--out", dm_out, "Output image (.png/.pfm)")->required();

  // viz
  std::string viz_flow, viz_out;
  std::optional<double> viz_max;
  auto* viz = app.add_subcommand("viz", "Render a flow field with the color wheel");
  viz->add_option("--flow", viz_flow, "Input .flo")->required();
  viz->add_option("--out", viz_out, "Output .png")->required();
  viz->add_option("--max-mag", viz_max, "Saturation normalization (default: 99th percentile)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen(spec_path, out_dir, seed);
    if (*tv) return run_transform_view(tv_in, tv_dir, tv_out);
    if (*est) {
      if (est_mode == "primitive-only") cfg.dual = false;
      else if (est_mode != "dual")
        throw std::runtime_error("mode must be dual or primitive-only");
      return run_estimate(est_f1, est_f2, cfg, est_out, est_trace);
    }
    if (*ev) return run_evaluate(ev_pred, ev_gt, ev_report);
    if (*dm) return run_distortion_map(dm_w, dm_h, dm_out);
    if (*viz) return run_viz(viz_flow, viz_out, viz_max);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

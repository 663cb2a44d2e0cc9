// hsfuse: command-line front end for the dual-arm acquisition simulator,
// the unrolled fusion network, the compressive-sensing variant, and the
// quality metrics. Every command is driven by a JSON config so a run is a
// pure function of (config, referenced inputs, seeds).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "hsfuse/cs.hpp"
#include "hsfuse/cube_io.hpp"
#include "hsfuse/degrade.hpp"
#include "hsfuse/metrics.hpp"
#include "hsfuse/net.hpp"
#include "hsfuse/synthetic.hpp"
#include "hsfuse/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hsfuse;

namespace {

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return json::parse(in);
}

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object()) throw std::runtime_error(context + ": expected a JSON object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw std::runtime_error(context + ": unknown key \"" + item.key() + "\"");
}

template <typename T>
T req(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.contains(key))
    throw std::runtime_error(context + ": missing required key \"" + key + "\"");
  return obj.at(key).get<T>();
}

template <typename T>
T opt(const json& obj, const std::string& key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

// ---------------------------------------------------------------------------
// Shared loading of a simulate output directory.

struct SimulatedSystem {
  int rows, cols, bands, p, q;
  CodedApertureStack hs_ap{1, 1, 1, 1};
  CodedApertureStack ms_ap{1, 1, 1, 1};
  ShotStack y_hs;
  ShotStack y_ms;
  SpectralCube truth{1, 1, 1};
  bool has_truth = false;
};

SimulatedSystem load_simulated(const std::string& dir) {
  const fs::path base(dir);
  std::ifstream in(base / "manifest.json");
  if (!in)
    throw std::runtime_error("cannot open simulation manifest in " + dir);
  const json manifest = json::parse(in);
  SimulatedSystem sys;
  sys.rows = manifest.at("rows");
  sys.cols = manifest.at("cols");
  sys.bands = manifest.at("bands");
  sys.p = manifest.at("p");
  sys.q = manifest.at("q");
  sys.hs_ap = load_apertures((base / "hs_apertures.json").string());
  sys.ms_ap = load_apertures((base / "ms_apertures.json").string());
  sys.y_hs = read_shots((base / "y_hs.sstk").string());
  sys.y_ms = read_shots((base / "y_ms.sstk").string());
  if (fs::exists(base / "truth.scub")) {
    sys.truth = read_cube((base / "truth.scub").string());
    sys.has_truth = true;
  }
  return sys;
}

DualArmSystem make_operators(const SimulatedSystem& sys) {
  return {CassiOperator(Arm::HS, sys.hs_ap, sys.p, 1, sys.rows, sys.cols, sys.bands),
          CassiOperator(Arm::MS, sys.ms_ap, 1, sys.q, sys.rows, sys.cols, sys.bands)};
}

TrainingConfig training_config(const json& cfg) {
  TrainingConfig out;
  out.learning_rate = opt<double>(cfg, "learning_rate", 5e-4);
  out.epochs = req<int>(cfg, "epochs", "train config");
  out.batch_size = opt<int>(cfg, "batch_size", 1);
  out.gamma = opt<double>(cfg, "gamma", 0.1);
  out.seed = req<std::uint64_t>(cfg, "shuffle_seed", "train config");
  out.grad_clip = opt<double>(cfg, "grad_clip", 0.0);
  return out;
}

void write_history(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot create history file: " + path);
  out << "epoch,data_loss,inv_loss,total_loss\n";
  for (std::size_t e = 0; e < history.size(); ++e)
    out << e + 1 << "," << history[e].data_loss << "," << history[e].inv_loss << ","
        << history[e].total_loss << "\n";
}

std::string format_db(double db) {
  if (std::isinf(db)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", db);
  return buf;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path) {
  const json cfg = load_config(config_path);
  check_keys(cfg,
             {"input_cube", "synthetic", "output_dir", "p", "q", "ratio_hs",
              "ratio_ms", "snr_db", "aperture_seed", "noise_seed"},
             "simulate config");
  if (cfg.contains("input_cube") == cfg.contains("synthetic"))
    throw std::runtime_error(
        "simulate config: provide exactly one of \"input_cube\" and \"synthetic\"");

  SpectralCube truth(1, 1, 1);
  if (cfg.contains("input_cube")) {
    truth = read_cube(cfg.at("input_cube").get<std::string>());
  } else {
    const json& syn = cfg.at("synthetic");
    check_keys(syn, {"rows", "cols", "bands", "seed", "blobs"}, "synthetic spec");
    truth = synthetic_cube(req<int>(syn, "rows", "synthetic spec"),
                           req<int>(syn, "cols", "synthetic spec"),
                           req<int>(syn, "bands", "synthetic spec"),
                           req<std::uint64_t>(syn, "seed", "synthetic spec"),
                           opt<int>(syn, "blobs", 6));
  }

  const int p = req<int>(cfg, "p", "simulate config");
  const int q = req<int>(cfg, "q", "simulate config");
  const double ratio_hs = req<double>(cfg, "ratio_hs", "simulate config");
  const double ratio_ms = req<double>(cfg, "ratio_ms", "simulate config");
  const std::uint64_t aperture_seed =
      req<std::uint64_t>(cfg, "aperture_seed", "simulate config");
  const std::string out_dir = req<std::string>(cfg, "output_dir", "simulate config");

  require(p >= 1 && truth.rows % p == 0 && truth.cols % p == 0,
          "spatial decimation does not divide the cube dimensions");
  require(q >= 1 && truth.bands % q == 0,
          "spectral decimation does not divide the band count");

  const int w_hs = shots_for_ratio(ratio_hs, truth.bands);
  const int l_ms = truth.bands / q;
  const int w_ms = shots_for_ratio(ratio_ms, l_ms);

  const CodedApertureStack hs_ap =
      design_apertures(truth.rows / p, truth.cols / p, truth.bands, w_hs, aperture_seed);
  const CodedApertureStack ms_ap =
      design_apertures(truth.rows, truth.cols, l_ms, w_ms, aperture_seed + 1);
  const CassiOperator hs_op(Arm::HS, hs_ap, p, 1, truth.rows, truth.cols, truth.bands);
  const CassiOperator ms_op(Arm::MS, ms_ap, 1, q, truth.rows, truth.cols, truth.bands);

  ShotStack y_hs = hs_forward(truth, hs_op);
  ShotStack y_ms = ms_forward(truth, ms_op);
  if (cfg.contains("snr_db")) {
    const double snr = cfg.at("snr_db").get<double>();
    const std::uint64_t noise_seed =
        req<std::uint64_t>(cfg, "noise_seed", "simulate config");
    y_hs = add_noise(y_hs, snr, noise_seed);
    y_ms = add_noise(y_ms, snr, noise_seed + 1);
  }

  fs::create_directories(out_dir);
  const fs::path base(out_dir);
  write_cube(truth, (base / "truth.scub").string());
  write_shots(y_hs, (base / "y_hs.sstk").string());
  write_shots(y_ms, (base / "y_ms.sstk").string());
  save_apertures(hs_ap, "hs", p, 1, aperture_seed, out_dir, "hs");
  save_apertures(ms_ap, "ms", 1, q, aperture_seed + 1, out_dir, "ms");

  json manifest;
  manifest["rows"] = truth.rows;
  manifest["cols"] = truth.cols;
  manifest["bands"] = truth.bands;
  manifest["p"] = p;
  manifest["q"] = q;
  manifest["w_hs"] = w_hs;
  manifest["w_ms"] = w_ms;
  manifest["ratio_hs"] = ratio_hs;
  manifest["ratio_ms"] = ratio_ms;
  manifest["aperture_seed"] = aperture_seed;
  if (cfg.contains("snr_db")) {
    manifest["snr_db"] = cfg.at("snr_db").get<double>();
    manifest["noise_seed"] = cfg.at("noise_seed").get<std::uint64_t>();
  }
  manifest["files"] = {{"truth", "truth.scub"},
                       {"y_hs", "y_hs.sstk"},
                       {"y_ms", "y_ms.sstk"},
                       {"hs_apertures", "hs_apertures.json"},
                       {"ms_apertures", "ms_apertures.json"}};
  std::ofstream mout(base / "manifest.json");
  mout << manifest.dump(2) << "\n";
  std::cout << "simulated " << truth.rows << "x" << truth.cols << "x" << truth.bands
            << " cube into " << out_dir << " (W_hs=" << w_hs << ", W_ms=" << w_ms
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const std::string& config_path) {
  const json cfg = load_config(config_path);
  check_keys(cfg,
             {"samples", "depth", "feature_maps", "epochs", "batch_size",
              "learning_rate", "gamma", "grad_clip", "init_seed", "shuffle_seed",
              "checkpoint_out", "history_csv"},
             "train config");
  const auto dirs = req<std::vector<std::string>>(cfg, "samples", "train config");
  require(!dirs.empty(), "train config: sample list is empty");

  const SimulatedSystem first = load_simulated(dirs.front());
  const DualArmSystem ops = make_operators(first);
  std::vector<TrainingSample> samples;
  for (const std::string& dir : dirs) {
    const SimulatedSystem sys = load_simulated(dir);
    require(sys.rows == first.rows && sys.cols == first.cols && sys.bands == first.bands,
            "training sample dimensions differ across directories");
    if (!sys.has_truth)
      throw std::runtime_error("training sample lacks a ground-truth cube: " + dir);
    TrainingSample sample;
    sample.truth = sys.truth.data;
    sample.y_primary = sys.y_hs.data;
    sample.y_secondary = sys.y_ms.data;
    samples.push_back(std::move(sample));
  }

  LadmmNetParams params = init_params(
      first.rows, first.cols, first.bands, req<int>(cfg, "feature_maps", "train config"),
      req<int>(cfg, "depth", "train config"),
      req<std::uint64_t>(cfg, "init_seed", "train config"));
  const TrainingConfig tc = training_config(cfg);
  const TrainResult result = train(params, &ops.hs, &ops.ms, samples, tc);
  if (result.diverged)
    std::cerr << "warning: training diverged; parameters restored to the last stable epoch\n";

  save_checkpoint(params, req<std::string>(cfg, "checkpoint_out", "train config"));
  if (cfg.contains("history_csv"))
    write_history(cfg.at("history_csv").get<std::string>(), result.history);
  if (!result.history.empty())
    std::cout << "trained " << params.depth() << "-layer network for "
              << result.history.size() << " epochs; final loss "
              << result.history.back().total_loss << "\n";
  return result.diverged ? 1 : 0;
}

// ---------------------------------------------------------------------------
// fuse

int cmd_fuse(const std::string& config_path) {
  const json cfg = load_config(config_path);
  check_keys(cfg, {"checkpoint", "measurements", "output_cube", "output_rgb", "rgb_bands"},
             "fuse config");
  const SimulatedSystem sys =
      load_simulated(req<std::string>(cfg, "measurements", "fuse config"));
  const DualArmSystem ops = make_operators(sys);
  const LadmmNetParams params =
      load_checkpoint(req<std::string>(cfg, "checkpoint", "fuse config"));
  SpectralCube fused = net_fuse(params, ops, sys.y_hs, sys.y_ms);
  fused.data = fused.data.min(1.0).max(0.0);  // reflectance range for storage
  write_cube(fused, req<std::string>(cfg, "output_cube", "fuse config"));

  if (cfg.contains("output_rgb")) {
    auto bands = opt<std::vector<int>>(cfg, "rgb_bands",
                                       {fused.bands - 1, fused.bands / 2, 0});
    require(bands.size() == 3, "fuse config: rgb_bands needs exactly three entries");
    const auto channels = rgb_composite(fused, bands[0], bands[1], bands[2]);
    write_rgb_image(channels[0], channels[1], channels[2],
                    cfg.at("output_rgb").get<std::string>());
  }
  std::cout << "fused cube written (" << fused.rows << "x" << fused.cols << "x"
            << fused.bands << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cs-train

int cmd_cs_train(const std::string& config_path) {
  const json cfg = load_config(config_path);
  check_keys(cfg,
             {"dataset_dir", "ratio", "matrix_seed", "depth", "feature_maps",
              "stride", "max_blocks", "epochs", "batch_size", "learning_rate",
              "gamma", "grad_clip", "init_seed", "shuffle_seed", "checkpoint_out",
              "history_csv"},
             "cs-train config");
  const std::string dataset = req<std::string>(cfg, "dataset_dir", "cs-train config");
  const int stride = opt<int>(cfg, "stride", kBlockEdge);

  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(dataset)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".pgm") images.push_back(entry.path());
  }
  std::sort(images.begin(), images.end());
  if (images.empty())
    throw std::runtime_error("cs-train config: no .png/.pgm images in " + dataset);

  std::vector<Eigen::ArrayXd> blocks;
  for (const fs::path& path : images) {
    const BlockSet set = extract_blocks(read_gray_image(path.string()), stride);
    blocks.insert(blocks.end(), set.blocks.begin(), set.blocks.end());
  }
  if (cfg.contains("max_blocks")) {
    const auto cap = cfg.at("max_blocks").get<std::size_t>();
    if (blocks.size() > cap) blocks.resize(cap);
  }

  const double ratio = req<double>(cfg, "ratio", "cs-train config");
  const std::uint64_t matrix_seed =
      req<std::uint64_t>(cfg, "matrix_seed", "cs-train config");
  const int n = kBlockEdge * kBlockEdge;
  const GaussianMatrix h = gaussian_matrix(rows_for_ratio(ratio, n), n, matrix_seed);
  const DenseOperator op(h.entries);

  LadmmNetParams params = init_params(
      kBlockEdge, kBlockEdge, 1, req<int>(cfg, "feature_maps", "cs-train config"),
      req<int>(cfg, "depth", "cs-train config"),
      req<std::uint64_t>(cfg, "init_seed", "cs-train config"));
  std::vector<TrainingSample> samples;
  samples.reserve(blocks.size());
  for (const Eigen::ArrayXd& block : blocks) {
    TrainingSample sample;
    sample.truth = block;
    sample.y_primary = op.forward(block);
    samples.push_back(std::move(sample));
  }
  const TrainingConfig tc = training_config(cfg);
  const TrainResult result = train(params, &op, nullptr, samples, tc);
  if (result.diverged)
    std::cerr << "warning: training diverged; parameters restored to the last stable epoch\n";

  const std::string ckpt = req<std::string>(cfg, "checkpoint_out", "cs-train config");
  save_checkpoint(params, ckpt);
  json matrix_info;
  matrix_info["ratio"] = ratio;
  matrix_info["matrix_seed"] = matrix_seed;
  matrix_info["m"] = h.m;
  matrix_info["n"] = h.n;
  std::ofstream minfo(ckpt + ".matrix.json");
  minfo << matrix_info.dump(2) << "\n";
  if (cfg.contains("history_csv"))
    write_history(cfg.at("history_csv").get<std::string>(), result.history);
  std::cout << "trained CS network on " << blocks.size() << " blocks (m=" << h.m
            << ", n=" << h.n << ")\n";
  return result.diverged ? 1 : 0;
}

// ---------------------------------------------------------------------------
// cs-recon

int cmd_cs_recon(const std::string& config_path) {
  const json cfg = load_config(config_path);
  check_keys(cfg, {"checkpoint", "ratio", "matrix_seed", "input_image", "output_image"},
             "cs-recon config");
  const LadmmNetParams params =
      load_checkpoint(req<std::string>(cfg, "checkpoint", "cs-recon config"));
  const int n = kBlockEdge * kBlockEdge;
  const GaussianMatrix h =
      gaussian_matrix(rows_for_ratio(req<double>(cfg, "ratio", "cs-recon config"), n), n,
                      req<std::uint64_t>(cfg, "matrix_seed", "cs-recon config"));
  const DenseOperator op(h.entries);

  const GrayImage input =
      read_gray_image(req<std::string>(cfg, "input_image", "cs-recon config"));
  const BlockSet tiles = extract_blocks(input);
  std::vector<Eigen::ArrayXd> measurements;
  measurements.reserve(tiles.blocks.size());
  for (const Eigen::ArrayXd& block : tiles.blocks)
    measurements.push_back(op.forward(block));

  GrayImage recon = cs_reconstruct(measurements, tiles, h, params);
  recon.data = recon.data.min(1.0).max(0.0);
  write_gray_image(recon, req<std::string>(cfg, "output_image", "cs-recon config"));
  std::cout << "reconstructed " << recon.rows << "x" << recon.cols << " image from "
            << measurements.size() << " blocks\n";
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

int cmd_evaluate(const std::string& config_path) {
  const json cfg = load_config(config_path);
  check_keys(cfg, {"reference", "estimate", "name", "output_csv"}, "evaluate config");
  const std::string est_path = req<std::string>(cfg, "estimate", "evaluate config");
  const SpectralCube ref =
      read_cube(req<std::string>(cfg, "reference", "evaluate config"));
  const SpectralCube est = read_cube(est_path);
  const std::string name =
      opt<std::string>(cfg, "name", fs::path(est_path).stem().string());

  const auto t0 = std::chrono::steady_clock::now();
  const MetricReport report = evaluate(ref, est);
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  char row[256];
  std::snprintf(row, sizeof(row), "%s,%s,%.4f,%.6f,%.3f", name.c_str(),
                format_db(report.psnr_db).c_str(), report.ssim, report.sam_rad, runtime);
  if (cfg.contains("output_csv")) {
    std::ofstream out(cfg.at("output_csv").get<std::string>());
    if (!out) throw std::runtime_error("cannot create metrics file");
    out << "name,psnr_db,ssim,sam_rad,runtime_s\n" << row << "\n";
  }
  std::cout << "name,psnr_db,ssim,sam_rad,runtime_s\n" << row << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("HSFUSE_THREADS")) {
    const int n = std::atoi(threads);
    if (n >= 1) Eigen::setNbThreads(n);
  }

  CLI::App app{"Dual-arm compressive spectral fusion toolkit"};
  app.require_subcommand(1);
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const std::string&);
  };
  const Sub subs[] = {
      {"simulate", "Simulate dual-arm coded acquisitions of a spectral cube", cmd_simulate},
      {"train", "Train the unrolled fusion network on simulated samples", cmd_train},
      {"fuse", "Reconstruct a cube from measurements with a trained checkpoint", cmd_fuse},
      {"cs-train", "Train the block-based compressive-sensing variant", cmd_cs_train},
      {"cs-recon", "Reconstruct a grayscale image block-by-block", cmd_cs_recon},
      {"evaluate", "Compute PSNR/SSIM/SAM between two cubes", cmd_evaluate},
  };
  std::vector<std::pair<const Sub*, std::shared_ptr<std::string>>> bound;
  for (const Sub& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    auto config = std::make_shared<std::string>();
    cmd->add_option("--config", *config, "JSON config file")->required();
    bound.emplace_back(&sub, config);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [sub, config] : bound)
      if (app.get_subcommand(sub->name)->parsed()) return sub->run(*config);
    std::cerr << "error: no command selected\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "hsfuse/aperture.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsfuse/cube_io.hpp"
#include "hsfuse/rng.hpp"

namespace hsfuse {

CodedApertureStack design_apertures(int rows, int cols, int bands, int shots,
                                    std::uint64_t seed) {
  require(rows > 0 && cols > 0 && bands > 0, "aperture dimensions must be positive");
  require(shots >= 1, "snapshot count must be at least 1");
  require(shots <= bands, "snapshot count may not exceed the band count");
  CodedApertureStack stack(rows, cols, bands, shots);
  Rng rng(seed);
  std::vector<int> perm(static_cast<std::size_t>(bands));
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      for (int t = 0; t < bands; ++t) stack(t % shots, i, j, perm[t]) = 1.0;
    }
  return stack;
}

double compression_ratio(int shots, int bands) {
  require(bands >= 1, "band count must be positive");
  return static_cast<double>(shots) / bands;
}

int shots_for_ratio(double ratio, int bands) {
  require(bands >= 1, "band count must be positive");
  const int w = static_cast<int>(std::lround(ratio * bands));
  require(w >= 1, "requested compression ratio yields zero snapshots");
  require(w <= bands, "requested compression ratio exceeds full sampling");
  return w;
}

void save_apertures(const CodedApertureStack& stack, const std::string& arm,
                    int p, int q, std::uint64_t seed, const std::string& dir,
                    const std::string& prefix) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["arm"] = arm;
  manifest["p"] = p;
  manifest["q"] = q;
  manifest["W"] = stack.shots;
  manifest["seed"] = seed;
  manifest["rows"] = stack.rows;
  manifest["cols"] = stack.cols;
  manifest["bands"] = stack.bands;
  std::vector<std::string> files;
  for (int w = 0; w < stack.shots; ++w) {
    SpectralCube cube(stack.rows, stack.cols, stack.bands);
    for (int l = 0; l < stack.bands; ++l) cube.band(l) = stack.shot_band(w, l);
    const std::string name = prefix + "_shot" + std::to_string(w) + ".scub";
    write_cube(cube, (fs::path(dir) / name).string());
    files.push_back(name);
  }
  manifest["files"] = files;
  std::ofstream out(fs::path(dir) / (prefix + "_apertures.json"));
  out << manifest.dump(2) << "\n";
}

CodedApertureStack load_apertures(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open aperture manifest: " + manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(in);
  const int rows = manifest.at("rows"), cols = manifest.at("cols"),
            bands = manifest.at("bands"), shots = manifest.at("W");
  CodedApertureStack stack(rows, cols, bands, shots);
  const auto dir = fs::path(manifest_path).parent_path();
  const auto files = manifest.at("files").get<std::vector<std::string>>();
  require(static_cast<int>(files.size()) == shots, "aperture manifest shot count mismatch");
  for (int w = 0; w < shots; ++w) {
    SpectralCube cube = read_cube((dir / files[static_cast<std::size_t>(w)]).string());
    require(cube.rows == rows && cube.cols == cols && cube.bands == bands,
            "aperture shot dimensions disagree with manifest");
    for (int l = 0; l < bands; ++l)
      for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
          const double v = cube(i, j, l);
          require(v == 0.0 || v == 1.0, "aperture mask is not binary");
          stack(w, i, j, l) = v;
        }
  }
  return stack;
}

}  // namespace hsfuse

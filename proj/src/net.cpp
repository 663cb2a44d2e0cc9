#include "hsfuse/net.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace hsfuse {

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr char kCheckpointMagic[4] = {'L', 'N', 'C', 'K'};
}  // namespace

LadmmNetParams init_params(int rows, int cols, int bands, int feature_maps,
                           int depth, std::uint64_t seed) {
  require(depth >= 1, "network depth must be at least 1");
  require(feature_maps >= 1, "feature-map count must be at least 1");
  require(rows >= 1 && cols >= 1 && bands >= 1, "invalid network dimensions");
  LadmmNetParams params;
  params.rows = rows;
  params.cols = cols;
  params.bands = bands;
  params.feature_maps = feature_maps;
  params.layers.reserve(static_cast<std::size_t>(depth));
  for (int k = 0; k < depth; ++k) {
    LayerParams layer;
    layer.nft = xavier_conv_params(feature_maps, bands, seed + 2 * static_cast<std::uint64_t>(k));
    layer.nit = xavier_conv_params(feature_maps, bands,
                                   seed + 2 * static_cast<std::uint64_t>(k) + 1);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

Eigen::ArrayXd net_init_f0(const MeasurementSet& meas) {
  require(meas.primary != nullptr, "measurement set lacks a primary operator");
  if (meas.secondary == nullptr) return meas.primary->adjoint(meas.y_primary);
  return 0.5 * meas.primary->adjoint(meas.y_primary) +
         0.5 * meas.secondary->adjoint(meas.y_secondary);
}

Eigen::ArrayXd au_forward(const Eigen::ArrayXd& f_prev, const Eigen::ArrayXd& r_prev,
                          const MeasurementSet& meas, const LayerParams& layer) {
  require(layer.alpha != 0.0, "singular step: alpha is zero");
  Eigen::ArrayXd grad =
      meas.primary->adjoint(meas.primary->forward(f_prev) - meas.y_primary);
  if (meas.secondary)
    grad += layer.lambda1 *
            meas.secondary->adjoint(meas.secondary->forward(f_prev) - meas.y_secondary);
  grad += layer.rho * r_prev;
  return f_prev - grad / layer.alpha;
}

NruOutputs nru_forward(const Eigen::ArrayXd& f_k, const Eigen::ArrayXd& d_prev,
                       double soft_lambda, const SparsifyingTransform& transform) {
  NruOutputs out;
  const Eigen::ArrayXd gf = transform.forward(f_k);
  require(gf.size() == d_prev.size(), "multiplier shape disagrees with transform output");
  const Eigen::ArrayXd u = gf + d_prev;
  out.b = soft_threshold_unchecked(u, soft_lambda);
  out.d = u - out.b;  // d_prev + gf - b
  out.r = transform.inverse(gf + out.d - out.b);
  return out;
}

Eigen::ArrayXd net_forward(const LadmmNetParams& params, const MeasurementSet& meas,
                           NetTrace* trace, const SparsifyingTransform* fixed_transform) {
  require(!params.layers.empty(), "network has no layers");
  Eigen::ArrayXd f = net_init_f0(meas);
  require(f.size() == static_cast<Eigen::Index>(params.rows) * params.cols * params.bands,
          "network dimensions disagree with operators");
  Eigen::ArrayXd d = Eigen::ArrayXd::Zero(f.size());
  Eigen::ArrayXd r = Eigen::ArrayXd::Zero(f.size());
  for (const LayerParams& layer : params.layers) {
    f = au_forward(f, r, meas, layer);
    NruOutputs nru;
    if (fixed_transform) {
      nru = nru_forward(f, d, layer.soft_lambda, *fixed_transform);
    } else {
      ConvTransformPair pair(layer.nft, layer.nit, params.rows, params.cols);
      nru = nru_forward(f, d, layer.soft_lambda, pair);
    }
    if (trace) {
      trace->f.push_back(f);
      trace->gf.push_back(fixed_transform
                              ? fixed_transform->forward(f)
                              : conv_transform_apply(layer.nft, f, params.rows, params.cols));
    }
    d = std::move(nru.d);
    r = std::move(nru.r);
  }
  return f;
}

MeasurementSet fusion_measurements(const DualArmSystem& ops, const ShotStack& y_hs,
                                   const ShotStack& y_ms) {
  MeasurementSet meas;
  meas.primary = &ops.hs;
  meas.secondary = &ops.ms;
  meas.y_primary = y_hs.data;
  meas.y_secondary = y_ms.data;
  return meas;
}

SpectralCube net_fuse(const LadmmNetParams& params, const DualArmSystem& ops,
                      const ShotStack& y_hs, const ShotStack& y_ms) {
  const MeasurementSet meas = fusion_measurements(ops, y_hs, y_ms);
  SpectralCube out(params.rows, params.cols, params.bands);
  out.data = net_forward(params, meas);
  return out;
}

void save_checkpoint(const LadmmNetParams& params, const std::string& path) {
  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["rows"] = params.rows;
  header["cols"] = params.cols;
  header["bands"] = params.bands;
  header["feature_maps"] = params.feature_maps;
  header["depth"] = params.depth();
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create checkpoint: " + path);
  out.write(kCheckpointMagic, 4);
  const std::uint32_t len = static_cast<std::uint32_t>(head.size());
  out.write(reinterpret_cast<const char*>(&len), 4);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  auto put = [&out](const double* p, Eigen::Index n) {
    out.write(reinterpret_cast<const char*>(p),
              static_cast<std::streamsize>(n * static_cast<Eigen::Index>(sizeof(double))));
  };
  for (const LayerParams& layer : params.layers) {
    const double scalars[4] = {layer.alpha, layer.rho, layer.lambda1, layer.soft_lambda};
    put(scalars, 4);
    put(layer.nft.kernel1.w.data(), layer.nft.kernel1.w.size());
    put(layer.nft.kernel2.w.data(), layer.nft.kernel2.w.size());
    put(layer.nit.kernel1.w.data(), layer.nit.kernel1.w.size());
    put(layer.nit.kernel2.w.data(), layer.nit.kernel2.w.size());
  }
  if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

LadmmNetParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 4);
  std::string head(len, '\0');
  in.read(head.data(), len);
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  const nlohmann::json header = nlohmann::json::parse(head);
  if (header.at("version").get<std::uint32_t>() != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version in " + path);

  LadmmNetParams params;
  params.rows = header.at("rows");
  params.cols = header.at("cols");
  params.bands = header.at("bands");
  params.feature_maps = header.at("feature_maps");
  const int depth = header.at("depth");
  require(depth >= 1, "checkpoint depth must be at least 1");
  auto get = [&in, &path](double* p, Eigen::Index n) {
    in.read(reinterpret_cast<char*>(p),
            static_cast<std::streamsize>(n * static_cast<Eigen::Index>(sizeof(double))));
    if (!in) throw std::runtime_error("checkpoint payload does not match header: " + path);
  };
  for (int k = 0; k < depth; ++k) {
    LayerParams layer;
    layer.nft = ConvTransformParams(params.feature_maps, params.bands);
    layer.nit = ConvTransformParams(params.feature_maps, params.bands);
    double scalars[4];
    get(scalars, 4);
    layer.alpha = scalars[0];
    layer.rho = scalars[1];
    layer.lambda1 = scalars[2];
    layer.soft_lambda = scalars[3];
    get(layer.nft.kernel1.w.data(), layer.nft.kernel1.w.size());
    get(layer.nft.kernel2.w.data(), layer.nft.kernel2.w.size());
    get(layer.nit.kernel1.w.data(), layer.nit.kernel1.w.size());
    get(layer.nit.kernel2.w.data(), layer.nit.kernel2.w.size());
    params.layers.push_back(std::move(layer));
  }
  char extra;
  if (in.read(&extra, 1))
    throw std::runtime_error("checkpoint payload does not match header: " + path);
  return params;
}

}  // namespace hsfuse

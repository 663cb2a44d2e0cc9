#include "hsfuse/training.hpp"

#include <cmath>
#include <numeric>

#include "hsfuse/rng.hpp"

namespace hsfuse {

namespace {

// FNV-1a over activation decisions.
void hash_bool(std::uint64_t& h, bool b) {
  h ^= b ? 0x9eULL : 0x31ULL;
  h *= 0x100000001b3ULL;
}

struct LayerCache {
  Eigen::ArrayXd f_prev;
  Eigen::ArrayXd r_prev;
  Eigen::ArrayXd ms_part;  // secondary-arm adjoint residual at f_prev
  Eigen::ArrayXd v;        // bracket multiplied by 1/alpha in the AU
  Eigen::ArrayXd f;        // f_k
  ConvTransformCache nft;
  Eigen::ArrayXd u;        // G(f_k) + d_prev
  Eigen::ArrayXd b;
  ConvTransformCache nit_r;    // r_k = Ginv(G(f_k) + d_k - b)
  ConvTransformCache nit_inv;  // Ginv(G(f_k)) for the invertibility term
  Eigen::ArrayXd inv_err;
};

struct ForwardTape {
  std::vector<LayerCache> layers;
  Eigen::ArrayXd f_final;
};

ForwardTape run_forward(const LadmmNetParams& params, const MeasurementSet& meas,
                        std::uint64_t* pattern) {
  require(!params.layers.empty(), "network has no layers");
  const int rows = params.rows, cols = params.cols;
  ForwardTape tape;
  tape.layers.resize(params.layers.size());
  std::uint64_t h = 0xcbf29ce484222325ULL;

  Eigen::ArrayXd f = net_init_f0(meas);
  Eigen::ArrayXd d = Eigen::ArrayXd::Zero(f.size());
  Eigen::ArrayXd r = Eigen::ArrayXd::Zero(f.size());
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    const LayerParams& layer = params.layers[k];
    LayerCache& cache = tape.layers[k];
    require(layer.alpha != 0.0, "singular step: alpha is zero");

    cache.f_prev = f;
    cache.r_prev = r;
    Eigen::ArrayXd v = meas.primary->adjoint(meas.primary->forward(f) - meas.y_primary);
    if (meas.secondary) {
      cache.ms_part =
          meas.secondary->adjoint(meas.secondary->forward(f) - meas.y_secondary);
      v += layer.lambda1 * cache.ms_part;
    }
    v += layer.rho * r;
    cache.v = v;
    f -= v / layer.alpha;
    cache.f = f;

    const Eigen::ArrayXd gf =
        conv_transform_apply(layer.nft, f, rows, cols, &cache.nft);
    cache.u = gf + d;
    cache.b = soft_threshold_unchecked(cache.u, layer.soft_lambda);
    d = cache.u - cache.b;
    const Eigen::ArrayXd t = gf + cache.u - 2.0 * cache.b;
    r = conv_transform_apply(layer.nit, t, rows, cols, &cache.nit_r);
    cache.inv_err =
        conv_transform_apply(layer.nit, gf, rows, cols, &cache.nit_inv) - f;

    if (pattern) {
      for (Eigen::Index i = 0; i < cache.nft.pre_act.size(); ++i)
        hash_bool(h, cache.nft.pre_act[i] > 0.0);
      for (Eigen::Index i = 0; i < cache.u.size(); ++i)
        hash_bool(h, std::abs(cache.u[i]) > layer.soft_lambda);
      for (Eigen::Index i = 0; i < cache.nit_r.pre_act.size(); ++i)
        hash_bool(h, cache.nit_r.pre_act[i] > 0.0);
      for (Eigen::Index i = 0; i < cache.nit_inv.pre_act.size(); ++i)
        hash_bool(h, cache.nit_inv.pre_act[i] > 0.0);
    }
  }
  tape.f_final = std::move(f);
  if (pattern) *pattern = h;
  return tape;
}

LossBreakdown loss_from_tape(const ForwardTape& tape, const Eigen::ArrayXd& truth,
                             double gamma) {
  LossBreakdown out;
  out.data = (tape.f_final - truth).square().sum();
  for (const LayerCache& cache : tape.layers) out.inv += cache.inv_err.square().sum();
  out.inv /= static_cast<double>(tape.layers.size());
  out.total = out.data + gamma * out.inv;
  return out;
}

void accumulate(GradientSet& into, const GradientSet& g, double scale) {
  for (std::size_t k = 0; k < into.layers.size(); ++k) {
    into.layers[k].alpha += scale * g.layers[k].alpha;
    into.layers[k].rho += scale * g.layers[k].rho;
    into.layers[k].lambda1 += scale * g.layers[k].lambda1;
    into.layers[k].soft_lambda += scale * g.layers[k].soft_lambda;
    into.layers[k].nft.kernel1.w += scale * g.layers[k].nft.kernel1.w;
    into.layers[k].nft.kernel2.w += scale * g.layers[k].nft.kernel2.w;
    into.layers[k].nit.kernel1.w += scale * g.layers[k].nit.kernel1.w;
    into.layers[k].nit.kernel2.w += scale * g.layers[k].nit.kernel2.w;
  }
}

double squared_norm(const GradientSet& g) {
  double s = 0.0;
  for (const LayerParams& layer : g.layers) {
    s += layer.alpha * layer.alpha + layer.rho * layer.rho +
         layer.lambda1 * layer.lambda1 + layer.soft_lambda * layer.soft_lambda;
    s += layer.nft.kernel1.w.square().sum() + layer.nft.kernel2.w.square().sum();
    s += layer.nit.kernel1.w.square().sum() + layer.nit.kernel2.w.square().sum();
  }
  return s;
}

void scale_gradients(GradientSet& g, double scale) {
  for (LayerParams& layer : g.layers) {
    layer.alpha *= scale;
    layer.rho *= scale;
    layer.lambda1 *= scale;
    layer.soft_lambda *= scale;
    layer.nft.kernel1.w *= scale;
    layer.nft.kernel2.w *= scale;
    layer.nit.kernel1.w *= scale;
    layer.nit.kernel2.w *= scale;
  }
}

}  // namespace

GradientSet zero_gradients(const LadmmNetParams& params) {
  GradientSet g;
  g.rows = params.rows;
  g.cols = params.cols;
  g.bands = params.bands;
  g.feature_maps = params.feature_maps;
  g.layers.resize(params.layers.size());
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    LayerParams& layer = g.layers[k];
    layer.alpha = layer.rho = layer.lambda1 = layer.soft_lambda = 0.0;
    layer.nft = ConvTransformParams(params.feature_maps, params.bands);
    layer.nit = ConvTransformParams(params.feature_maps, params.bands);
  }
  return g;
}

LossBreakdown loss(const LadmmNetParams& params, const MeasurementSet& meas,
                   const Eigen::ArrayXd& truth, double gamma,
                   std::uint64_t* activation_pattern) {
  require(truth.size() == static_cast<Eigen::Index>(params.rows) * params.cols * params.bands,
          "truth shape disagrees with network dimensions");
  const ForwardTape tape = run_forward(params, meas, activation_pattern);
  return loss_from_tape(tape, truth, gamma);
}

GradientSet backward(const LadmmNetParams& params, const MeasurementSet& meas,
                     const Eigen::ArrayXd& truth, double gamma,
                     LossBreakdown* loss_out) {
  const int rows = params.rows, cols = params.cols;
  const ForwardTape tape = run_forward(params, meas, nullptr);
  const LossBreakdown losses = loss_from_tape(tape, truth, gamma);
  if (!std::isfinite(losses.total))
    throw std::runtime_error("non-finite loss: the unrolled iteration diverged");
  if (loss_out) *loss_out = losses;

  GradientSet grads = zero_gradients(params);
  const double inv_scale = 2.0 * gamma / static_cast<double>(params.layers.size());
  const Eigen::Index n = tape.f_final.size();

  Eigen::ArrayXd fbar = 2.0 * (tape.f_final - truth);
  Eigen::ArrayXd dbar = Eigen::ArrayXd::Zero(n);
  Eigen::ArrayXd rbar = Eigen::ArrayXd::Zero(n);

  for (int k = static_cast<int>(params.layers.size()) - 1; k >= 0; --k) {
    const LayerParams& layer = params.layers[static_cast<std::size_t>(k)];
    const LayerCache& cache = tape.layers[static_cast<std::size_t>(k)];
    LayerParams& g = grads.layers[static_cast<std::size_t>(k)];

    // r_k = Ginv(t), t = gf + u - 2 b.
    const Eigen::ArrayXd tbar =
        conv_transform_backward(layer.nit, cache.nit_r, rows, cols, rbar, g.nit);
    Eigen::ArrayXd gfbar = tbar;
    Eigen::ArrayXd ubar = tbar;
    Eigen::ArrayXd bbar = -2.0 * tbar;

    // d_k = u - b.
    ubar += dbar;
    bbar -= dbar;

    // b = S(u, soft_lambda); slope 0 in the dead zone and at the kink.
    const Eigen::ArrayXd zero = Eigen::ArrayXd::Zero(n);
    const auto active = cache.u.abs() > layer.soft_lambda;
    ubar += active.select(bbar, zero);
    g.soft_lambda += (active.select(-cache.u.sign() * bbar, zero)).sum();

    // u = gf + d_prev.
    gfbar += ubar;
    Eigen::ArrayXd dbar_prev = std::move(ubar);

    // Invertibility branch: (gamma/K) ||Ginv(gf) - f_k||^2.
    const Eigen::ArrayXd ebar = inv_scale * cache.inv_err;
    gfbar += conv_transform_backward(layer.nit, cache.nit_inv, rows, cols, ebar, g.nit);
    fbar -= ebar;

    // gf = G(f_k).
    fbar += conv_transform_backward(layer.nft, cache.nft, rows, cols, gfbar, g.nft);

    // AU: f_k = f_prev - v / alpha with
    // v = A1^T(A1 f_prev - y1) + lambda1 * ms_part + rho * r_prev.
    const double inv_alpha = 1.0 / layer.alpha;
    g.alpha += inv_alpha * inv_alpha * (fbar * cache.v).sum();
    if (meas.secondary) g.lambda1 -= inv_alpha * (fbar * cache.ms_part).sum();
    g.rho -= inv_alpha * (fbar * cache.r_prev).sum();

    rbar = -(layer.rho * inv_alpha) * fbar;
    Eigen::ArrayXd fprev_bar = meas.primary->adjoint(meas.primary->forward(fbar));
    if (meas.secondary)
      fprev_bar += layer.lambda1 * meas.secondary->adjoint(meas.secondary->forward(fbar));
    fbar -= inv_alpha * fprev_bar;
    dbar = std::move(dbar_prev);
  }
  return grads;
}

FiniteDiffReport finite_diff_check(const LadmmNetParams& params,
                                   const MeasurementSet& meas,
                                   const Eigen::ArrayXd& truth, double gamma,
                                   double step, double tol) {
  require(step > 0.0, "finite-difference step must be positive");
  const GradientSet analytic = backward(params, meas, truth, gamma);
  std::uint64_t base_pattern = 0;
  (void)loss(params, meas, truth, gamma, &base_pattern);

  FiniteDiffReport report;
  LadmmNetParams work = params;
  auto check_value = [&](double* slot, double analytic_grad, FiniteDiffGroup& group) {
    const double saved = *slot;
    std::uint64_t plus_pattern = 0, minus_pattern = 0;
    *slot = saved + step;
    const double lp = loss(work, meas, truth, gamma, &plus_pattern).total;
    *slot = saved - step;
    const double lm = loss(work, meas, truth, gamma, &minus_pattern).total;
    *slot = saved;
    // A flipped activation decision means the parameter sits next to a
    // ReLU or soft-threshold kink; central differences are invalid there.
    if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
      ++group.skipped;
      return;
    }
    const double numeric = (lp - lm) / (2.0 * step);
    const double denom = std::max({std::abs(numeric), std::abs(analytic_grad), 1e-8});
    group.max_rel_err = std::max(group.max_rel_err, std::abs(numeric - analytic_grad) / denom);
    ++group.checked;
  };
  auto check_kernel = [&](Eigen::ArrayXd& w, const Eigen::ArrayXd& gw,
                          FiniteDiffGroup& group) {
    for (Eigen::Index i = 0; i < w.size(); ++i) check_value(&w[i], gw[i], group);
  };

  for (std::size_t k = 0; k < work.layers.size(); ++k) {
    LayerParams& layer = work.layers[k];
    const LayerParams& g = analytic.layers[k];
    const std::string tag = "layer" + std::to_string(k) + ".";
    struct ScalarSlot {
      const char* name;
      double* slot;
      double grad;
    } scalars[] = {{"alpha", &layer.alpha, g.alpha},
                   {"rho", &layer.rho, g.rho},
                   {"lambda1", &layer.lambda1, g.lambda1},
                   {"soft_lambda", &layer.soft_lambda, g.soft_lambda}};
    for (const auto& s : scalars) {
      FiniteDiffGroup group;
      group.name = tag + s.name;
      check_value(s.slot, s.grad, group);
      group.pass = group.max_rel_err <= tol;
      report.groups.push_back(group);
    }
    struct KernelSlot {
      const char* name;
      Eigen::ArrayXd* w;
      const Eigen::ArrayXd* gw;
    } kernels[] = {{"nft.kernel1", &layer.nft.kernel1.w, &g.nft.kernel1.w},
                   {"nft.kernel2", &layer.nft.kernel2.w, &g.nft.kernel2.w},
                   {"nit.kernel1", &layer.nit.kernel1.w, &g.nit.kernel1.w},
                   {"nit.kernel2", &layer.nit.kernel2.w, &g.nit.kernel2.w}};
    for (const auto& s : kernels) {
      FiniteDiffGroup group;
      group.name = tag + s.name;
      check_kernel(*s.w, *s.gw, group);
      group.pass = group.max_rel_err <= tol;
      report.groups.push_back(group);
    }
  }
  for (const auto& group : report.groups) report.pass = report.pass && group.pass;
  return report;
}

AdamState make_adam_state(const LadmmNetParams& params) {
  return {zero_gradients(params), zero_gradients(params)};
}

void adam_step(LadmmNetParams& params, const GradientSet& grads, AdamState& moments,
               int t, double learning_rate) {
  require(t >= 1, "Adam step index is 1-based");
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double bc1 = 1.0 - std::pow(beta1, t);
  const double bc2 = 1.0 - std::pow(beta2, t);
  auto update = [&](double& p, double g, double& m, double& v) {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    p -= learning_rate * (m / bc1) / (std::sqrt(v / bc2) + eps);
  };
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    LayerParams& p = params.layers[k];
    const LayerParams& g = grads.layers[k];
    LayerParams& m = moments.m.layers[k];
    LayerParams& v = moments.v.layers[k];
    update(p.alpha, g.alpha, m.alpha, v.alpha);
    update(p.rho, g.rho, m.rho, v.rho);
    update(p.lambda1, g.lambda1, m.lambda1, v.lambda1);
    update(p.soft_lambda, g.soft_lambda, m.soft_lambda, v.soft_lambda);
    auto update_kernel = [&](Eigen::ArrayXd& pw, const Eigen::ArrayXd& gw,
                             Eigen::ArrayXd& mw, Eigen::ArrayXd& vw) {
      for (Eigen::Index i = 0; i < pw.size(); ++i) update(pw[i], gw[i], mw[i], vw[i]);
    };
    update_kernel(p.nft.kernel1.w, g.nft.kernel1.w, m.nft.kernel1.w, v.nft.kernel1.w);
    update_kernel(p.nft.kernel2.w, g.nft.kernel2.w, m.nft.kernel2.w, v.nft.kernel2.w);
    update_kernel(p.nit.kernel1.w, g.nit.kernel1.w, m.nit.kernel1.w, v.nit.kernel1.w);
    update_kernel(p.nit.kernel2.w, g.nit.kernel2.w, m.nit.kernel2.w, v.nit.kernel2.w);
  }
}

TrainResult train(LadmmNetParams& params, const LinearOperator* primary,
                  const LinearOperator* secondary,
                  const std::vector<TrainingSample>& samples,
                  const TrainingConfig& cfg) {
  require(!samples.empty(), "training set is empty");
  require(cfg.learning_rate >= 0.0, "negative learning rate");
  require(cfg.batch_size >= 1, "batch size must be at least 1");

  TrainResult result;
  Rng shuffle_rng(cfg.seed);
  AdamState moments = make_adam_state(params);
  int adam_t = 0;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const LadmmNetParams snapshot = params;
    shuffle_rng.shuffle(order);
    EpochStats stats;
    GradientSet batch_grads = zero_gradients(params);
    int in_batch = 0;
    bool finite = true;

    auto flush_batch = [&]() {
      if (in_batch == 0) return;
      scale_gradients(batch_grads, 1.0 / in_batch);
      if (cfg.grad_clip > 0.0) {
        const double norm = std::sqrt(squared_norm(batch_grads));
        if (norm > cfg.grad_clip) scale_gradients(batch_grads, cfg.grad_clip / norm);
      }
      if (cfg.learning_rate > 0.0) adam_step(params, batch_grads, moments, ++adam_t, cfg.learning_rate);
      batch_grads = zero_gradients(params);
      in_batch = 0;
    };

    for (std::size_t idx : order) {
      const TrainingSample& sample = samples[idx];
      MeasurementSet meas;
      meas.primary = primary;
      meas.secondary = secondary;
      meas.y_primary = sample.y_primary;
      if (secondary) meas.y_secondary = sample.y_secondary;
      LossBreakdown sample_loss;
      GradientSet g;
      try {
        g = backward(params, meas, sample.truth, cfg.gamma, &sample_loss);
      } catch (const std::runtime_error&) {
        finite = false;
        break;
      }
      if (!std::isfinite(sample_loss.total)) {
        finite = false;
        break;
      }
      stats.data_loss += sample_loss.data;
      stats.inv_loss += sample_loss.inv;
      stats.total_loss += sample_loss.total;
      accumulate(batch_grads, g, 1.0);
      if (++in_batch == cfg.batch_size) flush_batch();
    }
    if (!finite) {
      params = snapshot;
      result.diverged = true;
      break;
    }
    flush_batch();
    const double inv_count = 1.0 / static_cast<double>(samples.size());
    stats.data_loss *= inv_count;
    stats.inv_loss *= inv_count;
    stats.total_loss *= inv_count;
    result.history.push_back(stats);
  }
  return result;
}

}  // namespace hsfuse

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hsfuse/solver.hpp"
#include "hsfuse/synthetic.hpp"
#include "support.hpp"

using namespace hsfuse;

namespace {

struct Problem {
  CodedApertureStack hs_ap;
  CodedApertureStack ms_ap;
  DualArmSystem ops;
  Eigen::MatrixXd hs_dense;
  Eigen::MatrixXd ms_dense;
  int m, n, l;

  Problem(int rows, int cols, int bands, int p, int q, int w_hs, int w_ms,
          std::uint64_t seed)
      : hs_ap(design_apertures(rows / p, cols / p, bands, w_hs, seed)),
        ms_ap(design_apertures(rows, cols, bands / q, w_ms, seed + 1)),
        ops{CassiOperator(Arm::HS, hs_ap, p, 1, rows, cols, bands),
            CassiOperator(Arm::MS, ms_ap, 1, q, rows, cols, bands)},
        hs_dense(testing::dense_hs_matrix(hs_ap, p)),
        ms_dense(testing::dense_ms_matrix(ms_ap, q)),
        m(rows), n(cols), l(bands) {}
};

}  // namespace

TEST_CASE("objective matches the dense formula") {
  Problem pr(8, 8, 4, 2, 2, 2, 2, 3);
  const SpectralCube truth = testing::random_cube(8, 8, 4, 11);
  const SpectralCube f = testing::random_cube(8, 8, 4, 12);
  const ShotStack y_hs = hs_forward(truth, pr.ops.hs);
  const ShotStack y_ms = ms_forward(truth, pr.ops.ms);
  const DctTransform psi(8, 8, 4);
  SolverConfig cfg;
  cfg.lambda1 = 0.7;
  cfg.lambda2 = 0.02;

  const double got = objective(f, y_hs, y_ms, pr.ops, psi, cfg);
  const Eigen::VectorXd rhs = pr.hs_dense * f.data.matrix();
  const Eigen::VectorXd rms = pr.ms_dense * f.data.matrix();
  const double expected =
      0.5 * (y_hs.data - rhs.array()).square().sum() +
      0.5 * cfg.lambda1 * (y_ms.data - rms.array()).square().sum() +
      cfg.lambda2 * psi.forward(f.data).abs().sum();
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));

  SUBCASE("zero cube against zero measurements costs nothing") {
    SpectralCube zero(8, 8, 4);
    ShotStack zh(y_hs.rows, y_hs.cols, y_hs.shots);
    ShotStack zm(y_ms.rows, y_ms.cols, y_ms.shots);
    CHECK(objective(zero, zh, zm, pr.ops, psi, cfg) == 0.0);
  }
}

TEST_CASE("gradient step fixed point at a consistent iterate") {
  Problem pr(8, 8, 4, 2, 2, 2, 2, 5);
  const SpectralCube truth = testing::random_cube(8, 8, 4, 13);
  const ShotStack y_hs = hs_forward(truth, pr.ops.hs);
  const ShotStack y_ms = ms_forward(truth, pr.ops.ms);
  const DctTransform psi(8, 8, 4);
  SolverConfig cfg;
  cfg.alpha = 3.0;

  // With b = Psi f + d the regularization pull also vanishes.
  FeatureCube d(8, 8, 4);
  d.data = testing::random_array(8 * 8 * 4, 14);
  FeatureCube b(8, 8, 4);
  b.data = psi.forward(truth.data) + d.data;
  const SpectralCube next = gradient_step(truth, b, d, y_hs, y_ms, pr.ops, psi, cfg);
  CHECK((next.data - truth.data).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradient step matches the dense oracle") {
  Problem pr(8, 8, 4, 2, 2, 2, 2, 7);
  const SpectralCube truth = testing::random_cube(8, 8, 4, 15);
  const SpectralCube f = testing::random_cube(8, 8, 4, 16);
  const ShotStack y_hs = hs_forward(truth, pr.ops.hs);
  const ShotStack y_ms = ms_forward(truth, pr.ops.ms);
  const DctTransform psi(8, 8, 4);
  SolverConfig cfg;
  cfg.alpha = 2.5;
  cfg.rho = 0.3;
  cfg.lambda1 = 0.8;

  FeatureCube b(8, 8, 4), d(8, 8, 4);
  b.data = testing::random_array(8 * 8 * 4, 17);
  d.data = testing::random_array(8 * 8 * 4, 18);

  const SpectralCube got = gradient_step(f, b, d, y_hs, y_ms, pr.ops, psi, cfg);
  const Eigen::ArrayXd grad =
      (pr.hs_dense.transpose() * (pr.hs_dense * f.data.matrix() - y_hs.data.matrix()))
          .array() +
      cfg.lambda1 *
          (pr.ms_dense.transpose() * (pr.ms_dense * f.data.matrix() - y_ms.data.matrix()))
              .array() +
      cfg.rho * psi.inverse(psi.forward(f.data) - b.data + d.data);
  CHECK((got.data - (f.data - grad / cfg.alpha)).abs().maxCoeff() <= 1e-10);
}

TEST_CASE("one ladmm sweep matches a hand-stepped oracle") {
  Problem pr(8, 8, 4, 2, 2, 2, 2, 9);
  const SpectralCube truth = testing::random_cube(8, 8, 4, 19);
  const ShotStack y_hs = hs_forward(truth, pr.ops.hs);
  const ShotStack y_ms = ms_forward(truth, pr.ops.ms);
  const DctTransform psi(8, 8, 4);
  SolverConfig cfg;
  cfg.alpha = 3.0;
  cfg.rho = 0.2;
  cfg.lambda1 = 0.6;
  cfg.lambda2 = 0.01;

  FusionState state;
  state.f = testing::random_cube(8, 8, 4, 20);
  state.b = FeatureCube(8, 8, 4);
  state.d = FeatureCube(8, 8, 4);
  state.b.data = testing::random_array(8 * 8 * 4, 21);
  state.d.data = testing::random_array(8 * 8 * 4, 22);

  const FusionState next = ladmm_iterate(state, y_hs, y_ms, pr.ops, psi, cfg);

  // Oracle: dense gradient step, threshold at lambda2/rho, multiplier update.
  const Eigen::ArrayXd grad =
      (pr.hs_dense.transpose() *
       (pr.hs_dense * state.f.data.matrix() - y_hs.data.matrix()))
          .array() +
      cfg.lambda1 * (pr.ms_dense.transpose() *
                     (pr.ms_dense * state.f.data.matrix() - y_ms.data.matrix()))
                        .array() +
      cfg.rho * psi.inverse(psi.forward(state.f.data) - state.b.data + state.d.data);
  const Eigen::ArrayXd f1 = state.f.data - grad / cfg.alpha;
  const Eigen::ArrayXd b1 =
      soft_threshold(psi.forward(f1) + state.d.data, cfg.lambda2 / cfg.rho);
  const Eigen::ArrayXd d1 = state.d.data + psi.forward(f1) - b1;

  CHECK((next.f.data - f1).abs().maxCoeff() <= 1e-10);
  CHECK((next.b.data - b1).abs().maxCoeff() <= 1e-10);
  CHECK((next.d.data - d1).abs().maxCoeff() <= 1e-10);
  CHECK(next.objective ==
        doctest::Approx(objective(next.f, y_hs, y_ms, pr.ops, psi, cfg)));
}

TEST_CASE("init f0 averages the two adjoints") {
  Problem pr(8, 8, 4, 2, 2, 2, 2, 23);
  const SpectralCube truth = testing::random_cube(8, 8, 4, 24);
  const ShotStack y_hs = hs_forward(truth, pr.ops.hs);
  const ShotStack y_ms = ms_forward(truth, pr.ops.ms);
  const SpectralCube f0 = init_f0(y_hs, y_ms, pr.ops);
  const Eigen::ArrayXd expected =
      0.5 * (pr.hs_dense.transpose() * y_hs.data.matrix()).array() +
      0.5 * (pr.ms_dense.transpose() * y_ms.data.matrix()).array();
  CHECK((f0.data - expected).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("step scale estimate dominates the true operator norm") {
  Problem pr(8, 8, 4, 2, 2, 2, 2, 25);
  const double lambda1 = 0.9, rho = 0.15;
  const Eigen::MatrixXd gram =
      pr.hs_dense.transpose() * pr.hs_dense +
      lambda1 * pr.ms_dense.transpose() * pr.ms_dense;
  const double true_norm =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
  const double est = estimate_step_scale(pr.ops, lambda1, rho, 60);
  CHECK(est >= 0.99 * (true_norm + rho));
  CHECK(est <= 1.05 * (true_norm + rho));
}

TEST_CASE("ladmm solve recovers an invertible acquisition") {
  // q = 1 with W = L complementary shots observes every voxel exactly once,
  // so the data terms alone determine the cube; the solver should converge
  // to it closely despite the small l1 bias.
  const int m = 8, n = 8, l = 4;
  const CodedApertureStack hs_ap = design_apertures(m / 2, n / 2, l, 2, 31);
  const CodedApertureStack ms_ap = design_apertures(m, n, l, l, 32);
  DualArmSystem ops{CassiOperator(Arm::HS, hs_ap, 2, 1, m, n, l),
                    CassiOperator(Arm::MS, ms_ap, 1, 1, m, n, l)};
  const SpectralCube truth = synthetic_cube(m, n, l, 33, 3);
  const ShotStack y_hs = hs_forward(truth, ops.hs);
  const ShotStack y_ms = ms_forward(truth, ops.ms);

  SolverConfig cfg;
  cfg.lambda2 = 1e-5;
  cfg.max_iters = 2000;
  cfg.tol = 1e-10;
  std::vector<double> trace;
  const SpectralCube rec = ladmm_solve(y_hs, y_ms, ops, cfg, &trace);

  REQUIRE(!trace.empty());
  CHECK(trace.back() < trace.front());
  const double rmse = std::sqrt((rec.data - truth.data).square().mean());
  CHECK(rmse < 5e-3);
}

TEST_CASE("ladmm solve throws when the step scale is too small") {
  Problem pr(8, 8, 4, 2, 2, 2, 2, 41);
  const SpectralCube truth = testing::random_cube(8, 8, 4, 42);
  const ShotStack y_hs = hs_forward(truth, pr.ops.hs);
  const ShotStack y_ms = ms_forward(truth, pr.ops.ms);
  SolverConfig cfg;
  cfg.alpha = 1e-4;  // far below the Lipschitz bound: divergence
  cfg.max_iters = 5000;
  CHECK_THROWS_AS(ladmm_solve(y_hs, y_ms, pr.ops, cfg), std::runtime_error);
}

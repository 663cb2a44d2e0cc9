#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hsfuse/conv.hpp"
#include "hsfuse/transforms.hpp"
#include "support.hpp"

using namespace hsfuse;

TEST_CASE("soft threshold examples") {
  Eigen::ArrayXd x(5);
  x << -2.0, -0.5, 0.0, 0.5, 2.0;
  const Eigen::ArrayXd s = soft_threshold(x, 1.0);
  CHECK(s[0] == doctest::Approx(-1.0));
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 0.0);
  CHECK(s[3] == 0.0);
  CHECK(s[4] == doctest::Approx(1.0));
  CHECK((soft_threshold(x, 0.0) == x).all());
  CHECK_THROWS_AS(soft_threshold(x, -1e-9), std::invalid_argument);
}

TEST_CASE("soft threshold is a contraction and solves the prox problem") {
  const Eigen::ArrayXd x = testing::random_array(64, 5);
  const double lam = 0.3;
  const Eigen::ArrayXd s = soft_threshold(x, lam);
  CHECK((s.abs() <= x.abs() + 1e-15).all());
  CHECK((s * x >= 0.0).all());  // never flips sign
  // prox objective: 0.5 (u - x)^2 + lam |u| minimized at u = S(x),
  // verified against a dense grid per coordinate.
  for (int idx : {0, 7, 31, 63}) {
    const double xv = x[idx];
    auto obj = [&](double u) { return 0.5 * (u - xv) * (u - xv) + lam * std::abs(u); };
    double best = obj(s[idx]);
    for (double u = -3.0; u <= 3.0; u += 1e-3) CHECK(obj(u) >= best - 1e-12);
  }
}

TEST_CASE("dct matrix is orthonormal") {
  for (int n : {1, 2, 5, 8}) {
    const Eigen::MatrixXd c = dct_matrix(n);
    const Eigen::MatrixXd gram = c * c.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(n, n)).array().abs().maxCoeff() <= 1e-12);
  }
  // First row of the orthonormal DCT-II is the normalized constant atom.
  const Eigen::MatrixXd c = dct_matrix(4);
  for (int j = 0; j < 4; ++j) CHECK(c(0, j) == doctest::Approx(0.5));
}

TEST_CASE("3d dct concentrates a constant cube on the dc atom") {
  const int m = 4, n = 6, l = 3;
  SpectralCube cube(m, n, l);
  cube.data.setConstant(2.0);
  const DctTransform psi(m, n, l);
  const Eigen::ArrayXd coeffs = psi.forward(cube.data);
  CHECK(coeffs[0] == doctest::Approx(2.0 * std::sqrt(static_cast<double>(m) * n * l)));
  CHECK(coeffs.tail(coeffs.size() - 1).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("3d dct round trip, Parseval, and adjoint identity") {
  const int m = 8, n = 5, l = 4;
  const DctTransform psi(m, n, l);
  const SpectralCube cube = testing::random_cube(m, n, l, 21);
  const Eigen::ArrayXd coeffs = psi.forward(cube.data);
  CHECK((psi.inverse(coeffs) - cube.data).abs().maxCoeff() <= 1e-12);
  CHECK(coeffs.square().sum() == doctest::Approx(cube.data.square().sum()).epsilon(1e-12));
  // inverse == transpose of forward.
  const Eigen::ArrayXd u = testing::random_array(m * n * l, 3);
  const Eigen::ArrayXd v = testing::random_array(m * n * l, 4);
  CHECK((psi.forward(u) * v).sum() == doctest::Approx((u * psi.inverse(v)).sum()));
}

TEST_CASE("cube-level transform wrappers preserve shape") {
  const SpectralCube cube = testing::random_cube(6, 7, 3, 2);
  const DctTransform psi(6, 7, 3);
  const FeatureCube coeffs = psi.transform(cube);
  CHECK(coeffs.rows == 6);
  CHECK(coeffs.cols == 7);
  CHECK(coeffs.channels == 3);
  const SpectralCube back = psi.inverse_transform(coeffs);
  CHECK((back.data - cube.data).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("conv2d against the sextuple-loop oracle") {
  for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
    const int rows = 7, cols = 6, in_ch = 3, out_ch = 4;
    ConvKernel k(out_ch, in_ch);
    k.w = testing::random_array(k.w.size(), seed + 40);
    const Eigen::ArrayXd in =
        testing::random_array(static_cast<Eigen::Index>(rows) * cols * in_ch, seed + 41);
    const Eigen::ArrayXd fast = conv2d(in, rows, cols, k);
    const Eigen::ArrayXd slow = testing::naive_conv2d(in, rows, cols, k);
    CHECK((fast - slow).abs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("conv2d delta kernel is the identity") {
  ConvKernel k(2, 2);
  k.at(0, 0, 0, 0) = 1.0;
  k.at(1, 1, 0, 0) = 1.0;
  const Eigen::ArrayXd in = testing::random_array(5 * 4 * 2, 9);
  CHECK((conv2d(in, 5, 4, k) - in).abs().maxCoeff() == 0.0);
}

TEST_CASE("conv2d input gradient is the adjoint") {
  const int rows = 6, cols = 5, in_ch = 2, out_ch = 3;
  ConvKernel k(out_ch, in_ch);
  k.w = testing::random_array(k.w.size(), 50);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::ArrayXd x = testing::random_array(
        static_cast<Eigen::Index>(rows) * cols * in_ch, 100 + static_cast<std::uint64_t>(trial));
    const Eigen::ArrayXd g = testing::random_array(
        static_cast<Eigen::Index>(rows) * cols * out_ch, 200 + static_cast<std::uint64_t>(trial));
    const double lhs = (conv2d(x, rows, cols, k) * g).sum();
    const double rhs = (x * conv2d_input_grad(g, rows, cols, k)).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("conv2d kernel gradient matches the bilinear form") {
  // <gout, conv_k(in)> is linear in k, so its gradient g satisfies
  // <g, k> = <gout, conv_k(in)> exactly for every k.
  const int rows = 5, cols = 7, in_ch = 3, out_ch = 2;
  const Eigen::ArrayXd in = testing::random_array(
      static_cast<Eigen::Index>(rows) * cols * in_ch, 61);
  const Eigen::ArrayXd gout = testing::random_array(
      static_cast<Eigen::Index>(rows) * cols * out_ch, 62);
  ConvKernel grad(out_ch, in_ch);
  conv2d_kernel_grad(in, gout, rows, cols, grad);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ConvKernel k(out_ch, in_ch);
    k.w = testing::random_array(k.w.size(), 70 + seed);
    CHECK((grad.w * k.w).sum() ==
          doctest::Approx((conv2d(in, rows, cols, k) * gout).sum()).epsilon(1e-10));
  }
}

TEST_CASE("conv transform matches the naive composition") {
  const ConvTransformParams params = xavier_conv_params(4, 3, 8);
  const Eigen::ArrayXd in = testing::random_array(6 * 6 * 3, 9);
  const Eigen::ArrayXd fast = conv_transform_apply(params, in, 6, 6);
  const Eigen::ArrayXd slow = testing::naive_conv_transform(params, in, 6, 6);
  CHECK((fast - slow).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("conv transform cache holds the pass intermediates") {
  const ConvTransformParams params = xavier_conv_params(2, 2, 1);
  const Eigen::ArrayXd in = testing::random_array(4 * 4 * 2, 11);
  ConvTransformCache cache;
  const Eigen::ArrayXd out = conv_transform_apply(params, in, 4, 4, &cache);
  CHECK((cache.input - in).abs().maxCoeff() == 0.0);
  CHECK((cache.hidden - cache.pre_act.max(0.0)).abs().maxCoeff() == 0.0);
  CHECK((cache.output - out).abs().maxCoeff() == 0.0);
}

TEST_CASE("identity conv params reproduce nonnegative input") {
  const ConvTransformParams id = identity_conv_params(3);
  const SpectralCube cube = testing::random_cube(5, 5, 3, 13);  // entries in [0,1)
  const Eigen::ArrayXd out = conv_transform_apply(id, cube.data, 5, 5);
  CHECK((out - cube.data).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("conv transform is positively homogeneous") {
  const ConvTransformParams params = xavier_conv_params(5, 2, 17);
  const Eigen::ArrayXd in = testing::random_array(4 * 5 * 2, 18);
  const Eigen::ArrayXd base = conv_transform_apply(params, in, 4, 5);
  const Eigen::ArrayXd scaled = conv_transform_apply(params, 2.5 * in, 4, 5);
  CHECK((scaled - 2.5 * base).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("xavier initialization bounds and determinism") {
  const int f = 4, l = 8;
  const ConvTransformParams a = xavier_conv_params(f, l, 99);
  const ConvTransformParams b = xavier_conv_params(f, l, 99);
  const ConvTransformParams c = xavier_conv_params(f, l, 100);
  CHECK((a.kernel1.w == b.kernel1.w).all());
  CHECK((a.kernel2.w == b.kernel2.w).all());
  CHECK((a.kernel1.w != c.kernel1.w).any());
  CHECK(a.param_count() == 18 * f * l);
  const double bound = std::sqrt(6.0 / (9.0 * l + 9.0 * f));
  CHECK(a.kernel1.w.abs().maxCoeff() <= bound);
  CHECK(a.kernel2.w.abs().maxCoeff() <= bound);
  CHECK(a.kernel1.w.abs().maxCoeff() > 0.5 * bound);  // actually spreads out
}

TEST_CASE("nft and nit wrappers carry shapes") {
  // Both transforms keep the band count; the feature maps live in the
  // hidden layer only.
  const ConvTransformParams nft = xavier_conv_params(6, 3, 1);
  const ConvTransformParams nit = xavier_conv_params(6, 3, 2);
  const SpectralCube cube = testing::random_cube(7, 5, 3, 3);
  const FeatureCube features = nft_forward(cube, nft);
  CHECK(features.rows == 7);
  CHECK(features.cols == 5);
  CHECK(features.channels == 3);
  const SpectralCube back = nit_forward(features, nit);
  CHECK(back.rows == 7);
  CHECK(back.cols == 5);
  CHECK(back.bands == 3);
  CHECK_THROWS_AS(nft_forward(cube, xavier_conv_params(6, 4, 1)),
                  std::invalid_argument);
}

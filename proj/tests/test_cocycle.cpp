#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thermoshift/thermoshift.hpp"

using namespace thermoshift;

namespace {

Word W(const char* s) { return parse_word(s); }

Eigen::MatrixXd M2(double a, double b, double c, double d) {
  Eigen::MatrixXd A(2, 2);
  A << a, b, c, d;
  return A;
}

}  // namespace

TEST(CocycleWeight, Examples) {
  auto diag = MatrixFamily::create({M2(2, 0, 0, 1), M2(3, 0, 0, 1)});
  EXPECT_NEAR(cocycle_weight(diag, W("1221")), std::log(36.0), 1e-14);
  EXPECT_NEAR(cocycle_weight(diag, W("2")), std::log(3.0), 1e-14);
  auto sh = MatrixFamily::create({M2(1, 1, 0, 1), M2(1, 0, 1, 1)}, MatrixNorm::spectral);
  EXPECT_NEAR(cocycle_weight(sh, W("12")), std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-12);
}

TEST(CocycleWeight, ProductOrderIsRightToLeft) {
  auto mf = MatrixFamily::create({M2(1, 1, 0, 1), M2(1, 0, 1, 1)});
  // A_2 A_1 = [[1,1],[1,2]] (max row sum 3); A_1 A_2 = [[2,1],[1,1]] (3 as well), so use three factors
  Eigen::MatrixXd P = mf.matrix(1) * mf.matrix(1) * mf.matrix(2);  // word "211"
  EXPECT_NEAR(cocycle_weight(mf, W("211")), std::log(P.cwiseAbs().rowwise().sum().maxCoeff()), 1e-14);
}

TEST(CocycleWeight, LongProductsRenormalize) {
  auto mf = MatrixFamily::create({M2(2, 0, 0, 1), M2(3, 0, 0, 1)});
  Word w(2000, 1);
  EXPECT_NEAR(cocycle_weight(mf, w), 2000.0 * std::log(2.0), 1e-9);
  auto zero = MatrixFamily::create({M2(0, 1, 0, 0)});
  EXPECT_EQ(cocycle_weight(zero, W("11")), kNegInf);
}

TEST(CocycleWeight, SubMultiplicative) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  auto mf = MatrixFamily::create({M2(u(rng), u(rng), u(rng), u(rng)), M2(u(rng), u(rng), u(rng), u(rng))});
  std::vector<Word> words;
  for (std::size_t n = 1; n <= 3; ++n)
    for (auto& w : enumerate_words(builtin::full(2), n)) words.push_back(w);
  for (const auto& x : words)
    for (const auto& y : words) EXPECT_LE(cocycle_weight(mf, concat(x, y)), cocycle_weight(mf, x) + cocycle_weight(mf, y) + 1e-12);
}

TEST(Family, Validation) {
  EXPECT_THROW(MatrixFamily::create({}), SpecError);
  EXPECT_THROW(MatrixFamily::create({M2(1, -1, 0, 1)}), SpecError);
  Eigen::MatrixXd three = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_THROW(MatrixFamily::create({M2(1, 0, 0, 1), three}), SpecError);
  EXPECT_THROW(matrix_cocycle(builtin::full(3), MatrixFamily::create({M2(1, 0, 0, 1)})), SpecError);
}

TEST(Lyapunov, CommutingDiagonalIsExact) {
  auto mf = MatrixFamily::create({M2(2, 0, 0, 2), M2(3, 0, 0, 3)});
  for (double q : {0.1, 0.5, 0.9}) {
    auto rows = lyapunov_estimate(product_measure(builtin::full(2), {q, 1.0 - q}, 8), mf, 8);
    for (const auto& r : rows) EXPECT_NEAR(r.estimate, q * std::log(2.0) + (1.0 - q) * std::log(3.0), 1e-13);
  }
}

TEST(Lyapunov, RepeatedMatrixTendsToSpectralRadius) {
  auto A = M2(1, 2, 1, 1);
  auto mf = MatrixFamily::create({A, A});
  const double rho = oracle::spectral_radius({{1, 2}, {1, 1}});
  auto rows = lyapunov_estimate(product_measure(builtin::full(2), {0.5, 0.5}, 12), mf, 12);
  EXPECT_NEAR(rows.back().increment, std::log(rho), 1e-8);
  EXPECT_NEAR(rows.back().estimate, std::log(rho), 0.1);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].envelope, rows[i - 1].envelope);
}

TEST(Lyapunov, RandomPairMatchesMonteCarlo) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  oracle::Matrix A(2, std::vector<double>(2)), B(2, std::vector<double>(2));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      A[i][j] = u(rng);
      B[i][j] = u(rng);
    }
  auto mf = MatrixFamily::create({M2(A[0][0], A[0][1], A[1][0], A[1][1]), M2(B[0][0], B[0][1], B[1][0], B[1][1])},
                                 MatrixNorm::spectral);
  const double mc = oracle::lyapunov_monte_carlo({A, B}, {0.5, 0.5}, 1'000'000, 77);
  auto rows = lyapunov_estimate(product_measure(builtin::full(2), {0.5, 0.5}, 12), mf, 12);
  EXPECT_NEAR(rows.back().increment, mc, 1e-2);
}

TEST(Lyapunov, NormsDifferByAtMostLogD) {
  auto a = M2(1, 2, 0.5, 1), b = M2(0.3, 1, 1, 0.2);
  auto m = product_measure(builtin::full(2), {0.3, 0.7}, 10);
  auto r1 = lyapunov_estimate(m, MatrixFamily::create({a, b}, MatrixNorm::max_row_sum), 10);
  auto r2 = lyapunov_estimate(m, MatrixFamily::create({a, b}, MatrixNorm::spectral), 10);
  for (std::size_t i = 0; i < r1.size(); ++i)
    EXPECT_LE(std::abs(r1[i].a_n - r2[i].a_n), 0.5 * std::log(2.0) + 1e-12);
  EXPECT_LT(std::abs(r1.back().estimate - r2.back().estimate), std::abs(r1.front().estimate - r2.front().estimate) + 1e-12);
}

TEST(Lyapunov, DepthCheck) {
  auto mf = MatrixFamily::create({M2(1, 0, 0, 1), M2(1, 0, 0, 1)});
  EXPECT_THROW(lyapunov_estimate(product_measure(builtin::full(2), {0.5, 0.5}, 4), mf, 5), SpecError);
}

TEST(SingularValues, Examples) {
  auto d = singular_values(M2(2, 0, 0, 1));
  EXPECT_NEAR(d[0], 2.0, 1e-15);
  EXPECT_NEAR(d[1], 1.0, 1e-15);
  auto j = singular_values(M2(1, 1, 0, 1));
  EXPECT_NEAR(j[0], (1.0 + std::sqrt(5.0)) / 2.0, 1e-12);
  EXPECT_NEAR(j[1], (std::sqrt(5.0) - 1.0) / 2.0, 1e-12);
  const double t = 0.7;
  auto r = singular_values(M2(std::cos(t), -std::sin(t), std::sin(t), std::cos(t)));
  EXPECT_NEAR(r[0], 1.0, 1e-14);
  EXPECT_NEAR(r[1], 1.0, 1e-14);
}

TEST(SingularValues, DeterminantAndTranspose) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    auto A = M2(u(rng), u(rng), u(rng), u(rng));
    auto s = singular_values(A), st = singular_values(Eigen::MatrixXd(A.transpose()));
    EXPECT_NEAR(s[0] * s[1], std::abs(A.determinant()), 1e-10);
    EXPECT_GE(s[0], s[1]);
    EXPECT_NEAR(s[0], st[0], 1e-12);
    EXPECT_NEAR(s[1], st[1], 1e-12);
  }
}

TEST(SingularValues, ThreeByThree) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    Eigen::MatrixXd A(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = u(rng);
    auto s = singular_values(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
    auto ev = es.eigenvalues();  // ascending
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(s[k], std::sqrt(std::max(0.0, ev(2 - k))), 1e-10);
  }
  EXPECT_THROW(singular_values(Eigen::MatrixXd::Identity(4, 4)), SpecError);
}

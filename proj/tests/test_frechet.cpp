#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "posterkit/frechet.hpp"
#include "posterkit/metrics.hpp"
#include "posterkit/rng.hpp"
#include "test_util.hpp"

using namespace posterkit;
namespace pm = posterkit::metrics;

namespace {

// Independent closed-form Gaussian distance, written directly against
// Eigen in test code.
double closed_form_fd(const Eigen::VectorXd& mu_a, const Eigen::MatrixXd& cov_a,
                      const Eigen::VectorXd& mu_b, const Eigen::MatrixXd& cov_b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(cov_a);
  const Eigen::MatrixXd sqrt_a = es_a.operatorSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(sqrt_a * cov_b * sqrt_a);
  double tr = 0.0;
  for (Eigen::Index i = 0; i < es_m.eigenvalues().size(); ++i)
    tr += std::sqrt(std::max(0.0, es_m.eigenvalues()(i)));
  return (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2.0 * tr;
}

// 2d points around a mean whose empirical moments are exactly (mu, I).
pm::FeatureSet exact_identity_set(const std::vector<double>& mu) {
  const std::size_t d = mu.size();
  const double a = std::sqrt((2.0 * double(d) - 1.0) / 2.0);
  pm::FeatureSet set;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> hi = mu, lo = mu;
    hi[i] += a;
    lo[i] -= a;
    set.vectors.push_back(hi);
    set.vectors.push_back(lo);
  }
  return set;
}

}  // namespace

TEST_CASE("identical sets have zero distance") {
  auto eng = rng::make_engine(1);
  pm::FeatureSet set;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(6);
    for (double& x : v) x = rng::uniform01(eng);
    set.vectors.push_back(v);
  }
  CHECK(pm::frechet_distance(set, set) < 1e-9);
}

TEST_CASE("distance is symmetric") {
  auto eng = rng::make_engine(2);
  pm::FeatureSet a, b;
  for (int i = 0; i < 64; ++i) {
    std::vector<double> va(8), vb(8);
    for (double& x : va) x = rng::uniform01(eng);
    for (double& x : vb) x = 0.3 + 0.5 * rng::uniform01(eng);
    a.vectors.push_back(va);
    b.vectors.push_back(vb);
  }
  const double ab = pm::frechet_distance(a, b);
  const double ba = pm::frechet_distance(b, a);
  CHECK(ab >= 0.0);
  CHECK(std::abs(ab - ba) < 1e-9);
}

TEST_CASE("identity covariances with a (3,4) mean shift give exactly 25") {
  const std::size_t d = 8;
  std::vector<double> mu_a(d, 0.0), mu_b(d, 0.0);
  mu_b[0] = 3.0;
  mu_b[1] = 4.0;
  const auto a = exact_identity_set(mu_a);
  const auto b = exact_identity_set(mu_b);
  CHECK(std::abs(pm::frechet_distance(a, b) - 25.0) < 1e-6);
}

TEST_CASE("scalar sets with variances 1 and 4 give (1-2)^2") {
  // Two-point sets {mu - s, mu + s} have sample variance 2s^2.
  pm::FeatureSet a, b;
  const double sa = 1.0 / std::sqrt(2.0);  // variance 1
  const double sb = std::sqrt(2.0);        // variance 4
  a.vectors = {{5.0 - sa}, {5.0 + sa}};
  b.vectors = {{5.0 - sb}, {5.0 + sb}};
  CHECK(std::abs(pm::frechet_distance(a, b) - 1.0) < 1e-9);
}

TEST_CASE("sampled Gaussians converge to the closed form") {
  const int d = 4;
  Eigen::VectorXd mu_a(d), mu_b(d);
  mu_a << 0.0, 0.5, -0.3, 1.0;
  mu_b << 0.4, 0.1, 0.2, 0.6;
  Eigen::MatrixXd base_a(d, d), base_b(d, d);
  base_a << 1.0, 0.2, 0.0, 0.1,
            0.2, 0.8, 0.1, 0.0,
            0.0, 0.1, 1.2, 0.3,
            0.1, 0.0, 0.3, 0.9;
  base_b << 0.7, 0.1, 0.0, 0.0,
            0.1, 1.1, 0.2, 0.1,
            0.0, 0.2, 0.6, 0.0,
            0.0, 0.1, 0.0, 1.4;
  const Eigen::MatrixXd cov_a = base_a * base_a.transpose();
  const Eigen::MatrixXd cov_b = base_b * base_b.transpose();
  const Eigen::MatrixXd chol_a = cov_a.llt().matrixL();
  const Eigen::MatrixXd chol_b = cov_b.llt().matrixL();

  auto sample = [&](const Eigen::VectorXd& mu, const Eigen::MatrixXd& chol,
                    std::uint64_t seed) {
    auto eng = rng::make_engine(seed);
    pm::FeatureSet set;
    for (int i = 0; i < 10000; ++i) {
      Eigen::VectorXd z(d);
      for (int j = 0; j < d; ++j) z(j) = rng::normal(eng, 0.0, 1.0);
      const Eigen::VectorXd x = mu + chol * z;
      set.vectors.push_back(std::vector<double>(x.data(), x.data() + d));
    }
    return set;
  };

  const double expected = closed_form_fd(mu_a, cov_a, mu_b, cov_b);
  const double measured =
      pm::frechet_distance(sample(mu_a, chol_a, 11), sample(mu_b, chol_b, 22));
  CHECK(expected > 0.1);
  CHECK(std::abs(measured - expected) / expected < 0.02);
}

TEST_CASE("degenerate inputs are rejected") {
  pm::FeatureSet one;
  one.vectors = {{1.0, 2.0}};
  pm::FeatureSet ok;
  ok.vectors = {{1.0, 2.0}, {2.0, 1.0}, {0.0, 0.5}};
  CHECK_THROWS_AS(pm::frechet_distance(one, ok), std::invalid_argument);

  pm::FeatureSet other_dim;
  other_dim.vectors = {{1.0}, {2.0}};
  CHECK_THROWS_AS(pm::frechet_distance(ok, other_dim), std::invalid_argument);
}

TEST_CASE("rank-deficient sets stay finite through shrinkage") {
  // Three vectors in dimension 8: covariance rank <= 2.
  pm::FeatureSet a, b;
  a.vectors = {std::vector<double>(8, 0.0), std::vector<double>(8, 1.0),
               std::vector<double>(8, 2.0)};
  b.vectors = {std::vector<double>(8, 0.5), std::vector<double>(8, 1.5),
               std::vector<double>(8, 2.5)};
  const double fd = pm::frechet_distance(a, b);
  CHECK(std::isfinite(fd));
  CHECK(fd >= 0.0);
}

TEST_CASE("featurized identical layout sets have zero distance") {
  auto eng = rng::make_engine(77);
  pm::FeatureSet a, b;
  for (int i = 0; i < 40; ++i) {
    const Layout l = testutil::random_layout(eng, 10);
    Layout shuffled = l;
    std::reverse(shuffled.elements.begin(), shuffled.elements.end());
    a.vectors.push_back(pm::geometric_featurizer(l, 12).values);
    b.vectors.push_back(pm::geometric_featurizer(shuffled, 12).values);
  }
  CHECK(pm::frechet_distance(a, b) < 1e-9);
}

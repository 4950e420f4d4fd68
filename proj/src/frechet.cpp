#include "posterkit/frechet.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace posterkit::metrics {

namespace {

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments fit(const FeatureSet& set) {
  const std::size_t n = set.vectors.size();
  if (n < 2) throw std::invalid_argument("need at least two feature vectors");
  const std::size_t d = set.vectors.front().size();
  if (d == 0) throw std::invalid_argument("empty feature vectors");
  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd x(rows, cols);
  for (std::size_t i = 0; i < n; ++i) {
    if (set.vectors[i].size() != d)
      throw std::invalid_argument("inconsistent feature dimensions");
    for (std::size_t j = 0; j < d; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = set.vectors[i][j];
  }
  Moments m;
  m.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / double(n - 1);
  if (n <= d) m.cov += 1e-6 * Eigen::MatrixXd::Identity(cols, cols);
  return m;
}

// Symmetric PSD square root; negative eigenvalues are clipped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd vals = es.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    vals(i) = vals(i) > 0.0 ? std::sqrt(vals(i)) : 0.0;
  return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const FeatureSet& a, const FeatureSet& b) {
  const Moments ma = fit(a);
  const Moments mb = fit(b);
  if (ma.mean.size() != mb.mean.size())
    throw std::invalid_argument("feature dimension mismatch");

  const double mean_term = (ma.mean - mb.mean).squaredNorm();

  // Tr((Ca Cb)^(1/2)) computed as Tr((S Cb S)^(1/2)) with S = Ca^(1/2),
  // which keeps the eigenproblem symmetric.
  const Eigen::MatrixXd s = psd_sqrt(ma.cov);
  const Eigen::MatrixXd inner = s * mb.cov * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
  double tr_sqrt = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = es.eigenvalues()(i);
    if (v > 0.0) tr_sqrt += std::sqrt(v);
  }

  const double fd = mean_term + ma.cov.trace() + mb.cov.trace() - 2.0 * tr_sqrt;
  return fd > 0.0 ? fd : 0.0;
}

}  // namespace posterkit::metrics

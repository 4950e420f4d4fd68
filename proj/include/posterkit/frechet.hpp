#pragma once

#include <vector>

namespace posterkit::metrics {

// A bag of fixed-length feature vectors, one per layout.
struct FeatureSet {
  std::vector<std::vector<double>> vectors;
};

// Fréchet distance between Gaussians fitted to the two sets:
// ||mu_a - mu_b||^2 + Tr(Ca + Cb - 2 (Ca Cb)^(1/2)).
// Covariances use unbiased (n-1) normalization with ridge shrinkage
// 1e-6*I when the fit is rank-deficient; the matrix square root goes
// through a symmetric eigendecomposition with negative eigenvalues
// clipped to zero. Throws std::invalid_argument on dimension mismatch
// or fewer than two vectors in a set.
double frechet_distance(const FeatureSet& a, const FeatureSet& b);

}  // namespace posterkit::metrics

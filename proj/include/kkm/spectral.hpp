#pragma once

#include "kkm/approx.hpp"
#include "kkm/cluster.hpp"
#include "kkm/kernel.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace kkm {

/// Nystrom degrees that were not strictly positive, so D^{-1/2} is undefined.
struct DegreeFailure {
  std::vector<Index> indices;
  std::vector<double> degrees;
};

/// Top-k eigenvectors of D^{-1/2} K D^{-1/2} with rows scaled to unit length
/// (zero rows stay zero). Requires K >= 0 elementwise and positive degrees.
Matrix spectral_embedding_exact(const Matrix& k, int kclusters);

/// d = C (W^+ (C^T 1)), the degrees of C W^+ C^T without forming it.
Vector nystrom_degrees(const NystromFactors& f);

/// Embedding of C W^+ C^T computed through the c x c problem
/// (W^+)^{1/2} C^T D^{-1} C (W^+)^{1/2}; rows normalized as in the exact case.
std::variant<Matrix, DegreeFailure> spectral_embedding_nystrom(const NystromFactors& f,
                                                               int kclusters);

/// Exact normalized spectral clustering of a nonnegative affinity matrix.
Clustering spectral_exact(const Matrix& k, int kclusters, std::uint64_t seed,
                          LloydOptions opts = {});

using SpectralOutcome = std::variant<Clustering, DegreeFailure>;

/// Spectral clustering on a uniform-sampling Nystrom approximation of the RBF
/// affinity. A nonpositive approximate degree yields DegreeFailure.
SpectralOutcome spectral_nystrom(const DataMatrix& data, const KernelSpec& spec, Index c,
                                 int kclusters, std::uint64_t seed, LloydOptions opts = {});

/// Same, from precomputed factors.
SpectralOutcome spectral_nystrom(const NystromFactors& f, int kclusters, std::uint64_t seed,
                                 LloydOptions opts = {});

}  // namespace kkm

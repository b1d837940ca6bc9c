#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "aksvd/kernels.hpp"
#include "aksvd/matrix.hpp"

namespace aksvd {

enum class CompatMode { Identity, PseudoInverse, Pca, Random };
/// Which data source the transform right-multiplies.
enum class CompatSide { X, Z };

const char* to_string(CompatMode mode);
/// Accepts a0 / a1 / a2 / identity.
CompatMode parse_compat_mode(const std::string& name);

/// Transform making row and column samples the same length. With side X the
/// row samples become X·C; with side Z the column samples become Z·C.
struct CompatMatrix {
  DenseMatrix C;
  CompatMode mode = CompatMode::Identity;
  CompatSide side = CompatSide::X;
  std::optional<std::uint64_t> seed;
};

/// C = A† (M×N), applied to the row samples. For square or wide A this gives
/// A·A†·A = A under the linear kernel.
CompatMatrix compat_pseudoinverse(const DenseMatrix& a);

/// Top `target_dim` right singular vectors of A (column-mean-centered when
/// `center` is set), completed to an orthonormal basis if A has lower rank.
CompatMatrix compat_pca(const DenseMatrix& a, std::size_t target_dim, bool center = true);

/// Gaussian M×N matrix scaled by 1/sqrt(M), so projected norms stay close to the originals.
CompatMatrix compat_random(const DenseMatrix& a, std::uint64_t seed);

struct CompatOptions {
  CompatMode mode = CompatMode::Identity;
  std::uint64_t seed = 0;
  bool pca_center = true;
};

/// Builds the transform for A, projecting whichever source has the longer
/// samples. Tall A (N > M) is handled by building the transform on Aᵀ and
/// applying it to the column samples. Returns null for the identity on square A.
std::shared_ptr<const CompatMatrix> make_compat(const DenseMatrix& a, const CompatOptions& opts);

DataSources apply_compat(const CompatMatrix& c, const DataSources& sources);

}  // namespace aksvd

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gi/forward.hpp"
#include "gi/image.hpp"
#include "gi/patterns.hpp"

namespace gi {

enum class ReconMethod : std::uint8_t { BcPlain = 0, BcCentered = 1, CsOmp = 2, NnDenoised = 3 };
std::string to_string(ReconMethod method);

enum class BcMode { Plain, Centered };
std::string to_string(BcMode mode);
BcMode bc_mode_from_string(const std::string& name);

/// A recovered field of unbounded real values.
struct Reconstruction {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> field;
    ReconMethod method = ReconMethod::BcPlain;
};

/// The artifact term (P^T P - I) O that contaminates a correlation image.
struct ResidualField {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> field;
};

struct Decomposition {
    Reconstruction correlation;  // G = P^T P O
    ResidualField residual;      // R = G - O
};

/// plain: G = P^T B.  centered: G = (P - Pbar)^T (B - Bbar) / M.
Reconstruction bc_reconstruct(const PatternStack& stack, const BucketSeries& buckets, BcMode mode);

/// Splits the noiseless correlation image into object plus residual.
/// G follows the same arithmetic as bc_reconstruct(plain) on measure(stack, object),
/// and R is formed as G - O so that G = O + R holds to the last bit.
Decomposition residual_decompose(const PatternStack& stack, const ImagePlane& object);

enum class SparseBasis { Dct2d, Identity };
std::string to_string(SparseBasis basis);
SparseBasis sparse_basis_from_string(const std::string& name);

struct OmpOptions {
    SparseBasis basis = SparseBasis::Dct2d;
    std::optional<std::size_t> sparsity;  // default floor(0.1 N), at least 1
    std::optional<double> residual_tol;   // default 1e-6 * ||B||_2
};

struct SparseSolution {
    Eigen::VectorXd coefficients;        // dense, length = dictionary columns
    std::vector<std::size_t> support;    // in selection order
    std::vector<double> residual_norms;  // ||r|| before the first and after every accepted atom
    std::vector<std::string> warnings;
};

/// Orthogonal matching pursuit on an explicit dictionary. Atoms are chosen by
/// normalised correlation |a_i^T r| / ||a_i||; the active-set least squares is
/// kept as an incrementally grown QR factorisation.
SparseSolution omp_solve(const Eigen::MatrixXd& dictionary, const Eigen::VectorXd& measurements,
                         std::size_t sparsity, double residual_tol);

struct OmpResult {
    Reconstruction reconstruction;
    SparseSolution solution;
};

OmpResult omp_reconstruct(const PatternStack& stack, const BucketSeries& buckets, const OmpOptions& options = {});
/// Same, with the pattern matrix (M x N, one flattened pattern per row) given directly.
OmpResult omp_reconstruct(const Eigen::MatrixXd& patterns, std::size_t width, std::size_t height,
                          const BucketSeries& buckets, const OmpOptions& options = {});

/// Orthonormal DCT-II matrix; row u is the u-th cosine basis vector.
Eigen::MatrixXd dct_matrix(std::size_t n);
/// N x N synthesis matrix Psi: image = Psi * theta.
Eigen::MatrixXd sparsifying_basis(SparseBasis basis, std::size_t width, std::size_t height);

/// Min-max map to [0,1]; a constant field maps to 0.5 everywhere.
ImagePlane normalize_for_display(const Reconstruction& recon);

std::vector<std::uint8_t> serialize_reconstruction(const Reconstruction& recon);
Reconstruction deserialize_reconstruction(std::span<const std::uint8_t> bytes);
void save_reconstruction(const std::filesystem::path& path, const Reconstruction& recon);
Reconstruction load_reconstruction(const std::filesystem::path& path);

}  // namespace gi

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace polyball {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Error hierarchy. Well-formed negative outcomes (NotDivisible, Infeasible,
// NotFound, ...) are returned as values; exceptions are for contract breaks.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StructureMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Spectral norm via SVD.
double spectral_norm(const CMatrix& m);

/// 2-norm condition number; +inf for singular or empty-rank matrices.
double condition_number(const CMatrix& m);

/// ||m^* m - I||_2.
double unitarity_defect(const CMatrix& m);

/// Hermitian-part eigen projection onto the PSD cone.
CMatrix project_psd(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Complex Ginibre matrix with entries (N(0,1) + i N(0,1)) / sqrt(2).
CMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-distributed unitary: QR of a Ginibre matrix with diag(R) > 0.
CMatrix haar_unitary(Eigen::Index n, Rng& rng);

/// Orthonormal basis of the orthogonal complement of span(cols(basis)),
/// computed deterministically from a column-pivoted Householder QR.
CMatrix orthogonal_complement(const CMatrix& basis, Eigen::Index ambient);

/// SplitMix64 mixing of a base seed with a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace polyball

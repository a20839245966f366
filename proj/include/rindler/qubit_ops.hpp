#pragma once

// Spin-1/2 operators on the 2^N computational basis. Qubit j is bit j of the
// basis index (qubit 0 least significant); bit value 1 is the excited state.

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace rindler::qubit {

using cplx = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<cplx>;

enum class Op { plus, minus, z, n };

struct Factor {
  int atom = 0;
  Op op = Op::n;
};

/// Applies the product O = f_0 f_1 ... f_k to basis state `state`; returns the
/// amplitude (0 if annihilated) and rewrites `state` in place.
double apply_product(std::span<const Factor> product, std::uint32_t& state);

/// Tr(O rho) for a monomial O.
cplx expectation(const Eigen::MatrixXcd& rho, std::span<const Factor> product);
cplx expectation(const Eigen::MatrixXcd& rho, std::initializer_list<Factor> product);

Eigen::Matrix2cd single(Op op);

/// I x ... x op_j x ... x I built from explicit Kronecker products.
SparseMatrixC embed(const Eigen::Matrix2cd& op, int atom, int n_atoms);

SparseMatrixC kron(const SparseMatrixC& a, const SparseMatrixC& b);

SparseMatrixC identity(int dim);

/// |b><b| for the product state with atom j excited iff excited[j].
Eigen::MatrixXcd product_state(std::span<const bool> excited);

inline int popcount(std::uint32_t x) { return __builtin_popcount(x); }

}  // namespace rindler::qubit

#include "rindler/qubit_ops.hpp"

#include <vector>

#include "rindler/errors.hpp"

namespace rindler::qubit {

double apply_product(std::span<const Factor> product, std::uint32_t& state) {
  double amp = 1.0;
  for (auto it = product.rbegin(); it != product.rend(); ++it) {
    const std::uint32_t bit = 1u << it->atom;
    const bool up = state & bit;
    switch (it->op) {
      case Op::plus:
        if (up) return 0.0;
        state |= bit;
        break;
      case Op::minus:
        if (!up) return 0.0;
        state &= ~bit;
        break;
      case Op::z:
        if (!up) amp = -amp;
        break;
      case Op::n:
        if (!up) return 0.0;
        break;
    }
  }
  return amp;
}

cplx expectation(const Eigen::MatrixXcd& rho, std::span<const Factor> product) {
  cplx acc = 0.0;
  const auto dim = static_cast<std::uint32_t>(rho.rows());
  for (std::uint32_t d = 0; d < dim; ++d) {
    std::uint32_t c = d;
    const double amp = apply_product(product, c);
    if (amp != 0.0) acc += amp * rho(d, c);
  }
  return acc;
}

cplx expectation(const Eigen::MatrixXcd& rho, std::initializer_list<Factor> product) {
  return expectation(rho, std::span<const Factor>(product.begin(), product.size()));
}

Eigen::Matrix2cd single(Op op) {
  // Index 0 = ground, 1 = excited.
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (op) {
    case Op::plus: m(1, 0) = 1.0; break;
    case Op::minus: m(0, 1) = 1.0; break;
    case Op::z: m(0, 0) = -1.0; m(1, 1) = 1.0; break;
    case Op::n: m(1, 1) = 1.0; break;
  }
  return m;
}

SparseMatrixC identity(int dim) {
  SparseMatrixC id(dim, dim);
  id.setIdentity();
  return id;
}

SparseMatrixC kron(const SparseMatrixC& a, const SparseMatrixC& b) {
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrixC::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrixC::InnerIterator ib(b, kb); ib; ++ib)
          triplets.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                                ia.value() * ib.value());
  SparseMatrixC out(a.rows() * b.rows(), a.cols() * b.cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

SparseMatrixC embed(const Eigen::Matrix2cd& op, int atom, int n_atoms) {
  if (atom < 0 || atom >= n_atoms) throw DimensionError("atom index out of range");
  // Most significant factor first: qubit n_atoms-1 ... qubit 0.
  SparseMatrixC out = identity(1);
  for (int q = n_atoms - 1; q >= 0; --q) {
    const SparseMatrixC factor = q == atom ? SparseMatrixC(op.sparseView()) : identity(2);
    out = kron(out, factor);
  }
  return out;
}

Eigen::MatrixXcd product_state(std::span<const bool> excited) {
  const int n = static_cast<int>(excited.size());
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::uint32_t b = 0;
  for (int j = 0; j < n; ++j)
    if (excited[j]) b |= 1u << j;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  rho(b, b) = 1.0;
  return rho;
}

}  // namespace rindler::qubit

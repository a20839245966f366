#include "rindler/liouvillian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rindler/errors.hpp"
#include "rindler/qubit_ops.hpp"

namespace rindler {
namespace {

using Index = Eigen::Index;

// Scalar complex arithmetic on interleaved doubles; std::complex operator*
// carries NaN-recovery branches that defeat vectorization.
inline void axpy(double* d, const double* s, Index n, cplx coef) {
  const double cr = coef.real(), ci = coef.imag();
  for (Index k = 0; k < n; ++k) {
    const double sr = s[2 * k], si = s[2 * k + 1];
    d[2 * k] += cr * sr - ci * si;
    d[2 * k + 1] += cr * si + ci * sr;
  }
}

// dst(r, :) += coef * src(r ^ b, :) for every row r whose bit b equals `set`.
void row_shift(Eigen::MatrixXcd& dst, const Eigen::MatrixXcd& src, cplx coef, Index b, bool set) {
  const Index dim = dst.rows();
  for (Index c = 0; c < dim; ++c) {
    auto* d = reinterpret_cast<double*>(dst.data() + c * dim);
    const auto* s = reinterpret_cast<const double*>(src.data() + c * dim);
    for (Index hi = 0; hi < dim; hi += 2 * b) {
      const Index to = hi + (set ? b : 0);
      const Index from = hi + (set ? 0 : b);
      axpy(d + 2 * to, s + 2 * from, b, coef);
    }
  }
}

// dst(:, c) += coef * src(:, c ^ b) for every column c whose bit b equals `set`.
void col_shift(Eigen::MatrixXcd& dst, const Eigen::MatrixXcd& src, cplx coef, Index b, bool set) {
  const Index dim = dst.rows();
  for (Index hi = 0; hi < dim; hi += 2 * b) {
    for (Index lo = 0; lo < b; ++lo) {
      const Index to = hi + lo + (set ? b : 0);
      dst.col(to).noalias() += coef * src.col(to ^ b);
    }
  }
}

void check_state_dims(const Eigen::MatrixXcd& rho, Index dim) {
  if (rho.rows() != dim || rho.cols() != dim)
    throw DimensionError("density matrix is " + std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()) +
                         ", expected " + std::to_string(dim) + "x" + std::to_string(dim));
}

}  // namespace

Eigen::MatrixXcd SystemHamiltonian::matrix() const {
  return energies.cast<cplx>().asDiagonal();
}

SystemHamiltonian SystemHamiltonian::zero(int n_atoms) {
  return {n_atoms, Eigen::VectorXd::Zero(Index{1} << n_atoms)};
}

SystemHamiltonian build_hamiltonian(std::span<const double> Omega) {
  const int n = static_cast<int>(Omega.size());
  SystemHamiltonian H = SystemHamiltonian::zero(n);
  for (Index b = 0; b < H.energies.size(); ++b)
    for (int j = 0; j < n; ++j)
      if (b & (Index{1} << j)) H.energies[b] += Omega[j];
  return H;
}

SystemHamiltonian build_hamiltonian(const FrameConfig& frame, std::span<const AtomSpec> atoms) {
  std::vector<double> Omega;
  for (const auto& atom : atoms) {
    if (atom.wedge != atoms.front().wedge)
      throw DomainError("the system Hamiltonian is defined for single-wedge configurations only");
    Omega.push_back(kinematic_state(frame, atom).Omega);
  }
  return build_hamiltonian(Omega);
}

SystemHamiltonian build_hamiltonian(const RateSet& rates) {
  std::vector<double> Omega;
  for (const auto& s : rates.states) Omega.push_back(s.Omega);
  return build_hamiltonian(Omega);
}

Generator::Generator(const SystemHamiltonian& H, const RateSet& rates, CrossPairing pairing)
    : n_atoms_(rates.n_atoms()),
      dim_(Index{1} << rates.n_atoms()),
      picture_(rates.has_wedge_II() ? Picture::interaction : Picture::schroedinger),
      pairing_(pairing),
      rates_(rates),
      H_(H) {
  if (n_atoms_ > 20) throw CapacityError("at most 20 atoms are supported");
  if (H_.energies.size() == 0) H_ = SystemHamiltonian::zero(n_atoms_);
  if (H_.n_atoms != n_atoms_ || H_.energies.size() != dim_)
    throw DimensionError("Hamiltonian and rate set disagree on the number of atoms");
  if (picture_ == Picture::interaction) H_ = SystemHamiltonian::zero(n_atoms_);

  terms_ = dissipator_terms(rates_, pairing_);
  const int n = n_atoms_;
  const Eigen::MatrixXcd K = 2.0 * kossakowski_matrix(rates_, pairing_);

  // Diagonalize K block by block over connected components so that channels
  // of uncoupled atoms stay single-jump.
  std::vector<int> component(2 * n, -1);
  int n_comp = 0;
  for (int seed = 0; seed < 2 * n; ++seed) {
    if (component[seed] >= 0) continue;
    std::vector<int> stack{seed};
    component[seed] = n_comp;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < 2 * n; ++v)
        if (component[v] < 0 && (K(u, v) != 0.0 || K(v, u) != 0.0)) {
          component[v] = n_comp;
          stack.push_back(v);
        }
    }
    ++n_comp;
  }
  const double scale = K.cwiseAbs().maxCoeff();
  for (int c = 0; c < n_comp; ++c) {
    std::vector<int> idx;
    for (int u = 0; u < 2 * n; ++u)
      if (component[u] == c) idx.push_back(u);
    Eigen::MatrixXcd block(idx.size(), idx.size());
    for (std::size_t p = 0; p < idx.size(); ++p)
      for (std::size_t q = 0; q < idx.size(); ++q) block(p, q) = K(idx[p], idx[q]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(block);
    if (solver.info() != Eigen::Success) throw NumericalError("channel decomposition failed");
    for (Index k = 0; k < solver.eigenvalues().size(); ++k) {
      const double lambda = solver.eigenvalues()[k];
      if (!(std::abs(lambda) > 1e-14 * scale)) continue;
      Channel ch{lambda, 0, {}};
      for (std::size_t p = 0; p < idx.size(); ++p) {
        const cplx w = solver.eigenvectors()(p, k);
        if (w != 0.0) ch.parts.push_back({idx[p] % n, idx[p] >= n, w});
      }
      channels_.push_back(std::move(ch));
    }
  }

  // N = sum c B A; its Hermitian part is rebuilt from the channels, the rest
  // is a coherent shift.
  std::vector<Eigen::Triplet<cplx>> triplets;
  for (const auto& t : terms_) {
    const qubit::Factor BA[2] = {{t.B.atom, t.B.raising ? qubit::Op::plus : qubit::Op::minus},
                                 {t.A.atom, t.A.raising ? qubit::Op::plus : qubit::Op::minus}};
    for (std::uint32_t s = 0; s < static_cast<std::uint32_t>(dim_); ++s) {
      std::uint32_t out = s;
      const double amp = qubit::apply_product(BA, out);
      if (amp != 0.0) triplets.emplace_back(out, s, t.coef * amp);
    }
  }
  Eigen::SparseMatrix<cplx> N(dim_, dim_);
  N.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::SparseMatrix<cplx> Nadj = N.adjoint();
  shift_ = (N - Nadj) * cplx(0.0, -0.5);
  if (scale > 0.0) shift_.prune(cplx(scale), 1e-14);
  has_shift_ = shift_.nonZeros() > 0;

  for (const auto& t : terms_)
    if (t.A.raising == t.B.raising) conserving_ = false;
  for (auto& ch : channels_) {
    const bool all_lower = std::all_of(ch.parts.begin(), ch.parts.end(), [](const Component& c) { return !c.raising; });
    const bool all_raise = std::all_of(ch.parts.begin(), ch.parts.end(), [](const Component& c) { return c.raising; });
    ch.shift = all_lower ? 1 : (all_raise ? -1 : 0);
  }

  perm_.resize(dim_);
  std::iota(perm_.begin(), perm_.end(), 0u);
  std::stable_sort(perm_.begin(), perm_.end(),
                   [](std::uint32_t x, std::uint32_t y) { return qubit::popcount(x) < qubit::popcount(y); });
  pos_.resize(dim_);
  popc_.resize(dim_);
  offset_.assign(n + 2, 0);
  energies_internal_.resize(dim_);
  for (Index i = 0; i < dim_; ++i) {
    pos_[perm_[i]] = i;
    popc_[i] = qubit::popcount(perm_[i]);
    ++offset_[popc_[i] + 1];
    energies_internal_[i] = H_.energies[perm_[i]];
  }
  for (int k = 1; k < n + 2; ++k) offset_[k] += offset_[k - 1];
  pairs_.resize(n);
  for (int a = 0; a < n; ++a) {
    const std::uint32_t b = 1u << a;
    for (Index i = 0; i < dim_; ++i) {
      const std::uint32_t st = perm_[i];
      pairs_[a][(st & b) ? 1 : 0].emplace_back(i, pos_[st ^ b]);
    }
  }
  if (has_shift_) {
    std::vector<Eigen::Triplet<cplx>> tr;
    for (int k = 0; k < shift_.outerSize(); ++k)
      for (Eigen::SparseMatrix<cplx>::InnerIterator it(shift_, k); it; ++it)
        tr.emplace_back(pos_[it.row()], pos_[it.col()], it.value());
    shift_internal_.resize(dim_, dim_);
    shift_internal_.setFromTriplets(tr.begin(), tr.end());
  }
}

void Generator::check_dims(const Eigen::MatrixXcd& rho) const { check_state_dims(rho, dim_); }

void Generator::coherent_part(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
  const auto& E = H_.energies;
  for (Index c = 0; c < dim_; ++c)
    for (Index r = 0; r < dim_; ++r) out(r, c) = cplx(0.0, -(E[r] - E[c])) * rho(r, c);
  if (has_shift_) {
    const Eigen::MatrixXcd left = shift_ * rho;
    const Eigen::MatrixXcd right = rho * shift_;
    out += cplx(0.0, -1.0) * (left - right);
  }
}

Eigen::MatrixXcd Generator::to_internal(const Eigen::MatrixXcd& rho) const {
  check_dims(rho);
  Eigen::MatrixXcd out(dim_, dim_);
  for (Index c = 0; c < dim_; ++c)
    for (Index r = 0; r < dim_; ++r) out(r, c) = rho(perm_[r], perm_[c]);
  return out;
}

Eigen::MatrixXcd Generator::from_internal(const Eigen::MatrixXcd& rho) const {
  check_dims(rho);
  Eigen::MatrixXcd out(dim_, dim_);
  for (Index c = 0; c < dim_; ++c)
    for (Index r = 0; r < dim_; ++r) out(perm_[r], perm_[c]) = rho(r, c);
  return out;
}

SectorRange Generator::reachable_sectors(const Eigen::MatrixXcd& rho) const {
  check_dims(rho);
  if (!conserving_) return full_range();
  SectorRange r{n_atoms_ + 1, -n_atoms_ - 1};
  for (Index c = 0; c < dim_; ++c)
    for (Index row = 0; row < dim_; ++row)
      if (rho(row, c) != 0.0) {
        const int m = qubit::popcount(static_cast<std::uint32_t>(row)) - qubit::popcount(static_cast<std::uint32_t>(c));
        r.lo = std::min(r.lo, m);
        r.hi = std::max(r.hi, m);
      }
  if (r.lo > r.hi) return {0, 0};
  return r;
}

void Generator::shift_columns(Eigen::MatrixXcd& dst, const Eigen::MatrixXcd& src, cplx coef, int atom, bool set,
                              SectorRange src_range) const {
  const int n = n_atoms_;
  for (const auto& [to, from] : pairs_[atom][set ? 1 : 0]) {
    const int k = popc_[from];
    const int lo = std::max(0, k + src_range.lo);
    const int hi = std::min(n, k + src_range.hi);
    if (lo > hi) continue;
    const Index a = offset_[lo], len = offset_[hi + 1] - a;
    dst.col(to).segment(a, len).noalias() += coef * src.col(from).segment(a, len);
  }
}

void Generator::apply_internal(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out, SectorRange sectors,
                               Workspace& ws) const {
  const int n = n_atoms_;
  auto clamp = [n](SectorRange r) { return SectorRange{std::max(r.lo, -n), std::min(r.hi, n)}; };
  sectors = clamp(sectors);
  out.setZero(dim_, dim_);

  // -i [H, rho] with H diagonal, in real arithmetic.
  const auto& E = energies_internal_;
  for (Index c = 0; c < dim_; ++c) {
    const int k = popc_[c];
    const int lo = std::max(0, k + sectors.lo), hi = std::min(n, k + sectors.hi);
    for (Index r = offset_[lo]; r < offset_[hi + 1]; ++r) {
      const double d = E[r] - E[c];
      const cplx v = rho(r, c);
      out(r, c) = cplx(d * v.imag(), -d * v.real());
    }
  }
  if (has_shift_) {
    const Eigen::MatrixXcd X = shift_internal_ * rho;
    out += cplx(0.0, -1.0) * (X - X.adjoint());
  }

  // Only column operations: with rho Hermitian, P = rho L^dag gives
  // L rho = P^dag and (L^dag L rho)^dag = P L.
  ws.P.resize(dim_, dim_);
  ws.T.resize(dim_, dim_);
  ws.J.setZero(dim_, dim_);
  for (const auto& ch : channels_) {
    const SectorRange pr = clamp(ch.shift == 0 ? SectorRange{sectors.lo - 1, sectors.hi + 1}
                                               : SectorRange{sectors.lo + ch.shift, sectors.hi + ch.shift});
    ws.P.setZero();
    for (const auto& p : ch.parts) shift_columns(ws.P, rho, std::conj(p.w), p.atom, p.raising, sectors);
    ws.T = ws.P.adjoint();
    const SectorRange tr{-pr.hi, -pr.lo};
    for (const auto& p : ch.parts) {
      shift_columns(out, ws.T, ch.lambda * std::conj(p.w), p.atom, p.raising, tr);
      shift_columns(ws.J, ws.P, ch.lambda * p.w, p.atom, !p.raising, pr);
    }
  }
  out -= 0.5 * (ws.J + ws.J.adjoint());
}

void Generator::apply_hermitian(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
  Workspace ws;
  Eigen::MatrixXcd tmp;
  apply_internal(to_internal(rho), tmp, full_range(), ws);
  out = from_internal(tmp);
}

void Generator::apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
  check_dims(rho);
  out.resize(dim_, dim_);
  coherent_part(rho, out);
  Eigen::MatrixXcd T(dim_, dim_);
  Eigen::MatrixXcd P(dim_, dim_);
  for (const auto& ch : channels_) {
    T.setZero();
    P.setZero();
    for (const auto& p : ch.parts) {
      row_shift(T, rho, p.w, Index{1} << p.atom, p.raising);
      col_shift(P, rho, std::conj(p.w), Index{1} << p.atom, p.raising);
    }
    for (const auto& p : ch.parts) {
      const Index b = Index{1} << p.atom;
      col_shift(out, T, ch.lambda * std::conj(p.w), b, p.raising);
      row_shift(out, T, -0.5 * ch.lambda * std::conj(p.w), b, !p.raising);
      col_shift(out, P, -0.5 * ch.lambda * p.w, b, !p.raising);
    }
  }
}

Eigen::MatrixXcd Generator::operator()(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out;
  apply(rho, out);
  return out;
}

Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const SystemHamiltonian& H, const RateSet& rates,
                              CrossPairing pairing) {
  check_state_dims(rho, Index{1} << rates.n_atoms());
  if (H.n_atoms != rates.n_atoms()) throw DimensionError("Hamiltonian and rate set disagree on the number of atoms");
  return Generator(H, rates, pairing)(rho);
}

Eigen::MatrixXcd build_superoperator(const SystemHamiltonian& H, const RateSet& rates, CrossPairing pairing,
                                     int n_max_dense) {
  using qubit::SparseMatrixC;
  const int n = rates.n_atoms();
  if (n_max_dense > kDenseHardCap)
    throw CapacityError("dense superoperator limit cannot exceed " + std::to_string(kDenseHardCap) + " atoms");
  if (n > n_max_dense)
    throw CapacityError("dense superoperator requested for " + std::to_string(n) + " atoms, limit is " +
                        std::to_string(n_max_dense));
  if (H.n_atoms != n) throw DimensionError("Hamiltonian and rate set disagree on the number of atoms");

  const Index dim = Index{1} << n;
  const SparseMatrixC I = qubit::identity(static_cast<int>(dim));
  SparseMatrixC L(dim * dim, dim * dim);

  if (!rates.has_wedge_II()) {
    const SparseMatrixC Hs = H.matrix().sparseView();
    const SparseMatrixC HsT = Hs.transpose();
    L += cplx(0.0, -1.0) * (qubit::kron(I, Hs) - qubit::kron(HsT, I));
  }

  auto op = [n](const Jump& j) {
    return qubit::embed(qubit::single(j.raising ? qubit::Op::plus : qubit::Op::minus), j.atom, n);
  };
  for (const auto& t : dissipator_terms(rates, pairing)) {
    const SparseMatrixC A = op(t.A);
    const SparseMatrixC B = op(t.B);
    const SparseMatrixC BA = B * A;
    const SparseMatrixC BT = B.transpose();
    const SparseMatrixC Bdag = B.adjoint();
    const SparseMatrixC Aconj = A.conjugate();
    const SparseMatrixC BAconj = BA.conjugate();
    // c (A rho B - B A rho) + conj(c) (B^dag rho A^dag - rho A^dag B^dag)
    L += t.coef * (qubit::kron(BT, A) - qubit::kron(I, BA));
    L += std::conj(t.coef) * (qubit::kron(Aconj, Bdag) - qubit::kron(BAconj, I));
  }
  return Eigen::MatrixXcd(L);
}

SteadyStateAnalysis steady_state_analysis(const Eigen::MatrixXcd& L, double gamma0) {
  if (L.rows() != L.cols()) throw DimensionError("Liouvillian must be square");
  SteadyStateAnalysis out;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(L, false);
  if (solver.info() != Eigen::Success) throw NumericalError("Liouvillian eigen-decomposition failed");
  out.spectrum = solver.eigenvalues();
  const double tol = 1e-9 * (gamma0 > 0.0 ? gamma0 : 1.0);
  for (Index k = 0; k < out.spectrum.size(); ++k)
    if (std::abs(out.spectrum[k]) < tol) ++out.zero_multiplicity;

  if (out.zero_multiplicity > 0) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(L, Eigen::ComputeFullV);
    const Index m = out.zero_multiplicity;
    out.null_basis = svd.matrixV().rightCols(m);
  }
  return out;
}

Eigen::MatrixXcd thermal_state(const SystemHamiltonian& H, double beta) {
  if (!(beta > 0.0)) throw DomainError("inverse temperature must be > 0");
  const double e0 = H.energies.minCoeff();
  Eigen::VectorXd w = (-beta * (H.energies.array() - e0)).exp();
  w /= w.sum();
  return w.cast<cplx>().asDiagonal();
}

double thermal_residual(const SystemHamiltonian& H, const RateSet& rates, double beta) {
  if (rates.counter_accelerating())
    throw DomainError("thermal_residual applies to single-wedge configurations");
  return lindblad_rhs(thermal_state(H, beta), H, rates).norm();
}

}  // namespace rindler

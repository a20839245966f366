#pragma once

// Lindblad generator for the atomic ensemble: Hamiltonian, fast matrix-action
// right-hand side, dense superoperator and spectral analysis.

#include <array>
#include <cstdint>
#include <utility>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "rindler/kinematics.hpp"
#include "rindler/rates.hpp"

namespace rindler {

/// H_S = sum_i Omega_i sigma_i^+ sigma_i^-, stored by its diagonal.
struct SystemHamiltonian {
  int n_atoms = 0;
  Eigen::VectorXd energies;  // length 2^N

  Eigen::MatrixXcd matrix() const;
  static SystemHamiltonian zero(int n_atoms);
};

SystemHamiltonian build_hamiltonian(std::span<const double> Omega);
/// Requires a single-wedge configuration.
SystemHamiltonian build_hamiltonian(const FrameConfig& frame, std::span<const AtomSpec> atoms);
SystemHamiltonian build_hamiltonian(const RateSet& rates);

enum class Picture { schroedinger, interaction };

/// Range [lo, hi] of coherence orders m = popcount(row) - popcount(col).
struct SectorRange {
  int lo = 0;
  int hi = 0;
};

/// Compiled generator. The dissipator is diagonalized into channels
///   D(rho) = sum_k lambda_k L_k rho L_k^dag - N rho - rho N^dag,
/// with each L_k a combination of single-atom jumps. Configurations with a
/// wedge-II atom always run in the interaction picture: the Hamiltonian is
/// dropped.
///
/// Internally states are stored in an excitation-ordered basis (basis states
/// sorted by popcount), where every coherence-order sector of a column is a
/// contiguous row segment. When the generator conserves excitation number the
/// occupied sectors never change, and only those segments are touched.
class Generator {
 public:
  struct Workspace {
    Eigen::MatrixXcd P, T, J;
  };

  Generator(const SystemHamiltonian& H, const RateSet& rates,
            CrossPairing pairing = CrossPairing::anomalous);

  int n_atoms() const { return n_atoms_; }
  Eigen::Index dim() const { return dim_; }
  Picture picture() const { return picture_; }
  CrossPairing pairing() const { return pairing_; }
  const RateSet& rates() const { return rates_; }
  const SystemHamiltonian& hamiltonian() const { return H_; }
  const std::vector<DissipatorTerm>& terms() const { return terms_; }
  std::size_t channel_count() const { return channels_.size(); }
  bool conserves_excitations() const { return conserving_; }

  /// out = L(rho) for an arbitrary square matrix (reference path).
  void apply(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;
  /// Same, assuming rho is Hermitian.
  void apply_hermitian(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;
  Eigen::MatrixXcd operator()(const Eigen::MatrixXcd& rho) const;

  // Excitation-ordered representation used by the integrator.
  Eigen::MatrixXcd to_internal(const Eigen::MatrixXcd& rho) const;
  Eigen::MatrixXcd from_internal(const Eigen::MatrixXcd& rho) const;
  /// Sectors the evolution of rho can populate: its own occupied range if
  /// excitations are conserved, everything otherwise.
  SectorRange reachable_sectors(const Eigen::MatrixXcd& rho) const;
  SectorRange full_range() const { return {-n_atoms_, n_atoms_}; }
  /// Hermitian internal-basis action restricted to `sectors`.
  void apply_internal(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out, SectorRange sectors,
                      Workspace& ws) const;
  /// Offsets of the popcount blocks in the internal basis (size N + 2).
  const std::vector<Eigen::Index>& block_offsets() const { return offset_; }
  /// Basis state stored at internal index i.
  std::uint32_t state_at(Eigen::Index i) const { return perm_[i]; }

 private:
  struct Component {
    int atom;
    bool raising;
    cplx w;
  };
  struct Channel {
    double lambda;
    int shift;  // coherence-order shift of rho L^dag: +1 lowering, -1 raising, 0 mixed
    std::vector<Component> parts;
  };
  using Pairs = std::vector<std::pair<Eigen::Index, Eigen::Index>>;

  void check_dims(const Eigen::MatrixXcd& rho) const;
  void coherent_part(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const;
  void shift_columns(Eigen::MatrixXcd& dst, const Eigen::MatrixXcd& src, cplx coef, int atom, bool set,
                     SectorRange src_range) const;

  int n_atoms_;
  Eigen::Index dim_;
  Picture picture_;
  CrossPairing pairing_;
  RateSet rates_;
  SystemHamiltonian H_;
  std::vector<DissipatorTerm> terms_;
  std::vector<Channel> channels_;
  bool conserving_ = true;
  bool has_shift_ = false;
  Eigen::SparseMatrix<cplx> shift_;           // Hermitian remainder of N, acts as a Hamiltonian
  Eigen::SparseMatrix<cplx> shift_internal_;  // same, excitation-ordered basis

  std::vector<std::uint32_t> perm_;  // internal index -> basis state
  std::vector<Eigen::Index> pos_;    // basis state -> internal index
  std::vector<Eigen::Index> offset_;
  std::vector<int> popc_;            // popcount per internal index
  Eigen::VectorXd energies_internal_;
  std::vector<std::array<Pairs, 2>> pairs_;  // [atom][set]: (to, from) internal columns
};

/// Direct evaluation of the master equation right-hand side.
Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho, const SystemHamiltonian& H, const RateSet& rates,
                              CrossPairing pairing = CrossPairing::anomalous);

inline constexpr int kDenseHardCap = 6;

/// 4^N x 4^N generator acting on column-stacked density matrices, assembled
/// term by term from Kronecker products (vec(A X B) = (B^T x A) vec X).
Eigen::MatrixXcd build_superoperator(const SystemHamiltonian& H, const RateSet& rates,
                                     CrossPairing pairing = CrossPairing::anomalous, int n_max_dense = 4);

struct SteadyStateAnalysis {
  Eigen::VectorXcd spectrum;
  int zero_multiplicity = 0;
  Eigen::MatrixXcd null_basis;  // orthonormal columns spanning ker L
};

/// Zero eigenvalues are those with |lambda| < 1e-9 gamma0.
SteadyStateAnalysis steady_state_analysis(const Eigen::MatrixXcd& L, double gamma0);

/// exp(-beta H) / Z.
Eigen::MatrixXcd thermal_state(const SystemHamiltonian& H, double beta);

/// ||L(rho_th)||_F for a single-wedge configuration.
double thermal_residual(const SystemHamiltonian& H, const RateSet& rates, double beta);

}  // namespace rindler

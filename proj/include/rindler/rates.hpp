#pragma once

// Markovian, secular dissipative rates for co- and counter-accelerating
// detector ensembles.

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rindler/kinematics.hpp"

namespace rindler {

using cplx = std::complex<double>;

struct RateOptions {
  /// Replaces the Unruh value 2 pi / a (used to emulate zero or chosen occupation).
  std::optional<double> beta_override;
  /// Conformal positions overriding the ones implied by each atom's alpha.
  /// Empty, or one entry per atom.
  std::vector<double> positions;
};

/// Emission / absorption rates between atoms of the same wedge plus anomalous
/// inter-wedge rates. Atom indices are global; wedge_I / wedge_II list them.
struct RateSet {
  Eigen::MatrixXcd gamma_minus_plus;  // N x N, emission channel, prefactor n + 1
  Eigen::MatrixXcd gamma_plus_minus;  // N x N, absorption channel, prefactor n
  Eigen::MatrixXcd cross_pp;          // N_I x N_II, sigma+ sigma+ pairing
  Eigen::MatrixXcd cross_mm;          // N_I x N_II, sigma- sigma- pairing
  std::vector<int> wedge_I;
  std::vector<int> wedge_II;
  std::vector<KinematicState> states;  // per atom, positions overrides applied
  double beta = 0.0;
  double gamma0 = 0.0;

  int n_atoms() const { return static_cast<int>(gamma_minus_plus.rows()); }
  bool has_wedge_II() const { return !wedge_II.empty(); }
  bool counter_accelerating() const { return !wedge_I.empty() && !wedge_II.empty(); }

  /// Copy with every inter-atom rate removed (independent baths).
  RateSet without_collective_terms() const;
};

/// s_i = (d tau_i / d tau) g_i, so that G_nj = s_n s_j.
double coupling_weight(const FrameConfig& frame, const AtomSpec& atom);

/// All atoms must share one wedge.
RateSet same_wedge_rates(const FrameConfig& frame, std::span<const AtomSpec> atoms,
                         const RateOptions& options = {});

/// Fills only cross_pp / cross_mm; atoms I occupy global indices [0, N_I).
RateSet cross_wedge_rates(const FrameConfig& frame, std::span<const AtomSpec> atoms_I,
                          std::span<const AtomSpec> atoms_II, const RateOptions& options = {});

/// General entry point: atoms in any wedge order, global indices preserved.
RateSet build_rates(const FrameConfig& frame, std::span<const AtomSpec> atoms,
                    const RateOptions& options = {});

/// How inter-wedge terms pair jump operators.
enum class CrossPairing {
  anomalous,  // sigma+ rho sigma+ / sigma- rho sigma- across wedges
  literal,    // sigma+ with sigma- across wedges, labels of the long-time equation
};

/// One jump operator sigma_j^- (raising = false) or sigma_j^+.
struct Jump {
  int atom = 0;
  bool raising = false;
  friend bool operator==(const Jump&, const Jump&) = default;
};

/// coef [A rho, B] + h.c.
struct DissipatorTerm {
  cplx coef;
  Jump A;
  Jump B;
};

/// Expands a RateSet into the explicit sum of commutator terms of the master
/// equation. Same-wedge terms are
///   gamma+-_ij [s_j^+ rho, s_i^-] + gamma-+_ij [s_j^- rho, s_i^+];
/// anomalous cross terms (i in I, k in II, X_ik = cross[i,k], X_ki = conj X_ik)
///   -X_ki [s_i^h rho, s_k^h] - X_ik [s_k^h rho, s_i^h],  h in {+, -}.
std::vector<DissipatorTerm> dissipator_terms(const RateSet& rates,
                                             CrossPairing pairing = CrossPairing::anomalous);

/// Hermitian coefficient matrix K over the jump basis {s_0^-..s_{N-1}^-, s_0^+..s_{N-1}^+}
/// such that the jump part of the generator is sum_uv 2 K_uv J_u rho J_v^dagger.
/// For Hermitian gamma matrices the diagonal blocks are gamma^T.
Eigen::MatrixXcd kossakowski_matrix(const RateSet& rates,
                                    CrossPairing pairing = CrossPairing::anomalous);

double kossakowski_min_eig(const RateSet& rates, CrossPairing pairing = CrossPairing::anomalous);

}  // namespace rindler

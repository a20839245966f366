#include "rindler/rates.hpp"

#include <cmath>

#include "rindler/errors.hpp"

namespace rindler {
namespace {

struct Resolved {
  std::vector<KinematicState> states;
  std::vector<double> s;
  double beta = 0.0;
};

Resolved resolve(const FrameConfig& frame, std::span<const AtomSpec> atoms, const RateOptions& options) {
  validate(frame);
  if (!options.positions.empty() && options.positions.size() != atoms.size())
    throw DimensionError("position overrides must match the number of atoms");
  Resolved r;
  r.states = kinematic_states(frame, atoms);
  r.s.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!options.positions.empty()) r.states[i].xi = options.positions[i];
    if (!(r.states[i].Omega > 0.0))
      throw DomainError("red-shifted frequency of atom " + std::to_string(i) + " must be > 0");
    r.s.push_back(coupling_weight(frame, atoms[i]));
  }
  r.beta = options.beta_override ? *options.beta_override : unruh_beta(frame);
  if (!(r.beta > 0.0)) throw DomainError("inverse temperature must be > 0");
  return r;
}

bool resonant(const FrameConfig& frame, double a, double b) { return std::abs(a - b) < frame.eps_res; }

}  // namespace

RateSet RateSet::without_collective_terms() const {
  RateSet out = *this;
  const int n = n_atoms();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (j != k) {
        out.gamma_minus_plus(j, k) = 0.0;
        out.gamma_plus_minus(j, k) = 0.0;
      }
  out.cross_pp.setZero();
  out.cross_mm.setZero();
  return out;
}

double coupling_weight(const FrameConfig& frame, const AtomSpec& atom) {
  validate(atom);
  if (!(frame.a > 0.0)) throw DomainError("frame acceleration a must be > 0");
  return frame.a / atom.alpha * atom.g;
}

RateSet build_rates(const FrameConfig& frame, std::span<const AtomSpec> atoms, const RateOptions& options) {
  const Resolved r = resolve(frame, atoms, options);
  const int n = static_cast<int>(atoms.size());

  RateSet rates;
  rates.states = r.states;
  rates.beta = r.beta;
  rates.gamma0 = frame.gamma0;
  rates.gamma_minus_plus = Eigen::MatrixXcd::Zero(n, n);
  rates.gamma_plus_minus = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) (atoms[i].wedge == Wedge::I ? rates.wedge_I : rates.wedge_II).push_back(i);

  // Upper triangle from the row frequency k0_j = Omega_j; the lower triangle
  // mirrors it so both matrices are Hermitian by construction.
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      if (atoms[j].wedge != atoms[k].wedge) continue;
      const auto& sj = r.states[j];
      const auto& sk = r.states[k];
      if (j != k && !resonant(frame, sj.Omega, sk.Omega)) continue;
      const double occ = thermal_occupation(r.beta, sj.Omega);
      const double G = frame.gamma0 * r.s[j] * r.s[k];
      const cplx phase = j == k ? cplx(1.0) : std::polar(1.0, sj.Omega * (sj.xi - sk.xi));
      rates.gamma_minus_plus(j, k) = G * (occ + 1.0) * phase;
      rates.gamma_plus_minus(j, k) = G * occ * phase;
      if (j != k) {
        rates.gamma_minus_plus(k, j) = std::conj(rates.gamma_minus_plus(j, k));
        rates.gamma_plus_minus(k, j) = std::conj(rates.gamma_plus_minus(j, k));
      }
    }
  }

  const auto nI = static_cast<int>(rates.wedge_I.size());
  const auto nII = static_cast<int>(rates.wedge_II.size());
  rates.cross_pp = Eigen::MatrixXcd::Zero(nI, nII);
  rates.cross_mm = Eigen::MatrixXcd::Zero(nI, nII);
  for (int p = 0; p < nI; ++p) {
    for (int q = 0; q < nII; ++q) {
      const int i = rates.wedge_I[p];
      const int k = rates.wedge_II[q];
      const auto& si = r.states[i];
      const auto& sk = r.states[k];
      if (!resonant(frame, si.Omega, sk.Omega)) continue;
      const double occ = thermal_occupation(r.beta, si.Omega);
      const cplx value = frame.gamma0 * r.s[i] * r.s[k] * std::sqrt(occ * (1.0 + occ)) *
                         std::polar(1.0, si.Omega * (si.xi - sk.xi));
      rates.cross_pp(p, q) = value;
      rates.cross_mm(p, q) = value;
    }
  }
  return rates;
}

RateSet same_wedge_rates(const FrameConfig& frame, std::span<const AtomSpec> atoms, const RateOptions& options) {
  for (const auto& atom : atoms)
    if (atom.wedge != atoms.front().wedge) throw DomainError("same_wedge_rates: atoms span both wedges");
  return build_rates(frame, atoms, options);
}

RateSet cross_wedge_rates(const FrameConfig& frame, std::span<const AtomSpec> atoms_I,
                          std::span<const AtomSpec> atoms_II, const RateOptions& options) {
  if (atoms_I.empty() || atoms_II.empty()) throw DomainError("cross_wedge_rates: both wedges must be populated");
  std::vector<AtomSpec> all;
  for (auto atom : atoms_I) {
    atom.wedge = Wedge::I;
    all.push_back(atom);
  }
  for (auto atom : atoms_II) {
    atom.wedge = Wedge::II;
    all.push_back(atom);
  }
  RateSet rates = build_rates(frame, all, options);
  rates.gamma_minus_plus.setZero();
  rates.gamma_plus_minus.setZero();
  return rates;
}

std::vector<DissipatorTerm> dissipator_terms(const RateSet& rates, CrossPairing pairing) {
  std::vector<DissipatorTerm> terms;
  const int n = rates.n_atoms();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx absorb = rates.gamma_plus_minus(i, j);
      const cplx emit = rates.gamma_minus_plus(i, j);
      if (absorb != 0.0) terms.push_back({absorb, {j, true}, {i, false}});
      if (emit != 0.0) terms.push_back({emit, {j, false}, {i, true}});
    }
  }
  for (int p = 0; p < rates.cross_pp.rows(); ++p) {
    for (int q = 0; q < rates.cross_pp.cols(); ++q) {
      const int i = rates.wedge_I[p];
      const int k = rates.wedge_II[q];
      const cplx xpp = rates.cross_pp(p, q);
      const cplx xmm = rates.cross_mm(p, q);
      if (xpp == 0.0 && xmm == 0.0) continue;
      if (pairing == CrossPairing::anomalous) {
        terms.push_back({-std::conj(xpp), {i, true}, {k, true}});
        terms.push_back({-std::conj(xmm), {i, false}, {k, false}});
        terms.push_back({-xpp, {k, true}, {i, true}});
        terms.push_back({-xmm, {k, false}, {i, false}});
      } else {
        terms.push_back({-xpp, {i, true}, {k, false}});
        terms.push_back({-xmm, {i, false}, {k, true}});
        terms.push_back({-xpp, {k, true}, {i, false}});
        terms.push_back({-xmm, {k, false}, {i, true}});
      }
    }
  }
  return terms;
}

Eigen::MatrixXcd kossakowski_matrix(const RateSet& rates, CrossPairing pairing) {
  const int n = rates.n_atoms();
  auto index = [n](const Jump& j) { return j.atom + (j.raising ? n : 0); };
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (const auto& t : dissipator_terms(rates, pairing)) {
    // c A rho B + conj(c) B^dagger rho A^dagger, with J_v = B^dagger.
    const int u = index(t.A);
    const int v = index({t.B.atom, !t.B.raising});
    K(u, v) += t.coef;
    K(v, u) += std::conj(t.coef);
  }
  return 0.5 * K;
}

double kossakowski_min_eig(const RateSet& rates, CrossPairing pairing) {
  const Eigen::MatrixXcd K = kossakowski_matrix(rates, pairing);
  if (K.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(K, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Kossakowski eigen-decomposition failed");
  return solver.eigenvalues().minCoeff();
}

}  // namespace rindler

#include "rindler/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "rindler/errors.hpp"
#include "rindler/qubit_ops.hpp"

namespace rindler {
namespace {

using Index = Eigen::Index;
using qubit::Factor;
using qubit::Op;

double min_eigenvalue(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("state eigen-decomposition failed");
  return solver.eigenvalues()[0];
}

int atoms_of(const Eigen::MatrixXcd& rho) {
  const Index dim = rho.rows();
  if (dim < 1 || rho.cols() != dim || (dim & (dim - 1)) != 0)
    throw DimensionError("state dimension must be a power of two");
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  return n;
}

void check_atom(const Eigen::MatrixXcd& rho, int j) {
  if (j < 0 || j >= atoms_of(rho)) throw DimensionError("atom index " + std::to_string(j) + " out of range");
}

Eigen::Matrix4cd spin_flipped(const Eigen::Matrix4cd& rho2) {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  return yy * rho2.conjugate() * yy;
}

void check_two_qubit_state(const Eigen::Matrix4cd& rho2) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(0.5 * (rho2 + rho2.adjoint()), Eigen::EigenvaluesOnly);
  if (solver.eigenvalues()[0] < -1e-9) throw DomainError("two-qubit state is not positive semidefinite");
}

double wootters(std::vector<double> lambda) {
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

}  // namespace

void validate_density_matrix(const Eigen::MatrixXcd& rho) {
  atoms_of(rho);
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-10) throw DomainError("density matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) throw DomainError("density matrix trace is " + std::to_string(tr));
  const double lo = min_eigenvalue(rho);
  if (lo < -1e-9) throw DomainError("density matrix has eigenvalue " + std::to_string(lo));
}

double population(const Eigen::MatrixXcd& rho, int j) {
  check_atom(rho, j);
  const std::uint32_t bit = 1u << j;
  double p = 0.0;
  for (Index b = 0; b < rho.rows(); ++b)
    if (b & bit) p += rho(b, b).real();
  if (p < -1e-9) throw DomainError("negative population " + std::to_string(p) + " for atom " + std::to_string(j));
  return std::clamp(p, 0.0, 1.0);
}

double total_emission_rate(const Eigen::MatrixXcd& rho, const Generator& generator) {
  Eigen::MatrixXcd drho;
  generator.apply(rho, drho);
  double dP = 0.0;
  for (Index b = 0; b < drho.rows(); ++b) dP += qubit::popcount(static_cast<std::uint32_t>(b)) * drho(b, b).real();
  return -dP;
}

double coherence_measure(const Eigen::MatrixXcd& rho) {
  const int n = atoms_of(rho);
  double c = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      if (j != l) c += std::abs(qubit::expectation(rho, {{j, Op::plus}, {l, Op::minus}}));
  return c;
}

Eigen::Matrix4cd partial_trace(const Eigen::MatrixXcd& rho, int i, int j) {
  const int n = atoms_of(rho);
  if (i == j) throw DomainError("partial_trace needs two distinct atoms");
  if (i < 0 || j < 0 || i >= n || j >= n) throw DimensionError("partial_trace atom index out of range");
  const Index bi = Index{1} << i, bj = Index{1} << j;
  const Index keep = bi | bj;
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  auto local = [&](Index b) { return 2 * ((b & bi) ? 1 : 0) + ((b & bj) ? 1 : 0); };
  for (Index c = 0; c < rho.cols(); ++c)
    for (Index r = 0; r < rho.rows(); ++r)
      if (((r ^ c) & ~keep) == 0) out(local(r), local(c)) += rho(r, c);
  return out;
}

double concurrence(const Eigen::Matrix4cd& rho2) {
  check_two_qubit_state(rho2);
  const Eigen::Matrix4cd R = rho2 * spin_flipped(rho2);
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> solver(R, false);
  if (solver.info() != Eigen::Success) throw NumericalError("concurrence eigen-decomposition failed");
  std::vector<double> lambda;
  for (Index k = 0; k < 4; ++k) lambda.push_back(std::sqrt(std::max(0.0, solver.eigenvalues()[k].real())));
  return wootters(lambda);
}

double concurrence_hermitian(const Eigen::Matrix4cd& rho2) {
  check_two_qubit_state(rho2);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(0.5 * (rho2 + rho2.adjoint()));
  const Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4cd sq = es.eigenvectors() * root.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  const Eigen::Matrix4cd M = sq * spin_flipped(rho2) * sq;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> rs(0.5 * (M + M.adjoint()), Eigen::EigenvaluesOnly);
  std::vector<double> lambda;
  for (Index k = 0; k < 4; ++k) lambda.push_back(std::sqrt(std::max(0.0, rs.eigenvalues()[k])));
  return wootters(lambda);
}

double inter_wedge_coherence(const Eigen::MatrixXcd& rho, const RateSet& rates) {
  double best = 0.0;
  for (int i : rates.wedge_I)
    for (int k : rates.wedge_II) {
      best = std::max(best, std::abs(qubit::expectation(rho, {{i, Op::plus}, {k, Op::minus}})));
      best = std::max(best, std::abs(qubit::expectation(rho, {{i, Op::plus}, {k, Op::plus}})));
    }
  return best;
}

TimeSeries evolve(const Eigen::MatrixXcd& rho0, const Generator& generator, const EvolveOptions& options) {
  if (!(options.dt > 0.0)) throw DomainError("time step must be > 0");
  if (!(options.t_max >= 0.0)) throw DomainError("t_max must be >= 0");
  if (options.record_every < 1 || options.check_every < 1 || options.retain_every < 1)
    throw DomainError("record/check/retain intervals must be >= 1");
  if (rho0.rows() != generator.dim()) throw DimensionError("initial state does not match the generator");
  validate_density_matrix(rho0);

  const int n = generator.n_atoms();
  const auto [ci, cj] = options.concurrence_pair;
  const bool with_conc = n >= 2;
  if (with_conc && (ci == cj || ci < 0 || cj < 0 || ci >= n || cj >= n))
    throw DimensionError("concurrence pair out of range");

  std::int64_t n_steps = std::llround(options.t_max / options.dt);
  if (options.t_max > 0.0 && n_steps == 0) n_steps = 1;
  const double h = n_steps > 0 ? options.t_max / static_cast<double>(n_steps) : options.dt;

  TimeSeries series;
  series.n_atoms = n;
  series.dt = h;

  // Integrate in the generator's excitation-ordered basis; observables are
  // taken on the state mapped back to the computational basis.
  const SectorRange sectors = generator.reachable_sectors(rho0);
  const bool block_diagonal = sectors.lo == 0 && sectors.hi == 0;
  const auto& offsets = generator.block_offsets();
  auto min_eig_internal = [&](const Eigen::MatrixXcd& r) {
    if (!block_diagonal) return min_eigenvalue(r);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
      const Index a = offsets[k], len = offsets[k + 1] - a;
      lo = std::min(lo, min_eigenvalue(r.block(a, a, len, len)));
    }
    return lo;
  };

  Generator::Workspace ws;
  Eigen::MatrixXcd rho = generator.to_internal(rho0);
  const Index dim = rho.rows();
  Eigen::MatrixXcd k1(dim, dim), k2(dim, dim), k3(dim, dim), k4(dim, dim), tmp(dim, dim);
  double last_drift = 0.0;

  for (std::int64_t s = 0;; ++s) {
    const double t = static_cast<double>(s) * h;
    const bool last = s == n_steps;
    generator.apply_internal(rho, k1, sectors, ws);
    const bool record = s % options.record_every == 0 || last;
    const bool retain = options.retain_states && (s % options.retain_every == 0 || last);

    if (record || retain) {
      const Eigen::MatrixXcd state = generator.from_internal(rho);
      if (record) {
        Record rec;
        rec.t = t;
        rec.populations.resize(n);
        for (int j = 0; j < n; ++j) {
          rec.populations[j] = population(state, j);
          rec.P_tot += rec.populations[j];
        }
        double dP = 0.0;
        for (Index i = 0; i < dim; ++i) dP += qubit::popcount(generator.state_at(i)) * k1(i, i).real();
        rec.R_tot = -dP;
        rec.C_coh = coherence_measure(state);
        rec.C_conc = with_conc ? concurrence(partial_trace(state, ci, cj)) : 0.0;
        rec.trace_err = last_drift;
        rec.min_eig = min_eig_internal(rho);
        series.times.push_back(t);
        series.records.push_back(std::move(rec));
        if (options.observer) options.observer(t, state);
      }
      if (retain) {
        series.state_times.push_back(t);
        series.states.push_back(state);
      }
    }
    if (last) break;

    tmp = rho + (0.5 * h) * k1;
    generator.apply_internal(tmp, k2, sectors, ws);
    tmp = rho + (0.5 * h) * k2;
    generator.apply_internal(tmp, k3, sectors, ws);
    tmp = rho + h * k3;
    generator.apply_internal(tmp, k4, sectors, ws);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    tmp = 0.5 * (rho + rho.adjoint());
    rho = tmp;
    const double tr = rho.trace().real();
    last_drift = std::abs(tr - 1.0);
    if (!std::isfinite(tr)) throw IntegrationError(s + 1, "state became non-finite");
    if (last_drift > 1e-6) throw IntegrationError(s + 1, "trace drift " + std::to_string(last_drift));
    rho /= tr;
    if ((s + 1) % options.check_every == 0) {
      const double lo = min_eig_internal(rho);
      if (lo < -1e-6) throw IntegrationError(s + 1, "minimum eigenvalue " + std::to_string(lo));
    }
  }
  return series;
}

cplx correlation_derivative(const Eigen::MatrixXcd& rho, const Generator& generator, int l, int n) {
  const RateSet& rates = generator.rates();
  const int N = rates.n_atoms();
  if (l < 0 || n < 0 || l >= N || n >= N) throw DimensionError("correlation index out of range");
  auto E = [&rho](std::initializer_list<Factor> f) { return qubit::expectation(rho, f); };
  const auto& gmp = rates.gamma_minus_plus;
  const auto& gpm = rates.gamma_plus_minus;

  const auto& energies = generator.hamiltonian().energies;
  const double Omega_l = energies[Index{1} << l] - energies[0];
  const double Omega_n = energies[Index{1} << n] - energies[0];
  cplx d = cplx(0.0, Omega_l - Omega_n) * E({{l, Op::plus}, {n, Op::minus}});

  for (int j = 0; j < N; ++j) {
    d += gmp(n, j) * E({{l, Op::plus}, {n, Op::z}, {j, Op::minus}});
    d += std::conj(gmp(l, j)) * E({{j, Op::plus}, {l, Op::z}, {n, Op::minus}});
    d -= gpm(l, j) * E({{l, Op::z}, {n, Op::minus}, {j, Op::plus}});
    d -= std::conj(gpm(n, j)) * E({{j, Op::minus}, {l, Op::plus}, {n, Op::z}});
  }

  // Inter-wedge terms c [A rho, B] + h.c. contribute
  //   c <[B, Y] A> + conj(c) <A^dag [Y, B^dag]>,  Y = sigma_l^+ sigma_n^-.
  auto op = [](const Jump& j, bool dagger) { return (j.raising != dagger) ? Op::plus : Op::minus; };
  for (const auto& t : generator.terms()) {
    const bool a_in_II = std::find(rates.wedge_II.begin(), rates.wedge_II.end(), t.A.atom) != rates.wedge_II.end();
    const bool b_in_II = std::find(rates.wedge_II.begin(), rates.wedge_II.end(), t.B.atom) != rates.wedge_II.end();
    if (a_in_II == b_in_II) continue;
    const Factor A{t.A.atom, op(t.A, false)}, B{t.B.atom, op(t.B, false)};
    const Factor Ad{t.A.atom, op(t.A, true)}, Bd{t.B.atom, op(t.B, true)};
    const Factor Yl{l, Op::plus}, Yn{n, Op::minus};
    d += t.coef * (E({B, Yl, Yn, A}) - E({Yl, Yn, B, A}));
    d += std::conj(t.coef) * (E({Ad, Yl, Yn, Bd}) - E({Ad, Bd, Yl, Yn}));
  }
  return d;
}

double correlation_oracle(const TimeSeries& series, const Generator& generator) {
  const auto& st = series.states;
  if (st.size() < 3) throw DomainError("correlation oracle needs at least 3 retained states");
  const double h = series.state_times[1] - series.state_times[0];
  for (std::size_t k = 1; k + 1 < st.size(); ++k)
    if (std::abs((series.state_times[k + 1] - series.state_times[k]) - h) > 1e-9 * h)
      throw DomainError("correlation oracle needs uniformly spaced states");
  const int N = generator.n_atoms();
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < st.size(); ++k)
    for (int l = 0; l < N; ++l)
      for (int n = 0; n < N; ++n) {
        const cplx ahead = qubit::expectation(st[k + 1], {{l, Op::plus}, {n, Op::minus}});
        const cplx behind = qubit::expectation(st[k - 1], {{l, Op::plus}, {n, Op::minus}});
        const cplx fd = (ahead - behind) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - correlation_derivative(st[k], generator, l, n)));
      }
  return worst;
}

}  // namespace rindler

#pragma once

// Fixed-step integration of the master equation and the observables used to
// characterize superradiance and entanglement generation.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rindler/liouvillian.hpp"

namespace rindler {

struct EvolveOptions {
  double t_max = 20.0;
  double dt = 1e-3;
  int check_every = 100;
  int record_every = 10;
  bool retain_states = false;
  int retain_every = 10;
  std::pair<int, int> concurrence_pair{0, 1};  // ignored for N < 2
  /// Called at every record time with the state in the computational basis.
  std::function<void(double, const Eigen::MatrixXcd&)> observer;
};

struct Record {
  double t = 0.0;
  std::vector<double> populations;
  double P_tot = 0.0;
  double R_tot = 0.0;
  double C_coh = 0.0;
  double C_conc = 0.0;
  double trace_err = 0.0;  // |Tr - 1| before renormalization of the last step
  double min_eig = 0.0;
};

struct TimeSeries {
  int n_atoms = 0;
  double dt = 0.0;  // effective step t_max / n_steps
  std::vector<double> times;
  std::vector<Record> records;
  std::vector<double> state_times;
  std::vector<Eigen::MatrixXcd> states;
};

/// Throws DomainError unless rho is Hermitian and unit-trace within 1e-10 with
/// minimum eigenvalue >= -1e-9.
void validate_density_matrix(const Eigen::MatrixXcd& rho);

/// Classical RK4. After every step the state is re-Hermitized and its trace
/// renormalized; a drift above 1e-6, or a minimum eigenvalue below -1e-6 at a
/// check step, raises IntegrationError.
TimeSeries evolve(const Eigen::MatrixXcd& rho0, const Generator& generator, const EvolveOptions& options = {});

/// Tr(sigma_j^+ sigma_j^- rho).
double population(const Eigen::MatrixXcd& rho, int j);

/// -sum_j Tr(sigma_j^+ sigma_j^- L(rho)).
double total_emission_rate(const Eigen::MatrixXcd& rho, const Generator& generator);

/// sum_{j != l} |Tr(sigma_j^+ sigma_l^- rho)|.
double coherence_measure(const Eigen::MatrixXcd& rho);

/// Reduced state of atoms (i, j) in the basis |gg>, |ge>, |eg>, |ee> with atom i first.
Eigen::Matrix4cd partial_trace(const Eigen::MatrixXcd& rho, int i, int j);

/// Wootters concurrence from the spectrum of rho rho~.
double concurrence(const Eigen::Matrix4cd& rho2);
/// Same quantity from the Hermitian matrix sqrt(rho) rho~ sqrt(rho).
double concurrence_hermitian(const Eigen::Matrix4cd& rho2);

/// Largest |<sigma_i^+ sigma_k^->| or |<sigma_i^+ sigma_k^+>| over pairs i in
/// wedge I, k in wedge II.
double inter_wedge_coherence(const Eigen::MatrixXcd& rho, const RateSet& rates);

/// Right-hand side of the Heisenberg equation for <sigma_l^+ sigma_n^-> on a
/// given state, written with explicit three-operator expectations.
cplx correlation_derivative(const Eigen::MatrixXcd& rho, const Generator& generator, int l, int n);

/// Largest deviation between the centered difference of <sigma_l^+ sigma_n^->
/// over retained states and correlation_derivative, across all (l, n).
double correlation_oracle(const TimeSeries& series, const Generator& generator);

}  // namespace rindler

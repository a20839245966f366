#pragma once

// Seeded generators and small helpers shared by the unit and acceptance tests.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rindler/kinematics.hpp"
#include "rindler/rates.hpp"

namespace rindler::testing {

using cplx = std::complex<double>;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Eigen::MatrixXcd complex_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = cplx(normal(), normal());
    return m;
  }

  Eigen::MatrixXcd hermitian(Eigen::Index dim) {
    const Eigen::MatrixXcd m = complex_matrix(dim, dim);
    return 0.5 * (m + m.adjoint());
  }

  /// Full-rank density matrix G G^dag / Tr.
  Eigen::MatrixXcd density_matrix(Eigen::Index dim) {
    const Eigen::MatrixXcd g = complex_matrix(dim, dim);
    Eigen::MatrixXcd rho = g * g.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
  }

  /// Pure state |psi><psi|.
  Eigen::MatrixXcd pure_state(Eigen::Index dim) {
    Eigen::VectorXcd psi = complex_matrix(dim, 1);
    psi.normalize();
    return psi * psi.adjoint();
  }

  /// Random physical detector configuration. Frequencies are drawn from a
  /// small set so that resonant clusters actually occur.
  struct Config {
    FrameConfig frame;
    std::vector<AtomSpec> atoms;
  };

  Config detector_config(int n_min, int n_max, bool allow_wedge_II) {
    Config c;
    const int n = integer(n_min, n_max);
    c.frame.a = uniform(0.3, 8.0);
    c.frame.gamma0 = uniform(0.01, 0.5);
    const bool resonant = coin();
    for (int j = 0; j < n; ++j) {
      AtomSpec atom;
      atom.alpha = j == 0 ? c.frame.a : (coin() ? c.frame.a : uniform(0.2, 10.0));
      atom.omega = resonant ? atom.alpha / c.frame.a * 1.0 : static_cast<double>(integer(1, 3));
      atom.g = uniform(0.0, 1.5);
      atom.wedge = (allow_wedge_II && coin()) ? Wedge::II : Wedge::I;
      c.atoms.push_back(atom);
    }
    return c;
  }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Column-stacking vec.
inline Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

inline Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index dim) {
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), dim, dim);
}

}  // namespace rindler::testing

#pragma once

// Bose-Einstein-condensate analogue: Bogoliubov bath, optical-tweezer two-level
// impurities, their coupling to phonons, and the mapping onto detector inputs.
// Units hbar = 1.

#include <complex>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rindler/kinematics.hpp"
#include "rindler/rates.hpp"

namespace rindler::bec {

struct BogoliubovBath {
  double m = 1.0;    // boson mass
  double mu = 1.0;   // chemical potential
  double n0 = 50.0;  // condensate line density
  double L = 100.0;  // system length
  double u0 = 0.02;  // boson-boson interaction
  double T = 0.1;    // temperature
};

struct BogoliubovMode {
  double k = 0.0;
  double E = 0.0;
  double u = 0.0;
  double v = 0.0;
  double S = 0.0;  // u - v
};

/// Impurity of mass M in the well -V0 exp(-x^2 / w^2) centered at x.
struct TweezerSpec {
  double V0 = 1.0;
  double w = 1.0;
  double M = 2.0;
  double x = 0.0;
  double g = 0.0036;  // impurity-boson coupling
};

struct BoundStateCount {
  int closed_form = 0; // floor(2 sqrt(V0 M / (pi w)) - 1/2)
  int numeric = 0;  // Sturm count of the discretized well
  bool agree() const { return closed_form == numeric; }
};

struct TwoLevelResult {
  double a0 = 0.0;
  double Omega = 0.0;
  BoundStateCount n_b;
};

struct CouplingTensor {
  std::complex<double> G00, G11, G10;
  std::complex<double> G01() const { return std::conj(G10); }
};

void validate(const BogoliubovBath& bath);
void validate(const TweezerSpec& tweezer);

/// mu = u0 n0 is expected but not enforced; returns the relative mismatch.
double chemical_potential_mismatch(const BogoliubovBath& bath);

BogoliubovMode bogoliubov_mode(const BogoliubovBath& bath, double k);

int bound_states_closed_form(const TweezerSpec& tweezer);
/// Number of negative eigenvalues of -(1/2M) d^2/dx^2 - V0 exp(-x^2/w^2) on a
/// finite-difference grid, counted as sign changes of the zero-energy
/// solution (Sturm sequence). Outside |x| < 7w the potential is below 1e-21 V0
/// and the exact free zero-energy solution is used.
int bound_states_numeric(const TweezerSpec& tweezer);
BoundStateCount bound_state_count(const TweezerSpec& tweezer);

/// (4/5, 4/3) sqrt(M V0 / pi).
std::pair<double, double> two_level_window(double V0, double M);
bool in_two_level_window(const TweezerSpec& tweezer);

/// w^2/(2 a0^2) (2/a0^2 + 1/w^2)^3 - V0^2 M^2 w^4, divided by V0^2 M^2 w^4.
double variational_residual(const TweezerSpec& tweezer, double a0);
/// Root of the variational condition in (1e-3 w, 1e3 w) by bisection.
double variational_width(const TweezerSpec& tweezer);

double transition_energy(const TweezerSpec& tweezer, double a0);
TwoLevelResult two_level(const TweezerSpec& tweezer);

CouplingTensor coupling_tensor(const BogoliubovBath& bath, const BogoliubovMode& mode, double a0, double g);

/// k > 0 with E_k = Omega.
double resonant_wavenumber(const BogoliubovBath& bath, double Omega);

struct DetectorModel {
  FrameConfig frame;
  std::vector<AtomSpec> atoms;
  std::vector<double> positions;  // conformal positions, xi_i = x_i
  std::vector<TwoLevelResult> levels;
  std::vector<double> k_res;
  std::vector<std::complex<double>> C;  // G10 at the resonant wave number
  std::vector<std::string> warnings;

  RateOptions rate_options() const { return {std::nullopt, positions}; }
};

/// Temperature enters through a = 2 pi T (beta = 1/T). Every atom sits at the
/// reference acceleration with omega = Omega_i, and its coupling weight is
/// |C_i| / max_j |C_j|; gamma0 sets the absolute rate scale.
DetectorModel map_to_detector_model(const BogoliubovBath& bath, const std::vector<TweezerSpec>& tweezers,
                                    double gamma0 = 0.1, double eps_res = 1e-6);

// Sweep tables.
void write_dispersion_csv(std::ostream& out, const BogoliubovBath& bath, double k_min, double k_max, int points);
void write_width_sweep_csv(std::ostream& out, double V0, double M, int points);
void write_coupling_csv(std::ostream& out, const BogoliubovBath& bath, double a0, double g, double k_min,
                        double k_max, int points);
/// Returns the number of disagreeing grid points.
int write_bound_state_report(std::ostream& out, double V0_min, double V0_max, double w_min, double w_max, double M,
                             int points);

}  // namespace rindler::bec

#pragma once

// Rindler-frame geometry for uniformly accelerated two-level detectors.
//
// Natural units hbar = k_B = c = 1. Frequencies are measured in units of the
// reference transition frequency, times in its inverse. The frame parameter
// `a` is the proper acceleration of the reference atom, so that atom sits at
// conformal position xi = 0 and every other atom is red-shifted by a / alpha.

#include <span>
#include <vector>

namespace rindler {

enum class Wedge { I, II };

struct FrameConfig {
  double a = 1.0;          // reference acceleration (= alpha of atom 1)
  double eps_res = 1e-6;   // resonance window replacing delta(Omega_j - Omega_n)
  double gamma0 = 0.1;     // overall rate scale
};

struct AtomSpec {
  double omega = 1.0;  // proper transition frequency
  double alpha = 1.0;  // proper acceleration
  Wedge wedge = Wedge::I;
  double g = 1.0;      // constant switching times coupling, absorbed into one weight
};

struct KinematicState {
  double xi = 0.0;        // conformal position
  double redshift = 1.0;  // d tau_i / d tau = a / alpha
  double Omega = 1.0;     // red-shifted frequency
};

void validate(const FrameConfig& frame);
void validate(const AtomSpec& atom);

/// Conformal position fixed by alpha = a exp(-a xi).
double xi_from_alpha(const FrameConfig& frame, double alpha);
double alpha_from_xi(const FrameConfig& frame, double xi);

KinematicState kinematic_state(const FrameConfig& frame, const AtomSpec& atom);
std::vector<KinematicState> kinematic_states(const FrameConfig& frame, std::span<const AtomSpec> atoms);

/// Inverse Unruh temperature 2 pi / a.
double unruh_beta(const FrameConfig& frame);

/// Bose-Einstein occupation 1 / (exp(beta |k|) - 1). Throws at k = 0, where
/// the massless field is infrared divergent.
double thermal_occupation(double beta, double k);

/// r_k with tanh(r_k) = exp(-pi |k| / a); sinh^2 r_k equals the Unruh occupation.
double squeeze_parameter(const FrameConfig& frame, double k);

}  // namespace rindler

#include "rindler/kinematics.hpp"

#include <cmath>
#include <numbers>

#include "rindler/errors.hpp"

namespace rindler {

void validate(const FrameConfig& frame) {
  if (!(frame.a > 0.0)) throw DomainError("frame acceleration a must be > 0");
  if (!(frame.eps_res > 0.0)) throw DomainError("resonance tolerance eps_res must be > 0");
  if (!(frame.gamma0 >= 0.0)) throw DomainError("rate scale gamma0 must be >= 0");
}

void validate(const AtomSpec& atom) {
  if (!(atom.omega > 0.0)) throw DomainError("atom frequency omega must be > 0");
  if (!(atom.alpha > 0.0)) throw DomainError("atom acceleration alpha must be > 0");
  if (!(atom.g >= 0.0)) throw DomainError("atom coupling g must be >= 0");
}

double xi_from_alpha(const FrameConfig& frame, double alpha) {
  if (!(frame.a > 0.0)) throw DomainError("frame acceleration a must be > 0");
  if (!(alpha > 0.0)) throw DomainError("proper acceleration must be > 0");
  return -std::log(alpha / frame.a) / frame.a;
}

double alpha_from_xi(const FrameConfig& frame, double xi) {
  if (!(frame.a > 0.0)) throw DomainError("frame acceleration a must be > 0");
  return frame.a * std::exp(-frame.a * xi);
}

KinematicState kinematic_state(const FrameConfig& frame, const AtomSpec& atom) {
  validate(atom);
  KinematicState s;
  s.xi = xi_from_alpha(frame, atom.alpha);
  s.redshift = frame.a / atom.alpha;
  s.Omega = s.redshift * atom.omega;
  return s;
}

std::vector<KinematicState> kinematic_states(const FrameConfig& frame, std::span<const AtomSpec> atoms) {
  std::vector<KinematicState> out;
  out.reserve(atoms.size());
  for (const auto& atom : atoms) out.push_back(kinematic_state(frame, atom));
  return out;
}

double unruh_beta(const FrameConfig& frame) {
  if (!(frame.a > 0.0)) throw DomainError("frame acceleration a must be > 0");
  return 2.0 * std::numbers::pi / frame.a;
}

double thermal_occupation(double beta, double k) {
  if (!(beta > 0.0)) throw DomainError("inverse temperature must be > 0");
  if (k == 0.0) throw DomainError("thermal occupation diverges at k = 0 (infrared divergence)");
  return 1.0 / std::expm1(beta * std::abs(k));
}

double squeeze_parameter(const FrameConfig& frame, double k) {
  if (!(frame.a > 0.0)) throw DomainError("frame acceleration a must be > 0");
  if (k == 0.0) throw DomainError("squeeze parameter diverges at k = 0 (infrared divergence)");
  const double y = std::numbers::pi * std::abs(k) / frame.a;
  // r = atanh(exp(-y)). Near y = 0 the argument approaches 1, so 1 - x is
  // taken from expm1 instead.
  const double x = std::exp(-y);
  if (x < 0.5) return std::atanh(x);
  return 0.5 * (std::log1p(x) - std::log(-std::expm1(-y)));
}

}  // namespace rindler

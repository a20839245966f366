#include "rindler/bec_analogue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rindler/errors.hpp"
#include "rindler/format.hpp"

namespace rindler::bec {
namespace {

constexpr double kPi = std::numbers::pi;

double linspace(double lo, double hi, int i, int points) {
  return points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
}

double geomspace(double lo, double hi, int i, int points) {
  return points == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
}

}  // namespace

void validate(const BogoliubovBath& bath) {
  if (!(bath.m > 0.0)) throw DomainError("bath mass m must be > 0");
  if (!(bath.mu > 0.0)) throw DomainError("chemical potential mu must be > 0");
  if (!(bath.n0 > 0.0)) throw DomainError("condensate density n0 must be > 0");
  if (!(bath.L > 0.0)) throw DomainError("system length L must be > 0");
  if (!(bath.u0 > 0.0)) throw DomainError("interaction u0 must be > 0");
  if (!(bath.T > 0.0)) throw DomainError("bath temperature T must be > 0");
}

void validate(const TweezerSpec& tweezer) {
  if (!(tweezer.V0 > 0.0)) throw DomainError("tweezer depth V0 must be > 0");
  if (!(tweezer.w > 0.0)) throw DomainError("tweezer waist w must be > 0");
  if (!(tweezer.M > 0.0)) throw DomainError("impurity mass M must be > 0");
  if (!(tweezer.g >= 0.0)) throw DomainError("impurity coupling g must be >= 0");
}

double chemical_potential_mismatch(const BogoliubovBath& bath) {
  return std::abs(bath.mu - bath.u0 * bath.n0) / bath.mu;
}

BogoliubovMode bogoliubov_mode(const BogoliubovBath& bath, double k) {
  validate(bath);
  if (k == 0.0 || !std::isfinite(k)) throw DomainError("Bogoliubov mode at k = 0 is divergent");
  BogoliubovMode mode;
  mode.k = k;
  const double eps = k * k / (2.0 * bath.m);
  mode.E = std::sqrt(eps * (eps + 2.0 * bath.mu));
  // v^2 = ((eps + mu) / E - 1) / 2 rewritten without cancellation.
  const double v2 = bath.mu * bath.mu / (2.0 * mode.E * (eps + bath.mu + mode.E));
  mode.v = std::sqrt(v2);
  mode.u = std::sqrt(1.0 + v2);
  mode.S = 1.0 / (mode.u + mode.v);  // = u - v
  return mode;
}

int bound_states_closed_form(const TweezerSpec& tweezer) {
  validate(tweezer);
  // Shallow wells would give floor(-0.5 + small) = -1; a count is never negative.
  return std::max(0, static_cast<int>(std::floor(2.0 * std::sqrt(tweezer.V0 * tweezer.M / (kPi * tweezer.w)) - 0.5)));
}

int bound_states_numeric(const TweezerSpec& tweezer) {
  validate(tweezer);
  const double X = 7.0 * tweezer.w;
  const double h = std::min(tweezer.w / 200.0, 0.02 / std::sqrt(2.0 * tweezer.M * tweezer.V0));
  const auto n = static_cast<long long>(std::ceil(2.0 * X / h));
  if (n > 50'000'000) throw NumericalError("bound-state grid too large for this tweezer");
  const double step = 2.0 * X / static_cast<double>(n);
  const double c = 2.0 * tweezer.M * step * step;

  // Zero-energy solution, flat (bounded) to the left of the well.
  double prev = 1.0, cur = 1.0;
  int nodes = 0;
  for (long long i = 0; i <= n; ++i) {
    const double x = -X + static_cast<double>(i) * step;
    const double V = -tweezer.V0 * std::exp(-x * x / (tweezer.w * tweezer.w));
    const double next = 2.0 * cur - prev + c * V * cur;
    if ((next < 0.0) != (cur < 0.0)) ++nodes;
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e200) {
      prev *= 1e-200;
      cur *= 1e-200;
    }
  }
  // Free linear continuation crosses zero once more iff it heads toward zero.
  if (cur * (cur - prev) < 0.0) ++nodes;
  return nodes;
}

BoundStateCount bound_state_count(const TweezerSpec& tweezer) {
  return {bound_states_closed_form(tweezer), bound_states_numeric(tweezer)};
}

std::pair<double, double> two_level_window(double V0, double M) {
  if (!(V0 > 0.0) || !(M > 0.0)) throw DomainError("two_level_window needs V0 > 0 and M > 0");
  const double r = std::sqrt(M * V0 / kPi);
  return {0.8 * r, 4.0 / 3.0 * r};
}

bool in_two_level_window(const TweezerSpec& tweezer) {
  const auto [lo, hi] = two_level_window(tweezer.V0, tweezer.M);
  return tweezer.w > lo && tweezer.w < hi;
}

double variational_residual(const TweezerSpec& tweezer, double a0) {
  const double w = tweezer.w;
  const double rhs = tweezer.V0 * tweezer.V0 * tweezer.M * tweezer.M * std::pow(w, 4);
  const double lhs = w * w / (2.0 * a0 * a0) * std::pow(2.0 / (a0 * a0) + 1.0 / (w * w), 3);
  return (lhs - rhs) / rhs;
}

double variational_width(const TweezerSpec& tweezer) {
  validate(tweezer);
  double lo = 1e-3 * tweezer.w, hi = 1e3 * tweezer.w;
  double f_lo = variational_residual(tweezer, lo);
  const double f_hi = variational_residual(tweezer, hi);
  if (!(f_lo > 0.0 && f_hi < 0.0))
    throw NumericalError("variational condition has no root in (1e-3 w, 1e3 w) for V0 = " + fmt17(tweezer.V0) +
                         ", w = " + fmt17(tweezer.w) + ", M = " + fmt17(tweezer.M));
  for (int it = 0; it < 400; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (!(mid > lo && mid < hi)) break;
    const double f = variational_residual(tweezer, mid);
    if (f == 0.0) return mid;
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f;
    } else {
      hi = mid;
    }
  }
  return std::abs(variational_residual(tweezer, lo)) < std::abs(variational_residual(tweezer, hi)) ? lo : hi;
}

double transition_energy(const TweezerSpec& tweezer, double a0) {
  if (!(a0 > 0.0)) throw DomainError("bound-state width a0 must be > 0");
  const double w = tweezer.w;
  const double a2 = a0 * a0;
  const double denom = (a2 + 2.0 * w * w) * (a2 + 2.0 * w * w);
  return 2.0 / (tweezer.M * a2) -
         std::numbers::sqrt2 * tweezer.V0 * std::sqrt(2.0 * a2 * a2 + a2 * a2 * a2 / (w * w)) / denom;
}

TwoLevelResult two_level(const TweezerSpec& tweezer) {
  TwoLevelResult r;
  r.a0 = variational_width(tweezer);
  r.Omega = transition_energy(tweezer, r.a0);
  r.n_b = bound_state_count(tweezer);
  return r;
}

CouplingTensor coupling_tensor(const BogoliubovBath& bath, const BogoliubovMode& mode, double a0, double g) {
  if (!(a0 > 0.0)) throw DomainError("bound-state width a0 must be > 0");
  const double k = mode.k;
  const double G00 = g * std::sqrt(bath.n0 * mode.S / bath.L) * std::exp(-k * k * a0 * a0 / 2.0);
  CouplingTensor t;
  t.G00 = G00;
  t.G11 = (1.0 - a0 * a0 * k * k / 2.0) * G00;
  t.G10 = std::complex<double>(0.0, a0 * k) * G00;
  return t;
}

double resonant_wavenumber(const BogoliubovBath& bath, double Omega) {
  validate(bath);
  if (!(Omega > 0.0)) throw DomainError("resonant wave number needs Omega > 0");
  // eps^2 + 2 mu eps = Omega^2, written to avoid cancellation at small Omega.
  const double eps = Omega * Omega / (bath.mu + std::sqrt(bath.mu * bath.mu + Omega * Omega));
  return std::sqrt(2.0 * bath.m * eps);
}

DetectorModel map_to_detector_model(const BogoliubovBath& bath, const std::vector<TweezerSpec>& tweezers,
                                    double gamma0, double eps_res) {
  validate(bath);
  if (tweezers.empty()) throw ConfigError("at least one tweezer is required");
  DetectorModel model;
  model.frame = {2.0 * kPi * bath.T, eps_res, gamma0};
  validate(model.frame);
  if (chemical_potential_mismatch(bath) > 1e-3)
    model.warnings.push_back("chemical potential differs from u0 n0 by " +
                             fmt17(100.0 * chemical_potential_mismatch(bath)) + "%");

  double cmax = 0.0;
  for (std::size_t i = 0; i < tweezers.size(); ++i) {
    const auto& tw = tweezers[i];
    validate(tw);
    const std::string label = "tweezer " + std::to_string(i + 1);
    if (!in_two_level_window(tw)) {
      const auto [lo, hi] = two_level_window(tw.V0, tw.M);
      throw ConfigError(label + ": waist " + fmt17(tw.w) + " outside the two-level window (" + fmt17(lo) + ", " +
                        fmt17(hi) + ")");
    }
    // The Stark shift g n0 moves both levels equally and leaves Omega unchanged.
    TwoLevelResult lv = two_level(tw);
    if (!(lv.Omega > 0.0))
      throw ConfigError(label + ": transition energy " + fmt17(lv.Omega) + " is not positive");
    if (!lv.n_b.agree())
      model.warnings.push_back(label + ": bound-state count closed form " + std::to_string(lv.n_b.closed_form) +
                               " vs numeric " + std::to_string(lv.n_b.numeric));
    const double k = resonant_wavenumber(bath, lv.Omega);
    if (k * k / (2.0 * bath.m) > bath.mu)
      model.warnings.push_back(label + ": resonant mode lies outside the linear part of the dispersion");
    const BogoliubovMode mode = bogoliubov_mode(bath, k);
    const auto C = coupling_tensor(bath, mode, lv.a0, tw.g).G10;
    cmax = std::max(cmax, std::abs(C));
    model.levels.push_back(lv);
    model.k_res.push_back(k);
    model.C.push_back(C);
    model.positions.push_back(tw.x);
    model.atoms.push_back({lv.Omega, model.frame.a, Wedge::I, 0.0});
  }
  for (std::size_t i = 0; i < tweezers.size(); ++i)
    model.atoms[i].g = cmax > 0.0 ? std::abs(model.C[i]) / cmax : 0.0;
  return model;
}

void write_dispersion_csv(std::ostream& out, const BogoliubovBath& bath, double k_min, double k_max, int points) {
  out << "k,E,u,v,S\n";
  for (int i = 0; i < points; ++i) {
    const auto m = bogoliubov_mode(bath, geomspace(k_min, k_max, i, points));
    out << fmt17(m.k) << ',' << fmt17(m.E) << ',' << fmt17(m.u) << ',' << fmt17(m.v) << ',' << fmt17(m.S) << '\n';
  }
}

void write_width_sweep_csv(std::ostream& out, double V0, double M, int points) {
  const auto [lo, hi] = two_level_window(V0, M);
  out << "w,a0,Omega\n";
  for (int i = 0; i < points; ++i) {
    TweezerSpec tw;
    tw.V0 = V0;
    tw.M = M;
    tw.w = linspace(lo, hi, i, points);
    const double a0 = variational_width(tw);
    out << fmt17(tw.w) << ',' << fmt17(a0) << ',' << fmt17(transition_energy(tw, a0)) << '\n';
  }
}

void write_coupling_csv(std::ostream& out, const BogoliubovBath& bath, double a0, double g, double k_min,
                        double k_max, int points) {
  out << "k,abs_G00,abs_G11,abs_G10\n";
  for (int i = 0; i < points; ++i) {
    const auto m = bogoliubov_mode(bath, linspace(k_min, k_max, i, points));
    const auto t = coupling_tensor(bath, m, a0, g);
    out << fmt17(m.k) << ',' << fmt17(std::abs(t.G00)) << ',' << fmt17(std::abs(t.G11)) << ','
        << fmt17(std::abs(t.G10)) << '\n';
  }
}

int write_bound_state_report(std::ostream& out, double V0_min, double V0_max, double w_min, double w_max, double M,
                             int points) {
  out << "V0,w,n_b_closed_form,n_b_numeric,agree\n";
  int disagreements = 0;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      TweezerSpec tw;
      tw.V0 = linspace(V0_min, V0_max, i, points);
      tw.w = linspace(w_min, w_max, j, points);
      tw.M = M;
      const auto c = bound_state_count(tw);
      if (!c.agree()) ++disagreements;
      out << fmt17(tw.V0) << ',' << fmt17(tw.w) << ',' << c.closed_form << ',' << c.numeric << ',' << (c.agree() ? 1 : 0)
          << '\n';
    }
  return disagreements;
}

}  // namespace rindler::bec

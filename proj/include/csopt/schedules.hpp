#ifndef CSOPT_SCHEDULES_HPP
#define CSOPT_SCHEDULES_HPP

#include <cmath>
#include <string>
#include <vector>

#include "csopt/core.hpp"

namespace csopt {

/// Step-size schedule behind the T^{-1/2} optimality-gap / zero-violation
/// guarantee of the projected solver. All fields are closed forms of the
/// problem constants; eta and upsilon decay as T^{-1/2}.
struct ScheduleT1 {
  ProblemConstants constants;
  double P = 0;   // 2 B^2 + 8 N sigma_lambda^2
  double K1 = 0;  // (D^2 + 1 + C^2)(1 + C)
  double K2 = 0;  // (P + 4 B^2 (1 + C^2))(1 + C)
  double K = 0;   // sqrt(K1 K2)
  double C1 = 0;  // sqrt(K1 / K2)
  double C2 = 0;  // (K1 + K2) / (2 (1 + C)) * sqrt(K1 / K2)
  double delta = 0;  // 4 B^2

  double eta(long T) const { return C1 / std::sqrt(static_cast<double>(T)); }
  double upsilon(long T) const {
    return C2 / std::sqrt(static_cast<double>(T));
  }

  std::vector<std::string> check(long T) const {
    std::vector<std::string> w;
    if (!(eta(T) < 1.0 / (4.0 * constants.B())))
      w.push_back("horizon too short: eta(T) >= 1/(4B)");
    if (!(upsilon(T) < constants.sigma_lambda))
      w.push_back("horizon too short: upsilon(T) >= sigma_lambda");
    return w;
  }

  HyperParams hyperparams(long T, std::uint64_t seed) const {
    return HyperParams{eta(T), delta, upsilon(T), 1.0, T, seed};
  }
};

inline ScheduleT1 schedule_theorem1(const ProblemConstants& c) {
  c.validate();
  ScheduleT1 s;
  s.constants = c;
  const double B = c.B(), C = c.C(), N = c.N;
  s.P = 2.0 * B * B + 8.0 * N * c.sigma_lambda * c.sigma_lambda;
  s.K1 = (c.D * c.D + 1.0 + C * C) * (1.0 + C);
  s.K2 = (s.P + 4.0 * B * B * (1.0 + C * C)) * (1.0 + C);
  s.K = std::sqrt(s.K1 * s.K2);
  s.C1 = std::sqrt(s.K1 / s.K2);
  s.C2 = (s.K1 + s.K2) / (2.0 * (1.0 + C)) * std::sqrt(s.K1 / s.K2);
  s.delta = 4.0 * B * B;
  return s;
}

/// Projection-free schedule: eta ~ T^{-3/4}, upsilon ~ T^{-1/4},
/// momentum rho ~ T^{-1/2}/(8B). delta is configurable because the
/// statement and its derivation pin different multiples of (L D)^2.
struct ScheduleT2 {
  ProblemConstants constants;
  double L = 0;       // max{L_f, L_h sqrt(N), 1}
  double A = 0;
  double C1_hat = 0;  // 1 / (6 L D)
  double C2_hat = 0;  // A + (15 L D / 4)(1 + C^2)
  double K_hat = 0;   // A + C * C2_hat
  double delta = 0;   // default 18 L^2 D^2

  double eta(long T) const {
    return C1_hat / std::pow(static_cast<double>(T), 0.75);
  }
  double upsilon(long T) const {
    return C2_hat / std::pow(static_cast<double>(T), 0.25);
  }
  double rho(long T) const {
    return 1.0 / (8.0 * constants.B() * std::sqrt(static_cast<double>(T)));
  }

  std::vector<std::string> check(long T) const {
    std::vector<std::string> w;
    if (!(eta(T) <= 1.0))
      w.push_back("horizon too short: eta(T) > 1 breaks the convex step");
    if (!(upsilon(T) < constants.sigma_lambda))
      w.push_back("horizon too short: upsilon(T) >= sigma_lambda");
    return w;
  }

  HyperParams hyperparams(long T, std::uint64_t seed) const {
    return HyperParams{eta(T), delta, upsilon(T), rho(T), T, seed};
  }
};

inline ScheduleT2 schedule_theorem2(const ProblemConstants& c,
                                    double delta_override = 0.0) {
  c.validate();
  ScheduleT2 s;
  s.constants = c;
  const double B = c.B(), C = c.C(), N = c.N, D = c.D;
  s.L = std::max({c.L_f, c.L_h * std::sqrt(N), 1.0});
  const double LD = s.L * D;
  s.A = (LD / 16.0) *
            (96.0 * c.G_f + 24.0 * c.sigma_f * c.sigma_f + 11.0) +
        (N * c.sigma_lambda * c.sigma_lambda / (3.0 * LD)) *
            (17.0 / 24.0 + 2.0 * N * c.sigma_h * c.sigma_h) +
        (1.0 / (3.0 * s.L)) * (N * c.G_h * c.G_h * D + 4.0 * D * B);
  s.C1_hat = 1.0 / (6.0 * LD);
  s.C2_hat = s.A + (15.0 * LD / 4.0) * (1.0 + C * C);
  s.K_hat = s.A + C * s.C2_hat;
  s.delta = delta_override > 0 ? delta_override : 18.0 * s.L * s.L * D * D;
  return s;
}

// ---------------------------------------------------------------------------
// Lower-bound diagnostic. With tightening active, iterates can dip below
// F(x*); Q caps how far, via the dual-ball argument with free radius r.
// ---------------------------------------------------------------------------

inline double lower_bound_q(const ProblemConstants& c, double c_hat,
                            double delta, double r) {
  if (!(r > 0)) throw std::invalid_argument("lower_bound_q: r must be > 0");
  const double C = c.C();
  return ((c_hat * c_hat + 4.0 * delta) * (C + r) * (C + r) +
          c.D * c.D * c_hat * c_hat + 5.0 * delta * C * C) /
         (2.0 * c_hat * r);
}

inline double lower_bound_q(const ProblemConstants& c, const ScheduleT1& s,
                            double r) {
  return lower_bound_q(c, s.C1, s.delta, r);
}

inline double lower_bound_q(const ProblemConstants& c, const ScheduleT2& s,
                            double r) {
  return lower_bound_q(c, s.C1_hat, s.delta, r);
}

/// Full lower bound on the mean optimality gap: -C (Q + C2) T^{-1/2}.
inline double gap_lower_bound(const ProblemConstants& c, const ScheduleT1& s,
                              double r, long T) {
  const double Q = lower_bound_q(c, s, r);
  return -c.C() * (Q + s.C2) / std::sqrt(static_cast<double>(T));
}

/// Projection-free variant: -C (Q + C2_hat) T^{-1/4}.
inline double gap_lower_bound(const ProblemConstants& c, const ScheduleT2& s,
                              double r, long T) {
  const double Q = lower_bound_q(c, s, r);
  return -c.C() * (Q + s.C2_hat) / std::pow(static_cast<double>(T), 0.25);
}

}  // namespace csopt

#endif  // CSOPT_SCHEDULES_HPP

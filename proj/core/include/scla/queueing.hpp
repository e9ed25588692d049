#pragma once

// Closed-form M/M/s (Erlang-C) waiting-time math and its Allen-Cunneen
// variants. Every function is pure and safe to call concurrently.

namespace scla::queueing {

/// Snapshot of one station-charger queue.
struct QueueEval {
  double rho = 0.0;  ///< utilization, in [0, 1)
  int servers = 1;
  double mu = 1.0;  ///< service rate per server
  double p_wait = 0.0;  ///< probability that all servers are busy
  double w_total = 0.0;  ///< expected time in system (queue + service)
  double scv_service = 1.0;
  double scv_arrival = 1.0;
};

/// Supporting line A + B*rho of the convex transform w_nu at rho_anchor.
struct CutCoefficients {
  double rho_anchor = 0.0;
  int servers = 1;
  double intercept_A = 0.0;
  double slope_B = 0.0;

  [[nodiscard]] double at(double rho) const { return intercept_A + slope_B * rho; }
};

/// Probability that an arriving customer waits (Erlang-C). Evaluated with the
/// Erlang-B recurrence so it stays finite for large server counts.
/// Throws std::domain_error unless 0 <= rho < 1 and servers >= 1.
double erlang_c_probability(double rho, int servers);

/// Expected time in system P/(mu*s*(1-rho)) + 1/mu.
double expected_time_in_system(double rho, int servers, double mu);

/// Queueing part of expected_time_in_system scaled by mu*s, i.e. P/(1-rho).
/// Strictly increasing and strictly convex in rho on (0, 1).
double w_nu(double rho, int servers);

/// Tangent of w_nu at rho_anchor in (0, 1). The slope is a central finite
/// difference; the intercept is then lowered by the largest violation seen on
/// a 512-point grid so the line minorizes w_nu.
CutCoefficients cut_at(double rho_anchor, int servers);

/// M/G/s time in system: the M/M/s queueing term scaled by (1 + c^2)/2.
double mgs_time_in_system(double rho, int servers, double mu, double scv_service);

/// GI/G/s Allen-Cunneen estimate with the single-server style queueing term
/// (rho/mu)/(1-rho) scaled by (c_a^2 + c^2)/2. Used for the under-dispersion
/// comparison only; the server count is validated but does not enter.
double gigs_time_in_system(double rho, int servers, double mu, double scv_arrival,
                           double scv_service);

/// Full evaluation. The queueing term is Erlang-C based and scaled by
/// (scv_arrival + scv_service)/2, so the default arguments give pure M/M/s.
QueueEval evaluate(double rho, int servers, double mu, double scv_service = 1.0,
                   double scv_arrival = 1.0);

}  // namespace scla::queueing

#include "scla/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace scla::queueing {

namespace {

void check_domain(double rho, int servers) {
  if (!(rho >= 0.0) || !(rho < 1.0)) {
    throw std::domain_error("queueing: utilization must lie in [0, 1), got " +
                            std::to_string(rho));
  }
  if (servers < 1) {
    throw std::domain_error("queueing: server count must be positive, got " +
                            std::to_string(servers));
  }
}

void check_rate(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::domain_error("queueing: service rate must be positive");
  }
}

void check_scv(double scv) {
  if (!(scv >= 0.0) || !std::isfinite(scv)) {
    throw std::domain_error("queueing: squared coefficient of variation must be >= 0");
  }
}

double erlang_c_unchecked(double rho, int servers) {
  if (rho == 0.0) return 0.0;
  const double a = rho * servers;
  double b = 1.0;
  for (int m = 1; m <= servers; ++m) {
    b = a * b / (m + a * b);
  }
  const double c = servers * b / (servers - a + a * b);
  return std::clamp(c, 0.0, 1.0);
}

double w_nu_unchecked(double rho, int servers) {
  return erlang_c_unchecked(rho, servers) / (1.0 - rho);
}

constexpr int kValidationGrid = 512;

}  // namespace

double erlang_c_probability(double rho, int servers) {
  check_domain(rho, servers);
  return erlang_c_unchecked(rho, servers);
}

double expected_time_in_system(double rho, int servers, double mu) {
  check_domain(rho, servers);
  check_rate(mu);
  return erlang_c_unchecked(rho, servers) / (mu * servers * (1.0 - rho)) + 1.0 / mu;
}

double w_nu(double rho, int servers) {
  check_domain(rho, servers);
  return w_nu_unchecked(rho, servers);
}

CutCoefficients cut_at(double rho_anchor, int servers) {
  if (!(rho_anchor > 0.0) || !(rho_anchor < 1.0)) {
    throw std::domain_error("cut_at: anchor utilization must lie in (0, 1)");
  }
  check_domain(rho_anchor, servers);

  double h = std::max(1e-7, 1e-6 * rho_anchor);
  // keep the stencil inside the domain
  h = std::min(h, 0.5 * (1.0 - rho_anchor));
  h = std::min(h, rho_anchor);
  const double slope =
      (w_nu_unchecked(rho_anchor + h, servers) - w_nu_unchecked(rho_anchor - h, servers)) /
      (2.0 * h);

  CutCoefficients cut;
  cut.rho_anchor = rho_anchor;
  cut.servers = servers;
  cut.slope_B = slope;
  cut.intercept_A = w_nu_unchecked(rho_anchor, servers) - slope * rho_anchor;

  double worst = 0.0;
  for (int g = 0; g <= kValidationGrid; ++g) {
    const double rho = static_cast<double>(g) / (kValidationGrid + 1);
    worst = std::max(worst, cut.at(rho) - w_nu_unchecked(rho, servers));
  }
  for (const double rho : {rho_anchor - h, rho_anchor + h}) {
    worst = std::max(worst, cut.at(rho) - w_nu_unchecked(rho, servers));
  }
  cut.intercept_A -= worst;
  return cut;
}

double mgs_time_in_system(double rho, int servers, double mu, double scv_service) {
  check_scv(scv_service);
  const double w = expected_time_in_system(rho, servers, mu);
  if (scv_service == 1.0) return w;
  return 0.5 * (1.0 + scv_service) * (w - 1.0 / mu) + 1.0 / mu;
}

double gigs_time_in_system(double rho, int servers, double mu, double scv_arrival,
                           double scv_service) {
  check_domain(rho, servers);
  check_rate(mu);
  check_scv(scv_arrival);
  check_scv(scv_service);
  const double queue = (rho / mu) / (1.0 - rho);
  return 0.5 * (scv_arrival + scv_service) * queue + 1.0 / mu;
}

QueueEval evaluate(double rho, int servers, double mu, double scv_service,
                   double scv_arrival) {
  check_domain(rho, servers);
  check_rate(mu);
  check_scv(scv_service);
  check_scv(scv_arrival);
  QueueEval q;
  q.rho = rho;
  q.servers = servers;
  q.mu = mu;
  q.scv_service = scv_service;
  q.scv_arrival = scv_arrival;
  q.p_wait = erlang_c_unchecked(rho, servers);
  const double queue_term = q.p_wait / (mu * servers * (1.0 - rho));
  const double factor = 0.5 * (scv_arrival + scv_service);
  q.w_total = (factor == 1.0 ? queue_term : factor * queue_term) + 1.0 / mu;
  return q;
}

}  // namespace scla::queueing

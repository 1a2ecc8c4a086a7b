#pragma once

#include <span>

namespace ratectl {

// Exact sojourn-time tail of the stationary M/M/1 queue:
// P(D > t) = exp(-(mu - lambda) * t). Throws std::domain_error if lambda >= mu.
double mm1_delay_tail(double lambda, double mu, double t);

// Mean end-to-end delay of a tandem of M/M/1 stations fed by one Poisson
// stream (product form): sum_i 1 / (mu_i - lambda).
double tandem_mm1_mean_delay(double lambda, std::span<const double> mus);

// M/M/1 relaxation-time approximation 2*lambda / (mu - lambda)^2, the mean
// time for a queue-length deviation to decay to 1/e of itself.
double relaxation_time_mm1(double lambda, double mu);

}  // namespace ratectl

#include "ratectl/queueing_oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace ratectl {

namespace {

void require_stable(double lambda, double mu) {
    if (!(lambda >= 0.0) || !(mu > 0.0) || lambda >= mu) {
        throw std::domain_error("queue is unstable: requires 0 <= lambda < mu");
    }
}

}  // namespace

double mm1_delay_tail(double lambda, double mu, double t) {
    require_stable(lambda, mu);
    return std::exp(-(mu - lambda) * t);
}

double tandem_mm1_mean_delay(double lambda, std::span<const double> mus) {
    double total = 0.0;
    for (double mu : mus) {
        require_stable(lambda, mu);
        total += 1.0 / (mu - lambda);
    }
    return total;
}

double relaxation_time_mm1(double lambda, double mu) {
    require_stable(lambda, mu);
    const double gap = mu - lambda;
    return 2.0 * lambda / (gap * gap);
}

}  // namespace ratectl

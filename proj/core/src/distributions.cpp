#include "ratectl/distributions.hpp"

#include <cmath>
#include <stdexcept>

namespace ratectl {

std::string to_string(DistFamily family) {
    switch (family) {
        case DistFamily::exponential: return "exponential";
        case DistFamily::gamma: return "gamma";
        case DistFamily::deterministic: return "deterministic";
    }
    return "unknown";
}

DistFamily dist_family_from_string(const std::string& name) {
    if (name == "exponential") return DistFamily::exponential;
    if (name == "gamma") return DistFamily::gamma;
    if (name == "deterministic") return DistFamily::deterministic;
    throw std::invalid_argument("unknown distribution family: " + name);
}

void DistSpec::validate() const {
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("distribution mean must be positive, got " +
                                    std::to_string(mean));
    }
    if (!(scv >= 0.0) || !std::isfinite(scv)) {
        throw std::invalid_argument("distribution scv must be non-negative");
    }
    switch (family) {
        case DistFamily::exponential:
            if (scv != 1.0) {
                throw std::invalid_argument("exponential requires scv = 1");
            }
            break;
        case DistFamily::deterministic:
            if (scv != 0.0) {
                throw std::invalid_argument("deterministic requires scv = 0");
            }
            break;
        case DistFamily::gamma:
            if (!(scv > 0.0)) {
                throw std::invalid_argument("gamma requires scv > 0");
            }
            break;
    }
}

GammaParams gamma_params_from_mean_scv(double mean, double scv) {
    if (!(mean > 0.0)) {
        throw std::invalid_argument("gamma mean must be positive");
    }
    if (!(scv > 0.0)) {
        throw std::invalid_argument("gamma scv must be positive");
    }
    return GammaParams{1.0 / scv, mean * scv};
}

double sample(const DistSpec& spec, RngStream& rng) {
    switch (spec.family) {
        case DistFamily::deterministic:
            return spec.mean;
        case DistFamily::exponential:
            return std::exponential_distribution<double>(1.0 / spec.mean)(rng.engine());
        case DistFamily::gamma: {
            const GammaParams p = gamma_params_from_mean_scv(spec.mean, spec.scv);
            return std::gamma_distribution<double>(p.shape, p.scale)(rng.engine());
        }
    }
    throw std::logic_error("unreachable distribution family");
}

}  // namespace ratectl

#pragma once

#include <cstdint>
#include <string>

#include "ratectl/rng.hpp"

namespace ratectl {

enum class DistFamily { exponential, gamma, deterministic };

std::string to_string(DistFamily family);
DistFamily dist_family_from_string(const std::string& name);

// A stationary positive distribution given by its mean and squared
// coefficient of variation (variance / mean^2).
struct DistSpec {
    DistFamily family = DistFamily::exponential;
    double mean = 1.0;
    double scv = 1.0;

    static DistSpec exponential(double mean) { return {DistFamily::exponential, mean, 1.0}; }
    static DistSpec gamma(double mean, double scv) { return {DistFamily::gamma, mean, scv}; }
    static DistSpec deterministic(double mean) { return {DistFamily::deterministic, mean, 0.0}; }

    // Throws std::invalid_argument on violation: mean must be positive and
    // scv must match the family (exponential: 1, deterministic: 0, gamma: > 0).
    void validate() const;
};

struct GammaParams {
    double shape;
    double scale;
};

// Shape/scale of the Gamma law with the requested mean and SCV.
// SCV of Gamma(k, theta) is 1/k, so shape = 1/scv and scale = mean * scv.
GammaParams gamma_params_from_mean_scv(double mean, double scv);

// One variate from `spec`. Deterministic returns exactly the mean. The
// distribution object is constructed fresh per call, so the draw sequence is
// a pure function of (spec, engine state).
double sample(const DistSpec& spec, RngStream& rng);

// A validated spec bound to its own seeded stream.
class VariateStream {
public:
    VariateStream(DistSpec spec, std::uint64_t seed) : spec_(spec), rng_(seed) {
        spec_.validate();
    }

    double next() { return sample(spec_, rng_); }
    const DistSpec& spec() const { return spec_; }

private:
    DistSpec spec_;
    RngStream rng_;
};

}  // namespace ratectl

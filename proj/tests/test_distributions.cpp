#include <stdexcept>
#include <cmath>

#include <doctest.h>

#include "ratectl/distributions.hpp"

using namespace ratectl;

namespace {

struct Moments {
    double mean;
    double scv;
};

Moments sample_moments(const DistSpec& spec, std::uint64_t seed, int n) {
    VariateStream stream(spec, seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = stream.next();
        sum += x;
        sum_sq += x * x;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    return {mean, var / (mean * mean)};
}

}  // namespace

TEST_SUITE("distributions") {

TEST_CASE("gamma parameters from mean and scv") {
    const GammaParams a = gamma_params_from_mean_scv(1.0 / 0.95, 0.7);
    CHECK(a.shape == doctest::Approx(1.428571).epsilon(1e-5));
    CHECK(a.scale == doctest::Approx(0.736842).epsilon(1e-5));

    const GammaParams b = gamma_params_from_mean_scv(2.0, 1.0);
    CHECK(b.shape == doctest::Approx(1.0));
    CHECK(b.scale == doctest::Approx(2.0));

    const GammaParams c = gamma_params_from_mean_scv(5.0, 0.25);
    CHECK(c.shape == doctest::Approx(4.0));
    CHECK(c.scale == doctest::Approx(1.25));

    CHECK_THROWS_AS(gamma_params_from_mean_scv(-1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(gamma_params_from_mean_scv(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS((DistSpec{DistFamily::exponential, 1.0, 0.5}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((DistSpec{DistFamily::deterministic, 1.0, 0.1}.validate()),
                    std::invalid_argument);
    CHECK_THROWS_AS((DistSpec{DistFamily::gamma, 1.0, 0.0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS(DistSpec::exponential(0.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(DistSpec::gamma(2.0, 0.8).validate());
}

TEST_CASE("deterministic spec returns its mean, always") {
    VariateStream stream(DistSpec::deterministic(0.5), 42);
    for (int i = 0; i < 100; ++i) CHECK(stream.next() == 0.5);
}

TEST_CASE("sample moments match the spec within 1% at n=1e6") {
    constexpr int kN = 1'000'000;
    const DistSpec specs[] = {
        DistSpec::exponential(1.0),
        DistSpec::exponential(2.0),
        DistSpec::gamma(1.0 / 0.95, 0.7),
        DistSpec::gamma(1.0, 0.8),
        DistSpec::gamma(5.0, 0.25),
        DistSpec::deterministic(0.5),
    };
    std::uint64_t seed = 1;
    for (const DistSpec& spec : specs) {
        CAPTURE(to_string(spec.family));
        CAPTURE(spec.mean);
        const Moments m = sample_moments(spec, seed++, kN);
        CHECK(std::abs(m.mean - spec.mean) / spec.mean < 0.01);
        if (spec.family != DistFamily::deterministic) {
            CHECK(std::abs(m.scv - spec.scv) < 0.01 * std::max(spec.scv, 1.0));
        }
    }
}

TEST_CASE("exponential mean within the 3-sigma LLN band") {
    const Moments m = sample_moments(DistSpec::exponential(1.0), 2024, 1'000'000);
    CHECK(m.mean > 0.997);
    CHECK(m.mean < 1.003);
}

TEST_CASE("gamma scv recovered in [0.69, 0.71] at n=1e6") {
    const Moments m = sample_moments(DistSpec::gamma(1.0 / 0.95, 0.7), 7, 1'000'000);
    CHECK(m.scv > 0.69);
    CHECK(m.scv < 0.71);
}

TEST_CASE("same seed gives bit-identical sequences") {
    VariateStream a(DistSpec::gamma(1.0, 0.8), 99);
    VariateStream b(DistSpec::gamma(1.0, 0.8), 99);
    for (int i = 0; i < 10'000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("distinct sub-streams are decorrelated by construction") {
    const std::uint64_t master = 5;
    const std::uint64_t s1 = derive_subseed(master, SeedComponent::stage_service, 0);
    const std::uint64_t s2 = derive_subseed(master, SeedComponent::stage_service, 1);
    const std::uint64_t s3 = derive_subseed(master, SeedComponent::arrival_process, 0);
    CHECK(s1 != s2);
    CHECK(s1 != s3);
    CHECK(derive_subseed(master, SeedComponent::stage_service, 0) == s1);
}

}  // TEST_SUITE

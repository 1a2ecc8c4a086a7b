#include <stdexcept>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "ratectl/queueing_oracles.hpp"

using namespace ratectl;

TEST_SUITE("oracles") {

TEST_CASE("mm1 sojourn tail") {
    CHECK(mm1_delay_tail(0.5, 1.0, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(mm1_delay_tail(0.3, 1.0, 0.0) == 1.0);
    CHECK(mm1_delay_tail(0.9, 1.0, 10.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(mm1_delay_tail(1.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(mm1_delay_tail(2.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("tandem product-form mean delay") {
    const std::vector<double> one = {1.0};
    CHECK(tandem_mm1_mean_delay(0.5, one) == doctest::Approx(2.0));
    const std::vector<double> two = {1.0, 1.0};
    CHECK(tandem_mm1_mean_delay(0.5, two) == doctest::Approx(4.0));
    const std::vector<double> three = {2.0, 1.0, 2.0};
    CHECK(tandem_mm1_mean_delay(0.5, three) == doctest::Approx(1.0 / 1.5 + 2.0 + 1.0 / 1.5));
    const std::vector<double> unstable = {2.0, 0.4};
    CHECK_THROWS_AS(tandem_mm1_mean_delay(0.5, unstable), std::domain_error);
}

TEST_CASE("mm1 relaxation time") {
    CHECK(relaxation_time_mm1(0.5, 1.0) == doctest::Approx(4.0));
    CHECK(relaxation_time_mm1(0.95, 1.0) == doctest::Approx(760.0));
    CHECK(relaxation_time_mm1(0.0, 1.0) == 0.0);
    CHECK_THROWS_AS(relaxation_time_mm1(1.0, 1.0), std::domain_error);
}

}  // TEST_SUITE

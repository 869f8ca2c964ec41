#include <doctest.h>

#include <cmath>

#include "blenderlab/entropy.hpp"

using namespace blenderlab;
using namespace blenderlab::entropy;

namespace {

HorseshoeSpec full_shift(int states, std::vector<double> rates, int m, int n, double r = 2.0) {
    HorseshoeSpec spec;
    spec.transition = Eigen::MatrixXi::Ones(states, states);
    for (int i = 0; i < states; ++i) spec.rates.push_back(rates);
    spec.m = m;
    spec.n = n;
    spec.r = r;
    return spec;
}

HorseshoeSpec golden_mean(std::vector<double> rates, int m, int n) {
    HorseshoeSpec spec;
    spec.transition = Eigen::MatrixXi(2, 2);
    spec.transition << 1, 1, 1, 0;
    spec.rates = {rates, rates};
    spec.m = m;
    spec.n = n;
    return spec;
}

}  // namespace

TEST_CASE("topological entropy of full shifts and the golden-mean shift") {
    CHECK(topological_entropy(full_shift(2, {0.5, 2.0}, 1, 1)) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(topological_entropy(full_shift(3, {0.5, 2.0}, 1, 1)) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
    double phi = 0.5 * (1.0 + std::sqrt(5.0));
    CHECK(topological_entropy(golden_mean({0.5, 2.0}, 1, 1)) ==
          doctest::Approx(std::log(phi)).epsilon(1e-12));
}

TEST_CASE("reducible matrices are rejected") {
    HorseshoeSpec spec;
    spec.transition = Eigen::MatrixXi(2, 2);
    spec.transition << 1, 0, 0, 1;
    spec.rates = {{0.5, 2.0}, {0.5, 2.0}};
    spec.m = spec.n = 1;
    CHECK_THROWS_WITH_AS(topological_entropy(spec), doctest::Contains("Reducible"), Error);
}

TEST_CASE("Parry measure of the full 2-shift is uniform i.i.d.") {
    auto mu = maximal_entropy_measure(full_shift(2, {0.5, 2.0}, 1, 1));
    CHECK(mu.stationary[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mu.transition_prob(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(mu.entropy == doctest::Approx(std::log(2.0)).epsilon(1e-10));

    auto mu5 = maximal_entropy_measure(full_shift(5, {0.5, 2.0}, 1, 1));
    for (int i = 0; i < 5; ++i) CHECK(mu5.stationary[i] == doctest::Approx(0.2).epsilon(1e-10));
}

TEST_CASE("Parry weights of the golden-mean shift") {
    auto mu = maximal_entropy_measure(golden_mean({0.5, 2.0}, 1, 1));
    double phi = 0.5 * (1.0 + std::sqrt(5.0));
    CHECK(mu.stationary[0] == doctest::Approx(phi * phi / (1.0 + phi * phi)).epsilon(1e-10));
    CHECK(mu.stationary[1] == doctest::Approx(1.0 / (1.0 + phi * phi)).epsilon(1e-10));
    CHECK(mu.entropy == doctest::Approx(std::log(phi)).epsilon(1e-10));
}

TEST_CASE("Lyapunov spectrum with constant rates is measure independent") {
    auto spec = full_shift(2, {0.8, 0.9, 4.0}, 2, 1);
    auto mu = maximal_entropy_measure(spec);
    auto rep = lyapunov_spectrum(spec, mu);
    CHECK(rep.stable_exponents[0] == doctest::Approx(std::log(0.8)).epsilon(1e-12));
    CHECK(rep.stable_exponents[1] == doctest::Approx(std::log(0.9)).epsilon(1e-12));
    CHECK(rep.chi_cs == doctest::Approx(std::log(0.9)).epsilon(1e-12));
    CHECK(rep.chi_cs == doctest::Approx(-0.10536).epsilon(1e-4));
    CHECK(rep.J_s == doctest::Approx(0.72).epsilon(1e-12));
    CHECK(rep.unstable_exponents[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("Lyapunov exponents average the per-state log rates") {
    HorseshoeSpec spec = full_shift(2, {}, 1, 1);
    spec.rates = {{0.5, 2.0}, {0.25, 4.0}};
    auto mu = maximal_entropy_measure(spec);
    auto rep = lyapunov_spectrum(spec, mu);
    CHECK(rep.stable_exponents[0] == doctest::Approx(-1.0397207708399179).epsilon(1e-10));
    CHECK(rep.unstable_exponents[0] == doctest::Approx(1.0397207708399179).epsilon(1e-10));

    // sum of exponents = average log |det|
    double avg = 0.5 * (std::log(0.5 * 2.0) + std::log(0.25 * 4.0));
    double sum = rep.stable_exponents[0] + rep.unstable_exponents[0];
    CHECK(sum == doctest::Approx(avg).epsilon(1e-12));
}

TEST_CASE("entropy gap thresholds match the arithmetic on the examples") {
    auto rep = entropy_gap(full_shift(2, {0.9, 0.8, 4.0}, 2, 1, 2.0));
    CHECK(rep.threshold_cs == doctest::Approx(0.30216).epsilon(1e-4));
    CHECK(rep.h_top == doctest::Approx(0.693147).epsilon(1e-5));
    CHECK(rep.cs_ok);

    auto fail = entropy_gap(full_shift(2, {0.25, 1.0 / 3.0, 4.0}, 2, 1, 2.0));
    CHECK(fail.threshold_cs == doctest::Approx(2.21026).epsilon(1e-4));
    CHECK_FALSE(fail.cs_ok);

    auto cu_pass = entropy_gap(full_shift(2, {0.9, 0.8, 1.5}, 2, 1, 2.0));
    CHECK(cu_pass.threshold_cu == doctest::Approx(0.30410).epsilon(1e-4));
    CHECK(cu_pass.cu_ok);

    auto cu_fail = entropy_gap(full_shift(2, {0.9, 0.8, 4.0}, 2, 1, 2.0));
    CHECK(cu_fail.threshold_cu == doctest::Approx(1.03972).epsilon(1e-4));
    CHECK_FALSE(cu_fail.cu_ok);

    CHECK(cu_pass.double_ok == (cu_pass.cs_ok && cu_pass.cu_ok));
}

TEST_CASE("scaling all stable rates shifts J_s and chi_cs exactly") {
    auto base = entropy_gap(full_shift(2, {0.9, 0.8, 4.0}, 2, 1));
    double c = 0.7;
    auto scaled = entropy_gap(full_shift(2, {0.9 * c, 0.8 * c, 4.0}, 2, 1));
    CHECK(scaled.spectrum.J_s == doctest::Approx(base.spectrum.J_s * c * c).epsilon(1e-12));
    CHECK(scaled.spectrum.chi_cs ==
          doctest::Approx(base.spectrum.chi_cs + std::log(c)).epsilon(1e-12));
}

TEST_CASE("inverting the rates swaps the cs and cu criteria") {
    auto fwd = entropy_gap(full_shift(2, {0.9, 0.8, 1.5}, 2, 1));
    // invert: unstable group first (1/1.5 stable), stable rates become unstable
    auto bwd = entropy_gap(full_shift(2, {1.0 / 1.5, 1.0 / 0.8, 1.0 / 0.9}, 1, 2));
    CHECK(fwd.threshold_cs == doctest::Approx(bwd.threshold_cu).epsilon(1e-12));
    CHECK(fwd.threshold_cu == doctest::Approx(bwd.threshold_cs).epsilon(1e-12));
    CHECK(fwd.cs_ok == bwd.cu_ok);
    CHECK(fwd.cu_ok == bwd.cs_ok);
}

TEST_CASE("thresholds are monotone in the smoothness r, so ok-flags flip at most once") {
    // chi_cs < 0 makes the cs threshold increase toward -log J_s as r grows;
    // likewise on the cu side. Ok-flags are therefore nonincreasing in r.
    std::vector<double> rs = {1.2, 1.5, 2.0, 4.0, 16.0};
    double prev_cs = -1e300, prev_cu = -1e300;
    bool prev_ok = true;
    for (double r : rs) {
        auto rep = entropy_gap(full_shift(2, {0.6, 0.55, 3.0}, 2, 1, r));
        CHECK(rep.threshold_cs >= prev_cs);
        CHECK(rep.threshold_cu >= prev_cu);
        if (!prev_ok) CHECK_FALSE(rep.cs_ok);
        prev_cs = rep.threshold_cs;
        prev_cu = rep.threshold_cu;
        prev_ok = rep.cs_ok;
    }
}

TEST_CASE("spec validation rejects malformed rate tables") {
    auto bad = full_shift(2, {0.5, 0.7}, 1, 1);  // 0.7 declared unstable
    CHECK_THROWS_AS(bad.validate(), SchemaError);
    auto unit = full_shift(2, {0.5, 1.0}, 1, 1);
    CHECK_THROWS_AS(unit.validate(), SchemaError);
}

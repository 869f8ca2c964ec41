#include <doctest.h>

#include <cmath>
#include <random>

#include "blenderlab/cones.hpp"

using namespace blenderlab;
using namespace blenderlab::cones;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> vals) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vals.size()),
                                              static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double v : vals) M(i, i) = v, ++i;
    return M;
}

Box unit_box(int d) {
    return Box(Eigen::VectorXd::Constant(d, -1.0), Eigen::VectorXd::Constant(d, 1.0));
}

}  // namespace

TEST_CASE("domination time from extremal singular values") {
    Splitting s{{0}, {1}};
    CHECK(domination_time(diag({0.5, 2.0}), s) == 1);
    CHECK(domination_time(diag({0.9, 1.0}), s) == 7);
    CHECK(domination_time(diag({0.1, 10.0}), s) == 1);
}

TEST_CASE("domination time halves when the map is squared") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Splitting s{{0}, {1}};
    for (int trial = 0; trial < 50; ++trial) {
        double a = 0.55 + 0.43 * unif(rng);
        double b = 1.0 + 0.2 * unif(rng);
        Eigen::MatrixXd L = diag({a, b});
        long l1 = domination_time(L, s);
        long l2 = domination_time(L * L, s);
        CHECK(l2 == (l1 + 1) / 2);
    }
}

TEST_CASE("no domination below the 1/2 threshold forever") {
    Splitting s{{0}, {1}};
    CHECK_THROWS_WITH_AS(domination_time(diag({1.0, 1.0}), s), doctest::Contains("NotDominated"),
                         Error);
}

TEST_CASE("cone invariance of the expanding axis for diag(0.5, 2)") {
    Splitting s{{0}, {1}};
    ConeField cone{s, std::atan(1.0)};
    auto rep = check_cone_invariance(linear_sampled_map(diag({0.5, 2.0}), unit_box(2)), cone, 3);
    CHECK(rep.ok);
    CHECK(rep.worst_margin == doctest::Approx(std::atan(1.0) - std::atan(0.25)).epsilon(1e-9));
}

TEST_CASE("identity map has exactly zero margin and fails strict invariance") {
    Splitting s{{0}, {1}};
    ConeField cone{s, 0.6};
    auto rep = check_cone_invariance(linear_sampled_map(diag({1.0, 1.0}), unit_box(2)), cone, 2);
    CHECK(rep.worst_margin == 0.0);
    CHECK_FALSE(rep.ok);
}

TEST_CASE("expansion on the complementary bundle breaks invariance") {
    Splitting s{{0}, {1}};
    ConeField cone{s, std::atan(1.0)};
    auto rep = check_cone_invariance(linear_sampled_map(diag({2.0, 0.5}), unit_box(2)), cone, 2);
    CHECK_FALSE(rep.ok);
    CHECK(rep.worst_margin < 0.0);
}

TEST_CASE("smaller rate gap means smaller margin") {
    Splitting s{{0}, {1}};
    ConeField cone{s, 0.5};
    auto tight = check_cone_invariance(linear_sampled_map(diag({0.9, 1.0}), unit_box(2)), cone, 2);
    auto wide = check_cone_invariance(linear_sampled_map(diag({0.25, 1.0}), unit_box(2)), cone, 2);
    CHECK(wide.worst_margin > tight.worst_margin);
    CHECK(tight.ok);
}

TEST_CASE("cone invariance for a nonlinear sampled map via finite differences") {
    SampledMap m;
    m.domain = unit_box(2);
    m.eval = [](const Eigen::VectorXd& p) {
        Eigen::VectorXd q(2);
        q[0] = 0.3 * p[0] + 0.01 * p[1] * p[1];
        q[1] = 2.0 * p[1] + 0.05 * p[0] * p[0];
        return q;
    };
    ConeField cone{{{0}, {1}}, 0.7};
    auto rep = check_cone_invariance(m, cone, 5);
    CHECK(rep.ok);
}

TEST_CASE("uniform rate constants") {
    Eigen::MatrixXd R(2, 2);
    double th = 0.3;
    R << 0.5 * std::cos(th), -0.5 * std::sin(th), 0.5 * std::sin(th), 0.5 * std::cos(th);
    auto ur = uniform_rate_check(R, {0, 1}, 100);
    CHECK(ur.kappa == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(ur.C == doctest::Approx(1.0).epsilon(1e-9));

    Eigen::MatrixXd Jb(2, 2);
    Jb << 0.5, 1.0, 0.0, 0.5;
    auto uj = uniform_rate_check(Jb, {0, 1}, 200);
    CHECK(uj.C > 1.0);
    CHECK(std::isfinite(uj.C));
    // extrapolation: ||block^n|| <= C kappa^n for n up to 2N
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
    double kpow = 1.0;
    for (int n = 1; n <= 400; ++n) {
        P = Jb * P;
        kpow *= uj.kappa;
        double nrm = Eigen::JacobiSVD<Eigen::MatrixXd>(P).singularValues().maxCoeff();
        CHECK(nrm <= uj.C * kpow * (1.0 + 1e-9));
    }

    CHECK_THROWS_WITH_AS(uniform_rate_check(diag({1.1, 0.5}), {0}, 10),
                         doctest::Contains("NotContracting"), Error);
}

#pragma once

// Dominated-splitting and cone-field checks for block linear maps and for
// differentiable maps sampled on a grid. A splitting E + F (coordinate index
// sets) is dominated at time l when
//
//   max_{unit u in E} ||L^l u|| / min_{unit v in F} ||L^l v|| < 1/2,
//
// computed from extremal singular values of the blocks. Cone fields are
// constant over the domain box: half-angle around the F coordinate plane.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "blenderlab/geometry.hpp"

namespace blenderlab::cones {

struct Splitting {
    std::vector<int> E;  // index sets, must partition 0..d-1
    std::vector<int> F;
};

struct ConeField {
    Splitting base;
    double half_angle = 0.0;  // in (0, pi/2)
};

// Minimal l <= 1e6 with the 1/2 ratio condition. Pre: map invertible and
// block-diagonal with respect to the splitting. Errors: NotDominated,
// BadSplitting, NotInvertible.
long domination_time(const Eigen::MatrixXd& linear_map, const Splitting& splitting);

struct SampledMap {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    // Optional closed-form Jacobian; central differences (step 1e-6) otherwise.
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
    Box domain;
};

SampledMap linear_sampled_map(const Eigen::MatrixXd& M, const Box& domain);

struct ConeInvarianceReport {
    bool ok = false;
    double worst_margin = 0.0;
    long directions_checked = 0;
};

// Strict forward invariance of the F-cone: for each grid point and each
// boundary direction of the cone (32 per 2-plane, combinatorial cap 4096),
// the image direction must lie in the cone with positive angular margin.
ConeInvarianceReport check_cone_invariance(const SampledMap& map, const ConeField& cone,
                                           int grid_resolution);

struct UniformRate {
    double C = 0.0;
    double kappa = 0.0;
};

// kappa = spectral radius of the restricted block + 1e-12; C = max over
// n <= N of ||block^n|| / kappa^n. Errors: NotContracting.
UniformRate uniform_rate_check(const Eigen::MatrixXd& linear_map, const std::vector<int>& bundle,
                               int horizon);

}  // namespace blenderlab::cones

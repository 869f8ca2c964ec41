#pragma once

// Shared model builders for the unit and acceptance suites.

#include <Eigen/Dense>

#include "blenderlab/local_model.hpp"

namespace blenderlab::testmodels {

using local_model::LocalTangencyModel;

inline Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }
inline Eigen::MatrixXd empty() { return Eigen::MatrixXd(0, 0); }

inline Box box2(double xlo, double xhi, double ylo, double yhi) {
    Eigen::VectorXd lo(2), hi(2);
    lo << xlo, ylo;
    hi << xhi, yhi;
    return Box(lo, hi);
}

inline Box box3(double a0, double a1, double b0, double b1, double c0, double c1) {
    Eigen::VectorXd lo(3), hi(3);
    lo << a0, b0, c0;
    hi << a1, b1, c1;
    return Box(lo, hi);
}

// Planar model (coordinates (x, y)) with a purely linear transition of unit
// central determinant; volume ratios are exactly J^k on flat disks.
inline LocalTangencyModel::Config volume_config(double lambda = 0.9, double gamma = 2.0) {
    LocalTangencyModel::Config cfg;
    cfg.m = cfg.m_s = 1;
    cfg.n = cfg.n_u = 1;
    cfg.A = empty();
    cfg.B = scalar(lambda);
    cfg.C = scalar(gamma);
    cfg.D = empty();
    cfg.W = box2(-3, 3, -3, 3);
    cfg.y_minus = Eigen::VectorXd::Constant(1, 1.0);
    cfg.v_minus = Eigen::VectorXd(0);
    cfg.u_plus = Eigen::VectorXd(0);
    cfg.x_plus = Eigen::VectorXd::Constant(1, 1.0);
    cfg.pi_plus = box2(0.96, 1.04, -0.1, 0.1);
    cfg.pi_minus = box2(-0.5, 0.5, 0.9, 1.1);
    cfg.transition.B2 = scalar(0.25);
    cfg.transition.C2 = scalar(1.0);
    cfg.transition.B3 = scalar(1.0);
    cfg.transition.C3 = {Eigen::MatrixXd::Zero(1, 1)};  // linear transition
    cfg.transition.B1 = Eigen::MatrixXd(0, 1);
    cfg.transition.C1 = Eigen::MatrixXd(0, 1);
    cfg.rho = 0.04;
    return cfg;
}

// Planar tangency model with the quadratic fold, used by the unfolding and
// cycle-witness experiments: lambda*gamma = 1.5 (effective dimension one).
inline LocalTangencyModel::Config unfold_config() {
    LocalTangencyModel::Config cfg;
    cfg.m = cfg.m_s = 1;
    cfg.n = cfg.n_u = 1;
    cfg.A = empty();
    cfg.B = scalar(0.75);
    cfg.C = scalar(2.0);
    cfg.D = empty();
    cfg.W = box2(-3, 3, -3, 3);
    cfg.y_minus = Eigen::VectorXd::Constant(1, 1.0);
    cfg.v_minus = Eigen::VectorXd(0);
    cfg.u_plus = Eigen::VectorXd(0);
    cfg.x_plus = Eigen::VectorXd::Constant(1, 1.0);
    cfg.pi_plus = box2(0.9, 1.1, -0.1, 0.1);
    cfg.pi_minus = box2(-0.3, 0.3, 0.9, 1.1);
    cfg.transition.B2 = scalar(0.5);
    cfg.transition.C2 = scalar(1.0);
    cfg.transition.B3 = scalar(1.0);
    cfg.transition.C3 = {scalar(1.0)};
    cfg.rho = 0.04;
    cfg.theta_planes = {0.999, 1.001};
    return cfg;
}

// Three-dimensional model (u, x, y) with a strong-stable direction; the
// diameter experiments run here.
inline LocalTangencyModel::Config diameter_config() {
    LocalTangencyModel::Config cfg;
    cfg.m = 2;
    cfg.m_s = 1;
    cfg.n = cfg.n_u = 1;
    cfg.A = scalar(0.3);
    cfg.B = scalar(0.5);
    cfg.C = scalar(2.0);
    cfg.D = empty();
    cfg.W = box3(-3, 3, -3, 3, -3, 3);
    cfg.y_minus = Eigen::VectorXd::Constant(1, 1.0);
    cfg.v_minus = Eigen::VectorXd(0);
    cfg.u_plus = Eigen::VectorXd::Constant(1, 0.5);
    cfg.x_plus = Eigen::VectorXd::Constant(1, 1.0);
    cfg.pi_plus = box3(0.3, 0.7, 0.9, 1.1, -0.1, 0.1);
    cfg.pi_minus = box3(-0.3, 0.3, -0.3, 0.3, 0.9, 1.1);
    cfg.transition.A1 = scalar(0.5);
    cfg.transition.B1 = scalar(0.1);
    cfg.transition.C1 = scalar(0.3);
    cfg.transition.A2 = scalar(0.1);
    cfg.transition.B2 = scalar(0.2);
    cfg.transition.C2 = scalar(1.0);
    cfg.transition.A3 = scalar(0.2);
    cfg.transition.B3 = scalar(1.0);
    cfg.transition.C3 = {scalar(1.0)};
    cfg.rho = 0.08;
    return cfg;
}

// Stable leading pair rotated by pi/4 (type (2,1)); exercises the rotational
// bounding boxes and the alpha-rotation of the unfolding family.
inline LocalTangencyModel::Config rotation_config() {
    LocalTangencyModel::Config cfg;
    cfg.m = cfg.m_s = 2;
    cfg.n = cfg.n_u = 1;
    cfg.A = empty();
    Eigen::MatrixXd B(2, 2);
    double c = 0.5 * std::cos(0.78539816339744831), s = 0.5 * std::sin(0.78539816339744831);
    B << c, -s, s, c;
    cfg.B = B;
    cfg.C = scalar(2.0);
    cfg.D = empty();
    cfg.W = box3(-3, 3, -3, 3, -3, 3);
    cfg.y_minus = Eigen::VectorXd::Constant(1, 1.0);
    cfg.v_minus = Eigen::VectorXd(0);
    cfg.u_plus = Eigen::VectorXd(0);
    Eigen::VectorXd xp(2);
    xp << 1.0, 0.0;
    cfg.x_plus = xp;
    cfg.pi_plus = box3(0.9, 1.1, -0.1, 0.1, -0.1, 0.1);
    cfg.pi_minus = box3(-0.4, 0.4, -0.4, 0.4, 0.9, 1.1);
    cfg.transition.B2 = 0.1 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd C2(2, 1);
    C2 << 1.0, 0.0;
    cfg.transition.C2 = C2;
    Eigen::MatrixXd B3(1, 2);
    B3 << 1.0, 0.0;
    cfg.transition.B3 = B3;
    cfg.transition.C3 = {scalar(1.0)};
    cfg.rho = 0.04;
    return cfg;
}

}  // namespace blenderlab::testmodels

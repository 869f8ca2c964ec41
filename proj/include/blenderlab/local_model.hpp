#pragma once

// Linearized neighborhood of a homoclinic tangency.
//
// Coordinates (u, x, y, v) with dimensions (m - m_s, m_s, n_u, n - n_u).
// The local map is T0(u,x,y,v) = (Au, Bx, Cy, Dv) with
// |eig A| < |eig B| = lambda < 1 < gamma = |eig C| < |eig D|. The transition
// map T1 : Pi_minus -> Pi_plus carries the tangency point Y_minus = (0,0,y-,v-)
// to Y_plus = (u+,x+,0,0):
//
//   ubar - u+ = A1 u + B1 x + C1 (y - y-) + D1 vbar + r1
//   xbar - x+ = A2 u + B2 x + C2 (y - y-) + D2 vbar + r2
//   ybar      = A3 u + B3 x + C3 (y - y-)^2 + D3 vbar + r3
//   v - v-    = A4 u + B4 x + C4 (y - y-) + D4 vbar + r4
//
// The fourth line is implicit in vbar and is solved by fixed-point iteration
// (tolerance 1e-12, at most 100 sweeps). Strips Pi_k = T0^{-k}(Pi-) n Pi+
// are kept as axis-aligned boxes: exact intervals for diagonal blocks,
// certified outer boxes for rotational ones. The return map is
// R_k = T1 o T0^k.

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blenderlab/geometry.hpp"

namespace blenderlab::local_model {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Point {
    VectorXd u, x, y, v;

    VectorXd flat() const;
    static Point split(const VectorXd& p, int du, int dx, int dy, int dv);
};

// Quadratic block of the ybar equation: component i is dy^T quad[i] dy.
using QuadraticForm = std::vector<MatrixXd>;

// Optional higher-order remainder (r1, r2, r3, r4) as a function of
// (u, x, y - y-, vbar); must vanish together with its derivative at zero.
struct Remainder {
    std::function<VectorXd(const VectorXd& u, const VectorXd& x, const VectorXd& dy,
                           const VectorXd& vbar)>
        eval;                 // returns the stacked (r1,r2,r3,r4)
    double lipschitz = 0.0;   // certified bound, used for box inflation
};

struct TransitionMap {
    MatrixXd A1, B1, C1, D1;
    MatrixXd A2, B2, C2, D2;
    MatrixXd A3, B3, D3;
    QuadraticForm C3;
    MatrixXd A4, B4, C4, D4;
    std::optional<Remainder> remainder;
};

struct Strip {
    int k = 0;
    Box box_plus;   // subset of Pi+ (outer box for rotational blocks)
    Box box_minus;  // T0^k(box_plus)
    // Present only for resized strips: faces as (axis, side, value).
    struct Face {
        int axis;
        int side;  // 0 = lo, 1 = hi
        double value;
    };
    std::vector<Face> s_boundary;
    std::vector<Face> u_boundary;
    std::vector<int> u_diam_axes;  // flat indices of the y block
    std::vector<int> c_diam_axes;  // flat indices of the x block

    double diam_u() const;  // Euclidean diameter of the y-projection of box_plus
    double diam_c() const;  // Euclidean diameter of the x-projection of box_plus
};

struct GenericConditionsReport {
    struct Item {
        bool pass = false;
        double value = 0.0;  // rank defect, block norm, singular value or determinant
        std::string note;
    };
    Item c1, c2, c3, c4, c5;
    bool all_pass() const { return c1.pass && c2.pass && c3.pass && c4.pass && c5.pass; }
};

class LocalTangencyModel {
public:
    struct Config {
        int m = 0, n = 0, m_s = 0, n_u = 0;
        MatrixXd A, B, C, D;  // sizes (m-m_s), m_s, n_u, (n-n_u); empty allowed
        Box W;                // in flat (u,x,y,v) order
        VectorXd y_minus, v_minus;  // Y- = (0, 0, y-, v-)
        VectorXd u_plus, x_plus;    // Y+ = (u+, x+, 0, 0)
        Box pi_plus, pi_minus;
        int ell = 1;  // transition length (iterates excluded from W)
        TransitionMap transition;
        double cone_half_angle = 0.78539816339744831;  // cu-cone around (x,y,v)
        double rho = 0.0;  // c-diameter lower bound for resized strips
        std::vector<double> theta_planes;  // y-offsets of the s-boundary sheets
    };

    explicit LocalTangencyModel(Config cfg);

    const Config& cfg() const { return cfg_; }
    int dim() const { return cfg_.m + cfg_.n; }
    int du() const { return cfg_.m - cfg_.m_s; }
    int dx() const { return cfg_.m_s; }
    int dy() const { return cfg_.n_u; }
    int dv() const { return cfg_.n - cfg_.n_u; }

    double lambda() const { return lambda_; }
    double gamma() const { return gamma_; }
    double leading_jacobian() const { return jac_; }
    int k0() const { return k0_; }
    double volume_constant() const { return L_; }    // Lemma-4.1 style constant
    double diameter_constant() const { return K_; }  // Lemma-4.2 style constant
    double rho() const { return cfg_.rho; }

    Point Y_minus() const;
    Point Y_plus() const;

    // k-fold linear map; every intermediate iterate must stay in W.
    // Errors: LeftNeighborhood(i).
    Point apply_T0(const Point& p, int k) const;

    // Transition map; input must lie in Pi-. Errors: OutsidePiMinus,
    // ImplicitSolveFailure.
    Point apply_T1(const Point& p) const;
    // Same formulas without the reference-box checks; used by witness
    // searches whose brackets straddle box faces.
    Point apply_T1_unchecked(const Point& p) const;

    // Forward Jacobian of T1 at p (closed form; finite differences on the
    // remainder when present).
    MatrixXd transition_jacobian(const Point& p) const;

    // Strip for iterate count k >= k0. Errors: EmptyStrip.
    Strip strip(int k) const;

    // R_k = T1 o T0^k; input must lie in strip(k).
    Point return_map(int k, const Point& p) const;
    Point return_map_unchecked(int k, const Point& p) const;

    GenericConditionsReport check_generic_conditions() const;

    // Resized strip between the theta sheets (s-boundaries on the given
    // hyperplanes {y = c}). Errors: QuantifierViolation, EmptyStrip,
    // WrongCodimension.
    Strip resized_strip(int k, const std::vector<double>& theta_planes) const;
    Strip resized_strip(int k) const;  // uses the configured theta planes

    MatrixXd block_power(const MatrixXd& M, int k) const;
    VectorXd solve_vbar(const VectorXd& u, const VectorXd& x, const VectorXd& dy,
                        const VectorXd& v) const;

private:
    Config cfg_;
    double lambda_ = 0.0, gamma_ = 0.0, jac_ = 0.0;
    int k0_ = 0;
    double L_ = 0.0, K_ = 0.0;

    Box t0_preimage_box(const Box& target, int k) const;  // of Pi- under T0^k
    Box t0_image_box(const Box& source, int k) const;
    void calibrate();
};

// Parametrized (m_s + n)-surface over [0,1]^d used by the experiments.
struct Disk {
    int dim = 0;
    std::function<Point(const VectorXd&)> chart;
};

// Affine disk spanning the central extent of a strip box, with an optional
// tilt of the u-coordinates (slope per unit of central arc length).
Disk central_disk(const LocalTangencyModel& model, const Strip& strip, double u_tilt = 0.0,
                  double shrink = 1.0);

struct VolumeExperiment {
    double ratio = 0.0;       // vol(R_k(disk)) / vol(disk), tensor midpoint rule
    double bound_ok = false;
    double L_used = 0.0;
    double quadrature_discrepancy = 0.0;  // |ratio_64 - ratio_128| / ratio
};

// Errors: ConeViolation, DegenerateDisk. Grid 64 per dimension with a
// refinement check at 128.
VolumeExperiment volume_expansion_experiment(const LocalTangencyModel& model, int k,
                                             const Disk& disk);

struct DiameterExperiment {
    double diam_c_out = 0.0;
    double bound = 0.0;
    bool ok = false;
    bool degenerate_input = false;  // zero u-diameter fallback
};

// Codimension-one only (n = n_u = 1). Errors: WrongCodimension, ConeViolation.
DiameterExperiment diameter_experiment(const LocalTangencyModel& model, int k, const Disk& disk);

}  // namespace blenderlab::local_model

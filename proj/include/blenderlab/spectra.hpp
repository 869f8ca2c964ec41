#pragma once

// Periodic-point spectra: ordering of multipliers, saddle type (m_s, n_u),
// simplicity, leading Jacobian J = lambda^{m_s} * gamma^{n_u}, effective
// dimension of the unfolding family, and the eigenvalue bifurcation of the
// rotation family A_phi = A o R_phi.
//
// Conventions:
//   |lambda_m| <= ... <= |lambda_1| = lambda < 1 < gamma = |gamma_1| <= ... <= |gamma_n|
//   leading multipliers are the ones with modulus exactly lambda resp. gamma
//   (ties tested with relative tolerance kModulusTieTol).

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "blenderlab/errors.hpp"

namespace blenderlab::spectra {

using Complex = std::complex<double>;

inline constexpr double kModulusTieTol = 1e-9;  // relative, for |a| == |b|
inline constexpr double kNonrealTol = 1e-9;     // |Im| > tol * |z| means nonreal
inline constexpr double kUnitModulusTol = 1e-9; // reject ||z| - 1| below this

struct SaddleSpectrum {
    std::vector<Complex> multipliers;  // ordered: stable by decreasing modulus, then
                                       // unstable by increasing modulus
    int m = 0;                         // stable count
    int n = 0;                         // unstable count (u-index)

    double lambda() const;  // modulus of the stable leading multiplier
    double gamma() const;   // modulus of the unstable leading multiplier
};

// Errors: UnitModulus, IndexMismatch.
SaddleSpectrum order_spectrum(const std::vector<Complex>& multipliers, int u_index);

struct SaddleClassification {
    int m_s = 0;
    int n_u = 0;
    bool simple = false;
    double leading_jacobian = 0.0;  // lambda^{m_s} * gamma^{n_u}
    double lambda = 0.0;
    double gamma = 0.0;
    std::optional<int> effective_dimension;  // set when simple and J > 1
};

// Classify a multiplier list. See the four-case simplicity list: (1,1);
// (2,1)/(1,2) with the leading pair nonreal conjugate; (2,2) with both
// pairs nonreal. Errors: UnitModulus, IndexMismatch.
SaddleClassification classify(const std::vector<Complex>& multipliers, int u_index);

// Number of unfolding parameters for a simple saddle with expanding leading
// Jacobian:
//   1 : type (1,1), or (1,2) with lambda*gamma > 1
//   2 : type (1,2) with lambda*gamma < 1, or (2,1)/(2,2) with lambda^2*gamma > 1
//   3 : type (2,2) with lambda^2*gamma < 1
// Errors: NotSimple, JacobianNotExpanding (caller may classify the inverse
// spectrum instead).
int effective_dimension(const SaddleClassification& c, double lambda, double gamma);

// Eigenvalues of A o R_phi, where R_phi is the counterclockwise rotation.
// Requires A with real eigenvalues tau > rho > 0; total on such A.
std::pair<Complex, Complex> rotation_eigenvalues(const Eigen::Matrix2d& A, double phi);

struct SaddleNodeAngle {
    double phi0 = 0.0;
    double discriminant_at_phi0 = 0.0;
};

// Smallest phi0 > 0 at which A o R_phi has a repeated real eigenvalue:
// bisection on the discriminant of the characteristic polynomial, angle
// tolerance 1e-12, first sign change on (0, pi) wins.
// Errors: BadMatrix (precondition), NoBifurcation (with diagnostics).
SaddleNodeAngle saddle_node_angle(const Eigen::Matrix2d& A);

// Discriminant of det(A o R_phi - z I): trace^2 - 4 det. Exposed because the
// bifurcation tests check its sign structure directly.
double rotation_discriminant(const Eigen::Matrix2d& A, double phi);

}  // namespace blenderlab::spectra

#include "blenderlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace blenderlab::spectra {

namespace {

bool is_nonreal(const Complex& z) {
    return std::abs(z.imag()) > kNonrealTol * std::abs(z);
}

bool conjugate_pair(const Complex& a, const Complex& b) {
    if (!is_nonreal(a) || !is_nonreal(b)) return false;
    double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a.real() - b.real()) <= kModulusTieTol * scale &&
           std::abs(a.imag() + b.imag()) <= kModulusTieTol * scale;
}

}  // namespace

double SaddleSpectrum::lambda() const {
    if (m == 0) throw Error("IndexMismatch", "no stable multipliers");
    return std::abs(multipliers[0]);
}

double SaddleSpectrum::gamma() const {
    if (n == 0) throw Error("IndexMismatch", "no unstable multipliers");
    return std::abs(multipliers[static_cast<size_t>(m)]);
}

SaddleSpectrum order_spectrum(const std::vector<Complex>& multipliers, int u_index) {
    if (multipliers.empty()) throw Error("IndexMismatch", "empty multiplier list");

    std::vector<Complex> stable, unstable;
    for (const auto& z : multipliers) {
        double r = std::abs(z);
        if (std::abs(r - 1.0) <= kUnitModulusTol)
            throw Error("UnitModulus",
                        "multiplier with modulus within tolerance of 1: |z| = " + std::to_string(r));
        (r < 1.0 ? stable : unstable).push_back(z);
    }
    if (static_cast<int>(unstable.size()) != u_index)
        throw Error("IndexMismatch", "found " + std::to_string(unstable.size()) +
                                         " unstable multipliers, expected " + std::to_string(u_index));
    if (stable.empty())
        throw Error("IndexMismatch", "saddle requires at least one stable multiplier");

    // |lambda_m| <= ... <= |lambda_1| puts the leading stable one first.
    std::sort(stable.begin(), stable.end(),
              [](const Complex& a, const Complex& b) { return std::abs(a) > std::abs(b); });
    std::sort(unstable.begin(), unstable.end(),
              [](const Complex& a, const Complex& b) { return std::abs(a) < std::abs(b); });

    SaddleSpectrum s;
    s.multipliers = stable;
    s.multipliers.insert(s.multipliers.end(), unstable.begin(), unstable.end());
    s.m = static_cast<int>(stable.size());
    s.n = static_cast<int>(unstable.size());
    return s;
}

SaddleClassification classify(const std::vector<Complex>& multipliers, int u_index) {
    SaddleSpectrum s = order_spectrum(multipliers, u_index);

    const double lambda = s.lambda();
    const double gamma = s.gamma();

    int m_s = 0;
    for (int i = 0; i < s.m; ++i)
        if (std::abs(std::abs(s.multipliers[static_cast<size_t>(i)]) - lambda) <= kModulusTieTol * lambda)
            ++m_s;
    int n_u = 0;
    for (int i = 0; i < s.n; ++i)
        if (std::abs(std::abs(s.multipliers[static_cast<size_t>(s.m + i)]) - gamma) <= kModulusTieTol * gamma)
            ++n_u;

    auto leading_stable = [&](int i) { return s.multipliers[static_cast<size_t>(i)]; };
    auto leading_unstable = [&](int i) { return s.multipliers[static_cast<size_t>(s.m + i)]; };

    bool simple = false;
    if (m_s == 1 && n_u == 1) {
        simple = true;
    } else if (m_s == 2 && n_u == 1) {
        simple = conjugate_pair(leading_stable(0), leading_stable(1));
    } else if (m_s == 1 && n_u == 2) {
        simple = conjugate_pair(leading_unstable(0), leading_unstable(1));
    } else if (m_s == 2 && n_u == 2) {
        simple = conjugate_pair(leading_stable(0), leading_stable(1)) &&
                 conjugate_pair(leading_unstable(0), leading_unstable(1));
    }

    SaddleClassification c;
    c.m_s = m_s;
    c.n_u = n_u;
    c.simple = simple;
    c.lambda = lambda;
    c.gamma = gamma;
    c.leading_jacobian = std::pow(lambda, m_s) * std::pow(gamma, n_u);
    if (simple && c.leading_jacobian > 1.0)
        c.effective_dimension = effective_dimension(c, lambda, gamma);
    return c;
}

int effective_dimension(const SaddleClassification& c, double lambda, double gamma) {
    if (!c.simple) throw Error("NotSimple", "effective dimension is defined for simple saddles");
    double J = std::pow(lambda, c.m_s) * std::pow(gamma, c.n_u);
    if (J <= 1.0)
        throw Error("JacobianNotExpanding",
                    "leading Jacobian " + std::to_string(J) + " <= 1; classify the inverse spectrum");

    if (c.m_s == 1 && c.n_u == 1) return 1;
    if (c.m_s == 1 && c.n_u == 2) return lambda * gamma > 1.0 ? 1 : 2;
    if (c.m_s == 2 && c.n_u == 1) return 2;  // J = lambda^2*gamma > 1 here
    if (c.m_s == 2 && c.n_u == 2) return lambda * lambda * gamma > 1.0 ? 2 : 3;
    throw Error("NotSimple", "unexpected type (" + std::to_string(c.m_s) + "," + std::to_string(c.n_u) + ")");
}

namespace {

// Validates tau > rho > 0 with real eigenvalues; returns (tau, rho).
std::pair<double, double> real_distinct_positive_eigs(const Eigen::Matrix2d& A) {
    double tr = A.trace();
    double det = A.determinant();
    double disc = tr * tr - 4.0 * det;
    double scale = std::max(1.0, tr * tr);
    if (disc <= kModulusTieTol * scale)
        throw Error("BadMatrix", "A must have real distinct eigenvalues (discriminant "
                                 + std::to_string(disc) + ")");
    double sd = std::sqrt(disc);
    double tau = 0.5 * (tr + sd);
    double rho = 0.5 * (tr - sd);
    if (rho <= 0.0)
        throw Error("BadMatrix", "A must have positive eigenvalues");
    if (tau - rho <= kModulusTieTol * tau)
        throw Error("BadMatrix", "A must have distinct eigenvalues tau > rho");
    return {tau, rho};
}

Eigen::Matrix2d rotation(double phi) {
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    return R;
}

}  // namespace

double rotation_discriminant(const Eigen::Matrix2d& A, double phi) {
    Eigen::Matrix2d M = A * rotation(phi);
    double tr = M.trace();
    return tr * tr - 4.0 * A.determinant();  // det(A o R_phi) = det A
}

std::pair<Complex, Complex> rotation_eigenvalues(const Eigen::Matrix2d& A, double phi) {
    real_distinct_positive_eigs(A);
    Eigen::Matrix2d M = A * rotation(phi);
    double tr = M.trace();
    double det = M.determinant();
    double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        double sd = std::sqrt(disc);
        return {Complex(0.5 * (tr + sd), 0.0), Complex(0.5 * (tr - sd), 0.0)};
    }
    double im = 0.5 * std::sqrt(-disc);
    return {Complex(0.5 * tr, im), Complex(0.5 * tr, -im)};
}

SaddleNodeAngle saddle_node_angle(const Eigen::Matrix2d& A) {
    real_distinct_positive_eigs(A);

    const int kScanSteps = 4096;
    const double kAngleTol = 1e-12;
    const double pi = std::numbers::pi;

    double prev_phi = 0.0;
    double prev_disc = rotation_discriminant(A, 0.0);
    double min_disc = prev_disc;
    double argmin = 0.0;

    for (int i = 1; i <= kScanSteps; ++i) {
        double phi = pi * static_cast<double>(i) / kScanSteps;
        double disc = rotation_discriminant(A, phi);
        if (disc < min_disc) {
            min_disc = disc;
            argmin = phi;
        }
        if (prev_disc > 0.0 && disc <= 0.0) {
            double a = prev_phi, b = phi;
            while (b - a > kAngleTol) {
                double mid = 0.5 * (a + b);
                (rotation_discriminant(A, mid) > 0.0 ? a : b) = mid;
            }
            double phi0 = 0.5 * (a + b);
            return {phi0, rotation_discriminant(A, phi0)};
        }
        prev_phi = phi;
        prev_disc = disc;
    }
    throw Error("NoBifurcation",
                "discriminant never changes sign on (0, pi]; min " + std::to_string(min_disc) +
                    " at phi = " + std::to_string(argmin));
}

}  // namespace blenderlab::spectra

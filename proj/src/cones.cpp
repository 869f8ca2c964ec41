#include "blenderlab/cones.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace blenderlab::cones {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd extract_block(const MatrixXd& M, const std::vector<int>& idx) {
    MatrixXd B(idx.size(), idx.size());
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < idx.size(); ++j) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = M(idx[i], idx[j]);
    return B;
}

void check_partition(const Splitting& s, Eigen::Index dim) {
    std::vector<int> seen(static_cast<size_t>(dim), 0);
    for (int i : s.E) {
        if (i < 0 || i >= dim) throw Error("BadSplitting", "index out of range");
        ++seen[static_cast<size_t>(i)];
    }
    for (int i : s.F) {
        if (i < 0 || i >= dim) throw Error("BadSplitting", "index out of range");
        ++seen[static_cast<size_t>(i)];
    }
    for (int c : seen)
        if (c != 1) throw Error("BadSplitting", "index sets must partition the coordinates");
}

void check_block_invariant(const MatrixXd& M, const Splitting& s) {
    double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    for (int i : s.E)
        for (int j : s.F)
            if (std::abs(M(i, j)) > 1e-12 * scale || std::abs(M(j, i)) > 1e-12 * scale)
                throw Error("BadSplitting", "splitting is not invariant for the map");
}

double sigma_max(const MatrixXd& M) {
    return Eigen::JacobiSVD<MatrixXd>(M).singularValues().maxCoeff();
}
double sigma_min(const MatrixXd& M) {
    return Eigen::JacobiSVD<MatrixXd>(M).singularValues().minCoeff();
}

// Unit sphere sample in dimension p: {+1} for p = 1 (directions are lines),
// 32 equally spaced angles for p = 2, a seeded deterministic spread capped
// combinatorially above.
std::vector<VectorXd> sphere_samples(int p, int budget) {
    std::vector<VectorXd> out;
    if (p == 1) {
        VectorXd v(1);
        v << 1.0;
        out.push_back(v);
        return out;
    }
    if (p == 2) {
        int count = std::min(32, budget);
        for (int i = 0; i < count; ++i) {
            double a = 2.0 * std::numbers::pi * i / count;
            VectorXd v(2);
            v << std::cos(a), std::sin(a);
            out.push_back(v);
        }
        return out;
    }
    // Deterministic quasi-uniform points via a fixed linear congruential walk.
    int count = std::min(budget, 256);
    unsigned long long state = 0x9E3779B97F4A7C15ull;
    auto next = [&state]() {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(state >> 11) / 9007199254740992.0;  // [0,1)
    };
    for (int i = 0; i < count; ++i) {
        VectorXd v(p);
        double nrm2 = 0.0;
        for (int j = 0; j < p; ++j) {
            // Box-Muller from the deterministic stream
            double u1 = std::max(next(), 1e-12), u2 = next();
            v[j] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
            nrm2 += v[j] * v[j];
        }
        v /= std::sqrt(nrm2);
        out.push_back(v);
    }
    return out;
}

}  // namespace

long domination_time(const MatrixXd& L, const Splitting& splitting) {
    check_partition(splitting, L.rows());
    check_block_invariant(L, splitting);
    if (std::abs(L.determinant()) < 1e-300) throw Error("NotInvertible", "map must be invertible");

    MatrixXd E = extract_block(L, splitting.E);
    MatrixXd F = extract_block(L, splitting.F);

    // Powers tracked with running log-scales so 10^6 iterations cannot
    // overflow.
    MatrixXd PE = MatrixXd::Identity(E.rows(), E.cols());
    MatrixXd PF = MatrixXd::Identity(F.rows(), F.cols());
    double logE = 0.0, logF = 0.0;
    const long kMaxTime = 1000000;
    const double log_half = std::log(0.5);

    for (long l = 1; l <= kMaxTime; ++l) {
        PE = E * PE;
        PF = F * PF;
        double se = PE.cwiseAbs().maxCoeff();
        double sf = PF.cwiseAbs().maxCoeff();
        PE /= se;
        PF /= sf;
        logE += std::log(se);
        logF += std::log(sf);
        double log_ratio = std::log(sigma_max(PE)) + logE - (std::log(sigma_min(PF)) + logF);
        if (log_ratio < log_half) return l;
    }
    throw Error("NotDominated", "no domination time below 1e6");
}

SampledMap linear_sampled_map(const MatrixXd& M, const Box& domain) {
    SampledMap s;
    s.eval = [M](const VectorXd& x) { return VectorXd(M * x); };
    s.jacobian = [M](const VectorXd&) { return M; };
    s.domain = domain;
    return s;
}

ConeInvarianceReport check_cone_invariance(const SampledMap& map, const ConeField& cone,
                                           int grid_resolution) {
    const Eigen::Index dim = map.domain.dim();
    check_partition(cone.base, dim);
    if (cone.half_angle <= 0.0 || cone.half_angle >= std::asin(1.0))
        throw Error("BadCone", "half-angle must lie in (0, pi/2)");

    auto jac = map.jacobian;
    if (!jac) {
        auto f = map.eval;
        jac = [f, dim](const VectorXd& x) {
            const double h = 1e-6;
            MatrixXd J(dim, dim);
            for (Eigen::Index j = 0; j < dim; ++j) {
                VectorXd a = x, b = x;
                a[j] += h;
                b[j] -= h;
                J.col(j) = (f(a) - f(b)) / (2.0 * h);
            }
            return J;
        };
    }

    const int pE = static_cast<int>(cone.base.E.size());
    const int pF = static_cast<int>(cone.base.F.size());
    // 32 directions per 2-plane; combinatorial growth capped at 4096 total.
    int budget_each = static_cast<int>(std::sqrt(4096.0));
    auto dirs_F = sphere_samples(pF, budget_each);
    auto dirs_E = sphere_samples(pE, budget_each);

    double cth = std::cos(cone.half_angle);
    double sth = std::sin(cone.half_angle);

    // Boundary frame: w = cos(theta) f + sin(theta) e embedded in R^dim.
    std::vector<VectorXd> boundary;
    for (const auto& f : dirs_F)
        for (const auto& e : dirs_E) {
            VectorXd w = VectorXd::Zero(dim);
            for (int i = 0; i < pF; ++i) w[cone.base.F[static_cast<size_t>(i)]] = cth * f[i];
            for (int i = 0; i < pE; ++i) w[cone.base.E[static_cast<size_t>(i)]] = sth * e[i];
            boundary.push_back(w);
        }

    ConeInvarianceReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    int res = std::max(1, grid_resolution);
    std::vector<double> ticks(static_cast<size_t>(res));
    for (int i = 0; i < res; ++i)
        ticks[static_cast<size_t>(i)] = res == 1 ? 0.5 : static_cast<double>(i) / (res - 1);

    std::vector<Eigen::Index> idx(static_cast<size_t>(dim), 0);
    long total_cells = 1;
    for (Eigen::Index i = 0; i < dim; ++i) total_cells *= res;

    for (long cell = 0; cell < total_cells; ++cell) {
        long rem = cell;
        VectorXd p(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            int t = static_cast<int>(rem % res);
            rem /= res;
            p[i] = map.domain.lo[i] + ticks[static_cast<size_t>(t)] * (map.domain.hi[i] - map.domain.lo[i]);
        }
        MatrixXd J = jac(p);
        for (const auto& w : boundary) {
            double angle_in = angle_to_plane(w, cone.base.F);
            VectorXd w_img = J * w;
            double angle_out = angle_to_plane(w_img, cone.base.F);
            double margin = angle_in - angle_out;
            rep.worst_margin = std::min(rep.worst_margin, margin);
            ++rep.directions_checked;
        }
    }
    rep.ok = rep.worst_margin > 0.0;
    return rep;
}

UniformRate uniform_rate_check(const MatrixXd& L, const std::vector<int>& bundle, int horizon) {
    MatrixXd B = extract_block(L, bundle);
    double rho = 0.0;
    for (const auto& ev : Eigen::EigenSolver<MatrixXd>(B).eigenvalues())
        rho = std::max(rho, std::abs(ev));
    if (rho >= 1.0)
        throw Error("NotContracting", "spectral radius " + std::to_string(rho) + " >= 1");

    UniformRate out;
    out.kappa = rho + 1e-12;
    out.C = 1.0;  // n = 0 term
    MatrixXd P = MatrixXd::Identity(B.rows(), B.cols());
    double kpow = 1.0;
    for (int n = 1; n <= horizon; ++n) {
        P = B * P;
        kpow *= out.kappa;
        out.C = std::max(out.C, sigma_max(P) / kpow);
    }
    return out;
}

}  // namespace blenderlab::cones

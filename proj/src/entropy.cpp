#include "blenderlab/entropy.hpp"

#include <algorithm>
#include <cmath>

namespace blenderlab::entropy {

namespace {

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;

MatrixXi bool_mult(const MatrixXi& a, const MatrixXi& b) {
    const int d = static_cast<int>(a.rows());
    MatrixXi c = MatrixXi::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k)
            if (a(i, k))
                for (int j = 0; j < d; ++j)
                    if (b(k, j)) c(i, j) = 1;
    return c;
}

// Perron vector of a primitive nonnegative matrix via power iteration on
// M + I (shift keeps it primitive even for periodic irreducible M).
// Returns the spectral radius of M.
double perron(const MatrixXd& M, VectorXd* vec) {
    const int d = static_cast<int>(M.rows());
    VectorXd v = VectorXd::Constant(d, 1.0 / d);
    double rho = 0.0;
    for (int it = 0; it < 100000; ++it) {
        VectorXd w = M * v + v;
        double nrm = w.sum();  // positive vector, L1 normalization
        w /= nrm;
        double new_rho = nrm - 1.0;
        if (std::abs(new_rho - rho) <= 1e-12 * std::max(1.0, std::abs(new_rho)) && it > 4) {
            rho = new_rho;
            v = w;
            break;
        }
        rho = new_rho;
        v = w;
    }
    if (vec) *vec = v;
    return rho;
}

}  // namespace

bool is_irreducible(const MatrixXi& M) {
    const int d = static_cast<int>(M.rows());
    // (I + M)^{d-1} > 0 entrywise.
    MatrixXi S = MatrixXi::Identity(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (M(i, j)) S(i, j) = 1;
    MatrixXi P = MatrixXi::Identity(d, d);
    for (int k = 0; k < d - 1; ++k) P = bool_mult(P, S);
    return (P.array() > 0).all();
}

bool is_aperiodic(const MatrixXi& M) {
    const int d = static_cast<int>(M.rows());
    // Wielandt: a primitive matrix satisfies M^K > 0 with K = (d-1)^2 + 1.
    const int K = (d - 1) * (d - 1) + 1;
    MatrixXi P = MatrixXi::Identity(d, d);
    MatrixXi B = M.unaryExpr([](int x) { return x ? 1 : 0; });
    for (int k = 0; k < K; ++k) P = bool_mult(P, B);
    return (P.array() > 0).all();
}

void HorseshoeSpec::validate() const {
    const int d = static_cast<int>(transition.rows());
    if (transition.cols() != d || d == 0) throw SchemaError("transition matrix must be square");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (transition(i, j) != 0 && transition(i, j) != 1)
                throw SchemaError("transition matrix entries must be 0/1");
    if (!is_irreducible(transition)) throw Error("Reducible", "transition matrix is not irreducible");
    if (!is_aperiodic(transition)) throw Error("Reducible", "transition matrix is not aperiodic");
    if (static_cast<int>(rates.size()) != d) throw SchemaError("rates must have one list per state");
    if (m < 1 || n < 1) throw SchemaError("m and n must be at least 1");
    if (r <= 1.0) throw SchemaError("smoothness r must exceed 1");
    for (const auto& state : rates) {
        if (static_cast<int>(state.size()) != m + n)
            throw SchemaError("each state needs m + n rates");
        for (int i = 0; i < m + n; ++i) {
            double v = state[static_cast<size_t>(i)];
            if (v <= 0.0) throw SchemaError("rates must be positive");
            if (v == 1.0) throw SchemaError("no rate may equal 1");
            if (i < m && v >= 1.0) throw SchemaError("stable rates must be < 1");
            if (i >= m && v <= 1.0) throw SchemaError("unstable rates must be > 1");
        }
    }
}

double topological_entropy(const HorseshoeSpec& spec) {
    if (!is_irreducible(spec.transition)) throw Error("Reducible", "transition matrix is not irreducible");
    double rho = perron(spec.transition.cast<double>(), nullptr);
    return std::log(rho);
}

ParryMeasure maximal_entropy_measure(const HorseshoeSpec& spec) {
    spec.validate();
    const int d = static_cast<int>(spec.transition.rows());
    MatrixXd M = spec.transition.cast<double>();

    VectorXd right, left;
    double rho = perron(M, &right);
    perron(M.transpose(), &left);

    ParryMeasure mu;
    mu.transition_prob = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (spec.transition(i, j)) mu.transition_prob(i, j) = right[j] / (rho * right[i]);

    VectorXd pi(d);
    for (int i = 0; i < d; ++i) pi[i] = left[i] * right[i];
    mu.stationary = pi / pi.sum();

    double h = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (mu.transition_prob(i, j) > 0.0)
                h -= mu.stationary[i] * mu.transition_prob(i, j) * std::log(mu.transition_prob(i, j));
    mu.entropy = h;
    return mu;
}

SpectrumReport lyapunov_spectrum(const HorseshoeSpec& spec, const ParryMeasure& measure) {
    spec.validate();
    const int d = static_cast<int>(spec.transition.rows());
    if (measure.stationary.size() != d) throw SchemaError("measure dimension mismatch");
    VectorXd check = measure.transition_prob.transpose() * measure.stationary;
    if ((check - measure.stationary).lpNorm<Eigen::Infinity>() > 1e-9)
        throw Error("NotStationary", "measure is not stationary for the spec");

    SpectrumReport rep;
    rep.h_top = topological_entropy(spec);

    for (int slot = 0; slot < spec.m + spec.n; ++slot) {
        double chi = 0.0;
        for (int s = 0; s < d; ++s)
            chi += measure.stationary[s] * std::log(spec.rates[static_cast<size_t>(s)][static_cast<size_t>(slot)]);
        if (slot < spec.m)
            rep.stable_exponents.push_back(chi);
        else
            rep.unstable_exponents.push_back(chi);
    }
    std::sort(rep.stable_exponents.begin(), rep.stable_exponents.end());
    std::sort(rep.unstable_exponents.begin(), rep.unstable_exponents.end());

    rep.chi_cs = rep.stable_exponents.back();    // closest to zero from below
    rep.chi_cu = rep.unstable_exponents.front();  // closest to zero from above

    double sum_s = 0.0, sum_u = 0.0;
    for (double x : rep.stable_exponents) sum_s += x;
    for (double x : rep.unstable_exponents) sum_u += x;
    rep.J_s = std::exp(sum_s);
    rep.J_u = std::exp(sum_u);
    return rep;
}

EntropyGapReport entropy_gap(const HorseshoeSpec& spec) {
    ParryMeasure mu = maximal_entropy_measure(spec);
    SpectrumReport sp = lyapunov_spectrum(spec, mu);

    EntropyGapReport rep;
    rep.spectrum = sp;
    rep.h_top = sp.h_top;
    rep.threshold_cs = -std::log(sp.J_s) + sp.chi_cs / (2.0 * spec.r);
    rep.threshold_cu = std::log(sp.J_u) - sp.chi_cu / (2.0 * spec.r);
    rep.cs_ok = sp.h_top > rep.threshold_cs;
    rep.cu_ok = sp.h_top > rep.threshold_cu;
    rep.double_ok = sp.h_top > std::max(rep.threshold_cs, rep.threshold_cu);
    return rep;
}

}  // namespace blenderlab::entropy

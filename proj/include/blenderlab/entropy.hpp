#pragma once

// Symbolic horseshoe models: a subshift of finite type with per-state
// diagonal derivative rates (locally constant linear parts, so Lyapunov
// exponents are exact weighted sums). Provides topological entropy, the
// Parry measure, the Lyapunov spectrum with stable/unstable Jacobians, and
// the entropy-gap criteria
//
//   cs side:  h > -log J_s + chi_cs / (2r)
//   cu side:  h >  log J_u - chi_cu / (2r)
//   double:   h >  max of both right-hand sides
//
// in nats throughout.

#include <Eigen/Dense>
#include <vector>

#include "blenderlab/errors.hpp"

namespace blenderlab::entropy {

struct HorseshoeSpec {
    Eigen::MatrixXi transition;            // 0/1, irreducible and aperiodic
    std::vector<std::vector<double>> rates;  // per state: m stable (<1) then n unstable (>1)
    int m = 0;
    int n = 0;
    double r = 2.0;  // smoothness, > 1

    void validate() const;  // throws Reducible / BadSpec
};

bool is_irreducible(const Eigen::MatrixXi& M);
bool is_aperiodic(const Eigen::MatrixXi& M);  // assumes irreducible

// log of the spectral radius of the transition matrix; power iteration on
// M + I to tolerance 1e-12. Errors: Reducible.
double topological_entropy(const HorseshoeSpec& spec);

struct ParryMeasure {
    Eigen::VectorXd stationary;     // pi_i
    Eigen::MatrixXd transition_prob;  // P_ij
    double entropy = 0.0;           // of the chain; equals h_top to 1e-10
};

ParryMeasure maximal_entropy_measure(const HorseshoeSpec& spec);

struct SpectrumReport {
    double h_top = 0.0;
    std::vector<double> stable_exponents;    // chi^-_m <= ... <= chi^-_1 < 0
    std::vector<double> unstable_exponents;  // 0 < chi^+_1 <= ... <= chi^+_n
    double chi_cs = 0.0;  // chi^-_1
    double chi_cu = 0.0;  // chi^+_1
    double J_s = 0.0;     // exp(sum of stable exponents)
    double J_u = 0.0;     // exp(sum of unstable exponents)
};

// Exponent of rate slot i = sum over states of weight * log(rate_i); the
// per-slot averaging matches dominated one-dimensional subbundles.
// Pre: measure stationary for spec (checked to 1e-9).
SpectrumReport lyapunov_spectrum(const HorseshoeSpec& spec, const ParryMeasure& measure);

struct EntropyGapReport {
    bool cs_ok = false;
    bool cu_ok = false;
    bool double_ok = false;
    double threshold_cs = 0.0;
    double threshold_cu = 0.0;
    double h_top = 0.0;
    SpectrumReport spectrum;
};

EntropyGapReport entropy_gap(const HorseshoeSpec& spec);

}  // namespace blenderlab::entropy

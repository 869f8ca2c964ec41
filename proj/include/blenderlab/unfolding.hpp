#pragma once

// Unfolding families of the tangency model. The parameter t translates the
// ybar-component of the transition map, so the fold of the unstable segment
// sits at signed distance t from {y = 0}; alpha and beta add rotations on
// the stable and unstable leading planes (active only when those planes are
// two-dimensional). The unfolded return map is
//
//   R_{k,t} = T1_t o T0_t^k,     T0_t = double rotation of T0.
//
// Single-round saddles are fixed points of R_{k,t} found by Newton iteration
// with closed-form derivatives; u-indices come from the eigenvalues of the
// return derivative.

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "blenderlab/local_model.hpp"

namespace blenderlab::unfolding {

using local_model::Disk;
using local_model::LocalTangencyModel;
using local_model::Point;
using local_model::Strip;

struct UnfoldingParams {
    double t = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

class UnfoldedModel {
public:
    UnfoldedModel(const LocalTangencyModel& base, UnfoldingParams params);

    const LocalTangencyModel& base() const { return *base_; }
    const UnfoldingParams& params() const { return params_; }
    int effective_dimension() const { return d_e_; }

    Strip strip(int k) const;          // for the rotated linear part
    Strip resized_strip(int k) const;  // theta sheets from the base model

    Point return_map(int k, const Point& p) const;  // checked against the strip
    Point return_map_unchecked(int k, const Point& p) const;
    Eigen::MatrixXd return_jacobian(int k, const Point& p) const;

    // Analytic seed near the fold: the strip point whose k-th iterate hits
    // the fold height y-.
    Point fold_seed(int k) const;

private:
    const LocalTangencyModel* base_;
    UnfoldingParams params_;
    int d_e_ = 0;
    Eigen::MatrixXd B_t_, C_t_;  // rotated leading blocks

    Eigen::MatrixXd t0k_matrix(int k) const;
    Point apply_T1_t(const Point& p) const;
};

struct SingleRoundSaddle {
    Point location;
    int k = 0;
    UnfoldingParams params;
    int u_index = 0;
    double residual = 0.0;
    std::vector<std::complex<double>> eigenvalues;
};

struct SaddleSearchReport {
    std::vector<SingleRoundSaddle> saddles;
    int seeds = 0;
    int dropped = 0;  // non-converged or off-strip seeds
};

// Newton from a 5^d central seed grid plus the fold estimate; converged
// distinct fixed points inside the strip, deduplicated within 1e-8.
SaddleSearchReport find_single_round_saddles(const LocalTangencyModel& model,
                                             const UnfoldingParams& params, int k,
                                             const std::vector<Point>& extra_seeds = {});

struct SweepCell {
    int k = 0;
    double t = 0.0, alpha = 0.0, beta = 0.0;
    int u_index = 0;
    double residual = 0.0;
    Eigen::VectorXd location;
};

struct GridAxis {
    double lo = 0.0, hi = 0.0;
    int steps = 1;

    double at(int i) const { return steps <= 1 ? lo : lo + (hi - lo) * i / (steps - 1); }
};

struct SweepConfig {
    int k_min = 0, k_max = 0;
    GridAxis t, alpha, beta;
    int threads = 1;
};

struct Window {
    int k = 0;
    int u_index = 0;
    double t_lo = 0.0, t_hi = 0.0;
    double alpha = 0.0, beta = 0.0;

    double width() const { return t_hi - t_lo; }
};

struct SweepResult {
    std::vector<SweepCell> rows;      // deterministic grid order
    std::vector<Window> windows;      // maximal t-runs per (k, alpha, beta, u_index)
};

SweepResult index_variation_sweep(const LocalTangencyModel& model, const SweepConfig& config);

struct CycleWitness {
    int m0 = 0;               // first round crossing the s-boundary
    Point crossing;           // |signed distance to the crossed sheet| < 1e-10
    double y_signed = 0.0;    // height relative to the crossed stable sheet
    int face = 0;             // 0 = lower sheet, 1 = upper sheet
};

struct CycleWitnessDiagnostics {
    int rounds_run = 0;
    double final_diam_c = 0.0;
    double final_diam_u = 0.0;
    bool u_boundary_escape = false;
};

// Iterate a sampled local unstable disk of the saddle under R_{k,t},
// clipping to the resized strip, until the image crosses a stable boundary
// sheet; the crossing is bracketed and bisected to 1e-10 in the sheet's
// height coordinate. Errors: QuantifierViolation (gate), WrongCodimension,
// BadSaddle; NotFound carries diagnostics in the message.
CycleWitness cycle_witness(const LocalTangencyModel& model, const UnfoldingParams& params, int k,
                           const SingleRoundSaddle& saddle, int max_rounds,
                           CycleWitnessDiagnostics* diag = nullptr);

}  // namespace blenderlab::unfolding

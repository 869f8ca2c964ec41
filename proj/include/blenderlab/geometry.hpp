#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "blenderlab/errors.hpp"

namespace blenderlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Axis-aligned box, lo[i] <= hi[i] for every axis.
struct Box {
    VectorXd lo;
    VectorXd hi;

    Box() = default;
    Box(VectorXd l, VectorXd h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo.size() != hi.size())
            throw Error("BadBox", "lo/hi dimension mismatch");
        for (Eigen::Index i = 0; i < lo.size(); ++i)
            if (lo[i] > hi[i]) throw Error("BadBox", "lo > hi on axis " + std::to_string(i));
    }

    Eigen::Index dim() const { return lo.size(); }
    VectorXd center() const { return 0.5 * (lo + hi); }
    VectorXd halfwidth() const { return 0.5 * (hi - lo); }
    VectorXd widths() const { return hi - lo; }

    bool contains(const VectorXd& p, double tol = 0.0) const {
        for (Eigen::Index i = 0; i < lo.size(); ++i)
            if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
        return true;
    }

    bool empty_as_interval() const {
        for (Eigen::Index i = 0; i < lo.size(); ++i)
            if (lo[i] > hi[i]) return true;
        return false;
    }

    // Componentwise intersection; result may violate lo<=hi, check with intersects().
    static bool intersect(const Box& a, const Box& b, Box* out) {
        VectorXd l = a.lo.cwiseMax(b.lo);
        VectorXd h = a.hi.cwiseMin(b.hi);
        for (Eigen::Index i = 0; i < l.size(); ++i)
            if (l[i] > h[i]) return false;
        if (out) {
            out->lo = l;
            out->hi = h;
        }
        return true;
    }
};

// Outer bounding box of the image M(box): exact for diagonal M, a certified
// superset for full matrices (|M| acts on halfwidths).
inline Box bounding_image(const MatrixXd& M, const Box& b) {
    VectorXd c = M * b.center();
    VectorXd h = M.cwiseAbs() * b.halfwidth();
    return Box(c - h, c + h);
}

inline bool is_diagonal(const MatrixXd& M, double tol = 1e-14) {
    double scale = M.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            if (i != j && std::abs(M(i, j)) > tol * scale) return false;
    return true;
}

// Exact interval image of a box under a diagonal map (handles negative rates).
inline Box diagonal_image(const VectorXd& rates, const Box& b) {
    VectorXd lo(b.dim()), hi(b.dim());
    for (Eigen::Index i = 0; i < b.dim(); ++i) {
        double a = rates[i] * b.lo[i];
        double c = rates[i] * b.hi[i];
        lo[i] = std::min(a, c);
        hi[i] = std::max(a, c);
    }
    return Box(lo, hi);
}

inline double sq(double x) { return x * x; }

// Angle in [0, pi/2] between a vector and the coordinate plane spanned by
// the axes in `plane` (complement axes in `off`). Zero vector -> pi/2.
inline double angle_to_plane(const VectorXd& w, const std::vector<int>& plane) {
    double in2 = 0.0, all2 = w.squaredNorm();
    for (int i : plane) in2 += sq(w[i]);
    if (all2 == 0.0) return std::asin(1.0);
    double c = std::sqrt(in2 / all2);
    c = std::clamp(c, 0.0, 1.0);
    return std::acos(c);
}

}  // namespace blenderlab

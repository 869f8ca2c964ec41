#pragma once

// Explicit blender models and the superposition property.
//
// The affine blender-horseshoe: branches f_i on a reference box U with
// block-diagonal linear parts (ss / central / uu blocks), disjoint domains,
// ss and central contraction, uu expansion. The induced central maps g_i
// drive everything: when the union of the g_i-images covers the central box,
// every strong-stable disk crossing U meets the local unstable set, and the
// itinerary search below produces the intersection witness.
//
// Coordinates are ordered (ss..., central..., uu...).

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "blenderlab/geometry.hpp"

namespace blenderlab::blender {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Branch {
    MatrixXd ss;       // d_ss x d_ss, operator norm < 1
    MatrixXd central;  // d_cs x d_cs contraction; covering needs rates in (1/2, 1)
    MatrixXd uu;       // d_uu x d_uu, smallest singular value > 1
    VectorXd offset;   // full dimension
    Box domain;        // sub-box of U, pairwise disjoint interiors

    MatrixXd full_linear(int d_ss, int d_cs, int d_uu) const;
};

enum class Orientation { cs, cu };

struct BlenderSpec {
    int d_ss = 0;
    int d_cs = 0;
    int d_uu = 0;
    Box domain;  // reference box U
    std::vector<Branch> branches;
    int distinctive_branch = 0;
    Orientation orientation = Orientation::cs;
    double ss_cone_half_angle = 0.5;  // radians; disks must stay below this

    int dim() const { return d_ss + d_cs + d_uu; }
    Box central_box() const;
    // Affine central map of branch i: x -> central * x + offset_central.
    std::pair<MatrixXd, VectorXd> central_map(int i) const;
    VectorXd distinctive_saddle() const;  // fixed point of the designated branch

    void validate() const;  // structure; covering is a separate criterion
};

struct SsDisk {
    // Chart from [0,1]^{d_ss} into the ambient space; must cross U fully in
    // the ss-direction and keep tangent frames within tangent_bound of the
    // ss-plane.
    std::function<VectorXd(const VectorXd&)> chart;
    int d_ss = 0;
    double tangent_bound = 0.0;
};

// Vertical disk spanning the ss-extent of U at fixed central coordinate c
// and uu position u0.
SsDisk vertical_disk(const BlenderSpec& spec, const VectorXd& c, const VectorXd& u0);

// Throws DiskInvalid when the crossing or cone constraints fail.
void validate_disk(const BlenderSpec& spec, const SsDisk& disk);

struct CoveringReport {
    bool ok = false;
    double margin = 0.0;  // minimal overlap depth; negative = largest gap
};

// Does the union of central images cover the central box? Exact for
// one-dimensional central bundles; coordinatewise for diagonal central
// blocks in higher central dimension.
CoveringReport covering_criterion(const BlenderSpec& spec);

struct Witness {
    VectorXd point;              // on the disk
    std::vector<int> itinerary;  // branch indices, step 1 first
    double residual = 0.0;       // distance to the depth-truncated unstable set
    double residual_bound = 0.0; // (max contraction)^depth * box size
};

// Itinerary search: at each step choose the lowest-index branch whose
// central image contains the current central coordinate, pull back, recurse.
// Errors: CoverageGap when no branch applies (possible only when covering
// fails), DiskInvalid.
Witness verify_superposition(const BlenderSpec& spec, const SsDisk& disk, int depth);

struct RobustnessReport {
    double epsilon0 = 0.0;
    bool covering_ok = false;
};

// Largest certified perturbation size (operator/sup norm on every branch's
// linear part and offset) that keeps the covering criterion satisfied,
// propagated from the covering margin.
RobustnessReport robustness_margin(const BlenderSpec& spec);

// Relabel the most-contracting central coordinates as strong-stable ones.
// Pre: diagonal central blocks with dominated (strictly ordered) rates.
// Errors: NotDominated, BadReduction.
BlenderSpec reduce_central_dimension(const BlenderSpec& spec, int keep);

// --- Plykin-type product blender -------------------------------------------

// Pluggable planar repeller on [0,1]^2: declares its minimal expansion rate
// and whether its unstable lamination fills the square at a given
// resolution; level sets of leaf_value are the unstable leaves.
struct PlanarRepeller {
    std::string name;
    double min_expansion = 0.0;
    std::function<double(const Eigen::Vector2d&)> leaf_value;
    std::function<bool(double)> lamination_covers;
};

PlanarRepeller affine_surrogate_repeller();  // horizontal leaves fill exactly
PlanarRepeller gappy_surrogate_repeller();   // leaves miss a central band

struct ProductBlenderSpec {
    int ss_dim = 0;
    double gamma = 0.0;  // ss contraction rate
    PlanarRepeller repeller;
    Box domain;  // (-1,1)^{ss_dim} x [0,1]^2
};

// Errors: RateViolation, LaminationGap.
ProductBlenderSpec product_blender(const PlanarRepeller& repeller, double gamma, int ss_dim,
                                   double resolution = 1e-3);

struct ProductWitness {
    VectorXd point;
    double residual = 0.0;   // distance to the slice {0}^{ss} x disk
    double leaf = 0.0;       // leaf value at the witness
};

// Any valid ss-disk crossing the domain meets the slice transversally; the
// slice is filled by unstable leaves, so the hit point lies on one.
ProductWitness verify_product_superposition(const ProductBlenderSpec& spec, const SsDisk& disk);

// --- Tangency witnesses ------------------------------------------------------

struct ClosedCurve {
    std::function<Eigen::Vector2d(double)> point;     // 2pi-periodic
    std::function<Eigen::Vector2d(double)> derivative;  // optional; FD otherwise
};

struct Foliation {
    std::function<double(const Eigen::Vector2d&)> value;
    std::function<Eigen::Vector2d(const Eigen::Vector2d&)> gradient;  // optional; FD otherwise
};

Foliation horizontal_foliation();  // (y, z) -> z

// All parameters t in [0, 2pi) with d/dt (foliation o curve) = 0, refined by
// bisection to 1e-10. At least two exist for closed curves. Errors:
// DegenerateFoliation when the gradient vanishes on the curve.
std::vector<double> tangency_witness(const ClosedCurve& curve, const Foliation& foliation);

}  // namespace blenderlab::blender

#include "blenderlab/blender.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace blenderlab::blender {

namespace {

double opnorm(const MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::JacobiSVD<MatrixXd>(M).singularValues().maxCoeff();
}

double min_singular(const MatrixXd& M) {
    if (M.size() == 0) return std::numeric_limits<double>::infinity();
    return Eigen::JacobiSVD<MatrixXd>(M).singularValues().minCoeff();
}

struct Interval {
    double lo, hi;
};

// Minimal overlap depth of a chain of intervals covering [lo, hi]; chains
// are chosen to maximize the bottleneck overlap. Negative result = largest
// uncovered gap.
double interval_cover_margin(double lo, double hi, std::vector<Interval> iv) {
    if (iv.empty()) return -(hi - lo);
    std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });

    // Union gaps first.
    double reach = lo;
    double worst_gap = 0.0;
    for (const auto& I : iv) {
        if (I.lo > reach) worst_gap = std::max(worst_gap, I.lo - reach);
        reach = std::max(reach, I.hi);
        if (reach >= hi) break;
    }
    if (reach < hi) worst_gap = std::max(worst_gap, hi - reach);
    if (worst_gap > 0.0) return -worst_gap;

    const int n = static_cast<int>(iv.size());
    auto feasible = [&](double m) {
        // Chain with every junction overlap >= m, from an interval covering
        // lo to one covering hi.
        std::vector<char> active(static_cast<size_t>(n), 0);
        std::vector<double> best(static_cast<size_t>(n), -1.0);
        // Breadth-first over intervals ordered by lo.
        std::vector<int> stack;
        for (int i = 0; i < n; ++i)
            if (iv[static_cast<size_t>(i)].lo <= lo) {
                active[static_cast<size_t>(i)] = 1;
                stack.push_back(i);
            }
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            if (iv[static_cast<size_t>(i)].hi >= hi) return true;
            for (int j = 0; j < n; ++j) {
                if (active[static_cast<size_t>(j)]) continue;
                double overlap = iv[static_cast<size_t>(i)].hi - iv[static_cast<size_t>(j)].lo;
                if (overlap >= m && iv[static_cast<size_t>(j)].hi > iv[static_cast<size_t>(i)].hi) {
                    active[static_cast<size_t>(j)] = 1;
                    stack.push_back(j);
                }
            }
        }
        return false;
    };

    // Candidate bottleneck values: all pairwise overlaps plus the trivial cap.
    std::vector<double> cand;
    cand.push_back(hi - lo);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) {
                double ov = iv[static_cast<size_t>(i)].hi - iv[static_cast<size_t>(j)].lo;
                if (ov > 0.0) cand.push_back(ov);
            }
    std::sort(cand.begin(), cand.end());
    double best = 0.0;
    for (auto it = cand.rbegin(); it != cand.rend(); ++it)
        if (feasible(*it)) {
            best = *it;
            break;
        }
    return best;
}

}  // namespace

MatrixXd Branch::full_linear(int d_ss, int d_cs, int d_uu) const {
    int d = d_ss + d_cs + d_uu;
    MatrixXd L = MatrixXd::Zero(d, d);
    if (d_ss) L.block(0, 0, d_ss, d_ss) = ss;
    if (d_cs) L.block(d_ss, d_ss, d_cs, d_cs) = central;
    if (d_uu) L.block(d_ss + d_cs, d_ss + d_cs, d_uu, d_uu) = uu;
    return L;
}

Box BlenderSpec::central_box() const {
    return Box(domain.lo.segment(d_ss, d_cs), domain.hi.segment(d_ss, d_cs));
}

std::pair<MatrixXd, VectorXd> BlenderSpec::central_map(int i) const {
    const Branch& b = branches[static_cast<size_t>(i)];
    return {b.central, b.offset.segment(d_ss, d_cs)};
}

VectorXd BlenderSpec::distinctive_saddle() const {
    const Branch& b = branches[static_cast<size_t>(distinctive_branch)];
    MatrixXd L = b.full_linear(d_ss, d_cs, d_uu);
    return (MatrixXd::Identity(dim(), dim()) - L).lu().solve(b.offset);
}

void BlenderSpec::validate() const {
    if (d_ss < 1 || d_cs < 1 || d_uu < 1)
        throw Error("BadSpec", "blender requires d_ss, d_cs, d_uu >= 1");
    if (domain.dim() != dim()) throw Error("BadSpec", "reference box dimension mismatch");
    if (branches.empty()) throw Error("BadSpec", "at least one branch required");
    if (distinctive_branch < 0 || distinctive_branch >= static_cast<int>(branches.size()))
        throw Error("BadSpec", "distinctive branch index out of range");

    for (size_t i = 0; i < branches.size(); ++i) {
        const Branch& b = branches[i];
        if (b.ss.rows() != d_ss || b.central.rows() != d_cs || b.uu.rows() != d_uu ||
            b.offset.size() != dim() || b.domain.dim() != dim())
            throw Error("BadSpec", "branch " + std::to_string(i) + " has wrong block sizes");
        if (opnorm(b.ss) >= 1.0)
            throw Error("BadSpec", "branch " + std::to_string(i) + " does not contract ss");
        if (opnorm(b.central) >= 1.0)
            throw Error("BadSpec", "branch " + std::to_string(i) + " does not contract the central block");
        if (min_singular(b.uu) <= 1.0)
            throw Error("BadSpec", "branch " + std::to_string(i) + " does not expand uu");
        Box clipped;
        if (!Box::intersect(b.domain, domain, &clipped))
            throw Error("BadSpec", "branch domain outside the reference box");
    }
    // Disjoint interiors.
    for (size_t i = 0; i < branches.size(); ++i)
        for (size_t j = i + 1; j < branches.size(); ++j) {
            Box inter;
            if (Box::intersect(branches[i].domain, branches[j].domain, &inter)) {
                if ((inter.widths().array() > 1e-12).all())
                    throw Error("BadSpec", "branch domains overlap");
            }
        }
    VectorXd q = distinctive_saddle();
    const Box& dom = branches[static_cast<size_t>(distinctive_branch)].domain;
    if (!dom.contains(q, -1e-12))
        throw Error("BadSpec", "distinctive saddle is not interior to its branch domain");
}

SsDisk vertical_disk(const BlenderSpec& spec, const VectorXd& c, const VectorXd& u0) {
    if (c.size() != spec.d_cs || u0.size() != spec.d_uu)
        throw Error("BadSpec", "vertical disk coordinate sizes mismatch");
    Box U = spec.domain;
    int d_ss = spec.d_ss, d_cs = spec.d_cs, d_uu = spec.d_uu;
    SsDisk disk;
    disk.d_ss = d_ss;
    disk.tangent_bound = 1e-9;
    disk.chart = [U, c, u0, d_ss, d_cs, d_uu](const VectorXd& s) {
        VectorXd p(d_ss + d_cs + d_uu);
        for (int i = 0; i < d_ss; ++i) p[i] = U.lo[i] + s[i] * (U.hi[i] - U.lo[i]);
        p.segment(d_ss, d_cs) = c;
        p.segment(d_ss + d_cs, d_uu) = u0;
        return p;
    };
    return disk;
}

void validate_disk(const BlenderSpec& spec, const SsDisk& disk) {
    if (disk.d_ss != spec.d_ss) throw Error("DiskInvalid", "disk dimension mismatch");
    if (!(disk.tangent_bound < spec.ss_cone_half_angle))
        throw Error("DiskInvalid", "tangent bound must stay below the cone half-angle");

    std::vector<int> ss_axes;
    for (int i = 0; i < spec.d_ss; ++i) ss_axes.push_back(i);

    const int g = 9;
    std::vector<double> lo_seen(static_cast<size_t>(spec.d_ss), 1e300);
    std::vector<double> hi_seen(static_cast<size_t>(spec.d_ss), -1e300);
    long cells = 1;
    for (int i = 0; i < disk.d_ss; ++i) cells *= g;
    const double h = 1e-5;
    for (long cell = 0; cell < cells; ++cell) {
        long rem = cell;
        VectorXd s(disk.d_ss);
        for (int i = 0; i < disk.d_ss; ++i) {
            s[i] = static_cast<double>(rem % g) / (g - 1);
            rem /= g;
        }
        VectorXd p = disk.chart(s);
        for (int i = 0; i < spec.d_ss; ++i) {
            lo_seen[static_cast<size_t>(i)] = std::min(lo_seen[static_cast<size_t>(i)], p[i]);
            hi_seen[static_cast<size_t>(i)] = std::max(hi_seen[static_cast<size_t>(i)], p[i]);
        }
        for (int j = 0; j < disk.d_ss; ++j) {
            VectorXd a = s, b = s;
            a[j] = std::min(1.0, a[j] + h);
            b[j] = std::max(0.0, b[j] - h);
            VectorXd t = disk.chart(a) - disk.chart(b);
            double ang = angle_to_plane(t, ss_axes);
            if (ang > disk.tangent_bound + 1e-9)
                throw Error("DiskInvalid", "tangent frame exceeds the declared bound");
        }
    }
    for (int i = 0; i < spec.d_ss; ++i) {
        double w = spec.domain.hi[i] - spec.domain.lo[i];
        if (lo_seen[static_cast<size_t>(i)] > spec.domain.lo[i] + 1e-9 * w ||
            hi_seen[static_cast<size_t>(i)] < spec.domain.hi[i] - 1e-9 * w)
            throw Error("DiskInvalid", "disk does not cross the ss-extent of the reference box");
    }
}

namespace {

bool central_blocks_diagonal(const BlenderSpec& spec) {
    for (const auto& b : spec.branches)
        if (!is_diagonal(b.central)) return false;
    return true;
}

}  // namespace

CoveringReport covering_criterion(const BlenderSpec& spec) {
    spec.validate();
    Box cbox = spec.central_box();
    if (spec.d_cs > 1 && !central_blocks_diagonal(spec))
        throw Error("NonDiagonalCentral",
                    "covering in central dimension > 1 requires diagonal central blocks");

    CoveringReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.d_cs; ++j) {
        std::vector<Interval> iv;
        for (size_t i = 0; i < spec.branches.size(); ++i) {
            auto [A, b] = spec.central_map(static_cast<int>(i));
            double a = A(j, j);
            double off = b[j];
            double x0 = a * cbox.lo[j] + off;
            double x1 = a * cbox.hi[j] + off;
            iv.push_back({std::min(x0, x1), std::max(x0, x1)});
        }
        rep.margin = std::min(rep.margin, interval_cover_margin(cbox.lo[j], cbox.hi[j], iv));
    }
    rep.ok = rep.margin > 0.0;
    return rep;
}

Witness verify_superposition(const BlenderSpec& spec, const SsDisk& disk, int depth) {
    spec.validate();
    validate_disk(spec, disk);
    if (depth < 1) throw Error("BadSpec", "depth must be positive");
    Box cbox = spec.central_box();
    if (spec.d_cs > 1 && !central_blocks_diagonal(spec))
        throw Error("NonDiagonalCentral", "itinerary search needs diagonal central blocks");

    const int d = spec.dim();
    VectorXd s_center = VectorXd::Constant(disk.d_ss, 0.5);
    VectorXd q = disk.chart(s_center);

    // Composed forward map F = f_{i1} o ... o f_{id}.
    MatrixXd MF = MatrixXd::Identity(d, d);
    VectorXd cF = VectorXd::Zero(d);

    Witness w;
    double rate = 0.0;
    for (const auto& b : spec.branches) rate = std::max(rate, std::max(opnorm(b.ss), opnorm(b.central)));

    for (int step = 0; step < depth; ++step) {
        VectorXd c = q.segment(spec.d_ss, spec.d_cs);
        int chosen = -1;
        for (size_t i = 0; i < spec.branches.size() && chosen < 0; ++i) {
            bool inside = true;
            auto [A, boff] = spec.central_map(static_cast<int>(i));
            for (int j = 0; j < spec.d_cs && inside; ++j) {
                double a = A(j, j);
                double x0 = a * cbox.lo[j] + boff[j];
                double x1 = a * cbox.hi[j] + boff[j];
                if (c[j] < std::min(x0, x1) - 1e-12 || c[j] > std::max(x0, x1) + 1e-12) inside = false;
            }
            if (inside) chosen = static_cast<int>(i);
        }
        if (chosen < 0)
            throw Error("CoverageGap", "no branch image contains central coordinate at step " +
                                           std::to_string(step));
        w.itinerary.push_back(chosen);
        const Branch& br = spec.branches[static_cast<size_t>(chosen)];
        MatrixXd L = br.full_linear(spec.d_ss, spec.d_cs, spec.d_uu);
        q = L.lu().solve(q - br.offset);  // pull the tracked point back
        cF = MF * br.offset + cF;
        MF = MF * L;
    }

    // Cylinder of the chosen itinerary and its midpoint fiber.
    VectorXd x_mid = MF * spec.domain.center() + cF;
    VectorXd cyl_half = MF.cwiseAbs() * spec.domain.halfwidth();

    // Witness on the disk: match the ss-coordinates of the fiber.
    VectorXd target = x_mid.head(spec.d_ss);
    VectorXd s = s_center;
    for (int it = 0; it < 60; ++it) {
        VectorXd p = disk.chart(s);
        VectorXd r = p.head(spec.d_ss) - target;
        if (r.lpNorm<Eigen::Infinity>() < 1e-13) break;
        MatrixXd J(spec.d_ss, disk.d_ss);
        const double h = 1e-6;
        for (int j = 0; j < disk.d_ss; ++j) {
            VectorXd a = s, b2 = s;
            a[j] += h;
            b2[j] -= h;
            J.col(j) = (disk.chart(a).head(spec.d_ss) - disk.chart(b2).head(spec.d_ss)) / (2.0 * h);
        }
        VectorXd ds = J.fullPivLu().solve(r);
        s -= ds;
        for (int j = 0; j < disk.d_ss; ++j) s[j] = std::clamp(s[j], 0.0, 1.0);
    }
    w.point = disk.chart(s);

    // Distance to the cylinder in the contracted (ss + central) coordinates.
    double res2 = 0.0;
    for (int i = 0; i < spec.d_ss + spec.d_cs; ++i) {
        double lo = x_mid[i] - cyl_half[i], hi = x_mid[i] + cyl_half[i];
        double dgap = std::max({0.0, lo - w.point[i], w.point[i] - hi});
        res2 += dgap * dgap;
    }
    w.residual = std::sqrt(res2) + cyl_half.head(spec.d_ss + spec.d_cs).norm();
    w.residual_bound = std::pow(rate, depth) * spec.domain.widths().head(spec.d_ss + spec.d_cs).norm();
    return w;
}

RobustnessReport robustness_margin(const BlenderSpec& spec) {
    CoveringReport cov = covering_criterion(spec);
    RobustnessReport rep;
    rep.covering_ok = cov.ok;
    if (!cov.ok || cov.margin <= 0.0) {
        rep.epsilon0 = 0.0;
        return rep;
    }
    Box cbox = spec.central_box();
    double R = std::max(cbox.lo.cwiseAbs().maxCoeff(), cbox.hi.cwiseAbs().maxCoeff());
    // A perturbation of size eps moves every central image endpoint by at
    // most eps*(R+1); a junction overlap shrinks by twice that.
    rep.epsilon0 = cov.margin / (2.0 * (R + 1.0));
    return rep;
}

BlenderSpec reduce_central_dimension(const BlenderSpec& spec, int keep) {
    spec.validate();
    if (keep < 1 || keep >= spec.d_cs)
        throw Error("BadReduction", "keep must satisfy 1 <= keep < d_cs");
    if (!central_blocks_diagonal(spec))
        throw Error("NotDominated", "central reduction needs diagonal central blocks");

    // Dominated ordering: coordinate j uniformly more contracted than j+1.
    for (int j = 0; j + 1 < spec.d_cs; ++j) {
        double max_j = 0.0, min_next = std::numeric_limits<double>::infinity();
        for (const auto& b : spec.branches) {
            max_j = std::max(max_j, std::abs(b.central(j, j)));
            min_next = std::min(min_next, std::abs(b.central(j + 1, j + 1)));
        }
        if (!(max_j < min_next))
            throw Error("NotDominated", "central rates are not strictly ordered at coordinate " +
                                            std::to_string(j));
    }

    int moved = spec.d_cs - keep;
    BlenderSpec out = spec;
    out.d_ss = spec.d_ss + moved;
    out.d_cs = keep;
    for (size_t i = 0; i < out.branches.size(); ++i) {
        const Branch& b = spec.branches[i];
        Branch nb = b;
        nb.ss = MatrixXd::Zero(out.d_ss, out.d_ss);
        nb.ss.topLeftCorner(spec.d_ss, spec.d_ss) = b.ss;
        nb.ss.bottomRightCorner(moved, moved) = b.central.topLeftCorner(moved, moved);
        nb.central = b.central.bottomRightCorner(keep, keep);
        out.branches[i] = nb;
    }
    return out;
}

PlanarRepeller affine_surrogate_repeller() {
    PlanarRepeller r;
    r.name = "affine_surrogate";
    r.min_expansion = 1.5;
    r.leaf_value = [](const Eigen::Vector2d& p) { return p[1]; };  // horizontal leaves
    r.lamination_covers = [](double) { return true; };             // leaves fill exactly
    return r;
}

PlanarRepeller gappy_surrogate_repeller() {
    PlanarRepeller r;
    r.name = "gappy_surrogate";
    r.min_expansion = 1.5;
    r.leaf_value = [](const Eigen::Vector2d& p) { return p[1]; };
    // Leaves only through z in [0, 0.4] u [0.6, 1]: fails once the requested
    // resolution is finer than the missing band.
    r.lamination_covers = [](double resolution) { return resolution >= 0.2; };
    return r;
}

ProductBlenderSpec product_blender(const PlanarRepeller& repeller, double gamma, int ss_dim,
                                   double resolution) {
    if (ss_dim < 1) throw Error("BadSpec", "ss_dim must be >= 1");
    if (!(gamma > 0.0) || gamma >= repeller.min_expansion)
        throw Error("RateViolation", "need 0 < gamma < minimal expansion rate " +
                                         std::to_string(repeller.min_expansion));
    if (!repeller.lamination_covers(resolution))
        throw Error("LaminationGap",
                    "repeller lamination does not cover at resolution " + std::to_string(resolution));

    ProductBlenderSpec spec;
    spec.ss_dim = ss_dim;
    spec.gamma = gamma;
    spec.repeller = repeller;
    VectorXd lo(ss_dim + 2), hi(ss_dim + 2);
    for (int i = 0; i < ss_dim; ++i) {
        lo[i] = -1.0;
        hi[i] = 1.0;
    }
    lo[ss_dim] = 0.0;
    hi[ss_dim] = 1.0;
    lo[ss_dim + 1] = 0.0;
    hi[ss_dim + 1] = 1.0;
    spec.domain = Box(lo, hi);
    return spec;
}

ProductWitness verify_product_superposition(const ProductBlenderSpec& spec, const SsDisk& disk) {
    if (disk.d_ss != spec.ss_dim) throw Error("DiskInvalid", "disk dimension mismatch");

    // Solve ss(chart(s)) = 0; full crossing puts the root inside the cube.
    VectorXd s = VectorXd::Constant(disk.d_ss, 0.5);
    for (int it = 0; it < 80; ++it) {
        VectorXd p = disk.chart(s);
        VectorXd r = p.head(spec.ss_dim);
        if (r.lpNorm<Eigen::Infinity>() < 1e-13) break;
        MatrixXd J(spec.ss_dim, disk.d_ss);
        const double h = 1e-6;
        for (int j = 0; j < disk.d_ss; ++j) {
            VectorXd a = s, b = s;
            a[j] += h;
            b[j] -= h;
            J.col(j) = (disk.chart(a).head(spec.ss_dim) - disk.chart(b).head(spec.ss_dim)) / (2.0 * h);
        }
        s -= J.fullPivLu().solve(r).eval();
        for (int j = 0; j < disk.d_ss; ++j) s[j] = std::clamp(s[j], 0.0, 1.0);
    }

    ProductWitness w;
    w.point = disk.chart(s);
    w.residual = w.point.head(spec.ss_dim).norm();
    Eigen::Vector2d yz(w.point[spec.ss_dim], w.point[spec.ss_dim + 1]);
    if (yz[0] < spec.domain.lo[spec.ss_dim] - 1e-9 || yz[0] > spec.domain.hi[spec.ss_dim] + 1e-9 ||
        yz[1] < spec.domain.lo[spec.ss_dim + 1] - 1e-9 || yz[1] > spec.domain.hi[spec.ss_dim + 1] + 1e-9)
        throw Error("DiskInvalid", "disk leaves the planar factor of the domain");
    w.leaf = spec.repeller.leaf_value(yz);
    return w;
}

Foliation horizontal_foliation() {
    Foliation f;
    f.value = [](const Eigen::Vector2d& p) { return p[1]; };
    f.gradient = [](const Eigen::Vector2d&) { return Eigen::Vector2d(0.0, 1.0); };
    return f;
}

std::vector<double> tangency_witness(const ClosedCurve& curve, const Foliation& foliation) {
    const double two_pi = 2.0 * std::numbers::pi;
    const int N = 8192;

    auto grad = foliation.gradient;
    if (!grad) {
        auto val = foliation.value;
        grad = [val](const Eigen::Vector2d& p) {
            const double h = 1e-6;
            return Eigen::Vector2d(
                (val({p[0] + h, p[1]}) - val({p[0] - h, p[1]})) / (2.0 * h),
                (val({p[0], p[1] + h}) - val({p[0], p[1] - h})) / (2.0 * h));
        };
    }
    auto deriv = curve.derivative;
    if (!deriv) {
        auto pt = curve.point;
        deriv = [pt](double t) {
            const double h = 1e-6;
            return Eigen::Vector2d((pt(t + h) - pt(t - h)) / (2.0 * h));
        };
    }

    auto d = [&](double t) {
        Eigen::Vector2d p = curve.point(t);
        Eigen::Vector2d g = grad(p);
        if (g.norm() < 1e-12)
            throw Error("DegenerateFoliation", "foliation gradient vanishes on the curve");
        return g.dot(deriv(t));
    };

    std::vector<double> roots;
    double prev_t = 0.0;
    double prev_d = d(0.0);
    for (int i = 1; i <= N; ++i) {
        double t = two_pi * static_cast<double>(i) / N;
        double cur = d(t);
        if (prev_d == 0.0) {
            roots.push_back(prev_t);
        } else if (prev_d * cur < 0.0) {
            double a = prev_t, b = t;
            double da = prev_d;
            while (b - a > 1e-10) {
                double mid = 0.5 * (a + b);
                double dm = d(mid);
                if (dm == 0.0) {
                    a = b = mid;
                    break;
                }
                if (da * dm < 0.0)
                    b = mid;
                else {
                    a = mid;
                    da = dm;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_t = t;
        prev_d = cur;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace blenderlab::blender

#include "blenderlab/unfolding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blenderlab/parallel.hpp"

namespace blenderlab::unfolding {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd rotation2(double a) {
    MatrixXd R(2, 2);
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return R;
}

MatrixXd power(const MatrixXd& M, int k) {
    if (M.size() == 0) return M;
    if (is_diagonal(M)) {
        MatrixXd P = MatrixXd::Zero(M.rows(), M.cols());
        for (Eigen::Index i = 0; i < M.rows(); ++i) P(i, i) = std::pow(M(i, i), k);
        return P;
    }
    MatrixXd P = MatrixXd::Identity(M.rows(), M.cols());
    MatrixXd base = k >= 0 ? M : MatrixXd(M.inverse());
    for (int i = 0; i < std::abs(k); ++i) P = base * P;
    return P;
}

Box blockwise_box(const std::vector<std::pair<MatrixXd, int>>& blocks, const Box& src, int k) {
    VectorXd lo(src.dim()), hi(src.dim());
    int off = 0;
    for (const auto& [M, len] : blocks) {
        if (len) {
            Box sub(src.lo.segment(off, len), src.hi.segment(off, len));
            Box img;
            if (is_diagonal(M)) {
                VectorXd rates(len);
                for (int i = 0; i < len; ++i) rates[i] = std::pow(M(i, i), k);
                img = diagonal_image(rates, sub);
            } else {
                img = bounding_image(power(M, k), sub);
            }
            lo.segment(off, len) = img.lo;
            hi.segment(off, len) = img.hi;
        }
        off += len;
    }
    return Box(lo, hi);
}

}  // namespace

UnfoldedModel::UnfoldedModel(const LocalTangencyModel& base, UnfoldingParams params)
    : base_(&base), params_(params) {
    const int m_s = base.dx(), n_u = base.dy();
    double lam = base.lambda(), gam = base.gamma();
    double J = base.leading_jacobian();
    if (J <= 1.0)
        throw Error("JacobianNotExpanding", "unfolding families assume an expanding leading Jacobian");

    if (m_s == 1 && n_u == 1)
        d_e_ = 1;
    else if (m_s == 1 && n_u == 2)
        d_e_ = lam * gam > 1.0 ? 1 : 2;
    else if (m_s == 2 && n_u == 1)
        d_e_ = 2;
    else if (m_s == 2 && n_u == 2)
        d_e_ = lam * lam * gam > 1.0 ? 2 : 3;
    else
        throw Error("NotSimple", "unfolding supports leading blocks of size one or two");

    // Active components in order (t, alpha-if-stable-pair, beta-if-unstable-pair),
    // truncated to the effective dimension; everything else must be exactly 0.
    std::vector<std::pair<const char*, double>> candidates;
    candidates.emplace_back("t", params_.t);
    if (m_s == 2) candidates.emplace_back("alpha", params_.alpha);
    if (n_u == 2) candidates.emplace_back("beta", params_.beta);
    for (size_t i = static_cast<size_t>(d_e_); i < candidates.size(); ++i)
        if (candidates[i].second != 0.0)
            throw Error("InactiveParameter", std::string(candidates[i].first) +
                                                 " exceeds the effective dimension and must be 0");
    if (m_s != 2 && params_.alpha != 0.0)
        throw Error("InactiveParameter", "alpha requires a two-dimensional stable leading plane");
    if (n_u != 2 && params_.beta != 0.0)
        throw Error("InactiveParameter", "beta requires a two-dimensional unstable leading plane");

    B_t_ = m_s == 2 ? MatrixXd(rotation2(params_.alpha) * base.cfg().B) : base.cfg().B;
    C_t_ = n_u == 2 ? MatrixXd(rotation2(params_.beta) * base.cfg().C) : base.cfg().C;
}

MatrixXd UnfoldedModel::t0k_matrix(int k) const {
    const auto& cfg = base_->cfg();
    const int DU = base_->du(), DX = base_->dx(), DY = base_->dy(), DV = base_->dv();
    MatrixXd M = MatrixXd::Zero(base_->dim(), base_->dim());
    if (DU) M.block(0, 0, DU, DU) = power(cfg.A, k);
    M.block(DU, DU, DX, DX) = power(B_t_, k);
    M.block(DU + DX, DU + DX, DY, DY) = power(C_t_, k);
    if (DV) M.block(DU + DX + DY, DU + DX + DY, DV, DV) = power(cfg.D, k);
    return M;
}

Strip UnfoldedModel::strip(int k) const {
    const auto& cfg = base_->cfg();
    std::vector<std::pair<MatrixXd, int>> blocks = {
        {cfg.A, base_->du()}, {B_t_, base_->dx()}, {C_t_, base_->dy()}, {cfg.D, base_->dv()}};
    Box pre = blockwise_box(blocks, cfg.pi_minus, -k);
    Strip s;
    s.k = k;
    if (!Box::intersect(pre, cfg.pi_plus, &s.box_plus))
        throw Error("EmptyStrip", "unfolded strip empty for k = " + std::to_string(k));
    s.box_minus = blockwise_box(blocks, s.box_plus, k);
    for (int i = 0; i < base_->dy(); ++i) s.u_diam_axes.push_back(base_->du() + base_->dx() + i);
    for (int i = 0; i < base_->dx(); ++i) s.c_diam_axes.push_back(base_->du() + i);
    return s;
}

Strip UnfoldedModel::resized_strip(int k) const {
    if (params_.alpha == 0.0 && params_.beta == 0.0) return base_->resized_strip(k);
    // Rotations keep the y block one-dimensional only in the codimension-one
    // family, where they are inactive anyway.
    throw Error("WrongCodimension", "resized strips are defined for the codimension-one family");
}

Point UnfoldedModel::apply_T1_t(const Point& p) const {
    Point q = base_->apply_T1_unchecked(p);
    q.y[0] += params_.t;  // fold offset from {y = 0}
    return q;
}

Point UnfoldedModel::return_map_unchecked(int k, const Point& p) const {
    Point q = Point::split(t0k_matrix(k) * p.flat(), base_->du(), base_->dx(), base_->dy(),
                           base_->dv());
    return apply_T1_t(q);
}

Point UnfoldedModel::return_map(int k, const Point& p) const {
    Strip s = strip(k);
    if (!s.box_plus.contains(p.flat(), 1e-9))
        throw Error("OutsideStrip", "return map input must lie in the unfolded strip");
    return return_map_unchecked(k, p);
}

MatrixXd UnfoldedModel::return_jacobian(int k, const Point& p) const {
    MatrixXd T0k = t0k_matrix(k);
    Point mid = Point::split(T0k * p.flat(), base_->du(), base_->dx(), base_->dy(), base_->dv());
    // The t-translation does not change the transition Jacobian.
    return base_->transition_jacobian(mid) * T0k;
}

Point UnfoldedModel::fold_seed(int k) const {
    Point p;
    p.u = VectorXd::Zero(base_->du());
    p.x = base_->cfg().x_plus;
    p.y = power(C_t_, -k) * base_->cfg().y_minus;
    p.v = VectorXd::Zero(base_->dv());
    return p;
}

SaddleSearchReport find_single_round_saddles(const LocalTangencyModel& model,
                                             const UnfoldingParams& params, int k,
                                             const std::vector<Point>& extra_seeds) {
    UnfoldedModel um(model, params);
    Strip s = um.strip(k);
    const int D = model.dim();
    const int DU = model.du();

    SaddleSearchReport rep;
    std::vector<VectorXd> seeds;
    {
        const int g = 5;
        int central = D - DU;
        long cells = 1;
        for (int i = 0; i < central; ++i) cells *= g;
        for (long cell = 0; cell < cells; ++cell) {
            long rem = cell;
            VectorXd p = s.box_plus.center();
            for (int i = 0; i < central; ++i) {
                double tfrac = (static_cast<double>(rem % g) + 0.5) / g;
                rem /= g;
                int axis = DU + i;
                p[axis] = s.box_plus.lo[axis] + tfrac * (s.box_plus.hi[axis] - s.box_plus.lo[axis]);
            }
            seeds.push_back(p);
        }
        seeds.push_back(um.fold_seed(k).flat());
        for (const auto& e : extra_seeds) seeds.push_back(e.flat());
    }
    rep.seeds = static_cast<int>(seeds.size());

    double box_scale = s.box_plus.widths().maxCoeff();
    for (const auto& seed : seeds) {
        VectorXd p = seed;
        bool converged = false;
        double res = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 200; ++it) {
            Point pt = Point::split(p, model.du(), model.dx(), model.dy(), model.dv());
            VectorXd F = um.return_map_unchecked(k, pt).flat() - p;
            res = F.norm();
            if (res < 1e-12) {
                converged = true;
                break;
            }
            MatrixXd J = um.return_jacobian(k, pt) - MatrixXd::Identity(D, D);
            VectorXd step = J.fullPivLu().solve(F);
            double damp = 1.0;
            VectorXd next = p - step;
            for (int half = 0; half < 30; ++half) {
                Point nt = Point::split(next, model.du(), model.dx(), model.dy(), model.dv());
                double nres = (um.return_map_unchecked(k, nt).flat() - next).norm();
                if (nres < res) break;
                damp *= 0.5;
                next = p - damp * step;
            }
            p = next;
            if ((p - s.box_plus.center()).lpNorm<Eigen::Infinity>() > 10.0 * box_scale) break;
        }
        if (!converged || !s.box_plus.contains(p, 1e-9)) {
            ++rep.dropped;
            continue;
        }
        bool dup = false;
        for (const auto& acc : rep.saddles)
            if ((acc.location.flat() - p).norm() < 1e-8) {
                dup = true;
                break;
            }
        if (dup) continue;

        SingleRoundSaddle sd;
        sd.location = Point::split(p, model.du(), model.dx(), model.dy(), model.dv());
        sd.k = k;
        sd.params = params;
        sd.residual = (um.return_map_unchecked(k, sd.location).flat() - p).norm();
        MatrixXd DR = um.return_jacobian(k, sd.location);
        for (const auto& ev : Eigen::EigenSolver<MatrixXd>(DR).eigenvalues()) {
            sd.eigenvalues.push_back(ev);
            if (std::abs(ev) > 1.0) ++sd.u_index;
        }
        if (sd.u_index > model.dx() + model.cfg().n)
            throw Error("IndexOverflow",
                        "u-index exceeds the center-unstable reduction; strong-stable "
                        "directions failed to contract");
        rep.saddles.push_back(std::move(sd));
    }
    std::sort(rep.saddles.begin(), rep.saddles.end(),
              [](const SingleRoundSaddle& a, const SingleRoundSaddle& b) {
                  return a.location.flat()[0] < b.location.flat()[0];
              });
    return rep;
}

SweepResult index_variation_sweep(const LocalTangencyModel& model, const SweepConfig& config) {
    struct Cell {
        int k;
        int ia, ib, it;
    };
    std::vector<Cell> cells;
    for (int k = config.k_min; k <= config.k_max; ++k)
        for (int ia = 0; ia < config.alpha.steps; ++ia)
            for (int ib = 0; ib < config.beta.steps; ++ib)
                for (int it = 0; it < config.t.steps; ++it) cells.push_back({k, ia, ib, it});

    std::vector<std::vector<SweepCell>> partial(cells.size());
    parallel_for_index(static_cast<long>(cells.size()), config.threads, [&](long idx) {
        const Cell& c = cells[static_cast<size_t>(idx)];
        UnfoldingParams p;
        p.t = config.t.at(c.it);
        p.alpha = config.alpha.at(c.ia);
        p.beta = config.beta.at(c.ib);
        try {
            SaddleSearchReport rep = find_single_round_saddles(model, p, c.k);
            for (const auto& sd : rep.saddles) {
                SweepCell row;
                row.k = c.k;
                row.t = p.t;
                row.alpha = p.alpha;
                row.beta = p.beta;
                row.u_index = sd.u_index;
                row.residual = sd.residual;
                row.location = sd.location.flat();
                partial[static_cast<size_t>(idx)].push_back(std::move(row));
            }
        } catch (const Error& e) {
            if (std::string(e.code()) != "EmptyStrip") throw;  // k below k0: empty rows
        }
    });

    SweepResult out;
    for (auto& rows : partial)
        for (auto& r : rows) out.rows.push_back(std::move(r));

    // Maximal consecutive t-runs per (k, alpha, beta, u_index).
    for (int k = config.k_min; k <= config.k_max; ++k)
        for (int ia = 0; ia < config.alpha.steps; ++ia)
            for (int ib = 0; ib < config.beta.steps; ++ib) {
                std::vector<int> indices_seen;
                for (const auto& r : out.rows)
                    if (r.k == k)
                        if (std::find(indices_seen.begin(), indices_seen.end(), r.u_index) ==
                            indices_seen.end())
                            indices_seen.push_back(r.u_index);
                std::sort(indices_seen.begin(), indices_seen.end());
                for (int u : indices_seen) {
                    std::vector<char> hit(static_cast<size_t>(config.t.steps), 0);
                    for (const auto& r : out.rows)
                        if (r.k == k && r.u_index == u && r.alpha == config.alpha.at(ia) &&
                            r.beta == config.beta.at(ib)) {
                            for (int it = 0; it < config.t.steps; ++it)
                                if (r.t == config.t.at(it)) hit[static_cast<size_t>(it)] = 1;
                        }
                    int start = -1;
                    for (int it = 0; it <= config.t.steps; ++it) {
                        bool on = it < config.t.steps && hit[static_cast<size_t>(it)];
                        if (on && start < 0) start = it;
                        if (!on && start >= 0) {
                            Window w;
                            w.k = k;
                            w.u_index = u;
                            w.t_lo = config.t.at(start);
                            w.t_hi = config.t.at(it - 1);
                            w.alpha = config.alpha.at(ia);
                            w.beta = config.beta.at(ib);
                            out.windows.push_back(w);
                            start = -1;
                        }
                    }
                }
            }
    return out;
}

CycleWitness cycle_witness(const LocalTangencyModel& model, const UnfoldingParams& params, int k,
                           const SingleRoundSaddle& saddle, int max_rounds,
                           CycleWitnessDiagnostics* diag) {
    if (model.cfg().n != 1 || model.cfg().n_u != 1)
        throw Error("WrongCodimension", "cycle witness requires u-index one");
    UnfoldedModel um(model, params);
    Strip st = um.resized_strip(k);  // quantifier gate lives here
    if (saddle.u_index < 2)
        throw Error("BadSaddle", "cycle witness needs a saddle of u-index >= 2");
    if (!st.box_plus.contains(saddle.location.flat(), 1e-9))
        throw Error("BadSaddle", "saddle lies outside the resized strip");

    const int D = model.dim();
    const int y_axis = model.du() + model.dx();
    const double c_lo = st.box_plus.lo[y_axis];
    const double c_hi = st.box_plus.hi[y_axis];

    // Real basis of the unstable subspace of the return derivative.
    MatrixXd DR = um.return_jacobian(k, saddle.location);
    Eigen::EigenSolver<MatrixXd> es(DR);
    std::vector<VectorXd> dirs;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (std::abs(es.eigenvalues()[i]) <= 1.0) continue;
        VectorXd re = es.eigenvectors().col(i).real();
        VectorXd im = es.eigenvectors().col(i).imag();
        if (re.norm() > 1e-12) dirs.push_back(re.normalized());
        if (im.norm() > 1e-9) dirs.push_back(im.normalized());
    }
    // Orthonormalize and keep an independent pair.
    std::vector<VectorXd> basis;
    for (auto& d : dirs) {
        VectorXd w = d;
        for (const auto& b : basis) w -= b.dot(w) * b;
        if (w.norm() > 1e-9) basis.push_back(w.normalized());
        if (basis.size() == 2) break;
    }
    if (basis.size() < 2)
        throw Error("BadSaddle", "could not span a two-dimensional unstable disk");

    auto allowed_travel = [&](const VectorXd& dir) {
        double t = std::numeric_limits<double>::infinity();
        for (int a = 0; a < D; ++a) {
            double h = 0.5 * (st.box_plus.hi[a] - st.box_plus.lo[a]);
            if (std::abs(dir[a]) > 1e-300) t = std::min(t, h / std::abs(dir[a]));
        }
        return t;
    };
    double r0 = 0.05 * allowed_travel(basis[0]);
    double r1 = 0.05 * allowed_travel(basis[1]);

    const int N = 512;
    std::vector<VectorXd> pts;
    pts.reserve(N);
    for (int i = 0; i < N; ++i) {
        double a = 2.0 * 3.14159265358979323846 * i / N;
        pts.push_back(saddle.location.flat() + r0 * std::cos(a) * basis[0] +
                      r1 * std::sin(a) * basis[1]);
    }

    CycleWitnessDiagnostics local_diag;
    auto fill_diag = [&](const std::vector<VectorXd>& set) {
        double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
        for (const auto& p : set) {
            xlo = std::min(xlo, p[model.du()]);
            xhi = std::max(xhi, p[model.du()]);
            ylo = std::min(ylo, p[y_axis]);
            yhi = std::max(yhi, p[y_axis]);
        }
        local_diag.final_diam_c = set.empty() ? 0.0 : xhi - xlo;
        local_diag.final_diam_u = set.empty() ? 0.0 : yhi - ylo;
    };

    auto split_pt = [&](const VectorXd& p) {
        return Point::split(p, model.du(), model.dx(), model.dy(), model.dv());
    };

    for (int round = 1; round <= max_rounds; ++round) {
        local_diag.rounds_run = round;
        std::vector<VectorXd> images(pts.size());
        for (size_t i = 0; i < pts.size(); ++i)
            images[i] = um.return_map_unchecked(k, split_pt(pts[i])).flat();

        // Transversal crossings of the stable boundary sheets.
        for (int face = 0; face < 2; ++face) {
            double c = face == 0 ? c_lo : c_hi;
            for (size_t i = 0; i < pts.size(); ++i) {
                size_t j = (i + 1) % pts.size();
                double ga = images[i][y_axis] - c;
                double gb = images[j][y_axis] - c;
                if (!(ga * gb < 0.0)) continue;
                VectorXd a = pts[i], b = pts[j];
                double ha = ga;
                for (int it = 0; it < 200; ++it) {
                    VectorXd mid = 0.5 * (a + b);
                    double hm = um.return_map_unchecked(k, split_pt(mid)).flat()[y_axis] - c;
                    if (std::abs(hm) < 1e-10) {
                        a = b = mid;
                        break;
                    }
                    if (ha * hm < 0.0)
                        b = mid;
                    else {
                        a = mid;
                        ha = hm;
                    }
                }
                VectorXd mid = 0.5 * (a + b);
                Point img = um.return_map_unchecked(k, split_pt(mid));
                CycleWitness w;
                w.m0 = round;
                w.crossing = img;
                w.y_signed = img.flat()[y_axis] - c;
                w.face = face;
                if (diag) {
                    fill_diag(images);
                    *diag = local_diag;
                }
                return w;
            }
        }

        // No crossing this round: keep the part inside the resized strip.
        std::vector<VectorXd> kept;
        bool u_escape = false;
        for (auto& im : images) {
            bool y_in = im[y_axis] >= c_lo - 1e-12 && im[y_axis] <= c_hi + 1e-12;
            if (y_in && !st.box_plus.contains(im, 1e-12)) u_escape = true;
            if (st.box_plus.contains(im, 1e-12)) kept.push_back(std::move(im));
        }
        local_diag.u_boundary_escape = local_diag.u_boundary_escape || u_escape;
        fill_diag(kept);
        if (kept.empty()) {
            if (diag) *diag = local_diag;
            throw Error("NotFound", "unstable disk left the strip without a stable-boundary "
                                    "crossing after " +
                                        std::to_string(round) + " rounds");
        }
        pts = std::move(kept);
    }
    if (diag) *diag = local_diag;
    throw Error("NotFound", "no stable-boundary crossing within " + std::to_string(max_rounds) +
                                " rounds (final c-diameter " +
                                std::to_string(local_diag.final_diam_c) + ")");
}

}  // namespace blenderlab::unfolding

#include "blenderlab/local_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace blenderlab::local_model {

namespace {

double opnorm(const MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::JacobiSVD<MatrixXd>(M).singularValues().maxCoeff();
}

std::vector<double> eig_moduli(const MatrixXd& M) {
    std::vector<double> out;
    if (M.size() == 0) return out;
    for (const auto& ev : Eigen::EigenSolver<MatrixXd>(M).eigenvalues()) out.push_back(std::abs(ev));
    std::sort(out.begin(), out.end());
    return out;
}

constexpr double kTie = 1e-9;

}  // namespace

VectorXd Point::flat() const {
    VectorXd p(u.size() + x.size() + y.size() + v.size());
    Eigen::Index off = 0;
    p.segment(off, u.size()) = u;
    off += u.size();
    p.segment(off, x.size()) = x;
    off += x.size();
    p.segment(off, y.size()) = y;
    off += y.size();
    p.segment(off, v.size()) = v;
    return p;
}

Point Point::split(const VectorXd& p, int du, int dx, int dy, int dv) {
    Point q;
    q.u = p.segment(0, du);
    q.x = p.segment(du, dx);
    q.y = p.segment(du + dx, dy);
    q.v = p.segment(du + dx + dy, dv);
    return q;
}

double Strip::diam_u() const {
    double s = 0.0;
    for (const auto& f : u_diam_axes) s += sq(box_plus.hi[f] - box_plus.lo[f]);
    return std::sqrt(s);
}

double Strip::diam_c() const {
    double s = 0.0;
    for (const auto& f : c_diam_axes) s += sq(box_plus.hi[f] - box_plus.lo[f]);
    return std::sqrt(s);
}

LocalTangencyModel::LocalTangencyModel(Config cfg) : cfg_(std::move(cfg)) {
    const int du_ = cfg_.m - cfg_.m_s, dx_ = cfg_.m_s, dy_ = cfg_.n_u, dv_ = cfg_.n - cfg_.n_u;
    if (cfg_.m_s < 1 || cfg_.n_u < 1 || du_ < 0 || dv_ < 0)
        throw Error("BadModel", "dimension counts must satisfy 1 <= m_s <= m, 1 <= n_u <= n");
    auto expect = [](const MatrixXd& M, int d, const char* name) {
        if (M.rows() != d || M.cols() != d)
            throw Error("BadModel", std::string("block ") + name + " has wrong size");
    };
    expect(cfg_.A, du_, "A");
    expect(cfg_.B, dx_, "B");
    expect(cfg_.C, dy_, "C");
    expect(cfg_.D, dv_, "D");
    if (cfg_.W.dim() != dim()) throw Error("BadModel", "W dimension mismatch");
    if (cfg_.pi_plus.dim() != dim() || cfg_.pi_minus.dim() != dim())
        throw Error("BadModel", "reference box dimension mismatch");
    if (cfg_.y_minus.size() != dy_ || cfg_.v_minus.size() != dv_ || cfg_.u_plus.size() != du_ ||
        cfg_.x_plus.size() != dx_)
        throw Error("BadModel", "tangency point dimension mismatch");

    // Spectral ordering |eig A| < |eig B| = lambda < 1 < gamma = |eig C| < |eig D|.
    auto mb = eig_moduli(cfg_.B), mc = eig_moduli(cfg_.C);
    lambda_ = mb.back();
    gamma_ = mc.front();
    if (!(lambda_ < 1.0 && gamma_ > 1.0))
        throw Error("BadModel", "need |eig B| < 1 < |eig C|");
    if (mb.front() < lambda_ * (1.0 - kTie))
        throw Error("BadModel", "all B moduli must equal lambda");
    if (mc.back() > gamma_ * (1.0 + kTie))
        throw Error("BadModel", "all C moduli must equal gamma");
    auto ma = eig_moduli(cfg_.A);
    if (!ma.empty() && ma.back() >= lambda_ * (1.0 - kTie))
        throw Error("BadModel", "A moduli must be strictly below lambda");
    auto md = eig_moduli(cfg_.D);
    if (!md.empty() && md.front() <= gamma_ * (1.0 + kTie))
        throw Error("BadModel", "D moduli must be strictly above gamma");
    jac_ = std::pow(lambda_, cfg_.m_s) * std::pow(gamma_, cfg_.n_u);

    // Tangency points sit on the local manifolds and inside the boxes.
    Point ym = Y_minus(), yp = Y_plus();
    if (!cfg_.W.contains(ym.flat(), 1e-12) || !cfg_.W.contains(yp.flat(), 1e-12))
        throw Error("BadModel", "tangency points must lie in W");
    if (!cfg_.pi_minus.contains(ym.flat(), 1e-12))
        throw Error("BadModel", "Y- must lie in Pi-");
    if (!cfg_.pi_plus.contains(yp.flat(), 1e-12))
        throw Error("BadModel", "Y+ must lie in Pi+");
    Box tmp;
    if (!Box::intersect(cfg_.pi_plus, cfg_.W, &tmp) || !Box::intersect(cfg_.pi_minus, cfg_.W, &tmp))
        throw Error("BadModel", "reference boxes must meet W");

    // Pi+ disjoint from its forward iterate, Pi- from its backward iterate.
    if (Box::intersect(t0_image_box(cfg_.pi_plus, 1), cfg_.pi_plus, nullptr))
        throw Error("BadModel", "Pi+ meets its first forward iterate");
    if (Box::intersect(t0_preimage_box(cfg_.pi_minus, 1), cfg_.pi_minus, nullptr))
        throw Error("BadModel", "Pi- meets its first backward iterate");

    // Invertible linearization of the transition at the tangency point.
    MatrixXd J = transition_jacobian(ym);
    Eigen::JacobiSVD<MatrixXd> svd(J);
    if (svd.singularValues().minCoeff() < 1e-12 * svd.singularValues().maxCoeff())
        throw Error("BadModel", "transition linearization at Y- is singular");

    // k0 = least k with a nonempty strip.
    k0_ = -1;
    for (int k = 0; k <= 2000; ++k) {
        Box pre = t0_preimage_box(cfg_.pi_minus, k);
        if (Box::intersect(pre, cfg_.pi_plus, nullptr)) {
            k0_ = k;
            break;
        }
    }
    if (k0_ < 0) throw Error("BadModel", "no nonempty strip for k <= 2000");

    calibrate();
}

Point LocalTangencyModel::Y_minus() const {
    Point p;
    p.u = VectorXd::Zero(du());
    p.x = VectorXd::Zero(dx());
    p.y = cfg_.y_minus;
    p.v = cfg_.v_minus;
    return p;
}

Point LocalTangencyModel::Y_plus() const {
    Point p;
    p.u = cfg_.u_plus;
    p.x = cfg_.x_plus;
    p.y = VectorXd::Zero(dy());
    p.v = VectorXd::Zero(dv());
    return p;
}

MatrixXd LocalTangencyModel::block_power(const MatrixXd& M, int k) const {
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

Point LocalTangencyModel::apply_T0(const Point& p, int k) const {
    if (k < 0) throw Error("BadArgument", "apply_T0 needs k >= 0");
    if (!cfg_.W.contains(p.flat(), 1e-12)) throw Error("LeftNeighborhood", "iterate 0 outside W");
    Point q = p;
    for (int i = 1; i <= k; ++i) {
        if (q.u.size()) q.u = cfg_.A * q.u;
        if (q.x.size()) q.x = cfg_.B * q.x;
        if (q.y.size()) q.y = cfg_.C * q.y;
        if (q.v.size()) q.v = cfg_.D * q.v;
        if (!cfg_.W.contains(q.flat(), 1e-12))
            throw Error("LeftNeighborhood", "iterate " + std::to_string(i) + " outside W");
    }
    return q;
}

VectorXd LocalTangencyModel::solve_vbar(const VectorXd& u, const VectorXd& x, const VectorXd& dy,
                                        const VectorXd& v) const {
    const auto& t = cfg_.transition;
    if (dv() == 0) return VectorXd(0);
    VectorXd rhs0 = v - cfg_.v_minus;
    if (u.size()) rhs0 -= t.A4 * u;
    if (x.size()) rhs0 -= t.B4 * x;
    rhs0 -= t.C4 * dy;
    Eigen::PartialPivLU<MatrixXd> lu(t.D4);
    if (!cfg_.transition.remainder) return lu.solve(rhs0);

    VectorXd vbar = VectorXd::Zero(dv());
    for (int it = 0; it < 100; ++it) {
        VectorXd r = cfg_.transition.remainder->eval(u, x, dy, vbar);
        VectorXd next = lu.solve(rhs0 - r.segment(du() + dx() + this->dy(), dv()).eval());
        if ((next - vbar).lpNorm<Eigen::Infinity>() < 1e-12) return next;
        vbar = next;
    }
    throw Error("ImplicitSolveFailure", "vbar fixed point did not converge in 100 iterations");
}

Point LocalTangencyModel::apply_T1_unchecked(const Point& p) const {
    const auto& t = cfg_.transition;
    VectorXd dy = p.y - cfg_.y_minus;
    VectorXd vbar = solve_vbar(p.u, p.x, dy, p.v);

    VectorXd rem = VectorXd::Zero(dim());
    if (t.remainder) rem = t.remainder->eval(p.u, p.x, dy, vbar);

    VectorXd quad = VectorXd::Zero(this->dy());
    for (int i = 0; i < this->dy(); ++i) quad[i] = dy.dot(t.C3[static_cast<size_t>(i)] * dy);

    Point q;
    q.u = cfg_.u_plus;
    if (du()) {
        if (p.u.size()) q.u += t.A1 * p.u;
        if (p.x.size()) q.u += t.B1 * p.x;
        q.u += t.C1 * dy;
        if (vbar.size()) q.u += t.D1 * vbar;
        q.u += rem.segment(0, du());
    }
    q.x = cfg_.x_plus;
    if (p.u.size()) q.x += t.A2 * p.u;
    if (p.x.size()) q.x += t.B2 * p.x;
    q.x += t.C2 * dy;
    if (vbar.size()) q.x += t.D2 * vbar;
    q.x += rem.segment(du(), dx());

    q.y = quad;
    if (p.u.size()) q.y += t.A3 * p.u;
    if (p.x.size()) q.y += t.B3 * p.x;
    if (vbar.size()) q.y += t.D3 * vbar;
    q.y += rem.segment(du() + dx(), this->dy());

    q.v = vbar;
    return q;
}

Point LocalTangencyModel::apply_T1(const Point& p) const {
    if (!cfg_.pi_minus.contains(p.flat(), 1e-9))
        throw Error("OutsidePiMinus", "transition input must lie in Pi-");
    return apply_T1_unchecked(p);
}

MatrixXd LocalTangencyModel::transition_jacobian(const Point& p) const {
    const auto& t = cfg_.transition;
    const int DU = du(), DX = dx(), DY = dy(), DV = dv(), D = dim();

    if (t.remainder) {
        // Finite differences through the full solve when a remainder is present.
        const double h = 1e-7;
        MatrixXd J(D, D);
        VectorXd base = p.flat();
        for (int j = 0; j < D; ++j) {
            VectorXd a = base, b = base;
            a[j] += h;
            b[j] -= h;
            J.col(j) = (apply_T1_unchecked(Point::split(a, DU, DX, DY, DV)).flat() -
                        apply_T1_unchecked(Point::split(b, DU, DX, DY, DV)).flat()) /
                       (2.0 * h);
        }
        return J;
    }

    VectorXd dyv = p.y - cfg_.y_minus;

    // dvbar/d(u,x,y,v) from the implicit fourth line.
    MatrixXd Mv(DV, D);
    if (DV) {
        Eigen::PartialPivLU<MatrixXd> lu(t.D4);
        MatrixXd rhs(DV, D);
        if (DU) rhs.block(0, 0, DV, DU) = -t.A4;
        rhs.block(0, DU, DV, DX) = -t.B4;
        rhs.block(0, DU + DX, DV, DY) = -t.C4;
        rhs.block(0, DU + DX + DY, DV, DV) = MatrixXd::Identity(DV, DV);
        Mv = lu.solve(rhs);
    }

    MatrixXd J = MatrixXd::Zero(D, D);
    auto fill_row = [&](int row0, int rows, const MatrixXd& Au, const MatrixXd& Bx,
                        const MatrixXd& Cy, const MatrixXd& Dv_) {
        if (!rows) return;
        if (DU) J.block(row0, 0, rows, DU) = Au;
        J.block(row0, DU, rows, DX) = Bx;
        J.block(row0, DU + DX, rows, DY) = Cy;
        if (DV) J.block(row0, 0, rows, D) += Dv_ * Mv;
    };
    fill_row(0, DU, t.A1, t.B1, t.C1, t.D1);
    fill_row(DU, DX, t.A2, t.B2, t.C2, t.D2);

    MatrixXd Jq(DY, DY);
    for (int i = 0; i < DY; ++i) Jq.row(i) = 2.0 * (t.C3[static_cast<size_t>(i)] * dyv).transpose();
    fill_row(DU + DX, DY, t.A3, t.B3, Jq, t.D3);
    if (DV) J.block(DU + DX + DY, 0, DV, D) = Mv;
    return J;
}

Box LocalTangencyModel::t0_preimage_box(const Box& target, int k) const {
    const int DU = du(), DX = dx(), DY = dy(), DV = dv();
    VectorXd lo(dim()), hi(dim());
    auto handle = [&](const MatrixXd& M, int off, int len) {
        if (!len) return;
        Box sub(target.lo.segment(off, len), target.hi.segment(off, len));
        Box img;
        if (is_diagonal(M)) {
            VectorXd rates(len);
            for (int i = 0; i < len; ++i) rates[i] = 1.0 / std::pow(M(i, i), k);
            img = diagonal_image(rates, sub);
        } else {
            img = bounding_image(block_power(M, -k), sub);
        }
        lo.segment(off, len) = img.lo;
        hi.segment(off, len) = img.hi;
    };
    handle(cfg_.A, 0, DU);
    handle(cfg_.B, DU, DX);
    handle(cfg_.C, DU + DX, DY);
    handle(cfg_.D, DU + DX + DY, DV);
    return Box(lo, hi);
}

Box LocalTangencyModel::t0_image_box(const Box& source, int k) const {
    const int DU = du(), DX = dx(), DY = dy(), DV = dv();
    VectorXd lo(dim()), hi(dim());
    auto handle = [&](const MatrixXd& M, int off, int len) {
        if (!len) return;
        Box sub(source.lo.segment(off, len), source.hi.segment(off, len));
        Box img;
        if (is_diagonal(M)) {
            VectorXd rates(len);
            for (int i = 0; i < len; ++i) rates[i] = std::pow(M(i, i), k);
            img = diagonal_image(rates, sub);
        } else {
            img = bounding_image(block_power(M, k), sub);
        }
        lo.segment(off, len) = img.lo;
        hi.segment(off, len) = img.hi;
    };
    handle(cfg_.A, 0, DU);
    handle(cfg_.B, DU, DX);
    handle(cfg_.C, DU + DX, DY);
    handle(cfg_.D, DU + DX + DY, DV);
    return Box(lo, hi);
}

Strip LocalTangencyModel::strip(int k) const {
    if (k < 0) throw Error("BadArgument", "strip needs k >= 0");
    Box pre = t0_preimage_box(cfg_.pi_minus, k);
    Strip s;
    s.k = k;
    if (!Box::intersect(pre, cfg_.pi_plus, &s.box_plus))
        throw Error("EmptyStrip", "T0^{-k}(Pi-) does not meet Pi+ for k = " + std::to_string(k));
    s.box_minus = t0_image_box(s.box_plus, k);
    for (int i = 0; i < dy(); ++i) s.u_diam_axes.push_back(du() + dx() + i);
    for (int i = 0; i < dx(); ++i) s.c_diam_axes.push_back(du() + i);
    return s;
}

Point LocalTangencyModel::return_map(int k, const Point& p) const {
    Strip s = strip(k);
    if (!s.box_plus.contains(p.flat(), 1e-9))
        throw Error("OutsideStrip", "return map input must lie in the strip");
    return apply_T1(apply_T0(p, k));
}

Point LocalTangencyModel::return_map_unchecked(int k, const Point& p) const {
    Point q = p;
    if (q.u.size()) q.u = block_power(cfg_.A, k) * q.u;
    if (q.x.size()) q.x = block_power(cfg_.B, k) * q.x;
    if (q.y.size()) q.y = block_power(cfg_.C, k) * q.y;
    if (q.v.size()) q.v = block_power(cfg_.D, k) * q.v;
    return apply_T1_unchecked(q);
}

void LocalTangencyModel::calibrate() {
    // Volume constant: minimal central determinant of the transition over a
    // Pi- grid, times the cone-angle volume distortion.
    const int D = dim();
    const int g = 5;
    long cells = 1;
    for (int i = 0; i < D; ++i) cells *= g;
    double min_det = std::numeric_limits<double>::infinity();
    for (long cell = 0; cell < cells; ++cell) {
        long rem = cell;
        VectorXd p(D);
        for (int i = 0; i < D; ++i) {
            double t = static_cast<double>(rem % g) / (g - 1);
            rem /= g;
            p[i] = cfg_.pi_minus.lo[i] + t * (cfg_.pi_minus.hi[i] - cfg_.pi_minus.lo[i]);
        }
        MatrixXd J = transition_jacobian(Point::split(p, du(), dx(), dy(), dv()));
        int c = dx() + dy() + dv();
        MatrixXd central = J.block(du(), du(), c, c);
        min_det = std::min(min_det, std::abs(central.determinant()));
    }
    double distort = std::pow(std::cos(cfg_.cone_half_angle), 2 * (dx() + cfg_.n));
    L_ = min_det * distort;

    const auto& t = cfg_.transition;
    K_ = 1.05 * (opnorm(t.A2) + opnorm(t.B2) + opnorm(t.C2));
}

GenericConditionsReport LocalTangencyModel::check_generic_conditions() const {
    GenericConditionsReport rep;
    const int D = dim(), DU = du(), DX = dx(), DY = dy(), DV = dv();
    MatrixXd J = transition_jacobian(Y_minus());

    // C1: tangent spaces of W^s_loc at Y+ and of T1(W^u_loc) span a
    // hyperplane; the intersection defect must be one.
    {
        MatrixXd span(D, DU + DX + cfg_.n);
        span.setZero();
        for (int i = 0; i < DU + DX; ++i) span(i, i) = 1.0;
        span.block(0, DU + DX, D, cfg_.n) = J.block(0, DU + DX, D, cfg_.n);
        Eigen::JacobiSVD<MatrixXd> svd(span);
        double smax = svd.singularValues().maxCoeff();
        int rank = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()[i] > 1e-9 * smax) ++rank;
        int defect = D - rank;
        rep.c1.value = defect;
        rep.c1.pass = defect == 1;
        rep.c1.note = "intersection defect";
    }
    // C2: tangency direction escapes the strong-stable foliation; the B3
    // block must be nonzero.
    {
        double nb3 = opnorm(cfg_.transition.B3);
        rep.c2.value = nb3;
        rep.c2.pass = nb3 > 1e-9;
        rep.c2.note = "||B3||";
    }
    // C3: quadratic contact; smallest singular value of the stacked
    // quadratic coefficients.
    {
        int cols = DY * (DY + 1) / 2;
        MatrixXd Q(DY, cols);
        for (int i = 0; i < DY; ++i) {
            const MatrixXd& f = cfg_.transition.C3[static_cast<size_t>(i)];
            int c = 0;
            for (int a = 0; a < DY; ++a)
                for (int b = a; b < DY; ++b)
                    Q(i, c++) = a == b ? f(a, a) : f(a, b) + f(b, a);
        }
        Eigen::JacobiSVD<MatrixXd> svd(Q);
        double smin = svd.singularValues().minCoeff();
        rep.c3.value = smin;
        rep.c3.pass = smin > 1e-9;
        rep.c3.note = "sigma_min of the quadratic block";
    }
    // C4: the central transition block is nonsingular.
    {
        int c = DX + DY + DV;
        MatrixXd central = J.block(DU, DU, c, c);
        Eigen::JacobiSVD<MatrixXd> svd(central);
        double smin = svd.singularValues().minCoeff();
        rep.c4.value = central.determinant();
        rep.c4.pass = smin > 1e-9;
        rep.c4.note = "central determinant";
    }
    // C5: dual transversality through the inverse transition; vacuous in the
    // codimension-one family n = n_u.
    {
        if (DV == 0) {
            rep.c5.pass = true;
            rep.c5.value = 0.0;
            rep.c5.note = "vacuous (n = n_u)";
        } else {
            MatrixXd Jinv = J.inverse();
            int c = DU + DX + DY;
            MatrixXd sub = Jinv.block(0, 0, c, c);
            Eigen::JacobiSVD<MatrixXd> svd(sub);
            double smin = svd.singularValues().minCoeff();
            rep.c5.value = sub.determinant();
            rep.c5.pass = smin > 1e-9;
            rep.c5.note = "inverse-side determinant";
        }
    }
    return rep;
}

Strip LocalTangencyModel::resized_strip(int k) const { return resized_strip(k, cfg_.theta_planes); }

Strip LocalTangencyModel::resized_strip(int k, const std::vector<double>& theta_planes) const {
    if (cfg_.n != 1 || cfg_.n_u != 1)
        throw Error("WrongCodimension", "resized strips require u-index one (n = n_u = 1)");
    if (theta_planes.size() < 2)
        throw Error("BadTheta", "need at least two theta sheets");
    double ym = cfg_.y_minus[0];
    double c_lo = -std::numeric_limits<double>::infinity();
    double c_hi = std::numeric_limits<double>::infinity();
    for (double c : theta_planes) {
        if (c < ym && c > c_lo) c_lo = c;
        if (c > ym && c < c_hi) c_hi = c;
    }
    if (!std::isfinite(c_lo) || !std::isfinite(c_hi))
        throw Error("BadTheta", "theta sheets must bracket the tangency height y-");
    double delta = c_hi - c_lo;
    if (K_ * delta >= cfg_.rho / 10.0)
        throw Error("QuantifierViolation",
                    "K*delta = " + std::to_string(K_ * delta) + " >= rho/10 = " +
                        std::to_string(cfg_.rho / 10.0));

    Box clipped = cfg_.pi_minus;
    int y_axis = du() + dx();
    clipped.lo[y_axis] = std::max(clipped.lo[y_axis], c_lo);
    clipped.hi[y_axis] = std::min(clipped.hi[y_axis], c_hi);
    Box pre = t0_preimage_box(clipped, k);
    Strip s;
    s.k = k;
    if (!Box::intersect(pre, cfg_.pi_plus, &s.box_plus))
        throw Error("EmptyStrip", "resized strip empty for k = " + std::to_string(k));
    s.box_minus = t0_image_box(s.box_plus, k);
    for (int i = 0; i < dy(); ++i) s.u_diam_axes.push_back(du() + dx() + i);
    for (int i = 0; i < dx(); ++i) s.c_diam_axes.push_back(du() + i);
    s.s_boundary.push_back({y_axis, 0, s.box_plus.lo[y_axis]});
    s.s_boundary.push_back({y_axis, 1, s.box_plus.hi[y_axis]});
    for (int a = 0; a < dim(); ++a) {
        if (a == y_axis) continue;
        s.u_boundary.push_back({a, 0, s.box_plus.lo[a]});
        s.u_boundary.push_back({a, 1, s.box_plus.hi[a]});
    }
    return s;
}

Disk central_disk(const LocalTangencyModel& model, const Strip& strip, double u_tilt,
                  double shrink) {
    const int DU = model.du(), DX = model.dx(), DY = model.dy(), DV = model.dv();
    Disk d;
    d.dim = DX + model.cfg().n;
    Box bp = strip.box_plus;
    d.chart = [=](const VectorXd& s) {
        Point p;
        p.u = VectorXd::Zero(DU);
        p.x = VectorXd::Zero(DX);
        p.y = VectorXd::Zero(DY);
        p.v = VectorXd::Zero(DV);
        double drift = 0.0;
        int idx = 0;
        auto place = [&](VectorXd& tgt, int off, int len) {
            for (int i = 0; i < len; ++i) {
                double c = 0.5 * (bp.lo[off + i] + bp.hi[off + i]);
                double h = 0.5 * (bp.hi[off + i] - bp.lo[off + i]) * shrink;
                tgt[i] = c + (2.0 * s[idx] - 1.0) * h;
                drift += (s[idx] - 0.5) * (bp.hi[off + i] - bp.lo[off + i]);
                ++idx;
            }
        };
        place(p.x, DU, DX);
        place(p.y, DU + DX, DY);
        place(p.v, DU + DX + DY, DV);
        for (int i = 0; i < DU; ++i) {
            double c = 0.5 * (bp.lo[i] + bp.hi[i]);
            p.u[i] = c + u_tilt * drift;
        }
        return p;
    };
    return d;
}

namespace {

// Principal angle between the tangent space spanned by the columns of T and
// the central coordinate plane (x, y, v).
double frame_angle(const MatrixXd& T, int du_, int d_central) {
    Eigen::HouseholderQR<MatrixXd> qr(T);
    MatrixXd Q = qr.householderQ() * MatrixXd::Identity(T.rows(), T.cols());
    MatrixXd P = Q.bottomRows(d_central);  // central rows: everything after u
    (void)du_;
    Eigen::JacobiSVD<MatrixXd> svd(P);
    double smin = svd.singularValues().minCoeff();
    smin = std::clamp(smin, 0.0, 1.0);
    return std::acos(smin);
}

struct QuadratureResult {
    double vol_in = 0.0;
    double vol_out = 0.0;
};

QuadratureResult sweep_volume(const LocalTangencyModel& model, int k, const Disk& disk, int grid,
                              const Box& strip_box) {
    const int d = disk.dim;
    const int D = model.dim();
    const double h = 1e-5;
    long cells = 1;
    for (int i = 0; i < d; ++i) cells *= grid;

    MatrixXd PA = model.block_power(model.cfg().A, k);
    MatrixXd PB = model.block_power(model.cfg().B, k);
    MatrixXd PC = model.block_power(model.cfg().C, k);
    MatrixXd PD = model.block_power(model.cfg().D, k);
    MatrixXd T0k = MatrixXd::Zero(D, D);
    int DU = model.du(), DX = model.dx(), DY = model.dy(), DV = model.dv();
    if (DU) T0k.block(0, 0, DU, DU) = PA;
    T0k.block(DU, DU, DX, DX) = PB;
    T0k.block(DU + DX, DU + DX, DY, DY) = PC;
    if (DV) T0k.block(DU + DX + DY, DU + DX + DY, DV, DV) = PD;

    QuadratureResult res;
    double cellvol = 1.0;
    for (int i = 0; i < d; ++i) cellvol /= grid;

    for (long cell = 0; cell < cells; ++cell) {
        long rem = cell;
        VectorXd s(d);
        for (int i = 0; i < d; ++i) {
            s[i] = (static_cast<double>(rem % grid) + 0.5) / grid;
            rem /= grid;
        }
        VectorXd p = disk.chart(s).flat();
        if (!strip_box.contains(p, 1e-9))
            throw Error("OutsideStrip", "disk sample leaves the strip");

        MatrixXd T(D, d);
        for (int j = 0; j < d; ++j) {
            VectorXd a = s, b = s;
            a[j] += h;
            b[j] -= h;
            T.col(j) = (disk.chart(a).flat() - disk.chart(b).flat()) / (2.0 * h);
        }
        double ang = frame_angle(T, DU, DX + model.cfg().n);
        if (ang > model.cfg().cone_half_angle + 1e-9)
            throw Error("ConeViolation", "tangent frame leaves the center-unstable cone");

        double gin = std::sqrt(std::max(0.0, (T.transpose() * T).determinant()));
        res.vol_in += gin * cellvol;

        Point pk = Point::split(T0k * p, DU, DX, DY, DV);
        MatrixXd DR = model.transition_jacobian(pk) * T0k;
        MatrixXd TI = DR * T;
        double gout = std::sqrt(std::max(0.0, (TI.transpose() * TI).determinant()));
        res.vol_out += gout * cellvol;
    }
    return res;
}

}  // namespace

VolumeExperiment volume_expansion_experiment(const LocalTangencyModel& model, int k,
                                             const Disk& disk) {
    if (disk.dim != model.dx() + model.cfg().n)
        throw Error("BadArgument", "disk dimension must be m_s + n");
    Strip s = model.strip(k);

    QuadratureResult coarse = sweep_volume(model, k, disk, 64, s.box_plus);
    QuadratureResult fine = sweep_volume(model, k, disk, 128, s.box_plus);
    if (fine.vol_in < 1e-14)
        throw Error("DegenerateDisk", "disk has no (m_s+n)-volume");

    VolumeExperiment out;
    out.ratio = fine.vol_out / fine.vol_in;
    double coarse_ratio = coarse.vol_out / coarse.vol_in;
    out.quadrature_discrepancy = std::abs(out.ratio - coarse_ratio) / std::max(1e-300, out.ratio);
    out.L_used = model.volume_constant();
    out.bound_ok = out.ratio > out.L_used * std::pow(model.leading_jacobian(), k);
    return out;
}

DiameterExperiment diameter_experiment(const LocalTangencyModel& model, int k, const Disk& disk) {
    if (model.cfg().n != 1 || model.cfg().n_u != 1)
        throw Error("WrongCodimension", "diameter experiment requires n = n_u = 1");
    Strip s = model.strip(k);

    const int d = disk.dim;
    const int g = 33;  // inclusive grid so box extremes are hit
    long cells = 1;
    for (int i = 0; i < d; ++i) cells *= g;

    const int DU = model.du(), DX = model.dx();
    std::vector<VectorXd> images;
    images.reserve(static_cast<size_t>(cells));
    double y_lo = 1e300, y_hi = -1e300;
    std::vector<VectorXd> xs_in;

    const double h = 1e-5;
    for (int cell = 0; cell < cells; ++cell) {
        long rem = cell;
        VectorXd sp(d);
        for (int i = 0; i < d; ++i) {
            sp[i] = static_cast<double>(rem % g) / (g - 1);
            rem /= g;
        }
        Point p = disk.chart(sp);
        if (!s.box_plus.contains(p.flat(), 1e-9))
            throw Error("OutsideStrip", "disk sample leaves the strip");
        y_lo = std::min(y_lo, p.y[0]);
        y_hi = std::max(y_hi, p.y[0]);
        xs_in.push_back(p.x);

        if (cell % 8 == 0) {  // cone check on a decimated subset
            MatrixXd T(model.dim(), d);
            for (int j = 0; j < d; ++j) {
                VectorXd a = sp, b = sp;
                a[j] = std::min(1.0, a[j] + h);
                b[j] = std::max(0.0, b[j] - h);
                T.col(j) = (disk.chart(a).flat() - disk.chart(b).flat()) / (a[j] - b[j]);
            }
            double ang = frame_angle(T, DU, DX + model.cfg().n);
            if (ang > model.cfg().cone_half_angle + 1e-9)
                throw Error("ConeViolation", "tangent frame leaves the center-unstable cone");
        }
        images.push_back(model.return_map_unchecked(k, p).x);
    }

    auto set_diameter = [](const std::vector<VectorXd>& pts) {
        if (pts.empty()) return 0.0;
        if (pts.front().size() == 1) {
            double lo = 1e300, hi = -1e300;
            for (const auto& p : pts) {
                lo = std::min(lo, p[0]);
                hi = std::max(hi, p[0]);
            }
            return hi - lo;
        }
        size_t stride = std::max<size_t>(1, pts.size() / 1024);
        double best = 0.0;
        for (size_t i = 0; i < pts.size(); i += stride)
            for (size_t j = i + stride; j < pts.size(); j += stride)
                best = std::max(best, (pts[i] - pts[j]).norm());
        return best;
    };

    DiameterExperiment out;
    out.diam_c_out = set_diameter(images);
    double diam_u_in = y_hi - y_lo;
    double K = model.diameter_constant();
    out.bound = K * std::pow(model.gamma(), k) * diam_u_in;
    if (diam_u_in < 1e-14) {
        // Horizontal (zero u-diameter) input: fall back to the contraction
        // envelope of the x-coordinates.
        out.degenerate_input = true;
        const auto& t = model.cfg().transition;
        double Kc = 1.05 * (opnorm(t.A2) + opnorm(t.B2));
        double diam_c_in = set_diameter(xs_in);
        out.bound = Kc * std::pow(model.lambda(), k) * diam_c_in + 1e-12;
        out.ok = out.diam_c_out <= out.bound;
    } else {
        out.ok = out.diam_c_out < out.bound;
    }
    return out;
}

}  // namespace blenderlab::local_model

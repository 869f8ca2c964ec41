#include "blenderlab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace blenderlab::io {

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open input file: " + path);
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("invalid JSON in ") + path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("WriteFailure", "cannot open output file: " + path);
    out << content;
}

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

Eigen::MatrixXd parse_matrix(const Json& j, const std::string& what) {
    if (!j.is_array()) throw SchemaError(what + " must be an array of rows");
    size_t rows = j.size();
    if (rows == 0) return Eigen::MatrixXd(0, 0);
    size_t cols = j[0].is_array() ? j[0].size() : 0;
    Eigen::MatrixXd M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw SchemaError(what + " rows must have equal length");
        for (size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number()) throw SchemaError(what + " entries must be numbers");
            M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
        }
    }
    return M;
}

Eigen::VectorXd parse_vector(const Json& j, const std::string& what) {
    if (!j.is_array()) throw SchemaError(what + " must be an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw SchemaError(what + " entries must be numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json matrix_to_json(const Eigen::MatrixXd& M) {
    Json j = Json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
        j.push_back(row);
    }
    return j;
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json j = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
    return j;
}

Box parse_box(const Json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("lo") || !j.contains("hi"))
        throw SchemaError(what + " must be {\"lo\": [...], \"hi\": [...]}");
    try {
        return Box(parse_vector(j["lo"], what + ".lo"), parse_vector(j["hi"], what + ".hi"));
    } catch (const Error& e) {
        throw SchemaError(what + ": " + e.what());
    }
}

Json box_to_json(const Box& b) {
    Json j;
    j["lo"] = vector_to_json(b.lo);
    j["hi"] = vector_to_json(b.hi);
    return j;
}

std::pair<std::vector<std::complex<double>>, int> parse_spectrum(const Json& j) {
    if (!j.contains("multipliers") || !j.contains("u_index"))
        throw SchemaError("spectrum needs \"multipliers\" and \"u_index\"");
    std::vector<std::complex<double>> mults;
    for (const auto& m : j["multipliers"]) {
        if (m.is_number()) {
            mults.emplace_back(m.get<double>(), 0.0);
        } else if (m.is_array() && m.size() == 2) {
            mults.emplace_back(m[0].get<double>(), m[1].get<double>());
        } else {
            throw SchemaError("multipliers must be numbers or [re, im] pairs");
        }
    }
    if (!j["u_index"].is_number_integer()) throw SchemaError("u_index must be an integer");
    return {mults, j["u_index"].get<int>()};
}

Json classification_to_json(const spectra::SaddleClassification& c) {
    Json j;
    j["m_s"] = c.m_s;
    j["n_u"] = c.n_u;
    j["simple"] = c.simple;
    j["leading_jacobian"] = c.leading_jacobian;
    j["lambda"] = c.lambda;
    j["gamma"] = c.gamma;
    if (c.effective_dimension)
        j["effective_dimension"] = *c.effective_dimension;
    else
        j["effective_dimension"] = nullptr;
    return j;
}

namespace {

Eigen::MatrixXd block_or_empty(const Json& j, const std::string& key, int rows, int cols) {
    if (!j.contains(key) || j[key].is_null())
        return Eigen::MatrixXd::Zero(rows, cols);
    Eigen::MatrixXd M = parse_matrix(j[key], key);
    if (M.size() == 0) return Eigen::MatrixXd::Zero(rows, cols);
    if (M.rows() != rows || M.cols() != cols)
        throw SchemaError("block " + key + " must be " + std::to_string(rows) + "x" +
                          std::to_string(cols));
    return M;
}

}  // namespace

local_model::LocalTangencyModel::Config parse_local_model(const Json& j) {
    local_model::LocalTangencyModel::Config cfg;
    if (!j.contains("dims")) throw SchemaError("model needs \"dims\"");
    const Json& d = j["dims"];
    for (const char* key : {"m", "n", "m_s", "n_u"})
        if (!d.contains(key) || !d[key].is_number_integer())
            throw SchemaError(std::string("dims.") + key + " must be an integer");
    cfg.m = d["m"].get<int>();
    cfg.n = d["n"].get<int>();
    cfg.m_s = d["m_s"].get<int>();
    cfg.n_u = d["n_u"].get<int>();
    int du = cfg.m - cfg.m_s, dx = cfg.m_s, dy = cfg.n_u, dv = cfg.n - cfg.n_u;

    if (!j.contains("blocks")) throw SchemaError("model needs \"blocks\"");
    const Json& b = j["blocks"];
    cfg.A = block_or_empty(b, "A", du, du);
    cfg.B = block_or_empty(b, "B", dx, dx);
    cfg.C = block_or_empty(b, "C", dy, dy);
    cfg.D = block_or_empty(b, "D", dv, dv);

    cfg.W = parse_box(j.at("W"), "W");
    const Json& ym = j.at("Y_minus");
    cfg.y_minus = parse_vector(ym.at("y"), "Y_minus.y");
    cfg.v_minus = ym.contains("v") ? parse_vector(ym["v"], "Y_minus.v") : Eigen::VectorXd(0);
    const Json& yp = j.at("Y_plus");
    cfg.u_plus = yp.contains("u") ? parse_vector(yp["u"], "Y_plus.u") : Eigen::VectorXd(0);
    cfg.x_plus = parse_vector(yp.at("x"), "Y_plus.x");
    cfg.pi_plus = parse_box(j.at("boxes").at("pi_plus"), "pi_plus");
    cfg.pi_minus = parse_box(j.at("boxes").at("pi_minus"), "pi_minus");
    if (j.contains("ell")) cfg.ell = j["ell"].get<int>();

    if (!j.contains("transition")) throw SchemaError("model needs \"transition\"");
    const Json& t = j["transition"];
    auto& tr = cfg.transition;
    tr.A1 = block_or_empty(t, "A1", du, du);
    tr.B1 = block_or_empty(t, "B1", du, dx);
    tr.C1 = block_or_empty(t, "C1", du, dy);
    tr.D1 = block_or_empty(t, "D1", du, dv);
    tr.A2 = block_or_empty(t, "A2", dx, du);
    tr.B2 = block_or_empty(t, "B2", dx, dx);
    tr.C2 = block_or_empty(t, "C2", dx, dy);
    tr.D2 = block_or_empty(t, "D2", dx, dv);
    tr.A3 = block_or_empty(t, "A3", dy, du);
    tr.B3 = block_or_empty(t, "B3", dy, dx);
    tr.D3 = block_or_empty(t, "D3", dy, dv);
    tr.A4 = block_or_empty(t, "A4", dv, du);
    tr.B4 = block_or_empty(t, "B4", dv, dx);
    tr.C4 = block_or_empty(t, "C4", dv, dy);
    tr.D4 = block_or_empty(t, "D4", dv, dv);
    if (dv > 0 && (!t.contains("D4") || t["D4"].is_null()))
        throw SchemaError("transition needs an invertible D4 block when n > n_u");

    // C3: scalar shorthand for one-dimensional y, else a list of n_u
    // symmetric matrices.
    tr.C3.assign(static_cast<size_t>(dy), Eigen::MatrixXd::Zero(dy, dy));
    if (t.contains("C3") && !t["C3"].is_null()) {
        const Json& q = t["C3"];
        if (q.is_number()) {
            if (dy != 1) throw SchemaError("scalar C3 requires n_u = 1");
            tr.C3[0](0, 0) = q.get<double>();
        } else {
            if (!q.is_array() || q.size() != static_cast<size_t>(dy))
                throw SchemaError("C3 must be a list of n_u square matrices");
            for (int i = 0; i < dy; ++i) {
                Eigen::MatrixXd Q = parse_matrix(q[static_cast<size_t>(i)], "C3");
                if (Q.rows() != dy || Q.cols() != dy)
                    throw SchemaError("C3 forms must be n_u x n_u");
                tr.C3[static_cast<size_t>(i)] = Q;
            }
        }
    }

    if (j.contains("cone_half_angle")) cfg.cone_half_angle = j["cone_half_angle"].get<double>();
    if (j.contains("rho")) cfg.rho = j["rho"].get<double>();
    if (j.contains("theta_planes"))
        for (const auto& v : j["theta_planes"]) cfg.theta_planes.push_back(v.get<double>());
    if (j.contains("remainder") && !j["remainder"].is_null()) {
        std::string preset = j["remainder"].value("preset", "zero");
        if (preset != "zero") throw SchemaError("unknown remainder preset: " + preset);
    }
    return cfg;
}

Json strip_to_json(const local_model::Strip& s, double gamma) {
    Json j;
    j["k"] = s.k;
    j["box_plus"] = box_to_json(s.box_plus);
    j["box_minus"] = box_to_json(s.box_minus);
    j["diam_u"] = s.diam_u();
    j["diam_c"] = s.diam_c();
    j["scaled_diam_u"] = s.diam_u() * std::pow(gamma, s.k);
    if (!s.s_boundary.empty()) {
        Json faces = Json::array();
        for (const auto& f : s.s_boundary) {
            Json fj;
            fj["axis"] = f.axis;
            fj["side"] = f.side;
            fj["value"] = f.value;
            faces.push_back(fj);
        }
        j["s_boundary"] = faces;
    }
    return j;
}

Json generic_conditions_to_json(const local_model::GenericConditionsReport& r) {
    auto item = [](const local_model::GenericConditionsReport::Item& it) {
        Json j;
        j["pass"] = it.pass;
        j["value"] = it.value;
        j["note"] = it.note;
        return j;
    };
    Json j;
    j["C1"] = item(r.c1);
    j["C2"] = item(r.c2);
    j["C3"] = item(r.c3);
    j["C4"] = item(r.c4);
    j["C5"] = item(r.c5);
    j["all_pass"] = r.all_pass();
    return j;
}

entropy::HorseshoeSpec parse_horseshoe(const Json& j) {
    entropy::HorseshoeSpec spec;
    if (!j.contains("matrix") || !j.contains("rates") || !j.contains("m") || !j.contains("n"))
        throw SchemaError("horseshoe spec needs matrix, rates, m, n");
    Eigen::MatrixXd M = parse_matrix(j["matrix"], "matrix");
    spec.transition = M.cast<int>();
    for (const auto& row : j["rates"]) {
        std::vector<double> r;
        for (const auto& v : row) r.push_back(v.get<double>());
        spec.rates.push_back(std::move(r));
    }
    spec.m = j["m"].get<int>();
    spec.n = j["n"].get<int>();
    spec.r = j.value("r", 2.0);
    return spec;
}

Json entropy_report_to_json(const entropy::EntropyGapReport& r) {
    Json j;
    j["h_top"] = r.h_top;
    j["cs_ok"] = r.cs_ok;
    j["cu_ok"] = r.cu_ok;
    j["double_ok"] = r.double_ok;
    j["threshold_cs"] = r.threshold_cs;
    j["threshold_cu"] = r.threshold_cu;
    Json sp;
    sp["stable_exponents"] = r.spectrum.stable_exponents;
    sp["unstable_exponents"] = r.spectrum.unstable_exponents;
    sp["chi_cs"] = r.spectrum.chi_cs;
    sp["chi_cu"] = r.spectrum.chi_cu;
    sp["J_s"] = r.spectrum.J_s;
    sp["J_u"] = r.spectrum.J_u;
    j["spectrum"] = sp;
    return j;
}

blender::BlenderSpec parse_blender(const Json& j) {
    blender::BlenderSpec spec;
    if (!j.contains("dims") || !j.contains("domain") || !j.contains("branches"))
        throw SchemaError("blender spec needs dims, domain, branches");
    const Json& d = j["dims"];
    spec.d_ss = d.at("ss").get<int>();
    spec.d_cs = d.at("cs").get<int>();
    spec.d_uu = d.at("uu").get<int>();
    spec.domain = parse_box(j["domain"], "domain");
    for (const auto& bj : j["branches"]) {
        blender::Branch b;
        const Json& lin = bj.at("linear");
        b.ss = parse_matrix(lin.at("ss"), "branch.linear.ss");
        b.central = parse_matrix(lin.at("central"), "branch.linear.central");
        b.uu = parse_matrix(lin.at("uu"), "branch.linear.uu");
        b.offset = parse_vector(bj.at("offset"), "branch.offset");
        b.domain = parse_box(bj.at("domain"), "branch.domain");
        spec.branches.push_back(std::move(b));
    }
    spec.distinctive_branch = j.value("distinctive_branch", 0);
    std::string orient = j.value("orientation", "cs");
    if (orient != "cs" && orient != "cu") throw SchemaError("orientation must be cs or cu");
    spec.orientation = orient == "cs" ? blender::Orientation::cs : blender::Orientation::cu;
    if (j.contains("ss_cone_half_angle")) spec.ss_cone_half_angle = j["ss_cone_half_angle"].get<double>();
    return spec;
}

Json witness_to_json(const blender::Witness& w) {
    Json j;
    j["point"] = vector_to_json(w.point);
    std::string itin;
    for (int i : w.itinerary) itin += std::to_string(i);
    j["itinerary"] = itin;
    j["residual"] = w.residual;
    j["residual_bound"] = w.residual_bound;
    return j;
}

unfolding::SweepConfig parse_sweep_axes(const Json& j, int threads) {
    unfolding::SweepConfig cfg;
    cfg.threads = threads;
    if (!j.contains("k") || !j["k"].is_array() || j["k"].size() != 2)
        throw SchemaError("sweep needs \"k\": [k_min, k_max]");
    cfg.k_min = j["k"][0].get<int>();
    cfg.k_max = j["k"][1].get<int>();
    auto axis = [&](const char* name) {
        unfolding::GridAxis a;
        if (j.contains(name)) {
            const Json& aj = j[name];
            a.lo = aj.at("lo").get<double>();
            a.hi = aj.at("hi").get<double>();
            a.steps = aj.at("steps").get<int>();
            if (a.steps < 1) throw SchemaError(std::string(name) + ".steps must be >= 1");
        }
        return a;
    };
    cfg.t = axis("t");
    cfg.alpha = axis("alpha");
    cfg.beta = axis("beta");
    return cfg;
}

}  // namespace blenderlab::io

#include "blenderlab/run.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>

#include "blenderlab/io.hpp"
#include "blenderlab/parallel.hpp"

namespace blenderlab::cli {

namespace {

using io::Json;
using local_model::LocalTangencyModel;

int log_level() {
    const char* env = std::getenv("BLENDERLAB_LOG");
    if (!env) return 0;
    std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[blenderlab] " << msg << "\n";
}

struct Tolerances {
    double saddle_residual_max = 1e-10;
};

Tolerances parse_tolerances(const std::string& text) {
    Tolerances tol;
    if (text.empty()) return tol;
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("tolerance overrides are not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("tolerance overrides must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "saddle_residual_max")
            tol.saddle_residual_max = value.get<double>();
        else
            throw SchemaError("unknown tolerance override: " + key);
    }
    return tol;
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

// ---- commands ---------------------------------------------------------------

Json cmd_classify(const Json& in) {
    auto [mults, u_index] = io::parse_spectrum(in);
    return io::classification_to_json(spectra::classify(mults, u_index));
}

Json cmd_bifurcate(const Json& in) {
    Eigen::MatrixXd M = io::parse_matrix(in.at("matrix"), "matrix");
    if (M.rows() != 2 || M.cols() != 2) throw SchemaError("matrix must be 2x2");
    Eigen::Matrix2d A = M;
    auto res = spectra::saddle_node_angle(A);
    Json j;
    j["phi0"] = res.phi0;
    j["cos_phi0"] = std::cos(res.phi0);
    j["discriminant_at_phi0"] = res.discriminant_at_phi0;
    auto pair_json = [](const std::pair<std::complex<double>, std::complex<double>>& p) {
        Json a = Json::array({p.first.real(), p.first.imag()});
        Json b = Json::array({p.second.real(), p.second.imag()});
        return Json::array({a, b});
    };
    j["eigenvalues_below"] = pair_json(spectra::rotation_eigenvalues(A, 0.5 * res.phi0));
    double above = std::min(res.phi0 * 1.02 + 1e-6, 3.14159265358979323846);
    j["eigenvalues_above"] = pair_json(spectra::rotation_eigenvalues(A, above));
    return j;
}

Json cmd_strips(const Json& in) {
    LocalTangencyModel model(io::parse_local_model(in.at("model")));
    int k_min = in.value("k_min", model.k0());
    int k_max = in.value("k_max", model.k0() + 10);
    bool resized = in.value("resized", false);
    Json strips = Json::array();
    for (int k = k_min; k <= k_max; ++k) {
        local_model::Strip s = resized ? model.resized_strip(k) : model.strip(k);
        strips.push_back(io::strip_to_json(s, model.gamma()));
    }
    Json j;
    j["k0"] = model.k0();
    j["rho"] = model.rho();
    j["gamma"] = model.gamma();
    j["strips"] = strips;
    j["generic_conditions"] = io::generic_conditions_to_json(model.check_generic_conditions());
    return j;
}

std::string cmd_volume_csv(const Json& in) {
    LocalTangencyModel model(io::parse_local_model(in.at("model")));
    int k_min = in.value("k_min", model.k0());
    int k_max = in.value("k_max", model.k0() + 10);
    double u_tilt = 0.0, shrink = 1.0;
    if (in.contains("disk")) {
        u_tilt = in["disk"].value("u_tilt", 0.0);
        shrink = in["disk"].value("shrink", 1.0);
    }
    std::ostringstream csv;
    csv << "k,ratio,bound,ok\n";
    for (int k = k_min; k <= k_max; ++k) {
        local_model::Strip s = model.strip(k);
        local_model::Disk disk = local_model::central_disk(model, s, u_tilt, shrink);
        auto res = local_model::volume_expansion_experiment(model, k, disk);
        double bound = res.L_used * std::pow(model.leading_jacobian(), k);
        csv << k << ',' << io::format_double(res.ratio) << ',' << io::format_double(bound) << ','
            << (res.bound_ok ? 1 : 0) << "\n";
    }
    return csv.str();
}

std::string cmd_diameter_csv(const Json& in, std::uint64_t seed) {
    LocalTangencyModel model(io::parse_local_model(in.at("model")));
    int k_min = in.value("k_min", model.k0());
    int k_max = in.value("k_max", model.k0() + 10);
    int count = in.value("disks", 8);
    std::ostringstream csv;
    csv << "k,disk,diam_c_out,bound,ok\n";
    for (int k = k_min; k <= k_max; ++k) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        local_model::Strip s = model.strip(k);
        for (int d = 0; d < count; ++d) {
            double tilt = 0.3 * model.cfg().cone_half_angle * (2.0 * unif(rng) - 1.0);
            double shrink = 0.4 + 0.6 * unif(rng);
            local_model::Disk disk = local_model::central_disk(model, s, tilt, shrink);
            auto res = local_model::diameter_experiment(model, k, disk);
            csv << k << ',' << d << ',' << io::format_double(res.diam_c_out) << ','
                << io::format_double(res.bound) << ',' << (res.ok ? 1 : 0) << "\n";
        }
    }
    return csv.str();
}

struct SweepOutput {
    std::string csv;
    Json summary;
};

SweepOutput cmd_unfold_sweep(const Json& in, int threads, const Tolerances& tol) {
    LocalTangencyModel model(io::parse_local_model(in.at("model")));
    unfolding::SweepConfig cfg = io::parse_sweep_axes(in, threads);
    unfolding::SweepResult res = unfolding::index_variation_sweep(model, cfg);

    std::ostringstream csv;
    csv << "k,t,alpha,beta,u_index,residual";
    const int D = model.dim();
    auto axis_name = [&](int a) {
        if (a < model.du()) return "u" + std::to_string(a);
        if (a < model.du() + model.dx()) return "x" + std::to_string(a - model.du());
        if (a < model.du() + model.dx() + model.dy())
            return "y" + std::to_string(a - model.du() - model.dx());
        return "v" + std::to_string(a - model.du() - model.dx() - model.dy());
    };
    for (int a = 0; a < D; ++a) csv << ',' << axis_name(a);
    csv << "\n";
    for (const auto& row : res.rows) {
        if (row.residual > tol.saddle_residual_max) continue;
        csv << row.k << ',' << io::format_double(row.t) << ',' << io::format_double(row.alpha)
            << ',' << io::format_double(row.beta) << ',' << row.u_index << ','
            << io::format_double(row.residual);
        for (int a = 0; a < D; ++a) csv << ',' << io::format_double(row.location[a]);
        csv << "\n";
    }

    Json windows = Json::array();
    for (const auto& w : res.windows) {
        Json wj;
        wj["k"] = w.k;
        wj["u_index"] = w.u_index;
        wj["t_lo"] = w.t_lo;
        wj["t_hi"] = w.t_hi;
        wj["alpha"] = w.alpha;
        wj["beta"] = w.beta;
        wj["width"] = w.width();
        windows.push_back(wj);
    }
    Json summary;
    summary["k0"] = model.k0();
    summary["windows"] = windows;
    return {csv.str(), summary};
}

Json cmd_cycle_witness(const Json& in, const Tolerances& tol) {
    LocalTangencyModel model(io::parse_local_model(in.at("model")));
    unfolding::UnfoldingParams params;
    params.t = in.value("t", 0.0);
    params.alpha = in.value("alpha", 0.0);
    params.beta = in.value("beta", 0.0);
    int k = in.at("k").get<int>();
    int max_rounds = in.value("max_rounds", 50);

    auto rep = unfolding::find_single_round_saddles(model, params, k);
    Json witnesses = Json::array();
    int skipped = 0;
    for (const auto& sd : rep.saddles) {
        if (sd.u_index < 2 || sd.residual > tol.saddle_residual_max) {
            ++skipped;
            continue;
        }
        Json wj;
        wj["k"] = k;
        wj["saddle"] = io::vector_to_json(sd.location.flat());
        wj["u_index"] = sd.u_index;
        wj["residual"] = sd.residual;
        try {
            unfolding::CycleWitnessDiagnostics diag;
            unfolding::CycleWitness w = unfolding::cycle_witness(model, params, k, sd, max_rounds, &diag);
            wj["m0"] = w.m0;
            wj["crossing"] = io::vector_to_json(w.crossing.flat());
            wj["y_signed"] = w.y_signed;
            wj["face"] = w.face;
            wj["rounds_run"] = diag.rounds_run;
        } catch (const Error& e) {
            wj["error"] = e.code();
            wj["detail"] = e.what();
        }
        witnesses.push_back(wj);
    }
    Json j;
    j["saddles_found"] = static_cast<int>(rep.saddles.size());
    j["seeds"] = rep.seeds;
    j["dropped"] = rep.dropped;
    j["skipped_low_index"] = skipped;
    j["witnesses"] = witnesses;
    return j;
}

Json cmd_blender_check(const Json& in, std::uint64_t seed) {
    blender::BlenderSpec spec = io::parse_blender(in);
    Json j;
    auto cov = blender::covering_criterion(spec);
    j["covering"] = Json{{"ok", cov.ok}, {"margin", cov.margin}};
    auto rob = blender::robustness_margin(spec);
    j["epsilon0"] = rob.epsilon0;

    int depth = in.value("depth", 40);
    Json witnesses = Json::array();
    if (in.contains("disks")) {
        for (const auto& dj : in["disks"]) {
            Eigen::VectorXd c = io::parse_vector(dj.at("central"), "disk.central");
            Eigen::VectorXd u0 = io::parse_vector(dj.at("uu"), "disk.uu");
            blender::SsDisk disk = blender::vertical_disk(spec, c, u0);
            Json wj;
            wj["central"] = io::vector_to_json(c);
            try {
                wj["witness"] = io::witness_to_json(blender::verify_superposition(spec, disk, depth));
            } catch (const Error& e) {
                wj["error"] = e.code();
            }
            witnesses.push_back(wj);
        }
    }
    j["witnesses"] = witnesses;

    int trials = in.value("perturbation_trials", 0);
    if (trials > 0 && cov.ok) {
        double scale = in.value("perturbation_scale", 0.5) * rob.epsilon0;
        int pass = 0;
        for (int trial = 0; trial < trials; ++trial) {
            std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
            std::uniform_real_distribution<double> unif(-scale, scale);
            // The robustness statement is checked at the level of the covering
            // mechanism: perturb the central maps.
            blender::BlenderSpec pert = spec;
            for (auto& br : pert.branches) {
                for (Eigen::Index r = 0; r < br.central.rows(); ++r)
                    for (Eigen::Index cidx = 0; cidx < br.central.cols(); ++cidx)
                        br.central(r, cidx) += unif(rng);
                for (int r = 0; r < spec.d_cs; ++r) br.offset[spec.d_ss + r] += unif(rng);
            }
            try {
                if (blender::covering_criterion(pert).ok) ++pass;
            } catch (const Error&) {
            }
        }
        j["perturbation_trials"] = trials;
        j["perturbation_pass"] = pass;
    }
    return j;
}

Json cmd_blender_product(const Json& in) {
    std::string name = in.value("repeller", "affine_surrogate");
    blender::PlanarRepeller rep;
    if (name == "affine_surrogate")
        rep = blender::affine_surrogate_repeller();
    else if (name == "gappy_surrogate")
        rep = blender::gappy_surrogate_repeller();
    else
        throw SchemaError("unknown repeller preset: " + name);
    double gamma = in.at("gamma").get<double>();
    int ss_dim = in.value("ss_dim", 1);
    double resolution = in.value("resolution", 1e-3);
    blender::ProductBlenderSpec spec = blender::product_blender(rep, gamma, ss_dim, resolution);

    Json j;
    j["repeller"] = rep.name;
    j["gamma"] = gamma;
    j["ss_dim"] = ss_dim;
    if (in.contains("disk")) {
        const Json& dj = in["disk"];
        Eigen::VectorXd yz = io::parse_vector(dj.at("yz"), "disk.yz");
        if (yz.size() != 2) throw SchemaError("disk.yz must have two entries");
        blender::SsDisk disk;
        disk.d_ss = ss_dim;
        disk.tangent_bound = 1e-9;
        Box dom = spec.domain;
        disk.chart = [dom, yz, ss_dim](const Eigen::VectorXd& s) {
            Eigen::VectorXd p(ss_dim + 2);
            for (int i = 0; i < ss_dim; ++i) p[i] = dom.lo[i] + s[i] * (dom.hi[i] - dom.lo[i]);
            p[ss_dim] = yz[0];
            p[ss_dim + 1] = yz[1];
            return p;
        };
        auto w = blender::verify_product_superposition(spec, disk);
        Json wj;
        wj["point"] = io::vector_to_json(w.point);
        wj["residual"] = w.residual;
        wj["leaf"] = w.leaf;
        j["witness"] = wj;
    }
    return j;
}

Json cmd_tangency(const Json& in, std::uint64_t seed) {
    blender::ClosedCurve curve;
    const Json& cj = in.at("curve");
    std::string kind = cj.is_string() ? cj.get<std::string>() : cj.at("kind").get<std::string>();
    if (kind == "circle") {
        curve.point = [](double t) { return Eigen::Vector2d(std::cos(t), std::sin(t)); };
        curve.derivative = [](double t) { return Eigen::Vector2d(-std::sin(t), std::cos(t)); };
    } else if (kind == "ellipse") {
        double a = cj.value("a", 2.0), b = cj.value("b", 1.0);
        curve.point = [a, b](double t) { return Eigen::Vector2d(a * std::cos(t), b * std::sin(t)); };
        curve.derivative = [a, b](double t) {
            return Eigen::Vector2d(-a * std::sin(t), b * std::cos(t));
        };
    } else if (kind == "trig") {
        int terms = cj.value("terms", 3);
        std::mt19937_64 rng(cj.value("seed", static_cast<std::uint64_t>(seed)));
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::vector<double> ay, by, az, bz;
        for (int i = 0; i < terms; ++i) {
            ay.push_back(unif(rng) / (i + 1));
            by.push_back(unif(rng) / (i + 1));
            az.push_back(unif(rng) / (i + 1));
            bz.push_back(unif(rng) / (i + 1));
        }
        curve.point = [=](double t) {
            double y = std::cos(t), z = std::sin(t);
            for (int i = 0; i < terms; ++i) {
                y += 0.2 * (ay[static_cast<size_t>(i)] * std::cos((i + 2) * t) +
                            by[static_cast<size_t>(i)] * std::sin((i + 2) * t));
                z += 0.2 * (az[static_cast<size_t>(i)] * std::cos((i + 2) * t) +
                            bz[static_cast<size_t>(i)] * std::sin((i + 2) * t));
            }
            return Eigen::Vector2d(y, z);
        };
    } else {
        throw SchemaError("unknown curve kind: " + kind);
    }
    std::string fol = in.value("foliation", "horizontal");
    if (fol != "horizontal") throw SchemaError("unknown foliation: " + fol);
    auto params = blender::tangency_witness(curve, blender::horizontal_foliation());
    Json j;
    j["parameters"] = params;
    j["count"] = static_cast<int>(params.size());
    return j;
}

Json cmd_entropy_gap(const Json& in) {
    return io::entropy_report_to_json(entropy::entropy_gap(io::parse_horseshoe(in)));
}

Json cmd_cones(const Json& in) {
    Eigen::MatrixXd M = io::parse_matrix(in.at("linear_map"), "linear_map");
    cones::Splitting split;
    for (const auto& v : in.at("E")) split.E.push_back(v.get<int>());
    for (const auto& v : in.at("F")) split.F.push_back(v.get<int>());

    Json j;
    try {
        j["domination_time"] = domination_time(M, split);
    } catch (const Error& e) {
        j["domination_time"] = nullptr;
        j["domination_error"] = e.code();
    }

    if (in.contains("half_angle")) {
        cones::ConeField cone{split, in["half_angle"].get<double>()};
        Box domain = in.contains("domain")
                         ? io::parse_box(in["domain"], "domain")
                         : Box(Eigen::VectorXd::Constant(M.rows(), -1.0),
                               Eigen::VectorXd::Constant(M.rows(), 1.0));
        auto rep = cones::check_cone_invariance(cones::linear_sampled_map(M, domain), cone,
                                                in.value("grid_resolution", 3));
        j["cone_invariance"] =
            Json{{"ok", rep.ok}, {"worst_margin", rep.worst_margin},
                 {"directions_checked", rep.directions_checked}};
    }
    if (in.value("uniform_rate", true)) {
        try {
            auto ur = cones::uniform_rate_check(M, split.E, in.value("horizon", 200));
            j["uniform_rate"] = Json{{"C", ur.C}, {"kappa", ur.kappa}};
        } catch (const Error& e) {
            j["uniform_rate"] = nullptr;
            j["uniform_rate_error"] = e.code();
        }
    }
    return j;
}

}  // namespace

int run(const RunConfig& config) {
    auto start = std::chrono::steady_clock::now();
    try {
        Tolerances tol = parse_tolerances(config.tolerance_overrides);
        if (config.command.empty()) throw SchemaError("missing --command");
        if (config.input_path.empty()) throw SchemaError("missing --in");
        if (config.output_path.empty()) throw SchemaError("missing --out");
        Json in = io::load_json_file(config.input_path);

        if (config.command == "classify") {
            io::write_text_file(config.output_path, dump_report(cmd_classify(in)));
        } else if (config.command == "bifurcate") {
            io::write_text_file(config.output_path, dump_report(cmd_bifurcate(in)));
        } else if (config.command == "strips") {
            io::write_text_file(config.output_path, dump_report(cmd_strips(in)));
        } else if (config.command == "volume") {
            io::write_text_file(config.output_path, cmd_volume_csv(in));
        } else if (config.command == "diameter") {
            io::write_text_file(config.output_path, cmd_diameter_csv(in, config.seed));
        } else if (config.command == "unfold-sweep") {
            SweepOutput out = cmd_unfold_sweep(in, config.threads, tol);
            io::write_text_file(config.output_path, out.csv);
            io::write_text_file(config.output_path + ".summary.json", dump_report(out.summary));
        } else if (config.command == "cycle-witness") {
            io::write_text_file(config.output_path, dump_report(cmd_cycle_witness(in, tol)));
        } else if (config.command == "blender-check") {
            io::write_text_file(config.output_path, dump_report(cmd_blender_check(in, config.seed)));
        } else if (config.command == "blender-product") {
            io::write_text_file(config.output_path, dump_report(cmd_blender_product(in)));
        } else if (config.command == "tangency") {
            io::write_text_file(config.output_path, dump_report(cmd_tangency(in, config.seed)));
        } else if (config.command == "entropy-gap") {
            io::write_text_file(config.output_path, dump_report(cmd_entropy_gap(in)));
        } else if (config.command == "cones") {
            io::write_text_file(config.output_path, dump_report(cmd_cones(in)));
        } else {
            throw SchemaError("unknown command: " + config.command);
        }

        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        log_info(config.command + " finished in " + std::to_string(ms) + " ms");
        return 0;
    } catch (const SchemaError& e) {
        std::cerr << Json{{"error", "SchemaError"}, {"detail", e.what()}}.dump() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << Json{{"error", e.code()}, {"detail", e.what()}}.dump() << "\n";
        return 3;
    }
}

}  // namespace blenderlab::cli

// Python bindings for the main operations. Structured inputs (models,
// blender specs, horseshoe specs) enter as JSON strings using the same
// schemas as the CLI; small reports come back as dicts.

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "blenderlab/io.hpp"
#include "blenderlab/run.hpp"

namespace py = pybind11;
using namespace blenderlab;

namespace {

io::Json parse(const std::string& text) {
    try {
        return io::Json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("invalid JSON: ") + e.what());
    }
}

py::object json_to_py(const io::Json& j) {
    switch (j.type()) {
        case io::Json::value_t::null:
            return py::none();
        case io::Json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case io::Json::value_t::number_integer:
        case io::Json::value_t::number_unsigned:
            return py::int_(j.get<long long>());
        case io::Json::value_t::number_float:
            return py::float_(j.get<double>());
        case io::Json::value_t::string:
            return py::str(j.get<std::string>());
        case io::Json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case io::Json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
            return out;
        }
        default:
            return py::none();
    }
}

class Model {
public:
    explicit Model(const std::string& json_text)
        : model_(io::parse_local_model(parse(json_text))) {}

    int k0() const { return model_.k0(); }
    double lambda() const { return model_.lambda(); }
    double gamma() const { return model_.gamma(); }
    double leading_jacobian() const { return model_.leading_jacobian(); }

    py::object strip(int k) const { return json_to_py(io::strip_to_json(model_.strip(k), model_.gamma())); }
    py::object resized_strip(int k) const {
        return json_to_py(io::strip_to_json(model_.resized_strip(k), model_.gamma()));
    }
    py::object generic_conditions() const {
        return json_to_py(io::generic_conditions_to_json(model_.check_generic_conditions()));
    }
    std::vector<double> return_map(int k, const std::vector<double>& p) const {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
        auto q = model_.return_map(k, local_model::Point::split(v, model_.du(), model_.dx(),
                                                                model_.dy(), model_.dv()));
        Eigen::VectorXd f = q.flat();
        return std::vector<double>(f.data(), f.data() + f.size());
    }

    const local_model::LocalTangencyModel& get() const { return model_; }

private:
    local_model::LocalTangencyModel model_;
};

}  // namespace

PYBIND11_MODULE(_blenderlab, m) {
    m.doc() = "homoclinic-tangency and blender verification kernels";

    static py::exception<Error> domain_error(m, "DomainError");
    static py::exception<SchemaError> schema_error(m, "SchemaErrorException");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SchemaError& e) {
            schema_error(e.what());
        } catch (const Error& e) {
            domain_error(e.what());
        }
    });

    m.def(
        "classify",
        [](const std::vector<std::complex<double>>& multipliers, int u_index) {
            return json_to_py(io::classification_to_json(spectra::classify(multipliers, u_index)));
        },
        py::arg("multipliers"), py::arg("u_index"));

    m.def(
        "saddle_node_angle",
        [](double a11, double a12, double a21, double a22) {
            Eigen::Matrix2d A;
            A << a11, a12, a21, a22;
            return spectra::saddle_node_angle(A).phi0;
        },
        py::arg("a11"), py::arg("a12"), py::arg("a21"), py::arg("a22"));

    m.def(
        "rotation_eigenvalues",
        [](double a11, double a12, double a21, double a22, double phi) {
            Eigen::Matrix2d A;
            A << a11, a12, a21, a22;
            auto [e1, e2] = spectra::rotation_eigenvalues(A, phi);
            return std::make_pair(e1, e2);
        },
        py::arg("a11"), py::arg("a12"), py::arg("a21"), py::arg("a22"), py::arg("phi"));

    m.def(
        "entropy_gap",
        [](const std::string& spec_json) {
            return json_to_py(io::entropy_report_to_json(entropy::entropy_gap(io::parse_horseshoe(parse(spec_json)))));
        },
        py::arg("spec_json"));

    m.def(
        "covering_criterion",
        [](const std::string& spec_json) {
            auto rep = blender::covering_criterion(io::parse_blender(parse(spec_json)));
            py::dict out;
            out["ok"] = rep.ok;
            out["margin"] = rep.margin;
            return out;
        },
        py::arg("spec_json"));

    m.def(
        "verify_superposition",
        [](const std::string& spec_json, const std::vector<double>& central,
           const std::vector<double>& uu, int depth) {
            auto spec = io::parse_blender(parse(spec_json));
            Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(central.data(),
                                                                  static_cast<Eigen::Index>(central.size()));
            Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(uu.data(),
                                                                  static_cast<Eigen::Index>(uu.size()));
            auto w = blender::verify_superposition(spec, blender::vertical_disk(spec, c, u), depth);
            return json_to_py(io::witness_to_json(w));
        },
        py::arg("spec_json"), py::arg("central"), py::arg("uu"), py::arg("depth") = 40);

    m.def(
        "tangency_circle",
        []() {
            blender::ClosedCurve circle;
            circle.point = [](double t) { return Eigen::Vector2d(std::cos(t), std::sin(t)); };
            circle.derivative = [](double t) { return Eigen::Vector2d(-std::sin(t), std::cos(t)); };
            return blender::tangency_witness(circle, blender::horizontal_foliation());
        });

    m.def(
        "domination_time",
        [](const std::vector<std::vector<double>>& matrix, const std::vector<int>& E,
           const std::vector<int>& F) {
            Eigen::MatrixXd M(matrix.size(), matrix.empty() ? 0 : matrix[0].size());
            for (size_t i = 0; i < matrix.size(); ++i)
                for (size_t j = 0; j < matrix[i].size(); ++j)
                    M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = matrix[i][j];
            return cones::domination_time(M, {E, F});
        },
        py::arg("matrix"), py::arg("E"), py::arg("F"));

    py::class_<Model>(m, "Model")
        .def(py::init<const std::string&>(), py::arg("json_text"))
        .def_property_readonly("k0", &Model::k0)
        .def_property_readonly("lam", &Model::lambda)
        .def_property_readonly("gamma", &Model::gamma)
        .def_property_readonly("leading_jacobian", &Model::leading_jacobian)
        .def("strip", &Model::strip, py::arg("k"))
        .def("resized_strip", &Model::resized_strip, py::arg("k"))
        .def("generic_conditions", &Model::generic_conditions)
        .def("return_map", &Model::return_map, py::arg("k"), py::arg("point"));

    m.def(
        "run",
        [](const std::string& command, const std::string& input_path, const std::string& output_path,
           std::uint64_t seed, int threads) {
            cli::RunConfig cfg;
            cfg.command = command;
            cfg.input_path = input_path;
            cfg.output_path = output_path;
            cfg.seed = seed;
            cfg.threads = threads;
            return cli::run(cfg);
        },
        py::arg("command"), py::arg("input_path"), py::arg("output_path"), py::arg("seed") = 0,
        py::arg("threads") = 1);
}

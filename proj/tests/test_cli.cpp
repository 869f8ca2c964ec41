#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "blenderlab/run.hpp"

using blenderlab::cli::RunConfig;
using blenderlab::cli::run;

namespace {

const std::string tmp = BLENDERLAB_TMP_DIR;

std::string write_input(const std::string& name, const std::string& content) {
    std::string path = tmp + "/" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig cfg(const std::string& command, const std::string& in, const std::string& out) {
    RunConfig c;
    c.command = command;
    c.input_path = in;
    c.output_path = tmp + "/" + out;
    return c;
}

}  // namespace

TEST_CASE("classify command writes a report and exits 0") {
    std::string in = write_input("cli_spec.json", R"({"multipliers": [0.5, 2.0], "u_index": 1})");
    RunConfig c = cfg("classify", in, "cli_spec_report.json");
    CHECK(run(c) == 0);
    std::string report = slurp(c.output_path);
    CHECK(report.find("\"leading_jacobian\": 1.0") != std::string::npos);
    CHECK(report.find("\"simple\": true") != std::string::npos);
}

TEST_CASE("schema errors exit 2, domain errors exit 3") {
    std::string bad = write_input("cli_bad.json", R"({"wrong": true})");
    CHECK(run(cfg("classify", bad, "cli_bad_report.json")) == 2);

    std::string unit = write_input("cli_unit.json", R"({"multipliers": [1.0, 2.0], "u_index": 1})");
    CHECK(run(cfg("classify", unit, "cli_unit_report.json")) == 3);

    CHECK(run(cfg("no-such-command", bad, "x.json")) == 2);

    std::string missing;
    RunConfig c = cfg("classify", tmp + "/does_not_exist.json", "x.json");
    CHECK(run(c) == 2);
}

TEST_CASE("unknown tolerance overrides are schema errors") {
    std::string in = write_input("cli_spec2.json", R"({"multipliers": [0.5, 2.0], "u_index": 1})");
    RunConfig c = cfg("classify", in, "cli_spec2_report.json");
    c.tolerance_overrides = R"({"no_such_tolerance": 1e-5})";
    CHECK(run(c) == 2);
    c.tolerance_overrides = R"({"saddle_residual_max": 1e-9})";
    CHECK(run(c) == 0);
}

TEST_CASE("entropy-gap reports are byte-identical across runs") {
    std::string in = write_input(
        "cli_entropy.json",
        R"({"matrix": [[1,1],[1,1]], "rates": [[0.9,0.8,4.0],[0.9,0.8,4.0]], "m": 2, "n": 1, "r": 2.0})");
    RunConfig a = cfg("entropy-gap", in, "cli_entropy_a.json");
    RunConfig b = cfg("entropy-gap", in, "cli_entropy_b.json");
    CHECK(run(a) == 0);
    CHECK(run(b) == 0);
    CHECK(slurp(a.output_path) == slurp(b.output_path));
    CHECK(slurp(a.output_path).find("\"cs_ok\": true") != std::string::npos);
}

TEST_CASE("empty sweep ranges produce a header-only CSV") {
    std::string in = write_input("cli_sweep_empty.json", R"({
        "model": {
            "dims": {"m": 1, "n": 1, "m_s": 1, "n_u": 1},
            "blocks": {"B": [[0.75]], "C": [[2.0]]},
            "W": {"lo": [-3, -3], "hi": [3, 3]},
            "Y_minus": {"y": [1.0]},
            "Y_plus": {"x": [1.0]},
            "boxes": {"pi_plus": {"lo": [0.9, -0.1], "hi": [1.1, 0.1]},
                       "pi_minus": {"lo": [-0.3, 0.9], "hi": [0.3, 1.1]}},
            "transition": {"B2": [[0.5]], "C2": [[1.0]], "B3": [[1.0]], "C3": 1.0},
            "rho": 0.04
        },
        "k": [1, 1],
        "t": {"lo": 0.0, "hi": 0.001, "steps": 3}
    })");
    RunConfig c = cfg("unfold-sweep", in, "cli_sweep_empty.csv");
    CHECK(run(c) == 0);
    std::string csv = slurp(c.output_path);
    CHECK(csv == "k,t,alpha,beta,u_index,residual,x0,y0\n");
}

TEST_CASE("blender-check reports a failing covering with exit 0") {
    std::string in = write_input("cli_blender_gap.json", R"({
        "dims": {"ss": 1, "cs": 1, "uu": 1},
        "domain": {"lo": [0, 0, 0], "hi": [1, 1, 1]},
        "branches": [
            {"linear": {"ss": [[0.4]], "central": [[0.4]], "uu": [[2.1739130434782608]]},
             "offset": [0.1, 0.0, -0.043478260869565216],
             "domain": {"lo": [0, 0, 0.02], "hi": [1, 1, 0.48]}},
            {"linear": {"ss": [[0.4]], "central": [[0.4]], "uu": [[2.1739130434782608]]},
             "offset": [0.5, 0.6, -1.1304347826086956],
             "domain": {"lo": [0, 0, 0.52], "hi": [1, 1, 0.98]}}
        ],
        "distinctive_branch": 0
    })");
    RunConfig c = cfg("blender-check", in, "cli_blender_gap.json.out");
    CHECK(run(c) == 0);
    std::string report = slurp(c.output_path);
    CHECK(report.find("\"ok\": false") != std::string::npos);
    CHECK(report.find("-0.2") != std::string::npos);
}

TEST_CASE("bifurcate command reports the closed-form angle") {
    std::string in = write_input("cli_bif.json", R"({"matrix": [[2.0, 0.0], [0.0, 0.5]]})");
    RunConfig c = cfg("bifurcate", in, "cli_bif_report.json");
    CHECK(run(c) == 0);
    std::string report = slurp(c.output_path);
    CHECK(report.find("\"cos_phi0\": 0.8") != std::string::npos);
}

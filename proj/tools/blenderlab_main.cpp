// blenderlab command-line front end.
//
//   blenderlab --command classify --in spectrum.json --out report.json
//
// Commands: classify, bifurcate, strips, volume, diameter, unfold-sweep,
// cycle-witness, blender-check, blender-product, tangency, entropy-gap,
// cones. Set BLENDERLAB_LOG=info|debug for progress on stderr.

#include <CLI11.hpp>

#include "blenderlab/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"blenderlab: tangency, unfolding and blender experiments"};

    blenderlab::cli::RunConfig cfg;
    app.add_option("--command", cfg.command,
                   "one of classify|bifurcate|strips|volume|diameter|unfold-sweep|"
                   "cycle-witness|blender-check|blender-product|tangency|entropy-gap|cones")
        ->required();
    app.add_option("--in", cfg.input_path, "input JSON file")->required();
    app.add_option("--out", cfg.output_path, "output report path (JSON or CSV)")->required();
    app.add_option("--seed", cfg.seed, "seed for randomized batteries");
    app.add_option("--threads", cfg.threads, "worker count for sweeps")->check(CLI::PositiveNumber);
    app.add_option("--tolerance-overrides", cfg.tolerance_overrides,
                   "JSON object, e.g. {\"saddle_residual_max\":1e-9}");

    CLI11_PARSE(app, argc, argv);
    return blenderlab::cli::run(cfg);
}

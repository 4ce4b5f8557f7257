#include "hybridmem/fixtures.hpp"
#include "hybridmem/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

int main(int argc, char** argv) {
    using namespace hybridmem;

    CLI::App app{"Memory-policy tracking harness (set HYBRIDMEM_WORKERS for the worker count)"};
    app.require_subcommand(1);

    std::string config, out;
    std::vector<std::string> policies, overrides;
    auto* run = app.add_subcommand("run", "run the policy x scene matrix");
    run->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    run->add_option("--out", out, "output directory")->required();
    run->add_option("--policy", policies, "restrict to this policy (repeatable)");
    run->add_option("--set", overrides, "override a config key, e.g. policy.tau_mask=0.6 (repeatable)");

    std::string oracle_out;
    auto* oracle = app.add_subcommand("oracle", "write brute-force expected-value files");
    oracle->add_option("--out", oracle_out, "output directory")->required();

    std::string baseline, candidate;
    double tol = 0.0;
    auto* compare = app.add_subcommand("compare", "diff two metrics CSVs");
    compare->add_option("baseline", baseline)->required();
    compare->add_option("candidate", candidate)->required();
    compare->add_option("--tol", tol, "absolute tolerance per cell")->check(CLI::NonNegativeNumber);

    std::string family = "distractor", gen_out;
    int index = 0, frames = 0, feature_cells = 0, proto_dim = 0;
    bool traces = false;
    auto* gen = app.add_subcommand("gen", "write one suite sequence as an observation fixture");
    gen->add_option("--family", family)->check(CLI::IsMember({"occlusion", "fast_motion", "distractor"}));
    gen->add_option("--index", index)->check(CLI::NonNegativeNumber);
    gen->add_option("--frames", frames, "truncate the scene to this many frames")->check(CLI::PositiveNumber);
    gen->add_option("--feature-cells", feature_cells)->check(CLI::PositiveNumber);
    gen->add_option("--proto-dim", proto_dim)->check(CLI::PositiveNumber);
    gen->add_flag("--traces", traces, "also write traces/<policy>.jsonl under default settings");
    gen->add_option("--out", gen_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (*run) return cmd_run(config, out, policies, overrides, worker_count_from_env());
    if (*oracle) return cmd_oracle(oracle_out);
    if (*compare) return cmd_compare(baseline, candidate, tol);
    if (*gen) {
        for (const auto& e : suite_standard(index + 1)) {
            if (e.family != family || e.scene.seed % 1000 != static_cast<std::uint64_t>(index)) continue;
            SceneConfig scene = e.scene;
            if (frames > 0) {
                scene.frames = frames;
                std::erase_if(scene.occlusions, [&](const auto& iv) { return iv.first >= frames; });
                for (auto& iv : scene.occlusions) iv.second = std::min(iv.second, frames);
            }
            if (feature_cells > 0) scene.feature_cells = feature_cells;
            if (proto_dim > 0) scene.proto_dim = proto_dim;
            try {
                scene.validate();
            } catch (const std::exception& ex) {
                std::cerr << "error: " << ex.what() << '\n';
                return 2;
            }
            const auto rec = gen_sequence(scene);
            write_sequence_fixture(rec, gen_out);
            if (traces) {
                const HarnessConfig defaults;
                for (const PolicyKind p : kAllPolicies) {
                    const auto run = run_sequence(rec, tracker_config(defaults, p), defaults.read_path, true, true);
                    write_file_atomic(std::filesystem::path(gen_out) / "traces" / (std::string(policy_name(p)) + ".jsonl"),
                                      run.log);
                }
            }
            std::cout << "wrote " << family << " #" << index << " to " << gen_out << '\n';
            return 0;
        }
        std::cerr << "error: no such sequence\n";
        return 2;
    }
    return 0;
}

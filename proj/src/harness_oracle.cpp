#include "hybridmem/fixtures.hpp"
#include "hybridmem/harness.hpp"
#include "hybridmem/rng.hpp"

#include "oracles.hpp"

#include <iostream>

namespace hybridmem {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kOracleSeed = 0x0ddba11;

ordered_json rect_json(const oracle::Rect& r) { return {r.x, r.y, r.w, r.h}; }

ordered_json opt_rect_json(const std::optional<oracle::Rect>& r) {
    return r ? rect_json(*r) : ordered_json(nullptr);
}

ordered_json geometry_file() {
    CounterRng rng(kOracleSeed, 1);
    ordered_json boxes = ordered_json::array();
    for (int i = 0; i < 1000; ++i) {
        const int subdiv = i % 2 == 0 ? 1 : 4;
        const auto a = oracle::random_box(rng, 64, subdiv);
        const auto b = oracle::random_box(rng, 64, subdiv);
        boxes.push_back({{"subdiv", subdiv}, {"a", rect_json(a)}, {"b", rect_json(b)},
                         {"iou", oracle::raster_box_iou(a, b, subdiv)}});
    }
    CounterRng mrng(kOracleSeed, 2);
    ordered_json masks = ordered_json::array();
    for (int i = 0; i < 200; ++i) {
        const auto a = oracle::random_mask(mrng, 32, 32);
        const auto b = oracle::random_mask(mrng, 32, 32);
        masks.push_back({{"iou", oracle::dense_iou(a, b)},
                         {"area_a", oracle::dense_area(a)},
                         {"area_b", oracle::dense_area(b)},
                         {"intersection", oracle::dense_intersection(a, b)},
                         {"bbox_a", opt_rect_json(oracle::dense_bbox(a))}});
    }
    return {{"mask_seed", kOracleSeed}, {"mask_stream", 2}, {"mask_size", 32}, {"boxes", boxes}, {"masks", masks}};
}

ordered_json kalman_file() {
    CounterRng rng(kOracleSeed, 3);
    const MotionConfig m;
    ordered_json traces = ordered_json::array();
    for (int i = 0; i < 10; ++i) {
        const auto tr = oracle::random_kalman_trace(rng, 50);
        oracle::DenseKalman kf(tr.init, m.process_noise, m.measurement_noise, m.initial_cov_scale);
        ordered_json zs = ordered_json::array(), means = ordered_json::array();
        for (const auto& z : tr.measurements) {
            kf.predict();
            if (z) kf.update(*z);
            zs.push_back(opt_rect_json(z));
            means.push_back(kf.mean());
        }
        traces.push_back({{"init", rect_json(tr.init)}, {"measurements", zs}, {"means", means}, {"final_cov", kf.cov()}});
    }
    return {{"process_noise", m.process_noise},
            {"measurement_noise", m.measurement_noise},
            {"initial_cov_scale", m.initial_cov_scale},
            {"traces", traces}};
}

ordered_json pathways_file() {
    CounterRng rng(kOracleSeed, 4);
    const double eps = PolicyConfig{}.epsilon;
    ordered_json cases = ordered_json::array();
    for (int t = 1; t <= 6; ++t) {
        for (int i = 0; i < 20; ++i) {
            const auto scores = oracle::random_pathway_scores(rng, t);
            const auto best = oracle::enumerate_best_pathway(scores, eps);
            cases.push_back({{"s_mask", scores}, {"proposals", best.proposals}, {"score", best.score}});
        }
    }
    return {{"epsilon", eps}, {"pathway_counts", {1, 2, 3}}, {"cases", cases}};
}

ordered_json topk_file() {
    CounterRng rng(kOracleSeed, 5);
    ordered_json cases = ordered_json::array();
    for (int i = 0; i < 200; ++i) {
        const auto c = oracle::random_topk_case(rng);
        ordered_json window = ordered_json::array();
        for (const auto& w : c.window) window.push_back({{"frame", w.frame}, {"proto", w.proto}});
        cases.push_back({{"window", window},
                         {"first", {{"frame", c.first_frame}, {"proto", c.first_proto}}},
                         {"prev", {{"frame", c.prev_frame}, {"proto", c.prev_proto}}},
                         {"alpha", c.alpha},
                         {"k_ram", c.k_ram},
                         {"ram_frames", oracle::topk_ram_frames(c.window, c.first_proto, c.prev_proto, c.first_frame,
                                                                c.prev_frame, c.alpha, c.k_ram)}});
    }
    return {{"cases", cases}};
}

ordered_json frame3_json(const oracle::Frame3& f) {
    ordered_json cands = ordered_json::array();
    for (const auto& c : f.c) cands.push_back({{"box", opt_rect_json(c.box)}, {"s_mask", c.s_mask}, {"s_obj", c.s_obj}});
    return {{"candidates", cands}, {"o", f.o}, {"coarse", opt_rect_json(f.coarse)}, {"fine", opt_rect_json(f.fine)}};
}

ordered_json choice_json(const oracle::Choice& c) {
    return {{"index", c.index ? ordered_json(*c.index) : ordered_json(nullptr)}, {"value", c.value}, {"used_fine", c.used_fine}};
}

ordered_json selection_file() {
    CounterRng rng(kOracleSeed, 6);
    const PolicyConfig p;
    ordered_json frames = ordered_json::array();
    for (int i = 0; i < 1000; ++i) {
        const auto f = oracle::random_frame3(rng);
        ordered_json j = frame3_json(f);
        j["samurai"] = choice_json(oracle::brute_samurai(f, p.alpha));
        j["him"] = choice_json(oracle::brute_him(f, p.alpha_him, p.beta, p.tau_conf));
        frames.push_back(j);
    }
    return {{"alpha", p.alpha}, {"alpha_him", p.alpha_him}, {"beta", p.beta}, {"tau_conf", p.tau_conf}, {"frames", frames}};
}

ordered_json predicates_file() {
    CounterRng rng(kOracleSeed, 7);
    const DrmConfig d;
    const PolicyConfig p;
    constexpr int kSize = 64;
    ordered_json drm = ordered_json::array();
    for (int i = 0; i < 300; ++i) {
        std::array<oracle::Rect, 3> boxes;
        std::array<oracle::Dense, 3> dense;
        for (int k = 0; k < 3; ++k) {
            boxes[k] = oracle::random_box(rng, kSize, 2);
            if (k > 0 && rng.bernoulli(0.3)) boxes[k] = boxes[k - 1];
            dense[k] = oracle::dense_rectangle(kSize, kSize, boxes[k]);
        }
        const int chosen = rng.uniform_int(0, 2);
        const double s_mask = rng.bernoulli(0.3) ? d.tau_q : rng.uniform();
        std::vector<std::int64_t> ram_areas(rng.uniform_int(0, 6));
        for (auto& a : ram_areas) a = rng.bernoulli(0.1) ? 0 : rng.uniform_int(1, 1200);
        const int frame = rng.uniform_int(1, 60);
        std::optional<int> last_drm;
        if (rng.bernoulli(0.7)) last_drm = rng.uniform_int(std::max(1, frame - 10), frame - 1 < 1 ? 1 : frame - 1);
        if (last_drm && *last_drm >= frame) last_drm.reset();
        const auto g = oracle::replay_drm(dense, chosen, s_mask, ram_areas, last_drm, frame, d.tau_div, d.tau_q,
                                          d.area_lo, d.area_hi, d.min_gap);
        ordered_json bj = ordered_json::array();
        for (const auto& b : boxes) bj.push_back(rect_json(b));
        drm.push_back({{"grid", kSize},
                       {"boxes", bj},
                       {"chosen", chosen},
                       {"s_mask", s_mask},
                       {"ram_areas", ram_areas},
                       {"frame", frame},
                       {"last_drm_frame", last_drm ? ordered_json(*last_drm) : ordered_json(nullptr)},
                       {"expect",
                        {{"disagreement", g.disagreement},
                         {"quality", g.quality},
                         {"area_consistent", g.area_consistent},
                         {"sparse", g.sparse},
                         {"admitted", g.admitted()}}}});
    }

    ordered_json dam = ordered_json::array();
    for (int i = 0; i < 200; ++i) {
        const bool present = rng.bernoulli(0.8);
        const int last = rng.uniform_int(0, 50);
        const int frame = last + rng.uniform_int(1, 10);
        dam.push_back({{"present", present}, {"frame", frame}, {"last_ram_frame", last},
                       {"reason", oracle::replay_dam(present, frame, last, p.delta_ram)}});
    }

    ordered_json samurai = ordered_json::array();
    static constexpr double kLevels[] = {0.0, 0.3, 0.5, 0.7, 1.0};
    for (int i = 0; i < 200; ++i) {
        auto level = [&]() { return rng.bernoulli(0.4) ? kLevels[rng.uniform_int(0, 4)] : rng.uniform(); };
        const double s_mask = level(), s_kf = level();
        const double s_obj = rng.uniform(-1.0, 1.0);
        samurai.push_back({{"s_mask", s_mask}, {"s_obj", s_obj}, {"s_kf", s_kf},
                           {"reason", oracle::replay_samurai(s_mask, s_obj, s_kf, p.tau_mask, p.tau_obj, p.tau_kf)}});
    }

    ordered_json fifo = ordered_json::array();
    for (int i = 0; i < 50; ++i) {
        std::vector<int> frames;
        const int n = rng.uniform_int(0, 30);
        for (int f = 1; f <= n; ++f) frames.push_back(f);
        const int k = rng.uniform_int(1, 8);
        fifo.push_back({{"frames", frames}, {"k_ram", k}, {"kept", oracle::keep_last(frames, k)}});
    }
    return {{"drm", drm}, {"dam", dam}, {"samurai", samurai}, {"fifo", fifo}};
}

}  // namespace

ordered_json directional_anchors(int workers) {
    HarnessConfig cfg;
    cfg.families = {"distractor"};
    cfg.frame_logs = false;
    const auto rows = run_matrix(cfg, workers);
    ordered_json j;
    j["family"] = "distractor";
    j["seeds"] = cfg.seeds_per_family;
    ordered_json ao;
    ordered_json per_seed;
    for (const PolicyKind k : cfg.policies) {
        double sum = 0.0;
        std::size_t n = 0;
        ordered_json seeds = ordered_json::array();
        for (const auto& r : rows) {
            if (r.policy != policy_name(k)) continue;
            sum += r.m.ao;
            ++n;
            seeds.push_back(r.m.ao);
        }
        ao[policy_name(k)] = sum / static_cast<double>(n);
        per_seed[policy_name(k)] = seeds;
    }
    j["mean_ao"] = ao;
    j["per_seed_ao"] = per_seed;
    return j;
}

ordered_json suite_file() {
    const auto suite = suite_standard();
    ordered_json counts = ordered_json::object();
    ordered_json first = ordered_json::object();
    for (const auto& e : suite) {
        if (!counts.contains(e.family)) {
            counts[e.family] = 0;
            first[e.family] = {{"seed", e.scene.seed}, {"digest", sequence_digest(gen_sequence(e.scene))}};
        }
        counts[e.family] = counts[e.family].get<int>() + 1;
    }
    return {{"version", kSuiteVersion}, {"entries", suite.size()}, {"families", counts},
            {"digest", suite_digest(suite)}, {"first_sequences", first}};
}

void write_oracle_files(const std::filesystem::path& out_dir) {
    write_file_atomic(out_dir / "geometry.json", geometry_file().dump(1) + '\n');
    write_file_atomic(out_dir / "kalman.json", kalman_file().dump(1) + '\n');
    write_file_atomic(out_dir / "pathways.json", pathways_file().dump(1) + '\n');
    write_file_atomic(out_dir / "topk.json", topk_file().dump(1) + '\n');
    write_file_atomic(out_dir / "selection.json", selection_file().dump(1) + '\n');
    write_file_atomic(out_dir / "predicates.json", predicates_file().dump(1) + '\n');
    write_file_atomic(out_dir / "suite.json", suite_file().dump(2) + '\n');
}

int cmd_oracle(const std::filesystem::path& out_dir) {
    try {
        write_oracle_files(out_dir);
        write_file_atomic(out_dir / "anchors.json", directional_anchors(worker_count_from_env()).dump(2) + '\n');
        std::cout << "wrote oracle files to " << out_dir.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace hybridmem

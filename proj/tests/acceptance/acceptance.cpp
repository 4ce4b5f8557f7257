#include "hybridmem/digest.hpp"
#include "hybridmem/fixtures.hpp"
#include "hybridmem/harness.hpp"
#include "hybridmem/metrics.hpp"
#include "hybridmem/motion.hpp"
#include "hybridmem/pathways.hpp"
#include "hybridmem/rng.hpp"
#include "hybridmem/selection.hpp"

#include "oracles.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

using namespace hybridmem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    long checks = 0;
    std::string detail;

    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

const fs::path kFixtures = HYBRIDMEM_FIXTURE_DIR;

nlohmann::json load_oracle(const char* name) { return nlohmann::json::parse(read_file(kFixtures / "oracle" / name)); }

BBox to_bbox(const oracle::Rect& r) { return {r.x, r.y, r.w, r.h}; }

oracle::Rect rect_of(const nlohmann::json& j) { return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()}; }

Prototype to_proto(const std::vector<double>& v) {
    return Eigen::Map<const Prototype>(v.data(), static_cast<Eigen::Index>(v.size()));
}

BitMask to_mask(const oracle::Dense& d) { return BitMask::from_dense(d.width, d.height, d.px); }

std::string num(double v) { return format_real(v); }

// --- 1 ---------------------------------------------------------------------------

Outcome geometry() {
    Outcome out;
    CounterRng rng(0xacce55, 1);
    for (int i = 0; i < 10000; ++i) {
        const int subdiv = i % 3 == 0 ? 1 : (i % 3 == 1 ? 2 : 4);
        const auto a = oracle::random_box(rng, 48, subdiv), b = oracle::random_box(rng, 48, subdiv);
        const double lib = box_iou(to_bbox(a), to_bbox(b)), ref = oracle::raster_box_iou(a, b, subdiv);
        ++out.checks;
        if (!(std::abs(lib - ref) <= 1e-9)) out.fail("box pair " + std::to_string(i) + ": " + num(lib) + " vs " + num(ref));
    }
    CounterRng mrng(0xacce55, 2);
    for (int i = 0; i < 1000; ++i) {
        const auto da = oracle::random_mask(mrng, 32, 32), db = oracle::random_mask(mrng, 32, 32);
        const auto a = to_mask(da), b = to_mask(db);
        ++out.checks;
        if (mask_iou(a, b) != oracle::dense_iou(da, db)) out.fail("mask pair " + std::to_string(i));
        if (mask_area(a) != oracle::dense_area(da)) out.fail("mask area " + std::to_string(i));
    }
    const auto j = load_oracle("geometry.json");
    for (const auto& c : j.at("boxes")) {
        ++out.checks;
        if (!(std::abs(box_iou(to_bbox(rect_of(c.at("a"))), to_bbox(rect_of(c.at("b")))) - c.at("iou").get<double>()) <= 1e-9)) {
            out.fail("geometry.json box case");
        }
    }
    return out;
}

// --- 2 ---------------------------------------------------------------------------

Outcome kalman() {
    Outcome out;
    const MotionConfig cfg;
    CounterRng rng(0xacce55, 3);
    for (int i = 0; i < 100; ++i) {
        const auto tr = oracle::random_kalman_trace(rng, 50);
        KalmanBoxFilter<double> f(to_bbox(tr.init), cfg);
        oracle::DenseKalman o(tr.init, cfg.process_noise, cfg.measurement_noise, cfg.initial_cov_scale);
        for (std::size_t t = 0; t < tr.measurements.size(); ++t) {
            f.predict();
            o.predict();
            if (const auto& z = tr.measurements[t]) {
                f.update(to_bbox(*z), static_cast<int>(t + 1));
                o.update(*z);
            }
            ++out.checks;
            for (int k = 0; k < 8; ++k) {
                if (!(std::abs(f.state().mean(k) - o.mean()[k]) <= 1e-9)) {
                    out.fail("trace " + std::to_string(i) + " step " + std::to_string(t) + " component " + std::to_string(k));
                }
            }
            for (int k = 0; k < 64; ++k) {
                if (!(std::abs(f.state().cov(k / 8, k % 8) - o.cov()[k]) <= 1e-9)) out.fail("covariance, trace " + std::to_string(i));
            }
        }
    }
    return out;
}

// --- 3 ---------------------------------------------------------------------------

const BitMask kInit = BitMask::rectangle(64, 64, {10, 10, 12, 12});

const Pathway& beam_best(PathwaySet& set, const std::vector<std::array<double, 3>>& scores, std::size_t capacity,
                         const PolicyConfig& cfg) {
    set = pathway_start(bank_new(kInit, 6, 0), capacity);
    for (std::size_t t = 0; t < scores.size(); ++t) {
        FrameObservation obs;
        obs.frame_idx = static_cast<int>(t + 1);
        obs.o = 1.0;
        for (int k = 0; k < 3; ++k) {
            obs.proposals[k] = Proposal::make(BitMask::rectangle(64, 64, {10.0 + 20 * k, 10, 12, 12}), scores[t][k], 1.0);
        }
        const auto cands = pathway_expand(set, obs, cfg.epsilon);
        set = pathway_prune(set, cands, std::span<const FrameObservation>(&obs, 1), capacity, cfg);
    }
    return pathway_best(set);
}

bool same_best(const Pathway& got, const std::vector<int>& proposals, double score) {
    if (got.trajectory.size() != proposals.size() || got.score != score) return false;
    for (std::size_t t = 0; t < proposals.size(); ++t) {
        if (got.trajectory[t].proposal_index != static_cast<std::size_t>(proposals[t])) return false;
    }
    return true;
}

Outcome pathways() {
    Outcome out;
    const PolicyConfig cfg;
    CounterRng rng(0xacce55, 4);
    PathwaySet set;
    for (int t = 1; t <= 6; ++t) {
        for (int i = 0; i < 200; ++i) {
            const auto scores = oracle::random_pathway_scores(rng, t);
            const auto expect = oracle::enumerate_best_pathway(scores, cfg.epsilon);
            for (std::size_t p = 1; p <= 3; ++p) {
                ++out.checks;
                if (!same_best(beam_best(set, scores, p, cfg), expect.proposals, expect.score)) {
                    out.fail("T=" + std::to_string(t) + " P=" + std::to_string(p) + " case " + std::to_string(i));
                }
            }
        }
    }
    const auto j = load_oracle("pathways.json");
    for (const int p : j.at("pathway_counts").get<std::vector<int>>()) {
        for (const auto& c : j.at("cases")) {
            ++out.checks;
            const auto scores = c.at("s_mask").get<std::vector<std::array<double, 3>>>();
            if (!same_best(beam_best(set, scores, static_cast<std::size_t>(p), cfg), c.at("proposals").get<std::vector<int>>(),
                           c.at("score").get<double>())) {
                out.fail("pathways.json case, P=" + std::to_string(p));
            }
        }
    }
    return out;
}

// --- 4 ---------------------------------------------------------------------------

MemoryEntry dated(int frame) {
    MemoryEntry e;
    e.frame_idx = frame;
    return e;
}

std::vector<int> samite_frames(const oracle::TopKCase& c) {
    std::vector<WindowFrame> window;
    for (const auto& w : c.window) window.push_back({w.frame, to_proto(w.proto)});
    const auto scores = samite_calibrate(window, to_proto(c.first_proto), to_proto(c.prev_proto), c.alpha);
    std::vector<ScoredEntry> scored;
    for (const auto& s : scores) scored.push_back({dated(s.frame_idx), s.score});
    std::vector<int> frames;
    for (const auto& e : samite_select_ram(scored, c.k_ram, dated(c.first_frame), dated(c.prev_frame))) frames.push_back(e.frame_idx);
    return frames;
}

FrameObservation frame3_obs(const oracle::Frame3& f) {
    FrameObservation obs;
    obs.frame_idx = 1;
    obs.o = f.o;
    for (int k = 0; k < 3; ++k) {
        const auto& c = f.c[k];
        obs.proposals[k] = Proposal::make(c.box ? BitMask::rectangle(96, 96, to_bbox(*c.box)) : BitMask(96, 96), c.s_mask, c.s_obj);
    }
    return obs;
}

std::optional<BBox> opt(const std::optional<oracle::Rect>& r) {
    if (!r) return std::nullopt;
    return to_bbox(*r);
}

Outcome selection() {
    Outcome out;
    const PolicyConfig cfg;
    CounterRng rng(0xacce55, 5);
    for (int i = 0; i < 1000; ++i) {
        const auto c = oracle::random_topk_case(rng);
        ++out.checks;
        const auto expect = oracle::topk_ram_frames(c.window, c.first_proto, c.prev_proto, c.first_frame, c.prev_frame, c.alpha, c.k_ram);
        if (samite_frames(c) != expect) out.fail("Top-K window " + std::to_string(i));
    }
    CounterRng frng(0xacce55, 6);
    for (int i = 0; i < 10000; ++i) {
        const auto f = oracle::random_frame3(frng);
        out.checks += 2;
        const auto obs = frame3_obs(f);
        const auto s = select_samurai(obs, opt(f.coarse), cfg.alpha);
        const auto bs = oracle::brute_samurai(f, cfg.alpha);
        const bool s_ok = bs.index ? (s.index && *s.index == static_cast<std::size_t>(*bs.index) && s.s_kf == bs.value) : !s.index;
        if (!s_ok) out.fail("SAMURAI frame " + std::to_string(i));

        const auto fine = opt(f.fine);
        const auto h = select_him(obs, opt(f.coarse), [&]() { return fine; }, cfg);
        const auto bh = oracle::brute_him(f, cfg.alpha_him, cfg.beta, cfg.tau_conf);
        const bool idx_ok = bh.index ? (h.index && *h.index == static_cast<std::size_t>(*bh.index)) : !h.index;
        if (!idx_ok || h.used_fine != bh.used_fine || h.s_conf != bh.value) out.fail("HiM2SAM frame " + std::to_string(i));
    }
    const auto topk = load_oracle("topk.json");
    for (const auto& c : topk.at("cases")) {
        ++out.checks;
        oracle::TopKCase k;
        for (const auto& w : c.at("window")) k.window.push_back({w.at("frame"), w.at("proto").get<std::vector<double>>()});
        k.first_frame = c.at("first").at("frame");
        k.first_proto = c.at("first").at("proto").get<std::vector<double>>();
        k.prev_frame = c.at("prev").at("frame");
        k.prev_proto = c.at("prev").at("proto").get<std::vector<double>>();
        k.alpha = c.at("alpha");
        k.k_ram = c.at("k_ram");
        if (samite_frames(k) != c.at("ram_frames").get<std::vector<int>>()) out.fail("topk.json case");
    }
    return out;
}

// --- 5, 6 ------------------------------------------------------------------------

FrameObservation fuzz_obs(CounterRng& rng, int frame) {
    FrameObservation obs;
    obs.frame_idx = frame;
    const bool absent = rng.bernoulli(0.1);
    obs.o = absent ? -0.5 : rng.uniform(-0.2, 1.0);
    const double cx = 20 + rng.uniform_int(-4, 4), cy = 20 + rng.uniform_int(-4, 4);
    for (int k = 0; k < 3; ++k) {
        BBox b = k == 0 ? BBox{cx, cy, 14, 12}
                        : BBox{double(rng.uniform_int(0, 50)), double(rng.uniform_int(0, 50)), double(rng.uniform_int(4, 16)),
                               double(rng.uniform_int(4, 16))};
        if (k > 0 && rng.bernoulli(0.2)) b = BBox{cx, cy, 14, 12};
        const BitMask m = absent ? BitMask(64, 64) : BitMask::rectangle(64, 64, b);
        obs.proposals[k] = Proposal::make(m, absent ? 0.0 : rng.uniform(), absent ? -0.5 : rng.uniform(-0.3, 1.0));
    }
    if (!absent) {
        FeatureGrid g;
        g.width = g.height = 4;
        g.values.resize(16, 3);
        for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values.data()[i] = double(rng.uniform_int(-2, 2));
        obs.features = g;
    }
    return obs;
}

Outcome fifo_equivalence() {
    Outcome out;
    CounterRng rng(0xacce55, 7);
    for (int trace = 0; trace < 100; ++trace) {
        auto cfg = TrackerConfig::for_policy(PolicyKind::Sam2Fifo);
        cfg.k_ram = rng.uniform_int(1, 10);
        TrackerSession s(cfg, kInit);
        std::vector<int> seen;
        int frame = 0;
        const int len = rng.uniform_int(1, 120);
        for (int i = 0; i < len; ++i) {
            frame += rng.uniform_int(1, 3);
            s.step(fuzz_obs(rng, frame));
            ++out.checks;
            seen.push_back(frame);
            std::vector<int> expect = {0};
            for (const int f : oracle::keep_last(seen, cfg.k_ram)) expect.push_back(f);
            std::vector<int> got;
            for (const auto& e : bank_compose(s.bank())) got.push_back(e.frame_idx);
            if (got != expect || bank_compose(s.bank()).front().mask != kInit) {
                out.fail("trace " + std::to_string(trace) + " frame " + std::to_string(frame));
            }
        }
    }
    return out;
}

Outcome bank_invariants() {
    Outcome out;
    constexpr int kEvents = 100000;
    long events = 0;
    int policy_i = 0;
    for (const PolicyKind p : kAllPolicies) {
        CounterRng rng(0xacce55, 100 + static_cast<std::uint64_t>(policy_i));
        const int budget = kEvents / 6 + (policy_i < kEvents % 6 ? 1 : 0);
        ++policy_i;
        int done = 0;
        while (done < budget) {
            auto cfg = TrackerConfig::for_policy(p);
            cfg.k_ram = rng.uniform_int(p == PolicyKind::SamiteDrm ? 2 : 1, 8);
            cfg.k_drm = rng.uniform_int(0, 4);
            cfg = cfg.normalized();
            TrackerSession s(cfg, kInit);
            const int len = std::min(budget - done, rng.uniform_int(50, 400));
            for (int f = 1; f <= len; ++f) {
                s.step(fuzz_obs(rng, f));
                ++done;
                ++events;
                ++out.checks;
                for (const MemoryBank* b : s.banks()) {
                    if (auto v = b->check_invariants(cfg.drm_cfg.min_gap)) out.fail(std::string(policy_name(p)) + ": " + *v);
                    if (b->init().mask != kInit || b->init().frame_idx != 0) out.fail(std::string(policy_name(p)) + ": init changed");
                    if (b->ram().size() > static_cast<std::size_t>(cfg.k_ram)) out.fail(std::string(policy_name(p)) + ": RAM over capacity");
                    if (b->drm().size() > static_cast<std::size_t>(cfg.drm_enabled ? cfg.k_drm : 0)) {
                        out.fail(std::string(policy_name(p)) + ": DRM over capacity");
                    }
                }
            }
        }
    }
    if (events != kEvents) out.fail("ran " + std::to_string(events) + " events");
    return out;
}

// --- 7 ---------------------------------------------------------------------------

Outcome directional() {
    Outcome out;
    const auto got = directional_anchors(worker_count_from_env());
    const auto locked = nlohmann::ordered_json::parse(read_file(kFixtures / "oracle" / "anchors.json"));
    const auto ao = [&](const char* p) { return got.at("mean_ao").at(p).get<double>(); };
    const double fifo = ao("sam2_fifo"), samurai = ao("samurai_drm"), dam = ao("dam4sam");
    std::ostringstream vals;
    vals << "sam2_fifo " << num(fifo) << ", dam4sam " << num(dam) << ", samurai_drm " << num(samurai);
    out.detail = vals.str();
    if (!(samurai > fifo)) out.fail("samurai_drm AO not above sam2_fifo: " + vals.str());
    if (!(dam > fifo)) out.fail("dam4sam AO not above sam2_fifo: " + vals.str());
    out.checks = 1;
    if (got != locked) out.fail("anchors differ from anchors.json: " + vals.str());
    return out;
}

// --- 8 ---------------------------------------------------------------------------

Outcome metric_sanity() {
    Outcome out;
    BoxTrack gt;
    CounterRng rng(0xacce55, 8);
    for (int i = 0; i < 100; ++i) gt.push_back(BBox{rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(5, 50), rng.uniform(5, 50)});
    const auto p = evaluate(gt, gt);
    for (const double v : {p.success_auc, p.norm_precision_auc, p.precision_at_20, p.ao, p.sr50, p.sr75, p.q, p.acc, p.rob}) {
        ++out.checks;
        if (v != 1.0) out.fail("perfect tracker metric " + num(v));
    }
    const auto a = evaluate(BoxTrack(gt.size()), gt);
    for (const double v : {a.success_auc, a.precision_at_20, a.ao, a.sr50, a.sr75, a.acc, a.rob}) {
        ++out.checks;
        if (v != 0.0) out.fail("absent tracker metric " + num(v));
    }
    return out;
}

// --- 9 ---------------------------------------------------------------------------

std::vector<fs::path> output_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(fs::relative(e.path(), dir));
    }
    std::sort(files.begin(), files.end());
    return files;
}

Outcome determinism(double& slowest) {
    Outcome out;
    const auto root = fs::temp_directory_path() / "hybridmem_acceptance_run";
    fs::remove_all(root);
    const int workers = worker_count_from_env();
    slowest = 0.0;
    for (const char* name : {"a", "b"}) {
        const auto t0 = std::chrono::steady_clock::now();
        if (cmd_run({}, root / name, {}, {}, workers) != 0) out.fail("run exited nonzero");
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    const auto fa = output_files(root / "a"), fb = output_files(root / "b");
    if (fa != fb) out.fail("output file sets differ");
    for (const auto& f : fa) {
        ++out.checks;
        if (read_file(root / "a" / f) != read_file(root / "b" / f)) out.fail("differs: " + f.string());
    }
    const auto csv = read_file(root / "a" / "metrics.csv");
    const auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
    if (rows != 360) out.fail("expected 360 rows, got " + std::to_string(rows));
    if (slowest >= 120.0) out.fail("run took " + num(slowest) + " s");
    std::ostringstream d;
    d << fa.size() << " files, " << rows << " rows, slowest run " << std::fixed;
    d.precision(2);
    d << slowest << " s";
    if (out.pass) out.detail = d.str();
    fs::remove_all(root);
    return out;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (budget_s > 0 && secs >= budget_s) o.fail("over the " + num(budget_s) + " s budget");
        failures += !o.pass;
        std::printf("%s %d %s (%ld checks, %.2f s)%s%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.checks, secs,
                    o.detail.empty() ? "" : ": ", o.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "geometry oracle equivalence", 5.0, geometry);
    report(2, "Kalman oracle equivalence", 5.0, kalman);
    report(3, "pathway beam vs exhaustive enumeration", 10.0, pathways);
    report(4, "Top-K and SAMURAI/HiM2SAM selection vs brute force", 0.0, selection);
    report(5, "Sam2Fifo bank equals init + last K", 0.0, fifo_equivalence);
    report(6, "bank invariants over 1e5 admission events", 0.0, bank_invariants);
    report(7, "distractor AO direction and locked anchors", 60.0, directional);
    report(8, "metric sanity", 0.0, metric_sanity);
    double slowest = 0.0;
    report(9, "end-to-end determinism of run", 0.0, [&]() { return determinism(slowest); });
    return failures == 0 ? 0 : 1;
}

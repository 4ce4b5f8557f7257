#include "hybridmem/simulator.hpp"

#include "hybridmem/digest.hpp"
#include "hybridmem/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace hybridmem {

const char* to_string(MotionKind kind) {
    switch (kind) {
        case MotionKind::Linear: return "linear";
        case MotionKind::Sinusoid: return "sinusoid";
        case MotionKind::RandomWalk: return "random_walk";
    }
    return "?";
}

std::optional<MotionKind> parse_motion_kind(std::string_view name) {
    for (const MotionKind k : {MotionKind::Linear, MotionKind::Sinusoid, MotionKind::RandomWalk}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

void SceneConfig::validate() const {
    if (frames < 1) throw std::invalid_argument("SceneConfig: frames must be >= 1");
    if (width < 8 || height < 8) throw std::invalid_argument("SceneConfig: grid too small");
    if (!(target_w > 0.0) || !(target_h > 0.0) || target_w > width || target_h > height) {
        throw std::invalid_argument("SceneConfig: target size must fit the grid");
    }
    if (n_distractors < 0) throw std::invalid_argument("SceneConfig: negative distractor count");
    if (distractor_similarity < 0.0 || distractor_similarity > 1.0) {
        throw std::invalid_argument("SceneConfig: distractor_similarity outside [0, 1]");
    }
    if (!(score_noise >= 0.0) || !(feature_noise >= 0.0)) throw std::invalid_argument("SceneConfig: negative noise");
    if (proto_dim < 2) throw std::invalid_argument("SceneConfig: proto_dim must be >= 2");
    if (feature_cells < 1) throw std::invalid_argument("SceneConfig: feature_cells must be >= 1");
    for (const auto& [start, end] : occlusions) {
        if (start < 1 || end > frames || start >= end) {
            throw std::invalid_argument("SceneConfig: occlusion interval [" + std::to_string(start) + "," +
                                        std::to_string(end) + ") outside [1, frames)");
        }
    }
}

bool SceneConfig::occluded(int frame) const {
    return std::any_of(occlusions.begin(), occlusions.end(),
                       [frame](const auto& iv) { return frame >= iv.first && frame < iv.second; });
}

BitMask SequenceRecord::init_mask() const {
    return BitMask::rectangle(config.width, config.height, gt.front().box.value());
}

namespace {

enum Stream : std::uint64_t { kLayout = 1, kMotion = 2, kAppearance = 4, kFeatures = 5, kDecoder = 6 };

struct Mover {
    double cx, cy, w, h, vx, vy;

    BBox box() const { return BBox::from_center(cx, cy, w, h); }

    void reflect(double width, double height) {
        const double hw = 0.5 * w, hh = 0.5 * h;
        if (cx - hw < 0.0) { cx = 2.0 * hw - cx; vx = -vx; }
        if (cx + hw > width) { cx = 2.0 * (width - hw) - cx; vx = -vx; }
        if (cy - hh < 0.0) { cy = 2.0 * hh - cy; vy = -vy; }
        if (cy + hh > height) { cy = 2.0 * (height - hh) - cy; vy = -vy; }
        cx = std::clamp(cx, hw, width - hw);
        cy = std::clamp(cy, hh, height - hh);
    }
};

Prototype random_unit(CounterRng& rng, int dim) {
    Prototype v(dim);
    for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    return v.normalized();
}

// Unit vector u with cos(u, t) == 0 exactly up to rounding.
Prototype orthogonal_unit(CounterRng& rng, const Prototype& t) {
    Prototype u = random_unit(rng, static_cast<int>(t.size()));
    u -= u.dot(t) * t;
    return u.normalized();
}

BBox jitter(const BBox& b, CounterRng& rng, double sigma) {
    if (sigma == 0.0) return b;
    const double dx = rng.normal(0.0, 0.5 * sigma * b.w);
    const double dy = rng.normal(0.0, 0.5 * sigma * b.h);
    const double sw = std::exp(rng.normal(0.0, 0.5 * sigma));
    const double sh = std::exp(rng.normal(0.0, 0.5 * sigma));
    return BBox::from_center(b.cx() + dx, b.cy() + dy, b.w * sw, b.h * sh);
}

BBox scaled(const BBox& b, double factor) { return BBox::from_center(b.cx(), b.cy(), b.w * factor, b.h * factor); }

BBox union_box(const BBox& a, const BBox& b) {
    const double x0 = std::min(a.x, b.x), y0 = std::min(a.y, b.y);
    const double x1 = std::max(a.x + a.w, b.x + b.w), y1 = std::max(a.y + a.h, b.y + b.h);
    return {x0, y0, x1 - x0, y1 - y0};
}

double unit_clamp(double v) { return std::clamp(v, 0.0, 1.0); }

bool covers_pixel_center(const BBox& b, int px, int py) {
    const double x = px + 0.5, y = py + 0.5;
    return x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
}

FeatureGrid render_features(const SceneConfig& cfg, const Prototype& background, const std::optional<BBox>& target,
                            const Prototype& target_proto, const std::vector<BBox>& distractors,
                            const std::vector<Prototype>& distractor_protos, CounterRng& rng) {
    FeatureGrid grid;
    grid.width = cfg.feature_cells;
    grid.height = cfg.feature_cells;
    grid.values.resize(grid.cells(), cfg.proto_dim);
    for (int gy = 0; gy < grid.height; ++gy) {
        const int py = static_cast<int>((gy + 0.5) * cfg.height / grid.height);
        for (int gx = 0; gx < grid.width; ++gx) {
            const int px = static_cast<int>((gx + 0.5) * cfg.width / grid.width);
            const Prototype* value = &background;
            for (std::size_t j = 0; j < distractors.size(); ++j) {
                if (covers_pixel_center(distractors[j], px, py)) value = &distractor_protos[j];
            }
            if (target && covers_pixel_center(*target, px, py)) value = &target_proto;
            auto row = grid.values.row(gy * grid.width + gx);
            for (int d = 0; d < cfg.proto_dim; ++d) row(d) = (*value)(d) + rng.normal(0.0, cfg.feature_noise);
        }
    }
    return grid;
}

}  // namespace

SequenceRecord gen_sequence(const SceneConfig& cfg) {
    cfg.validate();
    CounterRng layout(cfg.seed, kLayout);
    CounterRng motion(cfg.seed, kMotion);
    CounterRng appearance(cfg.seed, kAppearance);
    CounterRng feature_rng(cfg.seed, kFeatures);
    CounterRng decoder(cfg.seed, kDecoder);

    const double W = cfg.width, H = cfg.height;
    const double sigma = cfg.score_noise;
    const double sim = cfg.distractor_similarity;

    // Appearance: distractors sit at cosine `sim` from the target, the
    // background is orthogonal to it.
    const Prototype target_proto = random_unit(appearance, cfg.proto_dim);
    const Prototype background = orthogonal_unit(appearance, target_proto);
    std::vector<Prototype> distractor_protos;
    for (int j = 0; j < cfg.n_distractors; ++j) {
        const Prototype u = orthogonal_unit(appearance, target_proto);
        distractor_protos.push_back(sim * target_proto + std::sqrt(1.0 - sim * sim) * u);
    }

    Mover target{0.5 * W + layout.uniform(-0.15, 0.15) * W, 0.5 * H + layout.uniform(-0.15, 0.15) * H,
                 cfg.target_w, cfg.target_h, cfg.motion.vx, cfg.motion.vy};
    target.reflect(W, H);
    const double base_cx = target.cx, base_cy = target.cy;
    const double phase_x = layout.uniform(0.0, 2.0 * std::numbers::pi);
    const double phase_y = layout.uniform(0.0, 2.0 * std::numbers::pi);

    std::vector<Mover> distractors;
    for (int j = 0; j < cfg.n_distractors; ++j) {
        const double w = cfg.target_w * layout.uniform(0.8, 1.2);
        const double h = cfg.target_h * layout.uniform(0.8, 1.2);
        const double speed = layout.uniform(1.0, 3.0);
        const double heading = layout.uniform(0.0, 2.0 * std::numbers::pi);
        Mover d{layout.uniform(0.5 * w, W - 0.5 * w), layout.uniform(0.5 * h, H - 0.5 * h), w, h,
                speed * std::cos(heading), speed * std::sin(heading)};
        distractors.push_back(d);
    }

    SequenceRecord rec;
    rec.config = cfg;
    rec.gt.reserve(cfg.frames);
    rec.observations.reserve(cfg.frames);

    for (int t = 0; t < cfg.frames; ++t) {
        if (t > 0) {
            switch (cfg.target_motion) {
                case MotionKind::Linear:
                    target.cx += target.vx;
                    target.cy += target.vy;
                    target.reflect(W, H);
                    break;
                case MotionKind::Sinusoid: {
                    const double phase = 2.0 * std::numbers::pi * cfg.motion.frequency * t;
                    target.cx = base_cx + cfg.motion.amplitude * std::sin(phase + phase_x);
                    target.cy = base_cy + 0.5 * cfg.motion.amplitude * std::sin(0.5 * phase + phase_y);
                    target.cx = std::clamp(target.cx, 0.5 * target.w, W - 0.5 * target.w);
                    target.cy = std::clamp(target.cy, 0.5 * target.h, H - 0.5 * target.h);
                    break;
                }
                case MotionKind::RandomWalk:
                    target.vx = std::clamp(target.vx + motion.normal(0.0, cfg.motion.step_sigma), -6.0, 6.0);
                    target.vy = std::clamp(target.vy + motion.normal(0.0, cfg.motion.step_sigma), -6.0, 6.0);
                    target.cx += target.vx;
                    target.cy += target.vy;
                    target.reflect(W, H);
                    break;
            }
            for (auto& d : distractors) {
                d.cx += d.vx;
                d.cy += d.vy;
                d.reflect(W, H);
            }
        }

        const bool visible = !cfg.occluded(t);
        const BBox target_box = target.box();
        const BitMask gt_mask = BitMask::rectangle(cfg.width, cfg.height, target_box);
        rec.gt.push_back({visible ? std::optional<BBox>(target_box) : std::nullopt, visible});

        std::vector<BBox> distractor_boxes;
        for (const auto& d : distractors) distractor_boxes.push_back(d.box());
        std::optional<std::size_t> nearest;
        double nearest_dist = 0.0;
        for (std::size_t j = 0; j < distractor_boxes.size(); ++j) {
            const double dx = distractor_boxes[j].cx() - target_box.cx();
            const double dy = distractor_boxes[j].cy() - target_box.cy();
            const double dist = dx * dx + dy * dy;
            if (!nearest || dist < nearest_dist) {
                nearest = j;
                nearest_dist = dist;
            }
        }

        FrameObservation obs;
        obs.frame_idx = t;
        auto iou_gt = [&](const BitMask& m) { return visible ? mask_iou(m, gt_mask) : 0.0; };

        // Target-aligned proposal.
        std::optional<BBox> target_jittered;
        if (visible) {
            target_jittered = jitter(target_box, decoder, sigma);
            BitMask m = BitMask::rectangle(cfg.width, cfg.height, *target_jittered);
            const double s = unit_clamp(mask_iou(m, gt_mask) + decoder.normal(0.0, sigma));
            obs.o = 0.5 + std::abs(decoder.normal(0.0, 0.2));
            obs.proposals[0] = Proposal::make(std::move(m), s, obs.o);
        } else {
            BitMask m = BitMask::rectangle(cfg.width, cfg.height, scaled(target_box, 0.3));
            const double s = unit_clamp(0.15 + decoder.normal(0.0, 0.08));
            obs.o = decoder.bernoulli(0.8) ? -(0.2 + std::abs(decoder.normal(0.0, 0.2))) : decoder.uniform(0.05, 0.3);
            obs.proposals[0] = Proposal::make(std::move(m), s, obs.o);
        }
        const BBox target_ref = target_jittered.value_or(scaled(target_box, 0.3));

        if (nearest) {
            const BBox& dbox = distractor_boxes[*nearest];
            BitMask m1 = BitMask::rectangle(cfg.width, cfg.height, jitter(dbox, decoder, sigma));
            const double own_iou = mask_iou(m1, BitMask::rectangle(cfg.width, cfg.height, dbox));
            const double s1 = unit_clamp(sim * own_iou + (1.0 - sim) * 0.15 + decoder.normal(0.0, sigma));
            obs.proposals[1] = Proposal::make(std::move(m1), s1, 0.5 + std::abs(decoder.normal(0.0, 0.2)));

            BitMask m2 = BitMask::rectangle(cfg.width, cfg.height, union_box(target_box, dbox));
            const double q2 = visible ? iou_gt(m2) : 0.1;
            const double s2 = unit_clamp(0.7 * q2 + decoder.normal(0.0, sigma));
            obs.proposals[2] = Proposal::make(std::move(m2), s2, 0.3 + std::abs(decoder.normal(0.0, 0.1)));
        } else {
            BitMask m1 = BitMask::rectangle(cfg.width, cfg.height, scaled(target_ref, 1.6));
            const double s1 = unit_clamp(0.6 * iou_gt(m1) + decoder.normal(0.0, sigma));
            obs.proposals[1] = Proposal::make(std::move(m1), s1, 0.5 * obs.o);

            BitMask m2 = BitMask::rectangle(cfg.width, cfg.height, scaled(target_ref, 0.6));
            const double q2 = visible ? iou_gt(m2) : 0.1;
            const double s2 = unit_clamp(0.7 * q2 + decoder.normal(0.0, sigma));
            obs.proposals[2] = Proposal::make(std::move(m2), s2, 0.5 * obs.o);
        }

        obs.features = render_features(cfg, background, visible ? std::optional<BBox>(target_box) : std::nullopt,
                                       target_proto, distractor_boxes, distractor_protos, feature_rng);
        rec.observations.push_back(std::move(obs));
    }
    return rec;
}

std::vector<SuiteEntry> suite_standard(int seeds_per_family) {
    std::vector<SuiteEntry> suite;
    suite.reserve(static_cast<std::size_t>(3 * seeds_per_family));
    for (int i = 0; i < seeds_per_family; ++i) {
        SceneConfig c;
        c.seed = 1000 + static_cast<std::uint64_t>(i);
        CounterRng r(c.seed, 99);
        c.frames = 240;
        c.target_motion = MotionKind::RandomWalk;
        c.motion.vx = r.uniform(-2.0, 2.0);
        c.motion.vy = r.uniform(-2.0, 2.0);
        c.motion.step_sigma = 0.4;
        c.n_distractors = 1;
        c.distractor_similarity = 0.7;
        c.score_noise = 0.05;
        for (int seg = 0; seg < 3; ++seg) {
            const int start = seg * 80 + r.uniform_int(20, 40);
            c.occlusions.push_back({start, start + r.uniform_int(20, 35)});
        }
        suite.push_back({"occlusion", c});
    }
    for (int i = 0; i < seeds_per_family; ++i) {
        SceneConfig c;
        c.seed = 2000 + static_cast<std::uint64_t>(i);
        CounterRng r(c.seed, 99);
        c.frames = 200;
        c.target_motion = MotionKind::Sinusoid;
        c.motion.amplitude = r.uniform(60.0, 80.0);
        c.motion.frequency = r.uniform(0.03, 0.05);
        c.n_distractors = 1;
        c.distractor_similarity = 0.5;
        c.score_noise = 0.05;
        const int start = r.uniform_int(80, 150);
        c.occlusions.push_back({start, start + 10});
        suite.push_back({"fast_motion", c});
    }
    for (int i = 0; i < seeds_per_family; ++i) {
        SceneConfig c;
        c.seed = 3000 + static_cast<std::uint64_t>(i);
        CounterRng r(c.seed, 99);
        c.frames = 200;
        c.target_motion = MotionKind::Linear;
        c.motion.vx = r.uniform(1.0, 3.0) * (r.bernoulli(0.5) ? 1.0 : -1.0);
        c.motion.vy = r.uniform(1.0, 3.0) * (r.bernoulli(0.5) ? 1.0 : -1.0);
        c.n_distractors = 4;
        c.distractor_similarity = 0.9;
        c.score_noise = 0.08;
        const int first = r.uniform_int(40, 80);
        const int second = r.uniform_int(120, 160);
        c.occlusions = {{first, first + 15}, {second, second + 15}};
        suite.push_back({"distractor", c});
    }
    return suite;
}

std::string suite_digest(const std::vector<SuiteEntry>& suite) {
    Fnv1a h;
    h.add("suite-v" + std::to_string(kSuiteVersion));
    for (const auto& e : suite) {
        const SceneConfig& c = e.scene;
        std::ostringstream os;
        os << e.family << '|' << c.seed << '|' << c.frames << '|' << c.width << 'x' << c.height << '|'
           << to_string(c.target_motion) << '|' << format_real(c.motion.vx) << ',' << format_real(c.motion.vy) << ','
           << format_real(c.motion.amplitude) << ',' << format_real(c.motion.frequency) << ','
           << format_real(c.motion.step_sigma) << '|' << format_real(c.target_w) << ',' << format_real(c.target_h)
           << '|' << c.n_distractors << ',' << format_real(c.distractor_similarity) << '|';
        for (const auto& [s, t] : c.occlusions) os << s << '-' << t << ';';
        os << '|' << format_real(c.score_noise) << '|' << c.proto_dim << '|' << c.feature_cells << '|'
           << format_real(c.feature_noise) << '\n';
        h.add(os.str());
    }
    return h.hex();
}

FrameObservation condition_on_memory(const FrameObservation& raw, std::span<const MemoryEntry> memory,
                                     const ReadPathConfig& cfg) {
    if (!raw.features || cfg.memory_gain == 0.0) return raw;
    std::array<Prototype, kProposalsPerFrame> protos;
    for (std::size_t i = 0; i < kProposalsPerFrame; ++i) {
        protos[i] = extract_prototypes(*raw.features, raw.proposals[i].mask).fg;
    }

    std::array<double, kProposalsPerFrame> votes{};
    int voters = 0;
    for (const auto& entry : memory) {
        if (!entry.fg_prototype || entry.fg_prototype->size() != raw.features->dim()) continue;
        ++voters;
        std::size_t best = 0;
        double best_cos = cosine(protos[0], *entry.fg_prototype);
        for (std::size_t i = 1; i < kProposalsPerFrame; ++i) {
            const double c = cosine(protos[i], *entry.fg_prototype);
            if (c > best_cos) {
                best = i;
                best_cos = c;
            }
        }
        if (best_cos >= cfg.vote_threshold) votes[best] += 1.0;
    }
    if (voters == 0) return raw;

    FrameObservation out = raw;
    for (std::size_t i = 0; i < kProposalsPerFrame; ++i) {
        out.proposals[i].s_mask =
            unit_clamp((1.0 - cfg.memory_gain) * raw.proposals[i].s_mask + cfg.memory_gain * votes[i] / voters);
    }
    return out;
}

}  // namespace hybridmem

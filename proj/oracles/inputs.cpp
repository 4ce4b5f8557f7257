#include "oracles.hpp"

#include "hybridmem/rng.hpp"

namespace oracle {

using hybridmem::CounterRng;

Rect random_box(CounterRng& rng, int extent, int subdiv) {
    auto coord = [&](int lo, int hi) { return rng.uniform_int(lo * subdiv, hi * subdiv) / double(subdiv); };
    Rect r;
    r.x = coord(0, extent - 1);
    r.y = coord(0, extent - 1);
    // occasional degenerate boxes
    r.w = rng.bernoulli(0.02) ? 0.0 : coord(0, extent / 2) + 1.0 / subdiv;
    r.h = rng.bernoulli(0.02) ? 0.0 : coord(0, extent / 2) + 1.0 / subdiv;
    return r;
}

Dense random_mask(CounterRng& rng, int width, int height) {
    Dense d{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
    const int mode = rng.uniform_int(0, 9);
    if (mode == 0) return d;
    if (mode <= 3) {
        const double p = rng.uniform();
        for (auto& v : d.px) v = rng.bernoulli(p);
        return d;
    }
    const int rects = rng.uniform_int(1, 3);
    for (int k = 0; k < rects; ++k) {
        const int x0 = rng.uniform_int(0, width - 1), y0 = rng.uniform_int(0, height - 1);
        const int x1 = rng.uniform_int(x0, width - 1), y1 = rng.uniform_int(y0, height - 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) d.px[static_cast<std::size_t>(y) * width + x] = 1;
        }
    }
    return d;
}

KalmanTrace random_kalman_trace(CounterRng& rng, int steps) {
    KalmanTrace tr;
    double cx = rng.uniform(40, 200), cy = rng.uniform(40, 200);
    double w = rng.uniform(10, 60), h = rng.uniform(10, 60);
    const double vx = rng.uniform(-4, 4), vy = rng.uniform(-4, 4);
    tr.init = {cx - w / 2, cy - h / 2, w, h};
    for (int t = 0; t < steps; ++t) {
        cx += vx + rng.normal(0, 0.5);
        cy += vy + rng.normal(0, 0.5);
        w = std::max(2.0, w + rng.normal(0, 0.3));
        h = std::max(2.0, h + rng.normal(0, 0.3));
        if (rng.bernoulli(0.2)) {
            tr.measurements.push_back(std::nullopt);
        } else {
            tr.measurements.push_back(Rect{cx - w / 2, cy - h / 2, w, h});
        }
    }
    return tr;
}

std::vector<std::array<double, 3>> random_pathway_scores(CounterRng& rng, int frames) {
    static constexpr double kLevels[] = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    std::vector<std::array<double, 3>> out(frames);
    for (auto& f : out) {
        for (auto& s : f) s = rng.bernoulli(0.6) ? kLevels[rng.uniform_int(0, 6)] : rng.uniform();
    }
    return out;
}

TopKCase random_topk_case(CounterRng& rng) {
    static const std::vector<std::vector<double>> kPalette = {
        {1, 0, 0, 0}, {1, 1, 0, 0}, {2, 2, 0, 0}, {0, 1, -1, 2}, {-1, 0, 2, 1}, {0, 0, 0, 0}, {1, -2, 1, 0},
    };
    auto proto = [&]() {
        if (rng.bernoulli(0.5)) return kPalette[rng.uniform_int(0, static_cast<int>(kPalette.size()) - 1)];
        std::vector<double> v(4);
        for (auto& x : v) x = rng.uniform_int(-2, 2);
        return v;
    };
    TopKCase c;
    c.k_ram = rng.uniform_int(2, 8);
    c.alpha = rng.bernoulli(0.3) ? 0.25 : rng.uniform();
    c.first_frame = 0;
    c.first_proto = proto();
    const int span = rng.uniform_int(3, 24);
    for (int f = 1; f < span; ++f) {
        if (rng.bernoulli(0.7)) c.window.push_back({f, proto()});
    }
    c.prev_frame = span;
    c.prev_proto = proto();
    if (rng.bernoulli(0.2)) c.window.push_back({c.prev_frame, c.prev_proto});
    if (rng.bernoulli(0.1)) c.window.insert(c.window.begin(), {c.first_frame, c.first_proto});
    return c;
}

Frame3 random_frame3(CounterRng& rng) {
    auto box = [&]() {
        return Rect{double(rng.uniform_int(0, 60)), double(rng.uniform_int(0, 60)), double(rng.uniform_int(1, 30)),
                    double(rng.uniform_int(1, 30))};
    };
    static constexpr double kScores[] = {0.2, 0.5, 0.8};
    static constexpr double kObj[] = {-0.5, 0.0, 0.3, 0.8};
    Frame3 f;
    for (int i = 0; i < 3; ++i) {
        Candidate& c = f.c[i];
        if (i > 0 && rng.bernoulli(0.25)) {
            c = f.c[rng.uniform_int(0, i - 1)];
            continue;
        }
        c.box = rng.bernoulli(0.1) ? std::nullopt : std::optional<Rect>(box());
        c.s_mask = rng.bernoulli(0.5) ? kScores[rng.uniform_int(0, 2)] : rng.uniform();
        c.s_obj = kObj[rng.uniform_int(0, 3)];
    }
    f.o = rng.bernoulli(0.3) ? -0.2 : 0.4;
    if (rng.bernoulli(0.9)) f.coarse = box();
    if (rng.bernoulli(0.8)) f.fine = box();
    return f;
}

}  // namespace oracle

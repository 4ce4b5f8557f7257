#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

PathwayBest enumerate_best_pathway(const std::vector<std::array<double, 3>>& s_mask, double eps) {
    const int t_len = static_cast<int>(s_mask.size());
    int total = 1;
    for (int t = 0; t < t_len; ++t) total *= 3;

    std::vector<int> best_k;
    std::vector<double> best_s;
    for (int code = 0; code < total; ++code) {
        std::vector<int> k(t_len);
        int c = code;
        for (int t = t_len - 1; t >= 0; --t) {
            k[t] = c % 3;
            c /= 3;
        }
        std::vector<double> s(t_len);
        double acc = 0.0;
        for (int t = 0; t < t_len; ++t) {
            acc = acc + std::log(s_mask[t][k[t]] + eps);
            s[t] = acc;
        }
        if (best_k.empty()) {
            best_k = k;
            best_s = s;
            continue;
        }
        int verdict = 0;  // +1: candidate ranks higher
        for (int t = t_len - 1; t >= 0 && verdict == 0; --t) {
            if (s[t] > best_s[t]) verdict = 1;
            if (s[t] < best_s[t]) verdict = -1;
        }
        for (int t = 0; t < t_len && verdict == 0; ++t) {
            if (k[t] < best_k[t]) verdict = 1;
            if (k[t] > best_k[t]) verdict = -1;
        }
        if (verdict > 0) {
            best_k = k;
            best_s = s;
        }
    }
    return {best_k, best_s.empty() ? 0.0 : best_s.back()};
}

double loop_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::min(1.0, std::max(-1.0, c));
}

std::vector<int> topk_ram_frames(const std::vector<WindowItem>& window, const std::vector<double>& first_proto,
                                 const std::vector<double>& prev_proto, int first_frame, int prev_frame, double alpha,
                                 int k_ram) {
    struct Item {
        int frame;
        double score;
    };
    std::vector<Item> items;
    for (const auto& w : window) {
        if (w.frame == first_frame || w.frame == prev_frame) continue;
        items.push_back({w.frame, (1.0 - alpha) * loop_cosine(w.proto, first_proto) + alpha * loop_cosine(w.proto, prev_proto)});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.frame > b.frame; });
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score > b.score; });

    std::vector<int> out = {first_frame, prev_frame};
    for (int i = 0; i < k_ram - 2 && i < static_cast<int>(items.size()); ++i) out.push_back(items[i].frame);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Choice brute_samurai(const Frame3& f, double alpha) {
    std::array<double, 3> motion{}, score{};
    std::array<bool, 3> eligible{};
    for (int i = 0; i < 3; ++i) {
        const Candidate& c = f.c[i];
        motion[i] = (f.coarse && c.box) ? plain_box_iou(*f.coarse, *c.box) : 0.0;
        score[i] = alpha * motion[i] + (1.0 - alpha) * c.s_mask;
        eligible[i] = c.s_obj > 0.0;
    }
    Choice out;
    for (int i = 0; i < 3; ++i) {
        if (!eligible[i]) continue;
        bool beaten = false;
        for (int j = 0; j < 3; ++j) {
            if (j == i || !eligible[j]) continue;
            if (score[j] > score[i] || (score[j] == score[i] && j < i)) beaten = true;
        }
        if (!beaten) out.index = i;
    }
    if (out.index) out.value = motion[*out.index];
    return out;
}

Choice brute_him(const Frame3& f, double alpha_him, double beta, double tau_conf) {
    std::array<double, 3> coarse{}, fine{}, stage1{}, stage2{};
    for (int i = 0; i < 3; ++i) {
        const Candidate& c = f.c[i];
        coarse[i] = (f.coarse && c.box) ? plain_box_iou(*f.coarse, *c.box) : 0.0;
        fine[i] = (f.fine && c.box) ? plain_box_iou(*f.fine, *c.box) : 0.0;
        stage1[i] = alpha_him * coarse[i] + (1.0 - alpha_him) * c.s_mask;
        stage2[i] = alpha_him * coarse[i] + beta * fine[i] + (1.0 - alpha_him - beta) * c.s_mask;
    }
    const double stage1_max = std::max({stage1[0], stage1[1], stage1[2]});
    Choice out;
    out.used_fine = stage1_max < tau_conf;
    const auto& conf = out.used_fine ? stage2 : stage1;
    int best = -1;
    for (int i = 0; i < 3; ++i) {
        bool beaten = false;
        for (int j = 0; j < 3; ++j) {
            if (j != i && (conf[j] > conf[i] || (conf[j] == conf[i] && j < i))) beaten = true;
        }
        if (!beaten) best = i;
    }
    out.value = conf[best];
    if (!f.c[best].box && !(f.o > 0.0)) return out;
    out.index = best;
    return out;
}

DrmReplay replay_drm(const std::array<Dense, 3>& proposals, int chosen, double chosen_s_mask,
                     const std::vector<std::int64_t>& ram_areas, std::optional<int> last_drm_frame, int frame,
                     double tau_div, double tau_q, double area_lo, double area_hi, int min_gap) {
    DrmReplay r;
    const double i01 = dense_iou(proposals[0], proposals[1]);
    const double i02 = dense_iou(proposals[0], proposals[2]);
    const double i12 = dense_iou(proposals[1], proposals[2]);
    r.disagreement = std::min({i01, i02, i12}) < tau_div;
    r.quality = chosen_s_mask >= tau_q;

    r.area_consistent = true;
    if (!ram_areas.empty()) {
        std::vector<std::int64_t> sorted = ram_areas;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        const double median = n % 2 ? double(sorted[n / 2]) : (double(sorted[n / 2 - 1]) + double(sorted[n / 2])) / 2.0;
        if (median > 0.0) {
            const double ratio = double(dense_area(proposals[chosen])) / median;
            r.area_consistent = ratio >= area_lo && ratio <= area_hi;
        }
    }
    r.sparse = !last_drm_frame || frame - *last_drm_frame >= min_gap;
    return r;
}

std::string replay_dam(bool present, int frame, int last_ram_frame, int delta_ram) {
    if (!present) return "TargetAbsent";
    if (frame - last_ram_frame < delta_ram) return "GapNotElapsed";
    return "Admitted";
}

std::string replay_samurai(double s_mask, double s_obj, double s_kf, double tau_mask, double tau_obj, double tau_kf) {
    if (s_mask < tau_mask) return "BelowMaskThr";
    if (s_obj < tau_obj) return "BelowObjThr";
    if (s_kf < tau_kf) return "BelowKfThr";
    return "Admitted";
}

std::vector<int> keep_last(const std::vector<int>& frames, int k) {
    if (static_cast<int>(frames.size()) <= k) return frames;
    return std::vector<int>(frames.end() - k, frames.end());
}

}  // namespace oracle

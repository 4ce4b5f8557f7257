#include "hybridmem/policies.hpp"

#include <algorithm>
#include <stdexcept>

namespace hybridmem {

const char* to_string(AdmitReason reason) {
    switch (reason) {
        case AdmitReason::Admitted: return "Admitted";
        case AdmitReason::TargetAbsent: return "TargetAbsent";
        case AdmitReason::BelowMaskThr: return "BelowMaskThr";
        case AdmitReason::BelowObjThr: return "BelowObjThr";
        case AdmitReason::BelowKfThr: return "BelowKfThr";
        case AdmitReason::GapNotElapsed: return "GapNotElapsed";
        case AdmitReason::NotOnBestPathway: return "NotOnBestPathway";
        case AdmitReason::BelowIouThr: return "BelowIouThr";
        case AdmitReason::BelowConfThr: return "BelowConfThr";
        case AdmitReason::NotTopK: return "NotTopK";
        case AdmitReason::InitFrame: return "InitFrame";
    }
    return "?";
}

void PolicyConfig::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(alpha) || !unit(alpha_him) || !unit(beta)) {
        throw std::invalid_argument("PolicyConfig: weights must lie in [0, 1]");
    }
    if (!unit(tau_mask) || !unit(tau_kf) || !unit(tau_iou) || !unit(tau_conf) || !unit(tau_mem)) {
        throw std::invalid_argument("PolicyConfig: thresholds must lie in [0, 1]");
    }
    if (alpha_him + beta > 1.0) throw std::invalid_argument("PolicyConfig: alpha_him + beta > 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("PolicyConfig: epsilon must be > 0");
    if (window_m < 3) throw std::invalid_argument("PolicyConfig: window_m must be >= 3");
    if (delta_ram < 0) throw std::invalid_argument("PolicyConfig: delta_ram must be >= 0");
    if (num_pathways < 1) throw std::invalid_argument("PolicyConfig: num_pathways must be >= 1");
}

RamPolicyDecision fifo_admit(const FrameObservation&, const Proposal&) { return RamPolicyDecision::admitted(); }

RamPolicyDecision dam_admit(const FrameObservation& obs, const Proposal* chosen, int last_ram_frame,
                            const PolicyConfig& cfg) {
    if (chosen == nullptr || chosen->mask.empty() || !(obs.o > 0.0)) {
        return RamPolicyDecision::rejected(AdmitReason::TargetAbsent);
    }
    if (obs.frame_idx - last_ram_frame < cfg.delta_ram) return RamPolicyDecision::rejected(AdmitReason::GapNotElapsed);
    return RamPolicyDecision::admitted();
}

double motion_consistency(const std::optional<BBox>& predicted, const Proposal& p) {
    if (!predicted || !p.bbox) return 0.0;
    return box_iou(*predicted, *p.bbox);
}

double samurai_score(const std::optional<BBox>& kf_pred, const Proposal& p, double alpha) {
    return alpha * motion_consistency(kf_pred, p) + (1.0 - alpha) * p.s_mask;
}

RamPolicyDecision samurai_admit(const Proposal& chosen, double s_kf, const PolicyConfig& cfg) {
    if (!(chosen.s_mask >= cfg.tau_mask)) return RamPolicyDecision::rejected(AdmitReason::BelowMaskThr);
    if (!(chosen.s_obj >= cfg.tau_obj)) return RamPolicyDecision::rejected(AdmitReason::BelowObjThr);
    if (!(s_kf >= cfg.tau_kf)) return RamPolicyDecision::rejected(AdmitReason::BelowKfThr);
    return RamPolicyDecision::admitted();
}

std::vector<ScoredFrame> samite_calibrate(const std::vector<WindowFrame>& window, const Prototype& anchor_first,
                                          const Prototype& anchor_prev, double alpha) {
    std::vector<ScoredFrame> out;
    out.reserve(window.size());
    for (const auto& w : window) {
        const double s = (1.0 - alpha) * cosine(w.prototype, anchor_first) + alpha * cosine(w.prototype, anchor_prev);
        out.push_back({w.frame_idx, s});
    }
    return out;
}

std::vector<MemoryEntry> samite_select_ram(const std::vector<ScoredEntry>& scored_window, int k_ram,
                                           const MemoryEntry& first_entry, const MemoryEntry& prev_entry) {
    if (k_ram < 2) throw std::invalid_argument("samite_select_ram: k_ram must be >= 2");

    std::vector<const ScoredEntry*> ranked;
    ranked.reserve(scored_window.size());
    for (const auto& s : scored_window) {
        if (s.entry.frame_idx != first_entry.frame_idx && s.entry.frame_idx != prev_entry.frame_idx) {
            ranked.push_back(&s);
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredEntry* a, const ScoredEntry* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->entry.frame_idx > b->entry.frame_idx;
    });
    const std::size_t keep = std::min(ranked.size(), static_cast<std::size_t>(k_ram - 2));

    std::vector<MemoryEntry> ram;
    ram.reserve(keep + 2);
    ram.push_back(first_entry);
    if (prev_entry.frame_idx != first_entry.frame_idx) ram.push_back(prev_entry);
    for (std::size_t i = 0; i < keep; ++i) ram.push_back(ranked[i]->entry);
    std::sort(ram.begin(), ram.end(), [](const MemoryEntry& a, const MemoryEntry& b) { return a.frame_idx < b.frame_idx; });
    return ram;
}

double him_stage1(double s_coarse, double s_iou, const PolicyConfig& cfg) {
    return cfg.alpha_him * s_coarse + (1.0 - cfg.alpha_him) * s_iou;
}

double him_stage2(double s_coarse, double s_fine, double s_iou, const PolicyConfig& cfg) {
    return cfg.alpha_him * s_coarse + cfg.beta * s_fine + (1.0 - cfg.alpha_him - cfg.beta) * s_iou;
}

HimConfidence him_confidence(double s_coarse, double s_fine, double s_iou, double coarse_stage_max,
                             const PolicyConfig& cfg) {
    if (coarse_stage_max < cfg.tau_conf) return {him_stage2(s_coarse, s_fine, s_iou, cfg), true};
    return {him_stage1(s_coarse, s_iou, cfg), false};
}

RamPolicyDecision him_admit(const Proposal* chosen, double s_conf, const PolicyConfig& cfg) {
    if (chosen == nullptr || chosen->mask.empty()) return RamPolicyDecision::rejected(AdmitReason::TargetAbsent);
    if (!(s_conf >= cfg.tau_mem)) return RamPolicyDecision::rejected(AdmitReason::BelowConfThr);
    return RamPolicyDecision::admitted();
}

RamPolicyDecision sam2long_admit(const FrameObservation& obs, const Proposal& chosen, const PolicyConfig& cfg) {
    if (!(obs.o > 0.0) || chosen.mask.empty()) return RamPolicyDecision::rejected(AdmitReason::TargetAbsent);
    if (!(chosen.s_mask >= cfg.tau_iou)) return RamPolicyDecision::rejected(AdmitReason::BelowIouThr);
    return RamPolicyDecision::admitted();
}

}  // namespace hybridmem

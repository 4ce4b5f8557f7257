#include "hybridmem/selection.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>

namespace hybridmem {

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Sam2Fifo: return "sam2_fifo";
        case PolicyKind::Dam4Sam: return "dam4sam";
        case PolicyKind::SamuraiDrm: return "samurai_drm";
        case PolicyKind::Sam2LongDrm: return "sam2long_drm";
        case PolicyKind::SamiteDrm: return "samite_drm";
        case PolicyKind::Him2SamDrm: return "him2sam_drm";
    }
    return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
    for (const PolicyKind k : kAllPolicies) {
        if (name == policy_name(k)) return k;
    }
    return std::nullopt;
}

TrackerConfig TrackerConfig::normalized() const {
    TrackerConfig out = *this;
    if (out.policy == PolicyKind::Sam2Fifo) out.drm_enabled = false;
    return out;
}

void TrackerConfig::validate() const {
    if (k_ram < 1) throw std::invalid_argument("TrackerConfig: k_ram must be >= 1");
    if (k_drm < 0) throw std::invalid_argument("TrackerConfig: k_drm must be >= 0");
    if (policy == PolicyKind::SamiteDrm && k_ram < 2) {
        throw std::invalid_argument("TrackerConfig: samite_drm needs k_ram >= 2");
    }
    policy_cfg.validate();
    motion_cfg.validate();
    drm_cfg.validate();
}

TrackerConfig TrackerConfig::for_policy(PolicyKind policy) {
    TrackerConfig cfg;
    cfg.policy = policy;
    return cfg.normalized();
}

std::optional<BBox> FrameResult::predicted_box() const {
    if (!present || !chosen) return std::nullopt;
    return chosen->bbox;
}

std::string serialize_frame_result(const FrameResult& r, const std::string& bank_snapshot) {
    nlohmann::ordered_json j;
    j["frame"] = r.frame_idx;
    j["present"] = r.present;
    j["chosen"] = r.chosen_index ? nlohmann::ordered_json(*r.chosen_index) : nlohmann::ordered_json(nullptr);
    if (r.chosen && r.chosen->bbox) {
        const BBox& b = *r.chosen->bbox;
        j["bbox"] = {b.x, b.y, b.w, b.h};
        j["s_mask"] = r.chosen->s_mask;
    } else {
        j["bbox"] = nullptr;
        j["s_mask"] = nullptr;
    }
    j["s_kf"] = r.s_kf ? nlohmann::ordered_json(*r.s_kf) : nlohmann::ordered_json(nullptr);
    j["s_conf"] = r.s_conf ? nlohmann::ordered_json(*r.s_conf) : nlohmann::ordered_json(nullptr);
    j["used_fine"] = r.used_fine;
    j["admit"] = r.decision.admit;
    j["reason"] = to_string(r.decision.reason);
    j["drm"] = r.drm_admitted;
    if (!bank_snapshot.empty()) j["bank"] = nlohmann::ordered_json::parse(bank_snapshot);
    return j.dump();
}

std::optional<std::size_t> select_default(const FrameObservation& obs) {
    const bool all_empty = std::all_of(obs.proposals.begin(), obs.proposals.end(),
                                       [](const Proposal& p) { return p.mask.empty(); });
    if (all_empty && !(obs.o > 0.0)) return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < kProposalsPerFrame; ++i) {
        if (obs.proposals[i].s_mask > obs.proposals[best].s_mask) best = i;
    }
    return best;
}

SamuraiChoice select_samurai(const FrameObservation& obs, const std::optional<BBox>& kf_pred, double alpha) {
    SamuraiChoice out;
    double best_score = 0.0;
    for (std::size_t i = 0; i < kProposalsPerFrame; ++i) {
        const Proposal& p = obs.proposals[i];
        if (!(p.s_obj > 0.0)) continue;
        const double s = samurai_score(kf_pred, p, alpha);
        if (!out.index || s > best_score) {
            out.index = i;
            best_score = s;
        }
    }
    if (out.index) out.s_kf = motion_consistency(kf_pred, obs.proposals[*out.index]);
    return out;
}

HimChoice select_him(const FrameObservation& obs, const std::optional<BBox>& coarse_pred, const BoxPredictor& fine_pred,
                     const PolicyConfig& cfg) {
    std::array<double, kProposalsPerFrame> coarse{}, conf{};
    double stage1_max = 0.0;
    for (std::size_t i = 0; i < kProposalsPerFrame; ++i) {
        coarse[i] = motion_consistency(coarse_pred, obs.proposals[i]);
        conf[i] = him_stage1(coarse[i], obs.proposals[i].s_mask, cfg);
        stage1_max = i == 0 ? conf[i] : std::max(stage1_max, conf[i]);
    }

    HimChoice out;
    if (stage1_max < cfg.tau_conf) {
        const std::optional<BBox> fine = fine_pred ? fine_pred() : std::nullopt;
        for (std::size_t i = 0; i < kProposalsPerFrame; ++i) {
            const double s_fine = motion_consistency(fine, obs.proposals[i]);
            conf[i] = him_confidence(coarse[i], s_fine, obs.proposals[i].s_mask, stage1_max, cfg).s_conf;
        }
        out.used_fine = true;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < kProposalsPerFrame; ++i) {
        if (conf[i] > conf[best]) best = i;
    }
    out.s_conf = conf[best];
    if (obs.proposals[best].mask.empty() && !(obs.o > 0.0)) return out;
    out.index = best;
    return out;
}

BBox extrapolate_box(int f0, const BBox& b0, int f1, const BBox& b1, int frame_idx) {
    if (f1 == f0) return b1;
    const double t = static_cast<double>(frame_idx - f1) / static_cast<double>(f1 - f0);
    const double w = std::max(b1.w + t * (b1.w - b0.w), 1e-6);
    const double h = std::max(b1.h + t * (b1.h - b0.h), 1e-6);
    return BBox::from_center(b1.cx() + t * (b1.cx() - b0.cx()), b1.cy() + t * (b1.cy() - b0.cy()), w, h);
}

// --- session -----------------------------------------------------------------

TrackerSession::TrackerSession(TrackerConfig cfg, const BitMask& init_mask, const FrameObservation* frame0)
    : cfg_(cfg.normalized()) {
    cfg_.validate();
    MemoryEntry init;
    init.frame_idx = 0;
    init.mask = init_mask;
    init.bbox = mask_to_bbox(init_mask);
    init.s_mask = 1.0;
    init.kind = EntryKind::Init;
    if (frame0 && frame0->features && !init_mask.empty()) {
        init.fg_prototype = extract_prototypes(*frame0->features, init_mask).fg;
    }
    const int k_drm = cfg_.drm_enabled ? cfg_.k_drm : 0;

    first_anchor_ = init;
    first_anchor_.kind = EntryKind::Ram;

    if (cfg_.policy == PolicyKind::Sam2LongDrm) {
        // Pathway banks carry RAM only; the single DRM is read through the best pathway.
        pathways_ = pathway_start(MemoryBank(init, cfg_.k_ram, 0), static_cast<std::size_t>(cfg_.policy_cfg.num_pathways));
        shared_drm_ = MemoryBank(init, 1, k_drm);
        refresh_best_view();
    } else {
        bank_ = MemoryBank(init, cfg_.k_ram, k_drm);
    }
    if (uses_motion()) kf_ = kf_init(*init.bbox, cfg_.motion_cfg, 0);
    accepted_.push_back({0, *init.bbox});

    init_result_.frame_idx = 0;
    init_result_.chosen_index = std::nullopt;
    init_result_.chosen = Proposal::make(init_mask, 1.0, 1.0);
    init_result_.present = true;
    init_result_.decision = RamPolicyDecision::rejected(AdmitReason::InitFrame);
}

const MemoryBank& TrackerSession::bank() const { return pathways_ ? *best_view_ : *bank_; }

void TrackerSession::refresh_best_view() {
    const MemoryBank& best = pathway_best(*pathways_).bank;
    MemoryBank view(best.init(), cfg_.k_ram, shared_drm_->k_drm());
    view.ram_assign(best.ram());
    for (const auto& e : shared_drm_->drm()) view.drm_append(e);
    best_view_ = std::move(view);
}

std::vector<const MemoryBank*> TrackerSession::banks() const {
    std::vector<const MemoryBank*> out;
    if (pathways_) {
        out.push_back(&*best_view_);
        for (const auto& p : pathways_->pathways) out.push_back(&p.bank);
    } else {
        out.push_back(&*bank_);
    }
    return out;
}

bool TrackerSession::uses_motion() const {
    return cfg_.policy == PolicyKind::SamuraiDrm || cfg_.policy == PolicyKind::Him2SamDrm;
}

void TrackerSession::motion_predict() {
    kf_pred_.reset();
    if (!uses_motion() || !kf_) return;
    auto [next, box] = kf_predict(*kf_, cfg_.motion_cfg);
    kf_ = std::move(next);
    kf_pred_ = box;
}

void TrackerSession::motion_update(const FrameResult& r, const Proposal* chosen) {
    if (r.decision.admit && chosen && chosen->bbox) {
        accepted_.push_back({r.frame_idx, *chosen->bbox});
        if (accepted_.size() > 2) accepted_.erase(accepted_.begin());
    }
    if (!uses_motion()) return;

    const bool have_box = r.present && chosen && chosen->bbox && chosen->bbox->area() > 0.0;
    if (have_box && r.decision.admit) {
        if (kf_) {
            kf_ = kf_update(*kf_, *chosen->bbox, cfg_.motion_cfg, r.frame_idx);
        } else {
            kf_ = kf_init(*chosen->bbox, cfg_.motion_cfg, r.frame_idx);
        }
        frames_since_update_ = 0;
        return;
    }
    ++frames_since_update_;
    const bool confident = have_box && chosen->s_mask >= cfg_.policy_cfg.tau_mask && chosen->s_obj > 0.0;
    if (frames_since_update_ >= cfg_.motion_cfg.lost_reinit_frames && confident) {
        kf_ = kf_init(*chosen->bbox, cfg_.motion_cfg, r.frame_idx);
        frames_since_update_ = 0;
    }
}

void TrackerSession::rebuild_samite_ram(int frame_idx) {
    // RAM for the next frame n = frame_idx + 1: window {n - m, ..., n - 2}.
    const int next = frame_idx + 1;
    const int window_lo = next - cfg_.policy_cfg.window_m;
    if (!history_.empty()) {
        const MemoryEntry prev = history_.back();
        std::erase_if(history_, [&](const MemoryEntry& e) {
            return e.frame_idx < window_lo && e.frame_idx != prev.frame_idx;
        });
    }
    if (history_.empty()) {
        bank_->ram_assign({first_anchor_});
        return;
    }
    const MemoryEntry& prev = history_.back();
    const Prototype zero = Prototype::Zero(prev.fg_prototype ? prev.fg_prototype->size() : 0);
    const Prototype& first_proto = first_anchor_.fg_prototype ? *first_anchor_.fg_prototype : zero;

    std::vector<WindowFrame> window;
    std::vector<const MemoryEntry*> window_entries;
    for (const auto& e : history_) {
        if (e.frame_idx == prev.frame_idx || e.frame_idx > next - 2 || e.frame_idx < window_lo) continue;
        window.push_back({e.frame_idx, *e.fg_prototype});
        window_entries.push_back(&e);
    }
    const auto scores = samite_calibrate(window, first_proto, *prev.fg_prototype, cfg_.policy_cfg.alpha);
    std::vector<ScoredEntry> scored;
    scored.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) scored.push_back({*window_entries[i], scores[i].score});
    bank_->ram_assign(samite_select_ram(scored, cfg_.k_ram, first_anchor_, prev));
}

FrameResult TrackerSession::step(const FrameObservation& obs) { return step(obs, ObservationConditioner{}); }

FrameResult TrackerSession::step(const FrameObservation& raw, const ObservationConditioner& condition) {
    if (raw.frame_idx <= last_frame_) {
        throw std::invalid_argument("TrackerSession::step: frame " + std::to_string(raw.frame_idx) +
                                    " does not follow frame " + std::to_string(last_frame_));
    }
    if (cfg_.policy == PolicyKind::Sam2LongDrm) {
        FrameResult r = step_sam2long(raw, condition ? &condition : nullptr);
        last_frame_ = raw.frame_idx;
        return r;
    }

    FrameObservation conditioned;
    const FrameObservation* obs_ptr = &raw;
    if (condition) {
        const auto memory = bank_->compose();
        conditioned = condition(raw, memory);
        obs_ptr = &conditioned;
    }
    const FrameObservation& obs = *obs_ptr;

    FrameResult r;
    r.frame_idx = obs.frame_idx;

    motion_predict();

    // select
    switch (cfg_.policy) {
        case PolicyKind::SamuraiDrm: {
            const auto choice = select_samurai(obs, kf_pred_, cfg_.policy_cfg.alpha);
            r.chosen_index = choice.index;
            if (choice.index) r.s_kf = choice.s_kf;
            break;
        }
        case PolicyKind::Him2SamDrm: {
            const int frame = obs.frame_idx;
            const BoxPredictor fine = [this, frame]() -> std::optional<BBox> {
                if (accepted_.empty()) return std::nullopt;
                if (accepted_.size() == 1) return accepted_.back().second;
                return extrapolate_box(accepted_[0].first, accepted_[0].second, accepted_[1].first,
                                       accepted_[1].second, frame);
            };
            const auto choice = select_him(obs, kf_pred_, fine, cfg_.policy_cfg);
            r.chosen_index = choice.index;
            r.s_conf = choice.s_conf;
            r.used_fine = choice.used_fine;
            if (choice.index) r.s_kf = motion_consistency(kf_pred_, obs.proposals[*choice.index]);
            break;
        }
        default: r.chosen_index = select_default(obs); break;
    }
    r.present = r.chosen_index.has_value();
    const Proposal* chosen = r.present ? &obs.proposals[*r.chosen_index] : nullptr;
    if (chosen) r.chosen = *chosen;

    // DRM before RAM so this frame's RAM copy cannot move its own area median.
    if (cfg_.drm_enabled && chosen) r.drm_admitted = bank_->drm_consider(obs, *chosen, cfg_.drm_cfg);

    // RAM
    switch (cfg_.policy) {
        case PolicyKind::Sam2Fifo: {
            const std::size_t idx = r.chosen_index.value_or(0);
            r.decision = fifo_admit(obs, obs.proposals[idx]);
            bank_->ram_insert(make_entry(obs, idx, EntryKind::Ram));
            break;
        }
        case PolicyKind::Dam4Sam:
            r.decision = dam_admit(obs, chosen, bank_->last_ram_frame(), cfg_.policy_cfg);
            if (r.decision.admit) bank_->ram_insert(make_entry(obs, *chosen, EntryKind::Ram));
            break;
        case PolicyKind::SamuraiDrm:
            r.decision = chosen ? samurai_admit(*chosen, r.s_kf.value_or(0.0), cfg_.policy_cfg)
                                : RamPolicyDecision::rejected(AdmitReason::TargetAbsent);
            if (r.decision.admit) bank_->ram_insert(make_entry(obs, *chosen, EntryKind::Ram));
            break;
        case PolicyKind::Him2SamDrm:
            r.decision = him_admit(chosen, r.s_conf.value_or(0.0), cfg_.policy_cfg);
            if (r.decision.admit) bank_->ram_insert(make_entry(obs, *chosen, EntryKind::Ram));
            break;
        case PolicyKind::SamiteDrm: {
            bool stored = false;
            if (chosen && !chosen->mask.empty()) {
                MemoryEntry e = make_entry(obs, *chosen, EntryKind::Ram);
                if (e.fg_prototype) {
                    history_.push_back(std::move(e));
                    stored = true;
                }
            }
            // Absent frames leave RAM untouched.
            if (stored) rebuild_samite_ram(obs.frame_idx);
            const auto& ram = bank_->ram();
            const bool in_ram = std::any_of(ram.begin(), ram.end(),
                                            [&](const MemoryEntry& e) { return e.frame_idx == obs.frame_idx; });
            if (in_ram) {
                r.decision = RamPolicyDecision::admitted();
            } else {
                r.decision = RamPolicyDecision::rejected(stored ? AdmitReason::NotTopK : AdmitReason::TargetAbsent);
            }
            break;
        }
        case PolicyKind::Sam2LongDrm: break;
    }

    motion_update(r, chosen);
    last_frame_ = obs.frame_idx;
    return r;
}

FrameResult TrackerSession::step_sam2long(const FrameObservation& raw, const ObservationConditioner* condition) {
    const PathwaySet& parents = *pathways_;
    std::vector<FrameObservation> per_pathway;
    if (condition) {
        per_pathway.reserve(parents.pathways.size());
        for (std::size_t i = 0; i < parents.pathways.size(); ++i) {
            const MemoryBank& b = i == 0 ? *best_view_ : parents.pathways[i].bank;
            per_pathway.push_back((*condition)(raw, b.compose()));
        }
    } else {
        per_pathway.push_back(raw);
    }

    const auto candidates = pathway_expand(parents, per_pathway, cfg_.policy_cfg.epsilon);
    PathwaySet next = pathway_prune(parents, candidates, per_pathway, parents.capacity, cfg_.policy_cfg);

    const Pathway& best = pathway_best(next);
    const std::size_t parent_idx = static_cast<std::size_t>(best.parent_id);
    const FrameObservation& obs = per_pathway.size() == 1 ? per_pathway[0] : per_pathway[parent_idx];
    const std::size_t k = best.trajectory.back().proposal_index;

    FrameResult r;
    r.frame_idx = raw.frame_idx;
    const bool all_empty = std::all_of(obs.proposals.begin(), obs.proposals.end(),
                                       [](const Proposal& p) { return p.mask.empty(); });
    r.present = !(all_empty && !(obs.o > 0.0));
    const Proposal* chosen = r.present ? &obs.proposals[k] : nullptr;
    if (chosen) {
        r.chosen_index = k;
        r.chosen = *chosen;
    }

    // The shared DRM is gated against the RAM of the best pathway's parent.
    if (cfg_.drm_enabled && chosen && shared_drm_->k_drm() > 0) {
        const MemoryBank& ref = parents.pathways[parent_idx].bank;
        if (drm_gate(obs, *chosen, cfg_.drm_cfg, ref.ram(), shared_drm_->last_drm_frame()).admitted()) {
            shared_drm_->drm_append(make_entry(obs, *chosen, EntryKind::Drm));
            r.drm_admitted = true;
        }
    }
    r.decision = r.present ? best.last_decision : RamPolicyDecision::rejected(AdmitReason::TargetAbsent);

    pathways_ = std::move(next);
    refresh_best_view();
    motion_update(r, chosen);
    return r;
}

}  // namespace hybridmem

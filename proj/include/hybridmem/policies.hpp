#pragma once

#include "hybridmem/geometry.hpp"
#include "hybridmem/membank.hpp"
#include "hybridmem/observation.hpp"

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace hybridmem {

enum class AdmitReason {
    Admitted,
    TargetAbsent,
    BelowMaskThr,
    BelowObjThr,
    BelowKfThr,
    GapNotElapsed,
    NotOnBestPathway,
    BelowIouThr,
    BelowConfThr,
    NotTopK,
    InitFrame,  ///< frame 0: the prompt occupies the reserved init slot
};

const char* to_string(AdmitReason reason);

struct RamPolicyDecision {
    bool admit = false;
    AdmitReason reason = AdmitReason::TargetAbsent;

    static RamPolicyDecision admitted() { return {true, AdmitReason::Admitted}; }
    static RamPolicyDecision rejected(AdmitReason why) { return {false, why}; }

    friend bool operator==(const RamPolicyDecision&, const RamPolicyDecision&) = default;
};

/// Thresholds and weights of every RAM policy. Defaults are mid-range and all
/// of them are exposed through the harness configuration.
struct PolicyConfig {
    double alpha = 0.25;      ///< SAMURAI motion weight, SAMITE previous-frame weight
    double alpha_him = 0.4;   ///< HiM2SAM coarse-motion weight
    double beta = 0.3;        ///< HiM2SAM fine-motion weight
    double tau_mask = 0.5;
    double tau_obj = 0.0;
    double tau_kf = 0.3;
    double tau_iou = 0.5;
    double tau_conf = 0.5;    ///< HiM2SAM fine-stage activation threshold
    double tau_mem = 0.6;
    int window_m = 16;
    int delta_ram = 5;
    double epsilon = 1e-6;
    int num_pathways = 3;

    void validate() const;
};

// --- SAM2 --------------------------------------------------------------------

/// Unconditional admission.
RamPolicyDecision fifo_admit(const FrameObservation& obs, const Proposal& chosen);

// --- DAM4SAM -----------------------------------------------------------------

/// Admits when the target is present and the RAM gap has elapsed.
RamPolicyDecision dam_admit(const FrameObservation& obs, const Proposal* chosen, int last_ram_frame,
                            const PolicyConfig& cfg);

// --- SAMURAI -----------------------------------------------------------------

/// Motion consistency: IoU of the Kalman prediction with the candidate box.
double motion_consistency(const std::optional<BBox>& predicted, const Proposal& p);

/// alpha * s_kf + (1 - alpha) * s_mask.
double samurai_score(const std::optional<BBox>& kf_pred, const Proposal& p, double alpha);

/// Threshold gates checked in the order mask, object, motion.
RamPolicyDecision samurai_admit(const Proposal& chosen, double s_kf, const PolicyConfig& cfg);

// --- SAMITE ------------------------------------------------------------------

struct WindowFrame {
    int frame_idx = 0;
    Prototype prototype;
};

struct ScoredFrame {
    int frame_idx = 0;
    double score = 0.0;
};

/// S = (1 - alpha) cos(P, P_first) + alpha cos(P, P_prev) for each window frame.
std::vector<ScoredFrame> samite_calibrate(const std::vector<WindowFrame>& window, const Prototype& anchor_first,
                                          const Prototype& anchor_prev, double alpha);

struct ScoredEntry {
    MemoryEntry entry;
    double score = 0.0;
};

/// RAM = {first, prev} plus the top (k_ram - 2) scored window entries, ties
/// broken towards the more recent frame, returned in chronological order.
/// Throws std::invalid_argument when k_ram < 2.
std::vector<MemoryEntry> samite_select_ram(const std::vector<ScoredEntry>& scored_window, int k_ram,
                                           const MemoryEntry& first_entry, const MemoryEntry& prev_entry);

// --- HiM2SAM -----------------------------------------------------------------

struct HimConfidence {
    double s_conf = 0.0;
    bool used_fine = false;
};

/// Stage 1: alpha s_coarse + (1 - alpha) s_iou. When the best stage-1 value
/// over the frame (`coarse_stage_max`) falls below tau_conf, stage 2:
/// alpha s_coarse + beta s_fine + (1 - alpha - beta) s_iou.
HimConfidence him_confidence(double s_coarse, double s_fine, double s_iou, double coarse_stage_max,
                             const PolicyConfig& cfg);

double him_stage1(double s_coarse, double s_iou, const PolicyConfig& cfg);
double him_stage2(double s_coarse, double s_fine, double s_iou, const PolicyConfig& cfg);

RamPolicyDecision him_admit(const Proposal* chosen, double s_conf, const PolicyConfig& cfg);

// --- SAM2Long ----------------------------------------------------------------

/// Best-pathway admission: s_mask >= tau_iou and o > 0.
RamPolicyDecision sam2long_admit(const FrameObservation& obs, const Proposal& chosen, const PolicyConfig& cfg);

}  // namespace hybridmem

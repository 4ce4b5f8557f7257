#pragma once

#include "hybridmem/geometry.hpp"
#include "hybridmem/membank.hpp"
#include "hybridmem/motion.hpp"
#include "hybridmem/observation.hpp"
#include "hybridmem/pathways.hpp"
#include "hybridmem/policies.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hybridmem {

enum class PolicyKind { Sam2Fifo, Dam4Sam, SamuraiDrm, Sam2LongDrm, SamiteDrm, Him2SamDrm };

inline constexpr std::array<PolicyKind, 6> kAllPolicies = {
    PolicyKind::Sam2Fifo,    PolicyKind::Dam4Sam,   PolicyKind::SamuraiDrm,
    PolicyKind::Sam2LongDrm, PolicyKind::SamiteDrm, PolicyKind::Him2SamDrm,
};

/// Canonical lowercase name, e.g. "samurai_drm".
const char* policy_name(PolicyKind kind);

/// Inverse of policy_name; nullopt for unknown names.
std::optional<PolicyKind> parse_policy(std::string_view name);

struct TrackerConfig {
    PolicyKind policy = PolicyKind::Dam4Sam;
    bool drm_enabled = true;
    int k_ram = 6;
    int k_drm = 3;
    PolicyConfig policy_cfg;
    MotionConfig motion_cfg;
    DrmConfig drm_cfg;

    /// Applies policy-implied settings (the SAM2 baseline never carries a DRM).
    TrackerConfig normalized() const;

    /// Throws std::invalid_argument on any out-of-range field.
    void validate() const;

    /// Defaults for `policy`, already normalized.
    static TrackerConfig for_policy(PolicyKind policy);
};

struct FrameResult {
    int frame_idx = 0;
    std::optional<std::size_t> chosen_index;
    std::optional<Proposal> chosen;
    bool present = false;
    std::optional<double> s_kf;
    std::optional<double> s_conf;
    bool used_fine = false;
    RamPolicyDecision decision;
    bool drm_admitted = false;

    /// Predicted box for evaluation: absent unless present.
    std::optional<BBox> predicted_box() const;
};

/// One line of the golden-trace log. `bank_snapshot` is appended when nonempty.
std::string serialize_frame_result(const FrameResult& r, const std::string& bank_snapshot = {});

// --- selection rules ---------------------------------------------------------

/// Greedy argmax of s_mask, first index on ties; absent when o <= 0 and every
/// proposal mask is empty.
std::optional<std::size_t> select_default(const FrameObservation& obs);

struct SamuraiChoice {
    std::optional<std::size_t> index;
    double s_kf = 0.0;  ///< motion consistency of the chosen proposal (0 when absent)
};

/// Weighted motion/affinity argmax restricted to proposals with s_obj > 0.
SamuraiChoice select_samurai(const FrameObservation& obs, const std::optional<BBox>& kf_pred, double alpha);

struct HimChoice {
    std::optional<std::size_t> index;
    double s_conf = 0.0;
    bool used_fine = false;
};

using BoxPredictor = std::function<std::optional<BBox>()>;

/// Two-stage motion-aware confidence. `fine_pred` is only invoked when the
/// best stage-1 confidence falls below tau_conf.
HimChoice select_him(const FrameObservation& obs, const std::optional<BBox>& coarse_pred, const BoxPredictor& fine_pred,
                     const PolicyConfig& cfg);

/// Linear extrapolation through two dated boxes to `frame_idx`.
BBox extrapolate_box(int f0, const BBox& b0, int f1, const BBox& b1, int frame_idx);

// --- session -----------------------------------------------------------------

/// Produces the decoder output for a raw frame given the memory a pathway
/// conditions on. The identity conditioner models a memory-blind decoder.
using ObservationConditioner =
    std::function<FrameObservation(const FrameObservation& raw, std::span<const MemoryEntry> memory)>;

/// Single-object tracking session for one configured policy. Strictly
/// sequential: frame t depends on the state after frame t-1.
class TrackerSession {
public:
    /// Starts from the frame-0 prompt. `frame0` supplies the features used
    /// for the init prototype when available.
    TrackerSession(TrackerConfig cfg, const BitMask& init_mask, const FrameObservation* frame0 = nullptr);

    const FrameResult& init_result() const { return init_result_; }

    /// Runs predict, select, DRM, RAM, motion update for one frame. Throws
    /// std::invalid_argument when frame indices do not strictly increase.
    FrameResult step(const FrameObservation& obs);

    /// As above, but each bank first conditions the raw observation.
    FrameResult step(const FrameObservation& raw, const ObservationConditioner& condition);

    const TrackerConfig& config() const { return cfg_; }
    int last_frame() const { return last_frame_; }

    /// Bank the decoder reads at the next frame. For SAM2Long this is the best
    /// pathway's RAM together with the shared DRM.
    const MemoryBank& bank() const;

    /// Every bank the session owns (for SAM2Long the best view, then each pathway).
    std::vector<const MemoryBank*> banks() const;

    const PathwaySet* pathways() const { return pathways_ ? &*pathways_ : nullptr; }
    const std::optional<KalmanState>& kalman() const { return kf_; }

private:
    bool uses_motion() const;
    void motion_predict();
    void motion_update(const FrameResult& r, const Proposal* chosen);
    void rebuild_samite_ram(int frame_idx);
    void refresh_best_view();
    FrameResult step_sam2long(const FrameObservation& raw, const ObservationConditioner* condition);

    TrackerConfig cfg_;
    std::optional<MemoryBank> bank_;
    std::optional<PathwaySet> pathways_;
    std::optional<MemoryBank> shared_drm_;  // DRM slots only
    std::optional<MemoryBank> best_view_;   // best pathway RAM + shared DRM
    FrameResult init_result_;
    int last_frame_ = 0;

    std::optional<KalmanState> kf_;
    std::optional<BBox> kf_pred_;
    int frames_since_update_ = 0;

    // (frame, box) of the two most recent RAM-admitted frames
    std::vector<std::pair<int, BBox>> accepted_;

    MemoryEntry first_anchor_;
    std::vector<MemoryEntry> history_;  // present frames with prototypes
};

}  // namespace hybridmem

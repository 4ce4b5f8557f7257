#pragma once

#include "hybridmem/geometry.hpp"
#include "hybridmem/membank.hpp"
#include "hybridmem/observation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hybridmem {

enum class MotionKind { Linear, Sinusoid, RandomWalk };

const char* to_string(MotionKind kind);
std::optional<MotionKind> parse_motion_kind(std::string_view name);

struct MotionParams {
    double vx = 2.0;  ///< Linear / initial RandomWalk velocity, px per frame
    double vy = 1.5;
    double amplitude = 40.0;  ///< Sinusoid amplitude, px
    double frequency = 0.02;  ///< Sinusoid cycles per frame
    double step_sigma = 0.5;  ///< RandomWalk velocity perturbation, px per frame

    friend bool operator==(const MotionParams&, const MotionParams&) = default;
};

struct SceneConfig {
    std::uint64_t seed = 1;
    int frames = 200;
    int width = 256;
    int height = 256;
    MotionKind target_motion = MotionKind::Linear;
    MotionParams motion;
    double target_w = 48.0;
    double target_h = 40.0;
    int n_distractors = 0;
    double distractor_similarity = 0.5;
    std::vector<std::pair<int, int>> occlusions;  ///< [start, end) frame intervals
    double score_noise = 0.05;
    int proto_dim = 16;
    int feature_cells = 16;      ///< feature grid is feature_cells x feature_cells
    double feature_noise = 0.05; ///< per-channel Gaussian noise on feature cells

    /// Throws std::invalid_argument on inconsistent settings. Frame 0 must be
    /// visible since it carries the initialization prompt.
    void validate() const;

    bool occluded(int frame) const;

    friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

struct GroundTruthFrame {
    std::optional<BBox> box;  ///< absent while the target is occluded
    bool visible = false;
};

struct SequenceRecord {
    SceneConfig config;
    std::vector<GroundTruthFrame> gt;
    std::vector<FrameObservation> observations;

    /// Prompt mask: the frame-0 ground-truth box rendered on the grid.
    BitMask init_mask() const;
};

/// Deterministic synthetic sequence. Proposal 0 tracks the target, proposal 1
/// the nearest distractor (or an enlarged target mask without distractors),
/// proposal 2 a merged or shrunken mask.
SequenceRecord gen_sequence(const SceneConfig& cfg);

struct SuiteEntry {
    std::string family;
    SceneConfig scene;
};

inline constexpr int kSuiteVersion = 1;

/// Frozen evaluation suite: occlusion, fast_motion and distractor families
/// with `seeds_per_family` seeds each.
std::vector<SuiteEntry> suite_standard(int seeds_per_family = 20);

/// Digest over the serialized suite, recorded as a regression fixture.
std::string suite_digest(const std::vector<SuiteEntry>& suite);

/// Mock memory read path. Each stored entry votes for the proposal whose
/// foreground prototype it matches best (cosine >= vote_threshold); the vote
/// share is blended into s_mask with weight memory_gain.
struct ReadPathConfig {
    double memory_gain = 0.5;
    double vote_threshold = 0.95;

    friend bool operator==(const ReadPathConfig&, const ReadPathConfig&) = default;
};

FrameObservation condition_on_memory(const FrameObservation& raw, std::span<const MemoryEntry> memory,
                                     const ReadPathConfig& cfg);

}  // namespace hybridmem

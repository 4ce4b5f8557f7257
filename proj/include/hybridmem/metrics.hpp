#pragma once

#include "hybridmem/geometry.hpp"

#include <optional>
#include <span>
#include <vector>

namespace hybridmem {

using BoxTrack = std::vector<std::optional<BBox>>;

struct EvalOutcome {
    double success_auc = 0.0;
    double precision_at_20 = 0.0;
    double norm_precision_auc = 0.0;
    double ao = 0.0;
    double sr50 = 0.0;
    double sr75 = 0.0;
    double q = 0.0;
    double acc = 0.0;
    double rob = 0.0;
};

/// 21 overlap thresholds 0, 0.05, ..., 1.
std::vector<double> success_thresholds();

/// Success rate at every threshold of `success_thresholds()`. A frame counts
/// at threshold 0 when IoU > 0 and at theta > 0 when IoU >= theta. Frames
/// with absent ground truth are skipped; an absent prediction has IoU 0.
std::vector<double> success_curve(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt);

/// Mean of the success curve. Throws std::invalid_argument on length mismatch.
double success_auc(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt);

struct PrecisionMetrics {
    double precision_at_20 = 0.0;
    double norm_precision_auc = 0.0;
};

/// Center-error precision at 20 px, and the AUC of the precision curve over
/// normalized thresholds 0, 0.005, ..., 0.5 where the center error is divided
/// by the ground-truth box diagonal.
PrecisionMetrics precision_metrics(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt);

struct AoSr {
    double ao = 0.0;
    double sr50 = 0.0;
    double sr75 = 0.0;
};

/// Mean IoU and success rates (IoU > theta) over frames with ground truth.
AoSr ao_sr(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt);

struct VotQar {
    double q = 0.0;
    double acc = 0.0;
    double rob = 0.0;
};

/// Simplified quality / accuracy / robustness:
///   acc = mean IoU over frames with visible target and a prediction,
///   rob = fraction of visible frames with IoU > 0,
///   q   = mean over all frames of IoU (visible) or [no prediction] (absent).
VotQar vot_qar(const std::vector<bool>& pred_present, std::span<const double> pred_iou,
               const std::vector<bool>& gt_visible);

/// All columns for one sequence.
EvalOutcome evaluate(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt);

}  // namespace hybridmem

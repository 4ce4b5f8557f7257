#include "hybridmem/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace hybridmem {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) {
        throw std::invalid_argument("metrics: prediction length " + std::to_string(a) +
                                    " differs from ground truth length " + std::to_string(b));
    }
}

double frame_iou(const std::optional<BBox>& pred, const BBox& gt) { return pred ? box_iou(*pred, gt) : 0.0; }

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::vector<double> visible_ious(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt) {
    require_same_length(pred.size(), gt.size());
    std::vector<double> out;
    out.reserve(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i]) out.push_back(frame_iou(pred[i], *gt[i]));
    }
    return out;
}

}  // namespace

std::vector<double> success_thresholds() {
    std::vector<double> t;
    t.reserve(21);
    for (int i = 0; i <= 20; ++i) t.push_back(i / 20.0);
    return t;
}

std::vector<double> success_curve(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt) {
    const auto ious = visible_ious(pred, gt);
    std::vector<double> curve;
    for (const double theta : success_thresholds()) {
        if (ious.empty()) {
            curve.push_back(0.0);
            continue;
        }
        std::size_t hits = 0;
        for (const double iou : ious) hits += theta == 0.0 ? iou > 0.0 : iou >= theta;
        curve.push_back(static_cast<double>(hits) / static_cast<double>(ious.size()));
    }
    return curve;
}

double success_auc(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt) {
    return mean(success_curve(pred, gt));
}

PrecisionMetrics precision_metrics(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt) {
    require_same_length(pred.size(), gt.size());
    std::vector<double> err, norm_err;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!gt[i]) continue;
        if (!pred[i]) {
            err.push_back(INFINITY);
            norm_err.push_back(INFINITY);
            continue;
        }
        const double d = std::hypot(pred[i]->cx() - gt[i]->cx(), pred[i]->cy() - gt[i]->cy());
        const double diag = std::hypot(gt[i]->w, gt[i]->h);
        err.push_back(d);
        norm_err.push_back(diag > 0.0 ? d / diag : INFINITY);
    }
    PrecisionMetrics out;
    if (err.empty()) return out;
    const double n = static_cast<double>(err.size());

    std::size_t hits = 0;
    for (const double e : err) hits += e <= 20.0;
    out.precision_at_20 = static_cast<double>(hits) / n;

    double area = 0.0;
    constexpr int kSteps = 100;
    for (int k = 0; k <= kSteps; ++k) {
        const double theta = 0.5 * k / kSteps;
        std::size_t h = 0;
        for (const double e : norm_err) h += e <= theta;
        area += static_cast<double>(h) / n;
    }
    out.norm_precision_auc = area / (kSteps + 1);
    return out;
}

AoSr ao_sr(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt) {
    const auto ious = visible_ious(pred, gt);
    AoSr out;
    if (ious.empty()) return out;
    std::size_t above50 = 0, above75 = 0;
    for (const double iou : ious) {
        above50 += iou > 0.5;
        above75 += iou > 0.75;
    }
    const double n = static_cast<double>(ious.size());
    out.ao = mean(ious);
    out.sr50 = static_cast<double>(above50) / n;
    out.sr75 = static_cast<double>(above75) / n;
    return out;
}

VotQar vot_qar(const std::vector<bool>& pred_present, std::span<const double> pred_iou,
               const std::vector<bool>& gt_visible) {
    require_same_length(pred_present.size(), gt_visible.size());
    require_same_length(pred_iou.size(), gt_visible.size());
    VotQar out;
    if (gt_visible.empty()) return out;
    double acc_sum = 0.0, q_sum = 0.0;
    std::size_t acc_n = 0, visible_n = 0, robust_n = 0;
    for (std::size_t i = 0; i < gt_visible.size(); ++i) {
        if (gt_visible[i]) {
            const double iou = pred_present[i] ? pred_iou[i] : 0.0;
            ++visible_n;
            robust_n += iou > 0.0;
            q_sum += iou;
            if (pred_present[i]) {
                acc_sum += iou;
                ++acc_n;
            }
        } else {
            q_sum += pred_present[i] ? 0.0 : 1.0;
        }
    }
    out.acc = acc_n ? acc_sum / static_cast<double>(acc_n) : 0.0;
    out.rob = visible_n ? static_cast<double>(robust_n) / static_cast<double>(visible_n) : 0.0;
    out.q = q_sum / static_cast<double>(gt_visible.size());
    return out;
}

EvalOutcome evaluate(std::span<const std::optional<BBox>> pred, std::span<const std::optional<BBox>> gt) {
    require_same_length(pred.size(), gt.size());
    EvalOutcome e;
    e.success_auc = success_auc(pred, gt);
    const auto p = precision_metrics(pred, gt);
    e.precision_at_20 = p.precision_at_20;
    e.norm_precision_auc = p.norm_precision_auc;
    const auto a = ao_sr(pred, gt);
    e.ao = a.ao;
    e.sr50 = a.sr50;
    e.sr75 = a.sr75;

    std::vector<bool> present(pred.size()), visible(gt.size());
    std::vector<double> ious(gt.size(), 0.0);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        present[i] = pred[i].has_value();
        visible[i] = gt[i].has_value();
        if (pred[i] && gt[i]) ious[i] = box_iou(*pred[i], *gt[i]);
    }
    const auto v = vot_qar(present, ious, visible);
    e.q = v.q;
    e.acc = v.acc;
    e.rob = v.rob;
    return e;
}

}  // namespace hybridmem

#pragma once

#include "hybridmem/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace hybridmem {

/// Pooled appearance vector for a mask region.
using Prototype = Eigen::VectorXd;

/// One candidate mask from the multi-mask decoder.
struct Proposal {
    BitMask mask;
    double s_mask = 0.0;  ///< predicted mask quality in [0, 1]
    double s_obj = 0.0;   ///< object score, sign-meaningful
    std::optional<BBox> bbox;

    /// Builds a proposal with the cached box derived from the mask.
    static Proposal make(BitMask mask, double s_mask, double s_obj) {
        Proposal p;
        p.bbox = mask_to_bbox(mask);
        p.mask = std::move(mask);
        p.s_mask = s_mask;
        p.s_obj = s_obj;
        return p;
    }
};

/// Dense feature map: `values` has one row per cell (row-major, y * width + x)
/// and one column per feature channel.
struct FeatureGrid {
    int width = 0;
    int height = 0;
    Eigen::MatrixXd values;

    int dim() const { return static_cast<int>(values.cols()); }
    int cells() const { return width * height; }
};

inline constexpr std::size_t kProposalsPerFrame = 3;

struct FrameObservation {
    int frame_idx = 0;
    std::array<Proposal, kProposalsPerFrame> proposals;
    double o = 0.0;  ///< frame-level object presence score
    std::optional<FeatureGrid> features;
};

struct PrototypePair {
    Prototype fg;
    Prototype bg;
};

/// Foreground / background mean features. The mask is sampled at each cell
/// center (nearest neighbour). A side without cells yields the zero vector.
PrototypePair extract_prototypes(const FeatureGrid& grid, const BitMask& mask);

/// Cosine similarity; 0 when either vector has zero norm. Throws
/// std::invalid_argument on size mismatch.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    const double c = a.dot(b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

}  // namespace hybridmem

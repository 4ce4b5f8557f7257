#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hybridmem {

/// Axis-aligned box in pixel coordinates, top-left anchored.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double cx() const { return x + 0.5 * w; }
    double cy() const { return y + 0.5 * h; }

    static BBox from_center(double cx, double cy, double w, double h) {
        return {cx - 0.5 * w, cy - 0.5 * h, w, h};
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

/// Intersection over union of two boxes. Zero when either box has zero area.
double box_iou(const BBox& a, const BBox& b);

/// Horizontal foreground interval [start, start + len) on one mask row.
struct Run {
    int row = 0;
    int start = 0;
    int len = 0;

    friend bool operator==(const Run&, const Run&) = default;
};

/// Binary mask stored as row-major run-length intervals.
///
/// Runs are kept sorted by (row, start), never touch or overlap, and lie
/// inside the mask bounds. Every constructor validates this.
class BitMask {
public:
    BitMask() = default;
    BitMask(int width, int height);

    /// Throws std::invalid_argument if the runs are unsorted, overlapping,
    /// empty or out of bounds. Adjacent runs on the same row are merged.
    static BitMask from_runs(int width, int height, std::vector<Run> runs);

    /// Row-major dense bitmap, nonzero = foreground.
    static BitMask from_dense(int width, int height, const std::vector<std::uint8_t>& pixels);

    /// Filled rectangle covering pixels whose centers fall inside `box`.
    static BitMask rectangle(int width, int height, const BBox& box);

    /// Filled ellipse inscribed in `box`, pixel-center sampling.
    static BitMask ellipse(int width, int height, const BBox& box);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<Run>& runs() const { return runs_; }
    bool empty() const { return runs_.empty(); }

    bool contains(int x, int y) const;

    std::vector<std::uint8_t> to_dense() const;

    /// Parses the fixture text form, see `to_rle_text`.
    static BitMask parse_rle_text(std::string_view text);

    /// Fixture text form:
    ///
    ///     mask := W ' ' H { ';' ' ' row ':' run { ',' run } }
    ///     run  := start '+' len
    ///
    /// Rows appear in increasing order, each at most once. An empty 4x4 mask
    /// is "4 4"; a mask with pixels (1,0),(2,0) and (0,2) is "4 4; 0:1+2; 2:0+1".
    std::string to_rle_text() const;

    friend bool operator==(const BitMask&, const BitMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Run> runs_;
};

std::int64_t mask_area(const BitMask& m);

/// Throws std::invalid_argument when the masks have different dimensions.
/// Two empty masks have IoU 0.
double mask_iou(const BitMask& a, const BitMask& b);

std::int64_t mask_intersection_area(const BitMask& a, const BitMask& b);

/// Tightest box covering the foreground, in pixel units; nullopt for empty masks.
std::optional<BBox> mask_to_bbox(const BitMask& m);

}  // namespace hybridmem

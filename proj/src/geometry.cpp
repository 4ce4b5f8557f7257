#include "hybridmem/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hybridmem {

double box_iou(const BBox& a, const BBox& b) {
    // Areas from corner differences so that identical boxes give exactly 1.
    const double ax2 = a.x + a.w, ay2 = a.y + a.h;
    const double bx2 = b.x + b.w, by2 = b.y + b.h;
    const double area_a = (ax2 - a.x) * (ay2 - a.y);
    const double area_b = (bx2 - b.x) * (by2 - b.y);
    if (!(area_a > 0.0) || !(area_b > 0.0)) return 0.0;

    const double iw = std::min(ax2, bx2) - std::max(a.x, b.x);
    const double ih = std::min(ay2, by2) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = area_a + area_b - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

BitMask::BitMask(int width, int height) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("BitMask: negative dimensions");
}

BitMask BitMask::from_runs(int width, int height, std::vector<Run> runs) {
    BitMask m(width, height);
    m.runs_.reserve(runs.size());
    for (const Run& r : runs) {
        if (r.len <= 0) throw std::invalid_argument("BitMask: run with nonpositive length");
        if (r.row < 0 || r.row >= height || r.start < 0 || r.start + r.len > width) {
            throw std::invalid_argument("BitMask: run out of bounds");
        }
        if (!m.runs_.empty()) {
            Run& prev = m.runs_.back();
            if (r.row < prev.row || (r.row == prev.row && r.start < prev.start + prev.len)) {
                throw std::invalid_argument("BitMask: runs unsorted or overlapping");
            }
            if (r.row == prev.row && r.start == prev.start + prev.len) {
                prev.len += r.len;
                continue;
            }
        }
        m.runs_.push_back(r);
    }
    return m;
}

BitMask BitMask::from_dense(int width, int height, const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("BitMask: dense buffer size mismatch");
    }
    BitMask m(width, height);
    for (int y = 0; y < height; ++y) {
        const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * width;
        int x = 0;
        while (x < width) {
            if (!row[x]) {
                ++x;
                continue;
            }
            const int start = x;
            while (x < width && row[x]) ++x;
            m.runs_.push_back({y, start, x - start});
        }
    }
    return m;
}

namespace {

// Pixel columns [lo, hi) whose centers satisfy lo_edge <= c + 0.5 < hi_edge.
std::pair<int, int> covered_span(double lo_edge, double hi_edge, int limit) {
    int lo = static_cast<int>(std::ceil(lo_edge - 0.5));
    int hi = static_cast<int>(std::ceil(hi_edge - 0.5));
    lo = std::clamp(lo, 0, limit);
    hi = std::clamp(hi, 0, limit);
    return {lo, hi};
}

}  // namespace

BitMask BitMask::rectangle(int width, int height, const BBox& box) {
    BitMask m(width, height);
    if (!(box.w > 0.0) || !(box.h > 0.0)) return m;
    const auto [x0, x1] = covered_span(box.x, box.x + box.w, width);
    const auto [y0, y1] = covered_span(box.y, box.y + box.h, height);
    if (x1 <= x0) return m;
    for (int y = y0; y < y1; ++y) m.runs_.push_back({y, x0, x1 - x0});
    return m;
}

BitMask BitMask::ellipse(int width, int height, const BBox& box) {
    BitMask m(width, height);
    if (!(box.w > 0.0) || !(box.h > 0.0)) return m;
    const double rx = 0.5 * box.w, ry = 0.5 * box.h;
    const double cx = box.cx(), cy = box.cy();
    const auto [y0, y1] = covered_span(box.y, box.y + box.h, height);
    for (int y = y0; y < y1; ++y) {
        const double dy = (y + 0.5 - cy) / ry;
        const double t = 1.0 - dy * dy;
        if (t <= 0.0) continue;
        const double half = rx * std::sqrt(t);
        const auto [x0, x1] = covered_span(cx - half, cx + half, width);
        if (x1 > x0) m.runs_.push_back({y, x0, x1 - x0});
    }
    return m;
}

bool BitMask::contains(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
    // First run strictly after (y, x).
    auto it = std::upper_bound(runs_.begin(), runs_.end(), std::pair{y, x},
                               [](const std::pair<int, int>& p, const Run& r) {
                                   return p.first < r.row || (p.first == r.row && p.second < r.start);
                               });
    if (it == runs_.begin()) return false;
    --it;
    return it->row == y && x < it->start + it->len;
}

std::vector<std::uint8_t> BitMask::to_dense() const {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(width_) * height_, 0);
    for (const Run& r : runs_) {
        std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(r.row) * width_ + r.start, r.len, 1);
    }
    return out;
}

std::string BitMask::to_rle_text() const {
    std::ostringstream os;
    os << width_ << ' ' << height_;
    int current_row = -1;
    for (const Run& r : runs_) {
        if (r.row != current_row) {
            os << "; " << r.row << ':';
            current_row = r.row;
        } else {
            os << ',';
        }
        os << r.start << '+' << r.len;
    }
    return os.str();
}

namespace {

struct RleCursor {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    int integer() {
        skip_ws();
        int value = 0;
        const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
        if (ec != std::errc{}) {
            throw std::invalid_argument("RLE mask: expected integer at offset " + std::to_string(pos));
        }
        pos = static_cast<std::size_t>(ptr - text.data());
        return value;
    }
    bool accept(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) {
            throw std::invalid_argument(std::string("RLE mask: expected '") + c + "' at offset " +
                                        std::to_string(pos));
        }
    }
};

}  // namespace

BitMask BitMask::parse_rle_text(std::string_view text) {
    RleCursor cur{text};
    const int w = cur.integer();
    const int h = cur.integer();
    std::vector<Run> runs;
    int last_row = -1;
    while (cur.accept(';')) {
        const int row = cur.integer();
        if (row <= last_row) throw std::invalid_argument("RLE mask: rows must be strictly increasing");
        last_row = row;
        cur.expect(':');
        do {
            const int start = cur.integer();
            cur.expect('+');
            const int len = cur.integer();
            runs.push_back({row, start, len});
        } while (cur.accept(','));
    }
    if (!cur.at_end()) throw std::invalid_argument("RLE mask: trailing characters");
    return from_runs(w, h, std::move(runs));
}

std::int64_t mask_area(const BitMask& m) {
    std::int64_t total = 0;
    for (const Run& r : m.runs()) total += r.len;
    return total;
}

std::int64_t mask_intersection_area(const BitMask& a, const BitMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("mask dimensions differ");
    }
    const auto& ra = a.runs();
    const auto& rb = b.runs();
    std::size_t i = 0, j = 0;
    std::int64_t inter = 0;
    while (i < ra.size() && j < rb.size()) {
        const Run& p = ra[i];
        const Run& q = rb[j];
        if (p.row != q.row) {
            (p.row < q.row ? i : j)++;
            continue;
        }
        const int lo = std::max(p.start, q.start);
        const int hi = std::min(p.start + p.len, q.start + q.len);
        if (hi > lo) inter += hi - lo;
        if (p.start + p.len < q.start + q.len) {
            ++i;
        } else {
            ++j;
        }
    }
    return inter;
}

double mask_iou(const BitMask& a, const BitMask& b) {
    const std::int64_t inter = mask_intersection_area(a, b);
    const std::int64_t uni = mask_area(a) + mask_area(b) - inter;
    if (uni == 0) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<BBox> mask_to_bbox(const BitMask& m) {
    if (m.empty()) return std::nullopt;
    int x0 = m.width(), x1 = 0;
    for (const Run& r : m.runs()) {
        x0 = std::min(x0, r.start);
        x1 = std::max(x1, r.start + r.len);
    }
    const int y0 = m.runs().front().row;
    const int y1 = m.runs().back().row + 1;
    return BBox{static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(x1 - x0),
                static_cast<double>(y1 - y0)};
}

}  // namespace hybridmem

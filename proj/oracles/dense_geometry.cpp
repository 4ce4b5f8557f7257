#include "oracles.hpp"

#include <cmath>

namespace oracle {

namespace {

long to_cells(double v, int subdiv) { return std::lround(v * subdiv); }

}  // namespace

double raster_box_iou(const Rect& a, const Rect& b, int subdiv) {
    const long ax0 = to_cells(a.x, subdiv), ax1 = to_cells(a.x + a.w, subdiv);
    const long ay0 = to_cells(a.y, subdiv), ay1 = to_cells(a.y + a.h, subdiv);
    const long bx0 = to_cells(b.x, subdiv), bx1 = to_cells(b.x + b.w, subdiv);
    const long by0 = to_cells(b.y, subdiv), by1 = to_cells(b.y + b.h, subdiv);
    const long lo_x = std::min(ax0, bx0), hi_x = std::max(ax1, bx1);
    const long lo_y = std::min(ay0, by0), hi_y = std::max(ay1, by1);

    long in_a = 0, in_b = 0, both = 0;
    for (long y = lo_y; y < hi_y; ++y) {
        for (long x = lo_x; x < hi_x; ++x) {
            const bool pa = x >= ax0 && x < ax1 && y >= ay0 && y < ay1;
            const bool pb = x >= bx0 && x < bx1 && y >= by0 && y < by1;
            in_a += pa;
            in_b += pb;
            both += pa && pb;
        }
    }
    if (in_a == 0 || in_b == 0) return 0.0;
    return static_cast<double>(both) / static_cast<double>(in_a + in_b - both);
}

std::int64_t dense_area(const Dense& m) {
    std::int64_t n = 0;
    for (const auto p : m.px) n += p != 0;
    return n;
}

std::int64_t dense_intersection(const Dense& a, const Dense& b) {
    std::int64_t n = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) n += a.at(x, y) && b.at(x, y);
    }
    return n;
}

double dense_iou(const Dense& a, const Dense& b) {
    std::int64_t inter = 0, uni = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            const bool pa = a.at(x, y), pb = b.at(x, y);
            inter += pa && pb;
            uni += pa || pb;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<Rect> dense_bbox(const Dense& m) {
    int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return std::nullopt;
    return Rect{double(x0), double(y0), double(x1 - x0 + 1), double(y1 - y0 + 1)};
}

Dense dense_rectangle(int width, int height, const Rect& r) {
    Dense d{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            if (px >= r.x && px < r.x + r.w && py >= r.y && py < r.y + r.h) {
                d.px[static_cast<std::size_t>(y) * width + x] = 1;
            }
        }
    }
    return d;
}

double plain_box_iou(const Rect& a, const Rect& b) {
    const double area_a = a.w * a.h, area_b = b.w * b.h;
    if (!(area_a > 0.0) || !(area_b > 0.0)) return 0.0;
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    return inter / (area_a + area_b - inter);
}

}  // namespace oracle

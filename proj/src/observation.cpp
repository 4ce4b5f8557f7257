#include "hybridmem/observation.hpp"

namespace hybridmem {

PrototypePair extract_prototypes(const FeatureGrid& grid, const BitMask& mask) {
    const int dim = grid.dim();
    PrototypePair out{Prototype::Zero(dim), Prototype::Zero(dim)};
    if (grid.cells() == 0 || mask.width() == 0 || mask.height() == 0) return out;

    int n_fg = 0, n_bg = 0;
    for (int gy = 0; gy < grid.height; ++gy) {
        const int py = static_cast<int>((gy + 0.5) * mask.height() / grid.height);
        for (int gx = 0; gx < grid.width; ++gx) {
            const int px = static_cast<int>((gx + 0.5) * mask.width() / grid.width);
            const auto row = grid.values.row(gy * grid.width + gx).transpose();
            if (mask.contains(px, py)) {
                out.fg += row;
                ++n_fg;
            } else {
                out.bg += row;
                ++n_bg;
            }
        }
    }
    if (n_fg > 0) out.fg /= n_fg;
    if (n_bg > 0) out.bg /= n_bg;
    return out;
}

}  // namespace hybridmem

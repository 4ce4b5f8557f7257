#pragma once

#include "hybridmem/fixtures.hpp"
#include "hybridmem/geometry.hpp"
#include "hybridmem/observation.hpp"

#include "oracles.hpp"

#include <json.hpp>

#include <filesystem>

namespace testutil {

inline std::filesystem::path fixture_dir() { return HYBRIDMEM_FIXTURE_DIR; }

inline nlohmann::json load_oracle(const std::string& name) {
    return nlohmann::json::parse(hybridmem::read_file(fixture_dir() / "oracle" / name));
}

inline hybridmem::BBox to_bbox(const oracle::Rect& r) { return {r.x, r.y, r.w, r.h}; }

inline oracle::Rect rect_from_json(const nlohmann::json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

inline std::optional<oracle::Rect> opt_rect_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    return rect_from_json(j);
}

inline hybridmem::BitMask to_mask(const oracle::Dense& d) {
    return hybridmem::BitMask::from_dense(d.width, d.height, d.px);
}

/// Observation whose proposals are rectangles on a `size` x `size` grid.
inline hybridmem::FrameObservation rect_obs(int frame, const std::array<hybridmem::BBox, 3>& boxes,
                                            const std::array<double, 3>& s_mask, double o = 1.0, int size = 64,
                                            const std::array<double, 3>& s_obj = {1.0, 1.0, 1.0}) {
    hybridmem::FrameObservation obs;
    obs.frame_idx = frame;
    obs.o = o;
    for (std::size_t i = 0; i < 3; ++i) {
        obs.proposals[i] = hybridmem::Proposal::make(hybridmem::BitMask::rectangle(size, size, boxes[i]), s_mask[i], s_obj[i]);
    }
    return obs;
}

}  // namespace testutil

#pragma once

#include "hybridmem/observation.hpp"
#include "hybridmem/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace hybridmem {

nlohmann::json scene_to_json(const SceneConfig& cfg);
SceneConfig scene_from_json(const nlohmann::json& j);

/// One observation per line:
///
///     {"frame":3,"o":0.71,"proposals":[{"mask":"<rle>","s_mask":0.9,"s_obj":0.71},...],
///      "features":{"width":8,"height":8,"dim":4,"values":[...]}}
///
/// `values` is cell-major (cell y * width + x, then channel). `features` is
/// null when the observation carries none.
std::string observation_to_line(const FrameObservation& obs);
FrameObservation observation_from_line(std::string_view line);

/// Ground-truth sidecar line: {"frame":3,"visible":true,"bbox":[x,y,w,h]} (bbox null when occluded).
std::string gt_to_line(int frame, const GroundTruthFrame& gt);
GroundTruthFrame gt_from_line(std::string_view line, int* frame = nullptr);

/// Writes scene.json, observations.jsonl and gt.jsonl into `dir`.
void write_sequence_fixture(const SequenceRecord& rec, const std::filesystem::path& dir);
SequenceRecord read_sequence_fixture(const std::filesystem::path& dir);

/// FNV-1a over the observation and ground-truth lines of every frame.
std::string sequence_digest(const SequenceRecord& rec);

/// Writes `content` to `path` through a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace hybridmem

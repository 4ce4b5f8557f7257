#include "hybridmem/fixtures.hpp"

#include "hybridmem/digest.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hybridmem {

using nlohmann::json;

json scene_to_json(const SceneConfig& c) {
    json occ = json::array();
    for (const auto& [s, e] : c.occlusions) occ.push_back({s, e});
    return json{
        {"seed", c.seed},
        {"frames", c.frames},
        {"width", c.width},
        {"height", c.height},
        {"target_motion", to_string(c.target_motion)},
        {"motion",
         {{"vx", c.motion.vx},
          {"vy", c.motion.vy},
          {"amplitude", c.motion.amplitude},
          {"frequency", c.motion.frequency},
          {"step_sigma", c.motion.step_sigma}}},
        {"target_w", c.target_w},
        {"target_h", c.target_h},
        {"n_distractors", c.n_distractors},
        {"distractor_similarity", c.distractor_similarity},
        {"occlusions", occ},
        {"score_noise", c.score_noise},
        {"proto_dim", c.proto_dim},
        {"feature_cells", c.feature_cells},
        {"feature_noise", c.feature_noise},
    };
}

SceneConfig scene_from_json(const json& j) {
    SceneConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.frames = j.at("frames").get<int>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    const auto kind = parse_motion_kind(j.at("target_motion").get<std::string>());
    if (!kind) throw std::invalid_argument("scene: unknown target_motion");
    c.target_motion = *kind;
    const json& m = j.at("motion");
    c.motion.vx = m.at("vx").get<double>();
    c.motion.vy = m.at("vy").get<double>();
    c.motion.amplitude = m.at("amplitude").get<double>();
    c.motion.frequency = m.at("frequency").get<double>();
    c.motion.step_sigma = m.at("step_sigma").get<double>();
    c.target_w = j.at("target_w").get<double>();
    c.target_h = j.at("target_h").get<double>();
    c.n_distractors = j.at("n_distractors").get<int>();
    c.distractor_similarity = j.at("distractor_similarity").get<double>();
    for (const auto& iv : j.at("occlusions")) c.occlusions.push_back({iv.at(0).get<int>(), iv.at(1).get<int>()});
    c.score_noise = j.at("score_noise").get<double>();
    c.proto_dim = j.at("proto_dim").get<int>();
    c.feature_cells = j.at("feature_cells").get<int>();
    c.feature_noise = j.at("feature_noise").get<double>();
    return c;
}

std::string observation_to_line(const FrameObservation& obs) {
    json props = json::array();
    for (const auto& p : obs.proposals) {
        props.push_back({{"mask", p.mask.to_rle_text()}, {"s_mask", p.s_mask}, {"s_obj", p.s_obj}});
    }
    json j{{"frame", obs.frame_idx}, {"o", obs.o}, {"proposals", props}};
    if (obs.features) {
        const FeatureGrid& g = *obs.features;
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(g.values.size()));
        for (Eigen::Index r = 0; r < g.values.rows(); ++r) {
            for (Eigen::Index c = 0; c < g.values.cols(); ++c) flat.push_back(g.values(r, c));
        }
        j["features"] = {{"width", g.width}, {"height", g.height}, {"dim", g.dim()}, {"values", flat}};
    } else {
        j["features"] = nullptr;
    }
    return j.dump();
}

FrameObservation observation_from_line(std::string_view line) {
    const json j = json::parse(line);
    FrameObservation obs;
    obs.frame_idx = j.at("frame").get<int>();
    obs.o = j.at("o").get<double>();
    const json& props = j.at("proposals");
    if (props.size() != kProposalsPerFrame) throw std::invalid_argument("observation: expected 3 proposals");
    for (std::size_t i = 0; i < kProposalsPerFrame; ++i) {
        const json& p = props[i];
        obs.proposals[i] = Proposal::make(BitMask::parse_rle_text(p.at("mask").get<std::string>()),
                                          p.at("s_mask").get<double>(), p.at("s_obj").get<double>());
    }
    const json& f = j.at("features");
    if (!f.is_null()) {
        FeatureGrid g;
        g.width = f.at("width").get<int>();
        g.height = f.at("height").get<int>();
        const int dim = f.at("dim").get<int>();
        const auto flat = f.at("values").get<std::vector<double>>();
        if (flat.size() != static_cast<std::size_t>(g.width) * g.height * dim) {
            throw std::invalid_argument("observation: feature buffer size mismatch");
        }
        g.values.resize(g.cells(), dim);
        std::size_t k = 0;
        for (int r = 0; r < g.cells(); ++r) {
            for (int c = 0; c < dim; ++c) g.values(r, c) = flat[k++];
        }
        obs.features = std::move(g);
    }
    return obs;
}

std::string gt_to_line(int frame, const GroundTruthFrame& gt) {
    json j{{"frame", frame}, {"visible", gt.visible}};
    if (gt.box) {
        j["bbox"] = {gt.box->x, gt.box->y, gt.box->w, gt.box->h};
    } else {
        j["bbox"] = nullptr;
    }
    return j.dump();
}

GroundTruthFrame gt_from_line(std::string_view line, int* frame) {
    const json j = json::parse(line);
    GroundTruthFrame gt;
    gt.visible = j.at("visible").get<bool>();
    const json& b = j.at("bbox");
    if (!b.is_null()) gt.box = BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
    if (frame) *frame = j.at("frame").get<int>();
    return gt;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_sequence_fixture(const SequenceRecord& rec, const std::filesystem::path& dir) {
    std::string obs_text, gt_text;
    for (const auto& o : rec.observations) obs_text += observation_to_line(o) + '\n';
    for (std::size_t t = 0; t < rec.gt.size(); ++t) gt_text += gt_to_line(static_cast<int>(t), rec.gt[t]) + '\n';
    write_file_atomic(dir / "scene.json", scene_to_json(rec.config).dump(2) + '\n');
    write_file_atomic(dir / "observations.jsonl", obs_text);
    write_file_atomic(dir / "gt.jsonl", gt_text);
}

SequenceRecord read_sequence_fixture(const std::filesystem::path& dir) {
    SequenceRecord rec;
    rec.config = scene_from_json(json::parse(read_file(dir / "scene.json")));
    std::istringstream obs_in(read_file(dir / "observations.jsonl"));
    for (std::string line; std::getline(obs_in, line);) {
        if (!line.empty()) rec.observations.push_back(observation_from_line(line));
    }
    std::istringstream gt_in(read_file(dir / "gt.jsonl"));
    for (std::string line; std::getline(gt_in, line);) {
        if (!line.empty()) rec.gt.push_back(gt_from_line(line));
    }
    if (rec.gt.size() != rec.observations.size()) throw std::runtime_error("fixture: gt/observation length mismatch");
    return rec;
}

std::string sequence_digest(const SequenceRecord& rec) {
    Fnv1a h;
    for (std::size_t t = 0; t < rec.observations.size(); ++t) {
        h.add(observation_to_line(rec.observations[t])).add("\n");
        h.add(gt_to_line(static_cast<int>(t), rec.gt[t])).add("\n");
    }
    return h.hex();
}

}  // namespace hybridmem

#include "hybridmem/harness.hpp"

#include "hybridmem/digest.hpp"
#include "hybridmem/fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace hybridmem {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kFamilies = {"occlusion", "fast_motion", "distractor"};

int line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Line of the last component of `path`, searching each key after its parent.
int key_line(std::string_view text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    for (const auto& key : path) {
        const std::size_t found = text.find('"' + key + '"', pos);
        if (found == std::string_view::npos) return 0;
        pos = found;
    }
    return line_of_offset(text, pos);
}

std::string join_path(const std::vector<std::string>& path) {
    std::string out;
    for (const auto& p : path) out += (out.empty() ? "" : ".") + p;
    return out;
}

const char* type_name(const json& j) {
    if (j.is_number_integer()) return "integer";
    if (j.is_number()) return "number";
    return j.type_name();
}

bool compatible(const json& expected, const json& given) {
    if (expected.is_number_integer()) return given.is_number_integer();
    if (expected.is_number()) return given.is_number();
    if (expected.is_array()) {
        return given.is_array() && std::all_of(given.begin(), given.end(), [](const json& e) { return e.is_string(); });
    }
    return expected.type() == given.type();
}

/// Overlays `user` onto `base`, rejecting keys that the default tree lacks.
/// `where` turns a key path into a message prefix.
template <typename Where>
void overlay(json& base, const json& user, std::vector<std::string>& path, const Where& where) {
    if (!user.is_object()) throw ConfigError(where(path) + "expected an object");
    for (const auto& [key, value] : user.items()) {
        path.push_back(key);
        if (!base.contains(key)) throw ConfigError(where(path) + "unknown key \"" + join_path(path) + "\"");
        json& slot = base[key];
        if (slot.is_object()) {
            overlay(slot, value, path, where);
        } else if (!compatible(slot, value)) {
            throw ConfigError(where(path) + "\"" + join_path(path) + "\" expects " + type_name(slot) + ", got " +
                              type_name(value));
        } else {
            slot = value;
        }
        path.pop_back();
    }
}

std::string section_of(const std::string& message) {
    if (message.rfind("PolicyConfig", 0) == 0) return "policy";
    if (message.rfind("MotionConfig", 0) == 0) return "motion";
    if (message.rfind("DrmConfig", 0) == 0) return "drm";
    if (message.rfind("TrackerConfig", 0) == 0) return "memory";
    return {};
}

template <typename T>
T get(const json& j, const char* section, const char* key) {
    return j.at(section).at(key).get<T>();
}

}  // namespace

json default_config_json() { return config_to_json(HarnessConfig{}); }

json config_to_json(const HarnessConfig& c) {
    json policies = json::array();
    for (const PolicyKind p : c.policies) policies.push_back(policy_name(p));
    const PolicyConfig& p = c.policy;
    return json{
        {"suite", {{"name", c.suite_name}, {"seeds_per_family", c.seeds_per_family}, {"families", c.families}}},
        {"policies", policies},
        {"memory", {{"k_ram", c.k_ram}, {"k_drm", c.k_drm}}},
        {"policy",
         {{"alpha", p.alpha},
          {"alpha_him", p.alpha_him},
          {"beta", p.beta},
          {"tau_mask", p.tau_mask},
          {"tau_obj", p.tau_obj},
          {"tau_kf", p.tau_kf},
          {"tau_iou", p.tau_iou},
          {"tau_conf", p.tau_conf},
          {"tau_mem", p.tau_mem},
          {"window_m", p.window_m},
          {"delta_ram", p.delta_ram},
          {"epsilon", p.epsilon},
          {"num_pathways", p.num_pathways}}},
        {"motion",
         {{"process_noise", c.motion.process_noise},
          {"measurement_noise", c.motion.measurement_noise},
          {"initial_cov_scale", c.motion.initial_cov_scale},
          {"lost_reinit_frames", c.motion.lost_reinit_frames}}},
        {"drm",
         {{"tau_div", c.drm.tau_div},
          {"tau_q", c.drm.tau_q},
          {"area_lo", c.drm.area_lo},
          {"area_hi", c.drm.area_hi},
          {"min_gap", c.drm.min_gap}}},
        {"read_path", {{"memory_gain", c.read_path.memory_gain}, {"vote_threshold", c.read_path.vote_threshold}}},
        {"output", {{"frame_logs", c.frame_logs}, {"bank_snapshots", c.bank_snapshots}}},
    };
}

HarnessConfig config_from_json(const json& j) {
    json merged = default_config_json();
    std::vector<std::string> path;
    overlay(merged, j, path, [](const std::vector<std::string>&) { return std::string(); });

    HarnessConfig c;
    c.suite_name = get<std::string>(merged, "suite", "name");
    if (c.suite_name != "standard") throw ConfigError("unknown suite \"" + c.suite_name + "\"");
    c.seeds_per_family = get<int>(merged, "suite", "seeds_per_family");
    if (c.seeds_per_family < 1) throw ConfigError("suite.seeds_per_family must be >= 1");
    c.families = get<std::vector<std::string>>(merged, "suite", "families");
    for (const auto& f : c.families) {
        if (std::find(kFamilies.begin(), kFamilies.end(), f) == kFamilies.end()) {
            throw ConfigError("unknown family \"" + f + "\"");
        }
    }

    c.policies.clear();
    for (const auto& name : merged.at("policies")) {
        const auto kind = parse_policy(name.get<std::string>());
        if (!kind) throw ConfigError("unknown policy \"" + name.get<std::string>() + "\"");
        if (std::find(c.policies.begin(), c.policies.end(), *kind) == c.policies.end()) c.policies.push_back(*kind);
    }
    if (c.policies.empty()) throw ConfigError("policies: at least one policy is required");

    c.k_ram = get<int>(merged, "memory", "k_ram");
    c.k_drm = get<int>(merged, "memory", "k_drm");

    const json& p = merged.at("policy");
    c.policy.alpha = p.at("alpha");
    c.policy.alpha_him = p.at("alpha_him");
    c.policy.beta = p.at("beta");
    c.policy.tau_mask = p.at("tau_mask");
    c.policy.tau_obj = p.at("tau_obj");
    c.policy.tau_kf = p.at("tau_kf");
    c.policy.tau_iou = p.at("tau_iou");
    c.policy.tau_conf = p.at("tau_conf");
    c.policy.tau_mem = p.at("tau_mem");
    c.policy.window_m = p.at("window_m");
    c.policy.delta_ram = p.at("delta_ram");
    c.policy.epsilon = p.at("epsilon");
    c.policy.num_pathways = p.at("num_pathways");

    c.motion.process_noise = get<double>(merged, "motion", "process_noise");
    c.motion.measurement_noise = get<double>(merged, "motion", "measurement_noise");
    c.motion.initial_cov_scale = get<double>(merged, "motion", "initial_cov_scale");
    c.motion.lost_reinit_frames = get<int>(merged, "motion", "lost_reinit_frames");

    c.drm.tau_div = get<double>(merged, "drm", "tau_div");
    c.drm.tau_q = get<double>(merged, "drm", "tau_q");
    c.drm.area_lo = get<double>(merged, "drm", "area_lo");
    c.drm.area_hi = get<double>(merged, "drm", "area_hi");
    c.drm.min_gap = get<int>(merged, "drm", "min_gap");

    c.read_path.memory_gain = get<double>(merged, "read_path", "memory_gain");
    c.read_path.vote_threshold = get<double>(merged, "read_path", "vote_threshold");
    if (c.read_path.memory_gain < 0.0 || c.read_path.memory_gain > 1.0) {
        throw ConfigError("read_path.memory_gain must lie in [0, 1]");
    }
    if (c.read_path.vote_threshold < -1.0 || c.read_path.vote_threshold > 1.0) {
        throw ConfigError("read_path.vote_threshold must lie in [-1, 1]");
    }

    c.frame_logs = get<bool>(merged, "output", "frame_logs");
    c.bank_snapshots = get<bool>(merged, "output", "bank_snapshots");

    for (const PolicyKind k : c.policies) {
        try {
            tracker_config(c, k).validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    return c;
}

HarnessConfig load_config(std::string_view text, std::string_view source, const std::vector<std::string>& overrides,
                          const std::vector<std::string>& policy_names) {
    const std::string src(source);
    json user;
    try {
        user = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(src + ":" + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                          ": malformed config: " + e.what());
    }

    json merged = default_config_json();
    std::vector<std::string> path;
    overlay(merged, user, path, [&](const std::vector<std::string>& p) {
        return src + ":" + std::to_string(std::max(1, key_line(text, p))) + ": ";
    });

    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + ov + ": expected key=value");
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::parse_error&) {
            value = raw;
        }
        std::vector<std::string> parts;
        std::stringstream ks(key);
        for (std::string part; std::getline(ks, part, '.');) parts.push_back(part);
        json patch = value;
        for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
        std::vector<std::string> opath;
        overlay(merged, patch, opath, [&](const std::vector<std::string>&) { return "--set " + ov + ": "; });
    }

    if (!policy_names.empty()) {
        for (const auto& name : policy_names) {
            if (!parse_policy(name)) throw ConfigError("--policy: unknown policy \"" + name + "\"");
        }
        merged["policies"] = policy_names;
    }

    try {
        return config_from_json(merged);
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        int line = 0;
        const auto quote = msg.find('"');
        if (quote != std::string::npos) {
            const std::string name = msg.substr(quote + 1, msg.find('"', quote + 1) - quote - 1);
            line = key_line(text, {name});
        }
        if (line == 0) {
            std::string section = section_of(msg);
            if (section.empty()) section = msg.substr(0, msg.find_first_of(".: "));
            line = key_line(text, {section});
        }
        std::string with;
        for (const auto& ov : overrides) with += (with.empty() ? " (with --set " : ", --set ") + ov;
        if (!with.empty()) with += ")";
        throw ConfigError(src + ":" + std::to_string(std::max(line, 1)) + ": " + msg + with);
    }
}

TrackerConfig tracker_config(const HarnessConfig& cfg, PolicyKind policy) {
    TrackerConfig t;
    t.policy = policy;
    t.k_ram = cfg.k_ram;
    t.k_drm = cfg.k_drm;
    t.policy_cfg = cfg.policy;
    t.motion_cfg = cfg.motion;
    t.drm_cfg = cfg.drm;
    return t.normalized();
}

json tracker_config_to_json(const TrackerConfig& t) {
    HarnessConfig h;
    h.k_ram = t.k_ram;
    h.k_drm = t.k_drm;
    h.policy = t.policy_cfg;
    h.motion = t.motion_cfg;
    h.drm = t.drm_cfg;
    const json full = config_to_json(h);
    return json{
        {"policy_name", policy_name(t.policy)}, {"drm_enabled", t.drm_enabled},   {"memory", full.at("memory")},
        {"policy", full.at("policy")},          {"motion", full.at("motion")},    {"drm", full.at("drm")},
    };
}

std::string config_digest(const json& j) {
    // nlohmann::json keeps object keys sorted, so dump() is canonical.
    return Fnv1a().add(j.dump()).hex();
}

SequenceRun run_sequence(const SequenceRecord& rec, const TrackerConfig& cfg, const ReadPathConfig& read_path,
                         bool with_log, bool bank_snapshots) {
    SequenceRun run;
    const FrameObservation* frame0 = rec.observations.empty() ? nullptr : &rec.observations[0];
    TrackerSession session(cfg, rec.init_mask(), frame0);
    const ObservationConditioner condition = [&read_path](const FrameObservation& raw,
                                                          std::span<const MemoryEntry> memory) {
        return condition_on_memory(raw, memory, read_path);
    };

    auto log_frame = [&](const FrameResult& r) {
        if (!with_log) return;
        run.log += serialize_frame_result(r, bank_snapshots ? bank_snapshot(session.bank()) : std::string());
        run.log += '\n';
    };

    run.frames.reserve(rec.observations.size());
    run.frames.push_back(session.init_result());
    log_frame(run.frames.back());
    for (std::size_t t = 1; t < rec.observations.size(); ++t) {
        run.frames.push_back(session.step(rec.observations[t], condition));
        log_frame(run.frames.back());
    }

    BoxTrack pred, gt;
    pred.reserve(run.frames.size());
    gt.reserve(rec.gt.size());
    for (const auto& r : run.frames) pred.push_back(r.predicted_box());
    for (const auto& g : rec.gt) gt.push_back(g.box);
    run.metrics = evaluate(pred, gt);
    run.success_curve = success_curve(pred, gt);
    return run;
}

std::vector<SuiteEntry> configured_suite(const HarnessConfig& cfg) {
    std::vector<SuiteEntry> out;
    for (auto& e : suite_standard(cfg.seeds_per_family)) {
        if (std::find(cfg.families.begin(), cfg.families.end(), e.family) != cfg.families.end()) {
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<MetricsRow> run_matrix(const HarnessConfig& cfg, int workers) {
    const auto suite = configured_suite(cfg);
    const std::size_t n_pol = cfg.policies.size();
    std::vector<MetricsRow> rows(suite.size() * n_pol);
    std::vector<TrackerConfig> trackers;
    for (const PolicyKind k : cfg.policies) trackers.push_back(tracker_config(cfg, k));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= suite.size()) return;
            try {
                const SequenceRecord rec = gen_sequence(suite[i].scene);
                for (std::size_t j = 0; j < n_pol; ++j) {
                    SequenceRun run = run_sequence(rec, trackers[j], cfg.read_path, cfg.frame_logs, cfg.bank_snapshots);
                    MetricsRow& row = rows[i * n_pol + j];
                    row.suite = cfg.suite_name;
                    row.family = suite[i].family;
                    row.seed = suite[i].scene.seed;
                    row.policy = policy_name(cfg.policies[j]);
                    row.m = run.metrics;
                    row.success_curve = std::move(run.success_curve);
                    row.log = std::move(run.log);
                }
            } catch (...) {
                const std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = suite.size();
            }
        }
    };

    const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(suite.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    std::sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
        return std::tie(a.suite, a.family, a.seed, a.policy) < std::tie(b.suite, b.family, b.seed, b.policy);
    });
    return rows;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out = std::string(kCsvHeader) + '\n';
    for (const auto& r : rows) {
        const EvalOutcome& m = r.m;
        out += r.suite + ',' + r.family + ',' + std::to_string(r.seed) + ',' + r.policy;
        for (const double v : {m.success_auc, m.norm_precision_auc, m.precision_at_20, m.ao, m.sr50, m.sr75, m.q, m.acc,
                               m.rob}) {
            out += ',' + format_real(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

struct MetricSums {
    std::size_t n = 0;
    std::array<double, 9> sum{};

    void add(const EvalOutcome& m) {
        const std::array<double, 9> v = {m.success_auc, m.norm_precision_auc, m.precision_at_20, m.ao, m.sr50,
                                         m.sr75,        m.q,                  m.acc,             m.rob};
        for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
        ++n;
    }

    ordered_json to_json() const {
        static constexpr const char* kNames[] = {"success_auc", "np", "p", "ao", "sr50", "sr75", "q", "acc", "rob"};
        ordered_json j;
        j["sequences"] = n;
        for (std::size_t i = 0; i < sum.size(); ++i) j[kNames[i]] = n ? sum[i] / static_cast<double>(n) : 0.0;
        return j;
    }
};

std::vector<std::string> policy_order(const std::vector<MetricsRow>& rows, const HarnessConfig& cfg) {
    std::vector<std::string> out;
    for (const PolicyKind k : cfg.policies) out.push_back(policy_name(k));
    for (const auto& r : rows) {
        if (std::find(out.begin(), out.end(), r.policy) == out.end()) out.push_back(r.policy);
    }
    return out;
}

std::string success_series(const std::vector<MetricsRow>& rows, const std::string& policy,
                           const std::vector<std::string>& families) {
    const auto thresholds = success_thresholds();
    std::map<std::string, std::vector<double>> sums;
    std::map<std::string, std::size_t> counts;
    for (const auto& r : rows) {
        if (r.policy != policy) continue;
        for (const std::string& key : {std::string("all"), r.family}) {
            auto& s = sums[key];
            s.resize(thresholds.size(), 0.0);
            for (std::size_t i = 0; i < thresholds.size(); ++i) s[i] += r.success_curve[i];
            ++counts[key];
        }
    }
    std::vector<std::string> cols = {"all"};
    cols.insert(cols.end(), families.begin(), families.end());
    std::string out = "threshold";
    for (const auto& c : cols) out += '\t' + c;
    out += '\n';
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        out += format_real(thresholds[i]);
        for (const auto& c : cols) {
            const std::size_t n = counts[c];
            out += '\t' + format_real(n ? sums[c][i] / static_cast<double>(n) : 0.0);
        }
        out += '\n';
    }
    return out;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

std::string aggregate_json(const std::vector<MetricsRow>& rows, const HarnessConfig& cfg) {
    ordered_json j;
    j["suite"] = cfg.suite_name;
    j["rows"] = rows.size();
    ordered_json pols = ordered_json::array();
    for (const auto& name : policy_order(rows, cfg)) {
        MetricSums all;
        std::map<std::string, MetricSums> fam;
        for (const auto& r : rows) {
            if (r.policy != name) continue;
            all.add(r.m);
            fam[r.family].add(r.m);
        }
        ordered_json p;
        p["policy"] = name;
        p["overall"] = all.to_json();
        ordered_json f;
        for (const auto& family : cfg.families) f[family] = fam[family].to_json();
        p["families"] = f;
        pols.push_back(p);
    }
    j["policies"] = pols;
    return j.dump(2) + '\n';
}

int worker_count_from_env() {
    if (const char* v = std::getenv("HYBRIDMEM_WORKERS")) {
        int n = 0;
        const auto res = std::from_chars(v, v + std::char_traits<char>::length(v), n);
        if (res.ec == std::errc() && n >= 1) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const std::vector<std::string>& policy_names, const std::vector<std::string>& overrides, int workers) {
    HarnessConfig cfg;
    try {
        const std::string text = config_path.empty() ? std::string("{}") : read_file(config_path);
        cfg = load_config(text, config_path.empty() ? "<defaults>" : config_path.string(), overrides, policy_names);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        const auto rows = run_matrix(cfg, workers);
        std::vector<std::string> outputs;
        auto emit = [&](const std::string& rel, const std::string& content) {
            write_file_atomic(out_dir / rel, content);
            outputs.push_back(rel);
        };

        emit("metrics.csv", metrics_csv(rows));
        emit("aggregate.json", aggregate_json(rows, cfg));
        for (const auto& name : policy_order(rows, cfg)) {
            emit("plots/success_" + name + ".tsv", success_series(rows, name, cfg.families));
        }
        if (cfg.frame_logs) {
            for (const auto& r : rows) {
                emit("logs/" + r.family + "/" + std::to_string(r.seed) + "/" + r.policy + ".jsonl", r.log);
            }
        }

        const json cfg_json = config_to_json(cfg);
        ordered_json manifest;
        manifest["tool"] = "hybridmem";
        manifest["version"] = kToolVersion;
        const auto suite = configured_suite(cfg);
        ordered_json seeds;
        for (const auto& family : cfg.families) {
            ordered_json list = ordered_json::array();
            for (const auto& e : suite) {
                if (e.family == family) list.push_back(e.scene.seed);
            }
            seeds[family] = list;
        }
        manifest["suite"] = {{"id", cfg.suite_name + "-v" + std::to_string(kSuiteVersion)},
                             {"digest", suite_digest(suite)},
                             {"seeds", seeds}};
        ordered_json pols = ordered_json::array();
        for (const PolicyKind k : cfg.policies) {
            pols.push_back({{"name", policy_name(k)}, {"digest", config_digest(tracker_config_to_json(tracker_config(cfg, k)))}});
        }
        manifest["policies"] = pols;
        manifest["config"] = cfg_json;
        manifest["config_digest"] = config_digest(cfg_json);
        manifest["workers"] = workers;
        manifest["outputs"] = outputs;
        manifest["created"] = utc_timestamp();
        write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + '\n');
        std::cout << "wrote " << rows.size() << " rows to " << (out_dir / "metrics.csv").string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

struct CsvTable {
    std::vector<std::string> columns;
    std::map<std::string, std::vector<double>> rows;  // key -> metric values
    std::vector<std::string> order;
};

std::optional<std::string> parse_csv(std::string_view text, CsvTable& out) {
    auto lines = split(text, '\n');
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty() || lines[0] != kCsvHeader) return "header does not match \"" + std::string(kCsvHeader) + "\"";
    out.columns = split(lines[0], ',');
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != out.columns.size()) return "line " + std::to_string(i + 1) + ": expected 13 fields";
        const std::string key = f[0] + '/' + f[1] + '/' + f[2] + '/' + f[3];
        std::vector<double> vals;
        for (std::size_t c = 4; c < f.size(); ++c) {
            double v = 0.0;
            const auto res = std::from_chars(f[c].data(), f[c].data() + f[c].size(), v);
            if (res.ec != std::errc() || res.ptr != f[c].data() + f[c].size()) {
                return "line " + std::to_string(i + 1) + ": column " + out.columns[c] + " is not numeric";
            }
            vals.push_back(v);
        }
        if (!out.rows.emplace(key, std::move(vals)).second) return "duplicate row " + key;
        out.order.push_back(key);
    }
    return std::nullopt;
}

}  // namespace

CompareReport compare_csv(std::string_view baseline, std::string_view candidate, double tol) {
    CompareReport rep;
    CsvTable a, b;
    if (auto err = parse_csv(baseline, a)) {
        rep.status = 2;
        rep.messages.push_back("schema mismatch in baseline: " + *err);
        return rep;
    }
    if (auto err = parse_csv(candidate, b)) {
        rep.status = 2;
        rep.messages.push_back("schema mismatch in candidate: " + *err);
        return rep;
    }
    for (const auto& key : a.order) {
        if (!b.rows.count(key)) rep.messages.push_back("schema mismatch: row " + key + " missing from candidate");
    }
    for (const auto& key : b.order) {
        if (!a.rows.count(key)) rep.messages.push_back("schema mismatch: row " + key + " missing from baseline");
    }
    if (!rep.messages.empty()) {
        rep.status = 2;
        return rep;
    }

    std::map<std::string, std::vector<double>> agg_a, agg_b;
    std::map<std::string, std::size_t> agg_n;
    for (const auto& key : a.order) {
        const auto& va = a.rows.at(key);
        const auto& vb = b.rows.at(key);
        const std::string policy = key.substr(key.rfind('/') + 1);
        auto& sa = agg_a[policy];
        auto& sb = agg_b[policy];
        sa.resize(va.size(), 0.0);
        sb.resize(va.size(), 0.0);
        ++agg_n[policy];
        for (std::size_t c = 0; c < va.size(); ++c) {
            sa[c] += va[c];
            sb[c] += vb[c];
            if (std::abs(va[c] - vb[c]) > tol) {
                rep.status = 1;
                rep.messages.push_back("row " + key + " column " + a.columns[c + 4] + ": baseline " +
                                       format_real(va[c]) + " candidate " + format_real(vb[c]));
            }
        }
    }
    for (const auto& [policy, sa] : agg_a) {
        const auto& sb = agg_b[policy];
        const double n = static_cast<double>(agg_n[policy]);
        for (std::size_t c = 0; c < sa.size(); ++c) {
            const double ma = sa[c] / n, mb = sb[c] / n;
            if (std::abs(ma - mb) > tol) {
                rep.status = 1;
                rep.messages.push_back("aggregate " + policy + " column " + a.columns[c + 4] + ": baseline " +
                                       format_real(ma) + " candidate " + format_real(mb));
            }
        }
    }
    return rep;
}

int cmd_compare(const std::filesystem::path& baseline, const std::filesystem::path& candidate, double tol) {
    std::string ta, tb;
    try {
        ta = read_file(baseline);
        tb = read_file(candidate);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    const CompareReport rep = compare_csv(ta, tb, tol);
    for (const auto& m : rep.messages) std::cerr << m << '\n';
    if (rep.status == 0) std::cout << "no differences beyond tolerance " << format_real(tol) << '\n';
    return rep.status;
}

}  // namespace hybridmem

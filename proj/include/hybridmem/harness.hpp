#pragma once

#include "hybridmem/metrics.hpp"
#include "hybridmem/selection.hpp"
#include "hybridmem/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hybridmem {

inline constexpr const char* kToolVersion = "0.1.0";

/// Harness configuration. The file form is a JSON object whose key tree
/// mirrors `default_config_json()`; any subset of keys may be given.
///
///     {
///       "suite":     {"name": "standard", "seeds_per_family": 20,
///                     "families": ["occlusion", "fast_motion", "distractor"]},
///       "policies":  ["sam2_fifo", "dam4sam", ...],
///       "memory":    {"k_ram": 6, "k_drm": 3},
///       "policy":    {"alpha": 0.25, "tau_mask": 0.5, ...},
///       "motion":    {"process_noise": 0.01, ...},
///       "drm":       {"tau_div": 0.5, ...},
///       "read_path": {"memory_gain": 0.5, "vote_threshold": 0.95},
///       "output":    {"frame_logs": true, "bank_snapshots": false}
///     }
struct HarnessConfig {
    std::string suite_name = "standard";
    int seeds_per_family = 20;
    std::vector<std::string> families = {"occlusion", "fast_motion", "distractor"};
    std::vector<PolicyKind> policies{kAllPolicies.begin(), kAllPolicies.end()};
    int k_ram = 6;
    int k_drm = 3;
    PolicyConfig policy;
    MotionConfig motion;
    DrmConfig drm;
    ReadPathConfig read_path;
    bool frame_logs = true;
    bool bank_snapshots = false;
};

/// Invalid configuration; the message names the file line or the offending
/// override.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json default_config_json();
nlohmann::json config_to_json(const HarnessConfig& cfg);

/// Throws ConfigError for unknown keys, wrong types or out-of-range values.
HarnessConfig config_from_json(const nlohmann::json& j);

/// Parses a config file body, then applies `key.path=value` overrides and
/// an optional replacement policy list. `source` names the text in messages.
HarnessConfig load_config(std::string_view text, std::string_view source, const std::vector<std::string>& overrides = {},
                          const std::vector<std::string>& policy_names = {});

TrackerConfig tracker_config(const HarnessConfig& cfg, PolicyKind policy);

nlohmann::json tracker_config_to_json(const TrackerConfig& cfg);

/// FNV-1a over the key-sorted serialization; independent of field order.
std::string config_digest(const nlohmann::json& j);

struct SequenceRun {
    std::vector<FrameResult> frames;
    EvalOutcome metrics;
    std::vector<double> success_curve;
    std::string log;  ///< one serialized FrameResult per line when requested
};

SequenceRun run_sequence(const SequenceRecord& rec, const TrackerConfig& cfg, const ReadPathConfig& read_path,
                         bool with_log = false, bool bank_snapshots = false);

struct MetricsRow {
    std::string suite;
    std::string family;
    std::uint64_t seed = 0;
    std::string policy;
    EvalOutcome m;
    std::vector<double> success_curve;
    std::string log;
};

/// Suite entries selected by the configured families.
std::vector<SuiteEntry> configured_suite(const HarnessConfig& cfg);

/// Runs every (policy, scene) pair on `workers` threads. Rows come back
/// sorted by (family, seed, policy) whatever the scheduling.
std::vector<MetricsRow> run_matrix(const HarnessConfig& cfg, int workers);

inline constexpr const char* kCsvHeader = "suite,family,seed,policy,success_auc,np,p,ao,sr50,sr75,q,acc,rob";

std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string aggregate_json(const std::vector<MetricsRow>& rows, const HarnessConfig& cfg);

/// Worker count from HYBRIDMEM_WORKERS, defaulting to the hardware concurrency.
int worker_count_from_env();

/// Command entry points return process exit codes and report on stderr.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const std::vector<std::string>& policy_names, const std::vector<std::string>& overrides, int workers);
int cmd_oracle(const std::filesystem::path& out_dir);
int cmd_compare(const std::filesystem::path& baseline, const std::filesystem::path& candidate, double tol);

struct CompareReport {
    int status = 0;  ///< 0 within tolerance, 1 regression, 2 schema mismatch
    std::vector<std::string> messages;
};

CompareReport compare_csv(std::string_view baseline, std::string_view candidate, double tol);

/// Writes the expected-value files used by the oracle tests.
void write_oracle_files(const std::filesystem::path& out_dir);

/// Mean AO per policy on the distractor family under default settings.
nlohmann::ordered_json directional_anchors(int workers);

}  // namespace hybridmem

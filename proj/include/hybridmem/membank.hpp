#pragma once

#include "hybridmem/geometry.hpp"
#include "hybridmem/observation.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hybridmem {

enum class EntryKind { Init, Ram, Drm };

const char* to_string(EntryKind kind);

struct MemoryEntry {
    int frame_idx = 0;
    BitMask mask;
    std::optional<BBox> bbox;
    double s_mask = 0.0;
    std::optional<Prototype> fg_prototype;
    EntryKind kind = EntryKind::Ram;
};

/// Entry for proposal `proposal_idx` of `obs`; the foreground prototype is
/// pooled from `obs.features` when present.
MemoryEntry make_entry(const FrameObservation& obs, std::size_t proposal_idx, EntryKind kind);

/// Entry built from an arbitrary proposal observed in `obs`.
MemoryEntry make_entry(const FrameObservation& obs, const Proposal& chosen, EntryKind kind);

struct DrmConfig {
    double tau_div = 0.5;  ///< admit only if min pairwise proposal IoU is below this
    double tau_q = 0.7;    ///< minimum s_mask of the chosen proposal
    double area_lo = 0.5;  ///< area ratio band vs. median RAM area
    double area_hi = 2.0;
    int min_gap = 5;

    void validate() const;
};

/// Outcome of the four DRM admission predicates, in evaluation order.
struct DrmGate {
    bool disagreement = false;
    bool quality = false;
    bool area_consistent = false;
    bool sparse = false;

    bool admitted() const { return disagreement && quality && area_consistent && sparse; }
};

/// Evaluates the DRM predicates against a RAM reference set. The area test is
/// waived when `ram` is empty or its median area is zero; the sparsity test
/// is waived when no DRM anchor exists yet.
DrmGate drm_gate(const FrameObservation& obs, const Proposal& chosen, const DrmConfig& cfg,
                 std::span<const MemoryEntry> ram, std::optional<int> last_drm_frame);

/// Minimum pairwise mask IoU over the frame's proposals.
double proposal_min_pairwise_iou(const FrameObservation& obs);

/// Object-centric memory: one reserved init slot, FIFO-bounded RAM and a
/// sparse FIFO-bounded DRM. All mutation goes through members that keep the
/// capacity, ordering and init invariants.
class MemoryBank {
public:
    /// Throws std::invalid_argument if `init` has an empty mask, a nonzero
    /// frame index, k_ram < 1 or k_drm < 0.
    MemoryBank(MemoryEntry init, int k_ram, int k_drm);

    const MemoryEntry& init() const { return init_; }
    const std::vector<MemoryEntry>& ram() const { return ram_; }
    const std::vector<MemoryEntry>& drm() const { return drm_; }
    int k_ram() const { return k_ram_; }
    int k_drm() const { return k_drm_; }
    int last_ram_frame() const { return last_ram_frame_; }
    std::optional<int> last_drm_frame() const { return last_drm_frame_; }

    /// FIFO append; evicts the oldest RAM entry beyond capacity. Throws
    /// std::invalid_argument if the entry is not newer than every RAM entry.
    void ram_insert(MemoryEntry entry);

    /// Replaces RAM wholesale (policies that rebuild RAM each frame). Entries
    /// must be strictly chronological and at most k_ram long.
    void ram_assign(std::vector<MemoryEntry> entries);

    /// Runs the DRM gate against this bank's RAM and appends on admission.
    bool drm_consider(const FrameObservation& obs, const Proposal& chosen, const DrmConfig& cfg);

    /// Appends a DRM anchor unconditionally (FIFO eviction). Used to mirror a
    /// shared DRM across several banks; ordering is still enforced.
    void drm_append(MemoryEntry entry);

    /// init, then DRM (chronological), then RAM (chronological).
    std::vector<MemoryEntry> compose() const;

    /// Checks every structural invariant; returns a description of the first
    /// violation or nullopt.
    std::optional<std::string> check_invariants(int drm_min_gap) const;

private:
    MemoryEntry init_;
    std::vector<MemoryEntry> ram_;
    std::vector<MemoryEntry> drm_;
    int k_ram_;
    int k_drm_;
    int last_ram_frame_ = 0;
    std::optional<int> last_drm_frame_;
};

/// Bank with a frame-0 init entry made from `init_mask` (s_mask = 1).
MemoryBank bank_new(const BitMask& init_mask, int k_ram, int k_drm);

inline std::vector<MemoryEntry> bank_compose(const MemoryBank& bank) { return bank.compose(); }

/// One-line structured snapshot: frame indices per slot kind plus a digest of
/// the stored masks and scores.
std::string bank_snapshot(const MemoryBank& bank);

}  // namespace hybridmem

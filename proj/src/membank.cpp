#include "hybridmem/membank.hpp"

#include "hybridmem/digest.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace hybridmem {

const char* to_string(EntryKind kind) {
    switch (kind) {
        case EntryKind::Init: return "init";
        case EntryKind::Ram: return "ram";
        case EntryKind::Drm: return "drm";
    }
    return "?";
}

MemoryEntry make_entry(const FrameObservation& obs, const Proposal& chosen, EntryKind kind) {
    MemoryEntry e;
    e.frame_idx = obs.frame_idx;
    e.mask = chosen.mask;
    e.bbox = chosen.bbox;
    e.s_mask = chosen.s_mask;
    e.kind = kind;
    if (obs.features && !chosen.mask.empty()) {
        e.fg_prototype = extract_prototypes(*obs.features, chosen.mask).fg;
    }
    return e;
}

MemoryEntry make_entry(const FrameObservation& obs, std::size_t proposal_idx, EntryKind kind) {
    return make_entry(obs, obs.proposals.at(proposal_idx), kind);
}

void DrmConfig::validate() const {
    if (!(area_lo < area_hi) || !(area_lo > 0.0)) throw std::invalid_argument("DrmConfig: invalid area band");
    if (min_gap < 1) throw std::invalid_argument("DrmConfig: min_gap < 1");
    if (tau_div < 0.0 || tau_div > 1.0 || tau_q < 0.0 || tau_q > 1.0) {
        throw std::invalid_argument("DrmConfig: thresholds must lie in [0, 1]");
    }
}

double proposal_min_pairwise_iou(const FrameObservation& obs) {
    double lowest = 1.0;
    for (std::size_t i = 0; i < kProposalsPerFrame; ++i) {
        for (std::size_t j = i + 1; j < kProposalsPerFrame; ++j) {
            lowest = std::min(lowest, mask_iou(obs.proposals[i].mask, obs.proposals[j].mask));
        }
    }
    return lowest;
}

namespace {

double median_area(std::span<const MemoryEntry> entries) {
    std::vector<double> areas;
    areas.reserve(entries.size());
    for (const auto& e : entries) areas.push_back(static_cast<double>(mask_area(e.mask)));
    std::sort(areas.begin(), areas.end());
    const std::size_t n = areas.size();
    return n % 2 == 1 ? areas[n / 2] : 0.5 * (areas[n / 2 - 1] + areas[n / 2]);
}

}  // namespace

DrmGate drm_gate(const FrameObservation& obs, const Proposal& chosen, const DrmConfig& cfg,
                 std::span<const MemoryEntry> ram, std::optional<int> last_drm_frame) {
    DrmGate g;
    g.disagreement = proposal_min_pairwise_iou(obs) < cfg.tau_div;
    g.quality = chosen.s_mask >= cfg.tau_q;
    g.area_consistent = true;
    if (!ram.empty()) {
        const double median = median_area(ram);
        if (median > 0.0) {
            const double ratio = static_cast<double>(mask_area(chosen.mask)) / median;
            g.area_consistent = ratio >= cfg.area_lo && ratio <= cfg.area_hi;
        }
    }
    g.sparse = !last_drm_frame || obs.frame_idx - *last_drm_frame >= cfg.min_gap;
    return g;
}

MemoryBank::MemoryBank(MemoryEntry init, int k_ram, int k_drm)
    : init_(std::move(init)), k_ram_(k_ram), k_drm_(k_drm) {
    if (k_ram < 1) throw std::invalid_argument("MemoryBank: k_ram must be >= 1");
    if (k_drm < 0) throw std::invalid_argument("MemoryBank: k_drm must be >= 0");
    if (init_.mask.empty()) throw std::invalid_argument("MemoryBank: initialization mask is empty");
    if (init_.frame_idx != 0) throw std::invalid_argument("MemoryBank: init entry must be frame 0");
    init_.kind = EntryKind::Init;
    ram_.reserve(static_cast<std::size_t>(k_ram) + 1);
}

void MemoryBank::ram_insert(MemoryEntry entry) {
    if (!ram_.empty() && entry.frame_idx <= ram_.back().frame_idx) {
        throw std::invalid_argument("ram_insert: frame " + std::to_string(entry.frame_idx) +
                                    " is not newer than RAM head " + std::to_string(ram_.back().frame_idx));
    }
    entry.kind = EntryKind::Ram;
    last_ram_frame_ = entry.frame_idx;
    ram_.push_back(std::move(entry));
    if (static_cast<int>(ram_.size()) > k_ram_) ram_.erase(ram_.begin());
}

void MemoryBank::ram_assign(std::vector<MemoryEntry> entries) {
    if (static_cast<int>(entries.size()) > k_ram_) throw std::invalid_argument("ram_assign: exceeds k_ram");
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].frame_idx <= entries[i - 1].frame_idx) {
            throw std::invalid_argument("ram_assign: entries not strictly chronological");
        }
    }
    for (auto& e : entries) e.kind = EntryKind::Ram;
    ram_ = std::move(entries);
    if (!ram_.empty()) last_ram_frame_ = std::max(last_ram_frame_, ram_.back().frame_idx);
}

bool MemoryBank::drm_consider(const FrameObservation& obs, const Proposal& chosen, const DrmConfig& cfg) {
    if (k_drm_ == 0) return false;
    if (!drm_gate(obs, chosen, cfg, ram_, last_drm_frame_).admitted()) return false;
    drm_append(make_entry(obs, chosen, EntryKind::Drm));
    return true;
}

void MemoryBank::drm_append(MemoryEntry entry) {
    if (k_drm_ == 0) return;
    if (!drm_.empty() && entry.frame_idx <= drm_.back().frame_idx) {
        throw std::invalid_argument("drm_append: out-of-order anchor");
    }
    entry.kind = EntryKind::Drm;
    last_drm_frame_ = entry.frame_idx;
    drm_.push_back(std::move(entry));
    if (static_cast<int>(drm_.size()) > k_drm_) drm_.erase(drm_.begin());
}

std::vector<MemoryEntry> MemoryBank::compose() const {
    std::vector<MemoryEntry> out;
    out.reserve(1 + drm_.size() + ram_.size());
    out.push_back(init_);
    out.insert(out.end(), drm_.begin(), drm_.end());
    out.insert(out.end(), ram_.begin(), ram_.end());
    return out;
}

std::optional<std::string> MemoryBank::check_invariants(int drm_min_gap) const {
    if (init_.kind != EntryKind::Init || init_.frame_idx != 0 || init_.mask.empty()) return "init slot corrupted";
    if (static_cast<int>(ram_.size()) > k_ram_) return "RAM over capacity";
    if (static_cast<int>(drm_.size()) > k_drm_) return "DRM over capacity";
    for (std::size_t i = 0; i < ram_.size(); ++i) {
        if (ram_[i].kind != EntryKind::Ram) return "RAM entry with wrong kind";
        if (i > 0 && ram_[i].frame_idx <= ram_[i - 1].frame_idx) return "RAM not chronological";
    }
    for (std::size_t i = 0; i < drm_.size(); ++i) {
        if (drm_[i].kind != EntryKind::Drm) return "DRM entry with wrong kind";
        if (i > 0 && drm_[i].frame_idx - drm_[i - 1].frame_idx < drm_min_gap) return "DRM anchors closer than min_gap";
    }
    return std::nullopt;
}

MemoryBank bank_new(const BitMask& init_mask, int k_ram, int k_drm) {
    MemoryEntry init;
    init.frame_idx = 0;
    init.mask = init_mask;
    init.bbox = mask_to_bbox(init_mask);
    init.s_mask = 1.0;
    init.kind = EntryKind::Init;
    return MemoryBank(std::move(init), k_ram, k_drm);
}

namespace {

void digest_entry(Fnv1a& h, const MemoryEntry& e) {
    h.add(std::to_string(e.frame_idx)).add(to_string(e.kind)).add(format_real(e.s_mask)).add(e.mask.to_rle_text());
}

std::string frame_list(const std::vector<MemoryEntry>& entries) {
    std::string s = "[";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(entries[i].frame_idx);
    }
    return s + "]";
}

}  // namespace

std::string bank_snapshot(const MemoryBank& bank) {
    Fnv1a h;
    for (const auto& e : bank.compose()) digest_entry(h, e);
    std::ostringstream os;
    os << "{\"init\":" << bank.init().frame_idx << ",\"drm\":" << frame_list(bank.drm())
       << ",\"ram\":" << frame_list(bank.ram()) << ",\"digest\":\"" << h.hex() << "\"}";
    return os.str();
}

}  // namespace hybridmem

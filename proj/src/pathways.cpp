#include "hybridmem/pathways.hpp"

#include "hybridmem/digest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hybridmem {

namespace {

const FrameObservation& observation_for(std::span<const FrameObservation> per_pathway, std::size_t parent) {
    return per_pathway.size() == 1 ? per_pathway[0] : per_pathway[parent];
}

}  // namespace

PathwaySet pathway_start(MemoryBank root, std::size_t capacity, int frame_idx) {
    if (capacity < 1) throw std::invalid_argument("pathway_start: capacity must be >= 1");
    PathwaySet set;
    set.capacity = capacity;
    set.frame_idx = frame_idx;
    set.pathways.push_back(Pathway{std::move(root), 0.0, {}, 0, 0});
    return set;
}

std::vector<PathwayCandidate> pathway_expand(const PathwaySet& set, std::span<const FrameObservation> per_pathway,
                                             double epsilon) {
    if (per_pathway.size() != 1 && per_pathway.size() != set.pathways.size()) {
        throw std::invalid_argument("pathway_expand: need one observation per pathway or a shared one");
    }
    std::vector<PathwayCandidate> out;
    out.reserve(set.pathways.size() * kProposalsPerFrame);
    for (std::size_t p = 0; p < set.pathways.size(); ++p) {
        const FrameObservation& obs = observation_for(per_pathway, p);
        for (std::size_t k = 0; k < kProposalsPerFrame; ++k) {
            out.push_back({p, k, set.pathways[p].score + std::log(obs.proposals[k].s_mask + epsilon)});
        }
    }
    return out;
}

std::vector<PathwayCandidate> pathway_expand(const PathwaySet& set, const FrameObservation& obs, double epsilon) {
    return pathway_expand(set, std::span<const FrameObservation>(&obs, 1), epsilon);
}

bool candidate_before(const PathwayCandidate& a, const PathwayCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.parent != b.parent) return a.parent < b.parent;
    return a.proposal_index < b.proposal_index;
}

PathwaySet pathway_prune(const PathwaySet& parents, const std::vector<PathwayCandidate>& candidates,
                         std::span<const FrameObservation> per_pathway, std::size_t capacity,
                         const PolicyConfig& cfg) {
    if (candidates.empty()) throw std::invalid_argument("pathway_prune: no candidates");
    std::vector<PathwayCandidate> ranked = candidates;
    const std::size_t keep = std::min(capacity, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                      candidate_before);

    PathwaySet next;
    next.capacity = capacity;
    next.frame_idx = observation_for(per_pathway, 0).frame_idx;
    next.pathways.reserve(keep);
    for (std::size_t rank = 0; rank < keep; ++rank) {
        const PathwayCandidate& c = ranked[rank];
        const Pathway& parent = parents.pathways.at(c.parent);
        const FrameObservation& obs = observation_for(per_pathway, c.parent);
        const Proposal& chosen = obs.proposals[c.proposal_index];

        Pathway child{parent.bank, c.score, parent.trajectory, static_cast<int>(rank), parent.id};
        child.trajectory.push_back({obs.frame_idx, c.proposal_index});
        child.last_decision = sam2long_admit(obs, chosen, cfg);
        if (child.last_decision.admit) child.bank.ram_insert(make_entry(obs, chosen, EntryKind::Ram));
        next.pathways.push_back(std::move(child));
    }
    return next;
}

const Pathway& pathway_best(const PathwaySet& set) {
    if (set.pathways.empty()) throw std::logic_error("pathway_best: empty pathway set");
    // Pathways are kept in rank order, so the head is the best under the beam order.
    return set.pathways.front();
}

std::string pathway_dump(const PathwaySet& set) {
    std::ostringstream os;
    for (const auto& p : set.pathways) {
        os << "frame=" << set.frame_idx << " id=" << p.id << " parent=" << p.parent_id
           << " score=" << format_real(p.score) << " traj=";
        for (std::size_t i = 0; i < p.trajectory.size(); ++i) {
            if (i) os << ',';
            os << p.trajectory[i].proposal_index;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace hybridmem

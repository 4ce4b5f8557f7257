#pragma once

#include "hybridmem/membank.hpp"
#include "hybridmem/observation.hpp"
#include "hybridmem/policies.hpp"

#include <span>
#include <string>
#include <vector>

namespace hybridmem {

struct TrajectoryStep {
    int frame_idx = 0;
    std::size_t proposal_index = 0;

    friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

/// One memory hypothesis: its own bank plus the cumulative log score of the
/// proposal choices that produced it.
struct Pathway {
    MemoryBank bank;
    double score = 0.0;
    std::vector<TrajectoryStep> trajectory;
    int id = 0;         ///< rank within the current set
    int parent_id = 0;  ///< rank of the parent within the previous set
    RamPolicyDecision last_decision = RamPolicyDecision::rejected(AdmitReason::InitFrame);
};

/// Retained pathways sorted by descending score; ids equal positions.
struct PathwaySet {
    std::vector<Pathway> pathways;
    std::size_t capacity = 1;
    int frame_idx = 0;
};

struct PathwayCandidate {
    std::size_t parent = 0;  ///< index into PathwaySet::pathways
    std::size_t proposal_index = 0;
    double score = 0.0;
};

/// Single root pathway holding `root` as its bank.
PathwaySet pathway_start(MemoryBank root, std::size_t capacity, int frame_idx = 0);

/// S_{p,k} = S_p + log(s_mask_k + epsilon) for every pathway p and proposal k,
/// ordered parent-major. `per_pathway` holds the decoder output conditioned
/// on each pathway's bank; a single observation is shared by all pathways.
std::vector<PathwayCandidate> pathway_expand(const PathwaySet& set, std::span<const FrameObservation> per_pathway,
                                             double epsilon);

std::vector<PathwayCandidate> pathway_expand(const PathwaySet& set, const FrameObservation& obs, double epsilon);

/// Strict weak order of the beam: higher score first, then parent rank, then
/// proposal index.
bool candidate_before(const PathwayCandidate& a, const PathwayCandidate& b);

/// Keeps the top `capacity` candidates. Each survivor inherits its parent's
/// bank and applies the SAM2Long admission rule to its own choice.
PathwaySet pathway_prune(const PathwaySet& parents, const std::vector<PathwayCandidate>& candidates,
                         std::span<const FrameObservation> per_pathway, std::size_t capacity,
                         const PolicyConfig& cfg);

/// Highest-ranked pathway. Throws std::logic_error on an empty set.
const Pathway& pathway_best(const PathwaySet& set);

/// One line per pathway: id, parent, score and trajectory.
std::string pathway_dump(const PathwaySet& set);

}  // namespace hybridmem

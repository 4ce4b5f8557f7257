#pragma once

// Brute-force reference implementations. Nothing here calls into the
// tracking library; inputs are plain structs so the two sides share no
// algorithmic code.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hybridmem { class CounterRng; }

namespace oracle {

// --- dense geometry ----------------------------------------------------------

struct Rect {
    double x = 0, y = 0, w = 0, h = 0;
};

/// Row-major 0/1 raster.
struct Dense {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> px;

    std::uint8_t at(int x, int y) const { return px[static_cast<std::size_t>(y) * width + x]; }
};

/// Rasterizes two boxes whose coordinates are multiples of 1/subdiv on a grid
/// of subdiv x subdiv cells per unit and counts covered cells.
double raster_box_iou(const Rect& a, const Rect& b, int subdiv);

std::int64_t dense_area(const Dense& m);
std::int64_t dense_intersection(const Dense& a, const Dense& b);
double dense_iou(const Dense& a, const Dense& b);

/// Inclusive pixel extent as (x, y, w, h); nullopt for an empty raster.
std::optional<Rect> dense_bbox(const Dense& m);

/// Pixel-center rectangle fill: pixel (c, r) is set when its center lies in [x, x+w) x [y, y+h).
Dense dense_rectangle(int width, int height, const Rect& r);

// --- Kalman ------------------------------------------------------------------

/// Textbook constant-velocity filter on std::vector matrices with a
/// Gauss-Jordan inverse of the innovation covariance.
class DenseKalman {
public:
    DenseKalman(const Rect& b0, double q, double r, double p0);

    void predict();
    /// Skips the update for a zero-area measurement.
    void update(const Rect& z);

    const std::vector<double>& mean() const { return x_; }
    const std::vector<double>& cov() const { return p_; }  ///< row-major 8 x 8

private:
    std::vector<double> x_;
    std::vector<double> p_;
    double q_, r_;
};

std::vector<double> gauss_jordan_inverse(std::vector<double> a, int n);

// --- pathways ----------------------------------------------------------------

struct PathwayBest {
    std::vector<int> proposals;  ///< chosen proposal per frame
    double score = 0.0;
};

/// Exhaustive enumeration of 3^T proposal sequences. Sequences are ranked by
/// (S_T, S_{T-1}, ..., S_1) descending then by (k_1, ..., k_T) ascending, where
/// S_t = S_{t-1} + log(s_t[k_t] + eps) is accumulated frame by frame.
PathwayBest enumerate_best_pathway(const std::vector<std::array<double, 3>>& s_mask, double eps);

// --- SAMITE Top-K --------------------------------------------------------------

struct WindowItem {
    int frame = 0;
    std::vector<double> proto;
};

double loop_cosine(const std::vector<double>& a, const std::vector<double>& b);

/// Scores every window frame, fully sorts by (score desc, frame desc), keeps
/// k_ram - 2 of them and returns the chronological union with first and prev.
std::vector<int> topk_ram_frames(const std::vector<WindowItem>& window, const std::vector<double>& first_proto,
                                 const std::vector<double>& prev_proto, int first_frame, int prev_frame, double alpha,
                                 int k_ram);

// --- selection -----------------------------------------------------------------

struct Candidate {
    std::optional<Rect> box;  ///< absent for an empty mask
    double s_mask = 0.0;
    double s_obj = 0.0;
};

struct Frame3 {
    std::array<Candidate, 3> c;
    double o = 0.0;
    std::optional<Rect> coarse;  ///< Kalman prediction
    std::optional<Rect> fine;    ///< fine-stage extrapolation
};

double plain_box_iou(const Rect& a, const Rect& b);

struct Choice {
    std::optional<int> index;
    double value = 0.0;  ///< s_kf (SAMURAI) or s_conf (HiM2SAM)
    bool used_fine = false;
};

/// Evaluates all three SAMURAI scores; argmax over s_obj > 0, lowest index on ties.
Choice brute_samurai(const Frame3& f, double alpha);

/// Evaluates all stage-1 confidences and, when their maximum is below
/// tau_conf, all stage-2 confidences; argmax with lowest index on ties.
Choice brute_him(const Frame3& f, double alpha_him, double beta, double tau_conf);

// --- predicate replays -----------------------------------------------------------

struct DrmReplay {
    bool disagreement = false;
    bool quality = false;
    bool area_consistent = false;
    bool sparse = false;
    bool admitted() const { return disagreement && quality && area_consistent && sparse; }
};

DrmReplay replay_drm(const std::array<Dense, 3>& proposals, int chosen, double chosen_s_mask,
                     const std::vector<std::int64_t>& ram_areas, std::optional<int> last_drm_frame, int frame,
                     double tau_div, double tau_q, double area_lo, double area_hi, int min_gap);

/// Reason strings match the library's AdmitReason names.
std::string replay_dam(bool present, int frame, int last_ram_frame, int delta_ram);
std::string replay_samurai(double s_mask, double s_obj, double s_kf, double tau_mask, double tau_obj, double tau_kf);

/// Last k of a chronological sequence.
std::vector<int> keep_last(const std::vector<int>& frames, int k);

// --- seeded inputs ------------------------------------------------------------

Rect random_box(hybridmem::CounterRng& rng, int extent, int subdiv);
Dense random_mask(hybridmem::CounterRng& rng, int width, int height);

struct KalmanTrace {
    Rect init;
    std::vector<std::optional<Rect>> measurements;  ///< nullopt: predict only
};
KalmanTrace random_kalman_trace(hybridmem::CounterRng& rng, int steps);

std::vector<std::array<double, 3>> random_pathway_scores(hybridmem::CounterRng& rng, int frames);

struct TopKCase {
    std::vector<WindowItem> window;
    std::vector<double> first_proto;
    std::vector<double> prev_proto;
    int first_frame = 0;
    int prev_frame = 0;
    double alpha = 0.25;
    int k_ram = 6;
};
TopKCase random_topk_case(hybridmem::CounterRng& rng);

/// Integer-aligned candidate boxes with frequent duplicates to exercise ties.
Frame3 random_frame3(hybridmem::CounterRng& rng);

}  // namespace oracle

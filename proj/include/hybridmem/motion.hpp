#pragma once

#include "hybridmem/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace hybridmem {

struct MotionConfig {
    double process_noise = 1e-2;      ///< Q = process_noise * I
    double measurement_noise = 1e-1;  ///< R = measurement_noise * I
    double initial_cov_scale = 10.0;  ///< P0 = initial_cov_scale * I
    int lost_reinit_frames = 30;      ///< consecutive frames without update before re-initialization

    void validate() const {
        if (!(process_noise > 0.0) || !(measurement_noise > 0.0) || !(initial_cov_scale > 0.0)) {
            throw std::invalid_argument("MotionConfig: noise terms must be strictly positive");
        }
        if (lost_reinit_frames < 1) throw std::invalid_argument("MotionConfig: lost_reinit_frames < 1");
    }
};

/// Constant-velocity box state [cx, cy, w, h, vcx, vcy, vw, vh].
template <typename Scalar>
struct KalmanStateT {
    using Vector = Eigen::Matrix<Scalar, 8, 1>;
    using Matrix = Eigen::Matrix<Scalar, 8, 8>;

    Vector mean = Vector::Zero();
    Matrix cov = Matrix::Identity();
    int last_update_frame = 0;
};

using KalmanState = KalmanStateT<double>;

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, 8, 8> cv_transition() {
    Eigen::Matrix<Scalar, 8, 8> f = Eigen::Matrix<Scalar, 8, 8>::Identity();
    f.template topRightCorner<4, 4>().setIdentity();
    return f;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 4, 1> box_measurement(const BBox& b) {
    Eigen::Matrix<Scalar, 4, 1> z;
    z << Scalar(b.cx()), Scalar(b.cy()), Scalar(b.w), Scalar(b.h);
    return z;
}

}  // namespace detail

/// Box encoded by the position part of the state, w and h clamped to >= 1e-6.
template <typename Scalar>
BBox kf_box(const KalmanStateT<Scalar>& s) {
    const double w = std::max(static_cast<double>(s.mean(2)), 1e-6);
    const double h = std::max(static_cast<double>(s.mean(3)), 1e-6);
    return BBox::from_center(static_cast<double>(s.mean(0)), static_cast<double>(s.mean(1)), w, h);
}

/// Starts a filter at rest on `b0`. Throws std::invalid_argument for zero-area boxes.
template <typename Scalar = double>
KalmanStateT<Scalar> kf_init(const BBox& b0, const MotionConfig& cfg, int frame_idx = 0) {
    if (!(b0.area() > 0.0)) throw std::invalid_argument("kf_init: zero-area box");
    KalmanStateT<Scalar> s;
    s.mean.setZero();
    s.mean.template head<4>() = detail::box_measurement<Scalar>(b0);
    s.cov = KalmanStateT<Scalar>::Matrix::Identity() * Scalar(cfg.initial_cov_scale);
    s.last_update_frame = frame_idx;
    return s;
}

/// One dt = 1 step: mean' = F mean, cov' = F cov F^T + Q.
template <typename Scalar>
std::pair<KalmanStateT<Scalar>, BBox> kf_predict(const KalmanStateT<Scalar>& s, const MotionConfig& cfg) {
    static const auto f = detail::cv_transition<Scalar>();
    KalmanStateT<Scalar> out = s;
    out.mean = f * s.mean;
    out.cov = f * s.cov * f.transpose();
    out.cov.diagonal().array() += Scalar(cfg.process_noise);
    out.cov = Scalar(0.5) * (out.cov + out.cov.transpose()).eval();
    return {out, kf_box(out)};
}

/// Standard correction with z = [cx, cy, w, h]. A zero-area measurement is
/// treated as missing and returns the state unchanged.
template <typename Scalar>
KalmanStateT<Scalar> kf_update(const KalmanStateT<Scalar>& s, const BBox& z, const MotionConfig& cfg,
                               int frame_idx) {
    if (!(z.area() > 0.0)) return s;
    using Mat8 = typename KalmanStateT<Scalar>::Matrix;

    // H selects the first four components, so H P H^T is the top-left block.
    const Eigen::Matrix<Scalar, 4, 1> innovation = detail::box_measurement<Scalar>(z) - s.mean.template head<4>();
    Eigen::Matrix<Scalar, 4, 4> innovation_cov = s.cov.template topLeftCorner<4, 4>();
    innovation_cov.diagonal().array() += Scalar(cfg.measurement_noise);
    const Eigen::Matrix<Scalar, 8, 4> cov_ht = s.cov.template leftCols<4>();
    // K = P H^T S^-1, solved as S K^T = H P.
    const Eigen::Matrix<Scalar, 8, 4> gain =
        innovation_cov.ldlt().solve(cov_ht.transpose()).transpose();

    KalmanStateT<Scalar> out = s;
    out.mean = s.mean + gain * innovation;

    // Joseph form keeps the covariance symmetric positive semidefinite.
    Mat8 i_kh = Mat8::Identity();
    i_kh.template leftCols<4>() -= gain;
    out.cov = i_kh * s.cov * i_kh.transpose() + Scalar(cfg.measurement_noise) * gain * gain.transpose();
    out.cov = Scalar(0.5) * (out.cov + out.cov.transpose()).eval();
    out.last_update_frame = frame_idx;
    return out;
}

/// Box-state filter bundling a state with its configuration.
template <typename Scalar = double>
class KalmanBoxFilter {
public:
    KalmanBoxFilter(const BBox& b0, const MotionConfig& cfg, int frame_idx = 0)
        : cfg_(cfg), state_(kf_init<Scalar>(b0, cfg, frame_idx)) {}

    BBox predict() {
        auto [next, box] = kf_predict(state_, cfg_);
        state_ = std::move(next);
        return box;
    }

    void update(const BBox& z, int frame_idx) { state_ = kf_update(state_, z, cfg_, frame_idx); }

    const KalmanStateT<Scalar>& state() const { return state_; }
    const MotionConfig& config() const { return cfg_; }

private:
    MotionConfig cfg_;
    KalmanStateT<Scalar> state_;
};

}  // namespace hybridmem

#include "helpers.hpp"

#include "hybridmem/motion.hpp"
#include "hybridmem/rng.hpp"

#include <gtest/gtest.h>

using namespace hybridmem;

namespace {

void expect_matches_dense(const KalmanState& s, const oracle::DenseKalman& o, double tol) {
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(s.mean(i), o.mean()[i], tol) << "mean " << i;
    for (int r = 0; r < 8; ++r) {
        for (int c = 0; c < 8; ++c) EXPECT_NEAR(s.cov(r, c), o.cov()[r * 8 + c], tol) << "cov " << r << "," << c;
    }
}

}  // namespace

TEST(KalmanInit, MeanAndCovariance) {
    const MotionConfig cfg;
    const auto s = kf_init(BBox{0, 0, 2, 2}, cfg);
    Eigen::Matrix<double, 8, 1> expect;
    expect << 1, 1, 2, 2, 0, 0, 0, 0;
    EXPECT_EQ(s.mean, expect);
    EXPECT_EQ(s.cov, (Eigen::Matrix<double, 8, 8>::Identity() * cfg.initial_cov_scale).eval());
}

TEST(KalmanInit, ZeroAreaThrows) { EXPECT_THROW(kf_init(BBox{1, 1, 0, 3}, MotionConfig{}), std::invalid_argument); }

TEST(MotionConfig, Validation) {
    MotionConfig m;
    m.process_noise = 0.0;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m = MotionConfig{};
    m.lost_reinit_frames = 0;
    EXPECT_THROW(m.validate(), std::invalid_argument);
}

TEST(KalmanPredict, ZeroVelocityKeepsBox) {
    const BBox b{3, 4, 10, 6};
    const auto [s, box] = kf_predict(kf_init(b, MotionConfig{}), MotionConfig{});
    EXPECT_DOUBLE_EQ(box.x, b.x);
    EXPECT_DOUBLE_EQ(box.y, b.y);
    EXPECT_DOUBLE_EQ(box.w, b.w);
    EXPECT_DOUBLE_EQ(box.h, b.h);
}

TEST(KalmanPredict, LinearExtrapolation) {
    KalmanState s;
    s.mean << 0, 0, 2, 2, 1, 0, 0, 0;
    const auto [next, box] = kf_predict(s, MotionConfig{});
    EXPECT_DOUBLE_EQ(box.cx(), 1.0);
    EXPECT_DOUBLE_EQ(box.cy(), 0.0);
}

TEST(KalmanPredict, ClampsSize) {
    KalmanState s;
    s.mean << 5, 5, 1, 1, 0, 0, -3, -3;
    const auto [next, box] = kf_predict(s, MotionConfig{});
    EXPECT_DOUBLE_EQ(box.w, 1e-6);
    EXPECT_DOUBLE_EQ(box.h, 1e-6);
}

TEST(KalmanUpdate, ZeroAreaMeasurementIsMissing) {
    const auto s = kf_init(BBox{0, 0, 4, 4}, MotionConfig{});
    const auto u = kf_update(s, BBox{1, 1, 0, 0}, MotionConfig{}, 3);
    EXPECT_EQ(u.mean, s.mean);
    EXPECT_EQ(u.cov, s.cov);
    EXPECT_EQ(u.last_update_frame, s.last_update_frame);
}

TEST(KalmanUpdate, ZeroInnovationKeepsMean) {
    const MotionConfig cfg;
    const auto [s, box] = kf_predict(kf_init(BBox{10, 10, 8, 6}, cfg), cfg);
    const auto u = kf_update(s, box, cfg, 1);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(u.mean(i), s.mean(i), 1e-12);
    EXPECT_EQ(u.last_update_frame, 1);
}

TEST(KalmanUpdate, ConvergesToFixedMeasurement) {
    const MotionConfig cfg;
    const BBox z{30, 40, 12, 9};
    auto s = kf_init(BBox{0, 0, 20, 20}, cfg);
    oracle::DenseKalman o({0, 0, 20, 20}, cfg.process_noise, cfg.measurement_noise, cfg.initial_cov_scale);
    for (int t = 1; t <= 50; ++t) {
        s = kf_update(s, z, cfg, t);
        o.update({z.x, z.y, z.w, z.h});
    }
    EXPECT_NEAR(s.mean(0), z.cx(), 1e-2);
    EXPECT_NEAR(s.mean(1), z.cy(), 1e-2);
    EXPECT_NEAR(s.mean(2), z.w, 1e-2);
    EXPECT_NEAR(s.mean(3), z.h, 1e-2);
    expect_matches_dense(s, o, 1e-9);
}

TEST(KalmanUpdate, PosteriorShrinksMeasuredVariance) {
    const MotionConfig cfg;
    const auto [prior, box] = kf_predict(kf_init(BBox{0, 0, 5, 5}, cfg), cfg);
    const auto post = kf_update(prior, BBox{1, 1, 5, 5}, cfg, 1);
    const Eigen::Matrix4d diff = prior.cov.topLeftCorner<4, 4>() - post.cov.topLeftCorner<4, 4>();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(diff);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(Kalman, SinglePredictUpdateMatchesOracle) {
    const MotionConfig cfg;
    auto s = kf_init(BBox{5, 5, 10, 10}, cfg);
    oracle::DenseKalman o({5, 5, 10, 10}, cfg.process_noise, cfg.measurement_noise, cfg.initial_cov_scale);
    s = kf_predict(s, cfg).first;
    o.predict();
    s = kf_update(s, BBox{7, 4, 11, 9}, cfg, 1);
    o.update({7, 4, 11, 9});
    expect_matches_dense(s, o, 1e-9);
}

TEST(Kalman, OracleFixture) {
    const auto j = testutil::load_oracle("kalman.json");
    MotionConfig cfg;
    cfg.process_noise = j.at("process_noise");
    cfg.measurement_noise = j.at("measurement_noise");
    cfg.initial_cov_scale = j.at("initial_cov_scale");
    for (const auto& tr : j.at("traces")) {
        KalmanBoxFilter<double> f(testutil::to_bbox(testutil::rect_from_json(tr.at("init"))), cfg);
        const auto& zs = tr.at("measurements");
        const auto& means = tr.at("means");
        for (std::size_t t = 0; t < zs.size(); ++t) {
            f.predict();
            if (!zs[t].is_null()) f.update(testutil::to_bbox(testutil::rect_from_json(zs[t])), static_cast<int>(t + 1));
            for (int i = 0; i < 8; ++i) EXPECT_NEAR(f.state().mean(i), means[t][i].get<double>(), 1e-9);
        }
        const auto cov = tr.at("final_cov").get<std::vector<double>>();
        for (int i = 0; i < 64; ++i) EXPECT_NEAR(f.state().cov(i / 8, i % 8), cov[i], 1e-9);
    }
}

TEST(Kalman, CovarianceStaysSymmetric) {
    const MotionConfig cfg;
    CounterRng rng(3, 3);
    auto s = kf_init(BBox{50, 50, 20, 20}, cfg);
    for (int t = 1; t <= 10000; ++t) {
        s = kf_predict(s, cfg).first;
        if (rng.bernoulli(0.7)) {
            s = kf_update(s, BBox{rng.uniform(30, 70), rng.uniform(30, 70), rng.uniform(5, 30), rng.uniform(5, 30)}, cfg, t);
        }
        ASSERT_LT((s.cov - s.cov.transpose()).cwiseAbs().maxCoeff(), 1e-9);
        ASSERT_GE(s.cov.diagonal().minCoeff(), 0.0);
    }
}

TEST(Kalman, ConstantVelocityTargetIsLearned) {
    MotionConfig cfg;
    cfg.process_noise = 1e-9;
    cfg.measurement_noise = 1e-9;
    const auto truth = [](int t) { return BBox{10.0 + 3.0 * t, 20.0 - 1.5 * t, 14, 10}; };
    KalmanBoxFilter<double> f(truth(0), cfg);
    double iou = 0.0;
    for (int t = 1; t <= 20; ++t) {
        iou = box_iou(f.predict(), truth(t));
        f.update(truth(t), t);
    }
    EXPECT_GE(iou, 0.95);
}

TEST(Kalman, BitReproducible) {
    const MotionConfig cfg;
    auto run = [&]() {
        CounterRng rng(9, 9);
        KalmanBoxFilter<double> f(BBox{0, 0, 10, 10}, cfg);
        for (int t = 1; t < 100; ++t) {
            f.predict();
            f.update(BBox{rng.uniform(0, 10), rng.uniform(0, 10), 10, 10}, t);
        }
        return f.state();
    };
    const auto a = run(), b = run();
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.cov, b.cov);
}

TEST(Kalman, FloatScalarInstantiates) {
    const MotionConfig cfg;
    KalmanBoxFilter<float> f(BBox{0, 0, 4, 4}, cfg);
    f.predict();
    f.update(BBox{1, 0, 4, 4}, 1);
    EXPECT_NEAR(f.state().mean(0), 2.0f + 0.99f, 0.05f);
}

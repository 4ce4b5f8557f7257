#include "helpers.hpp"

#include "hybridmem/rng.hpp"
#include "hybridmem/simulator.hpp"

#include <gtest/gtest.h>

using namespace hybridmem;

namespace {

FeatureGrid random_grid(CounterRng& rng, int w, int h, int dim) {
    FeatureGrid g;
    g.width = w;
    g.height = h;
    g.values.resize(w * h, dim);
    for (Eigen::Index i = 0; i < g.values.size(); ++i) g.values.data()[i] = rng.normal();
    return g;
}

}  // namespace

TEST(Prototypes, UniformGrid) {
    FeatureGrid g;
    g.width = 4;
    g.height = 4;
    Eigen::RowVectorXd v(3);
    v << 0.5, -1.0, 2.0;
    g.values = v.replicate(16, 1);
    const auto p = extract_prototypes(g, BitMask::rectangle(16, 16, {0, 0, 8, 8}));
    EXPECT_TRUE(p.fg.isApprox(v.transpose()));
    EXPECT_TRUE(p.bg.isApprox(v.transpose()));
}

TEST(Prototypes, FullMaskLeavesZeroBackground) {
    CounterRng rng(1, 1);
    const auto g = random_grid(rng, 4, 4, 5);
    const auto p = extract_prototypes(g, BitMask::from_dense(8, 8, std::vector<std::uint8_t>(64, 1)));
    EXPECT_EQ(p.bg, Prototype::Zero(5));
    EXPECT_TRUE(p.fg.isApprox(g.values.colwise().mean().transpose()));
}

TEST(Prototypes, EmptyMaskLeavesZeroForeground) {
    CounterRng rng(2, 1);
    const auto g = random_grid(rng, 4, 4, 3);
    EXPECT_EQ(extract_prototypes(g, BitMask(8, 8)).fg, Prototype::Zero(3));
}

TEST(Prototypes, MatchesLoopAverage) {
    CounterRng rng(3, 1);
    for (int trial = 0; trial < 50; ++trial) {
        const int cells = rng.uniform_int(2, 8), mask_px = cells * rng.uniform_int(1, 4), dim = rng.uniform_int(1, 6);
        const auto g = random_grid(rng, cells, cells, dim);
        const auto d = oracle::random_mask(rng, mask_px, mask_px);
        const auto p = extract_prototypes(g, testutil::to_mask(d));
        std::vector<double> fg(dim, 0.0), bg(dim, 0.0);
        int nf = 0, nb = 0;
        for (int cy = 0; cy < cells; ++cy) {
            for (int cx = 0; cx < cells; ++cx) {
                const int px = static_cast<int>((cx + 0.5) * mask_px / cells);
                const int py = static_cast<int>((cy + 0.5) * mask_px / cells);
                const bool in = d.at(px, py);
                for (int k = 0; k < dim; ++k) (in ? fg : bg)[k] += g.values(cy * cells + cx, k);
                (in ? nf : nb) += 1;
            }
        }
        for (int k = 0; k < dim; ++k) {
            EXPECT_NEAR(p.fg(k), nf ? fg[k] / nf : 0.0, 1e-12);
            EXPECT_NEAR(p.bg(k), nb ? bg[k] / nb : 0.0, 1e-12);
        }
    }
}

TEST(Prototypes, LinearInGrid) {
    CounterRng rng(4, 1);
    const auto a = random_grid(rng, 6, 6, 4), b = random_grid(rng, 6, 6, 4);
    FeatureGrid sum = a;
    sum.values = 2.0 * a.values + b.values;
    const auto m = BitMask::ellipse(12, 12, {1, 2, 8, 7});
    const auto pa = extract_prototypes(a, m), pb = extract_prototypes(b, m), ps = extract_prototypes(sum, m);
    EXPECT_TRUE(ps.fg.isApprox(2.0 * pa.fg + pb.fg, 1e-12));
    EXPECT_TRUE(ps.bg.isApprox(2.0 * pa.bg + pb.bg, 1e-12));
}

TEST(Cosine, Examples) {
    Eigen::VectorXd a(3), b(3);
    a << 1, 2, 3;
    EXPECT_DOUBLE_EQ(cosine(a, a), 1.0);
    EXPECT_DOUBLE_EQ(cosine(a, -a), -1.0);
    a << 1, 0, 0;
    b << 0, 1, 0;
    EXPECT_EQ(cosine(a, b), 0.0);
    EXPECT_EQ(cosine(a, Eigen::VectorXd::Zero(3)), 0.0);
    EXPECT_THROW(cosine(a, Eigen::VectorXd::Ones(2)), std::invalid_argument);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
    CounterRng rng(5, 1);
    for (int i = 0; i < 500; ++i) {
        Eigen::VectorXd a(6), b(6);
        for (int k = 0; k < 6; ++k) {
            a(k) = rng.normal();
            b(k) = rng.normal();
        }
        const double c = cosine(a, b);
        EXPECT_EQ(c, cosine(b, a));
        EXPECT_NEAR(c, cosine((3.5 * a).eval(), b), 1e-12);
        EXPECT_NEAR(c, cosine(a, (0.01 * b).eval()), 1e-12);
        EXPECT_GE(c, -1.0);
        EXPECT_LE(c, 1.0);
    }
}

TEST(ObservationFixture, LineRoundTrip) {
    SceneConfig cfg;
    cfg.frames = 6;
    cfg.n_distractors = 2;
    cfg.proto_dim = 4;
    cfg.feature_cells = 8;
    const auto rec = gen_sequence(cfg);
    for (const auto& obs : rec.observations) {
        const auto back = observation_from_line(observation_to_line(obs));
        EXPECT_EQ(back.frame_idx, obs.frame_idx);
        EXPECT_EQ(back.o, obs.o);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(back.proposals[i].mask, obs.proposals[i].mask);
            EXPECT_EQ(back.proposals[i].s_mask, obs.proposals[i].s_mask);
            EXPECT_EQ(back.proposals[i].s_obj, obs.proposals[i].s_obj);
            EXPECT_EQ(back.proposals[i].bbox, obs.proposals[i].bbox);
        }
        ASSERT_TRUE(back.features.has_value());
        EXPECT_EQ(back.features->values, obs.features->values);
        EXPECT_EQ(observation_to_line(back), observation_to_line(obs));
    }
}

TEST(ObservationFixture, RejectsWrongProposalCount) {
    EXPECT_THROW(observation_from_line(R"({"frame":1,"o":1,"proposals":[],"features":null})"), std::invalid_argument);
}

TEST(Proposal, BboxCachedFromMask) {
    const auto p = Proposal::make(BitMask::rectangle(32, 32, {3, 4, 5, 6}), 0.5, 1.0);
    EXPECT_EQ(p.bbox, (BBox{3, 4, 5, 6}));
    EXPECT_FALSE(Proposal::make(BitMask(8, 8), 0.1, 0).bbox.has_value());
}

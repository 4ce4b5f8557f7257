#include "helpers.hpp"

#include "hybridmem/rng.hpp"

#include <gtest/gtest.h>

using namespace hybridmem;

TEST(BoxIou, Identical) { EXPECT_EQ(box_iou({0, 0, 2, 2}, {0, 0, 2, 2}), 1.0); }

TEST(BoxIou, Disjoint) { EXPECT_EQ(box_iou({0, 0, 1, 1}, {5, 5, 1, 1}), 0.0); }

TEST(BoxIou, PartialOverlapMatchesRaster) {
    const double v = box_iou({0, 0, 2, 2}, {1, 1, 2, 2});
    EXPECT_NEAR(v, 1.0 / 7.0, 1e-15);
    EXPECT_NEAR(v, oracle::raster_box_iou({0, 0, 2, 2}, {1, 1, 2, 2}, 8), 1e-15);
}

TEST(BoxIou, ZeroAreaIsZero) {
    EXPECT_EQ(box_iou({0, 0, 0, 2}, {0, 0, 2, 2}), 0.0);
    EXPECT_EQ(box_iou({1, 1, 0, 0}, {1, 1, 0, 0}), 0.0);
}

TEST(BoxIou, SymmetricBoundedProperty) {
    CounterRng rng(11, 0);
    for (int i = 0; i < 2000; ++i) {
        const BBox a{rng.uniform(-5, 50), rng.uniform(-5, 50), rng.uniform(0, 30), rng.uniform(0, 30)};
        const BBox b{rng.uniform(-5, 50), rng.uniform(-5, 50), rng.uniform(0, 30), rng.uniform(0, 30)};
        const double ab = box_iou(a, b);
        EXPECT_EQ(ab, box_iou(b, a));
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        if (a.area() > 0) EXPECT_EQ(box_iou(a, a), 1.0);
    }
}

TEST(BoxIou, OracleFixture) {
    const auto j = testutil::load_oracle("geometry.json");
    for (const auto& c : j.at("boxes")) {
        const auto a = testutil::rect_from_json(c.at("a"));
        const auto b = testutil::rect_from_json(c.at("b"));
        EXPECT_NEAR(box_iou(testutil::to_bbox(a), testutil::to_bbox(b)), c.at("iou").get<double>(), 1e-9);
    }
}

TEST(BitMask, RleGrammarExample) {
    const auto m = BitMask::parse_rle_text("4 4; 0:1+2; 2:0+1");
    EXPECT_EQ(m.width(), 4);
    EXPECT_EQ(mask_area(m), 3);
    EXPECT_TRUE(m.contains(1, 0));
    EXPECT_TRUE(m.contains(2, 0));
    EXPECT_TRUE(m.contains(0, 2));
    EXPECT_FALSE(m.contains(3, 0));
    EXPECT_EQ(m.to_rle_text(), "4 4; 0:1+2; 2:0+1");
    EXPECT_EQ(BitMask(4, 4).to_rle_text(), "4 4");
    EXPECT_EQ(BitMask::parse_rle_text("4 4"), BitMask(4, 4));
}

TEST(BitMask, RleTextRejectsMalformed) {
    EXPECT_THROW(BitMask::parse_rle_text("4"), std::invalid_argument);
    EXPECT_THROW(BitMask::parse_rle_text("4 4; 0:3+2"), std::invalid_argument);
    EXPECT_THROW(BitMask::parse_rle_text("4 4; 5:0+1"), std::invalid_argument);
    EXPECT_THROW(BitMask::parse_rle_text("4 4; 1:0+1; 0:0+1"), std::invalid_argument);
    EXPECT_THROW(BitMask::parse_rle_text("4 4; 0:x+1"), std::invalid_argument);
}

TEST(BitMask, FromRunsValidatesAndMerges) {
    const auto m = BitMask::from_runs(8, 2, {{0, 0, 2}, {0, 2, 3}});
    ASSERT_EQ(m.runs().size(), 1u);
    EXPECT_EQ(m.runs()[0], (hybridmem::Run{0, 0, 5}));
    EXPECT_THROW(BitMask::from_runs(8, 2, {{0, 0, 3}, {0, 2, 3}}), std::invalid_argument);
    EXPECT_THROW(BitMask::from_runs(8, 2, {{1, 0, 1}, {0, 0, 1}}), std::invalid_argument);
    EXPECT_THROW(BitMask::from_runs(8, 2, {{0, 6, 3}}), std::invalid_argument);
    EXPECT_THROW(BitMask::from_runs(8, 2, {{0, 1, 0}}), std::invalid_argument);
}

TEST(BitMask, Area) {
    EXPECT_EQ(mask_area(BitMask(4, 4)), 0);
    EXPECT_EQ(mask_area(BitMask::from_dense(4, 4, std::vector<std::uint8_t>(16, 1))), 16);
}

TEST(MaskIou, Basics) {
    const auto a = BitMask::rectangle(16, 16, {2, 2, 5, 5});
    EXPECT_EQ(mask_iou(a, a), 1.0);
    EXPECT_EQ(mask_iou(BitMask(16, 16), a), 0.0);
    EXPECT_EQ(mask_iou(BitMask(16, 16), BitMask(16, 16)), 0.0);
    EXPECT_THROW(mask_iou(a, BitMask(8, 16)), std::invalid_argument);
}

TEST(MaskToBbox, Examples) {
    const auto m = BitMask::from_runs(10, 10, {{3, 4, 3}});
    EXPECT_EQ(mask_to_bbox(m), (BBox{4, 3, 3, 1}));
    EXPECT_FALSE(mask_to_bbox(BitMask(10, 10)).has_value());
}

TEST(MaskOps, RandomPairsMatchDenseOracle) {
    CounterRng rng(21, 0);
    for (int i = 0; i < 300; ++i) {
        const auto da = oracle::random_mask(rng, 32, 32);
        const auto db = oracle::random_mask(rng, 32, 32);
        const auto a = testutil::to_mask(da), b = testutil::to_mask(db);
        EXPECT_EQ(a.to_dense(), da.px);
        EXPECT_EQ(mask_area(a), oracle::dense_area(da));
        EXPECT_EQ(mask_intersection_area(a, b), oracle::dense_intersection(da, db));
        EXPECT_EQ(mask_iou(a, b), oracle::dense_iou(da, db));
        EXPECT_EQ(mask_iou(a, b), mask_iou(b, a));
        const auto bb = mask_to_bbox(a);
        const auto ob = oracle::dense_bbox(da);
        ASSERT_EQ(bb.has_value(), ob.has_value());
        if (bb) EXPECT_EQ(*bb, testutil::to_bbox(*ob));
        EXPECT_EQ(BitMask::parse_rle_text(a.to_rle_text()), a);
    }
}

TEST(MaskOps, OracleFixture) {
    const auto j = testutil::load_oracle("geometry.json");
    CounterRng rng(j.at("mask_seed").get<std::uint64_t>(), j.at("mask_stream").get<std::uint64_t>());
    const int n = j.at("mask_size");
    for (const auto& c : j.at("masks")) {
        const auto a = testutil::to_mask(oracle::random_mask(rng, n, n));
        const auto b = testutil::to_mask(oracle::random_mask(rng, n, n));
        EXPECT_EQ(mask_iou(a, b), c.at("iou").get<double>());
        EXPECT_EQ(mask_area(a), c.at("area_a").get<std::int64_t>());
        EXPECT_EQ(mask_area(b), c.at("area_b").get<std::int64_t>());
        EXPECT_EQ(mask_intersection_area(a, b), c.at("intersection").get<std::int64_t>());
        const auto bb = mask_to_bbox(a);
        const auto expect = testutil::opt_rect_from_json(c.at("bbox_a"));
        ASSERT_EQ(bb.has_value(), expect.has_value());
        if (bb) EXPECT_EQ(*bb, testutil::to_bbox(*expect));
    }
}

TEST(MaskToBbox, TightProperty) {
    CounterRng rng(5, 1);
    for (int i = 0; i < 200; ++i) {
        const auto d = oracle::random_mask(rng, 24, 20);
        const auto m = testutil::to_mask(d);
        const auto b = mask_to_bbox(m);
        if (!b) continue;
        for (int y = 0; y < 20; ++y) {
            for (int x = 0; x < 24; ++x) {
                if (!d.at(x, y)) continue;
                EXPECT_TRUE(x >= b->x && x < b->x + b->w && y >= b->y && y < b->y + b->h);
            }
        }
        // every edge row/column of the box touches the foreground
        bool top = false, bottom = false, left = false, right = false;
        for (int x = int(b->x); x < int(b->x + b->w); ++x) {
            top |= m.contains(x, int(b->y));
            bottom |= m.contains(x, int(b->y + b->h) - 1);
        }
        for (int y = int(b->y); y < int(b->y + b->h); ++y) {
            left |= m.contains(int(b->x), y);
            right |= m.contains(int(b->x + b->w) - 1, y);
        }
        EXPECT_TRUE(top && bottom && left && right);
    }
}

TEST(Rasterize, RectangleMatchesPixelCenterRule) {
    CounterRng rng(8, 8);
    for (int i = 0; i < 200; ++i) {
        const oracle::Rect r{rng.uniform(-4, 40), rng.uniform(-4, 40), rng.uniform(0, 20), rng.uniform(0, 20)};
        EXPECT_EQ(BitMask::rectangle(40, 40, testutil::to_bbox(r)).to_dense(), oracle::dense_rectangle(40, 40, r).px);
    }
}

TEST(Rasterize, EllipseInsideBox) {
    const BBox b{4.5, 3.0, 11.0, 7.0};
    const auto e = BitMask::ellipse(32, 32, b);
    const auto r = BitMask::rectangle(32, 32, b);
    EXPECT_GT(mask_area(e), 0);
    EXPECT_EQ(mask_intersection_area(e, r), mask_area(e));
    EXPECT_LT(mask_area(e), mask_area(r));
}

#include <catch2/catch_amalgamated.hpp>

#include "ssodat/geometry.hpp"
#include "ssodat/simulator.hpp"

#include "oracles.hpp"

using namespace ssodat;
using oracles::make_roi;

TEST_CASE("iou of half-overlapping boxes is exactly one third") {
    const Box a{0, 0, 2, 2};
    const Box b{1, 0, 3, 2};
    CHECK(geometry::iou(a, b) == 1.0 / 3.0);
    CHECK(geometry::iou(b, a) == 1.0 / 3.0);
}

TEST_CASE("iou endpoints") {
    const Box a{10, 10, 20, 20};
    CHECK(geometry::iou(a, a) == 1.0);
    CHECK(geometry::iou(a, Box{30, 30, 40, 40}) == 0.0);
    // Shared edge only: zero intersection area.
    CHECK(geometry::iou(a, Box{20, 10, 30, 20}) == 0.0);
    // Contained box: inter = small area, union = big area.
    CHECK(geometry::iou(Box{0, 0, 4, 4}, Box{1, 1, 3, 3}) == 4.0 / 16.0);
}

TEST_CASE("iou rejects degenerate boxes") {
    CHECK_THROWS_AS(geometry::iou(Box{0, 0, 0, 1}, Box{0, 0, 1, 1}), validation_error);
    CHECK_THROWS_AS(geometry::iou(Box{0, 0, 1, 1}, Box{5, 5, 4, 6}), validation_error);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(geometry::iou(Box{0, 0, inf, 1}, Box{0, 0, 1, 1}), validation_error);
}

TEST_CASE("iou is symmetric and in [0,1] on random boxes") {
    sim::Rng rng(7001);
    for (int i = 0; i < 2000; ++i) {
        const Box a{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(51, 100),
                    rng.uniform(51, 100)};
        const Box b{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(51, 100),
                    rng.uniform(51, 100)};
        const double ab = geometry::iou(a, b);
        CHECK(ab == geometry::iou(b, a));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("nms keeps the higher-confidence box of an overlapping pair") {
    const auto kept = geometry::nms({make_roi({0, 0, 10, 10}, 0.9, {1.0}),
                                     make_roi({1, 0, 11, 10}, 0.8, {1.0})},
                                    0.5, 0.0);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].confidence == 0.9);
}

TEST_CASE("nms keeps boxes at exactly the iou threshold") {
    // IoU of these two is exactly 1/3; with threshold 1/3 suppression needs
    // strictly greater overlap, so both survive.
    const auto kept = geometry::nms({make_roi({0, 0, 2, 2}, 0.9, {1.0}),
                                     make_roi({1, 0, 3, 2}, 0.8, {1.0})},
                                    1.0 / 3.0, 0.0);
    CHECK(kept.size() == 2);
}

TEST_CASE("nms confidence filter keeps the boundary value") {
    const auto kept = geometry::nms({make_roi({0, 0, 10, 10}, 0.7, {1.0}),
                                     make_roi({20, 20, 30, 30}, 0.69999, {1.0})},
                                    0.5, 0.7);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].confidence == 0.7);
}

TEST_CASE("nms breaks confidence ties toward the lexicographically lower box") {
    const auto kept = geometry::nms({make_roi({5, 0, 15, 10}, 0.8, {1.0}),
                                     make_roi({4, 0, 14, 10}, 0.8, {1.0})},
                                    0.5, 0.0);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].box.x1 == 4.0);
}

TEST_CASE("nms returns survivors in descending confidence order") {
    sim::Rng rng(7002);
    for (int i = 0; i < 200; ++i) {
        std::vector<RoiPrediction> rois;
        const int n = static_cast<int>(rng.uniform_int(1, 10));
        for (int k = 0; k < n; ++k) {
            const double x = rng.uniform(0, 80);
            const double y = rng.uniform(0, 80);
            rois.push_back(make_roi({x, y, x + rng.uniform(5, 30), y + rng.uniform(5, 30)},
                                    rng.uniform(), {1.0}));
        }
        const auto kept = geometry::nms(rois, 0.5, 0.2);
        for (std::size_t k = 1; k < kept.size(); ++k) {
            CHECK(kept[k - 1].confidence >= kept[k].confidence);
        }
        for (std::size_t a = 0; a < kept.size(); ++a) {
            for (std::size_t b = a + 1; b < kept.size(); ++b) {
                CHECK(geometry::iou(kept[a].box, kept[b].box) <= 0.5);
            }
        }
    }
}

TEST_CASE("nms agrees with the exhaustive fixed-point reference") {
    sim::Rng rng(7003);
    for (int i = 0; i < 300; ++i) {
        std::vector<RoiPrediction> rois;
        const int n = static_cast<int>(rng.uniform_int(1, 10));
        for (int k = 0; k < n; ++k) {
            // Two cluster anchors force frequent overlaps.
            const double ax = rng.uniform() < 0.5 ? 100.0 : 130.0;
            const double ay = 100.0;
            const double x = ax + rng.uniform(-15, 15);
            const double y = ay + rng.uniform(-15, 15);
            // Quantized confidences exercise the equal-confidence tie-break.
            const double conf = rng.uniform_int(1, 10) / 10.0;
            rois.push_back(
                make_roi({x, y, x + rng.uniform(20, 60), y + rng.uniform(20, 60)}, conf,
                         {1.0}));
        }
        const auto expected = oracles::nms_fixed_point(rois, 0.5, 0.3);
        const auto actual = geometry::nms(rois, 0.5, 0.3);
        REQUIRE(actual.size() == expected.size());
        for (std::size_t k = 0; k < actual.size(); ++k) {
            CHECK(actual[k] == expected[k]);
        }
    }
}

TEST_CASE("nms rejects out-of-range thresholds") {
    CHECK_THROWS_AS(geometry::nms({}, 0.0, 0.5), validation_error);
    CHECK_THROWS_AS(geometry::nms({}, 1.5, 0.5), validation_error);
    CHECK_THROWS_AS(geometry::nms({}, 0.5, 1.0), validation_error);
    CHECK_THROWS_AS(geometry::nms({}, 0.5, -0.1), validation_error);
}

TEST_CASE("nms validates boxes even below the confidence filter") {
    CHECK_THROWS_AS(geometry::nms({make_roi({3, 3, 2, 4}, 0.1, {1.0})}, 0.5, 0.9),
                    validation_error);
}

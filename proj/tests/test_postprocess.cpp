#include <doctest.h>

#include <random>

#include "octdn/metrics.hpp"
#include "octdn/postprocess.hpp"
#include "oracles.hpp"

using namespace octdn;

TEST_SUITE("postprocess") {

TEST_CASE("min-max scaling maps the worked example") {
    Image img(1, 3);
    img << 0.2, 0.4, 0.6;
    const auto [out, rep] = color_scale(img);
    CHECK(rep.applied);
    CHECK(rep.in_min == 0.2);
    CHECK(rep.in_max == 0.6);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out(0, 2) == 1.0);
}

TEST_CASE("constant images pass through unchanged") {
    const Image c = Image::Constant(5, 5, 0.7);
    const auto [out, rep] = color_scale(c);
    CHECK_FALSE(rep.applied);
    CHECK((out == c).all());
}

TEST_CASE("already-spanning images are fixed points") {
    std::mt19937_64 rng(61);
    Image img = oracle::random_image(8, 8, rng);
    img(0, 0) = 0.0;
    img(7, 7) = 1.0;
    const auto [out, rep] = color_scale(img);
    CHECK(rep.applied);
    CHECK((out == img).all());
}

TEST_CASE("output spans exactly [0,1] and idempotence is exact") {
    std::mt19937_64 rng(62);
    for (int it = 0; it < 30; ++it) {
        const Image img = oracle::random_image(16, 16, rng, 0.17, 0.83);
        const auto [once, rep1] = color_scale(img);
        REQUIRE(rep1.applied);
        CHECK(once.minCoeff() == 0.0);
        CHECK(once.maxCoeff() == 1.0);
        const auto [twice, rep2] = color_scale(once);
        CHECK((twice == once).all());
        (void)rep2;
    }
}

TEST_CASE("scaling preserves pixel ordering") {
    std::mt19937_64 rng(63);
    const Image img = oracle::random_image(12, 12, rng);
    const auto [out, rep] = color_scale(img);
    (void)rep;
    for (Eigen::Index i = 1; i < img.size(); ++i) {
        if (img.data()[i - 1] <= img.data()[i]) CHECK(out.data()[i - 1] <= out.data()[i]);
        else CHECK(out.data()[i - 1] >= out.data()[i]);
    }
}

TEST_CASE("cnr is invariant under colour scaling") {
    std::mt19937_64 rng(64);
    for (int it = 0; it < 20; ++it) {
        const Image img = oracle::random_image(16, 16, rng, 0.1, 0.9);
        const RoiSet roi = oracle::random_roi(16, 16, rng);
        const auto before = cnr(img, roi);
        const auto after = cnr(color_scale(img).first, roi);
        REQUIRE(before.has_value() == after.has_value());
        if (before) CHECK(std::abs(*before - *after) < 1e-9);
    }
}

}  // TEST_SUITE

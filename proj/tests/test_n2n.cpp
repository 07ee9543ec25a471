#include <doctest.h>

#include <array>
#include <random>

#include "octdn/denoisers.hpp"
#include "octdn/n2n.hpp"
#include "octdn/rng.hpp"
#include "oracles.hpp"

using namespace octdn;

TEST_SUITE("n2n") {

TEST_CASE("plans are deterministic per seed and sized by the cell grid") {
    const SubsamplePlan a = make_plan(16, 10, 77);
    const SubsamplePlan b = make_plan(16, 10, 77);
    const SubsamplePlan c = make_plan(16, 10, 78);
    REQUIRE(a.cells.size() == 8 * 5);
    CHECK(a.cells == b.cells);
    CHECK(a.cells != c.cells);

    const SubsamplePlan tiny = make_plan(2, 2, 0);
    REQUIRE(tiny.cells.size() == 1);
    CHECK(tiny.cells[0][0] != tiny.cells[0][1]);

    CHECK_THROWS_AS(make_plan(1, 8, 0), GeometryError);
}

TEST_CASE("every cell has two distinct offsets; odd trailing pixels unused") {
    const SubsamplePlan plan = make_plan(9, 7, 5);
    CHECK(plan.cells.size() == 4 * 3);
    for (const auto& cell : plan.cells) {
        CHECK(cell[0] != cell[1]);
        CHECK(cell[0] < 4);
        CHECK(cell[1] < 4);
    }
}

TEST_CASE("offset pairs are near-uniform over the 12 possibilities") {
    // 200x100 image -> 10^4 cells; 3-sigma binomial bound per ordered pair
    const SubsamplePlan plan = make_plan(200, 100, 2024);
    std::array<int, 16> freq{};
    for (const auto& cell : plan.cells) ++freq[cell[0] * 4 + cell[1]];
    const double n = static_cast<double>(plan.cells.size());
    const double p = 1.0 / 12.0;
    const double bound = 3.0 * std::sqrt(p * (1 - p) / n);
    for (int o1 = 0; o1 < 4; ++o1)
        for (int o2 = 0; o2 < 4; ++o2) {
            if (o1 == o2) {
                CHECK(freq[o1 * 4 + o2] == 0);
            } else {
                CHECK(std::abs(freq[o1 * 4 + o2] / n - p) <= bound);
            }
        }
}

TEST_CASE("subsample gathers the planned pixels with disjoint sources") {
    Image img(4, 4);
    img << 0, 1, 2, 3,
           4, 5, 6, 7,
           8, 9, 10, 11,
           12, 13, 14, 15;
    const SubsamplePlan plan = make_plan(4, 4, 9);
    const auto [g1, g2] = subsample(img, plan);
    REQUIRE(g1.rows() == 2);
    REQUIRE(g1.cols() == 2);
    for (int cy = 0; cy < 2; ++cy)
        for (int cx = 0; cx < 2; ++cx) {
            const auto& cell = plan.cells[static_cast<std::size_t>(cy) * 2 + cx];
            const auto o1 = kCellOffsets[cell[0]];
            const auto o2 = kCellOffsets[cell[1]];
            // hand enumeration: pixel value encodes its coordinates
            CHECK(g1(cy, cx) == (2 * cy + o1[0]) * 4.0 + (2 * cx + o1[1]));
            CHECK(g2(cy, cx) == (2 * cy + o2[0]) * 4.0 + (2 * cx + o2[1]));
            CHECK(g1(cy, cx) != g2(cy, cx));  // disjoint sources
        }

    const Image constant = Image::Constant(4, 4, 0.6);
    const auto [c1, c2] = subsample(constant, plan);
    CHECK((c1 == c2).all());

    const Image wrong = Image::Zero(6, 6);
    CHECK_THROWS_AS(subsample(wrong, plan), ShapeError);
}

TEST_CASE("identity denoiser: reg is exactly zero, total equals the pair gap") {
    std::mt19937_64 rng(55);
    auto identity = [](const Image& img) { return img; };
    for (int it = 0; it < 20; ++it) {
        const Image y = oracle::random_image(16, 16, rng);
        const SubsamplePlan plan = make_plan(16, 16, mix_seed(1000, it));
        N2nConfig cfg;
        const N2nLoss loss = n2n_loss(identity, y, cfg, plan);
        CHECK(loss.reg == 0.0);
        const auto [g1, g2] = subsample(y, plan);
        CHECK(loss.total == (g1 - g2).square().mean());
        CHECK(loss.total == loss.rec);
    }
}

TEST_CASE("constant input gives zero loss for constant-preserving denoisers") {
    const Image y = Image::Constant(12, 12, 0.42);
    const SubsamplePlan plan = make_plan(12, 12, 3);
    N2nConfig cfg;
    for (const std::string spec : {"identity", "gaussian:sigma=1.0", "median:window=3"}) {
        const DenoiserSpec d = parse_denoiser_spec(spec);
        const N2nLoss loss = n2n_loss([&](const Image& img) { return denoise(d, img); }, y, cfg, plan);
        CHECK(loss.total == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("loss matches the literal-formula oracle for a blur denoiser") {
    std::mt19937_64 rng(56);
    const DenoiserSpec blur = parse_denoiser_spec("gaussian:sigma=1.0");
    auto f = [&](const Image& img) { return denoise(blur, img); };
    for (int it = 0; it < 10; ++it) {
        const Image y = oracle::random_image(16, 16, rng);
        const SubsamplePlan plan = make_plan(16, 16, mix_seed(2000, it));
        N2nConfig cfg;
        cfg.gamma = 2.0;
        const N2nLoss loss = n2n_loss(f, y, cfg, plan);
        const oracle::NaiveN2n ref = oracle::naive_n2n_loss(f, y, cfg.gamma, plan);
        CHECK(std::abs(loss.rec - ref.rec) < 1e-9);
        CHECK(std::abs(loss.reg - ref.reg) < 1e-9);
        CHECK(std::abs(loss.total - ref.total) < 1e-9);
    }
}

TEST_CASE("the DenoiserSpec overload matches the functional form") {
    std::mt19937_64 rng(58);
    const Image y = oracle::random_image(16, 16, rng);
    const SubsamplePlan plan = make_plan(16, 16, 12);
    N2nConfig cfg;
    const DenoiserSpec spec = parse_denoiser_spec("median:window=3");
    const N2nLoss a = n2n_loss(spec, y, cfg, plan);
    const N2nLoss b = n2n_loss([&](const Image& img) { return denoise(spec, img); }, y, cfg, plan);
    CHECK(a.total == b.total);
    CHECK(a.rec == b.rec);
    CHECK(a.reg == b.reg);
}

TEST_CASE("total is nonnegative and reduces to rec when gamma is zero") {
    std::mt19937_64 rng(57);
    const Image y = oracle::random_image(20, 20, rng);
    const SubsamplePlan plan = make_plan(20, 20, 4);
    const DenoiserSpec med = parse_denoiser_spec("median:window=3");
    auto f = [&](const Image& img) { return denoise(med, img); };

    N2nConfig cfg;
    cfg.gamma = 0.0;
    const N2nLoss g0 = n2n_loss(f, y, cfg, plan);
    CHECK(g0.total == g0.rec);
    cfg.gamma = 2.0;
    const N2nLoss g2 = n2n_loss(f, y, cfg, plan);
    CHECK(g2.total >= 0.0);
    CHECK(g2.total >= g2.rec);
    CHECK(g2.total == doctest::Approx(g2.rec + 2.0 * g2.reg).epsilon(1e-15));

    // bit-stable across repeated evaluation
    const N2nLoss again = n2n_loss(f, y, cfg, plan);
    CHECK(again.total == g2.total);
}

}  // TEST_SUITE

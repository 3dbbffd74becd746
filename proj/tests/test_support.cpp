#include <cmath>
#include <random>

#include "doctest.h"
#include "idset/errors.hpp"
#include "idset/examples.hpp"
#include "idset/support.hpp"
#include "idset/tolerances.hpp"

using namespace idset;

namespace {

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("directions must be unit vectors") {
    CHECK_NOTHROW(Direction(Vec{0.6, 0.8}));
    CHECK_THROWS_AS(Direction(Vec{1.0, 1.0}), Error);
    CHECK_THROWS_AS(Direction::normalized(Vec{0.0, 0.0}), Error);
    CHECK(Direction::normalized(Vec{3.0, 4.0})[1] == doctest::Approx(0.8));
}

TEST_CASE("support on a small image picks the lowest index among ties") {
    MomentImage img;
    img.dim = 2;
    img.grid_index = {4, 7, 9};
    img.values = {1.0, 0.0, 0.0, 1.0, 1.0, 0.0};
    img.boundary = {0, 0, 0};
    auto s = support_on_image(img, Vec{1.0, 0.0});
    CHECK(s.value == 1.0);
    CHECK(s.attained_at == 4);
    CHECK(support_on_image(img, Vec{-1.0, -1.0}).value == -1.0);
}

TEST_CASE("sphere samples start with the signed axes and are unit length") {
    for (std::size_t d : {1u, 2u, 3u, 5u}) {
        auto s = sphere_samples(d);
        REQUIRE(s.size() >= 2 * d);
        CHECK(s[0][0] == 1.0);
        CHECK(s[1][0] == -1.0);
        for (const auto& v : s) CHECK(norm(v) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s == sphere_samples(d));
    }
    CHECK(sphere_samples(1).size() == 2);
}

TEST_CASE("entry images: homogeneity is exact and sublinearity holds") {
    EntryGameConfig cfg;
    auto m = build_entry_model(cfg);
    auto grid = m.make_grid();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> T(0.0, 8.0);
    auto zs = entry_z_support(cfg);
    const auto pts = m.params.grid();
    for (int t = 0; t < 300; ++t) {
        const auto& th = pts[rng() % pts.size()];
        const auto& z = zs[rng() % zs.size()];
        MomentImage img;
        try {
            img = moment_image(m, grid, z, th);
        } catch (const EmptySection&) {
            continue;
        }
        Vec a(m.moments.dim_r2), b(m.moments.dim_r2), ab(m.moments.dim_r2), ta(m.moments.dim_r2);
        const double k = std::ldexp(1.0, static_cast<int>(rng() % 7) - 3);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = N(rng);
            b[i] = N(rng);
            ab[i] = a[i] + b[i];
            ta[i] = k * a[i];
        }
        const double ga = support_on_image(img, a).value, gb = support_on_image(img, b).value;
        CHECK(support_on_image(img, ta).value == k * ga);
        CHECK(support_on_image(img, ab).value <= ga + gb + 1e-12);
    }
}

TEST_CASE("interval criterion: theta0 passes, a distant point fails") {
    IntervalRegConfig cfg;
    auto m = build_interval_model(cfg);
    auto F = simulate_interval_data(cfg, cfg.theta0, 300);
    auto grid = m.make_grid();
    auto in = criterion(m, grid, F, cfg.theta0);
    CHECK(in.member());
    CHECK(in.value >= -tol::crit(in.scale));
    auto out = criterion(m, grid, F, Vec{-2.0, -2.0});
    CHECK_FALSE(out.member());
}

TEST_CASE("criterion refuses models without latent moments") {
    ModelSpec m;
    m.label = "gmm";
    m.latent.box = {Interval::closed(0.0, 1.0)};
    m.latent.points_per_dim = 3;
    m.params = {{0.0}, {1.0}, {3}, {"t"}};
    m.z_dim = 1;
    m.support.contains = [](CSpan, CSpan, CSpan) { return true; };
    m.moments.dim_r1 = 1;
    m.moments.r1 = [](CSpan z, CSpan th, std::span<double> out) { out[0] = z[0] - th[0]; };
    auto F = DiscreteDistribution::normalized({{{0.5}, 1.0}});
    CHECK_THROWS_AS(criterion(m, m.make_grid(), F, Vec{0.5}), DimensionError);
    CHECK(gmm_residual(m, F, Vec{0.5})[0] == 0.0);
}

TEST_CASE("dagger directions toward the indicator row do not diverge") {
    IntervalRegConfig cfg;
    cfg.form = IntervalForm::Dagger;
    auto m = build_interval_model(cfg);
    auto F = simulate_interval_data(cfg, cfg.theta0, 300);
    CHECK_FALSE(detect_divergence(m, F, cfg.theta0, Direction(Vec{0.0, 0.0, 1.0}), 5.0));
    CHECK(detect_divergence(m, F, cfg.theta0, Direction(Vec{1.0, 0.0, 0.0}), 5.0));
}

#include <sstream>

#include "doctest.h"
#include "idset/errors.hpp"
#include "idset/examples.hpp"
#include "idset/support.hpp"

using namespace idset;

TEST_CASE("pure equilibria of small entry games") {
    const Vec idx{0.0, 0.0}, d{1.0, 1.0};
    CHECK(enumerate_pure_ne(idx, Vec{2.0, 2.0}, d) == std::vector<Profile>{{1, 1}});
    CHECK(enumerate_pure_ne(idx, Vec{-1.0, -1.0}, d) == std::vector<Profile>{{0, 0}});
    CHECK(enumerate_pure_ne(idx, Vec{0.5, 0.5}, d) == std::vector<Profile>{{0, 1}, {1, 0}});
    CHECK(enumerate_pure_ne(idx, Vec{0.5, -0.5}, d) == std::vector<Profile>{{1, 0}});
    // zero payoff is a best response either way
    CHECK(is_pure_ne(idx, Vec{0.0, 0.0}, d, {0, 0}));
    CHECK(is_pure_ne(idx, Vec{0.0, 0.0}, d, {1, 0}));
}

TEST_CASE("equilibria exist on every shipped grid point with nonnegative effects") {
    EntryGameConfig cfg;
    auto m = build_entry_model(cfg);
    auto grid = m.make_grid();
    for (const auto& th : m.params.grid()) {
        for (const auto& x : cfg.x_support) {
            const double index = x[0] * th[0];
            const Vec idx{index, index}, d{th[1], th[2]};
            for (std::size_t i = 0; i < grid.size(); i += 3)
                REQUIRE_FALSE(enumerate_pure_ne(idx, grid.point(i), d).empty());
        }
    }
}

TEST_CASE("interval generator reproduces the elementary means") {
    IntervalRegConfig cfg;
    auto F = simulate_interval_data(cfg, cfg.theta0, 300);
    CHECK(F.size() == 3);
    CHECK(F.mean(0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(F.mean(1) == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(F.mean(2) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("iid interval sampling is seeded") {
    IntervalRegConfig cfg;
    NoiseLaw eps{{-0.5, 0.5}, {0.5, 0.5}};
    auto a = simulate_interval_data(cfg, cfg.theta0, 500, eps, 3, Sampling::Iid);
    auto b = simulate_interval_data(cfg, cfg.theta0, 500, eps, 3, Sampling::Iid);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].weight == b[i].weight);
}

TEST_CASE("entry generator is consistent with the model at theta0") {
    EntryGameConfig cfg;
    auto m = build_entry_model(cfg);
    auto law = LatentLaw::entry_default();
    auto F = simulate_entry_data(cfg, cfg.theta0(), 3200, {});
    double total = 0.0;
    for (const auto& a : F.atoms()) {
        total += a.weight;
        bool explained = false;
        for (const auto& u : law.points) explained = explained || m.support.contains(u, a.z, cfg.theta0());
        CHECK(explained);
    }
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("degenerate negative shocks keep every market empty") {
    EntryGameConfig cfg;
    LatentLaw law{{{-10.0, -10.0}}, {1.0}};
    Vec th{0.0, 1.0, 1.0};
    auto F = simulate_entry_data(cfg, th, 100, {}, law);
    for (const auto& a : F.atoms()) {
        CHECK(a.z[1] == 0.0);
        CHECK(a.z[2] == 0.0);
    }
}

TEST_CASE("selection changes outcomes but not the market marginal") {
    EntryGameConfig cfg;
    auto a = simulate_entry_data(cfg, cfg.theta0(), 3200, {SelectionRule::FirstLex, 0});
    auto b = simulate_entry_data(cfg, cfg.theta0(), 3200, {SelectionRule::Random, 42});
    auto c = simulate_entry_data(cfg, cfg.theta0(), 3200, {SelectionRule::Random, 42});
    CHECK(a.mean(0) == doctest::Approx(b.mean(0)));
    REQUIRE(b.size() == c.size());
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b[i].weight == c[i].weight);
    bool differ = a.size() != b.size();
    for (std::size_t i = 0; !differ && i < a.size(); ++i) differ = a[i].weight != b[i].weight;
    CHECK(differ);
}

TEST_CASE("CSV round trip keeps atoms and skips metadata lines") {
    IntervalRegConfig cfg;
    auto F = simulate_interval_data(cfg, cfg.theta0, 300);
    std::stringstream ss;
    ss << "# metadata\n";
    write_distribution_csv(ss, F, {"y_lower", "y_upper", "w"});
    std::vector<std::string> names;
    auto G = read_distribution_csv(ss, &names);
    CHECK(names == std::vector<std::string>{"y_lower", "y_upper", "w"});
    REQUIRE(G.size() == F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        CHECK(G[i].z == F[i].z);
        CHECK(G[i].weight == F[i].weight);
    }
}

TEST_CASE("CSV reader reports bad input") {
    std::stringstream a("x,y\n1,2\n");
    CHECK_THROWS_AS(read_distribution_csv(a), ConfigError);
    std::stringstream b("x,weight\n1,abc\n");
    CHECK_THROWS_AS(read_distribution_csv(b), ConfigError);
    std::stringstream c("x,weight\n1\n");
    CHECK_THROWS_AS(read_distribution_csv(c), ConfigError);
}

TEST_CASE("configuration validation") {
    EntryGameConfig e;
    e.delta = {1.0};
    CHECK_THROWS_AS(build_entry_model(e), ConfigError);
    IntervalRegConfig i;
    i.below = -1.0;
    CHECK_THROWS_AS(build_interval_model(i), ConfigError);
    CHECK(parse_moment_variant("uncorr_variance") == MomentVariant::UncorrVariance);
    CHECK_THROWS_AS(parse_moment_variant("nope"), ConfigError);
    CHECK_THROWS_AS(parse_target("nope"), ConfigError);
}

TEST_CASE("model dimensions per variant") {
    EntryGameConfig cfg;
    CHECK(build_entry_model(cfg).moments.dim_r2 == 4);
    cfg.variant = MomentVariant::UncorrVariance;
    auto m = build_entry_model(cfg);
    CHECK(m.moments.dim_r2 == 6);
    CHECK(m.params.dim() == 5);
    cfg.variant = MomentVariant::MedianPlusSymmetric;
    CHECK(build_entry_model(cfg).moments.dim_r2 > 4);
}

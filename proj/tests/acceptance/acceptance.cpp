// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "idset/augment.hpp"
#include "idset/errors.hpp"
#include "idset/examples.hpp"
#include "idset/lp_oracle.hpp"
#include "idset/reduce.hpp"
#include "idset/scan.hpp"
#include "idset/support.hpp"
#include "idset/tolerances.hpp"

using namespace idset;

namespace {

// Pinned tolerances and sizes.
constexpr double kRuntimeLimit = 300.0;  // seconds, criterion 1
constexpr double kLatentStep = 0.05;     // interval latent grid step
constexpr double kGrowthFactor = 0.05;   // criterion 5: hi gain >= 0.05 rho M per doubling
constexpr double kOneSidedLo = 1e-6;     // criterion 5: lo drift
constexpr double kTwoSided = 1e-4;       // criterion 6: endpoint drift, final doubling
constexpr double kReduceValue = 1e-7;    // criterion 7
constexpr double kAppended = 1e-9;       // criterion 7
constexpr double kSublinear = 1e-12;     // criterion 9
constexpr double kDuality = 1e-7;        // criterion 9
constexpr std::size_t kPropertyCases = 10000;
constexpr double kGmmValue = 1e-6;  // criterion 10
constexpr std::size_t kInterval = 300;
constexpr std::size_t kMarkets = 3200;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Outcome& o, double seconds) {
    std::printf("criterion %2d %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
                seconds);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

void run(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const Error& e) {
        o = {false, std::string("unexpected ") + e.kind() + ": " + e.what()};
    } catch (const std::exception& e) {
        o = {false, std::string("unexpected exception: ") + e.what()};
    }
    report(id, name, o, since(t));
}

ScanOptions at(double M) {
    ScanOptions o;
    o.truncations = {M};
    return o;
}

// Shared fixtures.
struct Fixtures {
    IntervalRegConfig icfg;
    DiscreteDistribution F;
    EntryGameConfig ecfg;
    DiscreteDistribution G;
    std::optional<ScanReport> proper;
    std::optional<ScanReport> entry;
    double scan_seconds = 0.0;

    Fixtures() {
        F = simulate_interval_data(icfg, icfg.theta0, kInterval);
        G = simulate_entry_data(ecfg, ecfg.theta0(), kMarkets, {});
    }
};

// ------------------------------------------------------------------------ 1

Outcome duality(Fixtures& fx) {
    const auto t = Clock::now();
    fx.proper = scan(build_interval_model(fx.icfg), fx.F);
    fx.entry = scan(build_entry_model(fx.ecfg), fx.G);
    fx.scan_seconds = since(t);
    const auto& a = *fx.proper;
    const auto& b = *fx.entry;
    const std::size_t agree_a = a.verdicts.size() - a.disagreements.size() - a.errors.size();
    const std::size_t agree_b = b.verdicts.size() - b.disagreements.size() - b.errors.size();
    const bool pass = a.complete && b.complete && a.disagreements.empty() && b.disagreements.empty() &&
                      a.verdicts.size() == 41 * 41 && b.verdicts.size() >= 20 * 20 * 20 &&
                      fx.scan_seconds <= kRuntimeLimit;
    return {pass, fmt("interval %zu/%zu agree, entry %zu/%zu agree, scans %.1fs (limit %.0fs)", agree_a,
                      a.verdicts.size(), agree_b, b.verdicts.size(), fx.scan_seconds, kRuntimeLimit)};
}

// ------------------------------------------------------------------------ 2

Outcome dagger(const Fixtures& fx) {
    if (!fx.proper) return {false, "proper scan unavailable"};
    IntervalRegConfig d = fx.icfg;
    d.form = IntervalForm::Dagger;
    auto m = build_interval_model(d);
    auto pm = build_interval_model(fx.icfg);
    bool pass = true;
    std::string detail;
    for (double M : {5.0, 10.0, 20.0}) {
        auto rd = scan(m, fx.F, at(M));
        auto rp = M == 5.0 ? *fx.proper : scan(pm, fx.F, at(M));
        std::size_t sf = 0, lp = 0, same = 0;
        for (std::size_t i = 0; i < rd.verdicts.size(); ++i) {
            sf += rd.verdicts[i].member_sf;
            lp += rd.verdicts[i].member_lp;
            same += rd.verdicts[i].member_lp == rp.verdicts[i].member_lp;
        }
        const std::size_t n = rd.verdicts.size();
        const bool ok = rd.complete && sf == n && lp < n && same == n;
        pass = pass && ok;
        detail += fmt("M=%g sf %zu/%zu lp %zu match %zu/%zu; ", M, sf, n, lp, same, n);
    }
    return {pass, detail};
}

// ------------------------------------------------------------------------ 3

Outcome elementary(const Fixtures& fx) {
    if (!fx.proper) return {false, "proper scan unavailable"};
    const double lo = fx.F.mean(0), hi = fx.F.mean(1), w = fx.F.mean(2);
    std::size_t members = 0, bad = 0;
    for (const auto& v : fx.proper->verdicts) {
        if (!v.member_lp) continue;
        ++members;
        const double c = v.theta[0] + v.theta[1] * w;
        if (c < lo - kLatentStep || c > hi + kLatentStep) ++bad;
    }
    return {members > 0 && bad == 0,
            fmt("%zu members, %zu outside [%.4f, %.4f] +- %.2f", members, bad, lo, hi, kLatentStep)};
}

// ------------------------------------------------------------------------ 4

Outcome recovery(const Fixtures& fx) {
    bool pass = true;
    std::size_t checks = 0, hits = 0;
    for (auto sel : {Selection{SelectionRule::FirstLex, 0}, Selection{SelectionRule::Random, 2024}}) {
        auto G = simulate_entry_data(fx.ecfg, fx.ecfg.theta0(), kMarkets, sel);
        struct Res {
            std::size_t points;
            double M;
        };
        for (Res r : {Res{21, 5.0}, Res{41, 5.0}, Res{81, 5.0}, Res{21, 10.0}, Res{21, 20.0}}) {
            EntryGameConfig c = fx.ecfg;
            c.points_per_dim = r.points;
            auto m = build_entry_model(c);
            auto v = min_violation(m, m.make_grid(r.M), G, c.theta0());
            ++checks;
            hits += v.member;
            pass = pass && v.member;
        }
    }
    return {pass, fmt("theta0 member at %zu/%zu (selection, grid) pairs", hits, checks)};
}

// ------------------------------------------------------------------------ 5

Outcome one_sided(const Fixtures& fx) {
    auto base = build_entry_model(fx.ecfg);
    ShiftX sx{{1.0, 1.0}, {0.5, 0.5}};
    auto aug = augment(base, build_entry_counterfactual(fx.ecfg, sx, {TargetType::TotalSurplus, 0}));
    double rho = 0.0;
    for (const auto& a : fx.G.atoms()) rho += a.weight * (a.z[1] + a.z[2]);
    std::vector<Vec> thetas{fx.ecfg.theta0()};
    if (fx.entry) {
        auto members = set_summary(*fx.entry).members;
        for (std::size_t i = 0; i < members.size(); i += 25) thetas.push_back(members[i]);
    }
    const double Ms[] = {5.0, 10.0, 20.0};
    std::size_t bad = 0;
    double min_gain_ratio = INFINITY, max_lo_drift = 0.0;
    for (const auto& th : thetas) {
        double lo[3], hi[3];
        for (int k = 0; k < 3; ++k) {
            auto b = theta_tilde_interval(aug, fx.G, th, Ms[k]);
            lo[k] = b.lo;
            hi[k] = b.hi;
        }
        bool ok = true;
        for (int k = 0; k < 2; ++k) {
            const double need = kGrowthFactor * rho * Ms[k];
            min_gain_ratio = std::min(min_gain_ratio, (hi[k + 1] - hi[k]) / need);
            const double drift = std::abs(lo[k + 1] - lo[k]) / (1.0 + std::abs(lo[k]));
            max_lo_drift = std::max(max_lo_drift, drift);
            ok = ok && hi[k + 1] - hi[k] >= need && drift <= kOneSidedLo;
        }
        bad += !ok;
    }
    return {rho > 0.0 && bad == 0,
            fmt("%zu thetas, rho %.4f, min hi gain / required %.3f, max relative lo drift %.2e, %zu failing",
                thetas.size(), rho, min_gain_ratio, max_lo_drift, bad)};
}

// ------------------------------------------------------------------------ 6

Outcome two_sided(const Fixtures& fx) {
    EntryGameConfig c = fx.ecfg;
    c.variant = MomentVariant::UncorrVariance;
    auto base = build_entry_model(c);
    auto G = simulate_entry_data(c, c.theta0(), kMarkets, {});
    ShiftX sx{{1.0, 1.0}, {0.5, 0.5}};
    bool pass = true;
    std::string detail;
    for (CounterfactualTarget t : {CounterfactualTarget{TargetType::TotalSurplus, 0},
                                   CounterfactualTarget{TargetType::ProfitGivenEntry, 0}}) {
        auto aug = augment(base, build_entry_counterfactual(c, sx, t));
        auto a = theta_tilde_interval(aug, G, c.theta0(), 10.0);
        auto b = theta_tilde_interval(aug, G, c.theta0(), 20.0);
        const double dlo = std::abs(b.lo - a.lo) / (1.0 + std::abs(a.lo));
        const double dhi = std::abs(b.hi - a.hi) / (1.0 + std::abs(a.hi));
        const bool ok = dlo <= kTwoSided && dhi <= kTwoSided && std::isfinite(b.hi) && !b.hi_at_box;
        pass = pass && ok;
        detail += fmt("%s [%.6f, %.6f] drift %.1e/%.1e; ", to_string(t.type), b.lo, b.hi, dlo, dhi);
    }
    return {pass, detail};
}

// ------------------------------------------------------------------------ 7

Outcome reduction(const Fixtures& fx) {
    IntervalRegConfig d = fx.icfg;
    d.form = IntervalForm::Dagger;
    auto m = build_interval_model(d);
    auto grid = m.make_grid();
    auto cert = find_reducing_direction(m, grid, fx.F, d.theta0);
    if (!cert) return {false, "no reducing direction found"};
    const double value = expected_support(m, grid, fx.F, d.theta0, cert->lambda).value;
    auto red = reduce_model(m, *cert);
    auto a = scan(m, fx.F, at(5.0));
    auto b = scan(red, fx.F, at(5.0));
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.verdicts.size(); ++i) same += a.verdicts[i].member_lp == b.verdicts[i].member_lp;
    double appended = 0.0;
    Vec r1(red.moments.dim_r1);
    for (const auto& th : m.params.grid())
        for (const auto& atom : fx.F.atoms()) {
            red.moments.r1(atom.z, th, r1);
            appended = std::max(appended, std::abs(r1.back()));
        }
    const bool pass = std::abs(value) <= kReduceValue && std::abs(cert->achieved_value) <= kReduceValue &&
                      b.complete && same == a.verdicts.size() && appended <= kAppended;
    return {pass, fmt("|E gamma2| %.2e, member_lp match %zu/%zu, max appended moment %.2e", std::abs(value),
                      same, a.verdicts.size(), appended)};
}

// ------------------------------------------------------------------------ 8

Outcome nonempty(const Fixtures& fx) {
    auto base = build_entry_model(fx.ecfg);
    std::size_t checked = 0, empty = 0;
    for (double M : {5.0, 10.0, 20.0}) {
        auto grid = base.make_grid(M);
        for (const auto& th : base.params.grid()) {
            if (th[1] < 0.0 || th[2] < 0.0) continue;
            for (const auto& x : fx.ecfg.x_support) {
                double idx = 0.0;
                for (std::size_t k = 0; k < x.size(); ++k) idx += x[k] * th[k];
                const Vec index{idx, idx}, delta{th[1], th[2]};
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    ++checked;
                    empty += enumerate_pure_ne(index, grid.point(i), delta).empty();
                }
            }
        }
    }
    std::vector<std::pair<std::string, CounterfactualCase>> cases{
        {"identity", ShiftX{}},
        {"shift", ShiftX{{1.0, 1.0}, {0.5, 0.5}}},
        {"scale", ShiftX{{2.0, 0.5}, {0.0, -1.0}}},
        {"merger", Merger{}},
        {"entrant_mean", NewCompetitor{1.0, 0.0, DeltaRule::Mean}},
        {"entrant_min", NewCompetitor{0.5, 1.0, DeltaRule::Min}},
        {"entrant_max", NewCompetitor{1.0, -0.5, DeltaRule::Max}},
    };
    const auto zs = entry_z_support(fx.ecfg);
    const auto thetas = base.params.grid();
    std::size_t cf_fail = 0;
    std::string first;
    for (const auto& [name, cf_case] : cases) {
        auto aug = augment(base, build_entry_counterfactual(fx.ecfg, cf_case, {}));
        for (double M : {5.0, 10.0}) {
            if (auto w = find_empty_correspondence(aug, zs, thetas, M)) {
                ++cf_fail;
                if (first.empty()) first = name + ": " + *w;
            }
        }
    }
    return {empty == 0 && cf_fail == 0,
            fmt("%zu (x, u, theta) cells, %zu without equilibrium; %zu counterfactual cases x 2 truncations, "
                "%zu with empty correspondence%s%s",
                checked, empty, cases.size(), cf_fail, first.empty() ? "" : "; first: ", first.c_str())};
}

// ------------------------------------------------------------------------ 9

struct PropertyStats {
    std::size_t cases = 0;
    std::size_t homogeneity = 0;
    std::size_t sublinear = 0;
    std::size_t monotone = 0;
    std::size_t lp_cases = 0;
    std::size_t duality = 0;
    std::size_t lp_monotone = 0;
    double worst_duality = 0.0;
    double worst_sublinear = 0.0;
};

Vec random_theta(const ParameterBox& box, std::mt19937_64& rng) {
    Vec th(box.dim());
    for (std::size_t d = 0; d < box.dim(); ++d) {
        std::uniform_real_distribution<double> U(box.lower[d], box.upper[d]);
        th[d] = U(rng);
    }
    return th;
}

PropertyStats properties(const ModelSpec& m, const DiscreteDistribution& F, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N;
    PropertyStats s;
    const double M = m.latent.default_truncation;
    auto g1 = m.make_grid(M);
    auto g2 = m.make_grid(2 * M);
    const std::size_t d = m.moments.dim_r2;
    for (std::size_t attempt = 0; s.cases < kPropertyCases && attempt < 20 * kPropertyCases; ++attempt) {
        const Vec th = random_theta(m.params, rng);
        const auto& z = F[rng() % F.size()].z;
        MomentImage a, b;
        try {
            a = moment_image(m, g1, z, th);
            b = moment_image(m, g2, z, th);
        } catch (const EmptySection&) {
            continue;
        }
        Vec l1(d), l2(d), sum(d), scaled(d);
        const double k = std::ldexp(1.0, static_cast<int>(rng() % 13) - 6);
        for (std::size_t i = 0; i < d; ++i) {
            l1[i] = N(rng);
            l2[i] = N(rng);
            sum[i] = l1[i] + l2[i];
            scaled[i] = k * l1[i];
        }
        const double g = support_on_image(a, l1).value, h = support_on_image(a, l2).value;
        ++s.cases;
        s.homogeneity += support_on_image(a, scaled).value == k * g;
        const double excess = support_on_image(a, sum).value - g - h;
        s.worst_sublinear = std::max(s.worst_sublinear, excess);
        s.sublinear += excess <= kSublinear;
        s.monotone += support_on_image(b, l1).value >= g;
    }
    for (std::size_t attempt = 0; s.lp_cases < kPropertyCases && attempt < 20 * kPropertyCases; ++attempt) {
        const Vec th = random_theta(m.params, rng);
        std::vector<ObservedAtom> atoms = F.atoms();
        for (auto& at : atoms) at.weight *= std::exp(N(rng));
        auto H = DiscreteDistribution::normalized(std::move(atoms));
        ViolationResult v;
        try {
            v = min_violation(m, g1, H, th);
        } catch (const EmptySection&) {
            continue;
        }
        ++s.lp_cases;
        s.worst_duality = std::max(s.worst_duality, v.duality_residual);
        s.duality += v.duality_residual <= kDuality;
        // nested grids: a selection at M is a selection at 2M
        if (s.lp_cases % 10 == 0) s.lp_monotone += !v.member || min_violation(m, g2, H, th).member;
        else ++s.lp_monotone;
    }
    return s;
}

Outcome algebra(const Fixtures& fx) {
    struct Case {
        std::string name;
        ModelSpec model;
        DiscreteDistribution F;
    };
    std::vector<Case> cases;
    cases.push_back({"interval_proper", build_interval_model(fx.icfg), fx.F});
    IntervalRegConfig d = fx.icfg;
    d.form = IntervalForm::Dagger;
    cases.push_back({"interval_dagger", build_interval_model(d), fx.F});
    for (auto v : {MomentVariant::Median, MomentVariant::MedianPlusSymmetric, MomentVariant::UncorrVariance}) {
        EntryGameConfig c = fx.ecfg;
        c.variant = v;
        cases.push_back({std::string("entry_") + to_string(v), build_entry_model(c),
                         simulate_entry_data(c, c.theta0(), kMarkets, {})});
    }
    bool pass = true;
    std::string detail;
    std::uint64_t seed = 101;
    for (const auto& c : cases) {
        auto s = properties(c.model, c.F, seed++);
        const bool ok = s.cases >= kPropertyCases && s.lp_cases >= kPropertyCases && s.homogeneity == s.cases &&
                        s.sublinear == s.cases && s.monotone == s.cases && s.duality == s.lp_cases &&
                        s.lp_monotone == s.lp_cases;
        pass = pass && ok;
        detail += fmt("%s %s: %zu cases hom %zu sub %zu (worst %.1e) mono %zu, %zu LPs dual %zu (worst %.1e); ",
                      c.name.c_str(), ok ? "ok" : "BAD", s.cases, s.homogeneity, s.sublinear, s.worst_sublinear,
                      s.monotone, s.lp_cases, s.duality, s.worst_duality);
    }
    return {pass, detail};
}

// ----------------------------------------------------------------------- 10

Outcome gmm(const Fixtures& fx) {
    IntervalRegConfig c = fx.icfg;
    c.below = 0.0;
    c.above = 0.0;
    auto m = build_interval_model(c);
    auto F = simulate_interval_data(c, c.theta0, kInterval);
    auto grid = m.make_grid();
    std::size_t points = 0, lp_ok = 0, value_ok = 0, non_singleton = 0;
    double worst = 0.0;
    for (const auto& th : m.params.grid()) {
        ++points;
        SupportEvaluator ev(m, grid, F, th);
        Vec er(m.moments.dim_r2, 0.0);
        for (std::size_t i = 0; i < F.size(); ++i) {
            const auto& img = ev.images()[i];
            non_singleton += img.size() != 1;
            for (std::size_t k = 0; k < er.size(); ++k) er[k] += F[i].weight * img.row(0)[k];
        }
        double l1 = 0.0, l2 = 0.0;
        for (double e : er) {
            l1 += std::abs(e);
            l2 += e * e;
        }
        l2 = std::sqrt(l2);
        auto v = min_violation(ev.images(), F, ev.residual(), ev.scale());
        lp_ok += v.member == (l1 <= tol::lp(ev.scale()));
        auto cr = criterion(ev);
        const double err = std::abs(cr.value + l2);
        worst = std::max(worst, err);
        value_ok += err <= kGmmValue;
    }
    return {non_singleton == 0 && lp_ok == points && value_ok == points,
            fmt("%zu points, membership matches ||E r||_1 rule at %zu, criterion = -||E r2|| at %zu (worst %.1e), "
                "%zu non-singleton sections",
                points, lp_ok, value_ok, worst, non_singleton)};
}

}  // namespace

int main() {
    const auto start = Clock::now();
    Fixtures fx;
    run(1, "finite-grid duality", [&] { return duality(fx); });
    run(2, "dagger divergence", [&] { return dagger(fx); });
    run(3, "elementary bounds", [&] { return elementary(fx); });
    run(4, "recovery under selection", [&] { return recovery(fx); });
    run(5, "one-sided surplus interval", [&] { return one_sided(fx); });
    run(6, "two-sided profit interval", [&] { return two_sided(fx); });
    run(7, "reduction round trip", [&] { return reduction(fx); });
    run(8, "equilibrium and correspondence existence", [&] { return nonempty(fx); });
    run(9, "support-function algebra", [&] { return algebra(fx); });
    run(10, "complete-model degeneration", [&] { return gmm(fx); });
    std::printf("%d of 10 criteria failed, total %.1fs\n", failures, since(start));
    return failures == 0 ? 0 : 1;
}

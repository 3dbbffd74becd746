#include "idset/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "idset/errors.hpp"
#include "idset/lp_oracle.hpp"
#include "idset/tolerances.hpp"

namespace idset {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

std::size_t worker_count(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("IDTOOL_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

Verdict evaluate_point(const ModelSpec& model, const LatentGrid& grid, const DiscreteDistribution& F,
                       CSpan theta, const CriterionOptions& options) {
    Verdict v;
    v.theta.assign(theta.begin(), theta.end());
    v.truncation = grid.truncation();
    SupportEvaluator ev(model, grid, F, theta);
    v.scale = ev.scale();
    for (double r : ev.residual()) v.gmm_residual_norm = std::max(v.gmm_residual_norm, std::abs(r));
    if (model.moments.dim_r2 == 0) {
        // Pure moment equalities: no latent-dependent rows to search over.
        v.criterion_value = 0.0;
    } else {
        auto c = criterion(ev, options);
        v.criterion_value = c.value;
        v.criterion_argmin = c.argmin.values();
        v.divergent_direction_count = c.infinite_directions_sampled;
    }
    v.member_sf = v.gmm_residual_norm <= tol::eq(v.scale) && v.criterion_value >= -tol::crit(v.scale);
    auto lp = min_violation(ev.images(), F, ev.residual(), ev.scale());
    v.lp_violation = lp.value;
    v.member_lp = lp.member;
    return v;
}

ScanReport scan(const ModelSpec& model, const DiscreteDistribution& F,
                const std::vector<Vec>& theta_grid, const ScanOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    ScanReport rep;
    rep.model_label = model.label;
    rep.theta_names = model.params.names;
    rep.truncations = options.truncations;
    if (rep.truncations.empty()) {
        const double m0 = model.latent.default_truncation;
        rep.truncations = {m0, 2 * m0, 4 * m0};
    }
    std::sort(rep.truncations.begin(), rep.truncations.end());
    const std::size_t n = theta_grid.size();
    rep.verdicts.resize(n);
    if (n == 0) return rep;

    std::vector<LatentGrid> grids;
    for (double M : rep.truncations) grids.push_back(model.make_grid(M));

    std::vector<std::optional<PointError>> errs(n);
    std::vector<std::optional<Trajectory>> trajs(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            const auto& th = theta_grid[i];
            try {
                Verdict v = evaluate_point(model, grids.front(), F, th, options.criterion);
                v.index = i;
                rep.verdicts[i] = v;
                if (v.member_sf != v.member_lp || v.divergent_direction_count > 0) {
                    Trajectory t;
                    t.index = i;
                    for (std::size_t g = 1; g < grids.size(); ++g) {
                        Verdict w = evaluate_point(model, grids[g], F, th, options.criterion);
                        w.index = i;
                        t.steps.push_back(std::move(w));
                    }
                    if (!t.steps.empty()) trajs[i] = std::move(t);
                }
            } catch (const Error& e) {
                Verdict v;
                v.index = i;
                v.theta = th;
                v.truncation = grids.front().truncation();
                v.gmm_residual_norm = v.criterion_value = v.lp_violation =
                    std::numeric_limits<double>::quiet_NaN();
                rep.verdicts[i] = v;
                errs[i] = PointError{i, th, e.kind(), e.what()};
            }
        }
    };
    const std::size_t workers = std::min(worker_count(options.threads), n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (errs[i]) {
            rep.errors.push_back(*errs[i]);
            rep.complete = false;
            continue;
        }
        if (rep.verdicts[i].member_sf != rep.verdicts[i].member_lp) rep.disagreements.push_back(i);
        if (trajs[i]) rep.trajectories.push_back(std::move(*trajs[i]));
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

ScanReport scan(const ModelSpec& model, const DiscreteDistribution& F, const ScanOptions& options) {
    return scan(model, F, model.params.grid(), options);
}

SetSummary set_summary(const ScanReport& report, MembershipKind kind) {
    SetSummary s;
    const std::size_t dim = report.theta_names.size();
    for (const auto& v : report.verdicts) {
        const bool in = kind == MembershipKind::Lp ? v.member_lp : v.member_sf;
        if (in && !std::isnan(v.lp_violation)) s.members.push_back(v.theta);
    }
    s.empty = s.members.empty();
    for (std::size_t d = 0; d < dim; ++d) {
        CoordinateHull h;
        h.coordinate = d;
        h.name = report.theta_names[d];
        for (const auto& p : s.members) {
            if (h.empty) {
                h.lo = h.hi = p[d];
                h.empty = false;
            } else {
                h.lo = std::min(h.lo, p[d]);
                h.hi = std::max(h.hi, p[d]);
            }
        }
        s.hull.push_back(h);
    }
    return s;
}

CoordinateHull set_summary(const ScanReport& report, std::size_t coordinate, MembershipKind kind) {
    auto s = set_summary(report, kind);
    if (coordinate >= s.hull.size()) throw DimensionError("coordinate out of range");
    return s.hull[coordinate];
}

void write_verdicts_csv(std::ostream& os, const ScanReport& report) {
    for (const auto& n : report.theta_names) os << n << ',';
    os << "gmm_residual_norm,criterion_value,lp_violation,member_sf,member_lp,M,divergent_dirs\n";
    for (const auto& v : report.verdicts) {
        for (double t : v.theta) os << fmt(t) << ',';
        os << fmt(v.gmm_residual_norm) << ',' << fmt(v.criterion_value) << ',' << fmt(v.lp_violation)
           << ',' << (v.member_sf ? 1 : 0) << ',' << (v.member_lp ? 1 : 0) << ',' << fmt(v.truncation)
           << ',' << v.divergent_direction_count << '\n';
    }
}

}  // namespace idset

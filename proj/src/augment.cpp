#include "idset/augment.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "idset/errors.hpp"
#include "idset/tolerances.hpp"

namespace idset {

namespace {

LatentGrid outcome_grid(const CounterfactualSpec& cf, double truncation) {
    Vec coords;
    for (const auto& y : cf.cf_outcomes) coords.insert(coords.end(), y.begin(), y.end());
    return LatentGrid(cf.outcome_dim(), truncation, std::move(coords),
                      std::vector<std::uint8_t>(cf.cf_outcomes.size(), 0));
}

std::string describe(CSpan v) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ')';
    return os.str();
}

void validate_cf(const ModelSpec& base, const CounterfactualSpec& cf) {
    if (cf.kind == TargetKind::Quantile)
        throw NotSupported("quantile-type counterfactual parameters belong to the production-function "
                           "example, which is outside the supported scope");
    if (cf.cf_outcomes.empty()) throw ConfigError("counterfactual outcome list is empty");
    for (const auto& y : cf.cf_outcomes)
        if (y.size() != cf.outcome_dim()) throw ConfigError("counterfactual outcomes differ in length");
    if (!cf.correspondence) throw ConfigError("counterfactual correspondence missing");
    if (!cf.g) throw ConfigError("counterfactual target function missing");
    if (cf.kind == TargetKind::Ratio && !cf.h) throw ConfigError("ratio target needs a denominator");
    if (cf.dim_r_tilde > 0 && !cf.r_tilde) throw ConfigError("r_tilde function missing");
    if (cf.theta_tilde_box.dim() != 1) throw ConfigError("counterfactual parameter must be scalar");
    cf.theta_tilde_box.validate();
    if (cf.cf_latent) cf.cf_latent->validate();
    if (base.refine) throw NotSupported("augmenting a model with a refined section is not supported");
}

}  // namespace

AugmentedModel augment(const ModelSpec& base, const CounterfactualSpec& cf,
                       const std::vector<Vec>& z_support) {
    validate_cf(base, cf);
    AugmentedModel aug;
    aug.base = base;
    aug.cf = cf;
    aug.base_latent_dim = base.latent.dim();
    aug.base_theta_dim = base.params.dim();
    aug.base_dim_r2 = base.moments.dim_r2;

    const std::size_t nu = base.latent.dim(), ny = cf.outcome_dim(), nt = cf.cf_latent_dim();
    const std::size_t d2 = base.moments.dim_r2, dr = cf.dim_r_tilde;
    const std::size_t k = base.params.dim();

    ModelSpec core;
    core.label = base.label + "+" + cf.label;
    core.latent = base.latent;
    for (std::size_t d = 0; d < ny; ++d) {
        double lo = cf.cf_outcomes.front()[d], hi = lo;
        for (const auto& y : cf.cf_outcomes) {
            lo = std::min(lo, y[d]);
            hi = std::max(hi, y[d]);
        }
        core.latent.box.push_back(Interval::closed(lo, hi > lo ? hi : lo + 1.0));
    }
    if (cf.cf_latent)
        for (const auto& iv : cf.cf_latent->box) core.latent.box.push_back(iv);
    core.z_dim = base.z_dim;
    core.z_names = base.z_names;
    core.params = base.params;

    auto shared_cf = std::make_shared<CounterfactualSpec>(cf);
    auto shared_base = std::make_shared<ModelSpec>(base);
    core.grid_builder = [shared_base, shared_cf](double M) {
        LatentGrid g = shared_base->make_grid(M);
        LatentGrid o = outcome_grid(*shared_cf, M);
        if (!shared_cf->cf_latent) return product_grid({&g, &o}, M);
        LatentGrid c = build_grid(*shared_cf->cf_latent, M);
        return product_grid({&g, &o, &c}, M);
    };
    core.support.contains = [shared_base, shared_cf, nu, ny, nt, k](CSpan u, CSpan z, CSpan th) {
        CSpan t = th.first(k);
        if (!shared_base->support.contains(u.first(nu), z, t)) return false;
        return shared_cf->correspondence(u.subspan(nu, ny), u.subspan(nu + ny, nt), z, u.first(nu), t);
    };
    core.moments.dim_r1 = base.moments.dim_r1;
    if (base.moments.dim_r1)
        core.moments.r1 = [shared_base, k](CSpan z, CSpan th, std::span<double> out) {
            shared_base->moments.r1(z, th.first(k), out);
        };
    core.moments.dim_r2 = d2 + dr;
    if (d2 + dr)
        core.moments.r2 = [shared_base, shared_cf, nu, ny, nt, k, d2, dr](CSpan u, CSpan z, CSpan th,
                                                                         std::span<double> out) {
            CSpan t = th.first(k), ub = u.first(nu);
            if (d2) shared_base->moments.r2(ub, z, t, out.first(d2));
            if (dr) shared_cf->r_tilde(u.subspan(nu, ny), u.subspan(nu + ny, nt), z, ub, t,
                                       out.subspan(d2, dr));
        };

    ModelSpec full = core;
    full.params.lower.push_back(cf.theta_tilde_box.lower[0]);
    full.params.upper.push_back(cf.theta_tilde_box.upper[0]);
    full.params.resolution.push_back(cf.theta_tilde_box.resolution[0]);
    full.params.names.push_back(cf.theta_tilde_box.names.empty() ? "theta_tilde"
                                                                 : cf.theta_tilde_box.names[0]);
    full.moments.dim_r2 = d2 + dr + 1;
    auto core_r2 = core.moments.r2;
    const bool ratio = cf.kind == TargetKind::Ratio;
    full.moments.r2 = [core_r2, shared_cf, nu, ny, nt, k, d2, dr, ratio](CSpan u, CSpan z, CSpan th,
                                                                        std::span<double> out) {
        if (d2 + dr) core_r2(u, z, th, out.first(d2 + dr));
        CSpan yt = u.subspan(nu, ny), ut = u.subspan(nu + ny, nt), ub = u.first(nu);
        CSpan t = th.first(k);
        const double tt = th[k];
        const double h = ratio ? shared_cf->h(yt, ut, z, ub, t) : 1.0;
        out[d2 + dr] = shared_cf->g(yt, ut, z, ub, t) - tt * h;
    };
    aug.core = std::move(core);
    aug.model = std::move(full);

    if (!z_support.empty()) {
        auto failure =
            find_empty_correspondence(aug, z_support, base.params.grid(), base.latent.default_truncation);
        if (failure) throw NonemptyCorrespondenceViolated(*failure);
    }
    return aug;
}

std::optional<std::string> find_empty_correspondence(const AugmentedModel& aug,
                                                     const std::vector<Vec>& z_support,
                                                     const std::vector<Vec>& thetas, double truncation) {
    const auto& cf = aug.cf;
    LatentGrid bg = aug.base.make_grid(truncation);
    Vec no_latent;
    std::optional<LatentGrid> ct;
    if (cf.cf_latent) ct = build_grid(*cf.cf_latent, truncation);
    const std::size_t nc = ct ? ct->size() : 1;

    for (const auto& th : thetas) {
        for (const auto& z : z_support) {
            for (std::size_t b = 0; b < bg.size(); ++b) {
                CSpan u = bg.point(b);
                if (!aug.base.support.contains(u, z, th)) continue;
                bool any = false;
                for (std::size_t c = 0; c < nc && !any; ++c) {
                    CSpan ut = ct ? ct->point(c) : CSpan(no_latent);
                    for (std::size_t o = 0; o < cf.cf_outcomes.size() && !any; ++o)
                        any = cf.correspondence(cf.cf_outcomes[o], ut, z, u, th);
                }
                if (!any)
                    return "counterfactual correspondence empty at z=" + describe(z) +
                           " u=" + describe(u) + " theta=" + describe(th);
            }
        }
    }
    return std::nullopt;
}

namespace {

ScalarFn lift(const AugmentedModel& aug, const CfScalar& f) {
    const std::size_t nu = aug.base_latent_dim, ny = aug.cf.outcome_dim(),
                      nt = aug.cf.cf_latent_dim();
    return [f, nu, ny, nt](CSpan u, CSpan z, CSpan th) {
        return f(u.subspan(nu, ny), u.subspan(nu + ny, nt), z, u.first(nu), th);
    };
}

struct Endpoints {
    double lo, hi;
    bool lo_box = false, hi_box = false;
};

// Ratio targets: theta~ is feasible iff min E[g - t h] <= 0 <= max E[g - t h].
// Both extremes decrease in t when E h > 0, so each endpoint is a root.
Endpoints ratio_endpoints(const AugmentedModel& aug, const LatentGrid& grid,
                          const DiscreteDistribution& F, CSpan theta) {
    ScalarFn g = lift(aug, aug.cf.g), h = lift(aug, aug.cf.h);
    const double hmin = functional_extreme(aug.core, grid, F, theta, h, Sense::Min);
    if (hmin <= 1e-9)
        throw RatioDegenerate("denominator expectation can be " + std::to_string(hmin) +
                              "; the conditional parameter is undefined");
    auto f = [&](double t, Sense s) {
        ScalarFn m = [&g, &h, t](CSpan u, CSpan z, CSpan th) { return g(u, z, th) - t * h(u, z, th); };
        return functional_extreme(aug.core, grid, F, theta, m, s);
    };
    const double a = aug.cf.theta_tilde_box.lower[0], b = aug.cf.theta_tilde_box.upper[0];
    auto done = [](double x, double y) { return y - x <= 1e-6 * (1.0 + std::abs(0.5 * (x + y))); };

    Endpoints e{};
    if (f(a, Sense::Max) < 0.0 || f(b, Sense::Min) > 0.0)
        throw EmptyInterval("counterfactual parameter lies outside its search box");
    if (f(b, Sense::Max) >= 0.0) {
        e.hi = b;
        e.hi_box = true;
    } else {
        double x = a, y = b;  // f_max(x) >= 0 > f_max(y)
        while (!done(x, y)) {
            double m = 0.5 * (x + y);
            (f(m, Sense::Max) >= 0.0 ? x : y) = m;
        }
        e.hi = x;
    }
    if (f(a, Sense::Min) <= 0.0) {
        e.lo = a;
        e.lo_box = true;
    } else {
        double x = a, y = b;  // f_min(x) > 0 >= f_min(y)
        while (!done(x, y)) {
            double m = 0.5 * (x + y);
            (f(m, Sense::Min) <= 0.0 ? y : x) = m;
        }
        e.lo = y;
    }
    return e;
}

}  // namespace

BoundsResult theta_tilde_interval(const AugmentedModel& aug, const DiscreteDistribution& F,
                                  CSpan theta, double truncation) {
    if (theta.size() != aug.base_theta_dim) throw DimensionError("baseline theta expected");
    LatentGrid grid = aug.core.make_grid(truncation);
    if (aug.cf.kind == TargetKind::Mean)
        return functional_bounds(aug.core, grid, F, theta, lift(aug, aug.cf.g));

    BoundsResult res;
    res.truncation = truncation;
    auto e = ratio_endpoints(aug, grid, F, theta);
    res.lo = e.lo;
    res.hi = e.hi;
    res.lo_at_box = e.lo_box;
    res.hi_at_box = e.hi_box;
    if (aug.core.has_unbounded_latent()) {
        auto e2 = ratio_endpoints(aug, aug.core.make_grid(2.0 * truncation), F, theta);
        res.lo_doubled = e2.lo;
        res.hi_doubled = e2.hi;
        res.lo_growing = std::abs(e2.lo - e.lo) > tol::kGrow * (1.0 + std::abs(e.lo));
        res.hi_growing = std::abs(e2.hi - e.hi) > tol::kGrow * (1.0 + std::abs(e.hi));
    }
    return res;
}

BoundsResult theta_tilde_interval(const AugmentedModel& aug, const DiscreteDistribution& F,
                                  CSpan theta) {
    return theta_tilde_interval(aug, F, theta, aug.base.latent.default_truncation);
}

std::vector<Vec> project_theta(const std::vector<Vec>& member_points, std::size_t base_theta_dim) {
    std::vector<Vec> out;
    for (const auto& p : member_points) {
        if (p.size() < base_theta_dim) throw DimensionError("point shorter than baseline theta");
        Vec t(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(base_theta_dim));
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
    }
    return out;
}

}  // namespace idset

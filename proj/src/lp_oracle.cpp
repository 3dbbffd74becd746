#include "idset/lp_oracle.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "idset/errors.hpp"
#include "idset/tolerances.hpp"

namespace idset {

namespace {

Eigen::VectorXd to_eigen(const Vec& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec to_vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

// Columns of one atom collapsed by identical moment rows. `cost` keeps the
// preferred objective coefficient among duplicates.
struct AtomColumns {
    std::vector<Vec> rows;
    std::vector<std::size_t> grid_point;
    Vec cost;
};

enum class Keep { First, Min, Max };

void add_column(AtomColumns& cols, std::map<Vec, std::size_t>& seen, Vec row, std::size_t k,
                double cost, Keep keep) {
    auto [it, fresh] = seen.emplace(row, cols.rows.size());
    if (fresh) {
        cols.rows.push_back(std::move(row));
        cols.grid_point.push_back(k);
        cols.cost.push_back(cost);
        return;
    }
    double& c = cols.cost[it->second];
    if ((keep == Keep::Min && cost < c) || (keep == Keep::Max && cost > c)) {
        c = cost;
        cols.grid_point[it->second] = k;
    }
}

// Mass-balance rows, then `dim` moment rows with slack pairs, then optionally
// one budget row  sum(slacks) + t = budget.
struct Assembled {
    LinearProgram lp;
    std::vector<std::size_t> atom_of;
    std::vector<std::size_t> grid_point;
    std::size_t masses = 0;
};

Assembled assemble(const std::vector<AtomColumns>& atoms, const DiscreteDistribution& F,
                   std::size_t dim, bool slack_cost, std::optional<double> budget, double sign) {
    Assembled out;
    for (const auto& a : atoms) out.masses += a.rows.size();
    const std::size_t m = F.size() + dim + (budget ? 1 : 0);
    const std::size_t n = out.masses + 2 * dim + (budget ? 1 : 0);
    auto& lp = out.lp;
    lp.A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    lp.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    lp.c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    std::size_t j = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        lp.b(i) = F[i].weight;
        for (std::size_t k = 0; k < atoms[i].rows.size(); ++k, ++j) {
            lp.A(i, j) = 1.0;
            for (std::size_t d = 0; d < dim; ++d) lp.A(F.size() + d, j) = atoms[i].rows[k][d];
            lp.c(j) = sign * atoms[i].cost[k];
            out.atom_of.push_back(i);
            out.grid_point.push_back(atoms[i].grid_point[k]);
        }
    }
    for (std::size_t d = 0; d < dim; ++d) {
        const auto r = F.size() + d;
        lp.A(r, j + 2 * d) = 1.0;
        lp.A(r, j + 2 * d + 1) = -1.0;
        if (slack_cost) lp.c(j + 2 * d) = lp.c(j + 2 * d + 1) = 1.0;
        if (budget) lp.A(m - 1, j + 2 * d) = lp.A(m - 1, j + 2 * d + 1) = 1.0;
    }
    if (budget) {
        lp.A(m - 1, n - 1) = 1.0;
        lp.b(m - 1) = *budget;
    }
    return out;
}

double l1(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

}  // namespace

LinearProgram SelectionLP::program(const Vec& objective) const {
    if (objective.size() != variables()) throw DimensionError("objective length != variables");
    const auto n = static_cast<Eigen::Index>(variables());
    const auto na = static_cast<Eigen::Index>(weights.size());
    const auto nm = moments.rows();
    LinearProgram lp;
    lp.A = Eigen::MatrixXd::Zero(na + nm, n);
    lp.b = Eigen::VectorXd::Zero(na + nm);
    for (Eigen::Index i = 0; i < na; ++i) lp.b(i) = weights[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) lp.A(static_cast<Eigen::Index>(atom_of[j]), j) = 1.0;
    if (nm > 0) {
        lp.A.bottomRows(nm) = moments;
        lp.b.tail(nm) = to_eigen(target);
    }
    lp.c = to_eigen(objective);
    return lp;
}

SelectionLP build_selection_lp(const ModelSpec& model, const LatentGrid& grid,
                               const DiscreteDistribution& F, CSpan theta) {
    auto images = atom_images(model, grid, F, theta);
    SelectionLP lp;
    const std::size_t d = model.moments.dim_r2;
    for (const auto& a : F.atoms()) lp.weights.push_back(a.weight);
    std::size_t n = 0;
    for (const auto& im : images) n += im.size();
    lp.moments = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
    lp.target.assign(d, 0.0);
    std::size_t j = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (std::size_t k = 0; k < images[i].size(); ++k, ++j) {
            lp.atom_of.push_back(i);
            lp.grid_point.push_back(images[i].grid_index[k]);
            for (std::size_t r = 0; r < d; ++r) lp.moments(r, j) = images[i].row(k)[r];
        }
    }
    return lp;
}

LpOutcome solve_lp(const Vec& objective, Sense sense, const SelectionLP& lp) {
    for (std::size_t i = 0; i < lp.weights.size(); ++i) {
        bool any = false;
        for (auto a : lp.atom_of) any = any || a == i;
        if (!any) throw EmptySection("selection LP has no variable for atom " + std::to_string(i), i);
    }
    const double sign = sense == Sense::Max ? -1.0 : 1.0;
    Vec c = objective;
    for (double& v : c) v *= sign;
    auto r = simplex_solve(lp.program(c));
    LpOutcome out;
    out.status = r.status;
    out.iterations = r.iterations;
    if (r.status == LpStatus::Optimal) {
        out.objective = sign * r.objective;
        out.solution = to_vec(r.x);
        out.dual = to_vec(sign * r.dual);
        out.duality_residual = r.duality_residual;
    } else {
        out.objective = r.status == LpStatus::Unbounded ? sign * -INFINITY : NAN;
        out.certificate = to_vec(r.certificate);
    }
    return out;
}

ViolationResult min_violation(const std::vector<MomentImage>& images,
                              const DiscreteDistribution& F, const Vec& r1_residual, double scale) {
    if (images.size() != F.size()) throw DimensionError("one image per atom required");
    ViolationResult res;
    res.scale = scale;
    res.r1_part = l1(r1_residual);
    const std::size_t dim = images.empty() ? 0 : images.front().dim;

    std::vector<AtomColumns> atoms(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].size() == 0) throw EmptySection("empty section at atom " + std::to_string(i), i);
        std::map<Vec, std::size_t> seen;
        for (std::size_t k = 0; k < images[i].size(); ++k) {
            auto row = images[i].row(k);
            add_column(atoms[i], seen, Vec(row.begin(), row.end()), images[i].grid_index[k], 0.0,
                       Keep::First);
        }
    }

    double lp_part = 0.0;
    if (dim == 0) {
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            res.atom_of.push_back(i);
            res.grid_point.push_back(atoms[i].grid_point.front());
            res.masses.push_back(F[i].weight);
        }
    } else {
        auto as = assemble(atoms, F, dim, true, std::nullopt, 1.0);
        auto r = simplex_solve(as.lp);
        if (r.status != LpStatus::Optimal)
            throw NumericalInstability("minimum-violation LP did not reach an optimum");
        lp_part = r.objective;
        res.duality_residual = r.duality_residual;
        res.atom_of = as.atom_of;
        res.grid_point = as.grid_point;
        res.masses.assign(r.x.data(), r.x.data() + as.masses);
    }
    res.value = lp_part + res.r1_part;
    res.member = res.value <= tol::lp(scale);
    return res;
}

ViolationResult min_violation(const ModelSpec& model, const LatentGrid& grid,
                              const DiscreteDistribution& F, CSpan theta) {
    auto images = atom_images(model, grid, F, theta);
    Vec r1 = Vec(model.moments.dim_r1, 0.0);
    double scale = 0.0;
    for (const auto& im : images) scale = std::max(scale, im.max_abs());
    for (const auto& a : F.atoms()) {
        Vec r = eval_r1(model, a.z, theta);
        for (std::size_t j = 0; j < r.size(); ++j) {
            r1[j] += a.weight * r[j];
            scale = std::max(scale, std::abs(r[j]));
        }
    }
    for (auto& im : images) im = im.compact();
    return min_violation(images, F, r1, scale);
}

namespace {

struct BoundPair {
    double lo, hi, pinned;
};

BoundPair bounds_at(const ModelSpec& model, const LatentGrid& grid, const DiscreteDistribution& F,
                    CSpan theta, const ScalarFn& g, const ExtraRows& extra, bool want_lo = true,
                    bool want_hi = true) {
    const std::size_t d2 = model.moments.dim_r2;
    const std::size_t dim = d2 + extra.dim;
    double scale = 0.0;
    Vec r1(model.moments.dim_r1, 0.0);
    for (const auto& a : F.atoms()) {
        Vec r = eval_r1(model, a.z, theta);
        for (std::size_t j = 0; j < r.size(); ++j) {
            r1[j] += a.weight * r[j];
            scale = std::max(scale, std::abs(r[j]));
        }
    }

    std::vector<AtomColumns> feas(F.size()), lo(F.size()), hi(F.size());
    Vec row(dim);
    for (std::size_t i = 0; i < F.size(); ++i) {
        std::vector<std::size_t> sec;
        try {
            sec = section(model, grid, F[i].z, theta);
        } catch (const EmptySection& e) {
            throw EmptySection(std::string(e.what()) + " at atom " + std::to_string(i), i);
        }
        std::map<Vec, std::size_t> s_feas, s_lo, s_hi;
        for (auto k : sec) {
            auto u = grid.point(k);
            std::span<double> out(row);
            if (d2) model.moments.r2(u, F[i].z, theta, out.first(d2));
            if (extra.dim) extra.f(u, F[i].z, theta, out.subspan(d2));
            const double gv = g(u, F[i].z, theta);
            for (double v : row) {
                if (!std::isfinite(v)) throw NonFiniteMoment("non-finite moment in bounds LP");
                scale = std::max(scale, std::abs(v));
            }
            if (!std::isfinite(gv)) throw NonFiniteMoment("non-finite functional value");
            add_column(feas[i], s_feas, row, k, 0.0, Keep::First);
            if (want_lo) add_column(lo[i], s_lo, row, k, gv, Keep::Min);
            if (want_hi) add_column(hi[i], s_hi, row, k, gv, Keep::Max);
        }
    }

    double pinned = 0.0;
    if (dim > 0) {
        auto as = assemble(feas, F, dim, true, std::nullopt, 1.0);
        auto r = simplex_solve(as.lp);
        if (r.status != LpStatus::Optimal)
            throw NumericalInstability("pinned-row feasibility LP did not reach an optimum");
        pinned = std::max(r.objective, 0.0);
    }
    if (pinned + l1(r1) > tol::lp(scale))
        throw EmptyInterval("parameter is outside the discretized identified set (violation " +
                            std::to_string(pinned + l1(r1)) + ")");

    const double budget = pinned + 1e-12 * (1.0 + scale);
    auto solve = [&](const std::vector<AtomColumns>& cols, double sign) {
        auto as = assemble(cols, F, dim, false, dim ? std::optional<double>(budget) : std::nullopt,
                           sign);
        auto r = simplex_solve(as.lp);
        if (r.status != LpStatus::Optimal)
            throw EmptyInterval("bounds LP is infeasible at the pinned rows");
        return sign * r.objective;
    };
    return {want_lo ? solve(lo, 1.0) : NAN, want_hi ? solve(hi, -1.0) : NAN, pinned};
}

}  // namespace

BoundsResult functional_bounds(const ModelSpec& model, const LatentGrid& grid,
                               const DiscreteDistribution& F, CSpan theta, const ScalarFn& g,
                               const ExtraRows& extra) {
    BoundsResult res;
    res.truncation = grid.truncation();
    auto b = bounds_at(model, grid, F, theta, g, extra);
    res.lo = b.lo;
    res.hi = b.hi;
    res.pinned_violation = b.pinned;
    if (model.has_unbounded_latent()) {
        auto b2 = bounds_at(model, model.make_grid(2.0 * grid.truncation()), F, theta, g, extra);
        res.lo_doubled = b2.lo;
        res.hi_doubled = b2.hi;
        res.lo_growing = std::abs(b2.lo - b.lo) > tol::kGrow * (1.0 + std::abs(b.lo));
        res.hi_growing = std::abs(b2.hi - b.hi) > tol::kGrow * (1.0 + std::abs(b.hi));
    }
    return res;
}

double functional_extreme(const ModelSpec& model, const LatentGrid& grid,
                          const DiscreteDistribution& F, CSpan theta, const ScalarFn& g, Sense sense,
                          const ExtraRows& extra) {
    auto b = bounds_at(model, grid, F, theta, g, extra, sense == Sense::Min, sense == Sense::Max);
    return sense == Sense::Min ? b.lo : b.hi;
}

void dump_selection_lp(std::ostream& os, const SelectionLP& lp, const Vec& objective) {
    write_tableau(os, lp.program(objective));
}

}  // namespace idset

#pragma once

// Exact linear-programming view of the discretized identified set: masses over
// admissible (atom, grid point) pairs with fixed atom weights.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "idset/model.hpp"
#include "idset/simplex.hpp"

namespace idset {

enum class Sense { Min, Max };

/// Mass variables p[i,k] >= 0; rows sum_k p[i,k] = weight_i and
/// sum_{i,k} p[i,k] * moments[:, (i,k)] = target.
struct SelectionLP {
    Vec weights;
    std::vector<std::size_t> atom_of;
    std::vector<std::size_t> grid_point;
    Eigen::MatrixXd moments;  ///< moment rows x variables
    Vec target;

    std::size_t variables() const { return atom_of.size(); }
    std::size_t moment_rows() const { return static_cast<std::size_t>(moments.rows()); }
    LinearProgram program(const Vec& objective) const;
};

/// One variable per section point and one moment row per r2 coordinate
/// (target 0).
SelectionLP build_selection_lp(const ModelSpec& model, const LatentGrid& grid,
                               const DiscreteDistribution& F, CSpan theta);

struct LpOutcome {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Vec solution;  ///< masses, Optimal only
    Vec dual;
    Vec certificate;
    double duality_residual = 0.0;
    std::size_t iterations = 0;
};

LpOutcome solve_lp(const Vec& objective, Sense sense, const SelectionLP& lp);

struct ViolationResult {
    /// min over selections of || E_H r ||_1.
    double value = 0.0;
    double r1_part = 0.0;
    double scale = 0.0;
    bool member = false;
    /// Optimal masses over the retained columns, listed by (atom, grid point).
    std::vector<std::size_t> atom_of;
    std::vector<std::size_t> grid_point;
    Vec masses;
    double duality_residual = 0.0;
};

ViolationResult min_violation(const ModelSpec& model, const LatentGrid& grid,
                              const DiscreteDistribution& F, CSpan theta);

/// Same problem on precomputed images; `r1_residual` is E_F r1. Images may be
/// compacted: repeated rows of one atom are merged without changing the optimum.
ViolationResult min_violation(const std::vector<MomentImage>& images,
                              const DiscreteDistribution& F, const Vec& r1_residual, double scale);

using ScalarFn = std::function<double(CSpan u, CSpan z, CSpan theta)>;

/// Additional equalities E_H[f(U, Z; theta)] = 0 pinned alongside r2.
struct ExtraRows {
    std::size_t dim = 0;
    MomentFn f;
};

struct BoundsResult {
    double lo = 0.0;
    double hi = 0.0;
    double truncation = 0.0;
    /// Re-solved at twice the truncation when the latent space is unbounded.
    std::optional<double> lo_doubled;
    std::optional<double> hi_doubled;
    bool lo_growing = false;
    bool hi_growing = false;
    /// Minimum L1 violation of the pinned rows; the bounds allow exactly this much.
    double pinned_violation = 0.0;
    /// Set when an endpoint was cut off by a search box (ratio targets).
    bool lo_at_box = false;
    bool hi_at_box = false;
};

/// Min and max of E_H g over selections satisfying the moment rows. The
/// pinned rows may be violated by at most their minimum violation, which must
/// be <= eps_lp; otherwise EmptyInterval.
BoundsResult functional_bounds(const ModelSpec& model, const LatentGrid& grid,
                               const DiscreteDistribution& F, CSpan theta, const ScalarFn& g,
                               const ExtraRows& extra = {});

/// One side of functional_bounds at a single truncation.
double functional_extreme(const ModelSpec& model, const LatentGrid& grid,
                          const DiscreteDistribution& F, CSpan theta, const ScalarFn& g, Sense sense,
                          const ExtraRows& extra = {});

/// Plain-text tableau of the selection LP with the given objective.
void dump_selection_lp(std::ostream& os, const SelectionLP& lp, const Vec& objective);

}  // namespace idset

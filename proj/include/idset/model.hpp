#pragma once

// Model abstraction: latent domains, support predicates, partitioned moment
// functions, parameter boxes, and the discretization of the latent space.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace idset {

using Vec = std::vector<double>;
using CSpan = std::span<const double>;

/// Closed interval; a missing end is unbounded.
struct Interval {
    std::optional<double> lower;
    std::optional<double> upper;

    static Interval closed(double lo, double hi) { return {lo, hi}; }
    static Interval real_line() { return {}; }
    bool bounded() const { return lower.has_value() && upper.has_value(); }
};

struct LatentDomain {
    std::vector<Interval> box;
    double default_truncation = 5.0;
    std::size_t points_per_dim = 21;

    std::size_t dim() const { return box.size(); }
    bool has_unbounded() const;
    /// Throws ConfigError when an invariant fails.
    void validate() const;
};

/// Finite set of latent points in the truncated latent box.
///
/// Points are stored row-major. The boundary mask flags points lying within
/// one grid step of a truncation face of an unbounded dimension.
class LatentGrid {
public:
    LatentGrid() = default;
    LatentGrid(std::size_t dim, double truncation, Vec coords,
               std::vector<std::uint8_t> boundary);

    std::size_t size() const { return boundary_.size(); }
    std::size_t dim() const { return dim_; }
    double truncation() const { return truncation_; }
    CSpan point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    bool on_boundary(std::size_t i) const { return boundary_[i] != 0; }
    const std::vector<std::uint8_t>& boundary_mask() const { return boundary_; }
    const Vec& coords() const { return coords_; }

private:
    std::size_t dim_ = 0;
    double truncation_ = 0.0;
    Vec coords_;
    std::vector<std::uint8_t> boundary_;
};

/// Node list of one latent dimension at a given truncation, plus boundary flags.
struct AxisNodes {
    Vec nodes;
    std::vector<std::uint8_t> boundary;
};

/// Nodes of a single dimension. Unbounded dimensions keep the step of the
/// default-truncation grid so that grids at M and 2M are nested.
AxisNodes axis_nodes(const Interval& iv, double default_truncation,
                     std::size_t points_per_dim, double truncation);

/// Tensor-product grid over the (truncated) latent box.
LatentGrid build_grid(const LatentDomain& latent, double truncation);

/// Tensor product of grids; boundary flags are OR-ed.
LatentGrid product_grid(const std::vector<const LatentGrid*>& factors, double truncation);

struct ObservedAtom {
    Vec z;
    double weight = 0.0;
};

/// Finite observed distribution: atoms with positive weights summing to one.
class DiscreteDistribution {
public:
    DiscreteDistribution() = default;
    /// Requires weights summing to 1 within 1e-9; renormalizes the remainder.
    explicit DiscreteDistribution(std::vector<ObservedAtom> atoms);
    /// Accepts arbitrary positive weights and divides by their sum.
    static DiscreteDistribution normalized(std::vector<ObservedAtom> atoms);

    const std::vector<ObservedAtom>& atoms() const { return atoms_; }
    const ObservedAtom& operator[](std::size_t i) const { return atoms_[i]; }
    std::size_t size() const { return atoms_.size(); }
    std::size_t z_dim() const { return atoms_.empty() ? 0 : atoms_.front().z.size(); }
    /// Expectation of one z coordinate.
    double mean(std::size_t coord) const;

private:
    std::vector<ObservedAtom> atoms_;
};

using ZMomentFn = std::function<void(CSpan z, CSpan theta, std::span<double> out)>;
using MomentFn = std::function<void(CSpan u, CSpan z, CSpan theta, std::span<double> out)>;

/// Moment function partitioned as (r1, r2): r1 depends only on (z, theta).
struct MomentSpec {
    std::size_t dim_r1 = 0;
    std::size_t dim_r2 = 0;
    ZMomentFn r1;
    MomentFn r2;

    std::size_t dim() const { return dim_r1 + dim_r2; }
};

struct SupportPredicate {
    std::function<bool(CSpan u, CSpan z, CSpan theta)> contains;
};

struct ParameterBox {
    Vec lower;
    Vec upper;
    std::vector<std::size_t> resolution;
    std::vector<std::string> names;

    std::size_t dim() const { return lower.size(); }
    std::size_t size() const;
    /// Grid point by flat index; the first coordinate varies slowest.
    Vec point(std::size_t index) const;
    std::vector<Vec> grid() const;
    double step(std::size_t d) const;
    /// Flat index of the neighbor shifted by `delta` along `d`, if inside.
    std::optional<std::size_t> neighbor(std::size_t index, std::size_t d, int delta) const;
    void validate() const;
};

class ModelSpec;

/// Post-filter applied to the raw section (used by reduced models, whose
/// tightened support depends on the whole section).
using SectionRefiner = std::function<std::vector<std::size_t>(
    const ModelSpec& model, const LatentGrid& grid, std::vector<std::size_t> raw,
    CSpan z, CSpan theta)>;

class ModelSpec {
public:
    std::string label;
    LatentDomain latent;
    SupportPredicate support;
    MomentSpec moments;
    ParameterBox params;
    std::size_t z_dim = 0;
    std::vector<std::string> z_names;
    /// Replaces build_grid when the latent space is not a plain box.
    std::function<LatentGrid(double)> grid_builder;
    SectionRefiner refine;

    LatentGrid make_grid(double truncation) const;
    LatentGrid make_grid() const { return make_grid(latent.default_truncation); }
    bool has_unbounded_latent() const { return latent.has_unbounded(); }
    void validate() const;
};

/// Indices of grid points in the section at (z, theta), in grid order.
/// Throws EmptySection when no point qualifies.
std::vector<std::size_t> section(const ModelSpec& model, const LatentGrid& grid, CSpan z,
                                 CSpan theta);

/// r2 evaluated on a section, one row per admissible grid point.
struct MomentImage {
    std::size_t dim = 0;
    std::vector<std::size_t> grid_index;
    Vec values;
    std::vector<std::uint8_t> boundary;

    std::size_t size() const { return grid_index.size(); }
    CSpan row(std::size_t i) const { return {values.data() + i * dim, dim}; }
    double max_abs() const;
    /// Drops rows repeating an earlier (value, boundary) pair. Support values
    /// and their lowest-index argmax are unchanged.
    MomentImage compact() const;
};

MomentImage image_on_section(const ModelSpec& model, const LatentGrid& grid,
                             const std::vector<std::size_t>& idx, CSpan z, CSpan theta);

MomentImage moment_image(const ModelSpec& model, const LatentGrid& grid, CSpan z, CSpan theta);

/// r1 at (z, theta), validated finite.
Vec eval_r1(const ModelSpec& model, CSpan z, CSpan theta);

/// Moment images for every atom of F; EmptySection carries the atom index.
std::vector<MomentImage> atom_images(const ModelSpec& model, const LatentGrid& grid,
                                     const DiscreteDistribution& F, CSpan theta);

}  // namespace idset

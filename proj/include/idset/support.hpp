#pragma once

// Support function of the discretized moment image and the sphere criterion
// inf_{|lambda|=1} E_F[gamma(lambda, Z; theta)].

#include <cstddef>
#include <vector>

#include "idset/model.hpp"

namespace idset {

/// Unit vector in the r2 coordinates.
class Direction {
public:
    Direction() = default;
    /// Requires a Euclidean norm of 1 within 1e-12.
    explicit Direction(Vec unit);
    /// Scales a nonzero vector to unit length.
    static Direction normalized(Vec v);

    const Vec& values() const { return v_; }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    operator CSpan() const { return v_; }

private:
    Vec v_;
};

struct SupportValue {
    double value = 0.0;
    std::size_t attained_at = 0;  ///< grid index of the argmax
    bool boundary_attained = false;
};

/// max_k lambda' row_k with the lowest grid index winning ties. `lambda` need
/// not be normalized.
SupportValue support_on_image(const MomentImage& image, CSpan lambda);

SupportValue support_function(const ModelSpec& model, const LatentGrid& grid, CSpan z, CSpan theta,
                              const Direction& lambda);

struct ExpectedSupport {
    double value = 0.0;
    /// F-weight whose argmax sits on a truncation boundary.
    double boundary_fraction = 0.0;
};

ExpectedSupport expected_support_on(const std::vector<MomentImage>& images,
                                    const DiscreteDistribution& F, CSpan lambda);

ExpectedSupport expected_support(const ModelSpec& model, const LatentGrid& grid,
                                 const DiscreteDistribution& F, CSpan theta,
                                 const Direction& lambda);

/// True when the direction is treated as having E_F[gamma] = +inf. Compares
/// the grids at truncation M and 2M.
bool detect_divergence(const ModelSpec& model, const DiscreteDistribution& F, CSpan theta,
                       const Direction& lambda, double M);

/// E_F r1(Z; theta).
Vec gmm_residual(const ModelSpec& model, const DiscreteDistribution& F, CSpan theta);

/// Deterministic direction set: the signed coordinate axes followed by a
/// quasi-uniform sample (angle grid in 2D, Fibonacci sphere in 3D, Halton
/// points pushed through Box-Muller otherwise). `count == 0` picks the default.
std::vector<Vec> sphere_samples(std::size_t dim, std::size_t count = 0);
std::size_t default_sphere_samples(std::size_t dim);

/// Precomputed compact images at truncation M (and 2M for unbounded latent
/// spaces), shared by the criterion, divergence checks and reduction search.
class SupportEvaluator {
public:
    SupportEvaluator(const ModelSpec& model, const LatentGrid& grid, const DiscreteDistribution& F,
                     CSpan theta);

    struct Probe {
        double value = 0.0;
        double at_double = 0.0;
        bool divergent = false;
    };

    Probe probe(CSpan lambda) const;
    std::size_t dim() const { return dim_; }
    double scale() const { return scale_; }
    const Vec& residual() const { return residual_; }
    const std::vector<MomentImage>& images() const { return images_; }
    const DiscreteDistribution& distribution() const { return *F_; }

private:
    const DiscreteDistribution* F_;
    std::size_t dim_;
    bool unbounded_;
    std::vector<MomentImage> images_;
    std::vector<MomentImage> doubled_;
    Vec residual_;
    double scale_ = 0.0;
};

struct CriterionOptions {
    std::size_t restarts = 8;
    std::size_t sphere_samples = 0;  ///< 0 selects the dimension default
    double initial_step = 0.25;
    double min_step = 1e-6;
    std::size_t max_evaluations = 50000;
};

struct RestartTrace {
    Vec start;
    double start_value = 0.0;
    Vec end;
    double end_value = 0.0;
    std::size_t evaluations = 0;
};

struct CriterionResult {
    /// Minimum over probed non-divergent directions; +inf when every probe
    /// diverged.
    double value = 0.0;
    Direction argmin;
    std::size_t infinite_directions_sampled = 0;
    std::vector<RestartTrace> diagnostics;
    Vec gmm_residual;
    double scale = 0.0;
    std::size_t evaluations = 0;

    double residual_norm() const;
    /// ||E r1||_inf <= eps_eq and value >= -eps_crit.
    bool member() const;
};

/// Pure-GMM models (dim_r2 = 0) raise DimensionError.
CriterionResult criterion(const ModelSpec& model, const LatentGrid& grid,
                          const DiscreteDistribution& F, CSpan theta,
                          const CriterionOptions& options = {});

CriterionResult criterion(const SupportEvaluator& evaluator, const CriterionOptions& options = {});

}  // namespace idset

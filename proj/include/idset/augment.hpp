#pragma once

// Counterfactual augmentation: the baseline latent space is extended by the
// counterfactual outcome and any new counterfactual latent, the support becomes
// baseline AND counterfactual correspondence, and the moments are stacked.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "idset/lp_oracle.hpp"
#include "idset/model.hpp"

namespace idset {

/// Functions of (y~, u~, z, u, theta) for the counterfactual layer.
using CfPredicate = std::function<bool(CSpan yt, CSpan ut, CSpan z, CSpan u, CSpan theta)>;
using CfScalar = std::function<double(CSpan yt, CSpan ut, CSpan z, CSpan u, CSpan theta)>;
using CfVector =
    std::function<void(CSpan yt, CSpan ut, CSpan z, CSpan u, CSpan theta, std::span<double> out)>;

enum class TargetKind {
    Mean,      ///< m~ = g - theta~
    Ratio,     ///< m~ = g - theta~ * h
    Quantile,  ///< not supported
};

struct CounterfactualSpec {
    std::string label;
    /// Finite list of counterfactual outcomes y~ (all of one length).
    std::vector<Vec> cf_outcomes;
    /// Gridded counterfactual latent u~, when the intervention introduces one.
    std::optional<LatentDomain> cf_latent;
    CfPredicate correspondence;
    std::size_t dim_r_tilde = 0;
    CfVector r_tilde;
    TargetKind kind = TargetKind::Mean;
    CfScalar g;
    CfScalar h;  ///< Ratio only
    ParameterBox theta_tilde_box;

    std::size_t outcome_dim() const { return cf_outcomes.empty() ? 0 : cf_outcomes.front().size(); }
    std::size_t cf_latent_dim() const { return cf_latent ? cf_latent->dim() : 0; }
};

/// Augmented latent coordinates are laid out as (u, y~, u~); augmented
/// parameters as (theta, theta~).
struct AugmentedModel {
    ModelSpec base;
    ModelSpec model;
    /// Baseline plus r~ without the parameter-defining moment; used for bounds.
    ModelSpec core;
    CounterfactualSpec cf;
    std::size_t base_latent_dim = 0;
    std::size_t base_theta_dim = 0;
    std::size_t base_dim_r2 = 0;

    CSpan base_u(CSpan u) const { return u.first(base_latent_dim); }
    CSpan cf_outcome(CSpan u) const { return u.subspan(base_latent_dim, cf.outcome_dim()); }
    CSpan cf_latent(CSpan u) const {
        return u.subspan(base_latent_dim + cf.outcome_dim(), cf.cf_latent_dim());
    }
};

/// Builds the augmented model and checks on the default grids that the
/// correspondence is nonempty wherever the baseline support holds, for every
/// baseline theta grid point and every z in `z_support`. Throws
/// NonemptyCorrespondenceViolated naming the first witness.
AugmentedModel augment(const ModelSpec& base, const CounterfactualSpec& cf,
                       const std::vector<Vec>& z_support = {});

/// Checks correspondence nonemptiness at one truncation; returns a description
/// of the first failure, if any.
std::optional<std::string> find_empty_correspondence(const AugmentedModel& aug,
                                                     const std::vector<Vec>& z_support,
                                                     const std::vector<Vec>& thetas, double truncation);

/// Interval of theta~ consistent with the augmented model at baseline theta.
BoundsResult theta_tilde_interval(const AugmentedModel& aug, const DiscreteDistribution& F,
                                  CSpan theta, double truncation);
BoundsResult theta_tilde_interval(const AugmentedModel& aug, const DiscreteDistribution& F,
                                  CSpan theta);

/// Baseline-theta coordinates of member points, duplicates removed, in first-seen order.
std::vector<Vec> project_theta(const std::vector<Vec>& member_points, std::size_t base_theta_dim);

}  // namespace idset

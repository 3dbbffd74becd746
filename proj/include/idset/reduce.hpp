#pragma once

// Reducing directions and reduced models: tighten the support to the argmax
// set of a direction whose expected support is zero, and rotate the moments so
// that direction becomes a latent-free moment.

#include <optional>
#include <string>
#include <vector>

#include "idset/model.hpp"
#include "idset/support.hpp"

namespace idset {

struct ReductionCertificate {
    Direction lambda;
    double achieved_value = 0.0;
    /// dim_r2 - 1 orthonormal directions completing lambda.
    std::vector<Vec> completion;
    double scale = 0.0;
    /// Truncation at which the certificate was found.
    double truncation = 0.0;
    double smallest_singular_value = 0.0;
    double condition_number = 0.0;
};

/// Searches the sphere for a non-divergent direction with E_F gamma_2 at most
/// eps_red. The first sphere sample (axes first) that qualifies wins; otherwise
/// the refined criterion minimizer is used if it qualifies. Throws
/// DimensionError when dim_r2 = 0.
std::optional<ReductionCertificate> find_reducing_direction(const ModelSpec& model,
                                                            const LatentGrid& grid,
                                                            const DiscreteDistribution& F,
                                                            CSpan theta,
                                                            const CriterionOptions& options = {});

/// Gram-Schmidt against the standard basis; returns dim - 1 unit vectors.
std::vector<Vec> complete_basis(const Vec& lambda);

/// Reduced model: sections keep only points attaining the support function of
/// the certificate direction (tolerance 1e-9 (1 + scale)); r1 gains
/// gamma_2(lambda, z; theta) evaluated at the certificate truncation; r2 becomes
/// the completion rotations of the original r2.
ModelSpec reduce_model(const ModelSpec& model, const ReductionCertificate& cert);

struct ReductionEntry {
    Vec theta;
    std::size_t distribution = 0;
    bool found = false;
    std::optional<ReductionCertificate> certificate;
    std::string error;
};

/// Grid-level diagnostic only: exhibits reducibility at the boundary points of
/// the identified set, it cannot certify irreducibility.
struct IrreducibilityReport {
    std::vector<ReductionEntry> entries;
    std::size_t boundary_points = 0;
    std::size_t reducible_pairs = 0;
    bool vacuous = false;
    std::string note;
};

/// `member[i]` flags the parameter-grid point i as an identified-set member
/// under distribution d; boundary points are members with a non-member (or
/// off-grid) neighbor along some coordinate. When `include_interior` is set,
/// every member is examined.
IrreducibilityReport irreducibility_report(const ModelSpec& model, const LatentGrid& grid,
                                           const std::vector<DiscreteDistribution>& family,
                                           const std::vector<std::vector<bool>>& member,
                                           bool include_interior = false,
                                           const CriterionOptions& options = {});

}  // namespace idset

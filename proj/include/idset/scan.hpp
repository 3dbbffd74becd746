#pragma once

// Parameter-grid sweeps: both membership tests at every grid point, with
// truncation trajectories where they disagree or where divergent directions
// were seen.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idset/model.hpp"
#include "idset/support.hpp"

namespace idset {

struct Verdict {
    std::size_t index = 0;
    Vec theta;
    double gmm_residual_norm = 0.0;
    double criterion_value = 0.0;
    Vec criterion_argmin;
    double lp_violation = 0.0;
    bool member_sf = false;
    bool member_lp = false;
    double truncation = 0.0;
    std::size_t divergent_direction_count = 0;
    double scale = 0.0;
};

/// Evaluations of one parameter point at successively larger truncations.
struct Trajectory {
    std::size_t index = 0;
    std::vector<Verdict> steps;
};

struct PointError {
    std::size_t index = 0;
    Vec theta;
    std::string kind;
    std::string message;
};

struct ScanReport {
    std::string model_label;
    std::vector<std::string> theta_names;
    /// One per grid point in grid order; entries for failed points carry
    /// NaN values and are listed in `errors`.
    std::vector<Verdict> verdicts;
    std::vector<std::size_t> disagreements;
    std::vector<Trajectory> trajectories;
    std::vector<PointError> errors;
    std::vector<double> truncations;
    bool complete = true;
    /// Not written to output files, so reruns stay byte-identical.
    double wall_seconds = 0.0;
};

struct ScanOptions {
    /// Empty selects {M0, 2 M0, 4 M0} with M0 the model's default truncation.
    std::vector<double> truncations;
    CriterionOptions criterion;
    /// 0 reads IDTOOL_THREADS, falling back to the hardware concurrency.
    std::size_t threads = 0;
};

/// Verdict at a single point and truncation.
Verdict evaluate_point(const ModelSpec& model, const LatentGrid& grid, const DiscreteDistribution& F,
                       CSpan theta, const CriterionOptions& options = {});

ScanReport scan(const ModelSpec& model, const DiscreteDistribution& F,
                const std::vector<Vec>& theta_grid, const ScanOptions& options = {});

/// Whole parameter box of the model.
ScanReport scan(const ModelSpec& model, const DiscreteDistribution& F, const ScanOptions& options = {});

std::size_t worker_count(std::size_t requested);

struct CoordinateHull {
    std::size_t coordinate = 0;
    std::string name;
    bool empty = true;
    double lo = 0.0;
    double hi = 0.0;
};

/// Outer description (per-coordinate hull) of a membership set plus the exact
/// member list.
struct SetSummary {
    bool empty = true;
    std::vector<CoordinateHull> hull;
    std::vector<Vec> members;
};

enum class MembershipKind { Lp, SupportFunction };

SetSummary set_summary(const ScanReport& report, MembershipKind kind = MembershipKind::Lp);
CoordinateHull set_summary(const ScanReport& report, std::size_t coordinate,
                           MembershipKind kind = MembershipKind::Lp);

/// Columns: theta coordinates, gmm_residual_norm, criterion_value,
/// lp_violation, member_sf, member_lp, M, divergent_dirs.
void write_verdicts_csv(std::ostream& os, const ScanReport& report);

}  // namespace idset

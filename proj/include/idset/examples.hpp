#pragma once

// Shipped models: the two-firm complete-information entry game with its
// moment variants and counterfactuals, and interval-censored regression.
// Also the synthetic data generators used as test fixtures.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "idset/augment.hpp"
#include "idset/model.hpp"

namespace idset {

// ---------------------------------------------------------------- entry game

enum class MomentVariant { Median, MedianPlusSymmetric, UncorrVariance };

const char* to_string(MomentVariant v);
MomentVariant parse_moment_variant(const std::string& s);

/// Two firms sharing a market-level covariate vector x, with payoff
/// y_j [x'alpha - Delta_j y_{1-j} + u_j].
struct EntryGameConfig {
    std::vector<Vec> x_support{{-1.0}, {1.0}};
    Vec x_weights{0.5, 0.5};
    Vec alpha{0.5};
    Vec delta{1.0, 1.0};
    MomentVariant variant = MomentVariant::Median;
    Vec tau{0.5, 0.5};
    Vec sigma2{2.5, 2.5};
    double truncation = 5.0;
    std::size_t points_per_dim = 21;
    /// Parameter box; empty vectors select the defaults.
    Vec theta_lower;
    Vec theta_upper;
    std::vector<std::size_t> theta_resolution;

    std::size_t x_dim() const { return x_support.empty() ? 0 : x_support.front().size(); }
    /// (alpha, Delta_0, Delta_1[, tau_0, tau_1]).
    Vec theta0() const;
    ParameterBox box() const;
    void validate() const;
};

using Profile = std::vector<int>;

/// True when no firm gains from a unilateral deviation. `index[j]` is firm j's
/// covariate index x_j'alpha. Ties count as best responses.
bool is_pure_ne(CSpan index, CSpan u, CSpan delta, const Profile& y);

/// All pure-strategy equilibria in lexicographic order (firm 0 most significant).
std::vector<Profile> enumerate_pure_ne(CSpan index, CSpan u, CSpan delta);

/// Observed z = (x, y_0, y_1); latent u in R^2.
ModelSpec build_entry_model(const EntryGameConfig& cfg);

/// All (x, y) combinations, in the model's z layout.
std::vector<Vec> entry_z_support(const EntryGameConfig& cfg);

/// Per-firm affine map of the covariate index: x~_j = scale_j * x + shift_j.
struct ShiftX {
    Vec scale{1.0, 1.0};
    Vec shift{0.0, 0.0};
};
struct Merger {};
enum class DeltaRule { Mean, Min, Max };
/// Third entrant with x_2 = scale * x + shift and Delta_2 = rule(Delta_0, Delta_1).
struct NewCompetitor {
    double x_scale = 1.0;
    double x_shift = 0.0;
    DeltaRule delta_rule = DeltaRule::Mean;
};
using CounterfactualCase = std::variant<ShiftX, Merger, NewCompetitor>;

enum class TargetType { ExpectedEntrants, ProbUnserved, TotalSurplus, ProfitGivenEntry };

struct CounterfactualTarget {
    TargetType type = TargetType::ExpectedEntrants;
    std::size_t firm = 0;  ///< ProfitGivenEntry only
};

const char* to_string(TargetType t);
TargetType parse_target(const std::string& s);

/// `theta_tilde_box` with dim 0 selects a default box for the target.
CounterfactualSpec build_entry_counterfactual(const EntryGameConfig& cfg,
                                              const CounterfactualCase& cf_case,
                                              const CounterfactualTarget& target,
                                              const ParameterBox& theta_tilde_box = {});

/// Discrete law of (u_0, u_1).
struct LatentLaw {
    std::vector<Vec> points;
    Vec weights;

    /// Independent firms, each uniform on {-1.5, -0.5, 0.5, 1.5}.
    static LatentLaw entry_default();
};

enum class SelectionRule { FirstLex, Random };
struct Selection {
    SelectionRule rule = SelectionRule::FirstLex;
    std::uint64_t seed = 0;
};

/// Stratified allocates markets to (x, u) cells in exact proportion (largest
/// remainder); Iid draws cells with a seeded generator.
enum class Sampling { Stratified, Iid };

DiscreteDistribution simulate_entry_data(const EntryGameConfig& cfg, CSpan theta0,
                                         std::size_t n_markets, const Selection& selection,
                                         const LatentLaw& u_law = LatentLaw::entry_default(),
                                         Sampling sampling = Sampling::Stratified,
                                         std::uint64_t sampling_seed = 0);

// ------------------------------------------------------- interval regression

enum class IntervalForm { Proper, Dagger };

/// Y* = alpha + beta W + eps observed through [Y*-below, Y*+above].
struct IntervalRegConfig {
    Vec w_support{-1.0, 0.0, 1.0};
    Vec w_weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double below = 0.3;
    double above = 0.4;
    IntervalForm form = IntervalForm::Proper;
    double truncation = 5.0;
    std::size_t points_per_dim = 201;
    Vec theta_lower{-2.0, -2.0};
    Vec theta_upper{2.0, 2.0};
    std::vector<std::size_t> theta_resolution{41, 41};
    Vec theta0{0.5, 0.25};

    ParameterBox box() const;
    void validate() const;
};

/// Observed z = (y_lower, y_upper, w); scalar latent u playing Y*.
ModelSpec build_interval_model(const IntervalRegConfig& cfg);

struct NoiseLaw {
    Vec points{0.0};
    Vec weights{1.0};
};

DiscreteDistribution simulate_interval_data(const IntervalRegConfig& cfg, CSpan theta0,
                                            std::size_t n, const NoiseLaw& eps = {},
                                            std::uint64_t seed = 0,
                                            Sampling sampling = Sampling::Stratified);

// ------------------------------------------------------------------- data io

/// Header row of z names then "weight"; one atom per line. The reader skips
/// lines starting with #.
void write_distribution_csv(std::ostream& os, const DiscreteDistribution& F,
                            const std::vector<std::string>& z_names);
DiscreteDistribution read_distribution_csv(std::istream& is, std::vector<std::string>* z_names = nullptr);

}  // namespace idset

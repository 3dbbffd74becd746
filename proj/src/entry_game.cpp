#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>

#include "idset/errors.hpp"
#include "idset/examples.hpp"

namespace idset {

namespace {

// Slack given to equilibrium and cutoff comparisons so that exact ties on the
// grid survive floating-point rounding of x'alpha.
constexpr double kTie = 1e-12;

double index_of(CSpan x, CSpan alpha) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * alpha[i];
    return s;
}

std::vector<std::size_t> largest_remainder(const Vec& probs, std::size_t n) {
    std::vector<std::size_t> counts(probs.size());
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t used = 0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        const double exact = probs[c] * static_cast<double>(n);
        counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        used += counts[c];
        rem.push_back({exact - static_cast<double>(counts[c]), c});
    }
    std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; used < n && i < rem.size(); ++i, ++used) ++counts[rem[i].second];
    return counts;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t draw_cell(const Vec& probs, std::mt19937_64& rng) {
    double r = uniform01(rng), acc = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        acc += probs[c];
        if (r < acc) return c;
    }
    return probs.size() - 1;
}

}  // namespace

const char* to_string(MomentVariant v) {
    switch (v) {
        case MomentVariant::Median: return "median";
        case MomentVariant::MedianPlusSymmetric: return "median_symmetric";
        case MomentVariant::UncorrVariance: return "uncorr_variance";
    }
    return "?";
}

MomentVariant parse_moment_variant(const std::string& s) {
    if (s == "median") return MomentVariant::Median;
    if (s == "median_symmetric") return MomentVariant::MedianPlusSymmetric;
    if (s == "uncorr_variance") return MomentVariant::UncorrVariance;
    throw ConfigError("unknown moment variant '" + s + "'");
}

const char* to_string(TargetType t) {
    switch (t) {
        case TargetType::ExpectedEntrants: return "expected_entrants";
        case TargetType::ProbUnserved: return "prob_unserved";
        case TargetType::TotalSurplus: return "total_surplus";
        case TargetType::ProfitGivenEntry: return "profit_given_entry";
    }
    return "?";
}

TargetType parse_target(const std::string& s) {
    if (s == "expected_entrants") return TargetType::ExpectedEntrants;
    if (s == "prob_unserved") return TargetType::ProbUnserved;
    if (s == "total_surplus") return TargetType::TotalSurplus;
    if (s == "profit_given_entry") return TargetType::ProfitGivenEntry;
    throw ConfigError("unknown counterfactual target '" + s + "'");
}

Vec EntryGameConfig::theta0() const {
    Vec t = alpha;
    t.insert(t.end(), delta.begin(), delta.end());
    if (variant == MomentVariant::UncorrVariance) t.insert(t.end(), tau.begin(), tau.end());
    return t;
}

ParameterBox EntryGameConfig::box() const {
    ParameterBox b;
    const std::size_t k = x_dim();
    for (std::size_t i = 0; i < k; ++i) {
        b.lower.push_back(-1.5);
        b.upper.push_back(2.5);
        b.resolution.push_back(21);
        b.names.push_back(k == 1 ? "alpha" : "alpha_" + std::to_string(i));
    }
    for (int j = 0; j < 2; ++j) {
        b.lower.push_back(0.0);
        b.upper.push_back(2.0);
        b.resolution.push_back(21);
        b.names.push_back("delta_" + std::to_string(j));
    }
    if (variant == MomentVariant::UncorrVariance) {
        for (int j = 0; j < 2; ++j) {
            b.lower.push_back(0.0);
            b.upper.push_back(1.0);
            b.resolution.push_back(11);
            b.names.push_back("tau_" + std::to_string(j));
        }
    }
    if (!theta_lower.empty()) b.lower = theta_lower;
    if (!theta_upper.empty()) b.upper = theta_upper;
    if (!theta_resolution.empty()) b.resolution = theta_resolution;
    if (b.lower.size() != b.names.size() || b.upper.size() != b.names.size() ||
        b.resolution.size() != b.names.size())
        throw ConfigError("entry-game parameter box must have " + std::to_string(b.names.size()) +
                          " dimensions");
    for (std::size_t j = k; j < k + 2; ++j)
        if (b.lower[j] < 0.0) throw ConfigError("competitive effects must be nonnegative");
    return b;
}

void EntryGameConfig::validate() const {
    if (x_support.empty()) throw ConfigError("x_support is empty");
    for (const auto& x : x_support)
        if (x.size() != x_dim() || x.empty()) throw ConfigError("x_support vectors differ in length");
    if (x_weights.size() != x_support.size()) throw ConfigError("x_weights length mismatch");
    if (alpha.size() != x_dim()) throw ConfigError("alpha length must equal dim(x)");
    if (delta.size() != 2) throw ConfigError("delta must have one entry per firm");
    for (double d : delta)
        if (d < 0.0) throw ConfigError("delta must be nonnegative");
    if (variant == MomentVariant::UncorrVariance) {
        if (tau.size() != 2 || sigma2.size() != 2) throw ConfigError("tau and sigma2 need two entries");
        for (double t : tau)
            if (t < 0.0 || t > 1.0) throw ConfigError("tau must lie in [0, 1]");
        for (double s : sigma2)
            if (!(s > 0.0)) throw ConfigError("sigma2 must be positive");
    }
    if (!(truncation > 0.0) || points_per_dim < 2) throw ConfigError("invalid latent grid settings");
    box().validate();
}

bool is_pure_ne(CSpan index, CSpan u, CSpan delta, const Profile& y) {
    int total = 0;
    for (int v : y) total += v;
    for (std::size_t j = 0; j < y.size(); ++j) {
        const double gain = index[j] - delta[j] * static_cast<double>(total - y[j]) + u[j];
        if (y[j] == 1 ? gain < -kTie : gain > kTie) return false;
    }
    return true;
}

std::vector<Profile> enumerate_pure_ne(CSpan index, CSpan u, CSpan delta) {
    const std::size_t n = index.size();
    if (u.size() != n || delta.size() != n) throw DimensionError("one entry per firm required");
    std::vector<Profile> out;
    for (std::size_t code = 0; code < (std::size_t{1} << n); ++code) {
        Profile y(n);
        for (std::size_t j = 0; j < n; ++j) y[j] = static_cast<int>((code >> (n - 1 - j)) & 1u);
        if (is_pure_ne(index, u, delta, y)) out.push_back(std::move(y));
    }
    return out;
}

ModelSpec build_entry_model(const EntryGameConfig& cfg) {
    cfg.validate();
    const std::size_t k = cfg.x_dim();
    const auto variant = cfg.variant;
    ModelSpec m;
    m.label = std::string("entry_") + to_string(variant);
    m.latent.box = {Interval::real_line(), Interval::real_line()};
    m.latent.default_truncation = cfg.truncation;
    m.latent.points_per_dim = cfg.points_per_dim;
    m.params = cfg.box();
    m.z_dim = k + 2;
    for (std::size_t i = 0; i < k; ++i) m.z_names.push_back(k == 1 ? "x" : "x_" + std::to_string(i));
    m.z_names.push_back("y_0");
    m.z_names.push_back("y_1");

    m.support.contains = [k](CSpan u, CSpan z, CSpan th) {
        const double idx = index_of(z.first(k), th.first(k));
        const double y0 = z[k], y1 = z[k + 1];
        const double g0 = idx - th[k] * y1 + u[0], g1 = idx - th[k + 1] * y0 + u[1];
        return (y0 > 0.5 ? g0 >= -kTie : g0 <= kTie) && (y1 > 0.5 ? g1 >= -kTie : g1 <= kTie);
    };

    const std::size_t inst = 1 + k;
    if (variant == MomentVariant::UncorrVariance) {
        const Vec sigma2 = cfg.sigma2;
        m.moments.dim_r2 = 2 * (2 + k);
        m.moments.r2 = [k, sigma2](CSpan u, CSpan z, CSpan th, std::span<double> out) {
            std::size_t r = 0;
            for (std::size_t j = 0; j < 2; ++j) {
                out[r++] = u[j];
                for (std::size_t i = 0; i < k; ++i) out[r++] = z[i] * u[j];
                out[r++] = u[j] * u[j] - th[k + 2 + j] * sigma2[j];
            }
        };
        return m;
    }
    const bool sym = variant == MomentVariant::MedianPlusSymmetric;
    m.moments.dim_r2 = 2 * inst + (sym ? 4 * inst : 0);
    m.moments.r2 = [k, inst, sym](CSpan u, CSpan z, CSpan th, std::span<double> out) {
        auto put = [&](std::size_t at, double v) {
            out[at] = v;
            for (std::size_t i = 0; i < k; ++i) out[at + 1 + i] = z[i] * v;
        };
        for (std::size_t j = 0; j < 2; ++j) put(j * inst, (u[j] <= 0.0 ? 1.0 : 0.0) - 0.5);
        if (!sym) return;
        const double idx = index_of(z.first(k), th.first(k));
        std::size_t at = 2 * inst;
        for (std::size_t j = 0; j < 2; ++j) {
            for (int yr = 0; yr < 2; ++yr, at += inst) {
                const double c = -idx + th[k + j] * yr;
                put(at, (u[j] >= c - kTie ? 1.0 : 0.0) - (u[j] <= -c + kTie ? 1.0 : 0.0));
            }
        }
    };
    return m;
}

std::vector<Vec> entry_z_support(const EntryGameConfig& cfg) {
    std::vector<Vec> out;
    for (const auto& x : cfg.x_support) {
        for (int y0 = 0; y0 < 2; ++y0) {
            for (int y1 = 0; y1 < 2; ++y1) {
                Vec z = x;
                z.push_back(y0);
                z.push_back(y1);
                out.push_back(std::move(z));
            }
        }
    }
    return out;
}

CounterfactualSpec build_entry_counterfactual(const EntryGameConfig& cfg,
                                              const CounterfactualCase& cf_case,
                                              const CounterfactualTarget& target,
                                              const ParameterBox& theta_tilde_box) {
    cfg.validate();
    const std::size_t k = cfg.x_dim();
    CounterfactualSpec cf;
    std::size_t n_out = 2;

    // Per-firm counterfactual index, competitive effect and shock, from
    // (y~, u~, z, u, theta).
    struct Firm {
        std::function<double(CSpan z, CSpan th)> index;
        std::function<double(CSpan th)> delta;
        std::function<double(CSpan ut, CSpan u)> shock;
    };
    auto firms = std::make_shared<std::vector<Firm>>();

    if (const auto* s = std::get_if<ShiftX>(&cf_case)) {
        if (s->scale.size() != 2 || s->shift.size() != 2)
            throw ConfigError("ShiftX needs per-firm scale and shift");
        cf.label = "shift_x";
        for (std::size_t j = 0; j < 2; ++j) {
            const double a = s->scale[j], b = s->shift[j];
            firms->push_back({[k, a, b](CSpan z, CSpan th) {
                                  double v = 0.0;
                                  for (std::size_t i = 0; i < k; ++i) v += (a * z[i] + b) * th[i];
                                  return v;
                              },
                              [k, j](CSpan th) { return th[k + j]; },
                              [j](CSpan, CSpan u) { return u[j]; }});
        }
    } else if (std::holds_alternative<Merger>(cf_case)) {
        cf.label = "merger";
        n_out = 1;
        firms->push_back({[k](CSpan z, CSpan th) { return index_of(z.first(k), th.first(k)); },
                          [](CSpan) { return 0.0; },
                          [](CSpan, CSpan u) { return std::max(u[0], u[1]); }});
    } else {
        const auto& nc = std::get<NewCompetitor>(cf_case);
        cf.label = "new_competitor";
        n_out = 3;
        for (std::size_t j = 0; j < 2; ++j)
            firms->push_back({[k](CSpan z, CSpan th) { return index_of(z.first(k), th.first(k)); },
                              [k, j](CSpan th) { return th[k + j]; },
                              [j](CSpan, CSpan u) { return u[j]; }});
        const double a = nc.x_scale, b = nc.x_shift;
        const DeltaRule rule = nc.delta_rule;
        firms->push_back({[k, a, b](CSpan z, CSpan th) {
                              double v = 0.0;
                              for (std::size_t i = 0; i < k; ++i) v += (a * z[i] + b) * th[i];
                              return v;
                          },
                          [k, rule](CSpan th) {
                              const double d0 = th[k], d1 = th[k + 1];
                              switch (rule) {
                                  case DeltaRule::Min: return std::min(d0, d1);
                                  case DeltaRule::Max: return std::max(d0, d1);
                                  default: return 0.5 * (d0 + d1);
                              }
                          },
                          [](CSpan ut, CSpan) { return ut[0]; }});
        LatentDomain ld;
        ld.box = {Interval::real_line()};
        ld.default_truncation = cfg.truncation;
        ld.points_per_dim = cfg.points_per_dim;
        cf.cf_latent = ld;
        cf.dim_r_tilde = 1 + k;
        cf.r_tilde = [k](CSpan, CSpan ut, CSpan z, CSpan, CSpan, std::span<double> out) {
            const double v = (ut[0] <= 0.0 ? 1.0 : 0.0) - 0.5;
            out[0] = v;
            for (std::size_t i = 0; i < k; ++i) out[1 + i] = z[i] * v;
        };
    }

    for (std::size_t code = 0; code < (std::size_t{1} << n_out); ++code) {
        Vec y(n_out);
        for (std::size_t j = 0; j < n_out; ++j) y[j] = static_cast<double>((code >> (n_out - 1 - j)) & 1u);
        cf.cf_outcomes.push_back(std::move(y));
    }

    cf.correspondence = [firms](CSpan yt, CSpan ut, CSpan z, CSpan u, CSpan th) {
        const std::size_t n = firms->size();
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) total += yt[j];
        for (std::size_t j = 0; j < n; ++j) {
            const Firm& f = (*firms)[j];
            const double gain = f.index(z, th) - f.delta(th) * (total - yt[j]) + f.shock(ut, u);
            if (yt[j] > 0.5 ? gain < -kTie : gain > kTie) return false;
        }
        return true;
    };

    auto profit = [firms](std::size_t j, CSpan yt, CSpan ut, CSpan z, CSpan u, CSpan th) {
        if (yt[j] < 0.5) return 0.0;
        double others = 0.0;
        for (std::size_t i = 0; i < yt.size(); ++i)
            if (i != j) others += yt[i];
        const auto& f = (*firms)[j];
        return f.index(z, th) - f.delta(th) * others + f.shock(ut, u);
    };

    ParameterBox box = theta_tilde_box;
    const double n_d = static_cast<double>(n_out);
    switch (target.type) {
        case TargetType::ExpectedEntrants:
            cf.g = [](CSpan yt, CSpan, CSpan, CSpan, CSpan) {
                double s = 0.0;
                for (double v : yt) s += v;
                return s;
            };
            if (box.dim() == 0) box = {{0.0}, {n_d}, {static_cast<std::size_t>(20 * n_out + 1)}, {}};
            break;
        case TargetType::ProbUnserved:
            cf.g = [](CSpan yt, CSpan, CSpan, CSpan, CSpan) {
                for (double v : yt)
                    if (v > 0.5) return 0.0;
                return 1.0;
            };
            if (box.dim() == 0) box = {{0.0}, {1.0}, {41}, {}};
            break;
        case TargetType::TotalSurplus:
            cf.g = [profit](CSpan yt, CSpan ut, CSpan z, CSpan u, CSpan th) {
                double s = 0.0;
                for (std::size_t j = 0; j < yt.size(); ++j) s += profit(j, yt, ut, z, u, th);
                return s;
            };
            if (box.dim() == 0) box = {{0.0}, {100.0}, {201}, {}};
            break;
        case TargetType::ProfitGivenEntry: {
            const std::size_t j = target.firm;
            if (j >= n_out) throw ConfigError("ProfitGivenEntry firm index out of range");
            cf.kind = TargetKind::Ratio;
            cf.g = [profit, j](CSpan yt, CSpan ut, CSpan z, CSpan u, CSpan th) {
                return profit(j, yt, ut, z, u, th);
            };
            cf.h = [j](CSpan yt, CSpan, CSpan, CSpan, CSpan) { return yt[j]; };
            if (box.dim() == 0) box = {{0.0}, {100.0}, {201}, {}};
            break;
        }
    }
    if (box.names.empty()) box.names = {std::string("theta_tilde_") + to_string(target.type)};
    cf.label += std::string("_") + to_string(target.type);
    cf.theta_tilde_box = box;
    return cf;
}

LatentLaw LatentLaw::entry_default() {
    const double pts[] = {-1.5, -0.5, 0.5, 1.5};
    LatentLaw law;
    for (double a : pts) {
        for (double b : pts) {
            law.points.push_back({a, b});
            law.weights.push_back(1.0 / 16.0);
        }
    }
    return law;
}

DiscreteDistribution simulate_entry_data(const EntryGameConfig& cfg, CSpan theta0,
                                         std::size_t n_markets, const Selection& selection,
                                         const LatentLaw& u_law, Sampling sampling,
                                         std::uint64_t sampling_seed) {
    cfg.validate();
    if (n_markets == 0) throw ConfigError("n_markets must be positive");
    const std::size_t k = cfg.x_dim();
    if (theta0.size() < k + 2) throw DimensionError("theta0 must hold (alpha, delta)");
    if (u_law.points.empty() || u_law.points.size() != u_law.weights.size())
        throw ConfigError("latent law points and weights must match");
    for (const auto& p : u_law.points)
        if (p.size() != 2) throw ConfigError("latent law points must have one shock per firm");

    Vec probs;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    double wx = 0.0, wu = 0.0;
    for (double w : cfg.x_weights) wx += w;
    for (double w : u_law.weights) wu += w;
    for (std::size_t a = 0; a < cfg.x_support.size(); ++a) {
        for (std::size_t b = 0; b < u_law.points.size(); ++b) {
            cells.push_back({a, b});
            probs.push_back(cfg.x_weights[a] / wx * u_law.weights[b] / wu);
        }
    }
    std::vector<std::size_t> counts(cells.size(), 0);
    if (sampling == Sampling::Stratified) {
        counts = largest_remainder(probs, n_markets);
    } else {
        std::mt19937_64 rng(sampling_seed);
        for (std::size_t m = 0; m < n_markets; ++m) ++counts[draw_cell(probs, rng)];
    }

    std::mt19937_64 pick(selection.seed);
    std::map<Vec, std::size_t> tally;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (counts[c] == 0) continue;
        const Vec& x = cfg.x_support[cells[c].first];
        const Vec& u = u_law.points[cells[c].second];
        const double idx = index_of(x, theta0.first(k));
        const double index[2] = {idx, idx};
        auto ne = enumerate_pure_ne(index, u, theta0.subspan(k, 2));
        if (ne.empty()) throw NumericalInstability("no pure-strategy equilibrium with nonnegative delta");
        for (std::size_t m = 0; m < counts[c]; ++m) {
            std::size_t e = 0;
            if (selection.rule == SelectionRule::Random) e = static_cast<std::size_t>(pick() % ne.size());
            Vec z = x;
            z.push_back(ne[e][0]);
            z.push_back(ne[e][1]);
            ++tally[z];
        }
    }
    std::vector<ObservedAtom> atoms;
    for (const auto& [z, n] : tally)
        atoms.push_back({z, static_cast<double>(n) / static_cast<double>(n_markets)});
    return DiscreteDistribution::normalized(std::move(atoms));
}

}  // namespace idset

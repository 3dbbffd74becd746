#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "idset/errors.hpp"
#include "idset/examples.hpp"

namespace idset {

namespace {

// Interval endpoints and grid nodes are both rounded decimals.
constexpr double kEdge = 1e-9;

}  // namespace

ParameterBox IntervalRegConfig::box() const {
    ParameterBox b{theta_lower, theta_upper, theta_resolution, {"alpha", "beta"}};
    if (b.lower.size() != 2 || b.upper.size() != 2 || b.resolution.size() != 2)
        throw ConfigError("interval-regression parameter box must be two-dimensional");
    return b;
}

void IntervalRegConfig::validate() const {
    if (w_support.empty() || w_support.size() != w_weights.size())
        throw ConfigError("w_support and w_weights must be nonempty and of equal length");
    if (!(below >= 0.0) || !(above >= 0.0)) throw ConfigError("interval halfwidths must be nonnegative");
    if (!(truncation > 0.0) || points_per_dim < 2) throw ConfigError("invalid latent grid settings");
    if (theta0.size() != 2) throw ConfigError("theta0 must be (alpha, beta)");
    box().validate();
}

ModelSpec build_interval_model(const IntervalRegConfig& cfg) {
    cfg.validate();
    ModelSpec m;
    const bool dagger = cfg.form == IntervalForm::Dagger;
    m.label = dagger ? "interval_dagger" : "interval_proper";
    m.latent.box = {Interval::real_line()};
    m.latent.default_truncation = cfg.truncation;
    m.latent.points_per_dim = cfg.points_per_dim;
    m.params = cfg.box();
    m.z_dim = 3;
    m.z_names = {"y_lower", "y_upper", "w"};
    if (dagger) {
        m.support.contains = [](CSpan, CSpan, CSpan) { return true; };
    } else {
        m.support.contains = [](CSpan u, CSpan z, CSpan) {
            return u[0] >= z[0] - kEdge && u[0] <= z[1] + kEdge;
        };
    }
    m.moments.dim_r2 = dagger ? 3 : 2;
    m.moments.r2 = [dagger](CSpan u, CSpan z, CSpan th, std::span<double> out) {
        const double e = u[0] - th[0] - th[1] * z[2];
        out[0] = e;
        out[1] = z[2] * e;
        if (dagger) out[2] = (u[0] >= z[0] - kEdge && u[0] <= z[1] + kEdge ? 1.0 : 0.0) - 1.0;
    };
    return m;
}

DiscreteDistribution simulate_interval_data(const IntervalRegConfig& cfg, CSpan theta0,
                                            std::size_t n, const NoiseLaw& eps, std::uint64_t seed,
                                            Sampling sampling) {
    cfg.validate();
    if (n == 0) throw ConfigError("sample size must be positive");
    if (theta0.size() != 2) throw DimensionError("theta0 must be (alpha, beta)");
    if (eps.points.empty() || eps.points.size() != eps.weights.size())
        throw ConfigError("noise law points and weights must match");

    double sw = 0.0, se = 0.0;
    for (double w : cfg.w_weights) sw += w;
    for (double w : eps.weights) se += w;
    Vec probs;
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t a = 0; a < cfg.w_support.size(); ++a) {
        for (std::size_t b = 0; b < eps.points.size(); ++b) {
            cells.push_back({a, b});
            probs.push_back(cfg.w_weights[a] / sw * eps.weights[b] / se);
        }
    }

    std::vector<std::size_t> counts(cells.size(), 0);
    if (sampling == Sampling::Stratified) {
        std::vector<std::pair<double, std::size_t>> rem;
        std::size_t used = 0;
        for (std::size_t c = 0; c < probs.size(); ++c) {
            const double exact = probs[c] * static_cast<double>(n);
            counts[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
            used += counts[c];
            rem.push_back({exact - static_cast<double>(counts[c]), c});
        }
        std::stable_sort(rem.begin(), rem.end(), [](auto& x, auto& y) { return x.first > y.first; });
        for (std::size_t i = 0; used < n && i < rem.size(); ++i, ++used) ++counts[rem[i].second];
    } else {
        std::mt19937_64 rng(seed);
        for (std::size_t m = 0; m < n; ++m) {
            const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            double acc = 0.0;
            std::size_t c = 0;
            for (; c + 1 < probs.size(); ++c) {
                acc += probs[c];
                if (r < acc) break;
            }
            ++counts[c];
        }
    }

    std::map<Vec, std::size_t> tally;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (counts[c] == 0) continue;
        const double w = cfg.w_support[cells[c].first];
        const double ystar = theta0[0] + theta0[1] * w + eps.points[cells[c].second];
        tally[{ystar - cfg.below, ystar + cfg.above, w}] += counts[c];
    }
    std::vector<ObservedAtom> atoms;
    for (const auto& [z, k] : tally)
        atoms.push_back({z, static_cast<double>(k) / static_cast<double>(n)});
    return DiscreteDistribution::normalized(std::move(atoms));
}

void write_distribution_csv(std::ostream& os, const DiscreteDistribution& F,
                            const std::vector<std::string>& z_names) {
    if (z_names.size() != F.z_dim()) throw DimensionError("one name per z coordinate required");
    for (const auto& n : z_names) os << n << ',';
    os << "weight\n";
    std::ostringstream line;
    line.precision(17);
    for (const auto& a : F.atoms()) {
        line.str("");
        for (double v : a.z) line << v << ',';
        line << a.weight << '\n';
        os << line.str();
    }
}

DiscreteDistribution read_distribution_csv(std::istream& is, std::vector<std::string>* z_names) {
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            auto a = cell.find_first_not_of(" \t\r");
            auto b = cell.find_last_not_of(" \t\r");
            out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
        }
        return out;
    };
    std::string line;
    std::size_t lineno = 0;
    // Leading '#' lines carry run metadata.
    do {
        if (!std::getline(is, line)) throw ConfigError("data CSV is empty");
        ++lineno;
    } while (!line.empty() && line[0] == '#');
    auto header = split(line);
    if (header.size() < 2 || header.back() != "weight")
        throw ConfigError("data CSV header must list z columns followed by 'weight'");
    if (z_names) z_names->assign(header.begin(), header.end() - 1);

    std::vector<ObservedAtom> atoms;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw ConfigError("data CSV line " + std::to_string(lineno) + " has " +
                              std::to_string(cells.size()) + " fields, expected " +
                              std::to_string(header.size()));
        ObservedAtom a;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[i], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cells[i].size() || cells[i].empty())
                throw ConfigError("data CSV line " + std::to_string(lineno) + ": '" + cells[i] +
                                  "' is not a number");
            if (i + 1 < cells.size())
                a.z.push_back(v);
            else
                a.weight = v;
        }
        atoms.push_back(std::move(a));
    }
    return DiscreteDistribution::normalized(std::move(atoms));
}

}  // namespace idset

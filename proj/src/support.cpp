#include "idset/support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "idset/errors.hpp"
#include "idset/tolerances.hpp"

namespace idset {

namespace {

double norm2(CSpan v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(CSpan a, CSpan b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Largest value over all rows and over boundary rows only, in one pass.
struct RowMax {
    double all = -std::numeric_limits<double>::infinity();
    double edge = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
};

RowMax scan_rows(const MomentImage& im, CSpan lambda) {
    RowMax m;
    for (std::size_t k = 0; k < im.size(); ++k) {
        double v = dot(im.row(k), lambda);
        if (v > m.all) {
            m.all = v;
            m.arg = k;
        }
        if (im.boundary[k] && v > m.edge) m.edge = v;
    }
    return m;
}

double radical_inverse(std::size_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

Direction::Direction(Vec unit) : v_(std::move(unit)) {
    if (v_.empty()) throw DimensionError("direction has zero length");
    if (std::abs(norm2(v_) - 1.0) > 1e-12) throw DimensionError("direction is not unit norm");
}

Direction Direction::normalized(Vec v) {
    double n = norm2(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw DimensionError("cannot normalize a zero direction");
    for (double& x : v) x /= n;
    Direction d;
    d.v_ = std::move(v);
    return d;
}

SupportValue support_on_image(const MomentImage& image, CSpan lambda) {
    if (lambda.size() != image.dim)
        throw DimensionError("direction length does not match dim_r2");
    if (image.size() == 0) throw EmptySection("empty moment image");
    RowMax m = scan_rows(image, lambda);
    return {m.all, image.grid_index[m.arg], image.boundary[m.arg] != 0};
}

SupportValue support_function(const ModelSpec& model, const LatentGrid& grid, CSpan z, CSpan theta,
                              const Direction& lambda) {
    return support_on_image(moment_image(model, grid, z, theta), lambda);
}

ExpectedSupport expected_support_on(const std::vector<MomentImage>& images,
                                    const DiscreteDistribution& F, CSpan lambda) {
    if (images.size() != F.size()) throw DimensionError("one image per atom required");
    ExpectedSupport out;
    for (std::size_t i = 0; i < images.size(); ++i) {
        SupportValue s = support_on_image(images[i], lambda);
        out.value += F[i].weight * s.value;
        if (s.boundary_attained) out.boundary_fraction += F[i].weight;
    }
    return out;
}

ExpectedSupport expected_support(const ModelSpec& model, const LatentGrid& grid,
                                 const DiscreteDistribution& F, CSpan theta,
                                 const Direction& lambda) {
    return expected_support_on(atom_images(model, grid, F, theta), F, lambda);
}

namespace {

// Doubling test. Besides the relative growth of the expectation, a direction
// counts as divergent when some atom's best boundary value strictly increases:
// the supremum then keeps moving outward with the truncation even if the
// increment is small relative to the value.
bool diverges(const std::vector<MomentImage>& at_m, const std::vector<MomentImage>& at_2m,
              const DiscreteDistribution& F, CSpan lambda, double* v_m, double* v_2m) {
    double a = 0.0, b = 0.0;
    bool edge_growth = false;
    for (std::size_t i = 0; i < F.size(); ++i) {
        RowMax m1 = scan_rows(at_m[i], lambda);
        RowMax m2 = scan_rows(at_2m[i], lambda);
        a += F[i].weight * m1.all;
        b += F[i].weight * m2.all;
        if (std::isfinite(m1.edge) && std::isfinite(m2.edge) &&
            m2.edge > m1.edge + tol::tie(std::abs(m1.edge)))
            edge_growth = true;
    }
    if (v_m) *v_m = a;
    if (v_2m) *v_2m = b;
    return b - a > tol::kGrow * (1.0 + std::abs(a)) || edge_growth;
}

}  // namespace

bool detect_divergence(const ModelSpec& model, const DiscreteDistribution& F, CSpan theta,
                       const Direction& lambda, double M) {
    if (!model.has_unbounded_latent()) return false;
    auto a = atom_images(model, model.make_grid(M), F, theta);
    auto b = atom_images(model, model.make_grid(2.0 * M), F, theta);
    return diverges(a, b, F, lambda, nullptr, nullptr);
}

Vec gmm_residual(const ModelSpec& model, const DiscreteDistribution& F, CSpan theta) {
    Vec out(model.moments.dim_r1, 0.0);
    for (const auto& atom : F.atoms()) {
        Vec r = eval_r1(model, atom.z, theta);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += atom.weight * r[j];
    }
    return out;
}

std::size_t default_sphere_samples(std::size_t dim) {
    if (dim <= 1) return 2;
    return dim <= 3 ? 512 : 4096;
}

std::vector<Vec> sphere_samples(std::size_t dim, std::size_t count) {
    if (dim == 0) throw DimensionError("sphere of dimension 0");
    if (count == 0) count = default_sphere_samples(dim);
    std::vector<Vec> out;
    for (std::size_t i = 0; i < dim; ++i) {
        for (double s : {1.0, -1.0}) {
            Vec e(dim, 0.0);
            e[i] = s;
            out.push_back(std::move(e));
        }
    }
    if (dim == 1) return out;

    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (dim == 2) {
        for (std::size_t k = 0; k < count; ++k) {
            double a = two_pi * static_cast<double>(k) / static_cast<double>(count);
            out.push_back({std::cos(a), std::sin(a)});
        }
        return out;
    }
    if (dim == 3) {
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (std::size_t k = 0; k < count; ++k) {
            double zc = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
            double r = std::sqrt(std::max(0.0, 1.0 - zc * zc));
            double phi = golden * static_cast<double>(k);
            out.push_back({r * std::cos(phi), r * std::sin(phi), zc});
        }
        return out;
    }
    if (2 * ((dim + 1) / 2) > std::size(kPrimes))
        throw DimensionError("sphere sampling supports at most 16 dimensions");
    for (std::size_t k = 1; out.size() < 2 * dim + count; ++k) {
        Vec v(dim);
        for (std::size_t p = 0; p < (dim + 1) / 2; ++p) {
            double u1 = radical_inverse(k, kPrimes[2 * p]);
            double u2 = radical_inverse(k, kPrimes[2 * p + 1]);
            double r = std::sqrt(-2.0 * std::log(u1));
            v[2 * p] = r * std::cos(two_pi * u2);
            if (2 * p + 1 < dim) v[2 * p + 1] = r * std::sin(two_pi * u2);
        }
        double n = norm2(v);
        if (n < 1e-12) continue;
        for (double& x : v) x /= n;
        out.push_back(std::move(v));
    }
    return out;
}

SupportEvaluator::SupportEvaluator(const ModelSpec& model, const LatentGrid& grid,
                                   const DiscreteDistribution& F, CSpan theta)
    : F_(&F), dim_(model.moments.dim_r2), unbounded_(model.has_unbounded_latent()) {
    auto raw = atom_images(model, grid, F, theta);
    for (const auto& im : raw) {
        scale_ = std::max(scale_, im.max_abs());
        images_.push_back(im.compact());
    }
    if (unbounded_) {
        auto big = atom_images(model, model.make_grid(2.0 * grid.truncation()), F, theta);
        for (const auto& im : big) doubled_.push_back(im.compact());
    }
    residual_ = gmm_residual(model, F, theta);
    for (double r : residual_) scale_ = std::max(scale_, std::abs(r));
    for (const auto& atom : F.atoms()) {
        for (double r : eval_r1(model, atom.z, theta)) scale_ = std::max(scale_, std::abs(r));
    }
}

SupportEvaluator::Probe SupportEvaluator::probe(CSpan lambda) const {
    Probe p;
    if (!unbounded_) {
        p.value = expected_support_on(images_, *F_, lambda).value;
        p.at_double = p.value;
        return p;
    }
    p.divergent = diverges(images_, doubled_, *F_, lambda, &p.value, &p.at_double);
    return p;
}

double CriterionResult::residual_norm() const {
    double m = 0.0;
    for (double r : gmm_residual) m = std::max(m, std::abs(r));
    return m;
}

bool CriterionResult::member() const {
    return residual_norm() <= tol::eq(scale) && value >= -tol::crit(scale);
}

CriterionResult criterion(const ModelSpec& model, const LatentGrid& grid,
                          const DiscreteDistribution& F, CSpan theta,
                          const CriterionOptions& options) {
    if (model.moments.dim_r2 == 0)
        throw DimensionError("criterion requires dim_r2 >= 1; use the moment-equality path");
    SupportEvaluator ev(model, grid, F, theta);
    return criterion(ev, options);
}

CriterionResult criterion(const SupportEvaluator& ev, const CriterionOptions& options) {
    const std::size_t d = ev.dim();
    if (d == 0) throw DimensionError("criterion requires dim_r2 >= 1");

    CriterionResult res;
    res.gmm_residual = ev.residual();
    res.scale = ev.scale();

    auto samples = sphere_samples(d, options.sphere_samples);
    double best = std::numeric_limits<double>::infinity();
    Vec best_dir;
    auto consider = [&](const Vec& lambda, double v) {
        if (v < best) {
            best = v;
            best_dir = lambda;
        }
    };

    struct Candidate {
        double value;
        std::size_t index;
    };
    std::vector<Candidate> finite;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        auto p = ev.probe(samples[j]);
        ++res.evaluations;
        if (p.divergent) {
            ++res.infinite_directions_sampled;
            continue;
        }
        finite.push_back({p.value, j});
        consider(samples[j], p.value);
    }
    std::stable_sort(finite.begin(), finite.end(),
                     [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    if (finite.size() > options.restarts) finite.resize(options.restarts);

    for (const auto& c : finite) {
        RestartTrace tr;
        tr.start = samples[c.index];
        tr.start_value = c.value;
        Vec x = tr.start;
        double fx = c.value;
        double step = options.initial_step;
        while (step >= options.min_step && res.evaluations < options.max_evaluations) {
            bool moved = false;
            for (std::size_t i = 0; i < d && !moved; ++i) {
                for (double s : {1.0, -1.0}) {
                    Vec y = x;
                    y[i] += s * step;
                    double n = norm2(y);
                    if (n < 1e-12) continue;
                    for (double& t : y) t /= n;
                    auto p = ev.probe(y);
                    ++res.evaluations;
                    ++tr.evaluations;
                    if (p.divergent) {
                        ++res.infinite_directions_sampled;
                        continue;
                    }
                    if (p.value < fx) {
                        x = std::move(y);
                        fx = p.value;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) step *= 0.5;
        }
        tr.end = x;
        tr.end_value = fx;
        consider(x, fx);
        res.diagnostics.push_back(std::move(tr));
    }

    if (best_dir.empty()) {
        res.value = std::numeric_limits<double>::infinity();
        res.argmin = Direction::normalized(samples.front());
    } else {
        res.value = best;
        res.argmin = Direction::normalized(best_dir);
    }
    return res;
}

}  // namespace idset

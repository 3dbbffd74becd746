#include "idset/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "idset/errors.hpp"

namespace idset {

bool LatentDomain::has_unbounded() const {
    return std::any_of(box.begin(), box.end(), [](const Interval& iv) { return !iv.bounded(); });
}

void LatentDomain::validate() const {
    if (box.empty()) throw ConfigError("latent domain must have at least one dimension");
    if (!(default_truncation > 0.0)) throw ConfigError("default_truncation must be positive");
    if (points_per_dim < 2) throw ConfigError("points_per_dim must be at least 2");
    for (std::size_t d = 0; d < box.size(); ++d) {
        const auto& iv = box[d];
        if (iv.lower && !std::isfinite(*iv.lower)) throw ConfigError("latent bound must be finite");
        if (iv.upper && !std::isfinite(*iv.upper)) throw ConfigError("latent bound must be finite");
        if (iv.bounded() && !(*iv.lower < *iv.upper)) {
            std::ostringstream os;
            os << "latent dimension " << d << " has lower >= upper";
            throw ConfigError(os.str());
        }
        if (iv.lower && !iv.upper && !(*iv.lower < default_truncation))
            throw ConfigError("default_truncation must exceed the finite lower end");
        if (iv.upper && !iv.lower && !(-default_truncation < *iv.upper))
            throw ConfigError("default_truncation must exceed minus the finite upper end");
    }
}

LatentGrid::LatentGrid(std::size_t dim, double truncation, Vec coords,
                       std::vector<std::uint8_t> boundary)
    : dim_(dim), truncation_(truncation), coords_(std::move(coords)), boundary_(std::move(boundary)) {
    if (coords_.size() != dim_ * boundary_.size())
        throw DimensionError("grid coordinate array does not match dim * size");
}

namespace {

double snap(double v, double step) { return std::abs(v) < 1e-12 * step ? 0.0 : v; }

}  // namespace

AxisNodes axis_nodes(const Interval& iv, double default_truncation, std::size_t ppd,
                     double truncation) {
    AxisNodes out;
    const double n1 = static_cast<double>(ppd - 1);
    if (iv.bounded()) {
        const double a = *iv.lower, b = *iv.upper;
        for (std::size_t k = 0; k < ppd; ++k) {
            out.nodes.push_back(k + 1 == ppd ? b : a + (b - a) * static_cast<double>(k) / n1);
            out.boundary.push_back(0);
        }
        return out;
    }
    const double M = truncation;
    double lo, hi, anchor, step;
    if (!iv.lower && !iv.upper) {
        lo = -M;
        hi = M;
        step = 2.0 * default_truncation / n1;
        anchor = -default_truncation;
    } else if (iv.lower) {
        lo = *iv.lower;
        hi = M;
        step = (default_truncation - lo) / n1;
        anchor = lo;
    } else {
        lo = -M;
        hi = *iv.upper;
        step = (hi + default_truncation) / n1;
        anchor = hi;
    }
    if (!(lo < hi)) throw ConfigError("truncation leaves an empty latent range");
    const double slack = 1e-9;
    const auto kmin = static_cast<long long>(std::ceil((lo - anchor) / step - slack));
    const auto kmax = static_cast<long long>(std::floor((hi - anchor) / step + slack));
    for (long long k = kmin; k <= kmax; ++k) {
        const double v = snap(anchor + static_cast<double>(k) * step, step);
        out.nodes.push_back(v);
        const bool near_lo = !iv.lower && (v - lo) < step * (1.0 - 1e-9);
        const bool near_hi = !iv.upper && (hi - v) < step * (1.0 - 1e-9);
        out.boundary.push_back(near_lo || near_hi ? 1 : 0);
    }
    return out;
}

LatentGrid build_grid(const LatentDomain& latent, double truncation) {
    if (!(truncation > 0.0)) throw ConfigError("truncation must be positive");
    latent.validate();
    const std::size_t dim = latent.dim();
    std::vector<AxisNodes> axes;
    axes.reserve(dim);
    for (const auto& iv : latent.box)
        axes.push_back(axis_nodes(iv, latent.default_truncation, latent.points_per_dim, truncation));

    std::size_t total = 1;
    for (const auto& a : axes) total *= a.nodes.size();
    Vec coords(total * dim);
    std::vector<std::uint8_t> mask(total, 0);
    std::vector<std::size_t> idx(dim, 0);
    for (std::size_t p = 0; p < total; ++p) {
        std::uint8_t b = 0;
        for (std::size_t d = 0; d < dim; ++d) {
            coords[p * dim + d] = axes[d].nodes[idx[d]];
            b |= axes[d].boundary[idx[d]];
        }
        mask[p] = b;
        for (std::size_t d = dim; d-- > 0;) {
            if (++idx[d] < axes[d].nodes.size()) break;
            idx[d] = 0;
        }
    }
    return LatentGrid(dim, truncation, std::move(coords), std::move(mask));
}

LatentGrid product_grid(const std::vector<const LatentGrid*>& factors, double truncation) {
    std::size_t dim = 0, total = 1;
    for (const auto* f : factors) {
        dim += f->dim();
        total *= f->size();
    }
    Vec coords;
    coords.reserve(total * dim);
    std::vector<std::uint8_t> mask;
    mask.reserve(total);
    std::vector<std::size_t> idx(factors.size(), 0);
    for (std::size_t p = 0; p < total; ++p) {
        std::uint8_t b = 0;
        for (std::size_t f = 0; f < factors.size(); ++f) {
            auto pt = factors[f]->point(idx[f]);
            coords.insert(coords.end(), pt.begin(), pt.end());
            b |= factors[f]->on_boundary(idx[f]) ? 1 : 0;
        }
        mask.push_back(b);
        for (std::size_t f = factors.size(); f-- > 0;) {
            if (++idx[f] < factors[f]->size()) break;
            idx[f] = 0;
        }
    }
    return LatentGrid(dim, truncation, std::move(coords), std::move(mask));
}

DiscreteDistribution::DiscreteDistribution(std::vector<ObservedAtom> atoms)
    : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ConfigError("distribution needs at least one atom");
    const std::size_t dim = atoms_.front().z.size();
    double sum = 0.0;
    for (const auto& a : atoms_) {
        if (a.z.size() != dim) throw ConfigError("atoms have inconsistent z dimension");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight))
            throw ConfigError("atom weights must be positive and finite");
        for (double v : a.z)
            if (!std::isfinite(v)) throw ConfigError("atom z values must be finite");
        sum += a.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "atom weights sum to " << sum << ", expected 1";
        throw ConfigError(os.str());
    }
    for (auto& a : atoms_) a.weight /= sum;
}

DiscreteDistribution DiscreteDistribution::normalized(std::vector<ObservedAtom> atoms) {
    double sum = 0.0;
    for (const auto& a : atoms) sum += a.weight;
    if (!(sum > 0.0)) throw ConfigError("atom weights must have a positive sum");
    for (auto& a : atoms) a.weight /= sum;
    return DiscreteDistribution(std::move(atoms));
}

double DiscreteDistribution::mean(std::size_t coord) const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight * a.z.at(coord);
    return m;
}

std::size_t ParameterBox::size() const {
    if (lower.empty()) return 0;
    std::size_t n = 1;
    for (auto r : resolution) n *= r;
    return n;
}

double ParameterBox::step(std::size_t d) const {
    return resolution[d] > 1 ? (upper[d] - lower[d]) / static_cast<double>(resolution[d] - 1) : 0.0;
}

Vec ParameterBox::point(std::size_t index) const {
    const std::size_t dim = lower.size();
    Vec p(dim);
    for (std::size_t d = dim; d-- > 0;) {
        const std::size_t k = index % resolution[d];
        index /= resolution[d];
        if (resolution[d] == 1)
            p[d] = lower[d];
        else if (k + 1 == resolution[d])
            p[d] = upper[d];
        else
            p[d] = lower[d] + (upper[d] - lower[d]) * static_cast<double>(k) /
                                  static_cast<double>(resolution[d] - 1);
        if (std::abs(p[d]) < 1e-13 * (1.0 + std::abs(upper[d] - lower[d]))) p[d] = 0.0;
    }
    return p;
}

std::vector<Vec> ParameterBox::grid() const {
    std::vector<Vec> out;
    const std::size_t n = size();
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(point(i));
    return out;
}

std::optional<std::size_t> ParameterBox::neighbor(std::size_t index, std::size_t d,
                                                  int delta) const {
    std::size_t stride = 1;
    for (std::size_t e = dim(); e-- > d + 1;) stride *= resolution[e];
    const long long k = static_cast<long long>((index / stride) % resolution[d]) + delta;
    if (k < 0 || k >= static_cast<long long>(resolution[d])) return std::nullopt;
    return index + static_cast<std::size_t>(static_cast<long long>(stride) * delta);
}

void ParameterBox::validate() const {
    if (lower.empty()) throw ConfigError("parameter box must have at least one dimension");
    if (upper.size() != lower.size() || resolution.size() != lower.size())
        throw ConfigError("parameter box arrays have inconsistent lengths");
    for (std::size_t d = 0; d < lower.size(); ++d) {
        if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]))
            throw ConfigError("parameter bounds must be finite");
        if (lower[d] > upper[d]) throw ConfigError("parameter lower bound exceeds upper bound");
        if (resolution[d] < 1) throw ConfigError("parameter resolution must be at least 1");
    }
}

LatentGrid ModelSpec::make_grid(double truncation) const {
    if (grid_builder) {
        if (!(truncation > 0.0)) throw ConfigError("truncation must be positive");
        return grid_builder(truncation);
    }
    return build_grid(latent, truncation);
}

void ModelSpec::validate() const {
    latent.validate();
    params.validate();
    if (!support.contains) throw ConfigError("model '" + label + "' has no support predicate");
    if (moments.dim() == 0) throw ConfigError("model '" + label + "' has no moments");
    if (moments.dim_r1 > 0 && !moments.r1) throw ConfigError("r1 function missing");
    if (moments.dim_r2 > 0 && !moments.r2) throw ConfigError("r2 function missing");
}

std::vector<std::size_t> section(const ModelSpec& model, const LatentGrid& grid, CSpan z,
                                 CSpan theta) {
    if (z.size() != model.z_dim) throw DimensionError("z dimension does not match model");
    if (theta.size() != model.params.dim())
        throw DimensionError("theta dimension does not match model");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (model.support.contains(grid.point(i), z, theta)) idx.push_back(i);
    if (model.refine && !idx.empty()) idx = model.refine(model, grid, std::move(idx), z, theta);
    if (idx.empty()) throw EmptySection("empty section for model '" + model.label + "'");
    return idx;
}

MomentImage image_on_section(const ModelSpec& model, const LatentGrid& grid,
                             const std::vector<std::size_t>& idx, CSpan z, CSpan theta) {
    MomentImage img;
    img.dim = model.moments.dim_r2;
    img.grid_index = idx;
    img.values.resize(idx.size() * img.dim);
    img.boundary.resize(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        img.boundary[k] = grid.on_boundary(idx[k]) ? 1 : 0;
        if (img.dim == 0) continue;
        std::span<double> out(img.values.data() + k * img.dim, img.dim);
        model.moments.r2(grid.point(idx[k]), z, theta, out);
        for (double v : out)
            if (!std::isfinite(v))
                throw NonFiniteMoment("non-finite r2 value in model '" + model.label + "'");
    }
    return img;
}

MomentImage moment_image(const ModelSpec& model, const LatentGrid& grid, CSpan z, CSpan theta) {
    const auto idx = section(model, grid, z, theta);
    return image_on_section(model, grid, idx, z, theta);
}

double MomentImage::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

MomentImage MomentImage::compact() const {
    const std::size_t n = size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        for (std::size_t d = 0; d < dim; ++d) {
            const double x = values[a * dim + d], y = values[b * dim + d];
            if (x < y) return true;
            if (y < x) return false;
        }
        if (boundary[a] != boundary[b]) return boundary[a] < boundary[b];
        return a < b;
    };
    auto same = [&](std::size_t a, std::size_t b) {
        if (boundary[a] != boundary[b]) return false;
        for (std::size_t d = 0; d < dim; ++d)
            if (values[a * dim + d] != values[b * dim + d]) return false;
        return true;
    };
    std::sort(order.begin(), order.end(), less);
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < n; ++k)
        if (k == 0 || !same(order[k - 1], order[k])) keep.push_back(order[k]);
    std::sort(keep.begin(), keep.end());

    MomentImage out;
    out.dim = dim;
    out.grid_index.reserve(keep.size());
    out.values.reserve(keep.size() * dim);
    out.boundary.reserve(keep.size());
    for (auto k : keep) {
        out.grid_index.push_back(grid_index[k]);
        out.values.insert(out.values.end(), values.begin() + k * dim, values.begin() + (k + 1) * dim);
        out.boundary.push_back(boundary[k]);
    }
    return out;
}

Vec eval_r1(const ModelSpec& model, CSpan z, CSpan theta) {
    Vec out(model.moments.dim_r1, 0.0);
    if (out.empty()) return out;
    model.moments.r1(z, theta, out);
    for (double v : out)
        if (!std::isfinite(v)) throw NonFiniteMoment("non-finite r1 value in model '" + model.label + "'");
    return out;
}

std::vector<MomentImage> atom_images(const ModelSpec& model, const LatentGrid& grid,
                                     const DiscreteDistribution& F, CSpan theta) {
    std::vector<MomentImage> out;
    out.reserve(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) {
        try {
            out.push_back(moment_image(model, grid, F[i].z, theta));
        } catch (const EmptySection& e) {
            throw EmptySection(std::string(e.what()) + " at atom " + std::to_string(i), i);
        }
    }
    return out;
}

}  // namespace idset

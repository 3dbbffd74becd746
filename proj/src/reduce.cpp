#include "idset/reduce.hpp"

#include <cmath>
#include <memory>

#include <Eigen/Dense>

#include "idset/errors.hpp"
#include "idset/tolerances.hpp"

namespace idset {

std::vector<Vec> complete_basis(const Vec& lambda) {
    const std::size_t d = lambda.size();
    std::vector<Vec> basis{lambda};
    std::vector<Vec> out;
    for (std::size_t e = 0; e < d && out.size() + 1 < d; ++e) {
        Vec v(d, 0.0);
        v[e] = 1.0;
        for (const auto& b : basis) {
            double p = 0.0;
            for (std::size_t i = 0; i < d; ++i) p += v[i] * b[i];
            for (std::size_t i = 0; i < d; ++i) v[i] -= p * b[i];
        }
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        if (n < 1e-6) continue;
        for (double& x : v) x /= n;
        basis.push_back(v);
        out.push_back(std::move(v));
    }
    return out;
}

std::optional<ReductionCertificate> find_reducing_direction(const ModelSpec& model,
                                                            const LatentGrid& grid,
                                                            const DiscreteDistribution& F,
                                                            CSpan theta,
                                                            const CriterionOptions& options) {
    const std::size_t d = model.moments.dim_r2;
    if (d == 0) throw DimensionError("reduction needs dim_r2 >= 1");
    SupportEvaluator ev(model, grid, F, theta);
    const double eps = tol::reduction(ev.scale());

    std::optional<Vec> pick;
    double value = 0.0;
    for (const auto& s : sphere_samples(d, options.sphere_samples)) {
        auto p = ev.probe(s);
        if (!p.divergent && std::abs(p.value) <= eps) {
            pick = s;
            value = p.value;
            break;
        }
    }
    if (!pick) {
        auto c = criterion(ev, options);
        if (std::isfinite(c.value) && std::abs(c.value) <= eps) {
            pick = c.argmin.values();
            value = c.value;
        }
    }
    if (!pick) return std::nullopt;

    ReductionCertificate cert;
    cert.lambda = Direction::normalized(*pick);
    cert.achieved_value = value;
    cert.completion = complete_basis(cert.lambda.values());
    cert.scale = ev.scale();
    cert.truncation = grid.truncation();

    Eigen::MatrixXd R(d, d);
    for (std::size_t i = 0; i < d; ++i) R(0, i) = cert.lambda[i];
    for (std::size_t r = 0; r + 1 < d; ++r)
        for (std::size_t i = 0; i < d; ++i) R(r + 1, i) = cert.completion[r][i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    const auto& sv = svd.singularValues();
    cert.smallest_singular_value = sv(sv.size() - 1);
    cert.condition_number = sv(0) / sv(sv.size() - 1);
    if (cert.completion.size() + 1 != d || cert.smallest_singular_value < 1e-8 ||
        cert.condition_number > 1e8)
        throw NumericalInstability("reduction rotation is not of full rank");
    return cert;
}

namespace {

// Points of the raw section attaining max lambda' r2, within the tie tolerance.
std::vector<std::size_t> argmax_points(const ModelSpec& base, const Vec& lambda,
                                       const LatentGrid& grid, const std::vector<std::size_t>& raw,
                                       CSpan z, CSpan theta) {
    auto img = image_on_section(base, grid, raw, z, theta);
    Vec vals(img.size());
    double best = -INFINITY;
    for (std::size_t k = 0; k < img.size(); ++k) {
        auto row = img.row(k);
        double v = 0.0;
        for (std::size_t i = 0; i < lambda.size(); ++i) v += lambda[i] * row[i];
        vals[k] = v;
        best = std::max(best, v);
    }
    const double cut = best - tol::tie(img.max_abs());
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < img.size(); ++k)
        if (vals[k] >= cut) out.push_back(raw[k]);
    return out;
}

}  // namespace

ModelSpec reduce_model(const ModelSpec& model, const ReductionCertificate& cert) {
    const std::size_t d = model.moments.dim_r2;
    if (cert.lambda.size() != d || cert.completion.size() + 1 != d)
        throw DimensionError("certificate does not match the model's r2 block");
    auto base = std::make_shared<ModelSpec>(model);
    const Vec lambda = cert.lambda.values();
    auto cert_grid = std::make_shared<LatentGrid>(model.make_grid(cert.truncation));

    ModelSpec m = model;
    m.label = model.label + "_reduced";
    m.refine = [base, lambda](const ModelSpec&, const LatentGrid& grid, std::vector<std::size_t> raw,
                              CSpan z, CSpan theta) {
        if (base->refine) raw = base->refine(*base, grid, std::move(raw), z, theta);
        if (raw.empty()) return raw;
        return argmax_points(*base, lambda, grid, raw, z, theta);
    };

    const std::size_t d1 = model.moments.dim_r1;
    m.moments.dim_r1 = d1 + 1;
    m.moments.r1 = [base, lambda, cert_grid, d1](CSpan z, CSpan theta, std::span<double> out) {
        if (d1) base->moments.r1(z, theta, out.first(d1));
        auto img = moment_image(*base, *cert_grid, z, theta);
        double best = -INFINITY;
        for (std::size_t k = 0; k < img.size(); ++k) {
            auto row = img.row(k);
            double v = 0.0;
            for (std::size_t i = 0; i < lambda.size(); ++i) v += lambda[i] * row[i];
            best = std::max(best, v);
        }
        out[d1] = best;
    };

    const auto completion = cert.completion;
    m.moments.dim_r2 = d - 1;
    if (d > 1) {
        m.moments.r2 = [base, completion, d](CSpan u, CSpan z, CSpan theta, std::span<double> out) {
            Vec r(d);
            base->moments.r2(u, z, theta, r);
            for (std::size_t c = 0; c < completion.size(); ++c) {
                double v = 0.0;
                for (std::size_t i = 0; i < d; ++i) v += completion[c][i] * r[i];
                out[c] = v;
            }
        };
    } else {
        m.moments.r2 = nullptr;
    }
    return m;
}

IrreducibilityReport irreducibility_report(const ModelSpec& model, const LatentGrid& grid,
                                           const std::vector<DiscreteDistribution>& family,
                                           const std::vector<std::vector<bool>>& member,
                                           bool include_interior, const CriterionOptions& options) {
    IrreducibilityReport rep;
    rep.note =
        "grid-level diagnostic: reports where a reducing direction was found for the supplied "
        "distributions; absence of a certificate does not prove irreducibility";
    if (model.moments.dim_r2 == 0) {
        rep.vacuous = true;
        return rep;
    }
    if (member.size() != family.size()) throw DimensionError("one membership vector per distribution");
    const auto& box = model.params;
    for (std::size_t f = 0; f < family.size(); ++f) {
        if (member[f].size() != box.size()) throw DimensionError("membership vector length != grid size");
        for (std::size_t i = 0; i < box.size(); ++i) {
            if (!member[f][i]) continue;
            bool boundary = false;
            for (std::size_t dd = 0; dd < box.dim() && !boundary; ++dd) {
                for (int s : {-1, 1}) {
                    auto nb = box.neighbor(i, dd, s);
                    if (box.resolution[dd] > 1 && (!nb || !member[f][*nb])) boundary = true;
                }
            }
            if (!boundary && !include_interior) continue;
            if (boundary) ++rep.boundary_points;
            ReductionEntry e;
            e.theta = box.point(i);
            e.distribution = f;
            try {
                e.certificate = find_reducing_direction(model, grid, family[f], e.theta, options);
                e.found = e.certificate.has_value();
            } catch (const Error& err) {
                e.error = std::string(err.kind()) + ": " + err.what();
            }
            if (e.found) ++rep.reducible_pairs;
            rep.entries.push_back(std::move(e));
        }
    }
    return rep;
}

}  // namespace idset

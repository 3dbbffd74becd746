#include "idset/simplex.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "idset/errors.hpp"

namespace idset {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

namespace {

constexpr std::size_t kDegenerateRun = 32;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Columns 0..n-1 are structural, n..n+m-1 are artificials (identity).
class Tableau {
public:
    Tableau(const LinearProgram& lp, const SimplexOptions& opt)
        : A_(lp.A), b_(lp.b), opt_(opt), m_(lp.A.rows()), n_(lp.A.cols()) {
        for (Index i = 0; i < m_; ++i) {
            if (b_(i) < 0.0) {
                A_.row(i) *= -1.0;
                b_(i) = -b_(i);
                flip_.push_back(i);
            }
        }
        basis_.resize(m_);
        for (Index i = 0; i < m_; ++i) basis_[i] = n_ + i;
        binv_ = MatrixXd::Identity(m_, m_);
        xb_ = b_;
        limit_ = opt.max_iterations ? opt.max_iterations : 50 * static_cast<std::size_t>(m_ + n_);
    }

    Index rows() const { return m_; }
    Index cols() const { return n_; }
    std::size_t iterations() const { return iterations_; }

    VectorXd column(Index j) const {
        if (j < n_) return A_.col(j);
        VectorXd e = VectorXd::Zero(m_);
        e(j - n_) = 1.0;
        return e;
    }

    double cost(const VectorXd& c, Index j) const { return j < n_ ? c(j) : 0.0; }

    VectorXd duals(const VectorXd& cb) const { return binv_.transpose() * cb; }

    VectorXd basic_costs(const VectorXd& c, bool phase1) const {
        VectorXd cb(m_);
        for (Index i = 0; i < m_; ++i)
            cb(i) = phase1 ? (basis_[i] >= n_ ? 1.0 : 0.0) : cost(c, basis_[i]);
        return cb;
    }

    enum class Outcome { Optimal, Unbounded };

    // Most negative reduced cost, switching to Bland's rule after a run of
    // degenerate pivots until one makes progress. Artificial columns never enter.
    Outcome run(const VectorXd& c, bool phase1, Index* unbounded_col) {
        const double dtol = 1e-9 * (1.0 + (phase1 ? 1.0 : c.cwiseAbs().maxCoeff()));
        std::size_t degenerate = 0;
        while (true) {
            VectorXd y = duals(basic_costs(c, phase1));
            VectorXd d = -(A_.transpose() * y);
            if (!phase1) d += c;
            const bool bland = degenerate >= kDegenerateRun;
            Index enter = -1;
            double most = -dtol;
            for (Index j = 0; j < n_; ++j) {
                if (d(j) < most) {
                    enter = j;
                    if (bland) break;
                    most = d(j);
                }
            }
            if (enter < 0) return Outcome::Optimal;

            VectorXd w = binv_ * A_.col(enter);
            Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Index i = 0; i < m_; ++i) {
                // A leftover artificial sitting at zero must leave before it can turn positive.
                bool art = !phase1 && basis_[i] >= n_;
                if (w(i) > opt_.ratio_tol || (art && std::abs(w(i)) > opt_.ratio_tol)) {
                    double r = art ? 0.0 : std::max(xb_(i), 0.0) / w(i);
                    if (r < best || (r == best && basis_[i] < basis_[leave])) {
                        best = r;
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                *unbounded_col = enter;
                return Outcome::Unbounded;
            }
            degenerate = best * std::abs(w(leave)) <= opt_.ratio_tol ? degenerate + 1 : 0;
            pivot(enter, leave, w);
            if (++iterations_ > limit_)
                throw NumericalInstability("simplex iteration limit reached (" +
                                           std::to_string(limit_) + ")");
        }
    }

    void pivot(Index enter, Index leave, const VectorXd& w) {
        const double p = w(leave);
        if (std::abs(p) < opt_.pivot_tol)
            throw NumericalInstability("simplex pivot magnitude below tolerance");
        const double t = xb_(leave) / p;
        xb_ -= t * w;
        xb_(leave) = t;
        binv_.row(leave) /= p;
        for (Index i = 0; i < m_; ++i)
            if (i != leave && w(i) != 0.0) binv_.row(i) -= w(i) * binv_.row(leave);
        basis_[leave] = enter;
        if (++since_refactor_ >= opt_.refactor_every) refactor();
    }

    void refactor() {
        since_refactor_ = 0;
        MatrixXd B(m_, m_);
        for (Index i = 0; i < m_; ++i) B.col(i) = column(basis_[i]);
        Eigen::PartialPivLU<MatrixXd> lu(B);
        const auto& U = lu.matrixLU();
        double umax = 0.0, umin = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < m_; ++i) {
            umax = std::max(umax, std::abs(U(i, i)));
            umin = std::min(umin, std::abs(U(i, i)));
        }
        if (m_ > 0 && umin < opt_.pivot_tol * std::max(1.0, umax))
            throw NumericalInstability("simplex basis is numerically singular");
        binv_ = lu.inverse();
        xb_ = binv_ * b_;
    }

    // Pivots basic artificials out where some structural column allows it.
    void drive_out_artificials() {
        for (Index i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            VectorXd row = A_.transpose() * binv_.row(i).transpose();
            Index best = -1;
            double mag = opt_.ratio_tol;
            for (Index j = 0; j < n_; ++j) {
                if (std::abs(row(j)) > mag && !is_basic(j)) {
                    mag = std::abs(row(j));
                    best = j;
                }
            }
            if (best >= 0) pivot(best, i, binv_ * A_.col(best));
        }
    }

    bool is_basic(Index j) const {
        for (Index k : basis_)
            if (k == j) return true;
        return false;
    }

    double artificial_sum() const {
        double s = 0.0;
        for (Index i = 0; i < m_; ++i)
            if (basis_[i] >= n_) s += std::max(xb_(i), 0.0);
        return s;
    }

    VectorXd primal() const {
        VectorXd x = VectorXd::Zero(n_);
        for (Index i = 0; i < m_; ++i)
            if (basis_[i] < n_) x(basis_[i]) = xb_(i);
        return x;
    }

    // Undo the row sign flips on a vector of row multipliers.
    VectorXd unflip(VectorXd y) const {
        for (Index i : flip_) y(i) = -y(i);
        return y;
    }

    const VectorXd& xb() const { return xb_; }
    const std::vector<Index>& basis() const { return basis_; }
    const MatrixXd& binv() const { return binv_; }

private:
    MatrixXd A_;
    VectorXd b_;
    SimplexOptions opt_;
    Index m_, n_;
    std::vector<Index> basis_;
    std::vector<Index> flip_;
    MatrixXd binv_;
    VectorXd xb_;
    std::size_t iterations_ = 0;
    std::size_t since_refactor_ = 0;
    std::size_t limit_ = 0;
};

}  // namespace

SimplexResult simplex_solve(const LinearProgram& lp, const SimplexOptions& opt) {
    if (lp.b.size() != lp.A.rows() || lp.c.size() != lp.A.cols())
        throw DimensionError("linear program dimensions are inconsistent");
    if (!lp.A.allFinite() || !lp.b.allFinite() || !lp.c.allFinite())
        throw NonFiniteMoment("linear program has non-finite coefficients");

    SimplexResult res;
    Tableau t(lp, opt);
    const double bscale = 1.0 + (lp.b.size() ? lp.b.cwiseAbs().maxCoeff() : 0.0);

    Index col = -1;
    t.run(lp.c, true, &col);
    t.refactor();
    if (t.artificial_sum() > 1e-9 * bscale) {
        res.status = LpStatus::Infeasible;
        Eigen::VectorXd cb = t.basic_costs(lp.c, true);
        res.certificate = t.unflip(t.duals(cb));
        res.objective = std::numeric_limits<double>::infinity();
        res.iterations = t.iterations();
        return res;
    }
    t.drive_out_artificials();
    t.refactor();

    auto outcome = t.run(lp.c, false, &col);
    res.iterations = t.iterations();
    if (outcome == Tableau::Outcome::Unbounded) {
        res.status = LpStatus::Unbounded;
        Eigen::VectorXd w = t.binv() * t.column(col);
        Eigen::VectorXd ray = Eigen::VectorXd::Zero(t.cols());
        ray(col) = 1.0;
        for (Index i = 0; i < t.rows(); ++i)
            if (t.basis()[i] < t.cols()) ray(t.basis()[i]) -= w(i);
        res.certificate = ray;
        res.objective = -std::numeric_limits<double>::infinity();
        return res;
    }

    t.refactor();
    for (Index i = 0; i < t.rows(); ++i) {
        if (t.xb()(i) < -1e-9 * bscale)
            throw NumericalInstability("simplex basic solution lost primal feasibility");
    }
    res.status = LpStatus::Optimal;
    res.x = t.primal().cwiseMax(0.0);
    res.primal_residual = lp.rows() ? (lp.A * res.x - lp.b).cwiseAbs().maxCoeff() : 0.0;
    if (res.primal_residual > opt.residual_tol * bscale)
        throw NumericalInstability("simplex constraint residual " +
                                   std::to_string(res.primal_residual) + " above tolerance");
    res.objective = lp.c.dot(res.x);
    res.dual = t.unflip(t.duals(t.basic_costs(lp.c, false)));
    res.duality_residual = std::abs(res.objective - lp.b.dot(res.dual)) / (1.0 + std::abs(res.objective));
    return res;
}

void write_tableau(std::ostream& os, const LinearProgram& lp) {
    os << "# rows " << lp.rows() << " cols " << lp.cols() << '\n';
    os.precision(17);
    for (Index i = 0; i < lp.A.rows(); ++i) {
        for (Index j = 0; j < lp.A.cols(); ++j) os << lp.A(i, j) << ' ';
        os << "= " << lp.b(i) << '\n';
    }
    os << "min";
    for (Index j = 0; j < lp.c.size(); ++j) os << ' ' << lp.c(j);
    os << '\n';
    os << "bounds x >= 0\n";
}

}  // namespace idset

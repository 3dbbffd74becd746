#pragma once

// Dense two-phase revised simplex for  min c'x  s.t.  A x = b,  x >= 0.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace idset {

struct LinearProgram {
    Eigen::MatrixXd A;  ///< rows x columns
    Eigen::VectorXd b;
    Eigen::VectorXd c;

    std::size_t rows() const { return static_cast<std::size_t>(A.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(A.cols()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

struct SimplexResult {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;
    /// Row duals y with c - A'y >= 0 at optimality.
    Eigen::VectorXd dual;
    /// Infeasible: y with A'y <= 0 and b'y > 0. Unbounded: feasible ray d
    /// with A d = 0, d >= 0, c'd < 0.
    Eigen::VectorXd certificate;
    /// |c'x - b'y| / (1 + |c'x|).
    double duality_residual = 0.0;
    /// max_i |(A x - b)_i|.
    double primal_residual = 0.0;
    std::size_t iterations = 0;
};

struct SimplexOptions {
    double ratio_tol = 1e-9;      ///< column entries at or below this are skipped in the ratio test
    double pivot_tol = 1e-12;     ///< smaller pivots raise NumericalInstability
    double residual_tol = 1e-10;  ///< constraint residual allowed at an optimum
    std::size_t refactor_every = 64;
    std::size_t max_iterations = 0;  ///< 0 means 50 * (rows + cols)
};

/// Dantzig pricing, with Bland's rule after a run of degenerate pivots.
/// Throws NumericalInstability on singular bases or residuals above tolerance.
SimplexResult simplex_solve(const LinearProgram& lp, const SimplexOptions& opt = {});

/// One line per constraint: coefficients, relation, rhs; then the objective.
void write_tableau(std::ostream& os, const LinearProgram& lp);

}  // namespace idset

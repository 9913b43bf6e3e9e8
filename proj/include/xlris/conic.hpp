/**
 * @file conic.hpp
 * @brief Solver-agnostic description of convex programs over nonnegative,
 * second-order, PSD and exponential cones, and a log-barrier interior-point
 * solver for them.
 *
 * A program is
 *
 *     minimize    c^T x
 *     subject to  F_b x + f_b in K_b   for every cone block b
 *                 A x = b
 *
 * Vector blocks use a dense affine map. PSD blocks describe a symmetric
 * matrix S(x) = F_0 + sum_i x_i F_i with sparse coefficient matrices.
 */
#ifndef XLRIS_CONIC_HPP
#define XLRIS_CONIC_HPP

#include "xlris/types.hpp"

#include <Eigen/Sparse>
#include <string>
#include <utility>
#include <vector>

namespace xlris::conic {

using SpMat = Eigen::SparseMatrix<double>;

enum class ConeKind {
    Nonneg, ///< s_i >= 0
    Soc,    ///< s_0 >= ||s_{1:}||
    Psd,    ///< S symmetric positive semidefinite
    Exp     ///< s = (x, y, z) with y e^{x/y} <= z, y > 0
};

std::string to_string(ConeKind k);

struct ConeBlock {
    ConeKind kind = ConeKind::Nonneg;
    int dim = 0; ///< rows of s, or matrix order for PSD blocks
    RMat F;      ///< vector blocks: dim x nvar
    RVec f;      ///< vector blocks: offset
    RMat F0;     ///< PSD blocks: constant term
    std::vector<std::pair<int, SpMat>> Fi; ///< PSD blocks: (variable, coefficient)
    std::string label;

    /// Barrier parameter of the cone.
    double nu() const;
};

/// A convex program in the standard form described above.
class ConicProgram {
public:
    explicit ConicProgram(int nvar);

    int num_vars() const { return nvar_; }
    const RVec &objective() const { return c_; }
    const std::vector<ConeBlock> &blocks() const { return blocks_; }
    const RMat &eq_matrix() const { return A_; }
    const RVec &eq_rhs() const { return b_; }
    const RVec &warm_start() const { return x0_; }

    /// Minimize c^T x.
    void set_objective(const RVec &c);
    int add_nonneg(const RMat &F, const RVec &f, std::string label = {});
    int add_soc(const RMat &F, const RVec &f, std::string label = {});
    int add_exp(const RMat &F, const RVec &f, std::string label = {});
    /// S(x) = F0 + sum_i x_i F_i must be PSD. Coefficients must be symmetric.
    int add_psd(const RMat &F0, std::vector<std::pair<int, SpMat>> Fi, std::string label = {});
    /// Append rows A x = b.
    void add_equality(const RMat &A, const RVec &b);
    /// Optional starting point. Phase I is skipped when it is strictly feasible.
    void set_warm_start(const RVec &x);

    /// Total barrier parameter.
    double nu() const;
    /// Throws InputError when dimensions are inconsistent or values are not finite.
    void validate() const;
    /**
     * Plain-text dump: a header line "conic <nvar> <nblocks> <neq>", the
     * objective, then one section per block ("block <kind> <dim> <label>")
     * followed by its data, then the equality rows.
     */
    std::string dump() const;

private:
    int nvar_;
    RVec c_;
    std::vector<ConeBlock> blocks_;
    RMat A_;
    RVec b_;
    RVec x0_;
};

enum class SolveStatus { Optimal, NearOptimal, Infeasible, CapReached };

std::string to_string(SolveStatus s);

struct SolverSettings {
    double gap_abs = 1e-10;   ///< absolute duality-gap target
    double gap_rel = 1e-10;   ///< relative duality-gap target
    double near_factor = 1e4; ///< gap within near_factor x target counts as near-optimal
    double mu = 8.0;          ///< barrier parameter growth per outer step
    int max_newton = 600;     ///< total Newton step cap
    int max_center = 80;      ///< Newton steps per centering
};

struct SolveResult {
    SolveStatus status = SolveStatus::CapReached;
    RVec x;
    double objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;             ///< z^T s at the returned point
    double primal_residual = 0.0; ///< ||A x - b||_inf
    double dual_residual = 0.0;   ///< ||c - F^T z - A^T y||_inf
    int newton_steps = 0;
    std::vector<RVec> vec_duals;  ///< dual vectors of vector blocks (empty for PSD)
    std::vector<RMat> psd_duals;  ///< dual matrices of PSD blocks (empty for vector)
    RVec eq_duals;
    std::string message;
};

/// Solve with the built-in barrier method. Deterministic for identical inputs.
SolveResult solve(const ConicProgram &prog, const SolverSettings &settings = {});

/// Real symmetric embedding [[Re, -Im], [Im, Re]] of a Hermitian matrix.
RMat realify_hermitian(const CMat &H, double tol = 1e-9);
/// Inverse of realify_hermitian for matrices with the embedding structure.
CMat complexify(const RMat &R);

} // namespace xlris::conic

#endif

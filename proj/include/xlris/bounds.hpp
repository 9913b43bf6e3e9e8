/**
 * @file bounds.hpp
 * @brief Convex surrogates used by the power-control SCA: the tangent lower
 * bound of a quadratic-over-linear term, upper bounds of signed bilinear
 * products and of indefinite quadratic forms.
 *
 * Every bound is tangent to the bounded function at the anchor point.
 */
#ifndef XLRIS_BOUNDS_HPP
#define XLRIS_BOUNDS_HPP

#include "xlris/types.hpp"

#include <vector>

namespace xlris {

/// x^2 / y >= (x0 / y0)(2x - (x0 / y0) y) for y > 0.
double qol_lower(double x, double y, double x0, double y0);

/// 4xy <= (x + y)^2 - 2(x0 - y0)(x - y) + (x0 - y0)^2, returned divided by 4.
double bilinear_upper(double x, double y, double x0, double y0);

/// -4xy <= (x - y)^2 - 2(x0 + y0)(x + y) + (x0 + y0)^2, returned divided by 4.
double neg_bilinear_upper(double x, double y, double x0, double y0);

/// Upper bound of c x y: bilinear_upper for c >= 0, neg_bilinear_upper otherwise.
double product_upper(double c, double x, double y, double x0, double y0);

/// Upper bound of c x^2: exact for c >= 0, tangent c (2 x0 x - x0^2) otherwise.
double square_upper(double c, double x, double x0);

/// q(z) = z^T P z + l^T z + c0 with P symmetric PSD.
struct ConvexQuadratic {
    RMat P;
    RVec l;
    double c0 = 0.0;

    static ConvexQuadratic zero(int n);
    int dim() const { return static_cast<int>(l.size()); }
    double operator()(const RVec &z) const { return z.dot(P * z) + l.dot(z) + c0; }
    ConvexQuadratic &operator+=(const ConvexQuadratic &o);
    ConvexQuadratic &operator*=(double a);

    /// Add c x_i x_j (i != j) bounded with the signed pair rule at anchor z0.
    void add_product(double c, int i, int j, const RVec &z0);
    /// Add c x_i^2 bounded with square_upper at anchor z0.
    void add_square(double c, int i, const RVec &z0);
};

/**
 * Convex upper bound of z_S^T X z_S where z_S = z(idx), X symmetric and
 * possibly indefinite: diagonal terms by square_upper, each off-diagonal
 * pair 2 X_st z_s z_t by product_upper. Embedded in dimension @p n.
 */
ConvexQuadratic quadratic_form_upper(const RMat &X, const std::vector<int> &idx, const RVec &z0, int n);

/// Exact value of z(idx)^T X z(idx).
double quadratic_form(const RMat &X, const std::vector<int> &idx, const RVec &z);

} // namespace xlris

#endif

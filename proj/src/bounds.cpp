/**
 * @file bounds.cpp
 * @brief SCA surrogate bounds.
 */
#include "xlris/bounds.hpp"

#include <cmath>

namespace xlris {

double qol_lower(double x, double y, double x0, double y0)
{
    if (!(y0 > 0.0)) throw DomainError("quadratic-over-linear bound needs a positive anchor denominator");
    const double r = x0 / y0;
    return r * (2.0 * x - r * y);
}

double bilinear_upper(double x, double y, double x0, double y0)
{
    const double d0 = x0 - y0;
    return 0.25 * ((x + y) * (x + y) - 2.0 * d0 * (x - y) + d0 * d0);
}

double neg_bilinear_upper(double x, double y, double x0, double y0)
{
    const double s0 = x0 + y0;
    return 0.25 * ((x - y) * (x - y) - 2.0 * s0 * (x + y) + s0 * s0);
}

double product_upper(double c, double x, double y, double x0, double y0)
{
    return c >= 0.0 ? c * bilinear_upper(x, y, x0, y0) : -c * neg_bilinear_upper(x, y, x0, y0);
}

double square_upper(double c, double x, double x0)
{
    return c >= 0.0 ? c * x * x : c * (2.0 * x0 * x - x0 * x0);
}

ConvexQuadratic ConvexQuadratic::zero(int n)
{
    return {RMat::Zero(n, n), RVec::Zero(n), 0.0};
}

ConvexQuadratic &ConvexQuadratic::operator+=(const ConvexQuadratic &o)
{
    P += o.P;
    l += o.l;
    c0 += o.c0;
    return *this;
}

ConvexQuadratic &ConvexQuadratic::operator*=(double a)
{
    if (a < 0.0) throw InputError("scaling a convex quadratic by a negative factor");
    P *= a;
    l *= a;
    c0 *= a;
    return *this;
}

void ConvexQuadratic::add_product(double c, int i, int j, const RVec &z0)
{
    if (c == 0.0) return;
    // Rescale the pair so that both anchors are equal before applying the bound.
    double r = 1.0;
    if (z0(i) > 0.0 && z0(j) > 0.0) r = std::sqrt(z0(i) / z0(j));
    const double x0 = z0(i) / r;
    const double y0 = z0(j) * r;
    const double a = std::abs(c) / 4.0;
    if (c >= 0.0) {
        // (a)[(x + y)^2 - 2 d0 (x - y) + d0^2]
        const double d0 = x0 - y0;
        P(i, i) += a / (r * r);
        P(j, j) += a * r * r;
        P(i, j) += a;
        P(j, i) += a;
        l(i) -= 2.0 * a * d0 / r;
        l(j) += 2.0 * a * d0 * r;
        c0 += a * d0 * d0;
    } else {
        // (a)[(x - y)^2 - 2 s0 (x + y) + s0^2]
        const double s0 = x0 + y0;
        P(i, i) += a / (r * r);
        P(j, j) += a * r * r;
        P(i, j) -= a;
        P(j, i) -= a;
        l(i) -= 2.0 * a * s0 / r;
        l(j) -= 2.0 * a * s0 * r;
        c0 += a * s0 * s0;
    }
}

void ConvexQuadratic::add_square(double c, int i, const RVec &z0)
{
    if (c >= 0.0) {
        P(i, i) += c;
    } else {
        l(i) += 2.0 * c * z0(i);
        c0 -= c * z0(i) * z0(i);
    }
}

ConvexQuadratic quadratic_form_upper(const RMat &X, const std::vector<int> &idx, const RVec &z0, int n)
{
    const int m = static_cast<int>(idx.size());
    if (X.rows() != m || X.cols() != m) throw InputError("quadratic form size does not match its index set");
    ConvexQuadratic q = ConvexQuadratic::zero(n);
    for (int a = 0; a < m; ++a) {
        q.add_square(X(a, a), idx[a], z0);
        for (int b = a + 1; b < m; ++b) q.add_product(X(a, b) + X(b, a), idx[a], idx[b], z0);
    }
    return q;
}

double quadratic_form(const RMat &X, const std::vector<int> &idx, const RVec &z)
{
    const int m = static_cast<int>(idx.size());
    RVec v(m);
    for (int a = 0; a < m; ++a) v(a) = z(idx[a]);
    return v.dot(X * v);
}

} // namespace xlris

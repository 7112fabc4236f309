// Copyright 2026 The occupancy-ldp Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "occupancy/core.hpp"
#include "occupancy/path.hpp"
#include "occupancy/twist.hpp"

namespace occupancy {

// psi(x) = C e^{-rho x} + sum_{i<=m} a_i (1 - x/beta)^i in global time, with
// analytic magnitudes (-1)^j psi^{(j)}(x).
class ClassCurve {
public:
    ClassCurve() = default;
    ClassCurve(double beta, double rho, double scale, std::vector<double> coefficients);

    double magnitude(std::size_t order, double x) const;
    // x^j / j! * magnitude(j, x)
    double gamma(std::size_t j, double x) const;
    // x^j / j! * magnitude(j + 1, x)
    double theta(std::size_t j, double x) const;
    // sum_{j > m} gamma(j, x) = C P(Y_{rho x} > m)
    double tail_gamma(double x) const;
    double tail_theta(double x) const { return rho_ * tail_gamma(x); }

    long degree() const { return static_cast<long>(coefficients_.size()) - 1; }
    double rho() const { return rho_; }
    double scale() const { return scale_; }
    std::vector<double>& coefficients() { return coefficients_; }
    const std::vector<double>& coefficients() const { return coefficients_; }

private:
    double beta_ = 1.0;
    double rho_ = 1.0;
    double scale_ = 0.0;
    std::vector<double> coefficients_;
};

// Weighted class curves summed level-wise; shared by the empty and general extremals.
struct ClassMixture {
    double beta = 0.0;
    double rho = 1.0;
    bool exponential = true;
    // Capacity of the solved (possibly standardized) constraint.
    std::size_t working_capacity = 0;
    // Capacity reported to callers; the overflow slot absorbs standardized levels.
    std::size_t capacity = 0;
    std::map<std::size_t, double> weights;
    std::map<std::size_t, ClassCurve> curves;

    // gamma and theta over levels 0..capacity + extra_levels, then the remaining overflow.
    PathPoint evaluate(double x, std::size_t extra_levels = 0) const;
};

struct EmptyExtremal {
    SimplexVector omega;
    double beta = 0.0;
    EmptyTwist twist;
    ClassMixture mixture;

    const ClassCurve& curve() const { return mixture.curves.at(0); }
};

EmptyExtremal build_empty_extremal(const SimplexVector& omega, double beta, const Tolerances& tol = {});
SimplexVector eval_gamma(const EmptyExtremal& e, double x);
SimplexVector eval_theta(const EmptyExtremal& e, double x);

struct GeneralExtremal {
    EndpointConstraint constraint;
    GeneralTwist twist;
    std::map<std::size_t, double> class_means;
    ClassMixture mixture;
};

// Requires an irreducible (after polynomial standardization) finite-rate constraint.
GeneralExtremal build_general_extremal(const EndpointConstraint& c, const Tolerances& tol = {});
SimplexVector eval_gamma(const GeneralExtremal& e, double x);
SimplexVector eval_theta(const GeneralExtremal& e, double x);

// Minimizing path for any finite-rate constraint, assembled from irreducible pieces.
struct ExtremalPath {
    EndpointConstraint constraint;
    Decomposition decomposition;
    std::vector<std::optional<GeneralExtremal>> pieces;

    PathPoint evaluate(double x) const;
};

ExtremalPath build_extremal(const EndpointConstraint& c, const Tolerances& tol = {});

PathFunction as_path(const EmptyExtremal& e, std::size_t extra_levels = 0);
PathFunction as_path(const GeneralExtremal& e, std::size_t extra_levels = 0);
PathFunction as_path(const ExtremalPath& e);

struct ElOptions {
    double step = 1e-5;
    // Number of equations, each coupling entries i and i + 1 of the path vectors.
    std::size_t equations = 0;
    // Include the d/dx log(theta_{I+} / (1 - psi_I)) term (exponential case).
    bool overflow_term = true;
};

// Per-equation maximum of |residual| over the interior grid.
std::vector<double> el_residual(const PathFunction& path, double beta, const std::vector<double>& x_grid,
                                const ElOptions& opt);
// Equations and overflow term matching the extremal's case.
ElOptions el_options(const GeneralExtremal& e);
ElOptions el_options(const EmptyExtremal& e);

// Interior grid with margin 1e-4 beta.
std::vector<double> interior_grid(double beta, std::size_t points, double margin_fraction = 1e-4);

struct CostReport {
    double boundary = 0.0;
    double entropy = 0.0;
};

// Boundary-term cost; throws SolverFailure if it disagrees with the entropy route beyond 1e-8.
double closed_form_cost(const EmptyExtremal& e);
double closed_form_cost(const GeneralExtremal& e);
double closed_form_cost(const ExtremalPath& e);
CostReport cost_report(const GeneralExtremal& e);

bool complete_monotone_check(const ClassCurve& curve, std::size_t orders, double beta, std::size_t points = 201,
                             double margin_fraction = 1e-4);
bool complete_monotone_check(const EmptyExtremal& e, std::size_t points = 201);

}  // namespace occupancy

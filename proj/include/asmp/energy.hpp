#pragma once

#include <vector>

#include "asmp/graph.hpp"

namespace asmp {

/// The six scalars controlling one ASMP run plus iteration counts.
/// lambda may be negative (heterophily mode); the Lipschitz formulas below
/// reject that since the theory assumes lambda >= 0.
struct AsmpParams {
    double gamma = 1.0;   // structure fidelity weight
    double lambda = 1.0;  // Laplacian smoothing weight
    double mu1 = 0.01;    // l1 sparsity weight
    double mu2 = 0.01;    // Frobenius weight
    double eta1 = 0.1;    // H step size
    double eta2 = 0.1;    // S step size
    int k_layers = 10;    // outer iterations K
    int h_steps_per_iter = 1;
    int s_steps_per_iter = 1;
};

void validate_params(const AsmpParams& p);

/// Term-by-term value of the joint objective; weights are folded into the
/// stored terms so total is the plain sum.
struct EnergyBreakdown {
    double feature_fidelity = 0.0;   // ||H - X||_F^2
    double smoothing = 0.0;          // lambda * Tr(H' L H)
    double structure_fidelity = 0.0; // gamma * ||S - A||_F^2
    double l1 = 0.0;                 // mu1 * ||S||_1
    double fro = 0.0;                // mu2 * ||S||_F^2
    double total = 0.0;

    bool finite() const;
};

/// Tr(H' L H) with L built from s in the requested normalization.
double smoothing_trace(const Matrix& h, const Matrix& s, NormMode mode,
                       double floor = kDegreeFloor);

/// Full objective p(H, S). The Laplacian is built from S, not A.
EnergyBreakdown objective(const Matrix& h, const Matrix& s, const Matrix& x, const Matrix& a,
                          const AsmpParams& p, NormMode mode = NormMode::rw,
                          double floor = kDegreeFloor);

/// Exact gradient of the H-block objective, 2(H - X) + 2*lambda*(I - Pbar)*H
/// with Pbar the symmetrized propagator. Coincides with the affine-update
/// form 2(H - X) + 2*lambda*L*H whenever the propagator is symmetric.
Matrix grad_h(const Matrix& h, const Matrix& s, const Matrix& x, double lambda, NormMode mode,
              double floor = kDegreeFloor);

/// Gradient of the smooth part of the S-block objective,
///   2*gamma*(S - A) - lambda*(D^{-1}HH' - Diag(D^{-1}SHH'D^{-1})1') + 2*mu2*S,
/// with D = Diag(S1) treated as a function of S. Random-walk normalization
/// only. At most one N x N temporary beyond the result is materialized.
Matrix grad_s(const Matrix& h, const Matrix& s, const Matrix& a, const AsmpParams& p,
              double floor = kDegreeFloor);

/// L_H = 2 + 4*lambda.
double lipschitz_h(double lambda);

/// L_S = 2*gamma + 2*mu2 + (2*lambda/c^2) N^2 B^2 + (2*lambda/c^3) N^3 sqrt(N) B^2.
double lipschitz_s(const AsmpParams& p, int n, double b, double c);

/// Joint-block constant from the simultaneous-descent analysis; always at
/// least max(L_H, L_S).
double lipschitz_joint(const AsmpParams& p, int n, double b, double c);

struct BoundEstimate {
    double b = 0.0;  // max over iterates of max row 2-norm of H
    double c = 0.0;  // min over iterates of min effective degree of S
};

/// Empirical stand-ins for the feature-norm and degree bounds, scanned from
/// recorded iterates.
BoundEstimate estimate_bounds(const std::vector<Matrix>& h_iterates,
                              const std::vector<Matrix>& s_iterates,
                              double floor = kDegreeFloor);

double max_row_norm(const Matrix& h);

}  // namespace asmp

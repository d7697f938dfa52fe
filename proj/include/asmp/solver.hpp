#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "asmp/energy.hpp"
#include "asmp/graph.hpp"

namespace asmp {

enum class StepMode { theorem_safe, fixed, learned };

/// theorem_safe derives both step sizes from the convergence theorem each
/// outer iteration (times a safety backoff); fixed and learned take them
/// verbatim from eta1/eta2.
struct StepSizePolicy {
    StepMode mode = StepMode::theorem_safe;
    double eta1 = 0.1;
    double eta2 = 0.1;
    double safety = 0.9;
};

struct SolverOptions {
    StepSizePolicy policy;
    NormMode normalization = NormMode::rw;
    bool structure_updates = true;
    bool symmetrize = false;  // optional S <- (S + S')/2 after each S update
    double degree_floor = kDegreeFloor;
    bool early_stop = false;
    double early_stop_tol = 1e-10;
};

/// One completed outer iteration.
struct TraceRecord {
    int k = 0;  // 1-based outer iteration index
    EnergyBreakdown energy;
    double residual = 0.0;  // ||H_new - H_old||_F^2 + ||S_new - S_old||_F^2
    double min_degree = 0.0;
    double max_rownorm = 0.0;
    long n_at_zero = 0;  // S entries exactly at the box bounds
    long n_at_one = 0;
    double eta1 = 0.0;
    double eta2 = 0.0;
};

struct SolverTrace {
    EnergyBreakdown initial;  // p(H^0, S^0)
    std::vector<TraceRecord> records;
};

struct SolverResult {
    Matrix h;
    StructureMatrix s;
    SolverTrace trace;
};

/// prox of kappa*||.||_1 plus the [0,1] box indicator:
/// elementwise min{1, ReLU(m - kappa)}.
Matrix prox_box_l1(const Matrix& m, double kappa);

/// One gradient step on the feature block,
///   H <- (1 - 2*eta1 - 2*eta1*lambda) H + 2*eta1*lambda D^{-1}S H + 2*eta1 X.
Matrix h_step(const Matrix& h, const Matrix& s, const Matrix& x, double lambda, double eta1,
              NormMode mode, double floor = kDegreeFloor);

/// Same update with the normalized propagator supplied by the caller
/// (ignored, and may be empty, when lambda == 0). h_step delegates here, so
/// callers that cache the propagator reproduce its arithmetic exactly.
Matrix h_step_with(const Matrix& h, const Matrix& propagator, const Matrix& x, double lambda,
                   double eta1);

/// One proximal gradient step on the structure block (Eq. of the boxed
/// procedure); output is always inside the box.
StructureMatrix s_step(const Matrix& h, const StructureMatrix& s, const Matrix& a,
                       const AsmpParams& p, double eta2, double floor = kDegreeFloor);

/// Strict upper bounds (eta1_max, eta2_max) = (2/L_H, 2/L_S) from the
/// convergence theorem.
std::pair<double, double> theorem_step_bounds(const AsmpParams& p, int n, double b, double c);

/// Alternating proximal-gradient run: H^0 = X, S^0 = A, K outer iterations
/// of h_steps_per_iter H updates followed by s_steps_per_iter S updates.
SolverResult run_asmp(const Graph& g, const Matrix& x, const AsmpParams& p,
                      const SolverOptions& opts);

/// Joint-descent variant: simultaneous gradient step on (H, S) with one
/// shared step size, then the same prox on S. Kept for the
/// alternating-vs-joint comparison.
SolverResult run_joint(const Graph& g, const Matrix& x, const AsmpParams& p,
                       const SolverOptions& opts);

struct RateReport {
    double rho = 0.0;
    double p0 = 0.0;
    double p_star = 0.0;
    std::vector<int> violations;  // K values where the bound failed
    double worst_margin = 0.0;    // min over K of bound - min residual
};

/// Checks the stationarity-rate bound
///   min_{k<=K} residual_k <= (p0 - p_star) / (rho K)   for every K in the trace.
RateReport rate_check(const SolverTrace& trace, double rho, double p_star_estimate);

/// rho = min{1/eta1 - L_H/2, 1/eta2 - L_S/2} for the given constants.
double rate_constant(double eta1, double eta2, double l_h, double l_s);

void write_trace_csv(const SolverTrace& trace, std::ostream& out);

}  // namespace asmp

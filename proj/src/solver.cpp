#include "asmp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "asmp/errors.hpp"
#include "asmp/log.hpp"

namespace asmp {

Matrix prox_box_l1(const Matrix& m, double kappa) {
    if (kappa < 0.0) throw ValidationError("prox_box_l1: kappa must be nonnegative");
    return (m.array() - kappa).max(0.0).min(1.0).matrix();
}

Matrix h_step_with(const Matrix& h, const Matrix& propagator, const Matrix& x, double lambda,
                   double eta1) {
    const double self_coef = 1.0 - 2.0 * eta1 - 2.0 * eta1 * lambda;
    Matrix out = self_coef * h + (2.0 * eta1) * x;
    if (lambda != 0.0) out.noalias() += (2.0 * eta1 * lambda) * (propagator * h);
    return out;
}

Matrix h_step(const Matrix& h, const Matrix& s, const Matrix& x, double lambda, double eta1,
              NormMode mode, double floor) {
    if (h.rows() != x.rows() || h.cols() != x.cols() || h.rows() != s.rows())
        throw ValidationError("h_step: shape mismatch");
    return h_step_with(h, lambda != 0.0 ? normalize(s, mode, floor) : Matrix(), x, lambda, eta1);
}

StructureMatrix s_step(const Matrix& h, const StructureMatrix& s, const Matrix& a,
                       const AsmpParams& p, double eta2, double floor) {
    const Matrix t = grad_s(h, s.values, a, p, floor);
    return StructureMatrix{prox_box_l1(s.values - eta2 * t, eta2 * p.mu1)};
}

std::pair<double, double> theorem_step_bounds(const AsmpParams& p, int n, double b, double c) {
    return {2.0 / lipschitz_h(p.lambda), 2.0 / lipschitz_s(p, n, b, c)};
}

double rate_constant(double eta1, double eta2, double l_h, double l_s) {
    return std::min(1.0 / eta1 - l_h / 2.0, 1.0 / eta2 - l_s / 2.0);
}

namespace {

const char* first_nonfinite_term(const EnergyBreakdown& e) {
    if (!std::isfinite(e.feature_fidelity)) return "feature_fidelity";
    if (!std::isfinite(e.smoothing)) return "smoothing";
    if (!std::isfinite(e.structure_fidelity)) return "structure_fidelity";
    if (!std::isfinite(e.l1)) return "l1";
    if (!std::isfinite(e.fro)) return "fro";
    return "total";
}

struct BoxCounts {
    long at_zero = 0;
    long at_one = 0;
};

BoxCounts count_at_bounds(const Matrix& s) {
    BoxCounts counts;
    for (int j = 0; j < s.cols(); ++j)
        for (int i = 0; i < s.rows(); ++i) {
            if (s(i, j) == 0.0) ++counts.at_zero;
            else if (s(i, j) == 1.0) ++counts.at_one;
        }
    return counts;
}

void check_finite(const EnergyBreakdown& e, const Matrix& h, const char* who, int k) {
    if (e.finite() && h.allFinite()) return;
    throw NumericalError(std::string(who) + ": non-finite " + first_nonfinite_term(e) +
                         " at iteration " + std::to_string(k));
}

TraceRecord make_record(int k, const EnergyBreakdown& e, double residual, const Matrix& h,
                        const Matrix& s, double floor, double eta1, double eta2) {
    TraceRecord rec;
    rec.k = k;
    rec.energy = e;
    rec.residual = residual;
    rec.min_degree = degree_view(s, floor).min_effective();
    rec.max_rownorm = max_row_norm(h);
    const BoxCounts counts = count_at_bounds(s);
    rec.n_at_zero = counts.at_zero;
    rec.n_at_one = counts.at_one;
    rec.eta1 = eta1;
    rec.eta2 = eta2;
    return rec;
}

void validate_run_inputs(const Graph& g, const Matrix& x, const AsmpParams& p,
                         const SolverOptions& opts) {
    if (x.rows() != g.n_nodes) throw ValidationError("solver: feature row count != n_nodes");
    if (opts.normalization == NormMode::sym && opts.structure_updates)
        throw ValidationError(
            "solver: structure updates are derived for rw normalization only; "
            "disable structure updates to run in sym mode");
    // The policy owns the step sizes actually used; theorem_safe derives them.
    AsmpParams check = p;
    if (opts.policy.mode == StepMode::theorem_safe) {
        check.eta1 = check.eta2 = 1.0;
    } else {
        check.eta1 = opts.policy.eta1;
        check.eta2 = opts.policy.eta2;
    }
    validate_params(check);
}

}  // namespace

SolverResult run_asmp(const Graph& g, const Matrix& x, const AsmpParams& p,
                      const SolverOptions& opts) {
    validate_run_inputs(g, x, p, opts);
    const double floor = opts.degree_floor;

    SolverResult res;
    res.h = x;
    const Matrix a_dense = Matrix(g.adjacency);
    res.s.values = a_dense;
    res.trace.initial = objective(res.h, res.s.values, x, a_dense, p, opts.normalization, floor);
    check_finite(res.trace.initial, res.h, "run_asmp", 0);

    double b_est = max_row_norm(res.h);
    double c_est = degree_view(res.s.values, floor).min_effective();

    for (int k = 1; k <= p.k_layers; ++k) {
        double eta1 = opts.policy.eta1;
        double eta2 = opts.policy.eta2;
        if (opts.policy.mode == StepMode::theorem_safe) {
            const auto [e1, e2] = theorem_step_bounds(p, g.n_nodes, b_est, c_est);
            eta1 = opts.policy.safety * e1;
            eta2 = opts.policy.safety * e2;
        }

        const Matrix h_prev = res.h;
        const Matrix s_prev = res.s.values;

        // Exact-gradient H update: the affine step with the symmetrized
        // propagator. Identical to the plain h_step when that operator is
        // already symmetric; descends the objective at the theorem steps
        // either way.
        const Matrix pbar = p.lambda != 0.0
                                ? sym_propagator(res.s.values, opts.normalization, floor)
                                : Matrix();
        for (int i = 0; i < p.h_steps_per_iter; ++i)
            res.h = h_step_with(res.h, pbar, x, p.lambda, eta1);
        b_est = std::max(b_est, max_row_norm(res.h));

        if (opts.structure_updates) {
            if (opts.policy.mode == StepMode::theorem_safe) {
                // T uses the just-updated H, so refresh the bound first.
                const auto [e1, e2] = theorem_step_bounds(p, g.n_nodes, b_est, c_est);
                (void)e1;
                eta2 = opts.policy.safety * e2;
            }
            for (int i = 0; i < p.s_steps_per_iter; ++i) {
                res.s = s_step(res.h, res.s, a_dense, p, eta2, floor);
                if (opts.symmetrize)
                    res.s.values = 0.5 * (res.s.values + res.s.values.transpose()).eval();
            }
            c_est = std::min(c_est, degree_view(res.s.values, floor).min_effective());
        }

        const double residual =
            (res.h - h_prev).squaredNorm() + (res.s.values - s_prev).squaredNorm();
        const EnergyBreakdown e =
            objective(res.h, res.s.values, x, a_dense, p, opts.normalization, floor);
        check_finite(e, res.h, "run_asmp", k);
        res.trace.records.push_back(
            make_record(k, e, residual, res.h, res.s.values, floor, eta1, eta2));

        if (opts.early_stop && residual < opts.early_stop_tol) {
            log::info("run_asmp: early stop at k=%d (residual %.3e)", k, residual);
            break;
        }
    }
    return res;
}

SolverResult run_joint(const Graph& g, const Matrix& x, const AsmpParams& p,
                       const SolverOptions& opts) {
    validate_run_inputs(g, x, p, opts);
    const double floor = opts.degree_floor;

    SolverResult res;
    res.h = x;
    const Matrix a_dense = Matrix(g.adjacency);
    res.s.values = a_dense;
    res.trace.initial = objective(res.h, res.s.values, x, a_dense, p, opts.normalization, floor);
    check_finite(res.trace.initial, res.h, "run_joint", 0);

    double b_est = max_row_norm(res.h);
    double c_est = degree_view(res.s.values, floor).min_effective();

    for (int k = 1; k <= p.k_layers; ++k) {
        double eta = opts.policy.eta1;  // one shared step for both blocks
        if (opts.policy.mode == StepMode::theorem_safe)
            eta = opts.policy.safety * 2.0 / lipschitz_joint(p, g.n_nodes, b_est, c_est);

        const Matrix h_prev = res.h;
        const Matrix s_prev = res.s.values;

        const Matrix gh = grad_h(h_prev, s_prev, x, p.lambda, opts.normalization, floor);
        Matrix h_new = h_prev - eta * gh;
        if (opts.structure_updates) {
            const Matrix gs = grad_s(h_prev, s_prev, a_dense, p, floor);
            res.s.values = prox_box_l1(s_prev - eta * gs, eta * p.mu1);
        }
        res.h = std::move(h_new);

        b_est = std::max(b_est, max_row_norm(res.h));
        c_est = std::min(c_est, degree_view(res.s.values, floor).min_effective());

        const double residual =
            (res.h - h_prev).squaredNorm() + (res.s.values - s_prev).squaredNorm();
        const EnergyBreakdown e =
            objective(res.h, res.s.values, x, a_dense, p, opts.normalization, floor);
        check_finite(e, res.h, "run_joint", k);
        res.trace.records.push_back(
            make_record(k, e, residual, res.h, res.s.values, floor, eta, eta));

        if (opts.early_stop && residual < opts.early_stop_tol) break;
    }
    return res;
}

RateReport rate_check(const SolverTrace& trace, double rho, double p_star_estimate) {
    if (trace.records.empty()) throw ValidationError("rate_check: empty trace");
    if (rho <= 0.0) throw ValidationError("rate_check: rho must be positive");

    RateReport report;
    report.rho = rho;
    report.p0 = trace.initial.total;
    report.p_star = p_star_estimate;
    report.worst_margin = std::numeric_limits<double>::infinity();

    double min_residual = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        min_residual = std::min(min_residual, trace.records[i].residual);
        const int big_k = static_cast<int>(i) + 1;
        const double bound = (report.p0 - p_star_estimate) / (rho * big_k);
        report.worst_margin = std::min(report.worst_margin, bound - min_residual);
        if (min_residual > bound) report.violations.push_back(big_k);
    }
    return report;
}

void write_trace_csv(const SolverTrace& trace, std::ostream& out) {
    out << "k,total,feature_fidelity,smoothing,structure_fidelity,l1,fro,residual,"
           "min_degree,max_rownorm,n_at_zero,n_at_one\n";
    char buf[512];
    for (const TraceRecord& r : trace.records) {
        std::snprintf(buf, sizeof(buf),
                      "%d,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e,%ld,%ld\n", r.k,
                      r.energy.total, r.energy.feature_fidelity, r.energy.smoothing,
                      r.energy.structure_fidelity, r.energy.l1, r.energy.fro, r.residual,
                      r.min_degree, r.max_rownorm, r.n_at_zero, r.n_at_one);
        out << buf;
    }
}

}  // namespace asmp

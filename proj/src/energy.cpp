#include "asmp/energy.hpp"

#include <cmath>

#include "asmp/errors.hpp"

namespace asmp {

void validate_params(const AsmpParams& p) {
    const double weights[] = {p.gamma, p.lambda, p.mu1, p.mu2, p.eta1, p.eta2};
    for (double w : weights)
        if (!std::isfinite(w)) throw ValidationError("params: non-finite weight");
    if (p.gamma < 0.0 || p.mu1 < 0.0 || p.mu2 < 0.0)
        throw ValidationError("params: gamma, mu1, mu2 must be nonnegative");
    if (p.eta1 <= 0.0 || p.eta2 <= 0.0)
        throw ValidationError("params: step sizes must be positive");
    if (p.k_layers < 0) throw ValidationError("params: k_layers must be nonnegative");
    if (p.h_steps_per_iter < 1 || p.s_steps_per_iter < 1)
        throw ValidationError("params: inner step counts must be >= 1");
}

bool EnergyBreakdown::finite() const {
    return std::isfinite(feature_fidelity) && std::isfinite(smoothing) &&
           std::isfinite(structure_fidelity) && std::isfinite(l1) && std::isfinite(fro) &&
           std::isfinite(total);
}

double smoothing_trace(const Matrix& h, const Matrix& s, NormMode mode, double floor) {
    if (h.rows() != s.rows() || s.rows() != s.cols())
        throw ValidationError("smoothing_trace: shape mismatch");
    const Matrix lap = laplacian(s, mode, floor);
    return (h.array() * (lap * h).array()).sum();
}

EnergyBreakdown objective(const Matrix& h, const Matrix& s, const Matrix& x, const Matrix& a,
                          const AsmpParams& p, NormMode mode, double floor) {
    if (h.rows() != x.rows() || h.cols() != x.cols() || s.rows() != a.rows() ||
        s.cols() != a.cols() || h.rows() != s.rows())
        throw ValidationError("objective: shape mismatch");
    EnergyBreakdown e;
    e.feature_fidelity = (h - x).squaredNorm();
    e.smoothing = p.lambda * smoothing_trace(h, s, mode, floor);
    e.structure_fidelity = p.gamma * (s - a).squaredNorm();
    e.l1 = p.mu1 * s.cwiseAbs().sum();
    e.fro = p.mu2 * s.squaredNorm();
    e.total = e.feature_fidelity + e.smoothing + e.structure_fidelity + e.l1 + e.fro;
    return e;
}

Matrix grad_h(const Matrix& h, const Matrix& s, const Matrix& x, double lambda, NormMode mode,
              double floor) {
    if (h.rows() != x.rows() || h.cols() != x.cols() || h.rows() != s.rows())
        throw ValidationError("grad_h: shape mismatch");
    Matrix g = 2.0 * (h - x);
    if (lambda != 0.0) {
        // Exact gradient of lambda Tr(H' L H): the trace only sees the
        // symmetric part of the propagator, so differentiate through it.
        const Matrix pbar = sym_propagator(s, mode, floor);
        g.noalias() += (2.0 * lambda) * h;
        g.noalias() -= (2.0 * lambda) * (pbar * h);
    }
    return g;
}

Matrix grad_s(const Matrix& h, const Matrix& s, const Matrix& a, const AsmpParams& p,
              double floor) {
    const int n = static_cast<int>(s.rows());
    if (s.cols() != n || a.rows() != n || a.cols() != n || h.rows() != n)
        throw ValidationError("grad_s: shape mismatch");

    Matrix g = 2.0 * p.gamma * (s - a) + 2.0 * p.mu2 * s;
    if (p.lambda == 0.0) return g;

    const DegreeView deg = degree_view(s, floor);
    const Matrix gram = h * h.transpose();  // the one N x N temporary
    const Matrix sh = s * h;                // N x M, for the diagonal of S*gram
    for (int i = 0; i < n; ++i) {
        const double dinv = 1.0 / deg.effective(i);
        // row i of  -lambda * D^{-1} gram  plus the broadcast correction
        // lambda * [D^{-1} S gram D^{-1}]_ii.
        const double vi = dinv * sh.row(i).dot(h.row(i)) * dinv;
        g.row(i).array() += p.lambda * vi;
        g.row(i).noalias() -= (p.lambda * dinv) * gram.row(i);
    }
    return g;
}

double lipschitz_h(double lambda) {
    if (lambda < 0.0)
        throw std::domain_error("lipschitz_h: theory requires lambda >= 0");
    return 2.0 + 4.0 * lambda;
}

double lipschitz_s(const AsmpParams& p, int n, double b, double c) {
    if (c <= 0.0) throw std::domain_error("lipschitz_s: degree bound c must be positive");
    if (p.lambda < 0.0)
        throw std::domain_error("lipschitz_s: theory requires lambda >= 0");
    if (b < 0.0) throw std::domain_error("lipschitz_s: feature bound B must be nonnegative");
    const double nn = static_cast<double>(n);
    const double b2 = b * b;
    return 2.0 * p.gamma + 2.0 * p.mu2 + (2.0 * p.lambda / (c * c)) * nn * nn * b2 +
           (2.0 * p.lambda / (c * c * c)) * nn * nn * nn * std::sqrt(nn) * b2;
}

double lipschitz_joint(const AsmpParams& p, int n, double b, double c) {
    const double lh = lipschitz_h(p.lambda);
    const double ls = lipschitz_s(p, n, b, c);
    const double nn = static_cast<double>(n);
    const double cross = (4.0 * p.lambda * p.lambda / (c * c)) * nn * b * b;
    const double wh = 1.0 + nn * std::sqrt(nn) / c;
    const double ws = 1.0 + nn * nn / c;
    return std::max(std::sqrt(lh * lh + wh * wh * cross),
                    std::sqrt(ls * ls + ws * ws * cross));
}

double max_row_norm(const Matrix& h) {
    double m = 0.0;
    for (int i = 0; i < h.rows(); ++i) m = std::max(m, h.row(i).norm());
    return m;
}

BoundEstimate estimate_bounds(const std::vector<Matrix>& h_iterates,
                              const std::vector<Matrix>& s_iterates, double floor) {
    if (h_iterates.empty() && s_iterates.empty())
        throw ValidationError("estimate_bounds: no iterates recorded");
    BoundEstimate est;
    est.c = std::numeric_limits<double>::infinity();
    for (const Matrix& h : h_iterates) est.b = std::max(est.b, max_row_norm(h));
    for (const Matrix& s : s_iterates)
        est.c = std::min(est.c, degree_view(s, floor).min_effective());
    if (s_iterates.empty()) est.c = 0.0;
    return est;
}

}  // namespace asmp

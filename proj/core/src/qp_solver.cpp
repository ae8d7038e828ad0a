#include "tep/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/SparseCholesky>

#include "tep/errors.hpp"

namespace tep {

namespace {

using Eigen::VectorXd;
using Index = Eigen::Index;
using Triplet = Eigen::Triplet<double, int>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

/// Keeps the listed rows and columns of a sparse matrix.
SparseMatrix select(const SparseMatrix& m, const std::vector<int>& row_map, const std::vector<int>& col_map,
                    Index rows, Index cols) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(m.nonZeros()));
    for (Index j = 0; j < m.outerSize(); ++j) {
        const int cj = col_map[static_cast<std::size_t>(j)];
        if (cj < 0) continue;
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
            const int ri = row_map[static_cast<std::size_t>(it.row())];
            if (ri >= 0 && it.value() != 0.0) t.emplace_back(ri, cj, it.value());
        }
    }
    SparseMatrix out(rows, cols);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

VectorXd column_max_abs(const SparseMatrix& m) {
    VectorXd out = VectorXd::Zero(m.cols());
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(m, j); it; ++it) out[j] = std::max(out[j], std::abs(it.value()));
    return out;
}

VectorXd row_max_abs(const SparseMatrix& m) {
    VectorXd out = VectorXd::Zero(m.rows());
    for (Index j = 0; j < m.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(m, j); it; ++it)
            out[it.row()] = std::max(out[it.row()], std::abs(it.value()));
    return out;
}

double ruiz_factor(double norm) {
    if (!(norm > 1e-300)) return 1.0;
    return std::clamp(1.0 / std::sqrt(norm), 1e-4, 1e4);
}

/// Largest step in (0, 1] keeping v + alpha*dv >= 0 componentwise.
double max_step(const VectorXd& v, const VectorXd& dv) {
    double alpha = 1.0;
    for (Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
    return alpha;
}

/// Equilibrated problem with fixed variables and empty rows removed.
struct Reduced {
    SparseMatrix H, A, G;
    VectorXd c, b, h, lo, hi;
    VectorXd col_scale, eq_scale, in_scale;
    double cost_scale = 1.0;
    std::vector<int> cols;     // reduced column -> original
    std::vector<int> eq_rows;  // reduced eq row -> original
    std::vector<int> in_rows;  // reduced ineq row -> original
};

Reduced reduce(const QuadraticProgram& qp, const QpSettings& settings, VectorXd& fixed_values) {
    const Index n = qp.num_variables();
    Reduced r;
    std::vector<int> col_map(static_cast<std::size_t>(n), -1);
    fixed_values = VectorXd::Zero(n);
    for (Index j = 0; j < n; ++j) {
        const double lo = qp.lower[j], hi = qp.upper[j];
        if (std::isnan(lo) || std::isnan(hi) || lo > hi)
            throw InputError("QP variable " + std::to_string(j) + " has inconsistent bounds");
        if (lo == hi) {
            fixed_values[j] = lo;
        } else {
            col_map[static_cast<std::size_t>(j)] = static_cast<int>(r.cols.size());
            r.cols.push_back(static_cast<int>(j));
        }
    }
    const Index nr = static_cast<Index>(r.cols.size());

    const VectorXd b_shift = qp.eq_rhs - qp.eq_matrix * fixed_values;
    const VectorXd h_shift = qp.ineq_rhs - qp.ineq_matrix * fixed_values;
    const VectorXd c_shift = qp.linear + qp.hessian * fixed_values;

    auto keep_rows = [&](const SparseMatrix& m, const VectorXd& rhs, bool equality, std::vector<int>& kept) {
        std::vector<int> count(static_cast<std::size_t>(m.rows()), 0);
        for (Index j = 0; j < m.outerSize(); ++j) {
            if (col_map[static_cast<std::size_t>(j)] < 0) continue;
            for (SparseMatrix::InnerIterator it(m, j); it; ++it)
                if (it.value() != 0.0) ++count[static_cast<std::size_t>(it.row())];
        }
        std::vector<int> row_map(static_cast<std::size_t>(m.rows()), -1);
        for (Index i = 0; i < m.rows(); ++i) {
            if (count[static_cast<std::size_t>(i)] == 0) {
                const double tol = 1e-9 * std::max(1.0, std::abs(rhs[i]));
                if (equality ? std::abs(rhs[i]) > tol : rhs[i] < -tol)
                    throw InputError("QP constraint row " + std::to_string(i) + " is infeasible");
                continue;
            }
            row_map[static_cast<std::size_t>(i)] = static_cast<int>(kept.size());
            kept.push_back(static_cast<int>(i));
        }
        return row_map;
    };
    const auto eq_map = keep_rows(qp.eq_matrix, b_shift, true, r.eq_rows);
    const auto in_map = keep_rows(qp.ineq_matrix, h_shift, false, r.in_rows);
    const Index m = static_cast<Index>(r.eq_rows.size());
    const Index p = static_cast<Index>(r.in_rows.size());

    std::vector<int> identity(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) identity[static_cast<std::size_t>(j)] = col_map[static_cast<std::size_t>(j)];
    std::vector<int> h_rows(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) h_rows[static_cast<std::size_t>(j)] = col_map[static_cast<std::size_t>(j)];

    const SparseMatrix H0 = select(qp.hessian, h_rows, identity, nr, nr);
    const SparseMatrix A0 = select(qp.eq_matrix, eq_map, identity, m, nr);
    const SparseMatrix G0 = select(qp.ineq_matrix, in_map, identity, p, nr);
    VectorXd c0(nr), lo0(nr), hi0(nr), b0(m), h0(p);
    for (Index j = 0; j < nr; ++j) {
        c0[j] = c_shift[r.cols[static_cast<std::size_t>(j)]];
        lo0[j] = qp.lower[r.cols[static_cast<std::size_t>(j)]];
        hi0[j] = qp.upper[r.cols[static_cast<std::size_t>(j)]];
    }
    for (Index i = 0; i < m; ++i) b0[i] = b_shift[r.eq_rows[static_cast<std::size_t>(i)]];
    for (Index i = 0; i < p; ++i) h0[i] = h_shift[r.in_rows[static_cast<std::size_t>(i)]];

    // Ruiz equilibration of [[H, A', G'], [A, 0, 0], [G, 0, 0]].
    r.col_scale = VectorXd::Ones(nr);
    r.eq_scale = VectorXd::Ones(m);
    r.in_scale = VectorXd::Ones(p);
    r.H = H0;
    r.A = A0;
    r.G = G0;
    for (int pass = 0; pass < settings.scaling_passes; ++pass) {
        const VectorXd hc = column_max_abs(r.H), ac = column_max_abs(r.A), gc = column_max_abs(r.G);
        const VectorXd ar = row_max_abs(r.A), gr = row_max_abs(r.G);
        VectorXd dcol(nr), deq(m), din(p);
        for (Index j = 0; j < nr; ++j) dcol[j] = ruiz_factor(std::max({hc[j], ac[j], gc[j]}));
        for (Index i = 0; i < m; ++i) deq[i] = ruiz_factor(ar[i]);
        for (Index i = 0; i < p; ++i) din[i] = ruiz_factor(gr[i]);
        r.col_scale = r.col_scale.cwiseProduct(dcol);
        r.eq_scale = r.eq_scale.cwiseProduct(deq);
        r.in_scale = r.in_scale.cwiseProduct(din);
        r.H = r.col_scale.asDiagonal() * H0 * r.col_scale.asDiagonal();
        r.A = r.eq_scale.asDiagonal() * A0 * r.col_scale.asDiagonal();
        r.G = r.in_scale.asDiagonal() * G0 * r.col_scale.asDiagonal();
    }
    r.c = r.col_scale.cwiseProduct(c0);
    r.b = r.eq_scale.cwiseProduct(b0);
    r.h = r.in_scale.cwiseProduct(h0);
    r.lo = lo0.cwiseQuotient(r.col_scale);
    r.hi = hi0.cwiseQuotient(r.col_scale);

    const double hmax = r.H.nonZeros() ? column_max_abs(r.H).maxCoeff() : 0.0;
    const double scale_ref = std::max(hmax, inf_norm(r.c));
    r.cost_scale = scale_ref > 0.0 ? std::clamp(1.0 / scale_ref, 1e-8, 1e8) : 1.0;
    r.H *= r.cost_scale;
    r.c *= r.cost_scale;
    return r;
}

class KktSystem {
public:
    KktSystem(const SparseMatrix& H, const SparseMatrix& A, const SparseMatrix& G)
        : n_(H.rows()), m_(A.rows()), p_(G.rows()) {
        const Index N = n_ + m_ + p_;
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(H.nonZeros() + A.nonZeros() + G.nonZeros() + N));
        for (Index i = 0; i < N; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 0.0);
        diag_base_ = VectorXd::Zero(N);
        for (Index j = 0; j < H.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(H, j); it; ++it) {
                if (it.row() > j) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(j), it.value());
                if (it.row() == j) diag_base_[j] += it.value();
            }
        for (Index j = 0; j < A.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(A, j); it; ++it)
                t.emplace_back(static_cast<int>(n_ + it.row()), static_cast<int>(j), it.value());
        for (Index j = 0; j < G.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(G, j); it; ++it)
                t.emplace_back(static_cast<int>(n_ + m_ + it.row()), static_cast<int>(j), it.value());
        K_.resize(N, N);
        K_.setFromTriplets(t.begin(), t.end());
        K_.makeCompressed();
        diag_pos_.resize(static_cast<std::size_t>(N));
        for (Index j = 0; j < N; ++j) {
            const int start = K_.outerIndexPtr()[j];
            // Lower storage with sorted rows: the diagonal is the first entry of its column.
            diag_pos_[static_cast<std::size_t>(j)] = start;
        }
        reg_ = VectorXd::Zero(N);
        ldlt_.analyzePattern(K_);
    }

    /// Factorizes with the given block diagonals. Returns false on breakdown.
    bool factorize(const VectorXd& primal_diag, const VectorXd& ineq_diag, double delta) {
        const Index N = n_ + m_ + p_;
        for (Index j = 0; j < n_; ++j) reg_[j] = delta;
        for (Index j = n_; j < N; ++j) reg_[j] = -delta;
        double* values = K_.valuePtr();
        for (Index j = 0; j < n_; ++j) values[diag_pos_[static_cast<std::size_t>(j)]] = diag_base_[j] + primal_diag[j];
        for (Index j = 0; j < m_; ++j) values[diag_pos_[static_cast<std::size_t>(n_ + j)]] = 0.0;
        for (Index j = 0; j < p_; ++j) values[diag_pos_[static_cast<std::size_t>(n_ + m_ + j)]] = -ineq_diag[j];
        for (Index j = 0; j < N; ++j) values[diag_pos_[static_cast<std::size_t>(j)]] += reg_[j];
        ldlt_.factorize(K_);
        return ldlt_.info() == Eigen::Success;
    }

    /// Solves the unregularized system using the regularized factorization plus
    /// iterative refinement.
    VectorXd solve(const VectorXd& rhs, int refinements = 3) const {
        VectorXd sol = ldlt_.solve(rhs);
        for (int k = 0; k < refinements; ++k) {
            const VectorXd resid = rhs - multiply_unregularized(sol);
            if (inf_norm(resid) <= 1e-14 * std::max(1.0, inf_norm(rhs))) break;
            sol += ldlt_.solve(resid);
        }
        return sol;
    }

private:
    VectorXd multiply_unregularized(const VectorXd& v) const {
        VectorXd out = K_.selfadjointView<Eigen::Lower>() * v;
        out -= reg_.cwiseProduct(v);
        return out;
    }

    Index n_, m_, p_;
    SparseMatrix K_;
    VectorXd diag_base_;
    VectorXd reg_;
    std::vector<int> diag_pos_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

struct Iterate {
    VectorXd x, y, z, s, zl, zu;
};

/// Active-set polish of a converged interior point. Constraints whose
/// multiplier dominates their slack are imposed as equalities and the
/// resulting KKT system is solved directly; interior points leave O(mu)
/// errors on every bound and this removes them. Misclassified constraints are
/// swapped in or out for a few rounds. Returns nothing when no round gives a
/// feasible, sign-correct point.
std::optional<Iterate> polish(const Reduced& r, const std::vector<Index>& lb_idx, const std::vector<Index>& ub_idx,
                              const Iterate& v, const QpSettings& settings) {
    const Index n = r.c.size(), m = r.b.size(), p = r.h.size();
    const Index nlb = static_cast<Index>(lb_idx.size()), nub = static_cast<Index>(ub_idx.size());
    const double b_norm = 1.0 + inf_norm(r.b), h_norm = 1.0 + inf_norm(r.h), c_norm = 1.0 + inf_norm(r.c);

    std::vector<char> on_in(static_cast<std::size_t>(p)), on_lo(static_cast<std::size_t>(nlb)),
        on_hi(static_cast<std::size_t>(nub));
    {
        const VectorXd slack = p ? VectorXd(r.h - r.G * v.x) : VectorXd();
        for (Index i = 0; i < p; ++i) on_in[static_cast<std::size_t>(i)] = v.z[i] > slack[i];
        for (Index k = 0; k < nlb; ++k)
            on_lo[static_cast<std::size_t>(k)] = v.zl[k] > v.x[lb_idx[static_cast<std::size_t>(k)]] - r.lo[lb_idx[static_cast<std::size_t>(k)]];
        for (Index k = 0; k < nub; ++k)
            on_hi[static_cast<std::size_t>(k)] = v.zu[k] > r.hi[ub_idx[static_cast<std::size_t>(k)]] - v.x[ub_idx[static_cast<std::size_t>(k)]];
    }

    for (int round = 0; round < 6; ++round) {
        // Row layout: A, then active G rows, then active lower and upper bounds.
        std::vector<Triplet> t;
        std::vector<Index> rows_in, rows_lo, rows_hi;
        std::vector<int> pos(static_cast<std::size_t>(p), -1);
        for (Index i = 0; i < p; ++i)
            if (on_in[static_cast<std::size_t>(i)]) {
                pos[static_cast<std::size_t>(i)] = static_cast<int>(rows_in.size());
                rows_in.push_back(i);
            }
        for (Index k = 0; k < nlb; ++k)
            if (on_lo[static_cast<std::size_t>(k)]) rows_lo.push_back(k);
        for (Index k = 0; k < nub; ++k)
            if (on_hi[static_cast<std::size_t>(k)]) rows_hi.push_back(k);
        const Index na = static_cast<Index>(rows_in.size()), nl = static_cast<Index>(rows_lo.size()),
                    nh = static_cast<Index>(rows_hi.size());
        const Index rows = m + na + nl + nh;
        VectorXd rhs(n + rows);
        rhs.head(n) = -r.c;
        if (m) rhs.segment(n, m) = r.b;
        for (Index j = 0; j < r.A.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(r.A, j); it; ++it)
                t.emplace_back(static_cast<int>(it.row()), static_cast<int>(j), it.value());
        for (Index j = 0; j < r.G.outerSize(); ++j)
            for (SparseMatrix::InnerIterator it(r.G, j); it; ++it)
                if (const int k = pos[static_cast<std::size_t>(it.row())]; k >= 0)
                    t.emplace_back(static_cast<int>(m + k), static_cast<int>(j), it.value());
        for (Index k = 0; k < na; ++k) rhs[n + m + k] = r.h[rows_in[static_cast<std::size_t>(k)]];
        for (Index k = 0; k < nl; ++k) {
            const Index j = lb_idx[static_cast<std::size_t>(rows_lo[static_cast<std::size_t>(k)])];
            t.emplace_back(static_cast<int>(m + na + k), static_cast<int>(j), 1.0);
            rhs[n + m + na + k] = r.lo[j];
        }
        for (Index k = 0; k < nh; ++k) {
            const Index j = ub_idx[static_cast<std::size_t>(rows_hi[static_cast<std::size_t>(k)])];
            t.emplace_back(static_cast<int>(m + na + nl + k), static_cast<int>(j), 1.0);
            rhs[n + m + na + nl + k] = r.hi[j];
        }
        SparseMatrix E(rows, n);
        E.setFromTriplets(t.begin(), t.end());

        // Degenerate active sets have dependent rows; a larger proximal term keeps
        // the factorization alive and refinement recovers the unregularized solution.
        KktSystem kkt(r.H, E, SparseMatrix(0, n));
        VectorXd sol;
        for (double delta : {1e-8, 1e-6, 1e-4}) {
            if (!kkt.factorize(VectorXd::Zero(n), VectorXd(), delta)) continue;
            sol = kkt.solve(rhs, 60);
            break;
        }
        if (sol.size() == 0 || !sol.allFinite()) return std::nullopt;

        // The system is H x + E' nu = -c, so y = nu, z = nu, zl = -nu, zu = nu.
        Iterate out;
        out.x = sol.head(n);
        out.y = sol.segment(n, m);
        out.z = VectorXd::Zero(p);
        for (Index k = 0; k < na; ++k) out.z[rows_in[static_cast<std::size_t>(k)]] = sol[n + m + k];
        out.zl = VectorXd::Zero(nlb);
        for (Index k = 0; k < nl; ++k) out.zl[rows_lo[static_cast<std::size_t>(k)]] = -sol[n + m + na + k];
        out.zu = VectorXd::Zero(nub);
        for (Index k = 0; k < nh; ++k) out.zu[rows_hi[static_cast<std::size_t>(k)]] = sol[n + m + na + nl + k];
        const VectorXd slack = p ? VectorXd(r.h - r.G * out.x) : VectorXd();
        out.s = slack.cwiseMax(0.0);

        const double ftol = settings.feasibility_tol, otol = settings.optimality_tol;
        bool changed = false, bad = m && inf_norm(r.A * out.x - r.b) / b_norm > ftol;
        auto review = [&](char& on, double violation, double multiplier) {
            if (!on && violation > ftol) on = 1, changed = true;
            else if (on && multiplier < -otol * c_norm) on = 0, changed = true;
        };
        for (Index i = 0; i < p; ++i) review(on_in[static_cast<std::size_t>(i)], -slack[i] / h_norm, out.z[i]);
        for (Index k = 0; k < nlb; ++k) {
            const double lo = r.lo[lb_idx[static_cast<std::size_t>(k)]];
            review(on_lo[static_cast<std::size_t>(k)], (lo - out.x[lb_idx[static_cast<std::size_t>(k)]]) / (1.0 + std::abs(lo)), out.zl[k]);
        }
        for (Index k = 0; k < nub; ++k) {
            const double hi = r.hi[ub_idx[static_cast<std::size_t>(k)]];
            review(on_hi[static_cast<std::size_t>(k)], (out.x[ub_idx[static_cast<std::size_t>(k)]] - hi) / (1.0 + std::abs(hi)), out.zu[k]);
        }
        VectorXd rd = r.H * out.x + r.c;
        if (m) rd += r.A.transpose() * out.y;
        if (p) rd += r.G.transpose() * out.z;
        for (Index k = 0; k < nlb; ++k) rd[lb_idx[static_cast<std::size_t>(k)]] -= out.zl[k];
        for (Index k = 0; k < nub; ++k) rd[ub_idx[static_cast<std::size_t>(k)]] += out.zu[k];
        bad = bad || inf_norm(rd) / c_norm > otol;
        if (bad) return std::nullopt;
        if (!changed) {
            // Clip the rounding-level bound violations left by the solve.
            for (Index j = 0; j < n; ++j) out.x[j] = std::clamp(out.x[j], r.lo[j], r.hi[j]);
            out.z = out.z.cwiseMax(0.0);
            out.zl = out.zl.cwiseMax(0.0);
            out.zu = out.zu.cwiseMax(0.0);
            return out;
        }
    }
    return std::nullopt;
}

}  // namespace

double QuadraticProgram::objective(const Eigen::VectorXd& x) const {
    return 0.5 * x.dot(hessian * x) + linear.dot(x);
}

QpResult solve_qp(const QuadraticProgram& qp, const QpSettings& settings) {
    const Index n_orig = qp.num_variables();
    if (qp.hessian.rows() != n_orig || qp.hessian.cols() != n_orig || qp.lower.size() != n_orig ||
        qp.upper.size() != n_orig || qp.eq_matrix.cols() != n_orig || qp.ineq_matrix.cols() != n_orig ||
        qp.eq_matrix.rows() != qp.eq_rhs.size() || qp.ineq_matrix.rows() != qp.ineq_rhs.size())
        throw DimensionError("inconsistent quadratic program dimensions");

    VectorXd fixed;
    const Reduced r = reduce(qp, settings, fixed);
    const Index n = r.c.size(), m = r.b.size(), p = r.h.size();

    std::vector<Index> lb_idx, ub_idx;
    for (Index j = 0; j < n; ++j) {
        if (std::isfinite(r.lo[j])) lb_idx.push_back(j);
        if (std::isfinite(r.hi[j])) ub_idx.push_back(j);
    }
    const Index nl = static_cast<Index>(lb_idx.size()), nu = static_cast<Index>(ub_idx.size());
    const Index ncomp = p + nl + nu;

    // Starting point strictly inside the bounds.
    std::mt19937_64 rng(settings.start_seed);
    std::uniform_real_distribution<double> jitter_dist(-0.7, 0.7);
    auto jitter = [&]() { return settings.start_seed ? std::exp(jitter_dist(rng)) : 1.0; };

    Iterate it;
    it.x = VectorXd::Zero(n);
    for (Index j = 0; j < n; ++j) {
        const double lo = r.lo[j], hi = r.hi[j];
        if (std::isfinite(lo) && std::isfinite(hi))
            it.x[j] = lo + (hi - lo) * (settings.start_seed ? std::clamp(0.5 * jitter(), 0.1, 0.9) : 0.5);
        else if (std::isfinite(lo))
            it.x[j] = lo + jitter();
        else if (std::isfinite(hi))
            it.x[j] = hi - jitter();
    }
    it.y = VectorXd::Zero(m);
    it.s = VectorXd::Ones(p);
    if (p) {
        const VectorXd slack = r.h - r.G * it.x;
        for (Index i = 0; i < p; ++i) it.s[i] = std::max(1.0, slack[i]) * jitter();
    }
    it.z = VectorXd::Ones(p);
    for (Index i = 0; i < p; ++i) it.z[i] = jitter();
    it.zl = VectorXd::Ones(nl);
    for (Index i = 0; i < nl; ++i) it.zl[i] = jitter();
    it.zu = VectorXd::Ones(nu);
    for (Index i = 0; i < nu; ++i) it.zu[i] = jitter();

    KktSystem kkt(r.H, r.A, r.G);

    const double b_norm = 1.0 + inf_norm(r.b), h_norm = 1.0 + inf_norm(r.h), c_norm = 1.0 + inf_norm(r.c);

    VectorXd wl(nl), wu(nu), rd(n), rp(m), ri(p);
    auto compute_residuals = [&](const Iterate& v) {
        for (Index k = 0; k < nl; ++k) wl[k] = v.x[lb_idx[k]] - r.lo[lb_idx[k]];
        for (Index k = 0; k < nu; ++k) wu[k] = r.hi[ub_idx[k]] - v.x[ub_idx[k]];
        rd = r.H * v.x + r.c;
        if (m) rd += r.A.transpose() * v.y;
        if (p) rd += r.G.transpose() * v.z;
        for (Index k = 0; k < nl; ++k) rd[lb_idx[k]] -= v.zl[k];
        for (Index k = 0; k < nu; ++k) rd[ub_idx[k]] += v.zu[k];
        rp = m ? VectorXd(r.A * v.x - r.b) : VectorXd();
        ri = p ? VectorXd(r.G * v.x + v.s - r.h) : VectorXd();
    };
    auto complementarity_sum = [&](const Iterate& v) {
        return v.s.dot(v.z) + wl.dot(v.zl) + wu.dot(v.zu);
    };

    struct Direction {
        VectorXd dx, dy, dz, ds, dzl, dzu;
    };
    auto solve_direction = [&](const Iterate& v, const VectorXd& r_sz, const VectorXd& r_l, const VectorXd& r_u) {
        VectorXd rhs(n + m + p);
        VectorXd rx = -rd;
        for (Index k = 0; k < nl; ++k) rx[lb_idx[k]] += r_l[k] / wl[k];
        for (Index k = 0; k < nu; ++k) rx[ub_idx[k]] -= r_u[k] / wu[k];
        rhs.head(n) = rx;
        if (m) rhs.segment(n, m) = -rp;
        if (p) rhs.tail(p) = -ri - r_sz.cwiseQuotient(v.z);
        const VectorXd sol = kkt.solve(rhs);
        Direction d;
        d.dx = sol.head(n);
        d.dy = sol.segment(n, m);
        d.dz = sol.tail(p);
        d.ds = (r_sz - v.s.cwiseProduct(d.dz)).cwiseQuotient(v.z);
        d.dzl.resize(nl);
        d.dzu.resize(nu);
        for (Index k = 0; k < nl; ++k) d.dzl[k] = (r_l[k] - v.zl[k] * d.dx[lb_idx[k]]) / wl[k];
        for (Index k = 0; k < nu; ++k) d.dzu[k] = (r_u[k] + v.zu[k] * d.dx[ub_idx[k]]) / wu[k];
        return d;
    };
    auto step_bounds = [&](const Iterate& v, const Direction& d) {
        double ap = max_step(v.s, d.ds);
        double ad = std::min({max_step(v.z, d.dz), max_step(v.zl, d.dzl), max_step(v.zu, d.dzu)});
        VectorXd dwl(nl), dwu(nu);
        for (Index k = 0; k < nl; ++k) dwl[k] = d.dx[lb_idx[k]];
        for (Index k = 0; k < nu; ++k) dwu[k] = -d.dx[ub_idx[k]];
        ap = std::min({ap, max_step(wl, dwl), max_step(wu, dwu)});
        return std::pair{ap, ad};
    };

    QpResult result;
    Iterate best = it;
    double best_merit = kInf;
    double best_p = kInf, best_d = kInf, best_g = kInf;
    bool converged = false;
    int iter = 0;
    double delta = settings.regularization;

    for (; iter <= settings.max_iterations; ++iter) {
        compute_residuals(it);
        const double comp = complementarity_sum(it);
        const double mu = ncomp ? comp / static_cast<double>(ncomp) : 0.0;
        const double obj = 0.5 * it.x.dot(r.H * it.x) + r.c.dot(it.x);
        const double pres = std::max(m ? inf_norm(rp) / b_norm : 0.0, p ? inf_norm(ri) / h_norm : 0.0);
        const double dres = inf_norm(rd) / c_norm;
        const double gap = comp / (1.0 + std::abs(obj));
        if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) break;
        const double merit = std::max({pres / settings.feasibility_tol, dres / settings.optimality_tol,
                                       gap / settings.optimality_tol});
        if (merit < best_merit) {
            best_merit = merit;
            best = it;
            best_p = pres;
            best_d = dres;
            best_g = gap;
        }
        if (pres <= settings.feasibility_tol && dres <= settings.optimality_tol && gap <= settings.optimality_tol) {
            converged = true;
            break;
        }
        if (iter == settings.max_iterations) break;

        VectorXd primal_diag = VectorXd::Zero(n);
        for (Index k = 0; k < nl; ++k) primal_diag[lb_idx[k]] += it.zl[k] / wl[k];
        for (Index k = 0; k < nu; ++k) primal_diag[ub_idx[k]] += it.zu[k] / wu[k];
        const VectorXd ineq_diag = it.s.cwiseQuotient(it.z);
        bool ok = kkt.factorize(primal_diag, ineq_diag, delta);
        for (int retry = 0; !ok && retry < 6; ++retry) {
            delta *= 100.0;
            ok = kkt.factorize(primal_diag, ineq_diag, delta);
        }
        if (!ok) break;

        // Predictor.
        const VectorXd r_sz_aff = -it.s.cwiseProduct(it.z);
        const VectorXd r_l_aff = -wl.cwiseProduct(it.zl);
        const VectorXd r_u_aff = -wu.cwiseProduct(it.zu);
        const Direction aff = solve_direction(it, r_sz_aff, r_l_aff, r_u_aff);
        auto [ap_aff, ad_aff] = step_bounds(it, aff);
        double sigma = 0.0;
        if (ncomp) {
            const double a = std::min(ap_aff, ad_aff);
            double mu_aff = (it.s + a * aff.ds).dot(it.z + a * aff.dz);
            for (Index k = 0; k < nl; ++k)
                mu_aff += (wl[k] + a * aff.dx[lb_idx[k]]) * (it.zl[k] + a * aff.dzl[k]);
            for (Index k = 0; k < nu; ++k)
                mu_aff += (wu[k] - a * aff.dx[ub_idx[k]]) * (it.zu[k] + a * aff.dzu[k]);
            mu_aff /= static_cast<double>(ncomp);
            sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
        }

        // Corrector.
        VectorXd r_sz = VectorXd::Constant(p, sigma * mu) + r_sz_aff - aff.ds.cwiseProduct(aff.dz);
        VectorXd r_l(nl), r_u(nu);
        for (Index k = 0; k < nl; ++k) r_l[k] = sigma * mu + r_l_aff[k] - aff.dx[lb_idx[k]] * aff.dzl[k];
        for (Index k = 0; k < nu; ++k) r_u[k] = sigma * mu + r_u_aff[k] + aff.dx[ub_idx[k]] * aff.dzu[k];
        const Direction d = solve_direction(it, r_sz, r_l, r_u);
        auto [ap, ad] = step_bounds(it, d);
        const double alpha = std::min(1.0, 0.995 * std::min(ap, ad));
        if (!(alpha > 1e-14)) break;

        it.x += alpha * d.dx;
        it.y += alpha * d.dy;
        it.z += alpha * d.dz;
        it.s += alpha * d.ds;
        it.zl += alpha * d.dzl;
        it.zu += alpha * d.dzu;
    }

    if (!std::isfinite(best_merit))
        throw NonconvergenceError("interior-point method broke down", iter, best_p, best_d, best_g);

    std::optional<Iterate> polished;
    if (converged && settings.polish) polished = polish(r, lb_idx, ub_idx, it, settings);
    const Iterate& sol = polished ? *polished : converged ? it : best;
    result.iterations = iter;
    result.converged = converged;

    // Undo scaling and re-insert fixed variables.
    result.x = fixed;
    result.lower_duals = VectorXd::Zero(n_orig);
    result.upper_duals = VectorXd::Zero(n_orig);
    for (Index j = 0; j < n; ++j) result.x[r.cols[static_cast<std::size_t>(j)]] = r.col_scale[j] * sol.x[j];
    for (Index k = 0; k < nl; ++k) {
        const Index j = lb_idx[k];
        result.lower_duals[r.cols[static_cast<std::size_t>(j)]] = sol.zl[k] / (r.col_scale[j] * r.cost_scale);
    }
    for (Index k = 0; k < nu; ++k) {
        const Index j = ub_idx[k];
        result.upper_duals[r.cols[static_cast<std::size_t>(j)]] = sol.zu[k] / (r.col_scale[j] * r.cost_scale);
    }
    result.eq_duals = VectorXd::Zero(qp.eq_rhs.size());
    for (Index i = 0; i < m; ++i)
        result.eq_duals[r.eq_rows[static_cast<std::size_t>(i)]] = r.eq_scale[i] * sol.y[i] / r.cost_scale;
    result.ineq_duals = VectorXd::Zero(qp.ineq_rhs.size());
    for (Index i = 0; i < p; ++i)
        result.ineq_duals[r.in_rows[static_cast<std::size_t>(i)]] = r.in_scale[i] * sol.z[i] / r.cost_scale;

    // Bound multipliers of fixed variables absorb their reduced cost.
    VectorXd grad = qp.hessian * result.x + qp.linear;
    if (qp.eq_rhs.size()) grad += qp.eq_matrix.transpose() * result.eq_duals;
    if (qp.ineq_rhs.size()) grad += qp.ineq_matrix.transpose() * result.ineq_duals;
    for (Index j = 0; j < n_orig; ++j) {
        if (qp.lower[j] != qp.upper[j]) continue;
        result.lower_duals[j] = std::max(0.0, grad[j]);
        result.upper_duals[j] = std::max(0.0, -grad[j]);
    }

    // Residuals on the original problem.
    VectorXd rdual = grad - result.lower_duals + result.upper_duals;
    double primal = 0.0, compl_max = 0.0;
    if (qp.eq_rhs.size()) primal = inf_norm(qp.eq_matrix * result.x - qp.eq_rhs);
    if (qp.ineq_rhs.size()) {
        const VectorXd slack = qp.ineq_rhs - qp.ineq_matrix * result.x;
        for (Index i = 0; i < slack.size(); ++i) {
            primal = std::max(primal, -slack[i]);
            compl_max = std::max(compl_max, std::abs(slack[i] * result.ineq_duals[i]));
        }
    }
    for (Index j = 0; j < n_orig; ++j) {
        if (std::isfinite(qp.lower[j])) {
            primal = std::max(primal, qp.lower[j] - result.x[j]);
            if (qp.lower[j] != qp.upper[j])
                compl_max = std::max(compl_max, std::abs((result.x[j] - qp.lower[j]) * result.lower_duals[j]));
        }
        if (std::isfinite(qp.upper[j])) {
            primal = std::max(primal, result.x[j] - qp.upper[j]);
            if (qp.lower[j] != qp.upper[j])
                compl_max = std::max(compl_max, std::abs((qp.upper[j] - result.x[j]) * result.upper_duals[j]));
        }
    }
    result.primal_residual = primal;
    result.dual_residual = inf_norm(rdual);
    result.complementarity = compl_max;
    return result;
}

}  // namespace tep

#include "evenspec/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "evenspec/oracle.hpp"

namespace evenspec {

namespace {

CMatrix mean_free_q(const SpectralModel& model, const Potential& q)
{
    return q_matrix(model, q.without_mean());
}

nlohmann::json cplx_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json matrix_json(const CMatrix& M)
{
    auto rows = nlohmann::json::array();
    for (int r = 0; r < M.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (int c = 0; c < M.cols(); ++c)
            row.push_back(cplx_json(M(r, c)));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

int find_l(const SpectralModel& model, const Potential& q)
{
    model.validate();
    const CMatrix Q = mean_free_q(model, q);
    const int d = model.dim();
    // ||Gamma_l Q||^2 collects the entries whose larger block index exceeds l.
    std::vector<double> by_max_index(model.N + 1, 0.0);
    for (int c = 0; c < d; ++c) {
        const int ic = model.index_of_row(c);
        for (int r = 0; r < d; ++r) {
            const int ir = model.index_of_row(r);
            if (ir == ic || Q(r, c) == cplx(0.0))
                continue;
            by_max_index[std::max(ir, ic)] += std::norm(Q(r, c) / model.lambda_gap(ir, ic));
        }
    }
    for (int l = model.first_index(); l < model.N; ++l) {
        // Corner blocks are those with index <= l.
        double norm2 = 0.0;
        for (int t = l + 1; t <= model.N; ++t)
            norm2 += by_max_index[t];
        if (std::sqrt(norm2) <= 0.5)
            return l;
    }
    throw NumericalError("no l below the truncation makes ||Gamma_l Q||_2 <= 1/2; enlarge N");
}

PreliminaryTransform preliminary_transform(const SpectralModel& model, const Potential& q, int l)
{
    model.validate();
    Transformers t(model);
    const CMatrix Q = mean_free_q(model, q);
    const CMatrix U = t.Gamma(Q, l);
    if (hs_norm(U) > 0.5 + 1e-12)
        throw NumericalError("preliminary transform needs ||Gamma_l Q||_2 <= 1/2");
    const CMatrix JQ = t.J(Q, l);
    const int d = model.dim();
    CMatrix rhs = Q * U - t.times_block_diagonal(U, JQ, l);
    Eigen::PartialPivLU<CMatrix> lu(CMatrix::Identity(d, d) + U);
    if (lu.rcond() < 1e-14)
        throw NumericalError("I + Gamma_l Q is numerically singular");
    PreliminaryTransform out;
    out.JlQ = {model, JQ, OperatorTag::JlQ};
    out.B = {model, lu.solve(rhs), OperatorTag::B};
    return out;
}

int find_m(const SpectralModel& model, double b_norm, int l)
{
    model.validate();
    const double scale = std::pow(model.omega / std::numbers::pi, 2 * model.k);
    for (int m = l + 1; m < model.N; ++m) {
        if (model.bc.is_dirichlet()) {
            double v = scale * b_norm / ((2.0 * m + 1.0) * std::pow(static_cast<double>(m), 2 * model.k - 2));
            if (v < 0.25)
                return m;
        } else {
            double w = 2.0 * m + model.theta();
            double v = scale * b_norm / ((2.0 * m + 1.0) * std::pow(w, 2 * model.k - 2));
            if (v < 1.0)
                return m;
        }
    }
    throw NumericalError("contraction condition fails for every m below N; enlarge N");
}

CMatrix phi(const Transformers& t, const CMatrix& B, const CMatrix& JmB, int m, const CMatrix& X)
{
    const CMatrix G = t.Gamma(X, m);
    const CMatrix BG = B * G;
    return BG - t.times_block_diagonal(G, JmB, m) -
           t.times_block_diagonal(G, t.J(BG, m), m) + B;
}

FixedPointSolution solve_fixed_point(const SpectralModel& model, const HSOperator& B, int m,
                                     const FixedPointOptions& opts)
{
    Transformers t(model);
    const CMatrix& b = B.entries;
    const CMatrix JmB = t.J(b, m);

    FixedPointSolution out;
    CMatrix X = b; // X_1 = Phi(X_0) with X_0 = 0
    out.iterations = 1;
    double prev = std::numeric_limits<double>::infinity();
    int growth = 0;
    for (;;) {
        CMatrix Y = phi(t, b, JmB, m, X);
        const double r = hs_norm(Y - X);
        if (!std::isfinite(r))
            throw NumericalError("fixed-point iteration produced non-finite values");
        if (r <= opts.tol) {
            out.residual = r;
            break;
        }
        growth = r > prev ? growth + 1 : 0;
        if (growth >= 5)
            throw NumericalError("fixed-point iteration diverges");
        prev = r;
        X = std::move(Y);
        if (++out.iterations > opts.max_iter)
            throw NumericalError("fixed-point iteration did not converge within max_iter");
    }

    if (hs_norm(X - b) > 3.0 * hs_norm(b) * (1.0 + 1e-12))
        throw NumericalError("fixed point left the contraction ball around B");
    out.Xstar = {model, std::move(X), OperatorTag::Xstar};
    return out;
}

SimilarityResult extract_blocks(const SpectralModel& model, const Potential& q, int l, int m,
                                const PreliminaryTransform& pre, const FixedPointSolution& fp)
{
    SimilarityResult res;
    res.model = model;
    res.mean = q.mean();
    res.l = l;
    res.m = m;
    res.JlQ = pre.JlQ;
    res.B = pre.B;
    res.Xstar = fp.Xstar;
    res.iterations = fp.iterations;
    res.residual = fp.residual;

    const CMatrix S = pre.JlQ.entries + fp.Xstar.entries;
    for (int n = m + 1; n <= model.N; ++n) {
        std::vector<int> rows = model.block_rows(n);
        const int s = static_cast<int>(rows.size());
        CMatrix A(s, s);
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < s; ++b)
                A(a, b) = -S(rows[a], rows[b]) - (a == b ? res.mean : cplx(0.0));
        // Added last so the small entries are not rounded against lambda_n first.
        for (int a = 0; a < s; ++a)
            A(a, a) += model.lambda0(n);
        res.blocks[n] = A;
    }

    for (int r = 0; r < model.dim(); ++r)
        if (model.index_of_row(r) <= m)
            res.corner_rows.push_back(r);
    const int cs = static_cast<int>(res.corner_rows.size());
    res.corner.resize(cs, cs);
    for (int a = 0; a < cs; ++a)
        for (int b = 0; b < cs; ++b) {
            int ra = res.corner_rows[a], rb = res.corner_rows[b];
            res.corner(a, b) = -S(ra, rb) - (a == b ? res.mean : cplx(0.0));
            if (a == b)
                res.corner(a, b) += model.lambda0(model.index_of_row(ra));
        }
    return res;
}

SimilarityResult run_similarity(const SpectralModel& model, const Potential& q,
                                const FixedPointOptions& opts)
{
    const int l = find_l(model, q);
    PreliminaryTransform pre = preliminary_transform(model, q, l);
    const int m = find_m(model, pre.B, l);
    FixedPointSolution fp = solve_fixed_point(model, pre.B, m, opts);
    return extract_blocks(model, q, l, m, pre, fp);
}

std::array<cplx, 2> block_eigs(const Eigen::Matrix2cd& A)
{
    const cplx a = A(0, 0), b = A(0, 1), c = A(1, 0), d = A(1, 1);
    const cplx half_sum = 0.5 * (a + d);
    const cplx half_diff = 0.5 * (a - d);
    const cplx root = std::sqrt(half_diff * half_diff + b * c);
    return {half_sum - root, half_sum + root};
}

std::vector<cplx> SimilarityResult::block_eigenvalues(int n) const
{
    const CMatrix& A = blocks.at(n);
    if (A.rows() == 1)
        return {A(0, 0)};
    auto e = block_eigs(A);
    return {e[0], e[1]};
}

std::vector<cplx> SimilarityResult::corner_eigenvalues() const
{
    if (corner.rows() == 0)
        return {};
    DenseEigen eig = dense_eigs(corner);
    std::vector<cplx> out(eig.values.data(), eig.values.data() + eig.values.size());
    std::sort(out.begin(), out.end(), [](cplx x, cplx y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return out;
}

nlohmann::json SimilarityResult::to_json() const
{
    nlohmann::json j;
    j["bc"] = model.bc.name();
    j["k"] = model.k;
    j["omega"] = model.omega;
    j["N"] = model.N;
    j["mean"] = cplx_json(mean);
    j["l"] = l;
    j["m"] = m;
    j["b_norm"] = hs_norm(B.entries);
    j["residual"] = residual;
    j["iterations"] = iterations;
    j["corner_dimension"] = static_cast<int>(corner_rows.size());
    auto ce = nlohmann::json::array();
    for (cplx z : corner_eigenvalues())
        ce.push_back(cplx_json(z));
    j["corner_eigenvalues"] = ce;
    auto bl = nlohmann::json::array();
    for (const auto& [n, A] : blocks) {
        nlohmann::json e;
        e["n"] = n;
        e["entries"] = matrix_json(A);
        auto ev = nlohmann::json::array();
        for (cplx z : block_eigenvalues(n))
            ev.push_back(cplx_json(z));
        e["eigenvalues"] = ev;
        bl.push_back(e);
    }
    j["blocks"] = bl;
    return j;
}

} // namespace evenspec

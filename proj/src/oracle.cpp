#include "evenspec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "evenspec/parallel.hpp"

namespace evenspec {

namespace {

using SparseC = Eigen::SparseMatrix<cplx>;

SparseC to_sparse(const CMatrix& Q)
{
    std::vector<Eigen::Triplet<cplx>> trip;
    for (int c = 0; c < Q.cols(); ++c)
        for (int r = 0; r < Q.rows(); ++r)
            if (Q(r, c) != cplx(0.0))
                trip.emplace_back(r, c, Q(r, c));
    SparseC S(Q.rows(), Q.cols());
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

double inf_norm(const CMatrix& Q) { return Q.cwiseAbs().rowwise().sum().maxCoeff(); }

// Greedy nearest assignment: pairs[i] = position in `b` assigned to a[i].
std::vector<int> greedy_assign(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    std::vector<int> out(a.size(), -1);
    std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
    const std::size_t rounds = std::min(a.size(), b.size());
    for (std::size_t k = 0; k < rounds; ++k) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (used_a[i])
                continue;
            for (std::size_t j = 0; j < b.size(); ++j) {
                if (used_b[j])
                    continue;
                double dist = std::abs(a[i] - b[j]);
                if (dist < best) {
                    best = dist;
                    bi = static_cast<int>(i);
                    bj = static_cast<int>(j);
                }
            }
        }
        used_a[bi] = used_b[bj] = true;
        out[bi] = bj;
    }
    return out;
}

InvariantSubspace invariant_subspace_sparse(const SpectralModel& model, const SparseC& Q,
                                            const std::vector<int>& rows, int ref_index)
{
    const int d = model.dim();
    const int s = static_cast<int>(rows.size());
    std::vector<int> slot(d, -1);
    for (int a = 0; a < s; ++a)
        slot[rows[a]] = a;
    std::vector<double> g(d);
    for (int r = 0; r < d; ++r)
        g[r] = model.lambda_gap(model.index_of_row(r), ref_index);

    InvariantSubspace out;
    out.rows = rows;
    out.ref_index = ref_index;
    out.X = CMatrix::Zero(d, s);
    out.Z = CMatrix::Zero(s, d);
    for (int a = 0; a < s; ++a) {
        out.X(rows[a], a) = 1.0;
        out.Z(a, rows[a]) = 1.0;
    }
    const SparseC Qt = Q.transpose();

    auto restrict_rows = [&](const CMatrix& M) {
        CMatrix T(s, s);
        for (int a = 0; a < s; ++a)
            T.row(a) = M.row(rows[a]);
        return T;
    };

    constexpr int kMaxIter = 500;
    int it_right = 0, it_left = 0;
    CMatrix Tr(s, s), Tl(s, s);
    for (; it_right < kMaxIter; ++it_right) {
        const CMatrix QX = Q * out.X;
        Tr = -restrict_rows(QX);
        for (int a = 0; a < s; ++a)
            Tr(a, a) += g[rows[a]];
        double delta = 0.0, scale = 0.0;
        for (int r = 0; r < d; ++r) {
            if (slot[r] >= 0)
                continue;
            CMatrix A = -Tr;
            A.diagonal().array() += g[r];
            // x_r A = (QX)_r
            Eigen::RowVectorXcd x = A.transpose().partialPivLu().solve(QX.row(r).transpose()).transpose();
            delta = std::max(delta, (x - out.X.row(r)).cwiseAbs().maxCoeff());
            scale = std::max(scale, x.cwiseAbs().maxCoeff());
            out.X.row(r) = x;
        }
        if (delta <= 1e-17 * scale || delta == 0.0)
            break;
    }
    for (; it_left < kMaxIter; ++it_left) {
        const CMatrix ZQ = (Qt * out.Z.transpose()).transpose();
        Tl = CMatrix(s, s);
        for (int a = 0; a < s; ++a)
            Tl.col(a) = -ZQ.col(rows[a]);
        for (int a = 0; a < s; ++a)
            Tl(a, a) += g[rows[a]];
        double delta = 0.0, scale = 0.0;
        for (int r = 0; r < d; ++r) {
            if (slot[r] >= 0)
                continue;
            CMatrix A = -Tl;
            A.diagonal().array() += g[r];
            Eigen::VectorXcd z = A.partialPivLu().solve(ZQ.col(r));
            delta = std::max(delta, (z - out.Z.col(r)).cwiseAbs().maxCoeff());
            scale = std::max(scale, z.cwiseAbs().maxCoeff());
            out.Z.col(r) = z;
        }
        if (delta <= 1e-17 * scale || delta == 0.0)
            break;
    }
    if (it_right >= kMaxIter || it_left >= kMaxIter)
        throw NumericalError("invariant subspace iteration did not converge");
    // Final restriction from the converged right basis, with the coupling
    // through the complementary rows kept apart from Q_{S,S}.
    CMatrix XR = out.X;
    for (int a = 0; a < s; ++a)
        XR.row(rows[a]).setZero();
    out.coupling = restrict_rows(Q * XR);
    CMatrix QSS(s, s);
    for (int a = 0; a < s; ++a)
        for (int b = 0; b < s; ++b)
            QSS(a, b) = Q.coeff(rows[a], rows[b]);
    out.q_block = QSS;
    out.T = -QSS - out.coupling;
    for (int a = 0; a < s; ++a)
        out.T(a, a) += g[rows[a]];
    out.iterations = std::max(it_right, it_left) + 1;
    return out;
}

bool reliable_index(const SpectralModel& model, int n) { return n >= model.first_index() && n <= model.N / 2; }

} // namespace

DenseEigen dense_eigs(const CMatrix& M)
{
    if (M.rows() == 0 || M.rows() != M.cols())
        throw std::invalid_argument("dense_eigs needs a non-empty square matrix");
    if (!M.allFinite())
        throw std::invalid_argument("dense_eigs input has non-finite entries");
    DenseEigen out;
    if (M == M.adjoint()) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(M);
        if (es.info() != Eigen::Success)
            throw NumericalError("self-adjoint eigensolver did not converge");
        out.values = es.eigenvalues().cast<cplx>();
        out.right = es.eigenvectors();
        out.left = out.right.adjoint();
        return out;
    }
    Eigen::ComplexEigenSolver<CMatrix> es(M, true);
    if (es.info() != Eigen::Success)
        throw NumericalError("eigensolver did not converge");
    out.values = es.eigenvalues();
    out.right = es.eigenvectors();
    for (int c = 0; c < out.right.cols(); ++c)
        out.right.col(c).normalize();
    Eigen::PartialPivLU<CMatrix> lu(out.right);
    out.left = lu.inverse();
    return out;
}

std::vector<cplx> InvariantSubspace::offsets() const
{
    if (T.rows() == 1)
        return {T(0, 0)};
    if (T.rows() == 2) {
        const cplx hs = 0.5 * (T(0, 0) + T(1, 1));
        const cplx hd = 0.5 * (T(0, 0) - T(1, 1));
        const cplx root = std::sqrt(hd * hd + T(0, 1) * T(1, 0));
        return {hs - root, hs + root};
    }
    Eigen::ComplexEigenSolver<CMatrix> es(T, false);
    return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

CMatrix InvariantSubspace::projector() const
{
    const CMatrix G = Z * X;
    return X * G.partialPivLu().solve(Z);
}

InvariantSubspace invariant_subspace(const SpectralModel& model, const CMatrix& Q,
                                     const std::vector<int>& rows, int ref_index)
{
    if (Q.rows() != model.dim() || Q.cols() != model.dim())
        throw std::invalid_argument("Q does not match the model dimension");
    return invariant_subspace_sparse(model, to_sparse(Q), rows, ref_index);
}

int isolation_index(const SpectralModel& model, double q_inf_norm, double factor)
{
    const int first = model.first_index();
    if (q_inf_norm == 0.0)
        return first;
    auto isolated = [&](int n) {
        const double need = factor * q_inf_norm;
        if (n > first && model.lambda_gap(n, n - 1) < need)
            return false;
        if (n < model.N && model.lambda_gap(n + 1, n) < need)
            return false;
        return true;
    };
    int n = model.N + 1;
    while (n - 1 >= first && isolated(n - 1))
        --n;
    return n;
}

bool MatchedSpectrum::reliable(int n) const { return reliable_index(model, n); }

std::vector<int> MatchedSpectrum::columns(int lo, int hi) const
{
    std::vector<int> out;
    for (const auto& [n, list] : by_index)
        if (n >= lo && n <= hi)
            for (const auto& e : list)
                out.push_back(e.column);
    return out;
}

std::vector<MatchedEigenvalue> MatchedSpectrum::all() const
{
    std::vector<MatchedEigenvalue> out;
    for (const auto& [n, list] : by_index)
        out.insert(out.end(), list.begin(), list.end());
    out.insert(out.end(), unmatched.begin(), unmatched.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.index != b.index)
            return a.index < b.index;
        if (a.value.real() != b.value.real())
            return a.value.real() < b.value.real();
        return a.value.imag() < b.value.imag();
    });
    return out;
}

MatchedSpectrum truncated_spectrum(const SpectralModel& model, const Potential& q,
                                   const OracleOptions& opts)
{
    model.validate();
    MatchedSpectrum ms;
    ms.model = model;
    ms.mean = q.mean();
    const CMatrix Q = q_matrix(model, q.without_mean());
    CMatrix L = -Q;
    L.diagonal() += lambda_diagonal(model).cast<cplx>();
    ms.eig = dense_eigs(L);

    const int d = model.dim();
    std::vector<int> row_index(d);
    for (int r = 0; r < d; ++r)
        row_index[r] = model.index_of_row(r);

    // Dominant block of each right eigenvector.
    std::map<int, std::vector<MatchedEigenvalue>> candidates;
    for (int c = 0; c < d; ++c) {
        std::map<int, double> weight;
        const double total = ms.eig.right.col(c).squaredNorm();
        for (int r = 0; r < d; ++r)
            weight[row_index[r]] += std::norm(ms.eig.right(r, c));
        auto best = std::max_element(weight.begin(), weight.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
        MatchedEigenvalue e;
        e.value = ms.eig.values(c) - ms.mean;
        e.confidence = std::min(1.0, best->second / total);
        e.column = c;
        if (e.confidence < 0.5) {
            e.offset = e.value;
            ms.unmatched.push_back(e);
            continue;
        }
        e.index = best->first;
        e.offset = e.value - model.lambda0(e.index);
        e.reliable = reliable_index(model, e.index);
        candidates[e.index].push_back(e);
    }
    for (auto& [n, list] : candidates) {
        const std::size_t cap = model.block_rows(n).size();
        std::stable_sort(list.begin(), list.end(),
                         [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
        while (list.size() > cap) {
            MatchedEigenvalue e = list.back();
            list.pop_back();
            e.index = -1;
            e.reliable = false;
            e.offset = e.value;
            ms.unmatched.push_back(e);
        }
        ms.by_index[n] = list;
    }
    if (!ms.unmatched.empty())
        std::cerr << "warning: " << ms.unmatched.size() << " eigenvalue(s) could not be matched to an index\n";

    const double qn = inf_norm(Q);
    ms.isolation = isolation_index(model, qn, opts.isolation_factor);
    if (!opts.refine)
        return ms;
    if (qn == 0.0) {
        // L is diagonal: every eigenvalue is lambda_n - mean exactly.
        for (auto& [n, list] : ms.by_index) {
            for (auto& e : list) {
                e.offset = -ms.mean;
                e.value = model.lambda0(n) - ms.mean;
                e.refined = true;
            }
            if (reliable_index(model, n)) {
                const auto size = static_cast<Eigen::Index>(list.size());
                ms.blocks[n] = RefinedBlock{CMatrix::Zero(size, size), CMatrix::Zero(size, size)};
            }
        }
        return ms;
    }

    const SparseC Qs = to_sparse(Q);
    const int first = model.first_index();
    const int top = model.N / 2;

    // Isolated blocks in the reliable range.
    std::vector<int> targets;
    for (int n = std::max(ms.isolation, first); n <= top; ++n)
        if (ms.by_index.count(n))
            targets.push_back(n);
    std::vector<std::vector<cplx>> refined(targets.size());
    std::vector<RefinedBlock> parts(targets.size());
    parallel_for(targets.size(), [&](std::size_t i) {
        const int n = targets[i];
        const std::vector<int> rows = model.block_rows(n);
        InvariantSubspace sub = invariant_subspace_sparse(model, Qs, rows, n);
        refined[i] = sub.offsets();
        parts[i].coupling = sub.coupling;
        parts[i].q_block = sub.q_block;
    });
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ms.blocks[targets[i]] = parts[i];
        auto& list = ms.by_index[targets[i]];
        const double lam = model.lambda0(targets[i]);
        std::vector<cplx> dense;
        for (const auto& e : list)
            dense.push_back(e.value + ms.mean - lam);
        std::vector<int> pick = greedy_assign(dense, refined[i]);
        for (std::size_t a = 0; a < list.size(); ++a) {
            if (pick[a] < 0)
                continue;
            list[a].offset = refined[i][pick[a]] - ms.mean;
            list[a].value = lam + list[a].offset;
            list[a].refined = true;
        }
    }

    // Low corner: all blocks below the isolation index, solved together.
    if (ms.isolation > first) {
        std::vector<int> rows;
        for (int r = 0; r < d; ++r)
            if (row_index[r] < ms.isolation)
                rows.push_back(r);
        InvariantSubspace sub = invariant_subspace_sparse(model, Qs, rows, first);
        std::vector<cplx> offs = sub.offsets();
        std::vector<MatchedEigenvalue*> members;
        std::vector<cplx> dense;
        const double lam_ref = model.lambda0(first);
        for (auto& [n, list] : ms.by_index) {
            if (n >= ms.isolation)
                break;
            for (auto& e : list) {
                members.push_back(&e);
                dense.push_back(e.value + ms.mean - lam_ref);
            }
        }
        std::vector<int> pick = greedy_assign(dense, offs);
        for (std::size_t a = 0; a < members.size(); ++a) {
            if (pick[a] < 0)
                continue;
            MatchedEigenvalue& e = *members[a];
            e.offset = model.lambda_gap(first, e.index) + offs[pick[a]] - ms.mean;
            e.value = model.lambda0(e.index) + e.offset;
            e.refined = true;
        }
    }
    return ms;
}

CMatrix riesz_projection(const DenseEigen& eig, const std::vector<int>& selected, double min_gap)
{
    const int d = static_cast<int>(eig.values.size());
    std::vector<bool> in(d, false);
    for (int c : selected) {
        if (c < 0 || c >= d)
            throw std::invalid_argument("selected eigen-index out of range");
        in[c] = true;
    }
    if (min_gap > 0.0) {
        for (int a = 0; a < d; ++a) {
            if (!in[a])
                continue;
            for (int b = 0; b < d; ++b)
                if (!in[b] && std::abs(eig.values(a) - eig.values(b)) < min_gap)
                    throw NumericalError("selected eigenvalues are not separated from the rest");
        }
    }
    const auto k = static_cast<Eigen::Index>(selected.size());
    CMatrix R(d, k), Lt(k, d);
    for (Eigen::Index i = 0; i < k; ++i) {
        R.col(i) = eig.right.col(selected[i]);
        Lt.row(i) = eig.left.row(selected[i]);
    }
    CMatrix P(d, d);
    P.noalias() = R * Lt;
    return P;
}

CMatrix matrix_exponential(const CMatrix& M, double t)
{
    if (!(t >= 0.0))
        throw std::invalid_argument("matrix_exponential needs t >= 0");
    if (M.rows() != M.cols())
        throw std::invalid_argument("matrix_exponential needs a square matrix");
    if (t == 0.0)
        return CMatrix::Identity(M.rows(), M.cols());
    const CMatrix A = -t * M;
    CMatrix E = A.exp();
    if (!E.allFinite())
        throw NumericalError("matrix exponential overflowed");
    return E;
}

} // namespace evenspec

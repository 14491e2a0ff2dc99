#include "evenspec/transformers.hpp"

#include <cmath>
#include <numbers>

namespace evenspec {

Transformers::Transformers(const SpectralModel& model) : model_(model)
{
    model_.validate();
    const int d = model_.dim();
    index_.resize(d);
    for (int r = 0; r < d; ++r)
        index_[r] = model_.index_of_row(r);
    inv_gap_ = CMatrix::Zero(d, d);
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r)
            if (index_[r] != index_[c])
                inv_gap_(r, c) = 1.0 / model_.lambda_gap(index_[r], index_[c]);
}

void Transformers::check(const CMatrix& X, int m) const
{
    if (X.rows() != model_.dim() || X.cols() != model_.dim())
        throw std::invalid_argument("matrix dimension does not match the model");
    if (m >= model_.N)
        throw std::invalid_argument("corner index m must be below the truncation N");
}

CMatrix Transformers::J(const CMatrix& X, int m) const
{
    check(X, m);
    const int d = model_.dim();
    CMatrix out = CMatrix::Zero(d, d);
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r)
            if (kept(r, c, m))
                out(r, c) = X(r, c);
    return out;
}

CMatrix Transformers::Gamma(const CMatrix& X, int m) const
{
    check(X, m);
    const int d = model_.dim();
    CMatrix out(d, d);
    for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r)
            out(r, c) = kept(r, c, m) ? cplx(0.0) : X(r, c) * inv_gap_(r, c);
    return out;
}

CMatrix Transformers::times_block_diagonal(const CMatrix& X, const CMatrix& D, int m) const
{
    check(X, m);
    const int d = model_.dim();
    CMatrix out = CMatrix::Zero(d, d);
    // Corner rows form a contiguous-by-index set but not a contiguous row
    // range for per/ap, so gather them explicitly.
    std::vector<int> corner;
    for (int r = 0; r < d; ++r)
        if (index_[r] <= m)
            corner.push_back(r);
    if (!corner.empty()) {
        const int s = static_cast<int>(corner.size());
        CMatrix Xc(d, s), Dc(s, s);
        for (int a = 0; a < s; ++a) {
            Xc.col(a) = X.col(corner[a]);
            for (int b = 0; b < s; ++b)
                Dc(a, b) = D(corner[a], corner[b]);
        }
        CMatrix prod = Xc * Dc;
        for (int a = 0; a < s; ++a)
            out.col(corner[a]) = prod.col(a);
    }
    for (int n = std::max(m + 1, model_.first_index()); n <= model_.N; ++n) {
        std::vector<int> rows = model_.block_rows(n);
        for (int c : rows) {
            out.col(c).setZero();
            for (int b : rows)
                out.col(c) += X.col(b) * D(b, c);
        }
    }
    return out;
}

HSOperator apply_J(const SpectralModel& model, const HSOperator& X)
{
    return {model, Transformers(model).J(X.entries), OperatorTag::Custom};
}

HSOperator apply_Gamma(const SpectralModel& model, const HSOperator& X)
{
    return {model, Transformers(model).Gamma(X.entries), OperatorTag::Custom};
}

HSOperator apply_Jm(const SpectralModel& model, int m, const HSOperator& X)
{
    if (m < model.first_index() - 1)
        throw std::invalid_argument("corner index m below the index set");
    return {model, Transformers(model).J(X.entries, m), OperatorTag::Custom};
}

HSOperator apply_Gamma_m(const SpectralModel& model, int m, const HSOperator& X)
{
    if (m < model.first_index() - 1)
        throw std::invalid_argument("corner index m below the index set");
    return {model, Transformers(model).Gamma(X.entries, m), OperatorTag::Custom};
}

double gamma_norm_bound(const SpectralModel& model, int m)
{
    model.validate();
    const double scale = std::pow(model.omega / std::numbers::pi, 2 * model.k) / (2.0 * m + 1.0);
    if (model.bc.is_dirichlet()) {
        if (m < 1)
            throw std::invalid_argument("Dirichlet bound needs m >= 1");
        return scale / std::pow(static_cast<double>(m), 2 * model.k - 2);
    }
    const int w = 2 * m + model.theta();
    if (m < 0 || w == 0)
        throw std::invalid_argument("periodic bound needs m >= 1");
    return scale / (4.0 * std::pow(static_cast<double>(w), 2 * model.k - 2));
}

double hs_norm(const CMatrix& X) { return X.norm(); }

cplx hs_inner(const CMatrix& X, const CMatrix& Y)
{
    if (X.rows() != Y.rows() || X.cols() != Y.cols())
        throw std::invalid_argument("hs_inner dimension mismatch");
    // (X, Y) = trace(Y^* X) = sum X_ij conj(Y_ij)
    return (X.array() * Y.array().conjugate()).sum();
}

} // namespace evenspec

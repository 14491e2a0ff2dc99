#include "evenspec/basis.hpp"

#include <cmath>
#include <iostream>
#include <numbers>

namespace evenspec {

namespace {

// w^p in 128-bit integers; returns false on overflow.
bool int_power(long w, int p, __int128& out)
{
    __int128 acc = 1;
    for (int i = 0; i < p; ++i) {
        if (__builtin_mul_overflow(acc, static_cast<__int128>(w), &acc))
            return false;
    }
    out = acc;
    return true;
}

} // namespace

std::optional<int> BoundaryCondition::theta() const
{
    switch (kind) {
    case BoundaryKind::Periodic: return 0;
    case BoundaryKind::Antiperiodic: return 1;
    case BoundaryKind::Dirichlet: return std::nullopt;
    }
    return std::nullopt;
}

BoundaryCondition BoundaryCondition::parse(const std::string& s)
{
    if (s == "per")
        return {BoundaryKind::Periodic};
    if (s == "ap")
        return {BoundaryKind::Antiperiodic};
    if (s == "dir")
        return {BoundaryKind::Dirichlet};
    throw ConfigError("unknown boundary condition '" + s + "' (expected per, ap or dir)");
}

std::string BoundaryCondition::name() const
{
    switch (kind) {
    case BoundaryKind::Periodic: return "per";
    case BoundaryKind::Antiperiodic: return "ap";
    case BoundaryKind::Dirichlet: return "dir";
    }
    return "per";
}

void SpectralModel::validate() const
{
    if (k < 2)
        throw std::invalid_argument("k must be at least 2");
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument("omega must be positive");
    if (N < 8)
        throw std::invalid_argument("truncation N must be at least 8");
}

int SpectralModel::dim() const
{
    return bc.is_dirichlet() ? N : 2 * N + 1 + theta();
}

int SpectralModel::label_of_row(int row) const
{
    if (row < 0 || row >= dim())
        throw std::out_of_range("row outside truncation");
    return bc.is_dirichlet() ? row + 1 : row - N - theta();
}

int SpectralModel::row_of_label(int label) const
{
    int row = bc.is_dirichlet() ? label - 1 : label + N + theta();
    if (row < 0 || row >= dim())
        throw std::out_of_range("basis label outside truncation");
    return row;
}

std::vector<int> SpectralModel::labels() const
{
    std::vector<int> out(dim());
    for (int r = 0; r < dim(); ++r)
        out[r] = label_of_row(r);
    return out;
}

int SpectralModel::index_of_label(int label) const
{
    if (bc.is_dirichlet())
        return label;
    return label >= 0 ? label : -label - theta();
}

std::vector<int> SpectralModel::block_rows(int n) const
{
    if (n < first_index() || n > N)
        throw std::out_of_range("spectral index outside truncation");
    if (bc.is_dirichlet())
        return {row_of_label(n)};
    int neg = -n - theta();
    if (neg == n)
        return {row_of_label(n)};
    return {row_of_label(neg), row_of_label(n)};
}

long SpectralModel::wave_number(int n) const
{
    if (n < first_index())
        throw std::out_of_range("spectral index outside index set");
    return bc.is_dirichlet() ? n : 2L * n + theta();
}

double SpectralModel::lambda_scale() const
{
    return std::pow(std::numbers::pi / omega, 2 * k);
}

double SpectralModel::lambda0(int n) const
{
    const long w = wave_number(n);
    __int128 p;
    if (int_power(w, 2 * k, p))
        return lambda_scale() * static_cast<double>(p);
    return lambda_scale() * std::pow(static_cast<double>(w), 2 * k);
}

double SpectralModel::lambda_gap(int a, int b) const
{
    const long wa = wave_number(a);
    const long wb = wave_number(b);
    __int128 pa, pb;
    if (int_power(wa, 2 * k, pa) && int_power(wb, 2 * k, pb))
        return lambda_scale() * static_cast<double>(pa - pb);
    long double d = std::pow(static_cast<long double>(wa), 2 * k) -
                    std::pow(static_cast<long double>(wb), 2 * k);
    return lambda_scale() * static_cast<double>(d);
}

std::string to_string(OperatorTag t)
{
    switch (t) {
    case OperatorTag::L0: return "L0";
    case OperatorTag::Q: return "Q";
    case OperatorTag::L: return "L";
    case OperatorTag::JlQ: return "JlQ";
    case OperatorTag::B: return "B";
    case OperatorTag::Xstar: return "Xstar";
    case OperatorTag::Custom: return "custom";
    }
    return "custom";
}

cplx q_matrix_element(const SpectralModel& model, const Potential& q, int s, int j)
{
    // Range checks.
    model.row_of_label(s);
    model.row_of_label(j);
    if (!model.bc.is_dirichlet())
        return q.exp_coeff(s - j);
    cplx v = (q.cos_coeff(std::abs(s - j)) - q.cos_coeff(s + j)) / std::numbers::sqrt2;
    if (s == j)
        v += q.mean();
    return v;
}

CMatrix q_matrix(const SpectralModel& model, const Potential& q)
{
    model.validate();
    const int d = model.dim();
    CMatrix M = CMatrix::Zero(d, d);
    if (!model.bc.is_dirichlet()) {
        for (const auto& [l, v] : q.exp_coeffs()) {
            // Entry (s, j) with s - j = l.
            for (int c = std::max(0, -l); c < d && c + l < d; ++c)
                M(c + l, c) = v;
        }
        return M;
    }
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c)
            M(r, c) = q_matrix_element(model, q, r + 1, c + 1);
    return M;
}

Eigen::VectorXd lambda_diagonal(const SpectralModel& model)
{
    Eigen::VectorXd v(model.dim());
    for (int r = 0; r < model.dim(); ++r)
        v(r) = model.lambda0(model.index_of_row(r));
    return v;
}

OperatorMatrix assemble(const SpectralModel& model, const Potential& q, OperatorTag tag)
{
    model.validate();
    const int support = model.bc.is_dirichlet() ? q.cos_support() : q.exp_support();
    if (support > model.N / 2 && tag != OperatorTag::L0)
        std::cerr << "warning: potential support " << support << " exceeds N/2 = " << model.N / 2
                  << "; truncation may alias\n";
    OperatorMatrix out{model, CMatrix(), tag};
    switch (tag) {
    case OperatorTag::L0:
        out.entries = lambda_diagonal(model).cast<cplx>().asDiagonal();
        break;
    case OperatorTag::Q:
        out.entries = q_matrix(model, q);
        break;
    case OperatorTag::L:
        out.entries = -q_matrix(model, q);
        out.entries.diagonal() += lambda_diagonal(model).cast<cplx>();
        break;
    default:
        throw std::invalid_argument("assemble builds only L0, Q and L");
    }
    return out;
}

OperatorMatrix projection(const SpectralModel& model, int n)
{
    OperatorMatrix out{model, CMatrix::Zero(model.dim(), model.dim()), OperatorTag::Custom};
    for (int r : model.block_rows(n))
        out.entries(r, r) = 1.0;
    return out;
}

CMatrix corner_projection(const SpectralModel& model, int m)
{
    CMatrix P = CMatrix::Zero(model.dim(), model.dim());
    for (int r = 0; r < model.dim(); ++r)
        if (model.index_of_row(r) <= m)
            P(r, r) = 1.0;
    return P;
}

} // namespace evenspec

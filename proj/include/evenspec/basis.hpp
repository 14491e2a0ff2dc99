#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evenspec/potential.hpp"
#include "evenspec/types.hpp"

namespace evenspec {

enum class BoundaryKind { Periodic, Antiperiodic, Dirichlet };

struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::Periodic;

    /// 0 for periodic, 1 for antiperiodic, empty for Dirichlet.
    std::optional<int> theta() const;
    bool is_dirichlet() const { return kind == BoundaryKind::Dirichlet; }
    /// First spectral index: 0 for per/ap, 1 for Dirichlet.
    int first_index() const { return is_dirichlet() ? 1 : 0; }

    static BoundaryCondition parse(const std::string& s);
    std::string name() const;
};

/**
 * Finite section of the unperturbed operator.  For per/ap the basis labels
 * run over -N-theta..N in increasing order; for Dirichlet over 1..N.
 * Spectral index n groups the labels {-n-theta, n} (per/ap) or {n} (dir).
 */
struct SpectralModel {
    BoundaryCondition bc;
    int k = 2;
    double omega = 1.0;
    int N = 64;

    void validate() const;

    int theta() const { return bc.theta().value_or(0); }
    int dim() const;
    int first_index() const { return bc.first_index(); }
    int last_index() const { return N; }

    int label_of_row(int row) const;
    int row_of_label(int label) const;
    std::vector<int> labels() const;
    /// Spectral index n whose block contains this label.
    int index_of_label(int label) const;
    int index_of_row(int row) const { return index_of_label(label_of_row(row)); }
    /// Rows of block n, ordered (-n-theta, n); a single row for per n=0 and dir.
    std::vector<int> block_rows(int n) const;

    /// 2n+theta (per/ap) or n (dir): lambda_n = (pi w / omega)^{2k}.
    long wave_number(int n) const;
    double lambda0(int n) const;
    /// (pi/omega)^{2k}
    double lambda_scale() const;
    /// lambda0(a) - lambda0(b), evaluated with a single rounding when the
    /// integer powers fit in 128 bits.
    double lambda_gap(int a, int b) const;
};

enum class OperatorTag { L0, Q, L, JlQ, B, Xstar, Custom };

std::string to_string(OperatorTag t);

struct OperatorMatrix {
    SpectralModel model;
    CMatrix entries;
    OperatorTag tag = OperatorTag::Custom;

    std::vector<int> row_index() const { return model.labels(); }
};

cplx q_matrix_element(const SpectralModel& model, const Potential& q, int s, int j);

/// Q matrix in the model basis (dense).
CMatrix q_matrix(const SpectralModel& model, const Potential& q);
/// Diagonal of unperturbed eigenvalues, one per row.
Eigen::VectorXd lambda_diagonal(const SpectralModel& model);

OperatorMatrix assemble(const SpectralModel& model, const Potential& q, OperatorTag tag);
OperatorMatrix projection(const SpectralModel& model, int n);

/// Orthogonal projection onto the blocks with index <= m.
CMatrix corner_projection(const SpectralModel& model, int m);

} // namespace evenspec

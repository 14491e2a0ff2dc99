#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"

#include "evenspec/oracle.hpp"
#include "evenspec/similarity.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace evenspec;

namespace {

SpectralModel model_of(const char* bc, int N = 32, int k = 2, double omega = 1.0)
{
    return SpectralModel{BoundaryCondition::parse(bc), k, omega, N};
}

// Entrywise Gamma_m and J_m with plain eigenvalue differences.
CMatrix gamma_direct(const SpectralModel& m, int corner, const CMatrix& X)
{
    CMatrix G = CMatrix::Zero(X.rows(), X.cols());
    for (int r = 0; r < X.rows(); ++r)
        for (int c = 0; c < X.cols(); ++c) {
            const int a = m.index_of_row(r), b = m.index_of_row(c);
            if (a == b || (a <= corner && b <= corner))
                continue;
            G(r, c) = X(r, c) / (m.lambda0(a) - m.lambda0(b));
        }
    return G;
}

CMatrix j_direct(const SpectralModel& m, int corner, const CMatrix& X)
{
    CMatrix J = CMatrix::Zero(X.rows(), X.cols());
    for (int r = 0; r < X.rows(); ++r)
        for (int c = 0; c < X.cols(); ++c) {
            const int a = m.index_of_row(r), b = m.index_of_row(c);
            if (a == b || (a <= corner && b <= corner))
                J(r, c) = X(r, c);
        }
    return J;
}

CMatrix phi_direct(const SpectralModel& m, int corner, const CMatrix& B, const CMatrix& X)
{
    const CMatrix G = gamma_direct(m, corner, X);
    return B * G - G * j_direct(m, corner, B) - G * j_direct(m, corner, B * G) + B;
}

Potential scaled_cosine(double a)
{
    return Potential::from_exp_coeffs({{1, a}, {-1, a}}, 1.0, SmoothnessClass::Smooth);
}

} // namespace

TEST_CASE("find_l")
{
    for (const char* bc : {"per", "ap", "dir"}) {
        SpectralModel m = model_of(bc);
        CHECK(find_l(m, fixtures::zero()) == m.first_index());
        Potential tiny = Potential::from_exp_coeffs({{1, 1e-6}}, 1.0, SmoothnessClass::Smooth);
        CHECK(find_l(m, tiny) == m.first_index());
    }
    // Scan l upward with a direct Gamma_l.
    for (const char* bc : {"per", "ap", "dir"}) {
        SpectralModel m = model_of(bc);
        Potential q = scaled_cosine(20000.0);
        const CMatrix Q = q_matrix(m, q);
        int expected = -1;
        for (int l = m.first_index(); l < m.N && expected < 0; ++l)
            if (gamma_direct(m, l, Q).norm() <= 0.5)
                expected = l;
        CAPTURE(std::string(bc));
        CHECK(expected > m.first_index());
        CHECK(find_l(m, q) == expected);
    }
}

TEST_CASE("preliminary transform")
{
    for (const char* bc : {"per", "ap", "dir"}) {
        SpectralModel m = model_of(bc);
        CHECK(preliminary_transform(m, fixtures::zero(), m.first_index()).B.entries.isZero(0.0));
        auto pre = preliminary_transform(m, fixtures::constant(cplx(3.0, 1.0)), m.first_index());
        CHECK(pre.B.entries.isZero(0.0));
        CHECK(pre.JlQ.entries.isZero(0.0));
    }
}

TEST_CASE("B agrees with the Neumann series and the similarity identity holds")
{
    for (const char* bc : {"per", "ap", "dir"}) {
        SpectralModel m = model_of(bc, 24);
        Potential q = fixtures::standard().without_mean();
        const int l = find_l(m, q);
        auto pre = preliminary_transform(m, q, l);

        const CMatrix Q = q_matrix(m, q);
        const CMatrix U = gamma_direct(m, l, Q);
        const CMatrix rhs = Q * U - U * j_direct(m, l, Q);
        CMatrix series = rhs, term = rhs;
        for (int j = 1; j < 200 && term.norm() > 1e-16; ++j) {
            term = -U * term;
            series += term;
        }
        CAPTURE(std::string(bc));
        CHECK((pre.B.entries - series).norm() <= 1e-13 * std::max(1.0, series.norm()));

        const int d = m.dim();
        const CMatrix L0 = lambda_diagonal(m).cast<cplx>().asDiagonal();
        const CMatrix I = CMatrix::Identity(d, d);
        const CMatrix Q0 = pre.JlQ.entries + pre.B.entries;
        const CMatrix lhs = (L0 - Q) * (I + U);
        const CMatrix rhs2 = (I + U) * (L0 - Q0);
        // Compare off the large diagonal of L0, where the identity is not
        // drowned by rounding of lambda_n.
        CMatrix diff = lhs - rhs2;
        CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12 * L0.cwiseAbs().maxCoeff());
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c) {
                const double scale = std::max({1.0, std::abs(L0(r, r)), std::abs(L0(c, c))});
                CHECK(std::abs(diff(r, c)) <= 1e-14 * scale);
            }
    }
}

TEST_CASE("find_m arithmetic")
{
    const double pi = std::numbers::pi;
    SpectralModel per = model_of("per", 32, 2, pi);
    CHECK(find_m(per, 0.0, 0) == 1);
    CHECK(find_m(per, 100.0, 0) == 3);
    SpectralModel dir = model_of("dir", 32, 2, pi);
    CHECK(find_m(dir, 1.0, 0) == 2);
    CHECK(find_m(dir, 0.0, 4) == 5);
    CHECK_THROWS_AS(find_m(per, 1e30, 0), NumericalError);
}

TEST_CASE("fixed point on trivial inputs")
{
    SpectralModel m = model_of("per", 16);
    HSOperator zero{m, CMatrix::Zero(m.dim(), m.dim()), OperatorTag::B};
    auto fp = solve_fixed_point(m, zero, 1);
    CHECK(fp.Xstar.entries.isZero(0.0));
    CHECK(fp.iterations == 1);

    // B already inside the range of J_m: Gamma_m B = 0, so B is fixed.
    oracles::Generator gen(8);
    Transformers t(m);
    HSOperator blocky{m, t.J(gen.matrix(m.dim(), m.dim()), 2), OperatorTag::B};
    auto fb = solve_fixed_point(m, blocky, 2);
    CHECK(fb.Xstar.entries == blocky.entries);
    CHECK(fb.residual == 0.0);
}

TEST_CASE("fixed point on the standard potential, checked by a separate evaluation of Phi")
{
    for (const char* bc : {"per", "ap", "dir"}) {
        SpectralModel m = model_of(bc, 48);
        Potential q = fixtures::standard();
        const int l = find_l(m, q);
        auto pre = preliminary_transform(m, q, l);
        const int mm = find_m(m, pre.B, l);
        auto fp = solve_fixed_point(m, pre.B, mm);
        CAPTURE(std::string(bc));
        CHECK(fp.residual <= 1e-12);
        CHECK(fp.iterations <= 60);
        const CMatrix& X = fp.Xstar.entries;
        CHECK((phi_direct(m, mm, pre.B.entries, X) - X).norm() <= 1e-11);
        CHECK((X - pre.B.entries).norm() <= 3.0 * pre.B.entries.norm());
    }
}

TEST_CASE("fixed point reports failure outside the contraction regime")
{
    SpectralModel m = model_of("per", 16);
    oracles::Generator gen(99);
    HSOperator big{m, gen.matrix(m.dim(), m.dim(), 1e7), OperatorTag::B};
    CHECK_THROWS_AS(solve_fixed_point(m, big, 1), NumericalError);
    FixedPointOptions few;
    few.max_iter = 2;
    few.tol = 1e-300;
    Potential q = fixtures::standard();
    auto pre = preliminary_transform(m, q, find_l(m, q));
    CHECK_THROWS_AS(solve_fixed_point(m, pre.B, find_m(m, pre.B, find_l(m, q)), few), NumericalError);
}

TEST_CASE("blocks of trivial potentials")
{
    for (const char* bc : {"per", "ap", "dir"}) {
        SpectralModel m = model_of(bc, 16);
        SimilarityResult z = run_similarity(m, fixtures::zero());
        for (const auto& [n, A] : z.blocks) {
            CHECK(A.rows() == static_cast<int>(m.block_rows(n).size()));
            CHECK((A - m.lambda0(n) * CMatrix::Identity(A.rows(), A.rows())).isZero(0.0));
        }
        auto ce = z.corner_eigenvalues();
        std::vector<double> expect;
        for (int r : z.corner_rows)
            expect.push_back(m.lambda0(m.index_of_row(r)));
        std::sort(expect.begin(), expect.end());
        REQUIRE(ce.size() == expect.size());
        for (std::size_t i = 0; i < ce.size(); ++i)
            CHECK(std::abs(ce[i] - expect[i]) <= 1e-12 * std::max(1.0, expect[i]));

        const cplx c(1.5, -2.0);
        SimilarityResult s = run_similarity(m, fixtures::constant(c));
        for (const auto& [n, A] : s.blocks)
            for (cplx e : s.block_eigenvalues(n))
                CHECK(std::abs(e - (m.lambda0(n) - c)) <= 1e-15 * m.lambda0(n) + 1e-15);
    }
    // Corner dimension: ap carries 2(m+1) rows, per 2m+1.
    SimilarityResult ap = run_similarity(model_of("ap", 16), fixtures::standard());
    CHECK(static_cast<int>(ap.corner_rows.size()) == 2 * (ap.m + 1));
    SimilarityResult per = run_similarity(model_of("per", 16), fixtures::standard());
    CHECK(static_cast<int>(per.corner_rows.size()) == 2 * per.m + 1);
}

TEST_CASE("block eigenvalues reproduce the spectrum of the truncated operator")
{
    for (const char* bc : {"per", "ap", "dir"}) {
        SpectralModel m = model_of(bc, 48);
        Potential q = fixtures::standard();
        SimilarityResult sim = run_similarity(m, q);
        // The refined oracle resolves small eigenvalues to absolute accuracy;
        // a plain dense solve is limited to about eps * lambda_N.
        MatchedSpectrum ms = truncated_spectrum(m, q);
        auto nearest = [&](cplx z) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& e : ms.all())
                best = std::min(best, std::abs(e.value - z));
            return best;
        };
        CAPTURE(std::string(bc));
        for (int n = sim.m + 1; n <= m.N / 2; ++n)
            for (cplx e : sim.block_eigenvalues(n))
                CHECK(nearest(e) <= 1e-12 * std::abs(e));
        for (cplx e : sim.corner_eigenvalues())
            CHECK(nearest(e) <= 1e-9 * std::max(1.0, std::abs(e)));
    }
}

TEST_CASE("block_eigs")
{
    const cplx u(1.0, 2.0), v(-3.0, 0.5);
    Eigen::Matrix2cd D;
    D << u, 0.0, 0.0, v;
    auto e = block_eigs(D);
    CHECK(((std::abs(e[0] - u) < 1e-15 && std::abs(e[1] - v) < 1e-15) ||
           (std::abs(e[0] - v) < 1e-15 && std::abs(e[1] - u) < 1e-15)));

    const cplx a(2.0, 1.0), b(0.5, -1.0);
    Eigen::Matrix2cd A;
    A << 0.0, a, b, 0.0;
    auto f = block_eigs(A);
    const cplx r = std::sqrt(a * b);
    CHECK(std::abs(f[0] + r) < 1e-15);
    CHECK(std::abs(f[1] - r) < 1e-15);

    // Characteristic polynomial z^2 - tr z + det with the other root form.
    oracles::Generator gen(31);
    for (int trial = 0; trial < 200; ++trial) {
        Eigen::Matrix2cd M = gen.matrix(2, 2, 3.0);
        const cplx tr = M.trace(), det = M.determinant();
        const cplx disc = std::sqrt(tr * tr - 4.0 * det);
        cplx z1 = 0.5 * (tr + disc), z2 = 0.5 * (tr - disc);
        auto g = block_eigs(M);
        const double straight = std::abs(g[0] - z1) + std::abs(g[1] - z2);
        const double crossed = std::abs(g[0] - z2) + std::abs(g[1] - z1);
        CHECK(std::min(straight, crossed) <= 1e-13 * (1.0 + std::abs(tr)));
    }
}

TEST_CASE("similarity result serialises the corner dimension and blocks")
{
    SimilarityResult sim = run_similarity(model_of("ap", 16), fixtures::standard());
    auto j = sim.to_json();
    CHECK(j.at("corner_dimension").get<int>() == static_cast<int>(sim.corner_rows.size()));
    CHECK(j.at("blocks").size() == sim.blocks.size());
    CHECK(j.at("l").get<int>() == sim.l);
    CHECK(j.at("m").get<int>() == sim.m);
}

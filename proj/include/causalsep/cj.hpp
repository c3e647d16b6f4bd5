// cj.hpp — Choi representations of maps between an input and an output factor.
//
// Conventions: for a linear operator A : H_in -> H_out the pure representation
// is |A*>> = (1 x A*)|1>> on factors [in, out], with |1>> = sum_j |j>|j>.
// For a map given by Kraus operators {K}, M = sum_k |K_k*>><<K_k*|; the map is
// completely positive iff M >= 0 and trace preserving iff tr_out M = 1_in.

#pragma once

#include "causalsep/labeled_operator.hpp"

namespace causalsep {

// |1>> = sum_j |j>^a |j>^b on two equal-dimension factors.
inline PureVector max_entangled(const SystemLabel& a, const SystemLabel& b) {
    if (a.dim != b.dim) throw std::invalid_argument("max_entangled: dims differ");
    Vector v = Vector::Zero(a.dim * b.dim);
    for (Eigen::Index j = 0; j < a.dim; ++j) v(j * b.dim + j) = 1.0;
    return PureVector({a, b}, std::move(v));
}

// |A*>> for A of shape (d_out, d_in), on factors [in, out].
inline PureVector cj_pure(const Matrix& a, const SystemLabel& in, const SystemLabel& out) {
    if (a.rows() != out.dim || a.cols() != in.dim)
        throw std::invalid_argument("cj_pure: operator shape does not match labels");
    Vector v(in.dim * out.dim);
    for (Eigen::Index j = 0; j < in.dim; ++j)
        for (Eigen::Index k = 0; k < out.dim; ++k)
            v(j * out.dim + k) = std::conj(a(k, j));
    return PureVector({in, out}, std::move(v));
}

// Recovers A from |A*>>: A|psi> = [<psi| x 1 . |A*>>]*.
inline Matrix cj_pure_inverse(const PureVector& v) {
    if (v.systems.size() != 2) throw std::invalid_argument("cj_pure_inverse: need [in,out]");
    const Eigen::Index di = v.systems[0].dim, d_out = v.systems[1].dim;
    Matrix a(d_out, di);
    for (Eigen::Index j = 0; j < di; ++j)
        for (Eigen::Index k = 0; k < d_out; ++k)
            a(k, j) = std::conj(v.vec(j * d_out + k));
    return a;
}

// M = sum_k |K_k*>><<K_k*| on factors [in, out].
inline LabeledOperator cj_from_kraus(const std::vector<Matrix>& kraus,
                                     const SystemLabel& in, const SystemLabel& out) {
    if (kraus.empty()) throw std::invalid_argument("cj_from_kraus: empty Kraus list");
    Matrix m = Matrix::Zero(in.dim * out.dim, in.dim * out.dim);
    for (const auto& k : kraus) {
        if (k.rows() != out.dim || k.cols() != in.dim)
            throw std::invalid_argument("cj_from_kraus: inconsistent Kraus shapes");
        Vector v = cj_pure(k, in, out).vec;
        m += v * v.adjoint();
    }
    return LabeledOperator({in, out}, std::move(m), true);
}

// Applies a map through its CJ matrix: rho -> [tr_in((rho x 1) M)]^T.
inline Matrix cj_apply(const LabeledOperator& m, const Matrix& rho) {
    if (m.systems.size() != 2) throw std::invalid_argument("cj_apply: need [in,out]");
    const Eigen::Index di = m.systems[0].dim, d_out = m.systems[1].dim;
    if (rho.rows() != di || rho.cols() != di)
        throw std::invalid_argument("cj_apply: state dimension mismatch");
    Matrix out = Matrix::Zero(d_out, d_out);
    for (Eigen::Index k = 0; k < d_out; ++k)
        for (Eigen::Index l = 0; l < d_out; ++l) {
            Complex acc = 0;
            for (Eigen::Index i = 0; i < di; ++i)
                for (Eigen::Index j = 0; j < di; ++j)
                    acc += rho(i, j) * m.mat(j * d_out + k, i * d_out + l);
            // [tr_in(...)]^T : transposition swaps (k,l)
            out(l, k) = acc;
        }
    return out;
}

inline bool cj_is_trace_preserving(const LabeledOperator& m, double tol = 1e-10) {
    LabeledOperator red = partial_trace(m, {m.systems[1].name});
    const Eigen::Index di = m.systems[0].dim;
    return (red.mat - Matrix::Identity(di, di)).cwiseAbs().maxCoeff() <= tol;
}

inline bool cj_is_cp(const LabeledOperator& m, double tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Matrix> es((m.mat + m.mat.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff() >= -tol;
}

// CJ matrix of preparing state rho regardless of input: 1_in x rho^T.
inline LabeledOperator cj_preparation(const Matrix& rho, const SystemLabel& in,
                                      const SystemLabel& out) {
    if (rho.rows() != out.dim) throw std::invalid_argument("cj_preparation: dim mismatch");
    LabeledOperator r({out}, rho.transpose(), false);
    LabeledOperator res = tensor(identity_on({in}), r);
    res.symmetrize();
    return res;
}

// CJ matrix of measuring POVM element E then preparing rho: E x rho^T.
inline LabeledOperator cj_measure_prepare(const Matrix& e, const Matrix& rho,
                                          const SystemLabel& in, const SystemLabel& out) {
    LabeledOperator el({in}, e, false);
    LabeledOperator r({out}, rho.transpose(), false);
    LabeledOperator res = tensor(el, r);
    res.symmetrize();
    return res;
}

// CJ matrix of the composition later ∘ earlier (link product over the shared
// middle space): earlier on [in, mid], later on [mid, out].
inline LabeledOperator cj_compose(const LabeledOperator& later,
                                  const LabeledOperator& earlier) {
    const SystemLabel in = earlier.systems[0];
    const SystemLabel mid = earlier.systems[1];
    const SystemLabel mid2 = later.systems[0];
    const SystemLabel out = later.systems[1];
    if (mid.dim != mid2.dim)
        throw std::invalid_argument("cj_compose: middle dimensions do not chain");
    const Eigen::Index di = in.dim, dm = mid.dim, d_out = out.dim;
    // M_{later∘earlier}[(i,o),(i',o')] = sum_{m,m'} E[(i,m),(i',m')] L[(m,o),(m',o')]
    Matrix res = Matrix::Zero(di * d_out, di * d_out);
    for (Eigen::Index i = 0; i < di; ++i)
        for (Eigen::Index ip = 0; ip < di; ++ip)
            for (Eigen::Index o = 0; o < d_out; ++o)
                for (Eigen::Index op = 0; op < d_out; ++op) {
                    Complex acc = 0;
                    for (Eigen::Index mm = 0; mm < dm; ++mm)
                        for (Eigen::Index mp = 0; mp < dm; ++mp)
                            acc += earlier.mat(i * dm + mm, ip * dm + mp) *
                                   later.mat(mm * d_out + o, mp * d_out + op);
                    res(i * d_out + o, ip * d_out + op) = acc;
                }
    LabeledOperator r({in, out}, std::move(res), false);
    if (later.hermitian && earlier.hermitian) r.symmetrize();
    return r;
}

}  // namespace causalsep

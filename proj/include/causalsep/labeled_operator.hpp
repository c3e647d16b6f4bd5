// labeled_operator.hpp — Operators over named tensor factors: tensor products,
// partial traces, trace-and-replace maps, factor permutations.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalsep {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

constexpr double kHermTol = 1e-12;

// A named tensor factor with its dimension.
struct SystemLabel {
    std::string name;
    Eigen::Index dim = 1;

    friend bool operator==(const SystemLabel& a, const SystemLabel& b) {
        return a.name == b.name && a.dim == b.dim;
    }
};

inline Eigen::Index product_dim(const std::vector<SystemLabel>& systems) {
    Eigen::Index d = 1;
    for (const auto& s : systems) d *= s.dim;
    return d;
}

namespace detail {

inline void check_unique_names(const std::vector<SystemLabel>& systems) {
    for (size_t i = 0; i < systems.size(); ++i) {
        if (systems[i].dim < 1)
            throw std::invalid_argument("system '" + systems[i].name + "' has dim < 1");
        for (size_t j = i + 1; j < systems.size(); ++j)
            if (systems[i].name == systems[j].name)
                throw std::invalid_argument("duplicate factor name '" + systems[i].name + "'");
    }
}

// Row-major strides for a factor list.
inline std::vector<Eigen::Index> strides(const std::vector<SystemLabel>& systems) {
    std::vector<Eigen::Index> st(systems.size(), 1);
    for (size_t k = systems.size(); k-- > 1;)
        st[k - 1] = st[k] * systems[k].dim;
    return st;
}

}  // namespace detail

// A square operator over an ordered list of named factors. The matrix side is
// the product of factor dimensions, with row-major multi-indexing (the first
// factor is the most significant digit).
struct LabeledOperator {
    std::vector<SystemLabel> systems;
    Matrix mat;
    bool hermitian = false;
    double herm_correction = 0.0;            // norm removed by last symmetrize()
    std::vector<std::string> audit;          // automatic permutation trail

    LabeledOperator() : mat(Matrix::Zero(1, 1)) {}

    LabeledOperator(std::vector<SystemLabel> sys, Matrix m, bool herm = false)
        : systems(std::move(sys)), mat(std::move(m)), hermitian(herm) {
        detail::check_unique_names(systems);
        const Eigen::Index d = product_dim(systems);
        if (mat.rows() != d || mat.cols() != d)
            throw std::invalid_argument("matrix side does not match factor dimensions");
        if (hermitian) {
            const double dev = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
            if (dev > kHermTol)
                throw std::invalid_argument("hermitian flag set but operator is not hermitian");
        }
    }

    Eigen::Index dim() const { return mat.rows(); }

    bool has_factor(const std::string& name) const {
        return std::any_of(systems.begin(), systems.end(),
                           [&](const SystemLabel& s) { return s.name == name; });
    }

    Eigen::Index factor_dim(const std::string& name) const {
        for (const auto& s : systems)
            if (s.name == name) return s.dim;
        throw std::invalid_argument("unknown factor '" + name + "'");
    }

    std::vector<std::string> factor_names() const {
        std::vector<std::string> out;
        out.reserve(systems.size());
        for (const auto& s : systems) out.push_back(s.name);
        return out;
    }

    Complex trace() const { return mat.trace(); }

    // Force exact hermiticity via (M + M^dagger)/2, recording the correction.
    LabeledOperator& symmetrize() {
        Matrix h = (mat + mat.adjoint()) / 2.0;
        herm_correction = (mat - h).cwiseAbs().maxCoeff();
        mat = std::move(h);
        hermitian = true;
        return *this;
    }
};

// A vector over named factors (process vectors, CJ vectors).
struct PureVector {
    std::vector<SystemLabel> systems;
    Vector vec;

    PureVector() : vec(Vector::Zero(1)) {}

    PureVector(std::vector<SystemLabel> sys, Vector v)
        : systems(std::move(sys)), vec(std::move(v)) {
        detail::check_unique_names(systems);
        if (vec.size() != product_dim(systems))
            throw std::invalid_argument("vector length does not match factor dimensions");
    }

    // |v><v| as a labeled operator.
    LabeledOperator projector() const {
        return LabeledOperator(systems, vec * vec.adjoint(), true);
    }
};

inline LabeledOperator identity_on(const std::vector<SystemLabel>& systems) {
    const Eigen::Index d = product_dim(systems);
    return LabeledOperator(systems, Matrix::Identity(d, d), true);
}

inline LabeledOperator tensor(const LabeledOperator& a, const LabeledOperator& b) {
    std::vector<SystemLabel> sys = a.systems;
    sys.insert(sys.end(), b.systems.begin(), b.systems.end());
    detail::check_unique_names(sys);
    const Eigen::Index da = a.dim(), db = b.dim();
    Matrix out(da * db, da * db);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j)
            out.block(i * db, j * db, db, db) = a.mat(i, j) * b.mat;
    return LabeledOperator(std::move(sys), std::move(out), a.hermitian && b.hermitian);
}

inline PureVector tensor(const PureVector& a, const PureVector& b) {
    std::vector<SystemLabel> sys = a.systems;
    sys.insert(sys.end(), b.systems.begin(), b.systems.end());
    detail::check_unique_names(sys);
    Vector out(a.vec.size() * b.vec.size());
    for (Eigen::Index i = 0; i < a.vec.size(); ++i)
        out.segment(i * b.vec.size(), b.vec.size()) = a.vec(i) * b.vec;
    return PureVector(std::move(sys), std::move(out));
}

// Traces out the named factors; the remaining factor order is preserved.
inline LabeledOperator partial_trace(const LabeledOperator& op,
                                     const std::vector<std::string>& names) {
    for (const auto& n : names) op.factor_dim(n);  // validates

    std::vector<SystemLabel> keep, traced;
    for (const auto& s : op.systems) {
        if (std::find(names.begin(), names.end(), s.name) != names.end())
            traced.push_back(s);
        else
            keep.push_back(s);
    }
    const Eigen::Index dk = product_dim(keep), dt = product_dim(traced);

    // Decompose each full index into (kept, traced) parts.
    const auto st = detail::strides(op.systems);
    std::vector<Eigen::Index> kept_of(op.dim()), traced_of(op.dim());
    {
        const auto stk = detail::strides(keep), stt = detail::strides(traced);
        for (Eigen::Index idx = 0; idx < op.dim(); ++idx) {
            Eigen::Index rem = idx, ik = 0, it = 0;
            size_t pk = 0, pt = 0;
            for (size_t f = 0; f < op.systems.size(); ++f) {
                const Eigen::Index digit = rem / st[f];
                rem %= st[f];
                if (std::find(names.begin(), names.end(), op.systems[f].name) != names.end())
                    it += digit * stt[pt++];
                else
                    ik += digit * stk[pk++];
            }
            kept_of[idx] = ik;
            traced_of[idx] = it;
        }
    }

    Matrix out = Matrix::Zero(dk, dk);
    // Sum over diagonal traced indices. Build a lookup from (kept, traced) to
    // full index once to keep the inner loop tight.
    std::vector<Eigen::Index> full_of(dk * dt);
    for (Eigen::Index idx = 0; idx < op.dim(); ++idx)
        full_of[kept_of[idx] * dt + traced_of[idx]] = idx;
    for (Eigen::Index i = 0; i < dk; ++i)
        for (Eigen::Index j = 0; j < dk; ++j) {
            Complex acc = 0;
            for (Eigen::Index t = 0; t < dt; ++t)
                acc += op.mat(full_of[i * dt + t], full_of[j * dt + t]);
            out(i, j) = acc;
        }
    return LabeledOperator(std::move(keep), std::move(out), op.hermitian);
}

// Conjugates by the index permutation realizing the new factor order.
inline LabeledOperator permute_systems(const LabeledOperator& op,
                                       const std::vector<std::string>& new_order) {
    if (new_order.size() != op.systems.size())
        throw std::invalid_argument("permutation does not cover all factors");
    std::vector<size_t> perm;  // new slot -> old slot
    perm.reserve(new_order.size());
    for (const auto& n : new_order) {
        auto it = std::find_if(op.systems.begin(), op.systems.end(),
                               [&](const SystemLabel& s) { return s.name == n; });
        if (it == op.systems.end())
            throw std::invalid_argument("unknown factor '" + n + "' in permutation");
        perm.push_back(static_cast<size_t>(it - op.systems.begin()));
    }
    std::vector<bool> seen(perm.size(), false);
    for (size_t p : perm) {
        if (seen[p]) throw std::invalid_argument("repeated factor in permutation");
        seen[p] = true;
    }

    std::vector<SystemLabel> sys;
    sys.reserve(perm.size());
    for (size_t p : perm) sys.push_back(op.systems[p]);

    const auto st_old = detail::strides(op.systems);
    const auto st_new = detail::strides(sys);
    std::vector<Eigen::Index> map(op.dim());
    for (Eigen::Index idx = 0; idx < op.dim(); ++idx) {
        Eigen::Index rem = idx, out = 0;
        std::vector<Eigen::Index> digit(op.systems.size());
        for (size_t f = 0; f < op.systems.size(); ++f) {
            digit[f] = rem / st_old[f];
            rem %= st_old[f];
        }
        for (size_t k = 0; k < perm.size(); ++k) out += digit[perm[k]] * st_new[k];
        map[idx] = out;
    }
    Matrix out(op.dim(), op.dim());
    for (Eigen::Index i = 0; i < op.dim(); ++i)
        for (Eigen::Index j = 0; j < op.dim(); ++j)
            out(map[i], map[j]) = op.mat(i, j);
    return LabeledOperator(std::move(sys), std::move(out), op.hermitian);
}

inline PureVector permute_systems(const PureVector& v,
                                  const std::vector<std::string>& new_order) {
    LabeledOperator tmp(v.systems, Matrix::Zero(v.vec.size(), v.vec.size()));
    // reuse the operator index map by permuting a rank-1 embedding
    std::vector<size_t> perm;
    for (const auto& n : new_order) {
        auto it = std::find_if(v.systems.begin(), v.systems.end(),
                               [&](const SystemLabel& s) { return s.name == n; });
        if (it == v.systems.end())
            throw std::invalid_argument("unknown factor '" + n + "' in permutation");
        perm.push_back(static_cast<size_t>(it - v.systems.begin()));
    }
    std::vector<SystemLabel> sys;
    for (size_t p : perm) sys.push_back(v.systems[p]);
    const auto st_old = detail::strides(v.systems);
    const auto st_new = detail::strides(sys);
    Vector out(v.vec.size());
    for (Eigen::Index idx = 0; idx < v.vec.size(); ++idx) {
        Eigen::Index rem = idx, o = 0;
        std::vector<Eigen::Index> digit(v.systems.size());
        for (size_t f = 0; f < v.systems.size(); ++f) {
            digit[f] = rem / st_old[f];
            rem %= st_old[f];
        }
        for (size_t k = 0; k < perm.size(); ++k) o += digit[perm[k]] * st_new[k];
        out(o) = v.vec(idx);
    }
    return PureVector(std::move(sys), std::move(out));
}

// _X W: traces out the factors X and re-inserts the normalized identity at
// their original positions. Idempotent, trace preserving, self-adjoint.
inline LabeledOperator trace_and_replace(const LabeledOperator& op,
                                         const std::vector<std::string>& names) {
    if (names.empty()) return op;
    LabeledOperator rest = partial_trace(op, names);
    std::vector<SystemLabel> xs;
    for (const auto& s : op.systems)
        if (std::find(names.begin(), names.end(), s.name) != names.end()) xs.push_back(s);
    LabeledOperator idX = identity_on(xs);
    idX.mat /= static_cast<double>(product_dim(xs));
    LabeledOperator out = rest.systems.empty()
        ? LabeledOperator(idX.systems, idX.mat * rest.mat(0, 0), false)
        : tensor(idX, rest);
    out.hermitian = op.hermitian;
    return permute_systems(out, op.factor_names());
}

// Hilbert-Schmidt inner product tr(A^dagger B); real for hermitian pairs.
inline Complex hs_inner(const LabeledOperator& a, const LabeledOperator& b) {
    if (a.factor_names() != b.factor_names())
        throw std::invalid_argument("hs_inner: factor mismatch");
    return (a.mat.adjoint() * b.mat).trace();
}

// Permutes b to a's factor order if needed (recording the step), then returns
// tr(a.mat * b.mat). Both operators must carry the same factor set.
inline double contract(const LabeledOperator& a, LabeledOperator b) {
    if (a.factor_names() != b.factor_names()) {
        b = permute_systems(b, a.factor_names());
        b.audit.push_back("auto-permuted to match contraction order");
    }
    return (a.mat * b.mat).trace().real();
}

// Lexicographic canonical factor order (party then I/O comes out naturally
// from names like "A_I", "A_O", "B_I", ...).
inline LabeledOperator canonical_order(const LabeledOperator& op) {
    auto names = op.factor_names();
    std::sort(names.begin(), names.end());
    if (names == op.factor_names()) return op;
    LabeledOperator out = permute_systems(op, names);
    out.audit.push_back("canonicalized factor order");
    return out;
}

// Merges adjacent factors into one named factor (no data change).
inline LabeledOperator merge_factors(const LabeledOperator& op,
                                     const std::vector<std::string>& group,
                                     const std::string& merged_name) {
    auto names = op.factor_names();
    auto it = std::search(names.begin(), names.end(), group.begin(), group.end());
    if (it == names.end())
        throw std::invalid_argument("merge_factors: group is not contiguous");
    const size_t pos = static_cast<size_t>(it - names.begin());
    std::vector<SystemLabel> sys;
    Eigen::Index dg = 1;
    for (size_t f = 0; f < op.systems.size(); ++f) {
        if (f >= pos && f < pos + group.size()) {
            dg *= op.systems[f].dim;
            if (f == pos + group.size() - 1) sys.push_back({merged_name, dg});
        } else {
            sys.push_back(op.systems[f]);
        }
    }
    return LabeledOperator(std::move(sys), op.mat, op.hermitian);
}

}  // namespace causalsep

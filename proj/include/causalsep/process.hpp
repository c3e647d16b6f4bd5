// process.hpp — Process matrices: the validity subspace projector, causal-order
// projectors, validity checks, and constructors for the named processes.

#pragma once

#include <Eigen/Eigenvalues>

#include <functional>
#include <optional>

#include "causalsep/cj.hpp"
#include "causalsep/labeled_operator.hpp"
#include "causalsep/rng.hpp"

namespace causalsep {

struct Party {
    std::string name;
    SystemLabel input;
    SystemLabel output;  // dim may be 1 (trivial)
};

struct PartyLayout {
    std::vector<Party> parties;

    Eigen::Index d_O() const {
        Eigen::Index d = 1;
        for (const auto& p : parties) d *= p.output.dim;
        return d;
    }
    Eigen::Index d_I() const {
        Eigen::Index d = 1;
        for (const auto& p : parties) d *= p.input.dim;
        return d;
    }
    std::vector<SystemLabel> all_systems() const {
        std::vector<SystemLabel> out;
        for (const auto& p : parties) {
            out.push_back(p.input);
            out.push_back(p.output);
        }
        return out;
    }
    std::vector<std::string> factor_names() const {
        std::vector<std::string> out;
        for (const auto& s : all_systems()) out.push_back(s.name);
        return out;
    }
    const Party& party(const std::string& name) const {
        for (const auto& p : parties)
            if (p.name == name) return p;
        throw std::invalid_argument("unknown party '" + name + "'");
    }
    std::vector<std::string> party_names() const {
        std::vector<std::string> out;
        for (const auto& p : parties) out.push_back(p.name);
        return out;
    }
};

inline PartyLayout bipartite_qubits() {
    return {{{"A", {"A_I", 2}, {"A_O", 2}}, {"B", {"B_I", 2}, {"B_O", 2}}}};
}

// Reduced-switch layout: C holds the control qubit and has no output.
inline PartyLayout switch_reduced_layout() {
    return {{{"A", {"A_I", 2}, {"A_O", 2}},
             {"B", {"B_I", 2}, {"B_O", 2}},
             {"C", {"C_I", 2}, {"C_O", 1}}}};
}

// Full-switch layout: C receives control and target, d_{C_I} = 4.
inline PartyLayout switch_full_layout() {
    return {{{"A", {"A_I", 2}, {"A_O", 2}},
             {"B", {"B_I", 2}, {"B_O", 2}},
             {"C", {"C_I", 4}, {"C_O", 1}}}};
}

namespace detail {

inline LabeledOperator align_to_layout(const LabeledOperator& w, const PartyLayout& layout) {
    auto want = layout.factor_names();
    auto have = w.factor_names();
    if (have == want) return w;
    auto sorted_w = want, sorted_h = have;
    std::sort(sorted_w.begin(), sorted_w.end());
    std::sort(sorted_h.begin(), sorted_h.end());
    if (sorted_w != sorted_h)
        throw std::invalid_argument("operator factors do not match party layout");
    LabeledOperator out = permute_systems(w, want);
    out.audit.push_back("aligned to party layout order");
    return out;
}

}  // namespace detail

// L_V(W) = [1 - prod_i (1 - O_i + I_i O_i) + prod_i I_i O_i] W, expanded as a
// signed sum of trace-and-replace terms over party-wise choices.
inline LabeledOperator lv_project(const LabeledOperator& w, const PartyLayout& layout) {
    LabeledOperator in = detail::align_to_layout(w, layout);
    const size_t n = layout.parties.size();
    Matrix acc = Matrix::Zero(in.dim(), in.dim());
    std::vector<int> choice(n, 0);  // 0: skip (+), 1: O (-), 2: IO (+)
    for (;;) {
        double coef = 1.0;
        std::vector<std::string> subs;
        for (size_t i = 0; i < n; ++i) {
            if (choice[i] == 1) {
                coef = -coef;
                subs.push_back(layout.parties[i].output.name);
            } else if (choice[i] == 2) {
                subs.push_back(layout.parties[i].input.name);
                subs.push_back(layout.parties[i].output.name);
            }
        }
        acc += coef * trace_and_replace(in, subs).mat;
        size_t k = 0;
        while (k < n && ++choice[k] == 3) choice[k++] = 0;
        if (k == n) break;
    }
    std::vector<std::string> all_io;
    for (const auto& p : layout.parties) {
        all_io.push_back(p.input.name);
        all_io.push_back(p.output.name);
    }
    Matrix res = in.mat - acc + trace_and_replace(in, all_io).mat;
    LabeledOperator out(in.systems, std::move(res), false);
    if (in.hermitian) out.symmetrize();
    return out;
}

// Projector onto processes compatible with the fixed order
// parties[order[0]] < parties[order[1]] < ... (first acts first); the
// composition of the commuting projectors (1 - _[X_k] + _[O_k X_k]) where X_k
// collects all systems of the parties after position k.
inline LabeledOperator causal_order_project(const LabeledOperator& w,
                                            const std::vector<std::string>& order,
                                            const PartyLayout& layout) {
    auto sorted_o = order, sorted_p = layout.party_names();
    std::sort(sorted_o.begin(), sorted_o.end());
    std::sort(sorted_p.begin(), sorted_p.end());
    if (sorted_o != sorted_p)
        throw std::invalid_argument("order is not a permutation of the parties");

    LabeledOperator cur = detail::align_to_layout(w, layout);
    for (size_t k = 0; k < order.size(); ++k) {
        std::vector<std::string> later;
        for (size_t j = k + 1; j < order.size(); ++j) {
            const Party& p = layout.party(order[j]);
            later.push_back(p.input.name);
            later.push_back(p.output.name);
        }
        std::vector<std::string> with_ok = later;
        with_ok.insert(with_ok.begin(), layout.party(order[k]).output.name);
        Matrix m = cur.mat - trace_and_replace(cur, later).mat +
                   trace_and_replace(cur, with_ok).mat;
        cur = LabeledOperator(cur.systems, std::move(m), false);
    }
    if (w.hermitian) cur.symmetrize();
    return cur;
}

struct ValidityReport {
    double min_eigenvalue = 0;
    double trace_deviation = 0;   // |tr W - d_O|
    double subspace_residual = 0; // ||W - L_V W||_max
    bool psd = false, trace_ok = false, subspace_ok = false;
    bool verdict = false;
};

inline ValidityReport is_valid_process(const LabeledOperator& w, const PartyLayout& layout,
                                       double tol = 1e-9) {
    LabeledOperator in = detail::align_to_layout(w, layout);
    ValidityReport r;
    Eigen::SelfAdjointEigenSolver<Matrix> es((in.mat + in.mat.adjoint()) / 2.0);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.psd = r.min_eigenvalue >= -tol;
    r.trace_deviation = std::abs(in.trace().real() - static_cast<double>(layout.d_O()));
    r.trace_ok = r.trace_deviation <= tol * static_cast<double>(layout.d_O());
    r.subspace_residual = (in.mat - lv_project(in, layout).mat).cwiseAbs().maxCoeff();
    r.subspace_ok = r.subspace_residual <= tol;
    r.verdict = r.psd && r.trace_ok && r.subspace_ok;
    return r;
}

struct ProcessMatrix {
    LabeledOperator op;
    PartyLayout layout;

    ProcessMatrix() = default;
    ProcessMatrix(LabeledOperator o, PartyLayout l, bool validate = true)
        : op(detail::align_to_layout(o, l)), layout(std::move(l)) {
        op.symmetrize();
        if (validate) {
            ValidityReport r = is_valid_process(op, layout);
            if (!r.verdict)
                throw std::invalid_argument("operator is not a valid process matrix");
        }
    }
};

inline bool is_causally_ordered(const ProcessMatrix& w, const std::vector<std::string>& order,
                                double tol = 1e-9) {
    LabeledOperator proj = causal_order_project(w.op, order, w.layout);
    return (proj.mat - w.op.mat).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// named processes

// White noise 1° = 1 / d_I (x) 1_outputs; trace d_O.
inline ProcessMatrix white_noise(const PartyLayout& layout) {
    LabeledOperator id = identity_on(layout.all_systems());
    id.mat /= static_cast<double>(layout.d_I());
    return ProcessMatrix(std::move(id), layout);
}

namespace paulis {
inline Matrix I() { return Matrix::Identity(2, 2); }
inline Matrix X() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline Matrix Y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}
inline Matrix Z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
}  // namespace paulis

namespace detail {
inline LabeledOperator pauli_word(const PartyLayout& layout,
                                  const std::vector<Matrix>& word) {
    auto sys = layout.all_systems();
    LabeledOperator out({sys[0]}, word[0], false);
    for (size_t k = 1; k < sys.size(); ++k)
        out = tensor(out, LabeledOperator({sys[k]}, word[k], false));
    return out;
}
}  // namespace detail

// W_OCB = 1/4 [ 1 + (1 Z Z 1 + Z 1 X Z)/sqrt(2) ] on qubit factors
// [A_I, A_O, B_I, B_O].
inline ProcessMatrix w_ocb() {
    using namespace paulis;
    PartyLayout lay = bipartite_qubits();
    Matrix m = detail::pauli_word(lay, {I(), I(), I(), I()}).mat;
    m += (detail::pauli_word(lay, {I(), Z(), Z(), I()}).mat +
          detail::pauli_word(lay, {Z(), I(), X(), Z()}).mat) / std::sqrt(2.0);
    return ProcessMatrix(LabeledOperator(lay.all_systems(), m / 4.0, true), lay);
}

// (W_OCB + lambda 1°) / (1 + lambda).
inline ProcessMatrix w_ocb_noisy(double lambda) {
    if (lambda < 0) throw std::invalid_argument("w_ocb_noisy: lambda < 0");
    ProcessMatrix w = w_ocb();
    ProcessMatrix noise = white_noise(w.layout);
    Matrix m = (w.op.mat + lambda * noise.op.mat) / (1.0 + lambda);
    return ProcessMatrix(LabeledOperator(w.op.systems, std::move(m), true), w.layout);
}

// The explicit causally ordered pair averaging to w_ocb_noisy(lambda); only
// positive semidefinite (hence valid) for lambda >= sqrt(2) - 1.
inline std::pair<ProcessMatrix, ProcessMatrix> ocb_decomposition(double lambda) {
    const double lo = std::sqrt(2.0) - 1.0;
    if (lambda < lo - 1e-12)
        throw std::invalid_argument(
            "ocb_decomposition: components are not positive semidefinite below "
            "lambda = sqrt(2)-1; no valid causally separable decomposition there");
    using namespace paulis;
    PartyLayout lay = bipartite_qubits();
    const double c = std::sqrt(2.0) / (1.0 + lambda);
    Matrix id = Matrix::Identity(16, 16);
    Matrix ab = (id + c * detail::pauli_word(lay, {I(), Z(), Z(), I()}).mat) / 4.0;
    Matrix ba = (id + c * detail::pauli_word(lay, {Z(), I(), X(), Z()}).mat) / 4.0;
    return {ProcessMatrix(LabeledOperator(lay.all_systems(), std::move(ab), true), lay),
            ProcessMatrix(LabeledOperator(lay.all_systems(), std::move(ba), true), lay)};
}

// Process vector of the quantum switch with control in (|0>+|1>)/sqrt(2) and
// target in psi, on qubit factors [A_I, A_O, B_I, B_O, C_It, C_Ic].
inline PureVector switch_vector(const Vector& psi) {
    if (psi.size() != 2 || std::abs(psi.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("switch_vector: psi must be a normalized qubit state");
    const SystemLabel AI{"A_I", 2}, AO{"A_O", 2}, BI{"B_I", 2}, BO{"B_O", 2},
        CT{"C_It", 2}, CC{"C_Ic", 2};
    Vector k0 = Vector::Zero(2), k1 = Vector::Zero(2);
    k0(0) = 1;
    k1(1) = 1;
    const std::vector<std::string> target_order{"A_I", "A_O", "B_I", "B_O", "C_It", "C_Ic"};
    PureVector b1 = tensor(tensor(PureVector({AI}, psi), max_entangled(AO, BI)),
                           tensor(max_entangled(BO, CT), PureVector({CC}, k0)));
    b1 = permute_systems(b1, target_order);
    PureVector b2 = tensor(tensor(PureVector({BI}, psi), max_entangled(BO, AI)),
                           tensor(max_entangled(AO, CT), PureVector({CC}, k1)));
    b2 = permute_systems(b2, target_order);
    return PureVector(b1.systems, (b1.vec + b2.vec) / std::sqrt(2.0));
}

// |w><w| as a tripartite process (d_{C_I}=4, d_{C_O}=1), or the reduced switch
// tr_{C_I^t} |w><w| on the control qubit when reduce_target is set.
inline ProcessMatrix switch_process(const Vector& psi, bool reduce_target) {
    PureVector w = switch_vector(psi);
    LabeledOperator full = w.projector();
    if (reduce_target) {
        LabeledOperator red = partial_trace(full, {"C_It"});
        // control qubit becomes C's input
        std::vector<SystemLabel> sys = red.systems;
        sys[4].name = "C_I";
        LabeledOperator op(sys, red.mat, true);
        op = tensor(op, identity_on({{"C_O", 1}}));
        return ProcessMatrix(std::move(op), switch_reduced_layout());
    }
    LabeledOperator op = merge_factors(full, {"C_It", "C_Ic"}, "C_I");
    op = tensor(op, identity_on({{"C_O", 1}}));
    return ProcessMatrix(std::move(op), switch_full_layout());
}

// Traces out party C entirely, leaving the causally separable bipartite
// mixture (|psi><psi| x |1>><<1| x 1)/2 + (swap)/2.
inline ProcessMatrix trace_out_charlie(const ProcessMatrix& sw) {
    if (sw.layout.parties.size() != 3 || sw.layout.parties[2].name != "C")
        throw std::invalid_argument("trace_out_charlie: expected a switch layout");
    LabeledOperator red = partial_trace(sw.op, {"C_I", "C_O"});
    return ProcessMatrix(std::move(red), bipartite_qubits());
}

// ---------------------------------------------------------------------------
// local composition $(W)

// CPTP maps applied before (on the party input) and after (on the party
// output); identity when absent.
struct LocalMaps {
    std::optional<std::vector<Matrix>> pre;   // Kraus, input -> input
    std::optional<std::vector<Matrix>> post;  // Kraus, output -> output
};

// $(W): composes W with per-party pre/post CPTP maps. Defined through
// tr[(C^A x C^B ...) $(W)] = tr[(C^A_123 x ...) W] for all local maps C.
inline ProcessMatrix compose_local(const ProcessMatrix& w,
                                   const std::vector<LocalMaps>& maps) {
    if (maps.size() != w.layout.parties.size())
        throw std::invalid_argument("compose_local: one LocalMaps entry per party");

    // For each party, the adjoint of C2 -> C123 = post ∘ C2 ∘ pre as a real
    // superoperator on that party's in x out block; $(W) = (x_i Phi_i^†)(W).
    LabeledOperator cur = w.op;
    for (size_t pi = 0; pi < maps.size(); ++pi) {
        const Party& p = w.layout.parties[pi];
        const Eigen::Index din = p.input.dim, dout = p.output.dim;
        const Eigen::Index dio = din * dout;

        auto check_cptp = [](const std::vector<Matrix>& kraus, Eigen::Index d) {
            Matrix acc = Matrix::Zero(d, d);
            for (const auto& k : kraus) {
                if (k.cols() != d || k.rows() != d)
                    throw std::invalid_argument("compose_local: map must preserve dimension");
                acc += k.adjoint() * k;
            }
            if ((acc - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
                throw std::invalid_argument("compose_local: map is not trace preserving");
        };
        if (maps[pi].pre) check_cptp(*maps[pi].pre, din);
        if (maps[pi].post) check_cptp(*maps[pi].post, dout);
        if (!maps[pi].pre && !maps[pi].post) continue;

        const SystemLabel inL = p.input, outL = p.output;
        const SystemLabel t_in{"_in", din}, t_mi{"_mi", din}, t_mo{"_mo", dout},
            t_out{"_out", dout};
        LabeledOperator m1 = maps[pi].pre ? cj_from_kraus(*maps[pi].pre, t_in, t_mi)
                                          : cj_from_kraus({Matrix::Identity(din, din)}, t_in, t_mi);
        LabeledOperator m3 = maps[pi].post
            ? cj_from_kraus(*maps[pi].post, t_mo, t_out)
            : cj_from_kraus({Matrix::Identity(dout, dout)}, t_mo, t_out);

        // Phi: M2 -> cj_compose(m3, cj_compose(M2, m1)) as a complex-linear
        // superoperator on the party's in x out block, built from matrix units.
        Matrix phi = Matrix::Zero(dio * dio, dio * dio);
        for (Eigen::Index col = 0; col < dio * dio; ++col) {
            Matrix e = Matrix::Zero(dio, dio);
            e(col % dio, col / dio) = 1.0;  // column-major vec
            LabeledOperator m2({t_mi, t_mo}, e, false);
            Matrix c = cj_compose(m3, cj_compose(m2, m1)).mat;
            phi.col(col) = Eigen::Map<Vector>(c.data(), dio * dio);
        }

        // $(W) applies the adjoint map Phi^† to the party block of W: move the
        // block to the front and act on that index pair.
        std::vector<std::string> order{inL.name, outL.name};
        for (const auto& s : cur.systems)
            if (s.name != inL.name && s.name != outL.name) order.push_back(s.name);
        LabeledOperator moved = permute_systems(cur, order);
        const Eigen::Index drest = moved.dim() / dio;
        Matrix out = Matrix::Zero(moved.dim(), moved.dim());
        Matrix phiH = phi.adjoint();
        // out[(a,r),(b,s)] = sum_{a',b'} phiH[(a,b),(a',b')] moved[(a',r),(b',s)]
        for (Eigen::Index r = 0; r < drest; ++r)
            for (Eigen::Index s = 0; s < drest; ++s) {
                Matrix blk(dio, dio);
                for (Eigen::Index a = 0; a < dio; ++a)
                    for (Eigen::Index b = 0; b < dio; ++b)
                        blk(a, b) = moved.mat(a * drest + r, b * drest + s);
                Matrix nb = Eigen::Map<Matrix>(
                    Vector(phiH * Eigen::Map<Vector>(blk.data(), dio * dio)).data(), dio, dio);
                for (Eigen::Index a = 0; a < dio; ++a)
                    for (Eigen::Index b = 0; b < dio; ++b)
                        out(a * drest + r, b * drest + s) = nb(a, b);
            }
        LabeledOperator res(moved.systems, std::move(out), false);
        res.symmetrize();
        cur = permute_systems(res, cur.factor_names());
    }
    return ProcessMatrix(std::move(cur), w.layout);
}

// ---------------------------------------------------------------------------
// random generators (projection + noise repair, used by tests and demos)

// Random process compatible with the given fixed order: project a random
// hermitian onto L_V ∩ L_order, then mix with enough identity to be PSD.
inline ProcessMatrix random_causally_ordered(const PartyLayout& layout,
                                             const std::vector<std::string>& order, Rng& rng) {
    auto sys = layout.all_systems();
    const Eigen::Index d = product_dim(sys);
    LabeledOperator h(sys, random_hermitian(d, rng), true);
    LabeledOperator proj = causal_order_project(lv_project(h, layout), order, layout);
    Eigen::SelfAdjointEigenSolver<Matrix> es(proj.mat);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    const double scale = std::max(std::abs(lo), std::abs(hi));
    Matrix m = proj.mat / std::max(scale, 1e-300) + 1.5 * Matrix::Identity(d, d);
    m *= static_cast<double>(layout.d_O()) / m.trace().real();
    return ProcessMatrix(LabeledOperator(sys, std::move(m), true), layout);
}

// Random convex mixture of causally ordered processes over the given orders.
inline ProcessMatrix random_causally_separable(const PartyLayout& layout,
                                               const std::vector<std::vector<std::string>>& orders,
                                               Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> q;
    double tot = 0;
    for (size_t k = 0; k < orders.size(); ++k) {
        q.push_back(u(rng) + 1e-3);
        tot += q.back();
    }
    auto sys = layout.all_systems();
    Matrix acc = Matrix::Zero(product_dim(sys), product_dim(sys));
    for (size_t k = 0; k < orders.size(); ++k)
        acc += (q[k] / tot) * random_causally_ordered(layout, orders[k], rng).op.mat;
    return ProcessMatrix(LabeledOperator(sys, std::move(acc), true), layout);
}

}  // namespace causalsep

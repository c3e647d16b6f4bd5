// rng.hpp — Seeded randomness: Haar unitaries, Gaussian operators, states.

#pragma once

#include <Eigen/Dense>

#include <random>

#include "causalsep/labeled_operator.hpp"

namespace causalsep {

using Rng = std::mt19937_64;

inline Matrix gaussian_complex(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            m(i, j) = Complex(n(rng), n(rng)) / std::sqrt(2.0);
    return m;
}

// Haar-distributed unitary via QR of a complex Gaussian with the R diagonal
// phase-normalized.
inline Matrix haar_unitary(Eigen::Index dim, Rng& rng) {
    if (dim < 1) throw std::invalid_argument("haar_unitary: dim < 1");
    Matrix z = gaussian_complex(dim, dim, rng);
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index k = 0; k < dim; ++k) {
        Complex d = r(k, k);
        q.col(k) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex(1, 0);
    }
    return q;
}

inline Matrix random_hermitian(Eigen::Index dim, Rng& rng) {
    Matrix g = gaussian_complex(dim, dim, rng);
    return (g + g.adjoint()) / 2.0;
}

inline Matrix random_psd(Eigen::Index dim, Rng& rng) {
    Matrix g = gaussian_complex(dim, dim, rng);
    return g * g.adjoint();
}

inline Vector random_state(Eigen::Index dim, Rng& rng) {
    Matrix g = gaussian_complex(dim, 1, rng);
    Vector v = g.col(0);
    return v / v.norm();
}

inline Matrix random_density(Eigen::Index dim, Rng& rng) {
    Matrix p = random_psd(dim, rng);
    return p / p.trace().real();
}

// Random CPTP map from dim_in to dim_out given as a Kraus list (Stinespring of
// a Haar unitary on in x env, environment of size dim_out).
inline std::vector<Matrix> random_cptp_kraus(Eigen::Index dim_in, Eigen::Index dim_out,
                                             Rng& rng) {
    // isometry V: C^in -> C^out x C^env drawn from a Haar unitary's first
    // columns; env chosen so out*env >= in.
    Eigen::Index env = dim_in;  // out x in Kraus count = env works whenever out*env >= in
    while (dim_out * env < dim_in) ++env;
    Matrix u = haar_unitary(dim_out * env, rng);
    std::vector<Matrix> kraus;
    kraus.reserve(static_cast<size_t>(env));
    for (Eigen::Index e = 0; e < env; ++e) {
        Matrix k(dim_out, dim_in);
        for (Eigen::Index o = 0; o < dim_out; ++o)
            for (Eigen::Index i = 0; i < dim_in; ++i)
                k(o, i) = u(o * env + e, i);
        kraus.push_back(std::move(k));
    }
    return kraus;
}

}  // namespace causalsep

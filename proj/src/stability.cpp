#include "mes/stability.hpp"

#include <cmath>

#include "mes/errors.hpp"

namespace mes {

Eigen::Matrix3d companion_matrix(const GainSet& gains) {
    Eigen::Matrix3d A;
    A << 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, gains.K1, gains.K2, gains.K3;
    return A;
}

Eigen::MatrixXd block_companion_matrix(const std::vector<std::vector<double>>& gains) {
    Eigen::Index n = 0;
    for (const auto& g : gains)
        n += static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index offset = 0;
    for (const auto& g : gains) {
        const auto r = static_cast<Eigen::Index>(g.size());
        for (Eigen::Index j = 0; j + 1 < r; ++j)
            A(offset + j, offset + j + 1) = 1.0;
        for (Eigen::Index j = 0; j < r; ++j)
            A(offset + r - 1, offset + j) = g[static_cast<std::size_t>(j)];
        offset += r;
    }
    return A;
}

bool is_hurwitz(const GainSet& gains) {
    const double a2 = -gains.K3;
    const double a1 = -gains.K2;
    const double a0 = -gains.K1;
    return a2 > 0.0 && a0 > 0.0 && a2 * a1 > a0;
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols() || A.rows() == 0)
        throw SingularSystem("solve_lyapunov: matrix must be square and non-empty");
    const Eigen::Index n = A.rows();
    const Eigen::Index n2 = n * n;

    // Column-major vec: vec(P*A) = (A^T kron I) vec(P), vec(A^T*P) = (I kron A^T) vec(P).
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n2, n2);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double art = A(c, r); // (A^T)(r, c)
            for (Eigen::Index k = 0; k < n; ++k) {
                M(r * n + k, c * n + k) += art;
                M(k * n + r, k * n + c) += art;
            }
        }
    }
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(
        Eigen::MatrixXd::Identity(n, n).eval().data(), n2);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible())
        throw SingularSystem("solve_lyapunov: Kronecker system is singular");
    Eigen::VectorXd p = lu.solve(rhs);
    if (!p.allFinite())
        throw SingularSystem("solve_lyapunov: non-finite solution");

    Eigen::MatrixXd P = Eigen::Map<Eigen::MatrixXd>(p.data(), n, n);
    return 0.5 * (P + P.transpose());
}

bool is_positive_definite(const Eigen::MatrixXd& P) {
    const Eigen::Index n = P.rows();
    if (n != P.cols() || n == 0)
        return false;
    if (n <= 3) {
        for (Eigen::Index k = 1; k <= n; ++k)
            if (!(P.topLeftCorner(k, k).determinant() > 0.0))
                return false;
        return true;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        return false;
    return es.eigenvalues().minCoeff() > 0.0;
}

LyapunovData make_lyapunov_data(const GainSet& gains) {
    if (!is_hurwitz(gains))
        throw NonHurwitzGains("gains not Hurwitz");
    LyapunovData data;
    data.A_tilde = companion_matrix(gains);
    data.P = solve_lyapunov(data.A_tilde);
    return data;
}

std::vector<int> gradient_indices(std::span<const int> relative_degrees) {
    std::vector<int> out;
    out.reserve(relative_degrees.size());
    int acc = 0;
    for (int r : relative_degrees) {
        acc += r;
        out.push_back(acc - 1);
    }
    return out;
}

Eigen::VectorXd lyapunov_gradient(const Eigen::MatrixXd& P, const Eigen::VectorXd& z,
                                  std::span<const int> indices) {
    const Eigen::VectorXd full = 2.0 * (P * z);
    Eigen::VectorXd out(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j)
        out(static_cast<Eigen::Index>(j)) = full(indices[j]);
    return out;
}

bool invariant_set_membership(const Eigen::VectorXd& z, double k_robust, const Eigen::MatrixXd& P,
                              std::span<const int> indices) {
    return 1.0 - k_robust * lyapunov_gradient(P, z, indices).norm() >= 0.0;
}

bool invariant_set_membership(const Eigen::Vector3d& z, double k_robust, const Eigen::Matrix3d& P) {
    const double grad = 2.0 * P.row(2).dot(z);
    return 1.0 - k_robust * std::abs(grad) >= 0.0;
}

} // namespace mes

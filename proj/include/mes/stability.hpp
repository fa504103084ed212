#pragma once

// Hurwitz checks for the error-dynamics polynomial and the Lyapunov equation
// P*A + A^T*P = -I used by the robust term.
//
// Sign convention: gains are stored as they enter the virtual input
// (v_s = jerk_ref + K3*z3 + K2*z2 + K1*z1), so a stabilizing set is negative
// and the companion matrix carries the gains verbatim in its last row.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mes {

struct GainSet {
    double K1 = -500.0;
    double K2 = -125.0;
    double K3 = -26.0;
    double k_robust = 1.0;

    bool operator==(const GainSet&) const = default;
};

struct LyapunovData {
    Eigen::Matrix3d A_tilde;
    Eigen::Matrix3d P;
};

Eigen::Matrix3d companion_matrix(const GainSet& gains);

// Block companion form for several outputs; block i has relative degree
// gains[i].size() and its last row holds gains[i] (lowest derivative first).
Eigen::MatrixXd block_companion_matrix(const std::vector<std::vector<double>>& gains);

// Routh-Hurwitz on s^3 - K3 s^2 - K2 s - K1 with strict inequalities.
bool is_hurwitz(const GainSet& gains);

// Solves P*A + A^T*P = -I through the n^2 x n^2 Kronecker system, then
// symmetrizes. Throws SingularSystem when the system cannot be solved.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A);

bool is_positive_definite(const Eigen::MatrixXd& P);

// Throws NonHurwitzGains if the gains are outside the Hurwitz set.
LyapunovData make_lyapunov_data(const GainSet& gains);

// Zero-based positions of the highest error derivative of each output block.
std::vector<int> gradient_indices(std::span<const int> relative_degrees);

// Components of dV/dz = 2*P*z at the given indices.
Eigen::VectorXd lyapunov_gradient(const Eigen::MatrixXd& P, const Eigen::VectorXd& z,
                                  std::span<const int> indices);

// 1 - k*|dV/dz_ind| >= 0
bool invariant_set_membership(const Eigen::VectorXd& z, double k_robust, const Eigen::MatrixXd& P,
                              std::span<const int> indices);

// Single-output, relative degree 3 case.
bool invariant_set_membership(const Eigen::Vector3d& z, double k_robust, const Eigen::Matrix3d& P);

} // namespace mes

// Copyright 2026 The vbrelax Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "vbrelax/error.hpp"

namespace vbrelax {

/// min |A x - b| subject to x >= 0 (Lawson-Hanson active set).
inline Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_outer = 0)
{
    const Eigen::Index n = a.cols();
    if (a.rows() != b.size()) throw InvalidArgument("nnls: dimension mismatch");
    if (max_outer <= 0) max_outer = static_cast<int>(3 * n + 10);

    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = 1e3 * eps * a.norm() * std::max(b.norm(), 1e-300);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(static_cast<std::size_t>(n), false);

    auto solve_passive = [&](Eigen::VectorXd& s) {
        std::vector<Eigen::Index> cols;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
        s.setZero(n);
        if (cols.empty()) return;
        Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
        Eigen::VectorXd norms(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            norms(kk) = a.col(cols[k]).norm();
            sub.col(kk) = a.col(cols[k]) / norms(kk);
        }
        const Eigen::VectorXd z = sub.colPivHouseholderQr().solve(b);
        for (std::size_t k = 0; k < cols.size(); ++k)
            s(cols[k]) = z(static_cast<Eigen::Index>(k)) / norms(static_cast<Eigen::Index>(k));
    };

    for (int outer = 0; outer < max_outer; ++outer) {
        const Eigen::VectorXd w = a.transpose() * (b - a * x);
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        Eigen::VectorXd s;
        while (true) {
            solve_passive(s);
            double alpha = std::numeric_limits<double>::infinity();
            Eigen::Index limiting = -1;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (!passive[static_cast<std::size_t>(j)] || s(j) > 0.0) continue;
                const double t = x(j) / (x(j) - s(j));
                if (t < alpha) {
                    alpha = t;
                    limiting = j;
                }
            }
            if (limiting < 0) break;
            x += alpha * (s - x);
            const double floor = 10.0 * eps * x.cwiseAbs().maxCoeff();
            for (Eigen::Index j = 0; j < n; ++j) {
                if (passive[static_cast<std::size_t>(j)] && (j == limiting || x(j) <= floor)) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
            }
        }
        x = s;
    }
    return x;
}

} // namespace vbrelax

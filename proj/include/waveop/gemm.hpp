// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Row-major dense matrix kernels. Loop orders are chosen so the innermost
// loop is contiguous in both operands, which lets the compiler vectorize.

#include <cstring>

namespace waveop {

// C[m x n] = A[m x k] * B[k x n]  (+= when accumulate)
inline void matmul(const double* A, const double* B, double* C, int m, int k, int n,
                   bool accumulate = false) {
    if (!accumulate) std::memset(C, 0, sizeof(double) * size_t(m) * n);
    for (int i = 0; i < m; ++i) {
        const double* a = A + size_t(i) * k;
        double* c = C + size_t(i) * n;
        for (int p = 0; p < k; ++p) {
            const double av = a[p];
            if (av == 0.0) continue;
            const double* b = B + size_t(p) * n;
            for (int j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

// C[m x k] = A[m x n] * B[k x n]^T
inline void matmul_tB(const double* A, const double* B, double* C, int m, int n, int k,
                      bool accumulate = false) {
    for (int i = 0; i < m; ++i) {
        const double* a = A + size_t(i) * n;
        double* c = C + size_t(i) * k;
        for (int j = 0; j < k; ++j) {
            const double* b = B + size_t(j) * n;
            double acc = 0.0;
            for (int p = 0; p < n; ++p) acc += a[p] * b[p];
            if (accumulate)
                c[j] += acc;
            else
                c[j] = acc;
        }
    }
}

// C[k x n] = A[m x k]^T * B[m x n]
inline void matmul_tA(const double* A, const double* B, double* C, int m, int k, int n,
                      bool accumulate = false) {
    if (!accumulate) std::memset(C, 0, sizeof(double) * size_t(k) * n);
    for (int p = 0; p < m; ++p) {
        const double* a = A + size_t(p) * k;
        const double* b = B + size_t(p) * n;
        for (int i = 0; i < k; ++i) {
            const double av = a[i];
            if (av == 0.0) continue;
            double* c = C + size_t(i) * n;
            for (int j = 0; j < n; ++j) c[j] += av * b[j];
        }
    }
}

} // namespace waveop

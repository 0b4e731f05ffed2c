// Copyright (c) 2026 waveop contributors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"
#include "waveop/grad_check.hpp"
#include "waveop/ops.hpp"

using namespace waveop;
using waveop::testutil::rand_tensor;
using waveop::testutil::weighted_sum;
using Catch::Approx;

namespace {
constexpr double kGradTol = 1e-4;
}

TEST_CASE("tensor basics") {
    Tensor t = Tensor::zeros({2, 3});
    REQUIRE(t.numel() == 6);
    REQUIRE(t.rank() == 2);
    REQUIRE(t[5] == 0.0);

    Tensor f = Tensor::from_vector({2, 2}, {1, 2, 3, 4});
    REQUIRE(f[3] == 4.0);
    REQUIRE_THROWS_AS(Tensor::from_vector({2, 2}, {1, 2, 3}), shape_error);
    REQUIRE_THROWS_AS(f.view({5}), shape_error);
    REQUIRE_THROWS_AS(f.item(), shape_error);
    REQUIRE(Tensor::scalar(7.5).item() == 7.5);

    Tensor v = f.view({4});
    REQUIRE(v.key() == f.key());
    Tensor c = f.clone();
    REQUIRE(c.key() != f.key());
    c[0] = 99;
    REQUIRE(f[0] == 1.0);
}

TEST_CASE("arithmetic forward values") {
    Tensor a = Tensor::from_vector({3}, {1, -2, 3});
    Tensor b = Tensor::from_vector({3}, {4, 5, -6});
    Tensor s = add(a, b);
    REQUIRE(s[0] == 5.0);
    REQUIRE(s[1] == 3.0);
    REQUIRE(s[2] == -3.0);
    REQUIRE(sub(a, b)[2] == 9.0);
    REQUIRE(mul(a, b)[1] == -10.0);
    REQUIRE(scale(a, -2)[2] == -6.0);
    REQUIRE(add_scalar(a, 1)[1] == -1.0);
    REQUIRE(abs_val(a)[1] == 2.0);
    REQUIRE(sum(a).item() == 2.0);
    REQUIRE(mean(b).item() == Approx(1.0));
    REQUIRE_THROWS_AS(add(a, Tensor::zeros({4})), shape_error);

    // scalar broadcast on the right operand
    REQUIRE(add(a, Tensor::scalar(10))[2] == 13.0);
    REQUIRE(mul(a, Tensor::scalar(3))[1] == -6.0);
}

TEST_CASE("tape mechanics") {
    SECTION("gradients accumulate across uses") {
        Tensor x = Tensor::from_vector({2}, {3, -1});
        TapeScope scope;
        Tensor y = add(mul(x, x), x); // x^2 + x -> dy/dx = 2x + 1
        scope.tape.backward(sum(y));
        Tensor g = scope.tape.grad_tensor(x);
        REQUIRE(g[0] == Approx(7.0));
        REQUIRE(g[1] == Approx(-1.0));
    }
    SECTION("no recording outside a scope") {
        Tensor x = Tensor::ones({4});
        Tensor y = mul(x, x);
        REQUIRE(y[0] == 1.0); // forward works without a tape
        TapeScope scope;
        {
            NoTapeScope off;
            Tensor z = mul(x, x);
            (void)z;
        }
        REQUIRE(scope.tape.size() == 0);
    }
    SECTION("unused leaf gets zero gradient tensor") {
        Tensor x = Tensor::ones({2});
        Tensor u = Tensor::ones({2});
        TapeScope scope;
        scope.tape.backward(sum(mul(x, x)));
        REQUIRE(scope.tape.grad(u) == nullptr);
        Tensor gu = scope.tape.grad_tensor(u);
        REQUIRE(gu[0] == 0.0);
    }
    SECTION("backward replay is deterministic") {
        Tensor x = rand_tensor({4, 4}, 77);
        auto run = [&] {
            TapeScope scope;
            Tensor y = softmax_rows(matmul_op(x, x));
            scope.tape.backward(weighted_sum(y, 3));
            return scope.tape.grad_tensor(x);
        };
        Tensor g1 = run(), g2 = run();
        for (int64_t i = 0; i < g1.numel(); ++i) REQUIRE(g1[i] == g2[i]);
    }
    SECTION("views share gradient with their base") {
        Tensor x = Tensor::from_vector({2, 2}, {1, 2, 3, 4});
        TapeScope scope;
        Tensor flat = reshape(x, {4});
        scope.tape.backward(sum(mul(flat, flat)));
        Tensor g = scope.tape.grad_tensor(x);
        REQUIRE(g[2] == Approx(6.0));
    }
    SECTION("detach blocks gradient flow") {
        Tensor x = Tensor::from_vector({2}, {2, 5});
        TapeScope scope;
        Tensor y = mul(detach(x), x);
        scope.tape.backward(sum(y));
        Tensor g = scope.tape.grad_tensor(x);
        REQUIRE(g[0] == Approx(2.0)); // only the live factor contributes
        REQUIRE(g[1] == Approx(5.0));
    }
}

TEST_CASE("gradient checks: pointwise ops") {
    Tensor x = rand_tensor({2, 3, 4}, 11);
    Tensor y = rand_tensor({2, 3, 4}, 12);

    REQUIRE(grad_check([&] { return weighted_sum(add(x, y), 1); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(add(x, y), 1); }, y) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(sub(x, y), 2); }, y) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(mul(x, y), 3); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(mul(x, y), 3); }, y) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(scale(x, -1.7), 4); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(add_scalar(x, 0.3), 5); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(gelu(x), 6); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(square(x), 7); }, x) < kGradTol);

    Tensor sc = Tensor::scalar(0.37);
    REQUIRE(grad_check([&] { return weighted_sum(add(x, sc), 8); }, sc) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(mul(x, sc), 9); }, sc) < kGradTol);

    Tensor far = rand_tensor({3, 3}, 13, 0.25, 1.0); // keep |x| away from the kink
    Tensor sgn = rand_tensor({3, 3}, 14);
    for (int64_t i = 0; i < far.numel(); ++i)
        if (sgn[i] < 0) far[i] = -far[i];
    REQUIRE(grad_check([&] { return weighted_sum(abs_val(far), 10); }, far) < kGradTol);

    Tensor rows = rand_tensor({3, 2, 2}, 15);
    Tensor rs = rand_tensor({3}, 16, 0.5, 1.5);
    REQUIRE(grad_check([&] { return weighted_sum(scale_rows(rows, rs), 11); }, rows) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(scale_rows(rows, rs), 11); }, rs) < kGradTol);
}

TEST_CASE("gradient checks: shape ops") {
    Tensor x = rand_tensor({3, 4, 2}, 21);
    REQUIRE(grad_check([&] { return weighted_sum(narrow(x, 1, 1, 2), 1); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(narrow(x, 0, 2, 1), 2); }, x) < kGradTol);

    Tensor a = rand_tensor({2, 3}, 22), b = rand_tensor({2, 2}, 23);
    REQUIRE(grad_check([&] { return weighted_sum(concat(a, b, 1), 3); }, a) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(concat(a, b, 1), 3); }, b) < kGradTol);

    std::vector<int64_t> idx = {2, 0, 2}; // repeated row exercises scatter-add
    REQUIRE(grad_check([&] { return weighted_sum(gather_rows(x, idx), 4); }, x) < kGradTol);

    Tensor m = rand_tensor({3, 5}, 24);
    std::vector<int64_t> sel = {4, 0, 2};
    REQUIRE(grad_check([&] { return weighted_sum(select_per_row(m, sel), 5); }, m) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(transpose2d(m), 6); }, m) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(reshape(m, {5, 3}), 7); }, m) < kGradTol);
}

TEST_CASE("gradient checks: reductions and softmax") {
    Tensor x = rand_tensor({3, 4}, 31);
    REQUIRE(grad_check([&] { return sum(x); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return mean(x); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(row_mean(x), 1); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(softmax_rows(x), 2); }, x) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(log_softmax_rows(x), 3); }, x) < kGradTol);

    SECTION("softmax rows sum to one") {
        Tensor p = softmax_rows(rand_tensor({4, 6}, 32, -3, 3));
        for (int64_t r = 0; r < 4; ++r) {
            double s = 0;
            for (int64_t c = 0; c < 6; ++c) s += p[r * 6 + c];
            REQUIRE(s == Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("gradient checks: linear algebra") {
    Tensor A = rand_tensor({3, 4}, 41), B = rand_tensor({4, 2}, 42);
    REQUIRE(grad_check([&] { return weighted_sum(matmul_op(A, B), 1); }, A) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(matmul_op(A, B), 1); }, B) < kGradTol);

    Tensor bias = rand_tensor({2}, 43);
    REQUIRE(grad_check([&] { return weighted_sum(linear(A, B, bias), 2); }, bias) < kGradTol);

    Tensor g = rand_tensor({4}, 44, 0.5, 1.5), be = rand_tensor({4}, 45);
    Tensor xn = rand_tensor({3, 4}, 46, -2, 2);
    REQUIRE(grad_check([&] { return weighted_sum(layer_norm_rows(xn, g, be), 3); }, xn) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(layer_norm_rows(xn, g, be), 3); }, g) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(layer_norm_rows(xn, g, be), 3); }, be) < kGradTol);

    Tensor v = rand_tensor({6}, 47, 0.3, 1.2);
    REQUIRE(grad_check([&] { return weighted_sum(vec_normalize(v), 4); }, v) < kGradTol);

    SECTION("matmul forward oracle") {
        Tensor M = Tensor::from_vector({2, 2}, {1, 2, 3, 4});
        Tensor N = Tensor::from_vector({2, 2}, {5, 6, 7, 8});
        Tensor P = matmul_op(M, N);
        REQUIRE(P[0] == 19.0);
        REQUIRE(P[1] == 22.0);
        REQUIRE(P[2] == 43.0);
        REQUIRE(P[3] == 50.0);
    }
    SECTION("layer norm output is standardized") {
        Tensor ones = Tensor::ones({4});
        Tensor zeros = Tensor::zeros({4});
        Tensor y = layer_norm_rows(rand_tensor({5, 4}, 48, -3, 3), ones, zeros);
        for (int64_t r = 0; r < 5; ++r) {
            double m = 0, v2 = 0;
            for (int64_t c = 0; c < 4; ++c) m += y[r * 4 + c];
            m /= 4;
            for (int64_t c = 0; c < 4; ++c) v2 += (y[r * 4 + c] - m) * (y[r * 4 + c] - m);
            REQUIRE(m == Approx(0.0).margin(1e-12));
            REQUIRE(v2 / 4 == Approx(1.0).epsilon(1e-3)); // eps in the denominator
        }
    }
    SECTION("vec_normalize has unit norm and tangent gradient") {
        Tensor u = vec_normalize(Tensor::from_vector({2}, {3, 4}));
        REQUIRE(u[0] == Approx(0.6));
        REQUIRE(u[1] == Approx(0.8));
        REQUIRE_THROWS_AS(vec_normalize(Tensor::zeros({3})), numeric_error);
    }
}

TEST_CASE("gradient checks: convolution and resampling") {
    Tensor x = rand_tensor({2, 5, 6}, 51);
    Tensor w = rand_tensor({3, 2, 3, 3}, 52, -0.5, 0.5);
    Tensor b = rand_tensor({3}, 53);

    SECTION("same-size stride 1") {
        REQUIRE(grad_check([&] { return weighted_sum(conv2d_same(x, w, b), 1); }, x) < kGradTol);
        REQUIRE(grad_check([&] { return weighted_sum(conv2d_same(x, w, b), 1); }, w) < kGradTol);
        REQUIRE(grad_check([&] { return weighted_sum(conv2d_same(x, w, b), 1); }, b) < kGradTol);
    }
    SECTION("dilated") {
        REQUIRE(grad_check([&] { return weighted_sum(conv2d_same(x, w, b, 2), 2); }, x) < kGradTol);
        REQUIRE(grad_check([&] { return weighted_sum(conv2d_same(x, w, b, 2), 2); }, w) < kGradTol);
    }
    SECTION("strided patchify") {
        Conv2dSpec sp;
        sp.stride_h = 2;
        sp.stride_w = 3;
        Tensor pw = rand_tensor({4, 2, 2, 3}, 54, -0.5, 0.5);
        Tensor pb = rand_tensor({4}, 55);
        auto f = [&] { return weighted_sum(conv2d(x, pw, pb, sp), 3); };
        Tensor outp = conv2d(x, pw, pb, sp);
        REQUIRE(outp.shape() == Shape{4, 2, 2});
        REQUIRE(grad_check(f, x) < kGradTol);
        REQUIRE(grad_check(f, pw) < kGradTol);
    }
    SECTION("pointwise mix") {
        Tensor w1 = rand_tensor({4, 2}, 56);
        Tensor b1 = rand_tensor({4}, 57);
        REQUIRE(grad_check([&] { return weighted_sum(conv1x1(x, w1, b1), 4); }, x) < kGradTol);
        REQUIRE(grad_check([&] { return weighted_sum(conv1x1(x, w1, b1), 4); }, w1) < kGradTol);
    }
    SECTION("bilinear resize") {
        REQUIRE(grad_check([&] { return weighted_sum(bilinear_resize(x, 3, 4), 5); }, x) < kGradTol);
        REQUIRE(grad_check([&] { return weighted_sum(bilinear_resize(x, 9, 11), 6); }, x) < kGradTol);

        Tensor flat = Tensor::full({1, 7, 9}, 3.25);
        Tensor r = bilinear_resize(flat, 4, 5);
        for (int64_t i = 0; i < r.numel(); ++i) REQUIRE(r[i] == Approx(3.25));

        // corner alignment keeps the four corners exact
        Tensor img = rand_tensor({1, 6, 8}, 58);
        Tensor rr = bilinear_resize(img, 3, 5);
        REQUIRE(rr[0] == Approx(img[0]));
        REQUIRE(rr[4] == Approx(img[7]));
        REQUIRE(rr[2 * 5] == Approx(img[5 * 8]));
        REQUIRE(rr[2 * 5 + 4] == Approx(img[5 * 8 + 7]));
    }
}

TEST_CASE("gradient checks: spectral ops") {
    Tensor x = rand_tensor({2, 4, 5}, 61);
    REQUIRE(grad_check([&] { return weighted_sum(fft2_op(x), 1); }, x) < kGradTol);

    Tensor z = rand_tensor({2, 4, 5, 2}, 62);
    REQUIRE(grad_check([&] { return weighted_sum(ifft2_real_op(z), 2); }, z) < kGradTol);

    Tensor zm = rand_tensor({2, 6, 6, 2}, 63);
    Tensor wt = rand_tensor({2, 2, 2, 3, 2}, 64, -0.7, 0.7);
    REQUIRE(grad_check([&] { return weighted_sum(fno_mode_mix(zm, wt), 3); }, zm) < kGradTol);
    REQUIRE(grad_check([&] { return weighted_sum(fno_mode_mix(zm, wt), 3); }, wt) < kGradTol);

    Tensor za = rand_tensor({3, 4, 2}, 65, 0.2, 1.0); // modulus well away from zero
    REQUIRE(grad_check([&] { return weighted_sum(complex_abs(za), 4); }, za) < kGradTol);

    SECTION("complex_abs forward and zero subgradient") {
        Tensor c = Tensor::from_vector({2, 2}, {3, 4, 0, 0});
        Tensor m = complex_abs(c);
        REQUIRE(m[0] == 5.0);
        REQUIRE(m[1] == 0.0);
        TapeScope scope;
        Tensor mm = complex_abs(c);
        scope.tape.backward(sum(mm));
        Tensor g = scope.tape.grad_tensor(c);
        REQUIRE(g[0] == Approx(0.6));
        REQUIRE(g[1] == Approx(0.8));
        REQUIRE(g[2] == 0.0); // subgradient at the origin pinned to zero
        REQUIRE(g[3] == 0.0);
    }
}

TEST_CASE("gradient checks: wavelet levels") {
    Tensor even = rand_tensor({2, 4, 4}, 71);
    REQUIRE(grad_check([&] { return weighted_sum(haar_level(even), 1); }, even) < kGradTol);

    Tensor odd = rand_tensor({1, 5, 7}, 72);
    REQUIRE(grad_check([&] { return weighted_sum(haar_level(odd), 2); }, odd) < kGradTol);

    Tensor bands = rand_tensor({2, 4, 2, 2}, 73);
    REQUIRE(grad_check([&] { return weighted_sum(haar_level_inverse(bands, 4, 4), 3); }, bands) <
            kGradTol);
    Tensor bands_odd = rand_tensor({1, 4, 3, 4}, 74);
    REQUIRE(grad_check([&] { return weighted_sum(haar_level_inverse(bands_odd, 5, 7), 4); },
                       bands_odd) < kGradTol);
}

TEST_CASE("gradient oracle: quadratic form") {
    // d/dx sum(x*x) = 2x, checked to machine precision rather than FD noise.
    Tensor x = rand_tensor({3, 3}, 81);
    TapeScope scope;
    scope.tape.backward(sum(mul(x, x)));
    Tensor g = scope.tape.grad_tensor(x);
    for (int64_t i = 0; i < x.numel(); ++i) REQUIRE(g[i] == Approx(2 * x[i]).epsilon(1e-14));
}

// Copyright 2026 The pri-lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "prilab/haar.hpp"

using namespace prilab;

namespace {

struct Moments {
    double mean = 0;
    double sd = 0;
};

template <class F>
Moments sample_moments(int n, F f) {
    double s = 0;
    double s2 = 0;
    for (int i = 0; i < n; ++i) {
        double x = f();
        s += x;
        s2 += x * x;
    }
    Moments m;
    m.mean = s / n;
    m.sd = std::sqrt(std::max(0.0, s2 / n - m.mean * m.mean) / n);
    return m;
}

Mat swap_operator(std::size_t d) {
    Perm p;
    p.map = {1, 0};
    return permutation_operator(p, d);
}

}  // namespace

// Monte Carlo checks use 5 standard errors.

TEST(HaarState, NormAndMoments) {
    Rng rng(1);
    std::size_t d = 8;
    auto m2 = sample_moments(40000, [&] {
        Vec v = sample_haar_state(d, rng);
        EXPECT_NEAR(v.norm(), 1.0, 1e-10);
        return std::norm(v(0));
    });
    EXPECT_NEAR(m2.mean, 1.0 / d, 5 * m2.sd);
    auto m4 = sample_moments(40000, [&] { return std::pow(std::norm(sample_haar_state(d, rng)(3)), 2); });
    EXPECT_NEAR(m4.mean, 2.0 / (d * (d + 1.0)), 5 * m4.sd);
}

TEST(HaarState, TwoCopyAverageIsNormalizedSymmetricProjector) {
    Rng rng(2);
    std::size_t d = 2;
    Mat acc = Mat::Zero(4, 4);
    int n = 40000;
    for (int i = 0; i < n; ++i) {
        Vec v = sample_haar_state(d, rng);
        Vec vv = kron(v, v);
        acc += vv * vv.adjoint();
    }
    acc /= n;
    Mat sym = sym_projector(d, 2) / 3.0;
    EXPECT_LT(trace_distance(acc, sym), 0.02);
}

class HaarUnitaryTest : public ::testing::TestWithParam<HaarMethod> {};

TEST_P(HaarUnitaryTest, UnitaryAndHaarMoments) {
    Rng rng(3);
    std::size_t d = 4;
    int n = 20000;
    double tr_re = 0;
    double tr_abs2 = 0;
    double u00 = 0;
    double u00_4 = 0;
    for (int i = 0; i < n; ++i) {
        Mat u = sample_haar_unitary(d, rng, GetParam());
        if (i < 20) EXPECT_LE(isometry_defect(u), 1e-10);
        tr_re += u.trace().real();
        tr_abs2 += std::norm(u.trace());
        u00 += std::norm(u(0, 0));
        u00_4 += std::pow(std::norm(u(0, 0)), 2);
    }
    // E Tr U = 0 and E |Tr U|^2 = 1 hold for Haar measure but fail without the
    // phase fix on the QR factors.
    EXPECT_NEAR(tr_re / n, 0.0, 0.05);
    EXPECT_NEAR(tr_abs2 / n, 1.0, 0.05);
    EXPECT_NEAR(u00 / n, 1.0 / d, 0.01);
    EXPECT_NEAR(u00_4 / n, 2.0 / (d * (d + 1.0)), 0.01);
}

INSTANTIATE_TEST_SUITE_P(Methods, HaarUnitaryTest,
                         ::testing::Values(HaarMethod::ginibre_qr, HaarMethod::column_by_column));

TEST(HaarIsometry, ColumnsOrthonormalAndUniform) {
    Rng rng(4);
    for (auto method : {HaarMethod::ginibre_qr, HaarMethod::column_by_column}) {
        auto m = sample_moments(20000, [&] {
            Mat v = sample_haar_isometry(2, 16, rng, method);
            return std::norm(v(5, 1));
        });
        EXPECT_NEAR(m.mean, 1.0 / 16, 5 * m.sd);
        EXPECT_LE(isometry_defect(sample_haar_isometry(4, 32, rng, method)), 1e-10);
    }
    EXPECT_THROW(sample_haar_isometry(8, 4, rng), std::invalid_argument);
}

TEST(InverseChannel, RoundTripOnRange) {
    Rng rng(5);
    for (auto mode : {DilationMode::any_consistent, DilationMode::haar_conditional}) {
        Mat v = sample_haar_isometry(4, 16, rng);
        auto ch = IsometryInverseChannel::complete(v, mode, rng);
        EXPECT_LE(isometry_defect(ch.dilation), 1e-10);
        for (Eigen::Index x = 0; x < 4; ++x) EXPECT_LE((ch.dilation.col(x << 2) - v.col(x)).norm(), 1e-10);
        for (int k = 0; k < 10; ++k) {
            Mat g = ginibre(4, 1 + k % 4, rng);
            Mat rho = g * g.adjoint();
            rho /= rho.trace().real();
            EXPECT_LE(trace_distance(isometry_inverse_apply(ch, v * rho * v.adjoint()), rho), 1e-10);
        }
    }
}

TEST(InverseChannel, OutOfRangeInputGivesDensityMatrix) {
    Rng rng(6);
    Mat v = sample_haar_isometry(2, 8, rng);
    auto ch = IsometryInverseChannel::complete(v, DilationMode::haar_conditional, rng);
    Vec phi = sample_haar_state(8, rng);
    Mat out = ch.apply(phi * phi.adjoint());
    EXPECT_NO_THROW(DensityMatrix::from(out));
}

TEST(InverseChannel, FromUnitaryUsesZeroAuxColumns) {
    Rng rng(7);
    Mat u = sample_haar_unitary(8, rng);
    auto ch = IsometryInverseChannel::from_unitary(u, 2, 1);
    EXPECT_LE((ch.base.col(1) - u.col(2)).norm(), 1e-12);
    Mat rho = Mat::Identity(4, 4) / 4.0;
    EXPECT_LE(trace_distance(ch.apply(ch.base * rho * ch.base.adjoint()), rho), 1e-10);
    EXPECT_THROW(IsometryInverseChannel::from_unitary(u, 2, 2), std::invalid_argument);
}

TEST(MonteCarlo, ResultIndependentOfWorkerCount) {
    McOptions opt;
    opt.samples = 500;
    opt.seed = 99;
    auto draw = [](Rng &rng, Mat &acc) {
        Vec v = sample_haar_state(4, rng);
        acc += v * v.adjoint();
    };
    McMatrix a = mc_accumulate(4, 4, opt, draw);
    opt.jobs = 3;
    McMatrix b = mc_accumulate(4, 4, opt, draw);
    EXPECT_EQ(a.samples(), 500);
    for (std::size_t i = 0; i < a.batch_sums.size(); ++i) EXPECT_EQ(a.batch_sums[i], b.batch_sums[i]);
    EXPECT_EQ(a.mean(), b.mean());
}

TEST(MonteCarlo, EstimateTdCoversTruth) {
    // One Haar state: E|v><v| = I/4, so TD(mean, I/4) is pure Monte Carlo noise.
    McOptions opt;
    opt.samples = 4096;
    opt.seed = 3;
    McMatrix est = mc_accumulate(4, 4, opt, [](Rng &rng, Mat &acc) {
        Vec v = sample_haar_state(4, rng);
        acc += v * v.adjoint();
    });
    TdEstimate td = estimate_td(est, Mat::Identity(4, 4) / 4.0, 200, 1);
    EXPECT_GT(td.stderr, 0.0);
    EXPECT_LE(td.value, 4 * td.stderr);
    Mat se = est.entry_stderr();
    EXPECT_GT(se.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Twirl, ConjugateBlocksMatchesExplicitKron) {
    Rng rng(8);
    TwirlLayout layout{1, 2, 1};
    Mat g = ginibre(8, 8, rng);
    Mat rho = g * g.adjoint();
    Mat u = sample_haar_unitary(2, rng);
    Mat full = kron(Mat::Identity(2, 2), kron(u, u));
    EXPECT_LE((conjugate_blocks(rho, u, layout) - full * rho * full.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Twirl, MaximallyMixedIsInvariant) {
    McOptions opt;
    opt.samples = 256;
    TdEstimate td = almost_invariance_deficit(Mat::Identity(16, 16) / 16.0, TwirlLayout{0, 2, 2}, opt);
    EXPECT_LE(td.value, 1e-12);
}

TEST(Twirl, ProductStateTwirlsToSymmetricState) {
    // E_U (U x U)|00><00|(U x U)^dag = Pi_sym / 3 on two qubits.
    McOptions opt;
    opt.samples = 8192;
    opt.seed = 4;
    Mat rho = Mat::Zero(4, 4);
    rho(0, 0) = 1;
    McMatrix tw = haar_twirl_mc(rho, TwirlLayout{0, 2, 1}, opt);
    TdEstimate td = estimate_td(tw, sym_projector(2, 2) / 3.0, 100, 1);
    EXPECT_LE(td.value, 5 * td.stderr + 0.01);
}

TEST(Twirl, UniqueTypeMixtureDeficitShrinksWithAlphabet) {
    // rho_uni lives on the symmetric subspace, so its twirl is Pi_sym/D_sym and the
    // deficit is exactly 2/(N+1).
    McOptions opt;
    opt.samples = 2048;
    opt.seed = 5;
    TdEstimate small = almost_invariance_deficit(rho_uni(1, 1, 2), TwirlLayout{0, 2, 1}, opt);
    TdEstimate large = almost_invariance_deficit(rho_uni(3, 1, 2), TwirlLayout{0, 2, 3}, opt);
    EXPECT_NEAR(small.value, 2.0 / 3.0, 5 * small.stderr + 0.01);
    EXPECT_NEAR(large.value, 2.0 / 9.0, 5 * large.stderr + 0.01);
}

TEST(OrthogonalColumns, TwoColumnsMatchClosedForm) {
    // Two orthonormal Haar columns: rho = (I - F/D)/(D^2 - 1), at distance 1/(2D) from I/D^2.
    McOptions opt;
    opt.samples = 65536;
    opt.seed = 6;
    for (int n : {1, 2}) {
        double D = std::ldexp(1.0, n);
        auto r = haar_orthogonal_columns_vs_iid(n, 2, 1, opt);
        Mat exact = (Mat::Identity(static_cast<Eigen::Index>(D * D), static_cast<Eigen::Index>(D * D)) -
                     swap_operator(static_cast<std::size_t>(D)) / D) /
                    (D * D - 1);
        EXPECT_NEAR(trace_distance(exact, r.sigma), 1.0 / (2 * D), 1e-10);
        EXPECT_NEAR(r.td.value, 1.0 / (2 * D), 5 * r.td.stderr + 0.005);
        TdEstimate direct = estimate_td(r.rho, exact, 100, 1);
        EXPECT_LE(direct.value, 5 * direct.stderr + 0.005);
    }
}

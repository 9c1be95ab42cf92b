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

#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>

#include "prilab/haar.hpp"
#include "prilab/qcore.hpp"

using namespace prilab;

namespace {

Mat random_density(std::size_t d, Rng &rng, std::size_t rank = 0) {
    Mat g = ginibre(d, rank ? rank : d, rng);
    Mat r = g * g.adjoint();
    return r / r.trace().real();
}

Vec ket(std::initializer_list<cplx> a) {
    Vec v(static_cast<Eigen::Index>(a.size()));
    Eigen::Index i = 0;
    for (auto x : a) v(i++) = x;
    return v;
}

// Projector onto the symmetric subspace built directly from tuple permutations.
Mat brute_sym_projector(std::size_t d, int t) {
    std::size_t dim = 1;
    for (int i = 0; i < t; ++i) dim *= d;
    Mat p = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::vector<int> perm(static_cast<std::size_t>(t));
    std::iota(perm.begin(), perm.end(), 0);
    int count = 0;
    do {
        for (std::size_t x = 0; x < dim; ++x) {
            std::vector<std::size_t> dig(static_cast<std::size_t>(t));
            std::size_t r = x;
            for (int i = t - 1; i >= 0; --i) {
                dig[static_cast<std::size_t>(i)] = r % d;
                r /= d;
            }
            std::size_t y = 0;
            for (int i = 0; i < t; ++i) y = y * d + dig[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            p(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) += 1.0;
        }
        ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return p / static_cast<double>(count);
}

// Ancilla-controlled SWAP circuit on ancilla x rho x sigma; returns P(ancilla = 0).
double swap_circuit_accept(const Mat &rho, const Mat &sigma) {
    auto d = static_cast<std::size_t>(rho.rows());
    Mat h(2, 2);
    h << 1, 1, 1, -1;
    h /= std::sqrt(2.0);
    Mat anc = Mat::Zero(2, 2);
    anc(0, 0) = 1;
    Mat state = kron(anc, kron(rho, sigma));
    auto dd = static_cast<Eigen::Index>(d * d);
    Mat hh = kron(h, Mat::Identity(dd, dd));
    Mat cswap = Mat::Zero(2 * dd, 2 * dd);
    for (Eigen::Index i = 0; i < dd; ++i) cswap(i, i) = 1;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
            auto from = static_cast<Eigen::Index>(a * d + b);
            auto to = static_cast<Eigen::Index>(b * d + a);
            cswap(dd + to, dd + from) = 1;
        }
    }
    Mat u = hh * cswap * hh;
    Mat out = u * state * u.adjoint();
    return out.topLeftCorner(dd, dd).trace().real();
}

}  // namespace

// Tolerance: structural identities at 1e-10 throughout unless noted.

TEST(Tensor, BasisStatesConcatenate) {
    PureState s = tensor(PureState::basis(1, 0), PureState::basis(1, 1));
    EXPECT_EQ(s.qubits(), 2);
    EXPECT_NEAR(std::abs(s.vec()(1) - cplx(1.0)), 0.0, 1e-10);
    EXPECT_NEAR(s.vec().norm(), 1.0, 1e-10);
}

TEST(Tensor, MaximallyMixedFactors) {
    DensityMatrix r = tensor(DensityMatrix::maximally_mixed(1), DensityMatrix::maximally_mixed(1));
    EXPECT_LE((r.mat() - Mat::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Tensor, PlusTimesZero) {
    PureState s = tensor(PureState::plus(1), PureState::basis(1, 0));
    Vec expect = ket({1 / std::sqrt(2.0), 0, 1 / std::sqrt(2.0), 0});
    EXPECT_LE((s.vec() - expect).norm(), 1e-10);
}

TEST(Tensor, CapOverflowThrows) {
    DensityMatrix a = DensityMatrix::maximally_mixed(8);
    EXPECT_THROW(tensor(a, a), CapError);
}

TEST(PartialTrace, ProductBasisState) {
    Mat r = PureState::basis(2, 1).projector();  // |01>
    Mat a = partial_trace(r, 2, {0});
    Mat expect = Mat::Zero(2, 2);
    expect(0, 0) = 1;
    EXPECT_LE((a - expect).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
    Vec bell = ket({1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0)});
    Mat a = partial_trace(Mat(bell * bell.adjoint()), 2, {0});
    EXPECT_LE((a - Mat::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PartialTrace, FactorizesAndPreservesTrace) {
    Rng rng(11);
    for (int k = 0; k < 20; ++k) {
        Mat rho = random_density(4, rng);
        Mat sigma = random_density(2, rng);
        Mat prod = kron(rho, sigma);
        EXPECT_LE((partial_trace(prod, 3, {0, 1}) - rho).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((partial_trace(prod, 3, {2}) - sigma).cwiseAbs().maxCoeff(), 1e-10);
        Mat mid = partial_trace(prod, 3, {1});
        EXPECT_NEAR(mid.trace().real(), 1.0, 1e-10);
    }
}

TEST(PartialTrace, BadIndexThrows) {
    Mat r = Mat::Identity(4, 4) / 4.0;
    EXPECT_THROW(partial_trace(r, 2, {2}), std::invalid_argument);
    EXPECT_THROW(partial_trace(r, 2, {0, 0}), std::invalid_argument);
}

TEST(TraceDistance, Examples) {
    Mat z = PureState::basis(1, 0).projector();
    Mat o = PureState::basis(1, 1).projector();
    Mat p = PureState::plus(1).projector();
    EXPECT_NEAR(trace_distance(z, z), 0.0, 1e-8);
    EXPECT_NEAR(trace_distance(z, o), 1.0, 1e-8);
    // Difference |0><0| - |+><+| has eigenvalues +-1/sqrt(2).
    EXPECT_NEAR(trace_distance(z, p), 1.0 / std::sqrt(2.0), 1e-8);
}

TEST(TraceDistance, DimensionMismatchThrows) {
    EXPECT_THROW(trace_distance(Mat::Identity(2, 2) / 2.0, Mat::Identity(4, 4) / 4.0), std::invalid_argument);
}

TEST(TraceDistance, MetricPropertiesOnRandomTriples) {
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        std::size_t d = 2 + k % 7;
        Mat a = random_density(d, rng, 1 + k % 3);
        Mat b = random_density(d, rng);
        Mat c = random_density(d, rng, 1);
        double ab = trace_distance(a, b);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 1.0);
        EXPECT_NEAR(ab, trace_distance(b, a), 1e-10);
        EXPECT_LE(ab, trace_distance(a, c) + trace_distance(c, b) + 1e-9);
    }
}

TEST(TraceDistance, MonotoneUnderPartialTraceAndIsometries) {
    Rng rng(6);
    for (int k = 0; k < 50; ++k) {
        Mat a = random_density(8, rng);
        Mat b = random_density(8, rng, 2);
        double before = trace_distance(a, b);
        EXPECT_LE(trace_distance(partial_trace(a, 3, {0, 2}), partial_trace(b, 3, {0, 2})), before + 1e-9);
        Mat v = sample_haar_isometry(8, 32, rng);
        EXPECT_LE(trace_distance(Mat(v * a * v.adjoint()), Mat(v * b * v.adjoint())), before + 1e-9);
        // Isometries preserve TD exactly.
        EXPECT_NEAR(trace_distance(Mat(v * a * v.adjoint()), Mat(v * b * v.adjoint())), before, 1e-8);
    }
}

TEST(SwapTest, Examples) {
    Rng rng(7);
    Vec psi = sample_haar_state(4, rng);
    Mat pp = psi * psi.adjoint();
    EXPECT_NEAR(swap_test_prob(pp, pp), 1.0, 1e-10);
    EXPECT_NEAR(swap_test_prob(PureState::basis(1, 0).projector(), PureState::basis(1, 1).projector()), 0.5, 1e-10);
    Mat mixed = Mat::Identity(2, 2) / 2.0;
    EXPECT_NEAR(swap_test_prob(mixed, mixed), 0.75, 1e-10);
}

TEST(SwapTest, MatchesControlledSwapCircuit) {
    Rng rng(8);
    for (int k = 0; k < 30; ++k) {
        Mat a = random_density(2, rng, 1 + k % 2);
        Mat b = random_density(2, rng, 1 + (k / 2) % 2);
        EXPECT_NEAR(swap_test_prob(a, b), swap_circuit_accept(a, b), 1e-10);
        double p = swap_test_prob(a, b);
        EXPECT_GE(p, 0.5 - 1e-12);
        EXPECT_LE(p, 1.0 + 1e-12);
    }
}

TEST(PermutationTest, Examples) {
    Rng rng(9);
    Vec psi = sample_haar_state(2, rng);
    Mat three = kron(Mat(psi * psi.adjoint()), kron(Mat(psi * psi.adjoint()), Mat(psi * psi.adjoint())));
    EXPECT_NEAR(permutation_test_prob(three, 3), 1.0, 1e-10);
    Vec singlet = ket({0, 1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0});
    EXPECT_NEAR(permutation_test_prob(Mat(singlet * singlet.adjoint()), 2), 0.0, 1e-10);
    EXPECT_NEAR(permutation_test_prob(PureState::basis(2, 1).projector(), 2), 0.5, 1e-10);
}

TEST(PermutationTest, MatchesSymmetricProjectorOracle) {
    Rng rng(10);
    for (int t : {2, 3}) {
        Mat proj = brute_sym_projector(2, t);
        for (int k = 0; k < 10; ++k) {
            std::vector<Mat> regs;
            Mat prod = Mat::Ones(1, 1);
            for (int i = 0; i < t; ++i) {
                regs.push_back(random_density(2, rng, 1 + (k + i) % 2));
                prod = kron(prod, regs.back());
            }
            double oracle = (proj * prod).trace().real();
            EXPECT_NEAR(permutation_test_prob(prod, t), oracle, 1e-10);
            EXPECT_NEAR(permutation_test_prob_product(regs), oracle, 1e-10);
            Mat ent = random_density(ipow(2, t), rng);
            EXPECT_NEAR(permutation_test_prob(ent, t), (proj * ent).trace().real(), 1e-10);
        }
    }
}

TEST(PermutationTest, UnequalRegistersThrow) {
    EXPECT_THROW(permutation_test_prob(Mat::Identity(6, 6) / 6.0, 2), std::invalid_argument);
    EXPECT_THROW(permutation_test_prob_product({Mat::Identity(2, 2), Mat::Identity(4, 4)}), std::invalid_argument);
}

TEST(OperatorNorm, Examples) {
    EXPECT_NEAR(operator_norm(Mat::Identity(5, 5)), 1.0, 1e-10);
    EXPECT_NEAR(operator_norm(2.0 * Mat::Identity(3, 3)), 2.0, 1e-10);
}

TEST(OperatorNorm, PartialTraceInequalityOnRandomOperators) {
    Rng rng(12);
    for (int k = 0; k < 100; ++k) {
        int qa = 1 + k % 2;
        int qb = 1 + (k / 2) % 3;
        std::size_t d = std::size_t{1} << (qa + qb);
        Mat q = ginibre(d, d, rng);
        std::vector<int> keep(static_cast<std::size_t>(qa));
        std::iota(keep.begin(), keep.end(), 0);
        double lhs = operator_norm(partial_trace(q, qa + qb, keep));
        double dim_b = std::ldexp(1.0, qb);
        EXPECT_LE(lhs, dim_b * operator_norm(q) + 1e-9);
    }
}

TEST(States, ValidationRejectsBadInput) {
    EXPECT_THROW(PureState::from(ket({1, 1})), std::invalid_argument);
    EXPECT_THROW(PureState::from(ket({1, 0, 0})), std::invalid_argument);
    Mat nh = Mat::Zero(2, 2);
    nh(0, 0) = 1;
    nh(0, 1) = 0.5;
    EXPECT_THROW(DensityMatrix::from(nh), std::invalid_argument);
    Mat neg = Mat::Zero(2, 2);
    neg(0, 0) = 1.5;
    neg(1, 1) = -0.5;
    EXPECT_THROW(DensityMatrix::from(neg), std::invalid_argument);
    EXPECT_THROW(DensityMatrix::from(Mat::Identity(2, 2)), std::invalid_argument);
}

TEST(QDims, Invariants) {
    QDims d{1, 2, 2, 1, 2, 0, 4};
    EXPECT_NO_THROW(d.validate());
    EXPECT_EQ(d.N(), 8u);
    EXPECT_EQ(d.simulated_qubits(), 6);
    QDims bad_p{1, 2, 2, 1, 2, 0, 2};
    EXPECT_THROW(bad_p.validate(), std::invalid_argument);
    QDims bad_q{1, 2, 3, 1, 2, 0, 8};
    EXPECT_THROW(bad_q.validate(), std::invalid_argument);
    QDims big{4, 4, 2, 1, 2, 0, 4};
    EXPECT_THROW(big.validate(), CapError);
}

TEST(Caps, EnvironmentOverride) {
    EXPECT_EQ(density_qubit_cap(), 14);
    EXPECT_EQ(pure_qubit_cap(), 20);
    setenv("PRI_LAB_MAX_QUBITS", "10", 1);
    EXPECT_EQ(density_qubit_cap(), 10);
    EXPECT_EQ(pure_qubit_cap(), 16);
    EXPECT_THROW(require_density_qubits(11), CapError);
    unsetenv("PRI_LAB_MAX_QUBITS");
    EXPECT_NO_THROW(require_density_qubits(11));
}

TEST(LocalOps, ApplyLocalMatchesKron) {
    Rng rng(13);
    Mat a = ginibre(2, 4, rng);  // 2-qubit -> 1-qubit map on the middle register
    Mat x = ginibre(2 * 4 * 2, 3, rng);
    Mat full = kron(Mat::Identity(2, 2), kron(a, Mat::Identity(2, 2)));
    EXPECT_LE((apply_local(x, a, 2, 2) - full * x).cwiseAbs().maxCoeff(), 1e-10);
    Mat u = sample_haar_unitary(4, rng);
    Mat rho = random_density(16, rng);
    Mat fu = kron(Mat::Identity(2, 2), kron(u, Mat::Identity(2, 2)));
    EXPECT_LE((conjugate_local(rho, u, 2, 2) - fu * rho * fu.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Isometry, DefectOfHaarSamples) {
    Rng rng(14);
    EXPECT_LE(isometry_defect(sample_haar_isometry(4, 16, rng)), 1e-10);
    EXPECT_GT(isometry_defect(ginibre(16, 4, rng)), 1e-3);
}

TEST(Qmat, HeaderAndRoundTrip) {
    Rng rng(15);
    Mat m = ginibre(3, 2, rng);
    std::stringstream ss;
    write_qmat(ss, m);
    std::string bytes = ss.str();
    ASSERT_EQ(bytes.size(), 16u + 3 * 2 * 16);
    EXPECT_EQ(bytes.substr(0, 4), "QMAT");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
    // First payload value is Re m(0,0), little-endian f64.
    double re = 0;
    std::memcpy(&re, bytes.data() + 16, 8);
    EXPECT_EQ(re, m(0, 0).real());
    std::memcpy(&re, bytes.data() + 16 + 16, 8);
    EXPECT_EQ(re, m(0, 1).real());  // row-major
    Mat back = read_qmat(ss);
    EXPECT_EQ(back, m);
}

TEST(Rng, SubstreamsAreDeterministicAndDistinct) {
    Rng a = substream(42, 3);
    Rng b = substream(42, 3);
    Rng c = substream(42, 4);
    std::uint64_t x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
}

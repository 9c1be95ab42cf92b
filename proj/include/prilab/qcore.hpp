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

#ifndef PRILAB_QCORE_HPP
#define PRILAB_QCORE_HPP

#include <algorithm>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace prilab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Rng = std::mt19937_64;

/// Tolerance for structural identities (isometry, trace, hermiticity).
inline constexpr double kStructTol = 1e-10;
/// Tolerance for spectral quantities (eigenvalue signs, norms).
inline constexpr double kSpectralTol = 1e-8;

/// Raised when a requested simulation exceeds the configured qubit cap.
class CapError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Cap on qubits for dense density matrices. PRI_LAB_MAX_QUBITS overrides it.
inline int density_qubit_cap() {
    if (const char *env = std::getenv("PRI_LAB_MAX_QUBITS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 14;
}

/// Pure states cost the square root of a density matrix, so they get 6 more qubits.
inline int pure_qubit_cap() { return density_qubit_cap() + 6; }

inline void require_density_qubits(int qubits) {
    if (qubits > density_qubit_cap()) {
        throw CapError(
            "density matrix on " + std::to_string(qubits) + " qubits exceeds cap of " +
            std::to_string(density_qubit_cap()));
    }
}

inline void require_pure_qubits(int qubits) {
    if (qubits > pure_qubit_cap()) {
        throw CapError(
            "pure state on " + std::to_string(qubits) + " qubits exceeds cap of " +
            std::to_string(pure_qubit_cap()));
    }
}

/// Same check, phrased in terms of a matrix dimension rather than qubits.
inline void require_density_dim(std::size_t dim) {
    int qubits = 0;
    while ((std::size_t{1} << qubits) < dim) ++qubits;
    require_density_qubits(qubits);
}

inline int log2_exact(std::size_t d) {
    if (d == 0 || !std::has_single_bit(d)) {
        throw std::invalid_argument("dimension " + std::to_string(d) + " is not a power of two");
    }
    return std::countr_zero(d);
}

inline std::size_t ipow(std::size_t base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

struct QDims {
    int n = 0;
    int m = 0;
    int q = 0;
    int s = 0;
    int t = 0;
    int ell = 0;
    std::uint64_t p = 2;

    std::uint64_t N() const { return std::uint64_t{1} << (n + m); }
    int simulated_qubits() const { return ell + q * (n + m); }

    void validate() const {
        if (n < 0 || m < 0 || q < 0 || s < 0 || t < 0 || ell < 0) {
            throw std::invalid_argument("dimensions must be non-negative");
        }
        if (p < 2) throw std::invalid_argument("phase modulus p must be at least 2");
        if (s > 0 && t > 0 && q > 0 && q != s * t) {
            throw std::invalid_argument("q must equal s*t when all three are given");
        }
        if (p <= static_cast<std::uint64_t>(q)) {
            throw std::invalid_argument("phase modulus p must exceed q");
        }
        require_density_qubits(simulated_qubits());
    }
};

/// Unit vector in C^(2^d).
class PureState {
   public:
    PureState() = default;

    static PureState from(Vec amp) {
        log2_exact(static_cast<std::size_t>(amp.size()));
        if (std::abs(amp.norm() - 1.0) > kStructTol) {
            throw std::invalid_argument("state is not normalized");
        }
        PureState s;
        s.amp_ = std::move(amp);
        return s;
    }

    static PureState basis(int qubits, std::size_t index) {
        require_pure_qubits(qubits);
        Vec v = Vec::Zero(static_cast<Eigen::Index>(std::size_t{1} << qubits));
        v(static_cast<Eigen::Index>(index)) = 1.0;
        return from(std::move(v));
    }

    static PureState plus(int qubits) {
        require_pure_qubits(qubits);
        auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubits);
        return from(Vec::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim))));
    }

    const Vec &vec() const { return amp_; }
    int qubits() const { return log2_exact(static_cast<std::size_t>(amp_.size())); }
    Mat projector() const { return amp_ * amp_.adjoint(); }

   private:
    Vec amp_;
};

/// Hermitian, positive semidefinite, unit-trace matrix on d qubits.
class DensityMatrix {
   public:
    DensityMatrix() = default;

    static DensityMatrix from(Mat m) {
        if (m.rows() != m.cols()) throw std::invalid_argument("density matrix must be square");
        log2_exact(static_cast<std::size_t>(m.rows()));
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kStructTol) {
            throw std::invalid_argument("density matrix is not Hermitian");
        }
        if (std::abs(m.trace() - cplx(1.0)) > kStructTol) {
            throw std::invalid_argument("density matrix does not have unit trace");
        }
        Mat h = 0.5 * (m + m.adjoint());
        Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-9) {
            throw std::invalid_argument("density matrix has a negative eigenvalue");
        }
        DensityMatrix d;
        d.m_ = std::move(m);
        return d;
    }

    static DensityMatrix from_pure(const PureState &s) { return from(s.projector()); }

    static DensityMatrix maximally_mixed(int qubits) {
        require_density_qubits(qubits);
        auto dim = static_cast<Eigen::Index>(std::size_t{1} << qubits);
        return from(Mat::Identity(dim, dim) / static_cast<double>(dim));
    }

    const Mat &mat() const { return m_; }
    int qubits() const { return log2_exact(static_cast<std::size_t>(m_.rows())); }

   private:
    Mat m_;
};

/// Kronecker product; the left factor is the most significant register.
inline Mat kron(const Mat &a, const Mat &b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline Vec kron(const Vec &a, const Vec &b) {
    Vec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline PureState tensor(const PureState &a, const PureState &b) {
    require_pure_qubits(a.qubits() + b.qubits());
    return PureState::from(kron(a.vec(), b.vec()));
}

inline DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    require_density_qubits(a.qubits() + b.qubits());
    return DensityMatrix::from(kron(a.mat(), b.mat()));
}

/// Traces out every qubit not listed in `keep`. Qubit 0 is the most significant.
inline Mat partial_trace(const Mat &rho, int qubits, std::vector<int> keep) {
    if (rho.rows() != rho.cols() || rho.rows() != static_cast<Eigen::Index>(std::size_t{1} << qubits)) {
        throw std::invalid_argument("partial_trace: matrix does not match qubit count");
    }
    std::sort(keep.begin(), keep.end());
    if (std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
        throw std::invalid_argument("partial_trace: duplicate qubit index");
    }
    std::vector<bool> kept(static_cast<std::size_t>(qubits), false);
    for (int k : keep) {
        if (k < 0 || k >= qubits) throw std::invalid_argument("partial_trace: bad qubit index");
        kept[static_cast<std::size_t>(k)] = true;
    }
    std::vector<int> traced;
    for (int i = 0; i < qubits; ++i) {
        if (!kept[static_cast<std::size_t>(i)]) traced.push_back(i);
    }
    auto spread = [qubits](const std::vector<int> &pos) {
        std::vector<std::size_t> out(std::size_t{1} << pos.size());
        for (std::size_t v = 0; v < out.size(); ++v) {
            std::size_t idx = 0;
            for (std::size_t b = 0; b < pos.size(); ++b) {
                if ((v >> (pos.size() - 1 - b)) & 1U) idx |= std::size_t{1} << (qubits - 1 - pos[b]);
            }
            out[v] = idx;
        }
        return out;
    };
    auto km = spread(keep);
    auto tm = spread(traced);
    auto dk = static_cast<Eigen::Index>(km.size());
    Mat out = Mat::Zero(dk, dk);
    for (Eigen::Index c = 0; c < dk; ++c) {
        for (Eigen::Index r = 0; r < dk; ++r) {
            cplx acc = 0;
            for (std::size_t e : tm) {
                acc += rho(static_cast<Eigen::Index>(km[static_cast<std::size_t>(r)] | e),
                           static_cast<Eigen::Index>(km[static_cast<std::size_t>(c)] | e));
            }
            out(r, c) = acc;
        }
    }
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<int> &keep) {
    return DensityMatrix::from(partial_trace(rho.mat(), rho.qubits(), keep));
}

/// Half the trace norm of (a - b), via the Hermitian eigendecomposition of the difference.
inline double trace_distance(const Mat &a, const Mat &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("trace_distance: dimension mismatch");
    }
    Mat diff = a - b;
    Mat h = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    double td = 0.5 * es.eigenvalues().cwiseAbs().sum();
    return std::clamp(td, 0.0, 1.0);
}

inline double trace_distance(const DensityMatrix &a, const DensityMatrix &b) {
    return trace_distance(a.mat(), b.mat());
}

inline double swap_test_prob(const Mat &rho, const Mat &sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw std::invalid_argument("swap_test_prob: dimension mismatch");
    }
    double overlap = (rho.transpose().cwiseProduct(sigma)).sum().real();
    return 0.5 * (1.0 + overlap);
}

/// Acceptance probability Tr(Pi_sym rho) of the permutation test on t equal registers.
inline double permutation_test_prob(const Mat &rho, int t) {
    if (t < 1) throw std::invalid_argument("permutation_test_prob: t must be positive");
    auto total = static_cast<std::size_t>(rho.rows());
    std::size_t d = 1;
    while (ipow(d, t) < total) ++d;
    if (ipow(d, t) != total || rho.rows() != rho.cols()) {
        throw std::invalid_argument("permutation_test_prob: registers must have equal dimension");
    }
    std::vector<int> perm(static_cast<std::size_t>(t));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> digits(static_cast<std::size_t>(t));
    double acc = 0;
    double count = 0;
    do {
        for (std::size_t x = 0; x < total; ++x) {
            std::size_t rem = x;
            for (int i = t - 1; i >= 0; --i) {
                digits[static_cast<std::size_t>(i)] = rem % d;
                rem /= d;
            }
            std::size_t y = 0;
            for (int i = 0; i < t; ++i) y = y * d + digits[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            acc += rho(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)).real();
        }
        count += 1;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return acc / count;
}

/// Permutation test on a product input rho_1 x ... x rho_k, evaluated cycle by cycle
/// so the (d^k)-dimensional projector is never formed.
inline double permutation_test_prob_product(const std::vector<Mat> &factors) {
    if (factors.empty()) throw std::invalid_argument("permutation_test_prob_product: no registers");
    for (const auto &f : factors) {
        if (f.rows() != factors[0].rows() || f.cols() != f.rows()) {
            throw std::invalid_argument("permutation_test_prob_product: registers must have equal dimension");
        }
    }
    std::size_t k = factors.size();
    std::vector<std::size_t> sigma(k);
    std::iota(sigma.begin(), sigma.end(), 0);
    cplx acc = 0;
    double count = 0;
    do {
        std::vector<bool> seen(k, false);
        cplx term = 1;
        for (std::size_t i = 0; i < k; ++i) {
            if (seen[i]) continue;
            Mat prod = factors[i];
            seen[i] = true;
            for (std::size_t j = sigma[i]; j != i; j = sigma[j]) {
                prod = factors[j] * prod;
                seen[j] = true;
            }
            term *= prod.trace();
        }
        acc += term;
        count += 1;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return acc.real() / count;
}

inline double operator_norm(const Mat &a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(a);
    return svd.singularValues()(0);
}

/// ||V^dag V - I||_inf for a matrix with orthonormal columns.
inline double isometry_defect(const Mat &v) {
    Mat g = v.adjoint() * v;
    g -= Mat::Identity(v.cols(), v.cols());
    return operator_norm(g);
}

/// Applies A to the middle factor of the row index, rows = hi * A.cols() * lo.
/// The result has hi * A.rows() * lo rows and the same columns.
inline Mat apply_local(const Mat &m, const Mat &a, std::size_t hi, std::size_t lo) {
    auto a_in = static_cast<std::size_t>(a.cols());
    auto a_out = static_cast<std::size_t>(a.rows());
    if (static_cast<std::size_t>(m.rows()) != hi * a_in * lo) {
        throw std::invalid_argument("apply_local: row layout mismatch");
    }
    Mat out(static_cast<Eigen::Index>(hi * a_out * lo), m.cols());
    if (lo == 1) {
        for (std::size_t h = 0; h < hi; ++h) {
            out.middleRows(static_cast<Eigen::Index>(h * a_out), static_cast<Eigen::Index>(a_out)).noalias() =
                a * m.middleRows(static_cast<Eigen::Index>(h * a_in), static_cast<Eigen::Index>(a_in));
        }
        return out;
    }
    Mat at = a.transpose();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (std::size_t h = 0; h < hi; ++h) {
            Eigen::Map<const Mat> y(m.data() + c * m.rows() + static_cast<Eigen::Index>(h * a_in * lo),
                                    static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(a_in));
            Eigen::Map<Mat> z(out.data() + c * out.rows() + static_cast<Eigen::Index>(h * a_out * lo),
                              static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(a_out));
            z.noalias() = y * at;
        }
    }
    return out;
}

inline Vec apply_local(const Vec &v, const Mat &a, std::size_t hi, std::size_t lo) {
    Mat m = v;
    return apply_local(m, a, hi, lo).col(0);
}

/// (I_hi x A x I_lo) M (I_hi x A x I_lo)^dag for any square M.
inline Mat conjugate_local(const Mat &m, const Mat &a, std::size_t hi, std::size_t lo) {
    Mat left = apply_local(m, a, hi, lo);
    Mat both = apply_local(Mat(left.adjoint()), a, hi, lo);
    return both.adjoint();
}

// ---------------------------------------------------------------------------
// Randomness

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent generator for substream `stream` of a master seed.
inline Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x5851F42D4C957F2DULL)));
}

inline cplx gaussian_complex(Rng &rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    double re = nd(rng);
    double im = nd(rng);
    return {re, im};
}

inline double uniform01(Rng &rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::uint64_t uniform_below(Rng &rng, std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng);
}

// ---------------------------------------------------------------------------
// QMAT dump: "QMAT", u32 rows, u32 cols, u32 zero padding, then row-major
// (re, im) pairs as little-endian f64.

namespace detail {

template <typename T>
void put_le(std::ostream &os, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char *>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream &is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char *>(buf), sizeof(T))) throw std::runtime_error("QMAT: truncated input");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

}  // namespace detail

inline void write_qmat(std::ostream &os, const Mat &m) {
    os.write("QMAT", 4);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.rows()));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(m.cols()));
    detail::put_le<std::uint32_t>(os, 0);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            detail::put_le<double>(os, m(r, c).real());
            detail::put_le<double>(os, m(r, c).imag());
        }
    }
}

inline Mat read_qmat(std::istream &is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "QMAT", 4) != 0) {
        throw std::runtime_error("QMAT: bad magic");
    }
    auto rows = detail::get_le<std::uint32_t>(is);
    auto cols = detail::get_le<std::uint32_t>(is);
    (void)detail::get_le<std::uint32_t>(is);
    Mat m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            double re = detail::get_le<double>(is);
            double im = detail::get_le<double>(is);
            m(r, c) = cplx(re, im);
        }
    }
    return m;
}

}  // namespace prilab

#endif  // PRILAB_QCORE_HPP

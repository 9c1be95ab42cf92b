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

#ifndef PRILAB_HAAR_HPP
#define PRILAB_HAAR_HPP

#include <functional>
#include <thread>

#include "prilab/qcore.hpp"
#include "prilab/symtypes.hpp"

namespace prilab {

enum class HaarMethod { ginibre_qr, column_by_column };

inline Vec sample_haar_state(std::size_t d, Rng &rng) {
    Vec v(static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gaussian_complex(rng);
    return v / v.norm();
}

inline Mat ginibre(std::size_t rows, std::size_t cols, Rng &rng) {
    Mat g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        for (Eigen::Index r = 0; r < g.rows(); ++r) g(r, c) = gaussian_complex(rng);
    }
    return g;
}

/// Orthonormalizes `v` against the first `k` columns of `basis` (two Gram-Schmidt passes).
/// Returns the residual norm before normalization.
inline double orthonormalize_against(Vec &v, const Mat &basis, Eigen::Index k) {
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < k; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    }
    double r = v.norm();
    if (r > 0) v /= r;
    return r;
}

/// First `cols` columns of a Haar unitary on C^rows.
inline Mat sample_haar_isometry(std::size_t d_in, std::size_t d_out, Rng &rng,
                                HaarMethod method = HaarMethod::ginibre_qr) {
    if (d_in > d_out || d_in == 0) throw std::invalid_argument("sample_haar_isometry: need 1 <= d_in <= d_out");
    if (method == HaarMethod::column_by_column) {
        // Each column is Haar in the complement of the previous ones.
        Mat out(static_cast<Eigen::Index>(d_out), static_cast<Eigen::Index>(d_in));
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            Vec v = sample_haar_state(d_out, rng);
            while (orthonormalize_against(v, out, j) < 1e-8) v = sample_haar_state(d_out, rng);
            out.col(j) = v;
        }
        return out;
    }
    Mat g = ginibre(d_out, d_in, rng);
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ() * Mat::Identity(g.rows(), g.cols());
    Mat r = qr.matrixQR().topRows(g.cols()).template triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        cplx d = r(j, j);
        double a = std::abs(d);
        q.col(j) *= (a > 0 ? d / a : cplx(1.0));
    }
    return q;
}

inline Mat sample_haar_unitary(std::size_t d, Rng &rng, HaarMethod method = HaarMethod::ginibre_qr) {
    return sample_haar_isometry(d, d, rng, method);
}

// ---------------------------------------------------------------------------
// Isometry inverse

enum class DilationMode { any_consistent, haar_conditional };

inline std::string to_string(DilationMode m) {
    return m == DilationMode::any_consistent ? "any-consistent" : "haar-conditional";
}

/// Inverse channel X -> Tr_Aux(U^dag X U) for a unitary U with U(|x>|0^m>) = base|x>.
struct IsometryInverseChannel {
    Mat base;
    Mat dilation;
    int n = 0;
    int m = 0;

    /// Uses U directly; the isometry is U restricted to inputs with |0^m> in Aux.
    static IsometryInverseChannel from_unitary(const Mat &u, int n, int m) {
        if (u.rows() != u.cols() || u.rows() != static_cast<Eigen::Index>(std::size_t{1} << (n + m))) {
            throw std::invalid_argument("IsometryInverseChannel: unitary has wrong dimension");
        }
        IsometryInverseChannel ch;
        ch.n = n;
        ch.m = m;
        ch.dilation = u;
        ch.base.resize(u.rows(), Eigen::Index{1} << n);
        for (Eigen::Index x = 0; x < ch.base.cols(); ++x) ch.base.col(x) = u.col(x << m);
        return ch;
    }

    /// Completes `base` to a consistent unitary by Gram-Schmidt over the computational
    /// basis (any-consistent) or over i.i.d. Gaussian vectors (haar-conditional).
    static IsometryInverseChannel complete(const Mat &base, DilationMode mode, Rng &rng) {
        auto d_out = static_cast<std::size_t>(base.rows());
        auto d_in = static_cast<std::size_t>(base.cols());
        int n = log2_exact(d_in);
        int m = log2_exact(d_out) - n;
        if (m < 0) throw std::invalid_argument("IsometryInverseChannel: more columns than rows");
        if (isometry_defect(base) > kStructTol) throw std::invalid_argument("IsometryInverseChannel: base is not an isometry");
        // Columns are filled in order: base columns first, then the completion.
        Mat cols(base.rows(), base.rows());
        cols.leftCols(base.cols()) = base;
        Eigen::Index filled = base.cols();
        std::size_t next_basis = 0;
        while (filled < cols.cols()) {
            Vec v;
            if (mode == DilationMode::any_consistent) {
                v = Vec::Zero(base.rows());
                v(static_cast<Eigen::Index>(next_basis++)) = 1.0;
            } else {
                v = sample_haar_state(d_out, rng);
            }
            if (orthonormalize_against(v, cols, filled) > 1e-6) cols.col(filled++) = v;
        }
        IsometryInverseChannel ch;
        ch.n = n;
        ch.m = m;
        ch.base = base;
        ch.dilation.resize(base.rows(), base.rows());
        std::size_t aux = std::size_t{1} << m;
        Eigen::Index extra = base.cols();
        for (std::size_t x = 0; x < d_in; ++x) {
            for (std::size_t a = 0; a < aux; ++a) {
                auto col = static_cast<Eigen::Index>(x * aux + a);
                ch.dilation.col(col) = a == 0 ? cols.col(static_cast<Eigen::Index>(x)) : cols.col(extra++);
            }
        }
        return ch;
    }

    Mat apply(const Mat &x) const {
        if (x.rows() != dilation.rows() || x.cols() != dilation.cols()) {
            throw std::invalid_argument("isometry_inverse_apply: input has wrong dimension");
        }
        Mat y = dilation.adjoint() * x * dilation;
        std::vector<int> keep(static_cast<std::size_t>(n));
        std::iota(keep.begin(), keep.end(), 0);
        return partial_trace(y, n + m, keep);
    }
};

inline Mat isometry_inverse_apply(const IsometryInverseChannel &ch, const Mat &x) { return ch.apply(x); }

// ---------------------------------------------------------------------------
// Monte Carlo machinery

struct McOptions {
    int samples = 4096;
    int batches = 32;
    int bootstrap = 200;
    int jobs = 1;
    std::uint64_t seed = 0;
};

/// Batched Monte Carlo sum of matrices. Batch b draws from substream b of the seed,
/// so the result does not depend on how batches are spread over workers.
struct McMatrix {
    std::vector<Mat> batch_sums;
    std::vector<int> batch_counts;

    int samples() const { return std::accumulate(batch_counts.begin(), batch_counts.end(), 0); }

    Mat mean_of(const std::vector<std::size_t> &which) const {
        Mat acc = Mat::Zero(batch_sums[0].rows(), batch_sums[0].cols());
        int count = 0;
        for (auto b : which) {
            acc += batch_sums[b];
            count += batch_counts[b];
        }
        return acc / static_cast<double>(count);
    }

    Mat mean() const {
        std::vector<std::size_t> all(batch_sums.size());
        std::iota(all.begin(), all.end(), 0);
        return mean_of(all);
    }

    /// Per-entry standard error of the mean, from the spread of batch means.
    Mat entry_stderr() const {
        Mat mu = mean();
        Eigen::MatrixXd var = Eigen::MatrixXd::Zero(mu.rows(), mu.cols());
        for (std::size_t b = 0; b < batch_sums.size(); ++b) {
            Mat d = batch_sums[b] / static_cast<double>(batch_counts[b]) - mu;
            var += d.cwiseAbs2();
        }
        auto nb = static_cast<double>(batch_sums.size());
        if (nb < 2) return Mat::Zero(mu.rows(), mu.cols());
        return (var / (nb * (nb - 1))).cwiseSqrt().cast<cplx>();
    }

    /// Applies a linear map to every batch sum.
    McMatrix map(const std::function<Mat(const Mat &)> &f) const {
        McMatrix out;
        out.batch_counts = batch_counts;
        for (const auto &s : batch_sums) out.batch_sums.push_back(f(s));
        return out;
    }
};

/// Runs `draw(rng, acc)` once per sample, accumulating into per-batch sums of size rows x cols.
inline McMatrix mc_accumulate(Eigen::Index rows, Eigen::Index cols, const McOptions &opt,
                              const std::function<void(Rng &, Mat &)> &draw) {
    if (opt.samples < 1) throw std::invalid_argument("Monte Carlo sample count must be positive");
    int nb = std::max(1, std::min(opt.batches, opt.samples));
    McMatrix out;
    out.batch_sums.assign(static_cast<std::size_t>(nb), Mat::Zero(rows, cols));
    out.batch_counts.assign(static_cast<std::size_t>(nb), 0);
    auto run_batch = [&](int b) {
        int lo = static_cast<int>(static_cast<long long>(opt.samples) * b / nb);
        int hi = static_cast<int>(static_cast<long long>(opt.samples) * (b + 1) / nb);
        Rng rng = substream(opt.seed, static_cast<std::uint64_t>(b));
        Mat &acc = out.batch_sums[static_cast<std::size_t>(b)];
        for (int k = lo; k < hi; ++k) draw(rng, acc);
        out.batch_counts[static_cast<std::size_t>(b)] = hi - lo;
    };
    int jobs = std::max(1, std::min(opt.jobs, nb));
    if (jobs == 1) {
        for (int b = 0; b < nb; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                for (int b = w; b < nb; b += jobs) run_batch(b);
            });
        }
        for (auto &th : pool) th.join();
    }
    return out;
}

/// Trace distance between a Monte Carlo estimate and an exact matrix, with error bars.
struct TdEstimate {
    double value = 0;
    double stderr = 0;
    double bootstrap_sd = 0;
    double split_half = 0;
};

/// `stderr` is the larger of the bootstrap spread (over batches) and the split-half
/// estimate TD(mean_A, mean_B)/2 of the Monte Carlo error itself; the bootstrap alone
/// misses the upward bias of a trace distance when the true value is near zero.
inline TdEstimate estimate_td(const McMatrix &est, const Mat &reference, int resamples, std::uint64_t seed) {
    TdEstimate r;
    r.value = trace_distance(est.mean(), reference);
    std::size_t nb = est.batch_sums.size();
    if (nb >= 2) {
        std::vector<std::size_t> a;
        std::vector<std::size_t> b;
        for (std::size_t i = 0; i < nb; ++i) (i < nb / 2 ? a : b).push_back(i);
        r.split_half = 0.5 * trace_distance(est.mean_of(a), est.mean_of(b));
        Rng rng = substream(seed, 0xB0075ULL);
        std::vector<double> vals;
        std::vector<std::size_t> pick(nb);
        for (int k = 0; k < resamples; ++k) {
            for (auto &p : pick) p = static_cast<std::size_t>(uniform_below(rng, nb));
            vals.push_back(trace_distance(est.mean_of(pick), reference));
        }
        if (vals.size() >= 2) {
            double mu = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
            double ss = 0;
            for (double v : vals) ss += (v - mu) * (v - mu);
            r.bootstrap_sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
        }
    }
    r.stderr = std::max(r.bootstrap_sd, r.split_half);
    return r;
}

// ---------------------------------------------------------------------------
// Twirls

/// Register layout: `ell` side qubits followed by `q` blocks of `d` qubits each.
struct TwirlLayout {
    int ell = 0;
    int q = 1;
    int d = 1;

    int total_qubits() const { return ell + q * d; }
    std::size_t block_dim() const { return std::size_t{1} << d; }
    std::size_t hi(int j) const { return std::size_t{1} << (ell + j * d); }
    std::size_t lo(int j) const { return std::size_t{1} << ((q - 1 - j) * d); }
};

/// (I_ell x U^{x q}) rho (.)^dag.
inline Mat conjugate_blocks(const Mat &rho, const Mat &u, const TwirlLayout &layout) {
    Mat out = rho;
    for (int j = 0; j < layout.q; ++j) out = conjugate_local(out, u, layout.hi(j), layout.lo(j));
    return out;
}

/// Haar twirl E_U[(I_ell x U^{x q}) rho (.)^dag], estimated from opt.samples unitaries.
inline McMatrix haar_twirl_mc(const Mat &rho, const TwirlLayout &layout, const McOptions &opt) {
    require_density_qubits(layout.total_qubits());
    if (rho.rows() != static_cast<Eigen::Index>(std::size_t{1} << layout.total_qubits())) {
        throw std::invalid_argument("haar_twirl_mc: state does not match layout");
    }
    return mc_accumulate(rho.rows(), rho.cols(), opt, [&](Rng &rng, Mat &acc) {
        Mat u = sample_haar_unitary(layout.block_dim(), rng);
        acc += conjugate_blocks(rho, u, layout);
    });
}

/// TD(rho, twirl(rho)): how far rho is from invariance under I_ell x U^{x q}.
inline TdEstimate almost_invariance_deficit(const Mat &rho, const TwirlLayout &layout, const McOptions &opt) {
    return estimate_td(haar_twirl_mc(rho, layout, opt), rho, opt.bootstrap, opt.seed);
}

/// Result of comparing s Haar columns (t copies each) against i.i.d. Haar states.
struct OrthogonalColumnsResult {
    McMatrix rho;
    Mat sigma;
    TdEstimate td;
    Mat distinct_strings;
    TdEstimate td_distinct;
};

/// rho = E_U[ x_j (U|j><j|U^dag)^{x t} ] over j < s, versus sigma = x_j Pi_sym/Tr.
/// For t = 1 also compares rho with the uniform mixture over strings with distinct entries.
inline OrthogonalColumnsResult haar_orthogonal_columns_vs_iid(int n, int s, int t, const McOptions &opt) {
    if (n < 0 || s < 1 || t < 1) throw std::invalid_argument("haar_orthogonal_columns_vs_iid: bad parameters");
    std::uint64_t d = std::uint64_t{1} << n;
    if (static_cast<std::uint64_t>(s) > d) throw std::invalid_argument("haar_orthogonal_columns_vs_iid: s exceeds 2^n");
    require_density_qubits(n * s * t);
    OrthogonalColumnsResult r;
    auto dim = static_cast<Eigen::Index>(ipow(d, s * t));
    r.rho = mc_accumulate(dim, dim, opt, [&](Rng &rng, Mat &acc) {
        Mat u = sample_haar_unitary(d, rng);
        Vec v = Vec::Ones(1);
        for (int j = 0; j < s; ++j) {
            for (int c = 0; c < t; ++c) v = kron(v, Vec(u.col(j)));
        }
        acc.noalias() += v * v.adjoint();
    });
    Mat sym = sym_projector(d, t);
    sym /= sym.trace().real();
    r.sigma = Mat::Ones(1, 1);
    for (int j = 0; j < s; ++j) r.sigma = kron(r.sigma, sym);
    r.td = estimate_td(r.rho, r.sigma, opt.bootstrap, opt.seed);
    if (t == 1) {
        r.distinct_strings = Mat::Zero(dim, dim);
        double count = 0;
        for (Eigen::Index x = 0; x < dim; ++x) {
            Tuple v = tuple_digits(static_cast<std::size_t>(x), d, s);
            std::set<std::uint64_t> seen(v.begin(), v.end());
            if (seen.size() == v.size()) {
                r.distinct_strings(x, x) = 1.0;
                count += 1;
            }
        }
        r.distinct_strings /= count;
        r.td_distinct = estimate_td(r.rho, r.distinct_strings, opt.bootstrap, opt.seed);
    }
    return r;
}

}  // namespace prilab

#endif  // PRILAB_HAAR_HPP

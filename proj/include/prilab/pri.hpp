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

#ifndef PRILAB_PRI_HPP
#define PRILAB_PRI_HPP

#include <numbers>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "prilab/haar.hpp"
#include "prilab/qcore.hpp"
#include "prilab/symtypes.hpp"

namespace prilab {

/// Smallest power of two strictly greater than 2q.
inline std::uint64_t default_modulus(int q) {
    std::uint64_t p = 2;
    while (p <= 2 * static_cast<std::uint64_t>(q)) p *= 2;
    return p;
}

/// f: [N] -> Z_p, either an explicit table or a seed-derived keyed stream.
/// The keyed stream is a statistical stand-in with no cryptographic claim.
struct PhaseFunction {
    enum class Kind { table, keyed };

    Kind kind = Kind::table;
    std::uint64_t alphabet = 1;
    std::uint64_t modulus = 2;
    std::vector<std::uint64_t> table;
    std::uint64_t seed = 0;

    static PhaseFunction from_table(std::vector<std::uint64_t> table, std::uint64_t modulus) {
        PhaseFunction f;
        f.kind = Kind::table;
        f.alphabet = table.size();
        f.modulus = modulus;
        for (auto v : table) {
            if (v >= modulus) throw std::invalid_argument("PhaseFunction: table entry outside [0, p)");
        }
        f.table = std::move(table);
        return f;
    }

    static PhaseFunction random_table(std::uint64_t alphabet, std::uint64_t modulus, Rng &rng) {
        std::vector<std::uint64_t> t(alphabet);
        for (auto &v : t) v = uniform_below(rng, modulus);
        return from_table(std::move(t), modulus);
    }

    static PhaseFunction keyed(std::uint64_t alphabet, std::uint64_t modulus, std::uint64_t seed) {
        PhaseFunction f;
        f.kind = Kind::keyed;
        f.alphabet = alphabet;
        f.modulus = modulus;
        f.seed = seed;
        return f;
    }

    std::uint64_t operator()(std::uint64_t z) const {
        if (kind == Kind::table) return table[z];
        return splitmix64(splitmix64(seed) ^ (z * 0xD1B54A32D192ED03ULL)) % modulus;
    }

    std::vector<std::uint64_t> materialize() const {
        std::vector<std::uint64_t> t(alphabet);
        for (std::uint64_t z = 0; z < alphabet; ++z) t[z] = (*this)(z);
        return t;
    }
};

/// pi in S_N, either an explicit array or a keyed Feistel network with cycle walking.
struct PermBackend {
    enum class Kind { array, keyed };

    Kind kind = Kind::array;
    std::uint64_t alphabet = 1;
    std::vector<std::uint64_t> forward;
    std::vector<std::uint64_t> backward;
    std::uint64_t seed = 0;

    static PermBackend from_array(std::vector<std::uint64_t> array) {
        PermBackend p;
        p.kind = Kind::array;
        p.alphabet = array.size();
        p.backward.assign(array.size(), array.size());
        for (std::size_t i = 0; i < array.size(); ++i) {
            if (array[i] >= array.size() || p.backward[array[i]] != array.size()) {
                throw std::invalid_argument("PermBackend: array is not a bijection");
            }
            p.backward[array[i]] = i;
        }
        p.forward = std::move(array);
        return p;
    }

    static PermBackend random(std::uint64_t alphabet, Rng &rng) {
        std::vector<std::uint64_t> a(alphabet);
        std::iota(a.begin(), a.end(), 0);
        for (std::uint64_t i = alphabet; i > 1; --i) std::swap(a[i - 1], a[uniform_below(rng, i)]);
        return from_array(std::move(a));
    }

    static PermBackend identity(std::uint64_t alphabet) {
        std::vector<std::uint64_t> a(alphabet);
        std::iota(a.begin(), a.end(), 0);
        return from_array(std::move(a));
    }

    static PermBackend keyed(std::uint64_t alphabet, std::uint64_t seed) {
        log2_exact(alphabet);
        PermBackend p;
        p.kind = Kind::keyed;
        p.alphabet = alphabet;
        p.seed = seed;
        return p;
    }

    std::uint64_t operator()(std::uint64_t z) const {
        if (kind == Kind::array) return forward[z];
        if (alphabet == 1) return 0;
        do {
            z = feistel(z, false);
        } while (z >= alphabet);
        return z;
    }

    std::uint64_t inverse(std::uint64_t z) const {
        if (kind == Kind::array) return backward[z];
        if (alphabet == 1) return 0;
        do {
            z = feistel(z, true);
        } while (z >= alphabet);
        return z;
    }

    std::vector<std::uint64_t> materialize() const {
        std::vector<std::uint64_t> a(alphabet);
        for (std::uint64_t z = 0; z < alphabet; ++z) a[z] = (*this)(z);
        return a;
    }

   private:
    static constexpr int kRounds = 4;

    std::uint64_t feistel(std::uint64_t z, bool inverse) const {
        int bits = log2_exact(alphabet);
        int half = (bits + 1) / 2;
        std::uint64_t mask = (std::uint64_t{1} << half) - 1;
        std::uint64_t l = (z >> half) & mask;
        std::uint64_t r = z & mask;
        auto round_fn = [&](int i, std::uint64_t x) {
            return splitmix64(splitmix64(seed + static_cast<std::uint64_t>(i)) ^ x) & mask;
        };
        if (!inverse) {
            for (int i = 0; i < kRounds; ++i) {
                std::uint64_t nl = r;
                r = l ^ round_fn(i, r);
                l = nl;
            }
        } else {
            for (int i = kRounds - 1; i >= 0; --i) {
                std::uint64_t nr = l;
                l = r ^ round_fn(i, l);
                r = nr;
            }
        }
        return (l << half) | r;
    }
};

/// Everything that determines G_{(f, pi)}: maps n qubits to n+m qubits.
struct PriSpec {
    int n = 1;
    int m = 1;
    std::uint64_t p = 4;
    PhaseFunction f;
    PermBackend perm;

    std::uint64_t N() const { return std::uint64_t{1} << (n + m); }

    void validate() const {
        if (n < 0 || m < 0) throw std::invalid_argument("PriSpec: negative dimension");
        if (p < 2) throw std::invalid_argument("PriSpec: p must be at least 2");
        if (f.alphabet != N() || perm.alphabet != N()) throw std::invalid_argument("PriSpec: backend alphabet must be 2^(n+m)");
        if (f.modulus != p) throw std::invalid_argument("PriSpec: phase modulus mismatch");
    }

    static PriSpec random(int n, int m, std::uint64_t p, Rng &rng) {
        PriSpec s;
        s.n = n;
        s.m = m;
        s.p = p;
        s.f = PhaseFunction::random_table(s.N(), p, rng);
        s.perm = PermBackend::random(s.N(), rng);
        return s;
    }

    /// Key k = k1 || k2 expanded from one 64-bit seed.
    static PriSpec keyed(int n, int m, std::uint64_t p, std::uint64_t key) {
        PriSpec s;
        s.n = n;
        s.m = m;
        s.p = p;
        s.f = PhaseFunction::keyed(s.N(), p, splitmix64(key ^ 0x6B31ULL));
        s.perm = PermBackend::keyed(s.N(), splitmix64(key ^ 0x6B32ULL));
        return s;
    }

    /// Same map with both backends written out as tables.
    PriSpec explicit_copy() const {
        PriSpec s = *this;
        s.f = PhaseFunction::from_table(f.materialize(), p);
        s.perm = PermBackend::from_array(perm.materialize());
        return s;
    }
};

inline nlohmann::json to_json(const PriSpec &s) {
    nlohmann::json j;
    j["n"] = s.n;
    j["m"] = s.m;
    j["p"] = s.p;
    if (s.f.kind == PhaseFunction::Kind::table) {
        j["f"] = {{"kind", "table"}, {"table", s.f.table}};
    } else {
        j["f"] = {{"kind", "keyed"}, {"seed", s.f.seed}};
    }
    if (s.perm.kind == PermBackend::Kind::array) {
        j["perm"] = {{"kind", "array"}, {"array", s.perm.forward}};
    } else {
        j["perm"] = {{"kind", "keyed"}, {"seed", s.perm.seed}};
    }
    return j;
}

inline PriSpec pri_spec_from_json(const nlohmann::json &j) {
    PriSpec s;
    s.n = j.at("n").get<int>();
    s.m = j.at("m").get<int>();
    s.p = j.at("p").get<std::uint64_t>();
    const auto &f = j.at("f");
    std::string fk = f.at("kind").get<std::string>();
    if (fk == "table") {
        s.f = PhaseFunction::from_table(f.at("table").get<std::vector<std::uint64_t>>(), s.p);
    } else if (fk == "keyed") {
        s.f = PhaseFunction::keyed(s.N(), s.p, f.at("seed").get<std::uint64_t>());
    } else {
        throw std::invalid_argument("PriSpec: unknown phase backend " + fk);
    }
    const auto &pm = j.at("perm");
    std::string pk = pm.at("kind").get<std::string>();
    if (pk == "array") {
        s.perm = PermBackend::from_array(pm.at("array").get<std::vector<std::uint64_t>>());
    } else if (pk == "keyed") {
        s.perm = PermBackend::keyed(s.N(), pm.at("seed").get<std::uint64_t>());
    } else {
        throw std::invalid_argument("PriSpec: unknown permutation backend " + pk);
    }
    s.validate();
    return s;
}

inline cplx root_of_unity(std::uint64_t k, std::uint64_t p) {
    double a = 2.0 * std::numbers::pi * static_cast<double>(k % p) / static_cast<double>(p);
    return {std::cos(a), std::sin(a)};
}

/// G|x> = 2^{-m/2} sum_z w_p^{f(x||z)} |pi(x||z)>, as a 2^(n+m) x 2^n matrix.
inline Mat pri_isometry(const PriSpec &spec) {
    spec.validate();
    require_pure_qubits(spec.n + spec.m);
    std::uint64_t aux = std::uint64_t{1} << spec.m;
    auto N = static_cast<Eigen::Index>(spec.N());
    Mat g = Mat::Zero(N, Eigen::Index{1} << spec.n);
    double amp = 1.0 / std::sqrt(static_cast<double>(aux));
    for (Eigen::Index x = 0; x < g.cols(); ++x) {
        for (std::uint64_t z = 0; z < aux; ++z) {
            std::uint64_t idx = (static_cast<std::uint64_t>(x) << spec.m) | z;
            g(static_cast<Eigen::Index>(spec.perm(idx)), x) = amp * root_of_unity(spec.f(idx), spec.p);
        }
    }
    return g;
}

/// The unitary O_pi O_f (I_n x H^{x m}); its columns |x>|0^m> form G.
inline Mat pri_dilation(const PriSpec &spec) {
    spec.validate();
    require_density_qubits(spec.n + spec.m);
    std::uint64_t aux = std::uint64_t{1} << spec.m;
    auto N = static_cast<Eigen::Index>(spec.N());
    Mat w = Mat::Zero(N, N);
    double amp = 1.0 / std::sqrt(static_cast<double>(aux));
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << spec.n); ++x) {
        for (std::uint64_t z = 0; z < aux; ++z) {
            std::uint64_t idx = (x << spec.m) | z;
            cplx ph = amp * root_of_unity(spec.f(idx), spec.p);
            auto row = static_cast<Eigen::Index>(spec.perm(idx));
            for (std::uint64_t a = 0; a < aux; ++a) {
                double sign = (std::popcount(a & z) & 1) ? -1.0 : 1.0;
                w(row, static_cast<Eigen::Index>((x << spec.m) | a)) = sign * ph;
            }
        }
    }
    return w;
}

/// (I_ell x G^{x q}) applied to a pure state on ell + q*n qubits.
inline Vec pri_apply(const PriSpec &spec, const Vec &state, int q = 1, int ell = 0) {
    require_pure_qubits(ell + q * (spec.n + spec.m));
    if (state.size() != static_cast<Eigen::Index>(std::size_t{1} << (ell + q * spec.n))) {
        throw std::invalid_argument("pri_apply: state does not match layout");
    }
    Mat g = pri_isometry(spec);
    Vec out = state;
    for (int j = 0; j < q; ++j) {
        std::size_t hi = (std::size_t{1} << ell) * ipow(spec.N(), j);
        std::size_t lo = ipow(std::size_t{1} << spec.n, q - 1 - j);
        out = apply_local(out, g, hi, lo);
    }
    return out;
}

/// Conjugates the q blocks of n qubits (after ell side qubits) by the n -> n+k map A.
inline Mat conjugate_query_blocks(const Mat &rho, const Mat &a, int n, int q, int ell) {
    auto out_dim = static_cast<std::size_t>(a.rows());
    Mat out = rho;
    for (int j = 0; j < q; ++j) {
        std::size_t hi = (std::size_t{1} << ell) * ipow(out_dim, j);
        std::size_t lo = ipow(std::size_t{1} << n, q - 1 - j);
        out = conjugate_local(out, a, hi, lo);
    }
    return out;
}

/// (I_ell x G^{x q}) rho (.)^dag for rho on ell + q*n qubits.
inline Mat pri_apply(const PriSpec &spec, const Mat &rho, int q = 1, int ell = 0) {
    require_density_qubits(ell + q * (spec.n + spec.m));
    if (rho.rows() != static_cast<Eigen::Index>(std::size_t{1} << (ell + q * spec.n))) {
        throw std::invalid_argument("pri_apply: state does not match layout");
    }
    return conjugate_query_blocks(rho, pri_isometry(spec), spec.n, q, ell);
}

/// Undo pi and f, undo the Hadamards, discard the last m qubits.
inline Mat pri_invert(const PriSpec &spec, const Mat &x) {
    if (x.rows() != static_cast<Eigen::Index>(spec.N()) || x.cols() != x.rows()) {
        throw std::invalid_argument("pri_invert: input must be a square matrix on n+m qubits");
    }
    return IsometryInverseChannel::from_unitary(pri_dilation(spec), spec.n, spec.m).apply(x);
}

// ---------------------------------------------------------------------------
// Expectation channels over (f, pi)

namespace detail {

/// Dense id of the type of every q-tuple over [N].
inline std::vector<int> tuple_type_ids(std::uint64_t alphabet, int q) {
    std::size_t count = ipow(alphabet, q);
    std::vector<int> ids(count);
    std::map<Tuple, int> seen;
    for (std::size_t b = 0; b < count; ++b) {
        Tuple v = tuple_digits(b, alphabet, q);
        std::sort(v.begin(), v.end());
        auto it = seen.emplace(v, static_cast<int>(seen.size())).first;
        ids[b] = it->second;
    }
    return ids;
}

inline void check_block_layout(const Mat &rho, int ell, int q, std::uint64_t alphabet) {
    if (rho.rows() != rho.cols() ||
        static_cast<std::size_t>(rho.rows()) != (std::size_t{1} << ell) * ipow(alphabet, q)) {
        throw std::invalid_argument("twirl: matrix does not match the (ell, q, N) layout");
    }
}

}  // namespace detail

/// E_f over uniform f: keeps |z><z'| iff type(z) = type(z'). Requires q < p.
inline Mat phase_twirl_exact(const Mat &rho, int q, std::uint64_t alphabet, std::uint64_t p, int ell = 0) {
    if (static_cast<std::uint64_t>(q) >= p) throw std::invalid_argument("phase_twirl_exact: requires q < p");
    detail::check_block_layout(rho, ell, q, alphabet);
    auto ids = detail::tuple_type_ids(alphabet, q);
    std::size_t blocks = ids.size();
    Mat out = rho;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        int tc = ids[static_cast<std::size_t>(c) % blocks];
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            if (ids[static_cast<std::size_t>(r) % blocks] != tc) out(r, c) = 0;
        }
    }
    return out;
}

enum class TwirlMode { exact, monte_carlo };

/// Exact E_pi over uniform pi in S_N. Each output entry is the average of the input over
/// all entries with the same side indices and the same equality pattern among the 2q
/// block values, which is the sum over injective relabelings weighted by 1/(N)_k.
inline Mat perm_twirl_exact(const Mat &rho, int q, std::uint64_t alphabet, int ell = 0, int max_distinct = 4) {
    if (alphabet > 64) throw std::invalid_argument("perm_twirl exact mode requires N <= 64");
    detail::check_block_layout(rho, ell, q, alphabet);
    std::size_t blocks = ipow(alphabet, q);
    auto side = std::size_t{1} << ell;
    std::vector<Tuple> digits(blocks);
    for (std::size_t b = 0; b < blocks; ++b) digits[b] = tuple_digits(b, alphabet, q);

    auto pattern = [&](std::size_t br, std::size_t bc, int &distinct) {
        std::uint64_t code = 0;
        std::uint64_t labels[16];
        int k = 0;
        auto visit = [&](std::uint64_t v) {
            int lab = -1;
            for (int i = 0; i < k; ++i) {
                if (labels[i] == v) lab = i;
            }
            if (lab < 0) {
                labels[k] = v;
                lab = k++;
            }
            code = code * 16 + static_cast<std::uint64_t>(lab);
        };
        for (auto v : digits[br]) visit(v);
        for (auto v : digits[bc]) visit(v);
        distinct = k;
        return code;
    };
    if (2 * q > 16) throw std::invalid_argument("perm_twirl: too many blocks");

    struct Acc {
        cplx sum = 0;
        double weight = 0;
    };
    std::unordered_map<std::uint64_t, Acc> classes;
    auto key_of = [&](std::size_t r, std::size_t c, int &distinct) {
        std::uint64_t code = pattern(r % blocks, c % blocks, distinct);
        std::uint64_t sides = (r / blocks) * side + (c / blocks);
        return code * (side * side) + sides;
    };
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
        for (Eigen::Index r = 0; r < rho.rows(); ++r) {
            cplx v = rho(r, c);
            if (v == cplx(0.0)) continue;
            int k = 0;
            auto key = key_of(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k);
            if (k > max_distinct) {
                throw std::invalid_argument("perm_twirl exact mode: more than " + std::to_string(max_distinct) +
                                            " distinct values in a basis pair");
            }
            auto &a = classes[key];
            if (a.weight == 0) {
                double ff = 1;
                for (int i = 0; i < k; ++i) ff *= static_cast<double>(alphabet - static_cast<std::uint64_t>(i));
                a.weight = 1.0 / ff;
            }
            a.sum += v;
        }
    }
    Mat out = Mat::Zero(rho.rows(), rho.cols());
    if (classes.empty()) return out;
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
        for (Eigen::Index r = 0; r < rho.rows(); ++r) {
            int k = 0;
            auto it = classes.find(key_of(static_cast<std::size_t>(r), static_cast<std::size_t>(c), k));
            if (it != classes.end()) out(r, c) = it->second.sum * it->second.weight;
        }
    }
    return out;
}

/// Monte Carlo E_pi: average of rho conjugated by O_pi^{x q} over sampled permutations.
inline McMatrix perm_twirl_mc(const Mat &rho, int q, std::uint64_t alphabet, const McOptions &opt, int ell = 0) {
    detail::check_block_layout(rho, ell, q, alphabet);
    std::size_t blocks = ipow(alphabet, q);
    return mc_accumulate(rho.rows(), rho.cols(), opt, [&](Rng &rng, Mat &acc) {
        auto pi = PermBackend::random(alphabet, rng);
        std::vector<Eigen::Index> map(static_cast<std::size_t>(rho.rows()));
        for (std::size_t r = 0; r < map.size(); ++r) {
            Tuple v = tuple_digits(r % blocks, alphabet, q);
            for (auto &x : v) x = pi(x);
            map[r] = static_cast<Eigen::Index>((r / blocks) * blocks + tuple_index(v, alphabet));
        }
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            for (Eigen::Index r = 0; r < rho.rows(); ++r) acc(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)]) += rho(r, c);
        }
    });
}

/// |+^m> appended after each n-qubit query block.
inline Mat plus_append_map(int n, int m) {
    std::size_t aux = std::size_t{1} << m;
    Mat a = Mat::Zero(static_cast<Eigen::Index>((std::size_t{1} << n) * aux), Eigen::Index{1} << n);
    double amp = 1.0 / std::sqrt(static_cast<double>(aux));
    for (Eigen::Index x = 0; x < a.cols(); ++x) {
        for (std::size_t z = 0; z < aux; ++z) a(static_cast<Eigen::Index>(static_cast<std::size_t>(x) * aux + z), x) = amp;
    }
    return a;
}

/// E_{(f, pi)}[(I_ell x G^{x q}) rho (.)^dag], computed exactly as
/// append |+^m> -> phase twirl -> permutation twirl.
inline Mat g_twirl(const Mat &query, int n, int m, int q, std::uint64_t p, int ell = 0) {
    require_density_qubits(ell + q * (n + m));
    if (query.rows() != static_cast<Eigen::Index>(std::size_t{1} << (ell + q * n))) {
        throw std::invalid_argument("g_twirl: query does not match layout");
    }
    std::uint64_t alphabet = std::uint64_t{1} << (n + m);
    Mat appended = conjugate_query_blocks(query, plus_append_map(n, m), n, q, ell);
    return perm_twirl_exact(phase_twirl_exact(appended, q, alphabet, p, ell), q, alphabet, ell);
}

/// The same channel estimated by averaging over sampled explicit specs.
inline McMatrix g_twirl_mc(const Mat &query, int n, int m, int q, std::uint64_t p, const McOptions &opt, int ell = 0) {
    auto dim = static_cast<Eigen::Index>((std::size_t{1} << ell) * ipow(std::size_t{1} << (n + m), q));
    return mc_accumulate(dim, dim, opt, [&](Rng &rng, Mat &acc) {
        acc += pri_apply(PriSpec::random(n, m, p, rng), query, q, ell);
    });
}

}  // namespace prilab

#endif  // PRILAB_PRI_HPP

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

#ifndef PRILAB_SYMTYPES_HPP
#define PRILAB_SYMTYPES_HPP

#include <compare>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "prilab/qcore.hpp"

namespace prilab {

using Tuple = std::vector<std::uint64_t>;

/// Multiset over [N], stored as (index, count) pairs sorted by index.
struct TypeVector {
    std::uint64_t alphabet = 0;
    std::vector<std::pair<std::uint64_t, int>> counts;

    int size() const {
        int s = 0;
        for (const auto &[i, c] : counts) s += c;
        return s;
    }

    bool repetition_free() const {
        return std::all_of(counts.begin(), counts.end(), [](const auto &e) { return e.second == 1; });
    }

    bool disjoint_with(const TypeVector &o) const {
        std::size_t i = 0;
        std::size_t j = 0;
        while (i < counts.size() && j < o.counts.size()) {
            if (counts[i].first == o.counts[j].first) return false;
            if (counts[i].first < o.counts[j].first) {
                ++i;
            } else {
                ++j;
            }
        }
        return true;
    }

    /// The sorted tuple realizing this type.
    Tuple sorted_tuple() const {
        Tuple v;
        for (const auto &[i, c] : counts) v.insert(v.end(), static_cast<std::size_t>(c), i);
        return v;
    }

    auto operator<=>(const TypeVector &) const = default;
};

inline TypeVector type_of(const Tuple &v, std::uint64_t alphabet) {
    std::map<std::uint64_t, int> m;
    for (auto x : v) {
        if (x >= alphabet) throw std::invalid_argument("type_of: index outside alphabet");
        ++m[x];
    }
    TypeVector t;
    t.alphabet = alphabet;
    t.counts.assign(m.begin(), m.end());
    return t;
}

inline TypeVector make_type(std::uint64_t alphabet, const std::vector<std::pair<std::uint64_t, int>> &counts) {
    Tuple v;
    for (const auto &[i, c] : counts) {
        if (c < 1) throw std::invalid_argument("make_type: multiplicities must be positive");
        v.insert(v.end(), static_cast<std::size_t>(c), i);
    }
    return type_of(v, alphabet);
}

/// Big-endian mixed-radix index of a tuple over [N]: position 0 is most significant.
inline std::size_t tuple_index(const Tuple &v, std::uint64_t alphabet) {
    std::size_t idx = 0;
    for (auto x : v) idx = idx * alphabet + x;
    return idx;
}

inline Tuple tuple_digits(std::size_t index, std::uint64_t alphabet, int t) {
    Tuple v(static_cast<std::size_t>(t));
    for (int i = t - 1; i >= 0; --i) {
        v[static_cast<std::size_t>(i)] = index % alphabet;
        index /= alphabet;
    }
    return v;
}

/// Every distinct tuple of the given type, in lexicographic order.
inline std::vector<Tuple> tuples_of_type(const TypeVector &T) {
    std::vector<Tuple> out;
    Tuple v = T.sorted_tuple();
    do {
        out.push_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

inline double factorial(int k) {
    double f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

inline double binomial(double n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// sqrt(prod freq! / t!), the amplitude on each tuple of the type.
inline double type_amplitude(const TypeVector &T) {
    double num = 1;
    for (const auto &[i, c] : T.counts) num *= factorial(c);
    return std::sqrt(num / factorial(T.size()));
}

inline void require_tuple_space(std::uint64_t alphabet, int t, bool density) {
    int qubits = 0;
    while ((std::uint64_t{1} << qubits) < alphabet) ++qubits;
    if (density) {
        require_density_qubits(qubits * t);
    } else {
        require_pure_qubits(qubits * t);
    }
}

/// |type_T> over ([N])^t.
inline Vec type_state(const TypeVector &T) {
    int t = T.size();
    require_tuple_space(T.alphabet, t, false);
    Vec v = Vec::Zero(static_cast<Eigen::Index>(ipow(T.alphabet, t)));
    double a = type_amplitude(T);
    for (const auto &tuple : tuples_of_type(T)) v(static_cast<Eigen::Index>(tuple_index(tuple, T.alphabet))) = a;
    return v;
}

/// Calls fn(T) for every size-t type over [N], in lexicographic order of sorted tuples.
inline void for_each_type(std::uint64_t alphabet, int t, const std::function<void(const TypeVector &)> &fn) {
    Tuple v(static_cast<std::size_t>(t), 0);
    std::function<void(int, std::uint64_t)> rec = [&](int pos, std::uint64_t lo) {
        if (pos == t) {
            fn(type_of(v, alphabet));
            return;
        }
        for (std::uint64_t x = lo; x < alphabet; ++x) {
            v[static_cast<std::size_t>(pos)] = x;
            rec(pos + 1, x);
        }
    };
    rec(0, 0);
}

inline std::vector<TypeVector> all_types(std::uint64_t alphabet, int t) {
    std::vector<TypeVector> out;
    for_each_type(alphabet, t, [&](const TypeVector &T) { out.push_back(T); });
    return out;
}

/// Projector onto the symmetric subspace of (C^N)^{x t}, built as a sum of type projectors.
inline Mat sym_projector(std::uint64_t alphabet, int t) {
    require_tuple_space(alphabet, t, true);
    auto dim = static_cast<Eigen::Index>(ipow(alphabet, t));
    Mat P = Mat::Zero(dim, dim);
    for_each_type(alphabet, t, [&](const TypeVector &T) {
        auto tuples = tuples_of_type(T);
        double w = 1.0 / static_cast<double>(tuples.size());
        for (const auto &a : tuples) {
            auto r = static_cast<Eigen::Index>(tuple_index(a, alphabet));
            for (const auto &b : tuples) P(r, static_cast<Eigen::Index>(tuple_index(b, alphabet))) = w;
        }
    });
    return P;
}

/// Element of S_t. map[i] is the image of position i.
struct Perm {
    std::vector<int> map;

    static Perm identity(int t) {
        Perm p;
        p.map.resize(static_cast<std::size_t>(t));
        std::iota(p.map.begin(), p.map.end(), 0);
        return p;
    }

    int degree() const { return static_cast<int>(map.size()); }

    bool valid() const {
        std::vector<int> s = map;
        std::sort(s.begin(), s.end());
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != static_cast<int>(i)) return false;
        }
        return true;
    }

    /// (this * o)(i) = this(o(i)).
    Perm compose(const Perm &o) const {
        Perm r;
        r.map.resize(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) r.map[i] = map[static_cast<std::size_t>(o.map[i])];
        return r;
    }

    Perm inverse() const {
        Perm r;
        r.map.resize(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) r.map[static_cast<std::size_t>(map[i])] = static_cast<int>(i);
        return r;
    }

    /// sigma(x): the entry at position i moves to position sigma(i).
    Tuple apply(const Tuple &x) const {
        Tuple y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[static_cast<std::size_t>(map[i])] = x[i];
        return y;
    }

    static std::vector<Perm> all(int t) {
        std::vector<Perm> out;
        Perm p = identity(t);
        do {
            out.push_back(p);
        } while (std::next_permutation(p.map.begin(), p.map.end()));
        return out;
    }
};

/// P_sigma = sum_x |sigma(x)><x| on ([N])^t.
inline Mat permutation_operator(const Perm &sigma, std::uint64_t alphabet) {
    if (!sigma.valid()) throw std::invalid_argument("permutation_operator: not a bijection");
    int t = sigma.degree();
    require_tuple_space(alphabet, t, true);
    std::size_t dim = ipow(alphabet, t);
    Mat P = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t x = 0; x < dim; ++x) {
        auto y = tuple_index(sigma.apply(tuple_digits(x, alphabet, t)), alphabet);
        P(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = 1.0;
    }
    return P;
}

/// Moves register i of a ([reg_dim])^k matrix to position sigma(i).
inline Mat permute_registers(const Mat &rho, std::uint64_t reg_dim, const Perm &sigma) {
    int k = sigma.degree();
    std::size_t dim = ipow(reg_dim, k);
    if (static_cast<std::size_t>(rho.rows()) != dim || rho.cols() != rho.rows()) {
        throw std::invalid_argument("permute_registers: matrix does not match register layout");
    }
    std::vector<Eigen::Index> map(dim);
    for (std::size_t x = 0; x < dim; ++x) {
        map[x] = static_cast<Eigen::Index>(tuple_index(sigma.apply(tuple_digits(x, reg_dim, k)), reg_dim));
    }
    Mat out(rho.rows(), rho.cols());
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
        for (Eigen::Index r = 0; r < rho.rows(); ++r) out(map[static_cast<std::size_t>(r)], map[static_cast<std::size_t>(c)]) = rho(r, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Type families

enum class TypeFamily { uniform, distinct, unique };

inline std::string to_string(TypeFamily f) {
    switch (f) {
        case TypeFamily::uniform:
            return "uniform";
        case TypeFamily::distinct:
            return "distinct";
        case TypeFamily::unique:
            return "unique";
    }
    return "?";
}

inline TypeFamily type_family_from_string(const std::string &s) {
    if (s == "uniform") return TypeFamily::uniform;
    if (s == "distinct") return TypeFamily::distinct;
    if (s == "unique") return TypeFamily::unique;
    throw std::invalid_argument("unknown type family: " + s);
}

/// Uniformly random k-subset of [0, n), sorted (Floyd's algorithm).
inline std::vector<std::uint64_t> sample_subset(std::uint64_t n, std::uint64_t k, Rng &rng) {
    std::set<std::uint64_t> chosen;
    for (std::uint64_t j = n - k; j < n; ++j) {
        std::uint64_t r = uniform_below(rng, j + 1);
        if (!chosen.insert(r).second) chosen.insert(j);
    }
    return {chosen.begin(), chosen.end()};
}

/// Uniform over size-t types (not over tuples), via stars and bars.
inline TypeVector sample_uniform_type(std::uint64_t alphabet, int t, Rng &rng) {
    auto stars = sample_subset(alphabet + static_cast<std::uint64_t>(t) - 1, static_cast<std::uint64_t>(t), rng);
    Tuple v;
    for (std::size_t k = 0; k < stars.size(); ++k) v.push_back(stars[k] - k);
    return type_of(v, alphabet);
}

inline bool pairwise_disjoint(const std::vector<TypeVector> &family) {
    for (std::size_t i = 0; i < family.size(); ++i) {
        for (std::size_t j = i + 1; j < family.size(); ++j) {
            if (!family[i].disjoint_with(family[j])) return false;
        }
    }
    return true;
}

inline bool in_family(const std::vector<TypeVector> &family, TypeFamily f) {
    switch (f) {
        case TypeFamily::uniform:
            return true;
        case TypeFamily::distinct:
            return pairwise_disjoint(family);
        case TypeFamily::unique:
            return pairwise_disjoint(family) &&
                   std::all_of(family.begin(), family.end(), [](const TypeVector &T) { return T.repetition_free(); });
    }
    return false;
}

inline std::vector<TypeVector> sample_type_family(TypeFamily f, std::uint64_t alphabet, int s, int t, Rng &rng) {
    if (s < 1 || t < 1) throw std::invalid_argument("sample_type_family: s and t must be positive");
    auto st = static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(t);
    // Disjoint types need s distinct symbols; repetition-free ones need s*t.
    if (f == TypeFamily::unique && st > alphabet) {
        throw std::invalid_argument("sample_type_family: s*t exceeds the alphabet");
    }
    if (f == TypeFamily::distinct && static_cast<std::uint64_t>(s) > alphabet) {
        throw std::invalid_argument("sample_type_family: s exceeds the alphabet");
    }
    std::vector<TypeVector> out;
    if (f == TypeFamily::unique) {
        auto pick = sample_subset(alphabet, st, rng);
        std::shuffle(pick.begin(), pick.end(), rng);
        for (int i = 0; i < s; ++i) {
            Tuple block(pick.begin() + i * t, pick.begin() + (i + 1) * t);
            out.push_back(type_of(block, alphabet));
        }
        return out;
    }
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        out.clear();
        for (int i = 0; i < s; ++i) out.push_back(sample_uniform_type(alphabet, t, rng));
        if (f == TypeFamily::uniform || pairwise_disjoint(out)) return out;
    }
    throw std::invalid_argument("sample_type_family: rejection sampling did not converge");
}

/// Number of s-tuples of mutually disjoint repetition-free size-t types.
inline double unique_family_count(std::uint64_t alphabet, int s, int t) {
    double c = 1;
    auto st = static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(t);
    if (st > alphabet) return 0;
    for (std::uint64_t i = 0; i < st; ++i) c *= static_cast<double>(alphabet - i);
    return c / std::pow(factorial(t), s);
}

/// Tensor product of type projectors of a family, over ([N])^{s t}.
inline Mat family_projector(const std::vector<TypeVector> &family) {
    Mat out = Mat::Ones(1, 1);
    for (const auto &T : family) {
        Vec v = type_state(T);
        out = kron(out, Mat(v * v.adjoint()));
    }
    return out;
}

/// Uniform mixture over the unique family of the product of type projectors, on
/// s*t registers of nm qubits. Exact when the family has at most 1e5 members,
/// otherwise a sampled mixture of `samples` members.
inline Mat rho_uni(int nm, int s, int t, int samples = 20000, std::uint64_t seed = 0) {
    if (nm < 0 || s < 1 || t < 1) throw std::invalid_argument("rho_uni: bad parameters");
    require_density_qubits(nm * s * t);
    std::uint64_t alphabet = std::uint64_t{1} << nm;
    double count = unique_family_count(alphabet, s, t);
    if (count < 1) throw std::invalid_argument("rho_uni: s*t exceeds the alphabet");
    auto dim = static_cast<Eigen::Index>(ipow(alphabet, s * t));
    Mat rho = Mat::Zero(dim, dim);
    if (count > 1e5) {
        Rng rng = substream(seed, 0x52484F55ULL);
        for (int k = 0; k < samples; ++k) rho += family_projector(sample_type_family(TypeFamily::unique, alphabet, s, t, rng));
        return rho / static_cast<double>(samples);
    }
    // Entry (x, y) is nonzero iff x has st distinct entries and y permutes x within each block.
    double w = 1.0 / (count * std::pow(factorial(t), s));
    auto block_perms = Perm::all(t);
    int st = s * t;
    Tuple x(static_cast<std::size_t>(st));
    std::vector<bool> used(alphabet, false);
    std::function<void(int)> rec = [&](int pos) {
        if (pos == st) {
            auto r = static_cast<Eigen::Index>(tuple_index(x, alphabet));
            std::vector<std::size_t> choice(static_cast<std::size_t>(s), 0);
            while (true) {
                Tuple y(x.size());
                for (int b = 0; b < s; ++b) {
                    Tuple blk(x.begin() + b * t, x.begin() + (b + 1) * t);
                    Tuple moved = block_perms[choice[static_cast<std::size_t>(b)]].apply(blk);
                    std::copy(moved.begin(), moved.end(), y.begin() + b * t);
                }
                rho(r, static_cast<Eigen::Index>(tuple_index(y, alphabet))) = w;
                int b = 0;
                while (b < s && ++choice[static_cast<std::size_t>(b)] == block_perms.size()) {
                    choice[static_cast<std::size_t>(b)] = 0;
                    ++b;
                }
                if (b == s) break;
            }
            return;
        }
        for (std::uint64_t v = 0; v < alphabet; ++v) {
            if (used[v]) continue;
            used[v] = true;
            x[static_cast<std::size_t>(pos)] = v;
            rec(pos + 1);
            used[v] = false;
        }
    };
    rec(0);
    return rho;
}

/// Fraction of uniform size-t types over (ell + k)-bit strings whose tuple has a
/// repeated ell-bit prefix or a repeated k-bit suffix.
inline double halves_collision_rate(int ell, int k, int t, int samples, Rng &rng) {
    std::uint64_t alphabet = std::uint64_t{1} << (ell + k);
    std::uint64_t low_mask = (std::uint64_t{1} << k) - 1;
    int bad = 0;
    for (int i = 0; i < samples; ++i) {
        Tuple v = sample_uniform_type(alphabet, t, rng).sorted_tuple();
        std::set<std::uint64_t> hi;
        std::set<std::uint64_t> lo;
        for (auto x : v) {
            hi.insert(x >> k);
            lo.insert(x & low_mask);
        }
        if (hi.size() < v.size() || lo.size() < v.size()) ++bad;
    }
    return static_cast<double>(bad) / samples;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const TypeVector &T) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto &[i, c] : T.counts) a.push_back({{"index", i}, {"count", c}});
    return a;
}

inline TypeVector type_from_json(const nlohmann::json &j, std::uint64_t alphabet) {
    std::vector<std::pair<std::uint64_t, int>> counts;
    for (const auto &e : j) counts.emplace_back(e.at("index").get<std::uint64_t>(), e.at("count").get<int>());
    return make_type(alphabet, counts);
}

inline nlohmann::json to_json(const std::vector<TypeVector> &family) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto &T : family) a.push_back(to_json(T));
    return a;
}

inline std::vector<TypeVector> family_from_json(const nlohmann::json &j, std::uint64_t alphabet) {
    std::vector<TypeVector> out;
    for (const auto &e : j) out.push_back(type_from_json(e, alphabet));
    return out;
}

}  // namespace prilab

#endif  // PRILAB_SYMTYPES_HPP

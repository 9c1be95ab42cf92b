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

#ifndef PRILAB_APPS_HPP
#define PRILAB_APPS_HPP

#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

#include "prilab/haar.hpp"
#include "prilab/pri.hpp"
#include "prilab/qcore.hpp"
#include "prilab/symtypes.hpp"

namespace prilab {

// ---------------------------------------------------------------------------
// MAC

enum class SignerMode { haar, pri };

inline std::string to_string(SignerMode s) { return s == SignerMode::haar ? "haar" : "pri"; }

inline SignerMode signer_mode_from_string(const std::string &s) {
    if (s == "haar") return SignerMode::haar;
    if (s == "pri") return SignerMode::pri;
    throw std::out_of_range("unknown signer mode: " + s);
}

/// Sign is an n -> n+m isometry; Ver is the inverse channel of a unitary dilation W
/// with W(|x>|0^m>) = Sign|x>. The Haar signer uses its full unitary as W.
struct MacScheme {
    int n = 1;
    int m = 1;
    Mat dilation;

    static MacScheme haar(int n, int m, Rng &rng) {
        require_pure_qubits(n + m);
        MacScheme s;
        s.n = n;
        s.m = m;
        s.dilation = sample_haar_unitary(std::size_t{1} << (n + m), rng);
        return s;
    }

    static MacScheme pri(const PriSpec &spec) {
        MacScheme s;
        s.n = spec.n;
        s.m = spec.m;
        s.dilation = pri_dilation(spec);
        return s;
    }

    std::size_t msg_dim() const { return std::size_t{1} << n; }
    std::size_t tag_dim() const { return std::size_t{1} << (n + m); }

    Vec sign(const Vec &msg) const {
        if (static_cast<std::size_t>(msg.size()) != msg_dim()) throw std::invalid_argument("mac_sign: message has wrong dimension");
        Vec tag = Vec::Zero(static_cast<Eigen::Index>(tag_dim()));
        for (Eigen::Index x = 0; x < msg.size(); ++x) tag += msg(x) * dilation.col(x << m);
        return tag;
    }

    /// Ver on a pure tag: Tr_Aux of (W^dag phi)(W^dag phi)^dag.
    Mat verify(const Vec &tag) const {
        if (static_cast<std::size_t>(tag.size()) != tag_dim()) throw std::invalid_argument("mac_verify: tag has wrong dimension");
        Vec y = dilation.adjoint() * tag;
        using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
        Eigen::Map<const RowMat> Y(y.data(), static_cast<Eigen::Index>(msg_dim()), Eigen::Index{1} << m);
        return Y * Y.adjoint();
    }

    Mat verify(const Mat &tag) const {
        if (static_cast<std::size_t>(tag.rows()) != tag_dim() || tag.cols() != tag.rows()) {
            throw std::invalid_argument("mac_verify: tag has wrong dimension");
        }
        return IsometryInverseChannel::from_unitary(dilation, n, m).apply(tag);
    }
};

inline Vec mac_sign(const MacScheme &s, const Vec &msg) { return s.sign(msg); }
inline Mat mac_verify(const MacScheme &s, const Mat &tag) { return s.verify(tag); }

enum class GameVariant { perm_test, many_copies, uncompute };

inline std::string to_string(GameVariant g) {
    switch (g) {
        case GameVariant::perm_test:
            return "perm-test";
        case GameVariant::many_copies:
            return "many-copies";
        case GameVariant::uncompute:
            return "uncompute";
    }
    return "?";
}

inline GameVariant game_variant_from_string(std::string s) {
    std::replace(s.begin(), s.end(), '_', '-');
    if (s == "perm-test") return GameVariant::perm_test;
    if (s == "many-copies") return GameVariant::many_copies;
    if (s == "uncompute") return GameVariant::uncompute;
    throw std::out_of_range("unknown game: " + s);
}

/// Built-in forgers. random: tag uniform in the orthogonal complement of the queried tags.
/// replay: the first queried tag. projected: a signature under a guessed fresh key,
/// projected off the queried tags. honest: a queried (message, tag) pair, as a control.
enum class Adversary { random, replay, projected, honest };

inline std::string to_string(Adversary a) {
    switch (a) {
        case Adversary::random:
            return "random";
        case Adversary::replay:
            return "replay";
        case Adversary::projected:
            return "projected";
        case Adversary::honest:
            return "honest";
    }
    return "?";
}

inline Adversary adversary_from_string(const std::string &s) {
    if (s == "random") return Adversary::random;
    if (s == "replay") return Adversary::replay;
    if (s == "projected") return Adversary::projected;
    if (s == "honest") return Adversary::honest;
    throw std::out_of_range("unknown adversary: " + s);
}

struct GameConfig {
    GameVariant variant = GameVariant::perm_test;
    int n = 4;
    int m = 1;
    int q = 1;
    int t = 3;
    int trials = 10000;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::uint64_t p = 0;
    SignerMode signer = SignerMode::haar;
    Adversary adversary = Adversary::random;
    bool transcripts = false;

    nlohmann::json to_json() const {
        return {{"variant", to_string(variant)},
                {"n", n},
                {"m", m},
                {"q", q},
                {"t", t},
                {"trials", trials},
                {"signer", to_string(signer)},
                {"adversary", to_string(adversary)},
                {"p", p}};
    }
};

/// Wilson score interval at z standard deviations.
inline std::pair<double, double> wilson_interval(int wins, int trials, double z = 1.96) {
    if (trials <= 0) return {0.0, 1.0};
    double nn = trials;
    double ph = wins / nn;
    double den = 1 + z * z / nn;
    double mid = (ph + z * z / (2 * nn)) / den;
    double half = z * std::sqrt(ph * (1 - ph) / nn + z * z / (4 * nn * nn)) / den;
    return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

struct TrialOutcome {
    bool discarded = false;
    bool win = false;
    double accept_prob = 0;  // exact acceptance probability of this trial's forgery
    double fidelity = 0;     // <psi*| Ver(phi*) |psi*>
    std::vector<int> outcomes;
};

struct GameResult {
    GameConfig config;
    int wins = 0;
    int played = 0;
    int discarded = 0;
    double win_rate = 0;
    double ci_lo = 0;
    double ci_hi = 1;
    double mean_accept = 0;
    double mean_accept_stderr = 0;
    double mean_fidelity = 0;
    double fidelity_expr = 0;
    std::string bound_expr;
    double bound_value = 0;
    std::vector<nlohmann::json> transcripts;

    /// Per-copy SWAP-test pass probability averaged over trials.
    double mean_swap_prob() const { return 0.5 * (1.0 + mean_fidelity); }

    /// Judged on the mean exact acceptance probability, which has the same expectation
    /// as the sampled win indicator and a smaller variance.
    bool verdict() const { return mean_accept <= bound_value + 3.0 * mean_accept_stderr; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["game"] = to_string(config.variant);
        j["config"] = config.to_json();
        j["seed"] = config.seed;
        j["wins"] = wins;
        j["played"] = played;
        j["discarded"] = discarded;
        j["win_rate"] = win_rate;
        j["wilson_95"] = {ci_lo, ci_hi};
        j["mean_accept_prob"] = mean_accept;
        j["mean_accept_prob_stderr"] = mean_accept_stderr;
        j["mean_fidelity"] = mean_fidelity;
        j["fidelity_expr_2m_over_N_minus_q"] = fidelity_expr;
        j["mean_swap_prob"] = mean_swap_prob();
        j["bound_expr"] = bound_expr;
        j["bound_value"] = bound_value;
        j["verdict"] = verdict() ? "pass" : "fail";
        return j;
    }
};

namespace detail {

/// Projects v off the columns of `span` (orthonormal) and renormalizes; returns the residual norm.
inline double project_off(Vec &v, const std::vector<Vec> &span) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto &u : span) v -= u * u.dot(v);
    }
    double r = v.norm();
    if (r > 0) v /= r;
    return r;
}

/// Unitary whose first column is psi.
inline Mat unitary_with_first_column(const Vec &psi, Rng &rng) {
    Mat a = ginibre(static_cast<std::size_t>(psi.size()), static_cast<std::size_t>(psi.size()), rng);
    a.col(0) = psi;
    Eigen::HouseholderQR<Mat> qr(a);
    Mat qm = qr.householderQ() * Mat::Identity(a.rows(), a.cols());
    // Q's first column is psi up to a phase.
    cplx ph = qm.col(0).dot(psi);
    qm.col(0) *= ph / std::abs(ph);
    return qm;
}

inline TrialOutcome play_trial(const GameConfig &c, std::uint64_t trial) {
    Rng rng = substream(c.seed, trial);
    TrialOutcome out;
    std::uint64_t p = c.p ? c.p : default_modulus(c.q);
    MacScheme key = c.signer == SignerMode::haar ? MacScheme::haar(c.n, c.m, rng)
                                                  : MacScheme::pri(PriSpec::random(c.n, c.m, p, rng));
    std::size_t d = key.msg_dim();
    std::vector<Vec> msgs;
    std::vector<Vec> tags;
    for (int i = 0; i < c.q; ++i) {
        Vec v = sample_haar_state(d, rng);
        if (project_off(v, msgs) < 1e-6) {
            out.discarded = true;
            return out;
        }
        msgs.push_back(v);
        tags.push_back(key.sign(v));
    }
    Vec psi;
    Vec phi;
    if (c.adversary == Adversary::honest) {
        psi = msgs.at(0);
        phi = tags.at(0);
    } else {
        psi = sample_haar_state(d, rng);
        if (project_off(psi, msgs) < 1e-6) {
            out.discarded = true;
            return out;
        }
        for (const auto &u : msgs) {
            if (std::abs(u.dot(psi)) > 1e-8) throw std::logic_error("forgery message not orthogonal to queries");
        }
        switch (c.adversary) {
            case Adversary::random:
                phi = sample_haar_state(key.tag_dim(), rng);
                break;
            case Adversary::replay:
                phi = tags.at(0);
                break;
            case Adversary::projected: {
                MacScheme guess = c.signer == SignerMode::haar ? MacScheme::haar(c.n, c.m, rng)
                                                                : MacScheme::pri(PriSpec::random(c.n, c.m, p, rng));
                phi = guess.sign(psi);
                break;
            }
            case Adversary::honest:
                break;
        }
        if (c.adversary != Adversary::replay && project_off(phi, tags) < 1e-6) {
            out.discarded = true;
            return out;
        }
    }
    Mat rho = key.verify(phi);
    out.fidelity = std::clamp(psi.dot(rho * psi).real(), 0.0, 1.0);
    switch (c.variant) {
        case GameVariant::perm_test: {
            Mat pp = psi * psi.adjoint();
            std::vector<Mat> regs(static_cast<std::size_t>(c.t), pp);
            regs.push_back(rho);
            out.accept_prob = std::clamp(permutation_test_prob_product(regs), 0.0, 1.0);
            out.outcomes.push_back(uniform01(rng) < out.accept_prob ? 1 : 0);
            out.win = out.outcomes.back() == 1;
            break;
        }
        case GameVariant::many_copies: {
            // The forger hands over t copies of its tag; each is verified and SWAP-tested against psi*.
            double pass = swap_test_prob(rho, psi * psi.adjoint());
            out.accept_prob = std::pow(pass, c.t);
            out.win = true;
            for (int i = 0; i < c.t; ++i) {
                out.outcomes.push_back(uniform01(rng) < pass ? 1 : 0);
                out.win = out.win && out.outcomes.back() == 1;
            }
            break;
        }
        case GameVariant::uncompute: {
            Mat circ = unitary_with_first_column(psi, rng);
            out.accept_prob = std::clamp((circ.adjoint() * rho * circ)(0, 0).real(), 0.0, 1.0);
            out.outcomes.push_back(uniform01(rng) < out.accept_prob ? 1 : 0);
            out.win = out.outcomes.back() == 1;
            break;
        }
    }
    return out;
}

}  // namespace detail

/// Plays `trials` independent games (fresh key per trial). Trial k draws from substream k,
/// so results do not depend on the worker count.
inline GameResult play_game(const GameConfig &c) {
    if (c.n < 1 || c.m < 0 || c.t < 1 || c.trials < 1) throw std::invalid_argument("game: bad dimensions");
    if (c.q < 1 || static_cast<std::uint64_t>(c.q) > (std::uint64_t{1} << c.n) - 1) {
        throw std::invalid_argument("game: need 1 <= q <= 2^n - 1");
    }
    require_pure_qubits(c.n + c.m);
    std::vector<TrialOutcome> res(static_cast<std::size_t>(c.trials));
    auto run = [&](int w, int stride) {
        for (int k = w; k < c.trials; k += stride) res[static_cast<std::size_t>(k)] = detail::play_trial(c, static_cast<std::uint64_t>(k));
    };
    int jobs = std::max(1, std::min(c.jobs, c.trials));
    if (jobs == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(run, w, jobs);
        for (auto &th : pool) th.join();
    }
    GameResult g;
    g.config = c;
    double sum = 0;
    double sum2 = 0;
    double fsum = 0;
    for (std::size_t k = 0; k < res.size(); ++k) {
        const auto &r = res[k];
        if (c.transcripts) {
            nlohmann::json tj = {{"trial", k},
                                 {"forgery_kind", to_string(c.adversary)},
                                 {"test_outcomes", r.outcomes},
                                 {"win", r.win}};
            if (r.discarded) tj["discarded"] = true;
            g.transcripts.push_back(tj);
        }
        if (r.discarded) {
            ++g.discarded;
            continue;
        }
        ++g.played;
        g.wins += r.win ? 1 : 0;
        sum += r.accept_prob;
        sum2 += r.accept_prob * r.accept_prob;
        fsum += r.fidelity;
    }
    if (g.played > 0) {
        double np = g.played;
        g.win_rate = g.wins / np;
        g.mean_accept = sum / np;
        g.mean_accept_stderr = g.played > 1 ? std::sqrt(std::max(0.0, (sum2 / np - g.mean_accept * g.mean_accept) / (np - 1))) : 0.0;
        g.mean_fidelity = fsum / np;
    }
    std::tie(g.ci_lo, g.ci_hi) = wilson_interval(g.wins, g.played);
    g.fidelity_expr = std::ldexp(1.0, c.m) / (std::ldexp(1.0, c.n + c.m) - c.q);
    switch (c.variant) {
        case GameVariant::perm_test:
            g.bound_expr = "1/(t+1) + t/(t+1) * 2^m/(2^(n+m)-q)";
            g.bound_value = (1.0 + c.t * g.fidelity_expr) / (c.t + 1.0);
            break;
        case GameVariant::many_copies:
            g.bound_expr = "0.6^t";
            g.bound_value = std::pow(0.6, c.t);
            break;
        case GameVariant::uncompute:
            g.bound_expr = "2^m/(2^(n+m)-q)";
            g.bound_value = g.fidelity_expr;
            break;
    }
    if (c.adversary == Adversary::honest) {
        g.bound_expr = "1 (honest control)";
        g.bound_value = 1.0;
    }
    return g;
}

inline GameResult play_many_copies_game(GameConfig c) {
    c.variant = GameVariant::many_copies;
    return play_game(c);
}

inline GameResult play_perm_test_game(GameConfig c) {
    c.variant = GameVariant::perm_test;
    return play_game(c);
}

inline GameResult play_uncompute_game(GameConfig c) {
    c.variant = GameVariant::uncompute;
    return play_game(c);
}

// ---------------------------------------------------------------------------
// Multi-copy encryption

/// Toy classical wrap of a 64-bit PRI key: XOR with a splitmix64 stream keyed by
/// (secret, nonce). Not a cipher; it only stands in for the classical component.
inline std::uint64_t key_wrap(std::uint64_t secret, std::uint64_t nonce, std::uint64_t key) {
    return key ^ splitmix64(secret ^ splitmix64(nonce));
}

struct Ciphertext {
    std::uint64_t wrapped_key = 0;
    std::uint64_t nonce = 0;
    int copies = 1;
    Vec state;  // copies blocks of n+m qubits
};

struct EncScheme {
    int n = 1;
    int m = 3;
    std::uint64_t p = 4;
    std::uint64_t secret = 0;

    PriSpec spec_for(std::uint64_t pri_key) const { return PriSpec::keyed(n, m, p, pri_key); }

    /// Encrypts `copies` copies of msg under one fresh PRI key.
    Ciphertext encrypt(const Vec &msg, int copies, Rng &rng) const {
        if (msg.size() != (Eigen::Index{1} << n)) throw std::invalid_argument("enc: message has wrong dimension");
        require_pure_qubits(copies * (n + m));
        Ciphertext ct;
        ct.copies = copies;
        ct.nonce = rng();
        std::uint64_t pri_key = rng();
        ct.wrapped_key = key_wrap(secret, ct.nonce, pri_key);
        Vec one = pri_apply(spec_for(pri_key), msg);
        ct.state = Vec::Ones(1);
        for (int i = 0; i < copies; ++i) ct.state = kron(ct.state, one);
        return ct;
    }

    /// Undoes every block with the dilation; `ok` is false when any block leaves the
    /// range of the isometry (the symptom of a corrupted wrapped key).
    std::pair<Vec, bool> decrypt(const Ciphertext &ct) const {
        std::uint64_t pri_key = key_wrap(secret, ct.nonce, ct.wrapped_key);
        Mat wd = pri_dilation(spec_for(pri_key)).adjoint();
        std::size_t block = std::size_t{1} << (n + m);
        Vec v = ct.state;
        for (int j = 0; j < ct.copies; ++j) {
            v = apply_local(v, wd, ipow(block, j), ipow(block, ct.copies - 1 - j));
        }
        // Keep only components with |0^m> in every block's aux register.
        std::size_t in = std::size_t{1} << n;
        Vec out = Vec::Zero(static_cast<Eigen::Index>(ipow(in, ct.copies)));
        for (Eigen::Index k = 0; k < out.size(); ++k) {
            std::size_t src = 0;
            auto rest = static_cast<std::size_t>(k);
            for (int j = ct.copies - 1; j >= 0; --j) {
                std::size_t x = rest % in;
                rest /= in;
                src += (x << m) * ipow(block, ct.copies - 1 - j);
            }
            out(k) = v(static_cast<Eigen::Index>(src));
        }
        double kept = out.norm();
        bool ok = std::abs(kept - 1.0) <= kStructTol;
        if (kept > 0) out /= kept;
        return {out, ok};
    }
};

/// Key-averaged TD between t-copy encryptions of psi0 and psi1, next to each one's
/// distance to rho_uni(1, t) (the multi-copy hybrid step).
struct EncHybridResult {
    double td_messages = 0;
    double td_psi0_uni = 0;
    double td_psi1_uni = 0;
    double bound_expr = 0;

    nlohmann::json to_json() const {
        return {{"td_enc_psi0_vs_enc_psi1", td_messages},
                {"td_enc_psi0_vs_rho_uni", td_psi0_uni},
                {"td_enc_psi1_vs_rho_uni", td_psi1_uni},
                {"two_t2_over_2m", bound_expr}};
    }
};

inline EncHybridResult enc_multicopy_hybrid(int n, int m, int t, const Vec &psi0, const Vec &psi1, std::uint64_t p = 0) {
    if (!p) p = default_modulus(t);
    require_density_qubits(t * (n + m));
    auto copies = [&](const Vec &v) {
        Mat one = v * v.adjoint();
        Mat r = Mat::Ones(1, 1);
        for (int i = 0; i < t; ++i) r = kron(r, one);
        return r;
    };
    Mat a = g_twirl(copies(psi0), n, m, t, p);
    Mat b = g_twirl(copies(psi1), n, m, t, p);
    Mat uni = rho_uni(n + m, 1, t);
    EncHybridResult r;
    r.td_messages = trace_distance(a, b);
    r.td_psi0_uni = trace_distance(a, uni);
    r.td_psi1_uni = trace_distance(b, uni);
    r.bound_expr = 2.0 * t * t / std::ldexp(1.0, m);
    return r;
}

}  // namespace prilab

#endif  // PRILAB_APPS_HPP

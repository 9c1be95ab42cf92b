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

#ifndef PRILAB_VERIFY_HPP
#define PRILAB_VERIFY_HPP

#include <chrono>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "prilab/haar.hpp"
#include "prilab/pri.hpp"
#include "prilab/qcore.hpp"
#include "prilab/symtypes.hpp"

namespace prilab {

/// One measured quantity against a bound C * expr. The verdict is always recomputed.
struct ExperimentReport {
    std::string name;
    nlohmann::json config = nlohmann::json::object();
    double measured = 0;
    double stderr = 0;
    std::string bound_expr;
    double expr_value = 0;
    double fitted_C = 1;
    double bound_value = 0;
    std::uint64_t seed = 0;
    std::optional<double> runtime_ms;
    int samples = 0;
    nlohmann::json details = nlohmann::json::object();

    bool verdict() const { return measured <= bound_value + 3.0 * stderr; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["config"] = config;
        j["measured"] = measured;
        j["stderr"] = stderr;
        j["bound_expr"] = bound_expr;
        j["expr_value"] = expr_value;
        j["fitted_C"] = fitted_C;
        j["bound_value"] = bound_value;
        j["verdict"] = verdict() ? "pass" : "fail";
        j["seed"] = seed;
        j["runtime_ms"] = runtime_ms ? nlohmann::json(*runtime_ms) : nlohmann::json(nullptr);
        j["samples"] = samples;
        j["details"] = details;
        return j;
    }
};

/// Flat configuration shared by all experiments; each reads the fields it needs.
struct ExperimentConfig {
    int n = 1;
    int m = 2;
    int s = 1;
    int t = 2;
    int q = 2;
    int ell = 0;
    int nm = 3;
    std::uint64_t p = 0;  // 0 selects the default modulus
    int samples = 0;  // 0 selects the experiment's default
    int bootstrap = 200;
    int jobs = 1;
    std::uint64_t seed = 1;
    std::string input = "mc";     // haar_info: mc | exact
    std::string phi = "plus";     // multicopy_info: plus | zero | haar
    int phi_index = 0;            // which Haar state when phi = haar
    std::string types = "fixed";  // tdis_info / tuni_info: fixed | random
    std::string variant = "prfsg";

    int samples_or(int fallback) const { return samples > 0 ? samples : fallback; }

    McOptions mc(std::uint64_t stream, int default_samples = 4096) const {
        McOptions o;
        o.samples = samples_or(default_samples);
        o.bootstrap = bootstrap;
        o.jobs = jobs;
        o.seed = splitmix64(seed ^ stream);
        return o;
    }
};

/// Every field except `jobs`, which never changes a report.
inline nlohmann::json to_json(const ExperimentConfig &c) {
    return {{"n", c.n},
            {"m", c.m},
            {"s", c.s},
            {"t", c.t},
            {"q", c.q},
            {"ell", c.ell},
            {"nm", c.nm},
            {"p", c.p},
            {"samples", c.samples},
            {"bootstrap", c.bootstrap},
            {"seed", c.seed},
            {"input", c.input},
            {"phi", c.phi},
            {"phi_index", c.phi_index},
            {"types", c.types},
            {"variant", c.variant}};
}

/// Overlays the keys present in `j` on `base`.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json &j, ExperimentConfig base = {}) {
    auto take = [&](const char *key, auto &field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("n", base.n);
    take("m", base.m);
    take("s", base.s);
    take("t", base.t);
    take("q", base.q);
    take("ell", base.ell);
    take("nm", base.nm);
    take("p", base.p);
    take("samples", base.samples);
    take("bootstrap", base.bootstrap);
    take("seed", base.seed);
    take("input", base.input);
    take("phi", base.phi);
    take("phi_index", base.phi_index);
    take("types", base.types);
    take("variant", base.variant);
    return base;
}

/// Sweep over one parameter. C is fitted on the first (smallest) point and every point
/// must satisfy measured <= 2 C expr + 3 stderr.
struct SweepReport {
    std::string name;
    std::string vary;
    std::vector<ExperimentReport> points;
    double fitted_C = 0;
    double stability_ratio = 1;

    bool stable() const { return stability_ratio <= 2.0; }

    bool verdict() const {
        return std::all_of(points.begin(), points.end(), [](const ExperimentReport &r) { return r.verdict(); });
    }

    bool monotone_decreasing() const {
        for (std::size_t i = 1; i < points.size(); ++i) {
            if (!(points[i].measured < points[i - 1].measured)) return false;
        }
        return true;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["vary"] = vary;
        j["fitted_C"] = fitted_C;
        j["stability_ratio"] = std::isfinite(stability_ratio) ? nlohmann::json(stability_ratio) : nlohmann::json("inf");
        j["stable"] = stable();
        j["monotone_decreasing"] = monotone_decreasing();
        j["verdict"] = verdict() ? "pass" : "fail";
        j["points"] = nlohmann::json::array();
        for (const auto &p : points) j["points"].push_back(p.to_json());
        return j;
    }
};

inline double ratio_of_constants(double a, double b) {
    if (a == 0 && b == 0) return 1.0;
    if (a == 0 || b == 0) return std::numeric_limits<double>::infinity();
    return std::max(a, b) / std::min(a, b);
}

inline void fit_sweep(SweepReport &sw) {
    if (sw.points.empty()) return;
    const auto &first = sw.points.front();
    sw.fitted_C = first.expr_value > 0 ? first.measured / first.expr_value : 0.0;
    for (auto &p : sw.points) {
        p.fitted_C = sw.fitted_C;
        p.bound_value = 2.0 * sw.fitted_C * p.expr_value;
    }
    if (sw.points.size() >= 2) {
        const auto &a = sw.points[sw.points.size() - 2];
        const auto &b = sw.points.back();
        sw.stability_ratio = ratio_of_constants(a.measured / a.expr_value, b.measured / b.expr_value);
    }
}

namespace detail {

inline std::uint64_t modulus_for(const ExperimentConfig &c, int q) { return c.p ? c.p : default_modulus(q); }

inline void finish_single(ExperimentReport &r) {
    r.fitted_C = 1.0;
    r.bound_value = r.expr_value;
}

/// Registers i*2t .. i*2t+2t-1 hold copies of state i; moves the first t of each group
/// to the front (side register) and the last t behind all sides.
inline Perm split_halves_perm(int s, int t) {
    Perm p = Perm::identity(2 * s * t);
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < t; ++j) {
            p.map[static_cast<std::size_t>(i * 2 * t + j)] = i * t + j;
            p.map[static_cast<std::size_t>(i * 2 * t + t + j)] = s * t + i * t + j;
        }
    }
    return p;
}

inline Mat normalized_sym(std::uint64_t alphabet, int t) {
    Mat P = sym_projector(alphabet, t);
    return P / P.trace().real();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiments

/// Distinct-type queries through G: TD to rho_uni(s, t) is O(s t^2 / 2^m).
inline ExperimentReport run_tdis(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "tdis_info";
    std::uint64_t in_alpha = std::uint64_t{1} << c.n;
    int q = c.s * c.t;
    std::uint64_t p = detail::modulus_for(c, q);
    std::vector<TypeVector> family;
    if (c.types == "random") {
        Rng rng = substream(c.seed, 0x7D15ULL);
        family = sample_type_family(TypeFamily::distinct, in_alpha, c.s, c.t, rng);
    } else {
        // Each type is one symbol repeated t times: the collision-heaviest member of the family.
        if (static_cast<std::uint64_t>(c.s) > in_alpha) throw std::invalid_argument("tdis: s exceeds 2^n");
        for (int i = 0; i < c.s; ++i) family.push_back(make_type(in_alpha, {{static_cast<std::uint64_t>(i), c.t}}));
    }
    require_density_qubits(q * (c.n + c.m));
    Mat out = g_twirl(family_projector(family), c.n, c.m, q, p);
    r.measured = trace_distance(out, rho_uni(c.n + c.m, c.s, c.t));
    r.bound_expr = "s*t^2/2^m";
    r.expr_value = c.s * c.t * c.t / std::ldexp(1.0, c.m);
    r.config = {{"n", c.n}, {"m", c.m}, {"s", c.s}, {"t", c.t}, {"p", p}, {"types", to_json(family)}};
    detail::finish_single(r);
    return r;
}

/// Cross-type outer products are annihilated by the (f, pi) average.
inline ExperimentReport run_outer_zero(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "outer_comp_query";
    std::uint64_t p = detail::modulus_for(c, c.q);
    std::uint64_t in_alpha = std::uint64_t{1} << c.n;
    require_density_qubits(c.q * (c.n + c.m));
    std::size_t tuples = ipow(in_alpha, c.q);
    auto dim = static_cast<Eigen::Index>(tuples);
    double cross_max = 0;
    double control_min = std::numeric_limits<double>::infinity();
    int cross_pairs = 0;
    for (std::size_t a = 0; a < tuples; ++a) {
        TypeVector ta = type_of(tuple_digits(a, in_alpha, c.q), in_alpha);
        for (std::size_t b = 0; b < tuples; ++b) {
            TypeVector tb = type_of(tuple_digits(b, in_alpha, c.q), in_alpha);
            Mat in = Mat::Zero(dim, dim);
            in(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1.0;
            double mx = g_twirl(in, c.n, c.m, c.q, p).cwiseAbs().maxCoeff();
            if (ta == tb) {
                control_min = std::min(control_min, mx);
            } else {
                cross_max = std::max(cross_max, mx);
                ++cross_pairs;
            }
        }
    }
    double type_max = 0;
    auto types = all_types(in_alpha, c.q);
    for (const auto &T : types) {
        for (const auto &U : types) {
            if (T == U) continue;
            Mat in = type_state(T) * type_state(U).adjoint();
            type_max = std::max(type_max, g_twirl(in, c.n, c.m, c.q, p).cwiseAbs().maxCoeff());
        }
    }
    r.measured = std::max(cross_max, type_max);
    r.bound_expr = "0";
    r.expr_value = 0;
    r.fitted_C = 0;
    r.bound_value = 1e-12;
    r.config = {{"n", c.n}, {"m", c.m}, {"q", c.q}, {"p", p}};
    r.details = {{"cross_basis_pairs", cross_pairs},
                 {"cross_basis_max_abs", cross_max},
                 {"cross_type_state_max_abs", type_max},
                 {"equal_type_control_min_of_max_abs", control_min}};
    return r;
}

inline Vec multicopy_state(const ExperimentConfig &c) {
    std::size_t d = std::size_t{1} << c.n;
    if (c.phi == "plus") return PureState::plus(c.n).vec();
    if (c.phi == "zero") return PureState::basis(c.n, 0).vec();
    if (c.phi == "haar") {
        Rng rng = substream(c.seed, 0x9A17ULL + static_cast<std::uint64_t>(c.phi_index));
        return sample_haar_state(d, rng);
    }
    throw std::invalid_argument("multicopy: unknown input state " + c.phi);
}

/// q copies of one pure state through G: TD to rho_uni(1, q) is O(q^2 / 2^m).
inline ExperimentReport run_multicopy(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "multicopy_info";
    std::uint64_t p = detail::modulus_for(c, c.q);
    require_density_qubits(c.q * (c.n + c.m));
    Vec phi = multicopy_state(c);
    Mat one = phi * phi.adjoint();
    Mat in = Mat::Ones(1, 1);
    for (int i = 0; i < c.q; ++i) in = kron(in, one);
    r.measured = trace_distance(g_twirl(in, c.n, c.m, c.q, p), rho_uni(c.n + c.m, 1, c.q));
    r.bound_expr = "q^2/2^m";
    r.expr_value = c.q * c.q / std::ldexp(1.0, c.m);
    r.config = {{"n", c.n}, {"m", c.m}, {"q", c.q}, {"p", p}, {"phi", c.phi}};
    if (c.phi == "haar") r.config["phi_index"] = c.phi_index;
    r.seed = c.phi == "haar" ? c.seed : 0;
    detail::finish_single(r);
    return r;
}

/// Unique 2t-types with G on the second half of each: TD to sigma x rho_uni is O(s t^2 / 2^m).
inline ExperimentReport run_tuni_info(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "tuni_info";
    std::uint64_t in_alpha = std::uint64_t{1} << c.n;
    int q = c.s * c.t;
    int ell = q * c.n;
    std::uint64_t p = detail::modulus_for(c, q);
    require_density_qubits(ell + q * (c.n + c.m));
    std::vector<TypeVector> family;
    if (c.types == "random") {
        Rng rng = substream(c.seed, 0x7A11ULL);
        family = sample_type_family(TypeFamily::unique, in_alpha, c.s, 2 * c.t, rng);
    } else {
        if (static_cast<std::uint64_t>(2 * q) > in_alpha) throw std::invalid_argument("tuni_info: 2*s*t exceeds 2^n");
        for (int i = 0; i < c.s; ++i) {
            Tuple v;
            for (int j = 0; j < 2 * c.t; ++j) v.push_back(static_cast<std::uint64_t>(2 * c.t * i + j));
            family.push_back(type_of(v, in_alpha));
        }
    }
    Mat in = permute_registers(family_projector(family), in_alpha, detail::split_halves_perm(c.s, c.t));
    Mat out = g_twirl(in, c.n, c.m, q, p, ell);
    std::vector<int> keep(static_cast<std::size_t>(ell));
    std::iota(keep.begin(), keep.end(), 0);
    Mat sigma = partial_trace(in, ell + q * c.n, keep);
    Mat ref = kron(sigma, rho_uni(c.n + c.m, c.s, c.t));
    r.measured = trace_distance(out, ref);
    r.bound_expr = "s*t^2/2^m";
    r.expr_value = c.s * c.t * c.t / std::ldexp(1.0, c.m);
    r.config = {{"n", c.n}, {"m", c.m}, {"s", c.s}, {"t", c.t}, {"p", p}, {"types", to_json(family)}};
    r.details = {{"side_marginal_td", trace_distance(partial_trace(out, ell + q * (c.n + c.m), keep), sigma)}};
    detail::finish_single(r);
    return r;
}

/// i.i.d. Haar inputs, t copies kept and t copies through G:
/// TD to rho_uni(n; s, t) x rho_uni(n+m; s, t) is O(s^2 t^2 / 2^n + s t^2 / 2^m).
inline ExperimentReport run_haar_info(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "haar_info";
    std::uint64_t in_alpha = std::uint64_t{1} << c.n;
    int q = c.s * c.t;
    int ell = q * c.n;
    std::uint64_t p = detail::modulus_for(c, q);
    require_density_qubits(ell + q * (c.n + c.m));
    Perm split = detail::split_halves_perm(c.s, c.t);
    auto twirl = [&](const Mat &in) { return g_twirl(in, c.n, c.m, q, p, ell); };
    Mat ref = kron(rho_uni(c.n, c.s, c.t), rho_uni(c.n + c.m, c.s, c.t));

    // Exact hybrids: Haar average (symmetric projectors) and unique 2t-types.
    Mat sym2t = detail::normalized_sym(in_alpha, 2 * c.t);
    Mat haar_in = Mat::Ones(1, 1);
    for (int i = 0; i < c.s; ++i) haar_in = kron(haar_in, sym2t);
    Mat h1 = twirl(permute_registers(haar_in, in_alpha, split));
    Mat h2 = twirl(permute_registers(rho_uni(c.n, c.s, 2 * c.t), in_alpha, split));
    double td12 = trace_distance(h1, h2);
    double td23 = trace_distance(h2, ref);
    double td13 = trace_distance(h1, ref);

    if (c.input == "exact") {
        r.measured = td13;
        r.stderr = 0;
    } else if (c.input == "mc") {
        auto dim = static_cast<Eigen::Index>(ipow(in_alpha, 2 * q));
        McMatrix in = mc_accumulate(dim, dim, c.mc(0x4AA1ULL), [&](Rng &rng, Mat &acc) {
            std::vector<Vec> states;
            for (int i = 0; i < c.s; ++i) states.push_back(sample_haar_state(in_alpha, rng));
            Vec v = Vec::Ones(1);
            for (int half = 0; half < 2; ++half) {
                for (int i = 0; i < c.s; ++i) {
                    for (int j = 0; j < c.t; ++j) v = kron(v, states[static_cast<std::size_t>(i)]);
                }
            }
            acc.noalias() += v * v.adjoint();
        });
        TdEstimate est = estimate_td(in.map(twirl), ref, c.bootstrap, c.seed);
        r.measured = est.value;
        r.stderr = est.stderr;
        r.samples = c.samples_or(4096);
        r.seed = c.seed;
        r.details["bootstrap_sd"] = est.bootstrap_sd;
        r.details["split_half_error"] = est.split_half;
    } else {
        throw std::invalid_argument("haar_info: input must be mc or exact");
    }
    double term_n = c.s * c.s * c.t * c.t / std::ldexp(1.0, c.n);
    double term_m = c.s * c.t * c.t / std::ldexp(1.0, c.m);
    r.bound_expr = "s^2*t^2/2^n + s*t^2/2^m";
    r.expr_value = term_n + term_m;
    r.config = {{"n", c.n}, {"m", c.m}, {"s", c.s}, {"t", c.t}, {"p", p}, {"input", c.input}};
    r.details["term_s2t2_over_2n"] = term_n;
    r.details["term_st2_over_2m"] = term_m;
    r.details["C_first_term_only"] = r.measured / term_n;
    r.details["C_second_term_only"] = r.measured / term_m;
    r.details["hybrid_haar_vs_unique_types"] = td12;
    r.details["hybrid_unique_types_vs_reference"] = td23;
    r.details["exact_haar_vs_reference"] = td13;
    detail::finish_single(r);
    return r;
}

/// Deficit of sigma x rho_uni(nm; s, t) under I_ell x U^{x st}: O(s^2 t^2 / 2^nm).
/// The maximally mixed state of the same size is reported as a control.
inline ExperimentReport run_tuni_invar(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "tuni_invar";
    int q = c.s * c.t;
    TwirlLayout layout{c.ell, q, c.nm};
    require_density_qubits(layout.total_qubits());
    auto side = static_cast<Eigen::Index>(std::size_t{1} << c.ell);
    Mat rho = kron(Mat(Mat::Identity(side, side) / static_cast<double>(side)), rho_uni(c.nm, c.s, c.t));
    TdEstimate est = almost_invariance_deficit(rho, layout, c.mc(0x1A7ULL));
    auto dim = rho.rows();
    Mat mixed = Mat::Identity(dim, dim) / static_cast<double>(dim);
    TdEstimate ctl = almost_invariance_deficit(mixed, layout, c.mc(0xC0A7ULL));
    r.measured = est.value;
    r.stderr = est.stderr;
    r.samples = c.samples_or(4096);
    r.seed = c.seed;
    r.bound_expr = "s^2*t^2/2^nm";
    r.expr_value = c.s * c.s * c.t * c.t / std::ldexp(1.0, c.nm);
    r.config = {{"nm", c.nm}, {"s", c.s}, {"t", c.t}, {"ell", c.ell}};
    r.details = {{"bootstrap_sd", est.bootstrap_sd},
                 {"split_half_error", est.split_half},
                 {"control_deficit", ctl.value},
                 {"control_stderr", ctl.stderr},
                 {"control_within_noise", ctl.value <= 3.0 * ctl.stderr + kStructTol}};
    detail::finish_single(r);
    return r;
}

/// Exact TD between rho_uni(nm; s, t) and s-fold i.i.d. Haar t-copies.
inline ExperimentReport run_tuni_haar_dis(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "tuni_haar_dis";
    require_density_qubits(c.nm * c.s * c.t);
    std::uint64_t alpha = std::uint64_t{1} << c.nm;
    Mat sym = detail::normalized_sym(alpha, c.t);
    Mat hat = Mat::Ones(1, 1);
    for (int i = 0; i < c.s; ++i) hat = kron(hat, sym);
    r.measured = trace_distance(rho_uni(c.nm, c.s, c.t), hat);
    r.bound_expr = "s^2*t^2/2^nm";
    r.expr_value = c.s * c.s * c.t * c.t / std::ldexp(1.0, c.nm);
    r.config = {{"nm", c.nm}, {"s", c.s}, {"t", c.t}};
    detail::finish_single(r);
    return r;
}

/// s orthogonal Haar columns (t copies each) versus s i.i.d. Haar states: O(s^2 t / 2^n).
inline ExperimentReport run_haar_perp(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "haar_perp_to_iid";
    auto res = haar_orthogonal_columns_vs_iid(c.n, c.s, c.t, c.mc(0x9E59ULL, 65536));
    r.measured = res.td.value;
    r.stderr = res.td.stderr;
    r.samples = c.samples_or(65536);
    r.seed = c.seed;
    r.bound_expr = "s^2*t/2^n";
    r.expr_value = c.s * c.s * c.t / std::ldexp(1.0, c.n);
    r.config = {{"n", c.n}, {"s", c.s}, {"t", c.t}};
    r.details = {{"bootstrap_sd", res.td.bootstrap_sd}, {"split_half_error", res.td.split_half}};
    if (c.t == 1) {
        r.details["distinct_strings_td"] = res.td_distinct.value;
        r.details["distinct_strings_stderr"] = res.td_distinct.stderr;
        r.details["distinct_strings_expr"] = c.s * c.s / std::ldexp(1.0, c.n);
    }
    detail::finish_single(r);
    return r;
}

/// Type-state basis of the symmetric subspace. coords(g) gives |g>^{x t} in this basis:
/// entry T is sqrt(t!/prod f!) prod g_i^f_i.
struct SymBasis {
    std::vector<TypeVector> types;
    std::vector<double> scale;
    std::vector<Tuple> reps;
    std::vector<std::vector<Tuple>> members;

    SymBasis(std::uint64_t alphabet, int t) {
        types = all_types(alphabet, t);
        for (const auto &T : types) {
            scale.push_back(1.0 / type_amplitude(T));
            reps.push_back(T.sorted_tuple());
            members.push_back(tuples_of_type(T));
        }
    }

    Eigen::Index size() const { return static_cast<Eigen::Index>(types.size()); }

    Vec coords(const Vec &g) const {
        Vec out(size());
        for (std::size_t k = 0; k < types.size(); ++k) {
            cplx v = scale[k];
            for (const auto &[i, f] : types[k].counts) v *= std::pow(g(static_cast<Eigen::Index>(i)), f);
            out(static_cast<Eigen::Index>(k)) = v;
        }
        return out;
    }

    /// A^{x t} restricted to symmetric subspaces, from `in` coordinates to these.
    Mat power(const Mat &a, const SymBasis &in) const {
        Mat out(size(), in.size());
        for (std::size_t j = 0; j < in.types.size(); ++j) {
            double norm = 1.0 / in.scale[j];
            for (std::size_t k = 0; k < types.size(); ++k) {
                const Tuple &u = reps[k];
                cplx acc = 0;
                for (const auto &v : in.members[j]) {
                    cplx prod = 1;
                    for (std::size_t i = 0; i < u.size(); ++i) {
                        prod *= a(static_cast<Eigen::Index>(u[i]), static_cast<Eigen::Index>(v[i]));
                    }
                    acc += prod;
                }
                out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = scale[k] * norm * acc;
            }
        }
        return out;
    }
};

/// (I_n x I)^{x t} on t copies of a Haar 2n-qubit state versus t copies of a Haar
/// (2n+m)-qubit state: O(t! t^2 / 2^(n+m) + t^2 / 2^n).
inline ExperimentReport run_length_extension(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "length_extension";
    std::size_t d_in = std::size_t{1} << c.n;
    std::size_t d_out = std::size_t{1} << (c.n + c.m);
    std::uint64_t total = std::uint64_t{1} << (2 * c.n + c.m);
    require_pure_qubits((2 * c.n + c.m) * c.t);
    SymBasis basis(total, c.t);
    SymBasis in_basis(d_in * d_in, c.t);
    auto dim = basis.size();
    require_density_dim(static_cast<std::size_t>(dim));
    // The t-copy average of a Haar 2n-qubit input is the normalized symmetric projector,
    // so only the isometry is sampled: each draw adds S S^dag / dim_in with S the
    // symmetric power of I x V.
    double in_dim = static_cast<double>(in_basis.size());
    Mat eye_in = Mat::Identity(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(d_in));
    McOptions opt = c.mc(0x1E47ULL, 1024);
    McMatrix est = mc_accumulate(dim, dim, opt, [&](Rng &rng, Mat &acc) {
        Mat sv = basis.power(kron(eye_in, sample_haar_isometry(d_in, d_out, rng)), in_basis);
        acc.noalias() += sv * sv.adjoint() / in_dim;
    });
    Mat ref = Mat::Identity(dim, dim) / static_cast<double>(dim);
    TdEstimate td = estimate_td(est, ref, c.bootstrap, c.seed);
    r.measured = td.value;
    r.stderr = td.stderr;
    r.samples = c.samples_or(1024);
    r.seed = c.seed;
    double tf = factorial(c.t);
    r.bound_expr = "t!*t^2/2^(n+m) + t^2/2^n";
    r.expr_value = tf * c.t * c.t / std::ldexp(1.0, c.n + c.m) + c.t * c.t / std::ldexp(1.0, c.n);
    r.config = {{"n", c.n}, {"m", c.m}, {"t", c.t}};
    // Good types: t distinct left halves and t distinct right halves.
    double bad = 0;
    double all = 0;
    std::uint64_t mask = d_in - 1;
    for_each_type(std::uint64_t{1} << (2 * c.n), c.t, [&](const TypeVector &T) {
        std::set<std::uint64_t> hi;
        std::set<std::uint64_t> lo;
        for (auto x : T.sorted_tuple()) {
            hi.insert(x >> c.n);
            lo.insert(x & mask);
        }
        all += 1;
        if (hi.size() < static_cast<std::size_t>(c.t) || lo.size() < static_cast<std::size_t>(c.t)) bad += 1;
    });
    Rng rng = substream(c.seed, 0x600DULL);
    r.details = {{"bootstrap_sd", td.bootstrap_sd},
                 {"split_half_error", td.split_half},
                 {"bad_type_fraction_exact", bad / all},
                 {"bad_type_fraction_sampled", halves_collision_rate(c.n, c.n, c.t, 20000, rng)},
                 {"bad_type_expr", 2.0 * c.t * c.t / std::ldexp(1.0, c.n)}};
    detail::finish_single(r);
    return r;
}

/// PRI as a state generator. Variant prfsg: q distinct classical inputs, t copies each,
/// versus i.i.d. Haar states. Variant prsg: t copies of G|0^n>. Variant composition:
/// an inner PRI from 1 qubit to n qubits feeding the outer PRI, with its hybrid chain.
inline ExperimentReport run_prsg_from_pri(const ExperimentConfig &c) {
    ExperimentReport r;
    r.name = "pri_implies_prsg";
    std::uint64_t N = std::uint64_t{1} << (c.n + c.m);
    std::uint64_t in_alpha = std::uint64_t{1} << c.n;
    Mat haar_t = detail::normalized_sym(N, c.t);
    r.config = {{"n", c.n}, {"m", c.m}, {"t", c.t}, {"variant", c.variant}};
    if (c.variant == "prsg" || c.variant == "composition") {
        std::uint64_t p = detail::modulus_for(c, c.t);
        r.config["p"] = p;
        Mat zero = Mat::Zero(static_cast<Eigen::Index>(ipow(in_alpha, c.t)), static_cast<Eigen::Index>(ipow(in_alpha, c.t)));
        zero(0, 0) = 1.0;
        if (c.variant == "prsg") {
            r.measured = trace_distance(g_twirl(zero, c.n, c.m, c.t, p), haar_t);
            r.bound_expr = "t^2/2^m";
            r.expr_value = c.t * c.t / std::ldexp(1.0, c.m);
        } else {
            if (c.n < 2) throw std::invalid_argument("composition variant needs n >= 2");
            Mat seed_state = Mat::Zero(static_cast<Eigen::Index>(ipow(2, c.t)), static_cast<Eigen::Index>(ipow(2, c.t)));
            seed_state(0, 0) = 1.0;
            Mat inner = g_twirl(seed_state, 1, c.n - 1, c.t, p);
            Mat h1 = g_twirl(inner, c.n, c.m, c.t, p);
            Mat h2 = g_twirl(detail::normalized_sym(in_alpha, c.t), c.n, c.m, c.t, p);
            r.measured = trace_distance(h1, haar_t);
            r.details = {{"hybrid_inner_prsg_vs_haar_input", trace_distance(h1, h2)},
                         {"hybrid_haar_input_vs_haar_output", trace_distance(h2, haar_t)},
                         {"inner_prsg_vs_haar", trace_distance(inner, detail::normalized_sym(in_alpha, c.t))}};
            r.bound_expr = "t^2/2^(n-1) + t^2/2^m";
            r.expr_value = c.t * c.t / std::ldexp(1.0, c.n - 1) + c.t * c.t / std::ldexp(1.0, c.m);
        }
    } else if (c.variant == "prfsg") {
        int q = c.q;
        if (static_cast<std::uint64_t>(q) > in_alpha) throw std::invalid_argument("prfsg: q exceeds 2^n");
        std::uint64_t p = detail::modulus_for(c, q * c.t);
        r.config["p"] = p;
        r.config["q"] = q;
        require_density_qubits(q * c.t * (c.n + c.m));
        Mat in = Mat::Ones(1, 1);
        Mat ref = Mat::Ones(1, 1);
        for (int i = 0; i < q; ++i) {
            Mat e = Mat::Zero(static_cast<Eigen::Index>(in_alpha), static_cast<Eigen::Index>(in_alpha));
            e(i, i) = 1.0;
            for (int j = 0; j < c.t; ++j) in = kron(in, e);
            ref = kron(ref, haar_t);
        }
        r.measured = trace_distance(g_twirl(in, c.n, c.m, q * c.t, p), ref);
        r.bound_expr = "q^2*t/2^(n+m) + q*t^2/2^m";
        r.expr_value = q * q * c.t / std::ldexp(1.0, c.n + c.m) + q * c.t * c.t / std::ldexp(1.0, c.m);
    } else {
        throw std::invalid_argument("pri_implies_prsg: variant must be prfsg, prsg or composition");
    }
    detail::finish_single(r);
    return r;
}

/// Default configuration of each experiment; every field can be overridden from the CLI.
inline ExperimentConfig default_config(const std::string &name) {
    ExperimentConfig c;
    if (name == "tdis_info") {
        c.n = 1; c.m = 3; c.s = 1; c.t = 2;
    } else if (name == "outer_comp_query") {
        c.n = 1; c.m = 1; c.q = 2; c.p = 8;
    } else if (name == "multicopy_info") {
        c.n = 1; c.m = 3; c.q = 2;
    } else if (name == "tuni_info" || name == "haar_info") {
        c.n = 2; c.m = 2; c.s = 1; c.t = 1;
    } else if (name == "tuni_invar" || name == "tuni_haar_dis") {
        c.nm = 3; c.s = 1; c.t = 2;
    } else if (name == "haar_perp_to_iid") {
        c.n = 3; c.s = 2; c.t = 1;
    } else if (name == "length_extension") {
        c.n = 2; c.m = 1; c.t = 2;
    } else if (name == "pri_implies_prsg") {
        c.n = 2; c.m = 2; c.t = 1; c.q = 2;
    }
    return c;
}

/// Sets one integer field by name; used by sweeps.
inline void set_param(ExperimentConfig &c, const std::string &key, int v) {
    if (key == "n") {
        c.n = v;
    } else if (key == "m") {
        c.m = v;
    } else if (key == "s") {
        c.s = v;
    } else if (key == "t") {
        c.t = v;
    } else if (key == "q") {
        c.q = v;
    } else if (key == "ell") {
        c.ell = v;
    } else if (key == "nm") {
        c.nm = v;
    } else {
        throw std::invalid_argument("cannot sweep parameter " + key);
    }
}

inline int get_param(const ExperimentConfig &c, const std::string &key) {
    if (key == "n") return c.n;
    if (key == "m") return c.m;
    if (key == "s") return c.s;
    if (key == "t") return c.t;
    if (key == "q") return c.q;
    if (key == "ell") return c.ell;
    if (key == "nm") return c.nm;
    throw std::invalid_argument("cannot sweep parameter " + key);
}

// ---------------------------------------------------------------------------
// Registry

struct ExperimentInfo {
    std::string name;
    std::string alias;
    std::string anchor;
    std::string vary;
    std::function<ExperimentReport(const ExperimentConfig &)> run;
};

inline const std::vector<ExperimentInfo> &experiment_registry() {
    static const std::vector<ExperimentInfo> reg = {
        {"tdis_info", "tdis", "distinct-type queries: TD(rho, rho_uni) = O(s t^2 / 2^m)", "m", run_tdis},
        {"outer_comp_query", "outer-zero", "type(x) != type(x'): E[G|x><x'|G^dag] = 0", "m", run_outer_zero},
        {"multicopy_info", "multicopy", "q copies of any pure state: TD(rho, rho_uni(1,q)) = O(q^2 / 2^m)", "m",
         run_multicopy},
        {"tuni_info", "tuni-info", "unique 2t-types with side register: TD(rho, sigma x rho_uni) = O(s t^2 / 2^m)", "m",
         run_tuni_info},
        {"haar_info", "haar-info", "Haar inputs with side copies: TD = O(s^2 t^2 / 2^n + s t^2 / 2^m)", "n",
         run_haar_info},
        {"tuni_invar", "tuni-invar", "rho_uni is O(s^2 t^2 / 2^(n+m))-almost invariant under U^{x q}", "nm",
         run_tuni_invar},
        {"tuni_haar_dis", "tuni-haar-dis", "TD(rho_uni, i.i.d. Haar t-copies) = O(s^2 t^2 / 2^(n+m))", "nm",
         run_tuni_haar_dis},
        {"haar_perp_to_iid", "haar-perp", "s orthogonal Haar columns vs s i.i.d. Haar states: O(s^2 t / 2^n)", "n",
         run_haar_perp},
        {"length_extension", "length-extension", "(I_n x Haar isometry) on Haar 2n-qubit copies: O(t! t^2 / 2^(n+m) + t^2 / 2^n)",
         "n,m", run_length_extension},
        {"pri_implies_prsg", "prsg", "PRI outputs on fixed or distinct inputs vs Haar states: O(q^2 t / 2^(n+m))", "m",
         run_prsg_from_pri},
    };
    return reg;
}

inline std::string normalize_name(std::string s) {
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

inline const ExperimentInfo *find_experiment(const std::string &name) {
    std::string key = normalize_name(name);
    for (const auto &e : experiment_registry()) {
        if (e.name == key || normalize_name(e.alias) == key) return &e;
    }
    return nullptr;
}

inline ExperimentReport run_experiment(const std::string &name, const ExperimentConfig &c) {
    const auto *e = find_experiment(name);
    if (!e) throw std::out_of_range("unknown experiment: " + name);
    auto start = std::chrono::steady_clock::now();
    ExperimentReport r = e->run(c);
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// Configs for a sweep of `key` over `values`.
inline std::vector<ExperimentConfig> sweep_configs(const ExperimentConfig &base, const std::string &key,
                                                   const std::vector<int> &values) {
    std::vector<ExperimentConfig> pts;
    for (int v : values) {
        ExperimentConfig c = base;
        set_param(c, key, v);
        pts.push_back(c);
    }
    return pts;
}

/// Three points around the base value of the experiment's swept parameter: {v-1, v, v+1},
/// shifted up when v-1 would drop below 1.
inline std::vector<ExperimentConfig> default_sweep(const std::string &name, const ExperimentConfig &base) {
    const auto *e = find_experiment(name);
    if (!e) throw std::out_of_range("unknown experiment: " + name);
    if (e->vary == "n,m") {
        // (n-1, m), (n-1, m+1), (n, m): growing n beyond this exceeds the dense budget.
        int n0 = std::max(1, base.n - 1);
        std::vector<ExperimentConfig> pts;
        for (auto [dn, dm] : std::vector<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}}) {
            ExperimentConfig c = base;
            c.n = n0 + dn;
            c.m = base.m + dm;
            pts.push_back(c);
        }
        return pts;
    }
    int v = std::max(2, get_param(base, e->vary));
    return sweep_configs(base, e->vary, {v - 1, v, v + 1});
}

inline SweepReport run_sweep(const std::string &name, const std::vector<ExperimentConfig> &points) {
    const auto *e = find_experiment(name);
    if (!e) throw std::out_of_range("unknown experiment: " + name);
    SweepReport sw;
    sw.name = e->name;
    sw.vary = e->vary;
    for (const auto &c : points) sw.points.push_back(run_experiment(name, c));
    fit_sweep(sw);
    return sw;
}

}  // namespace prilab

#endif  // PRILAB_VERIFY_HPP

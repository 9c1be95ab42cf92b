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

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "prilab/prilab.hpp"

using prilab::ExperimentConfig;
using prilab::ExperimentReport;
using prilab::SweepReport;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCap = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Options shared by `verify` and `game`. Unset optionals keep the experiment's defaults.
struct CommonFlags {
    std::optional<int> n, m, s, t, q, ell, nm;
    std::optional<std::uint64_t> p;
    std::uint64_t seed = 1;
    std::optional<int> samples;
    int jobs = 1;
    std::string out;
    std::string format = "json";
    bool timing = false;
    std::string manifest;

    void attach(CLI::App *app) {
        app->add_option("--n", n, "input qubits");
        app->add_option("--m", m, "appended qubits");
        app->add_option("--s", s, "number of distinct states");
        app->add_option("--t", t, "copies per state");
        app->add_option("--q", q, "parallel queries");
        app->add_option("--ell", ell, "side-information qubits");
        app->add_option("--nm", nm, "total qubits n+m");
        app->add_option("--p", p, "phase modulus (default: smallest power of two above 2q)");
        app->add_option("--seed", seed, "RNG seed")->capture_default_str();
        app->add_option("--samples", samples, "Monte Carlo samples");
        app->add_option("--jobs", jobs, "worker threads")->capture_default_str();
        app->add_option("--out", out, "write the report here instead of stdout");
        app->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
        app->add_flag("--timing", timing, "record wall-clock runtime_ms (reports are then not reproducible)");
        app->add_option("--manifest", manifest, "also write a run manifest listing every command with its seed");
    }

    void apply(ExperimentConfig &c) const {
        if (n) c.n = *n;
        if (m) c.m = *m;
        if (s) c.s = *s;
        if (t) c.t = *t;
        if (q) c.q = *q;
        if (ell) c.ell = *ell;
        if (nm) c.nm = *nm;
        if (p) c.p = *p;
        if (samples) c.samples = *samples;
        c.seed = seed;
        c.jobs = jobs;
    }
};

std::string csv_field(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

const char *kReportCsvHeader = "name,point,config,measured,stderr,bound_expr,expr_value,fitted_C,bound_value,verdict,seed,samples,runtime_ms\n";

std::string report_csv_row(const json &r, int point) {
    std::ostringstream os;
    os << csv_field(r["name"].get<std::string>()) << ',' << point << ',' << csv_field(r["config"].dump()) << ','
       << num(r["measured"]) << ',' << num(r["stderr"]) << ',' << csv_field(r["bound_expr"].get<std::string>()) << ','
       << num(r["expr_value"]) << ',' << num(r["fitted_C"]) << ',' << num(r["bound_value"]) << ','
       << r["verdict"].get<std::string>() << ',' << r["seed"].get<std::uint64_t>() << ',' << r["samples"].get<int>() << ','
       << (r["runtime_ms"].is_null() ? std::string() : num(r["runtime_ms"])) << '\n';
    return os.str();
}

void emit(const std::string &text, const std::string &path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open " + path + " for writing");
    f << text;
}

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_manifest(const std::string &path, const json &commands) {
    if (path.empty()) return;
    json mf = {{"schema_version", 1}, {"created_at", now_utc()}, {"commands", commands}};
    emit(mf.dump(2) + "\n", path);
}

json strip_timing(json r, bool timing) {
    if (!timing) r["runtime_ms"] = nullptr;
    return r;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyFlags {
    CommonFlags common;
    std::string name;
    bool sweep = false;
    std::string vary;
    std::vector<int> values;
    std::string input;
    std::string phi;
    std::optional<int> phi_index;
    std::string types;
    std::string variant;
    std::optional<int> bootstrap;
};

/// One experiment (single point or sweep) as a JSON object plus its verdict.
struct VerifyResult {
    json report;
    bool pass = true;
    std::vector<json> rows;  // one per point, for CSV
    std::vector<ExperimentConfig> configs;  // one per point, for the manifest
};

VerifyResult verify_one(const prilab::ExperimentInfo &info, const VerifyFlags &f) {
    ExperimentConfig c = prilab::default_config(info.name);
    f.common.apply(c);
    if (!f.input.empty()) c.input = f.input;
    if (!f.phi.empty()) c.phi = f.phi;
    if (f.phi_index) c.phi_index = *f.phi_index;
    if (!f.types.empty()) c.types = f.types;
    if (!f.variant.empty()) c.variant = f.variant;
    if (f.bootstrap) c.bootstrap = *f.bootstrap;
    VerifyResult out;
    if (!f.sweep) {
        ExperimentReport r = prilab::run_experiment(info.name, c);
        out.report = strip_timing(r.to_json(), f.common.timing);
        out.pass = r.verdict();
        out.rows.push_back(out.report);
        out.configs.push_back(c);
        return out;
    }
    std::vector<ExperimentConfig> pts;
    if (!f.values.empty()) {
        std::string key = f.vary.empty() ? info.vary : f.vary;
        if (key.find(',') != std::string::npos) throw UsageError("--values needs --vary for " + info.name);
        pts = prilab::sweep_configs(c, key, f.values);
    } else if (!f.vary.empty()) {
        int v = std::max(2, prilab::get_param(c, f.vary));
        pts = prilab::sweep_configs(c, f.vary, {v - 1, v, v + 1});
    } else {
        pts = prilab::default_sweep(info.name, c);
    }
    out.configs = pts;
    SweepReport sw = prilab::run_sweep(info.name, pts);
    if (!f.vary.empty()) sw.vary = f.vary;
    out.report = sw.to_json();
    for (auto &p : out.report["points"]) {
        p = strip_timing(p, f.common.timing);
        out.rows.push_back(p);
    }
    out.pass = sw.verdict();
    return out;
}

int cmd_verify(const VerifyFlags &f) {
    std::vector<const prilab::ExperimentInfo *> todo;
    if (f.name == "all") {
        for (const auto &e : prilab::experiment_registry()) todo.push_back(&e);
        std::sort(todo.begin(), todo.end(), [](auto *a, auto *b) { return a->name < b->name; });
    } else {
        const auto *e = prilab::find_experiment(f.name);
        if (!e) {
            std::cerr << "unknown experiment: " << f.name << " (see --list)\n";
            return kExitUsage;
        }
        todo.push_back(e);
    }
    std::vector<VerifyResult> results;
    json commands = json::array();
    for (const auto *e : todo) {
        results.push_back(verify_one(*e, f));
        for (const auto &pc : results.back().configs) {
            commands.push_back({{"experiment", e->name}, {"config", prilab::to_json(pc)}, {"seed", pc.seed}});
        }
    }
    bool pass = std::all_of(results.begin(), results.end(), [](const VerifyResult &r) { return r.pass; });

    std::string text;
    if (f.common.format == "csv") {
        text = kReportCsvHeader;
        for (const auto &r : results) {
            for (std::size_t i = 0; i < r.rows.size(); ++i) text += report_csv_row(r.rows[i], static_cast<int>(i));
        }
    } else if (todo.size() == 1) {
        text = results[0].report.dump(2) + "\n";
    } else {
        json all = {{"suite", "all"}, {"sweep", f.sweep}, {"seed", f.common.seed}, {"verdict", pass ? "pass" : "fail"}};
        all["reports"] = json::array();
        for (const auto &r : results) all["reports"].push_back(r.report);
        text = all.dump(2) + "\n";
    }
    emit(text, f.common.out);
    write_manifest(f.common.manifest, commands);

    if (todo.size() > 1 || !f.common.out.empty()) {
        std::ostream &os = todo.size() > 1 && f.common.out.empty() ? std::cerr : std::cout;
        os << std::left << std::setw(20) << "experiment" << std::setw(8) << "points" << std::setw(14) << "max measured"
           << "verdict\n";
        for (std::size_t i = 0; i < results.size(); ++i) {
            double mx = 0;
            for (const auto &row : results[i].rows) mx = std::max(mx, row["measured"].get<double>());
            os << std::setw(20) << todo[i]->name << std::setw(8) << results[i].rows.size() << std::setw(14)
               << std::setprecision(6) << mx << (results[i].pass ? "pass" : "fail") << "\n";
        }
    }
    return pass ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------
// game

struct GameFlags {
    CommonFlags common;
    std::string variant;
    int trials = 10000;
    std::string signer = "haar";
    std::string adversary = "random";
    std::string transcripts;
};

prilab::GameConfig game_config(const GameFlags &f) {
    prilab::GameConfig g;
    g.variant = prilab::game_variant_from_string(f.variant);
    // Defaults: perm-test at n=4, m=1, t=3; the others at n=3, m=2 (t=4 for many-copies).
    if (g.variant == prilab::GameVariant::perm_test) {
        g.n = 4;
        g.m = 1;
        g.t = 3;
    } else {
        g.n = 3;
        g.m = 2;
        g.t = g.variant == prilab::GameVariant::many_copies ? 4 : 1;
    }
    const auto &c = f.common;
    if (c.nm) {
        if (c.n && c.m && *c.n + *c.m != *c.nm) throw UsageError("--n + --m must equal --nm");
        if (c.m && !c.n) {
            g.m = *c.m;
            g.n = *c.nm - g.m;
        } else {
            g.n = c.n ? *c.n : *c.nm - g.m;
            g.m = *c.nm - g.n;
        }
    } else {
        if (c.n) g.n = *c.n;
        if (c.m) g.m = *c.m;
    }
    if (c.t) g.t = *c.t;
    if (c.q) g.q = *c.q;
    if (c.p) g.p = *c.p;
    g.trials = f.trials;
    g.seed = c.seed;
    g.jobs = c.jobs;
    g.signer = prilab::signer_mode_from_string(f.signer);
    g.adversary = prilab::adversary_from_string(f.adversary);
    g.transcripts = !f.transcripts.empty();
    return g;
}

int cmd_game(const GameFlags &f) {
    prilab::GameConfig g;
    try {
        g = game_config(f);
    } catch (const std::out_of_range &e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }
    auto start = std::chrono::steady_clock::now();
    prilab::GameResult r = prilab::play_game(g);
    json j = r.to_json();
    j["measured"] = r.mean_accept;
    j["stderr"] = r.mean_accept_stderr;
    j["runtime_ms"] = f.common.timing
                          ? json(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count())
                          : json(nullptr);
    std::string text;
    if (f.common.format == "csv") {
        text = "game,measured,stderr,win_rate,wilson_lo,wilson_hi,bound_expr,bound_value,verdict,seed,trials,runtime_ms\n";
        std::ostringstream os;
        os << j["game"].get<std::string>() << ',' << num(r.mean_accept) << ',' << num(r.mean_accept_stderr) << ','
           << num(r.win_rate) << ',' << num(r.ci_lo) << ',' << num(r.ci_hi) << ',' << csv_field(r.bound_expr) << ','
           << num(r.bound_value) << ',' << (r.verdict() ? "pass" : "fail") << ',' << g.seed << ',' << g.trials << ','
           << (j["runtime_ms"].is_null() ? std::string() : num(j["runtime_ms"])) << '\n';
        text += os.str();
    } else {
        text = j.dump(2) + "\n";
    }
    emit(text, f.common.out);
    if (!f.transcripts.empty()) {
        std::string lines;
        for (const auto &t : r.transcripts) lines += t.dump() + "\n";
        emit(lines, f.transcripts);
    }
    write_manifest(f.common.manifest, json::array({{{"game", j["game"]}, {"config", j["config"]}, {"seed", g.seed}}}));
    return r.verdict() ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------
// pri

struct PriFlags {
    std::string action;
    std::string spec;
    std::string input = "zeros";
    std::string out;
    int n = 1;
    int m = 1;
    std::optional<std::uint64_t> p;
    std::uint64_t seed = 1;
    bool keyed = false;
};

prilab::PriSpec load_spec(const std::string &path) {
    if (path.empty()) throw UsageError("--spec is required");
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open " + path);
    return prilab::pri_spec_from_json(json::parse(f));
}

/// "zeros" is |0...0>; anything else is a QMAT file holding a column vector or a density matrix.
prilab::Mat load_input(const std::string &input, std::size_t dim) {
    if (input == "zeros") {
        prilab::Mat v = prilab::Mat::Zero(static_cast<Eigen::Index>(dim), 1);
        v(0, 0) = 1.0;
        return v;
    }
    std::ifstream f(input, std::ios::binary);
    if (!f) throw UsageError("cannot open " + input);
    prilab::Mat m = prilab::read_qmat(f);
    if (static_cast<std::size_t>(m.rows()) != dim || (m.cols() != 1 && m.cols() != m.rows())) {
        throw UsageError("input " + input + " must be a " + std::to_string(dim) + "-dim vector or square matrix");
    }
    return m;
}

void write_qmat_file(const std::string &path, const prilab::Mat &m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open " + path + " for writing");
    prilab::write_qmat(f, m);
}

std::string listing(const prilab::Mat &m) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (std::abs(m(r, c)) <= 1e-15) continue;
            if (m.cols() == 1) {
                os << r;
            } else {
                os << r << ' ' << c;
            }
            os << ' ' << m(r, c).real() << ' ' << m(r, c).imag() << '\n';
        }
    }
    return os.str();
}

int cmd_pri(const PriFlags &f) {
    if (f.action == "keygen") {
        std::uint64_t p = f.p ? *f.p : prilab::default_modulus(1);
        prilab::Rng rng = prilab::substream(f.seed, 0x5EC5ULL);
        prilab::PriSpec spec = f.keyed ? prilab::PriSpec::keyed(f.n, f.m, p, f.seed) : prilab::PriSpec::random(f.n, f.m, p, rng);
        emit(prilab::to_json(spec).dump() + "\n", f.out);
        return kExitPass;
    }
    prilab::PriSpec spec = load_spec(f.spec);
    spec.validate();
    if (f.action == "dump") {
        if (f.out.empty()) throw UsageError("pri dump needs --out");
        write_qmat_file(f.out, prilab::pri_isometry(spec));
        return kExitPass;
    }
    if (f.action == "apply") {
        prilab::Mat in = load_input(f.input, std::size_t{1} << spec.n);
        prilab::Mat res = in.cols() == 1 ? prilab::Mat(prilab::pri_apply(spec, prilab::Vec(in.col(0))))
                                         : prilab::pri_apply(spec, in);
        if (!f.out.empty()) write_qmat_file(f.out, res);
        std::cout << listing(res);
        return kExitPass;
    }
    if (f.action == "invert") {
        prilab::Mat in = load_input(f.input, spec.N());
        prilab::Mat rho = in.cols() == 1 ? prilab::Mat(in * in.adjoint()) : in;
        prilab::Mat res = prilab::pri_invert(spec, rho);
        if (!f.out.empty()) write_qmat_file(f.out, res);
        std::cout << listing(res);
        return kExitPass;
    }
    throw UsageError("unknown pri action: " + f.action);
}

// ---------------------------------------------------------------------------
// replay and list

int cmd_replay(const std::string &path, const CommonFlags &common) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    json mf = json::parse(in);
    bool pass = true;
    json reports = json::array();
    for (const auto &cmd : mf.at("commands")) {
        if (cmd.contains("experiment")) {
            const std::string name = cmd["experiment"];
            ExperimentConfig c = prilab::experiment_config_from_json(cmd.at("config"), prilab::default_config(name));
            c.seed = cmd.at("seed").get<std::uint64_t>();
            c.jobs = common.jobs;
            ExperimentReport r = prilab::run_experiment(name, c);
            pass = pass && r.verdict();
            reports.push_back(strip_timing(r.to_json(), common.timing));
        } else {
            throw UsageError("replay supports experiment commands only");
        }
    }
    emit(json{{"manifest", path}, {"reports", reports}}.dump(2) + "\n", common.out);
    return pass ? kExitPass : kExitFail;
}

void print_list() {
    std::cout << "experiments (verify <name>):\n";
    for (const auto &e : prilab::experiment_registry()) {
        std::cout << "  " << std::left << std::setw(18) << e.name << std::setw(18) << e.alias << e.anchor << "\n";
    }
    std::cout << "games (game <variant>):\n"
              << "  perm-test         accept prob <= 1/(t+1) + t/(t+1) * 2^m/(2^(n+m)-q)\n"
              << "  many-copies       win prob <= 0.6^t (each SWAP test passes w.p. (1+F)/2)\n"
              << "  uncompute         win prob <= 2^m/(2^(n+m)-q)\n"
              << "pri actions (pri <action>): keygen apply invert dump\n";
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"pri_lab: pseudorandom isometries, twirls and their trace-distance checks"};
    bool list = false;
    app.add_flag("--list", list, "list experiments and games with their statements");
    app.require_subcommand(0, 1);

    VerifyFlags vf;
    auto *verify = app.add_subcommand("verify", "run a named experiment (or all)");
    verify->add_option("name", vf.name, "experiment name or alias, or 'all'")->required();
    vf.common.attach(verify);
    verify->add_flag("--sweep", vf.sweep, "run a 3-point sweep and fit the bound constant");
    verify->add_option("--vary", vf.vary, "parameter to sweep (default: the experiment's own)");
    verify->add_option("--values", vf.values, "explicit sweep values")->delimiter(',');
    verify->add_option("--input", vf.input, "haar-info input: mc or exact");
    verify->add_option("--phi", vf.phi, "multicopy state: plus, zero or haar");
    verify->add_option("--phi-index", vf.phi_index, "which Haar state when --phi haar");
    verify->add_option("--types", vf.types, "tdis/tuni-info types: fixed or random");
    verify->add_option("--variant", vf.variant, "prsg variant: prfsg, prsg or composition");
    verify->add_option("--bootstrap", vf.bootstrap, "bootstrap resamples for Monte Carlo error bars");

    GameFlags gf;
    auto *game = app.add_subcommand("game", "play a MAC forgery game");
    game->add_option("variant", gf.variant, "perm-test, many-copies or uncompute")->required();
    gf.common.attach(game);
    game->add_option("--trials", gf.trials, "independent games")->capture_default_str();
    game->add_option("--signer", gf.signer, "haar or pri")->capture_default_str();
    game->add_option("--adversary", gf.adversary, "random, replay, projected or honest")->capture_default_str();
    game->add_option("--transcripts", gf.transcripts, "write JSON-lines transcripts here");

    PriFlags pf;
    auto *pri = app.add_subcommand("pri", "construct, apply, invert or dump a PRI");
    pri->add_option("action", pf.action, "keygen, apply, invert or dump")
        ->required()
        ->check(CLI::IsMember({"keygen", "apply", "invert", "dump"}));
    pri->add_option("--spec", pf.spec, "PriSpec JSON file");
    pri->add_option("--input", pf.input, "zeros or a QMAT file")->capture_default_str();
    pri->add_option("--out", pf.out, "output file");
    pri->add_option("--n", pf.n, "keygen: input qubits")->capture_default_str();
    pri->add_option("--m", pf.m, "keygen: appended qubits")->capture_default_str();
    pri->add_option("--p", pf.p, "keygen: phase modulus");
    pri->add_option("--seed", pf.seed, "keygen: seed")->capture_default_str();
    pri->add_flag("--keyed", pf.keyed, "keygen: keyed backends instead of explicit tables");

    std::string manifest_path;
    CommonFlags rf;
    auto *replay = app.add_subcommand("replay", "rerun the commands of a run manifest");
    replay->add_option("manifest", manifest_path, "manifest JSON")->required();
    replay->add_option("--out", rf.out, "write the reports here");
    replay->add_option("--jobs", rf.jobs, "worker threads");
    replay->add_flag("--timing", rf.timing, "record runtime_ms");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (list) {
            print_list();
            return kExitPass;
        }
        if (verify->parsed()) return cmd_verify(vf);
        if (game->parsed()) return cmd_game(gf);
        if (pri->parsed()) return cmd_pri(pf);
        if (replay->parsed()) return cmd_replay(manifest_path, rf);
        std::cerr << app.help();
        return kExitUsage;
    } catch (const prilab::CapError &e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return kExitCap;
    } catch (const UsageError &e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::out_of_range &e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
}

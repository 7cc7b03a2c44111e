#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "failsafe/algebraic_dso.hpp"
#include "failsafe/consistent_spt.hpp"
#include "failsafe/errors.hpp"
#include "failsafe/full_dso.hpp"
#include "failsafe/graph.hpp"

namespace failsafe::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kParse = 2, kMismatch = 3 };

struct QueryRecord {
    Vertex u = 0;
    Vertex v = 0;
    Failure failure;
    std::size_t line = 0;
};

// "u v E a b" or "u v V f", 1-indexed; '#' starts a comment. Vertex ranges are
// checked here, failure validity when the query is answered.
inline std::vector<QueryRecord> parse_queries(std::istream& in, std::size_t n) {
    std::vector<QueryRecord> out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::strip_comment(raw);
        if (detail::is_blank(line)) continue;
        std::istringstream ss(line);
        long long u = 0, v = 0;
        std::string kind;
        if (!(ss >> u >> v >> kind)) throw ParseError(line_no, "expected 'u v E a b' or 'u v V f'");
        std::vector<long long> rest;
        for (long long x; ss >> x;) rest.push_back(x);
        if (!ss.eof()) throw ParseError(line_no, "trailing garbage");
        QueryRecord q;
        q.line = line_no;
        if (kind == "E" && rest.size() == 2) {
            q.failure = EdgeFailure{0, 0};
        } else if (kind == "V" && rest.size() == 1) {
            q.failure = VertexFailure{0};
        } else {
            throw ParseError(line_no, "failure must be 'E a b' or 'V f'");
        }
        const auto n_ll = static_cast<long long>(n);
        std::vector<long long> ids{u, v};
        ids.insert(ids.end(), rest.begin(), rest.end());
        for (long long id : ids)
            if (id < 1 || id > n_ll) throw ParseError(line_no, "vertex out of range 1.." + std::to_string(n));
        q.u = static_cast<Vertex>(u - 1);
        q.v = static_cast<Vertex>(v - 1);
        if (kind == "E") {
            q.failure = EdgeFailure{static_cast<Vertex>(rest[0] - 1), static_cast<Vertex>(rest[1] - 1)};
        } else {
            q.failure = VertexFailure{static_cast<Vertex>(rest[0] - 1)};
        }
        out.push_back(q);
    }
    return out;
}

// Every (u, v, f) with u != v: each edge, and each vertex outside {u, v}.
inline std::vector<QueryRecord> all_queries(const WeightedDigraph& g) {
    std::vector<QueryRecord> out;
    const std::size_t n = g.vertex_count();
    const std::vector<Edge> edges = g.edges();
    for (Vertex u = 0; u < n; ++u)
        for (Vertex v = 0; v < n; ++v) {
            if (u == v) continue;
            for (const Edge& e : edges) out.push_back({u, v, EdgeFailure{e.from, e.to}, 0});
            for (Vertex x = 0; x < n; ++x)
                if (x != u && x != v) out.push_back({u, v, VertexFailure{x}, 0});
        }
    return out;
}

inline std::string failure_token(const Failure& f) {
    if (const auto* e = std::get_if<EdgeFailure>(&f)) return "E" + std::to_string(e->from + 1) + "-" + std::to_string(e->to + 1);
    return "V" + std::to_string(std::get<VertexFailure>(f).vertex + 1);
}

struct Config {
    std::string mode = "full";
    std::optional<std::size_t> radius;
    std::optional<double> alpha;
    std::optional<u64> seed;
    std::optional<u64> prime;
    std::size_t block_size = 0;
    double hitting_c = 3.0;
    std::string format = "tsv";
    std::string out_path;
    std::string graph_path;
    std::string query_path;
};

// One answered query. answer is nullopt for unreachable in full mode.
struct Answer {
    QueryRecord query;
    std::optional<Distance> answer;
    bool truncated = false;
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void emit_answers(std::ostream& out, const std::vector<Answer>& answers, const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const Answer& a : answers) {
            nlohmann::ordered_json row;
            row["u"] = a.query.u + 1;
            row["v"] = a.query.v + 1;
            row["failure"] = failure_token(a.query.failure);
            if (a.answer) {
                row["answer"] = *a.answer;
            } else {
                row["answer"] = nullptr;
            }
            row["truncated"] = a.truncated;
            arr.push_back(std::move(row));
        }
        out << arr.dump(2) << '\n';
        return;
    }
    for (const Answer& a : answers) {
        out << a.query.u + 1 << ' ' << a.query.v + 1 << ' ' << failure_token(a.query.failure) << ' ';
        if (!a.answer) {
            out << "INF";
        } else if (a.truncated) {
            out << ">=" << *a.answer;
        } else {
            out << *a.answer;
        }
        out << '\n';
    }
}

// Rows "root vertex parent", 1-indexed, root-major.
inline void emit_forest(std::ostream& out, const ShortestPathForests& forests, bool incoming) {
    const std::size_t n = forests.n;
    for (Vertex root = 0; root < n; ++root)
        for (Vertex x = 0; x < n; ++x) {
            const Vertex p = incoming ? forests.in_parent(root, x) : forests.out_parent(root, x);
            if (p != kNoVertex) out << root + 1 << ' ' << x + 1 << ' ' << p + 1 << '\n';
        }
}

inline nlohmann::ordered_json forest_json(const ShortestPathForests& forests, bool incoming) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    const std::size_t n = forests.n;
    for (Vertex root = 0; root < n; ++root)
        for (Vertex x = 0; x < n; ++x) {
            const Vertex p = incoming ? forests.in_parent(root, x) : forests.out_parent(root, x);
            if (p != kNoVertex) rows.push_back({root + 1, x + 1, p + 1});
        }
    return rows;
}

}  // namespace detail

// Runs one invocation. Answers go to `out` (or --out), warnings, diagnostics
// and timings to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Config cfg;
    CLI::App app{"Replacement-distance oracle for weighted digraphs"};
    app.add_option("--mode", cfg.mode, "truncated | full | spt | verify | bench")
        ->check(CLI::IsMember({"truncated", "full", "spt", "verify", "bench"}));
    auto* radius_opt = app.add_option("--radius", cfg.radius, "truncation radius r")->check(CLI::PositiveNumber);
    auto* alpha_opt = app.add_option("--alpha", cfg.alpha, "radius exponent, r = ceil(M n^alpha)")->check(CLI::Range(0.0, 1.0));
    radius_opt->excludes(alpha_opt);
    app.add_option("--seed", cfg.seed, "random seed (default: $FAILSAFE_SEED, else 1)");
    app.add_option("--prime", cfg.prime, "field modulus");
    app.add_option("--block-size", cfg.block_size, "witness block size (0: ceil(n^0.5286))");
    app.add_option("--hitting-c", cfg.hitting_c, "hitting-set constant C")->check(CLI::PositiveNumber);
    app.add_option("--format", cfg.format, "tsv | json")->check(CLI::IsMember({"tsv", "json"}));
    app.add_option("--out", cfg.out_path, "output file (spt mode: PATH.in and PATH.out)");
    app.add_option("graph", cfg.graph_path, "graph file")->required();
    app.add_option("queries", cfg.query_path, "query file (truncated/full: stdin if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    u64 seed = 1;
    if (cfg.seed) {
        seed = *cfg.seed;
    } else if (const char* env = std::getenv("FAILSAFE_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            seed = std::stoull(env, &used);
            if (env[used] != '\0') throw std::invalid_argument(env);
        } catch (const std::exception&) {
            err << "error: FAILSAFE_SEED is not an unsigned integer\n";
            return kUsage;
        }
    }

    WeightedDigraph g(1, 1);
    std::vector<QueryRecord> queries;
    bool have_queries = false;
    try {
        std::istringstream gin(detail::read_file(cfg.graph_path));
        g = parse_graph(gin);
        if (!cfg.query_path.empty()) {
            std::istringstream qin(detail::read_file(cfg.query_path));
            queries = parse_queries(qin, g.vertex_count());
            have_queries = true;
        } else if (cfg.mode == "truncated" || cfg.mode == "full") {
            queries = parse_queries(std::cin, g.vertex_count());
            have_queries = true;
        }
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const ValidationError& e) {
        err << "invalid graph: " << e.what() << '\n';
        return kParse;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return kParse;
    }

    const std::size_t n = g.vertex_count();
    const u64 nm = static_cast<u64>(n) * static_cast<u64>(g.max_weight());
    if (cfg.prime && (!is_prime_u64(*cfg.prime) || *cfg.prime <= nm + 1)) {
        err << "error: --prime must be a prime larger than n*M + 1 = " << nm + 1 << '\n';
        return kUsage;
    }

    FullDsoOptions opts;
    opts.seed = seed;
    opts.prime = cfg.prime.value_or(kGoldilocksPrime);
    opts.spt.block_size = cfg.block_size;
    opts.spt.hitting_c = cfg.hitting_c;
    if (cfg.alpha) opts.alpha = *cfg.alpha;
    opts.radius = cfg.radius;
    const std::size_t r = cfg.radius ? *cfg.radius : radius_for(n, g.max_weight(), opts.alpha);

    std::ofstream file_out;
    std::ostream* sink = &out;
    if (!cfg.out_path.empty() && cfg.mode != "spt") {
        file_out.open(cfg.out_path, std::ios::binary);
        if (!file_out) {
            err << "error: cannot write " << cfg.out_path << '\n';
            return kUsage;
        }
        sink = &file_out;
    }

    auto warn_skip = [&](const QueryRecord& q, const std::exception& e) {
        err << "warning: skipping query";
        if (q.line) err << " on line " << q.line;
        err << ": " << e.what() << '\n';
    };

    if (cfg.mode == "truncated") {
        const TruncatedDso dso = TruncatedDso::preprocess(g, r, seed, PrimeField(opts.prime));
        std::vector<Answer> answers;
        for (const QueryRecord& q : queries) {
            try {
                const std::size_t d = dso.query(q.u, q.v, q.failure);
                answers.push_back({q, static_cast<Distance>(d), d >= r});
            } catch (const InvalidQuery& e) {
                warn_skip(q, e);
            }
        }
        detail::emit_answers(*sink, answers, cfg.format);
        return kOk;
    }

    if (cfg.mode == "full") {
        const FullDso dso = FullDso::build(g, opts);
        std::vector<Answer> answers;
        for (const QueryRecord& q : queries) {
            try {
                const Distance d = dso.query(q.u, q.v, q.failure);
                answers.push_back({q, d >= kUnreachable ? std::nullopt : std::optional<Distance>(d), false});
            } catch (const InvalidQuery& e) {
                warn_skip(q, e);
            }
        }
        detail::emit_answers(*sink, answers, cfg.format);
        return kOk;
    }

    if (cfg.mode == "spt") {
        const ConsistentPaths paths = build_consistent_paths(g, Permutation::random(n, seed), opts.spt);
        if (paths.escalations) err << "note: " << paths.escalations << " hitting-set escalation(s)\n";
        if (cfg.out_path.empty()) {
            if (cfg.format == "json") {
                nlohmann::ordered_json doc;
                doc["in"] = detail::forest_json(paths.forests, true);
                doc["out"] = detail::forest_json(paths.forests, false);
                out << doc.dump(2) << '\n';
            } else {
                out << "# in\n";
                detail::emit_forest(out, paths.forests, true);
                out << "# out\n";
                detail::emit_forest(out, paths.forests, false);
            }
            return kOk;
        }
        for (bool incoming : {true, false}) {
            const std::string path = cfg.out_path + (incoming ? ".in" : ".out");
            std::ofstream f(path, std::ios::binary);
            if (!f) {
                err << "error: cannot write " << path << '\n';
                return kUsage;
            }
            if (cfg.format == "json") {
                f << detail::forest_json(paths.forests, incoming).dump(2) << '\n';
            } else {
                detail::emit_forest(f, paths.forests, incoming);
            }
        }
        return kOk;
    }

    if (!have_queries) queries = all_queries(g);
    const auto t0 = std::chrono::steady_clock::now();
    const FullDso dso = FullDso::build(g, opts);
    const auto t1 = std::chrono::steady_clock::now();

    if (cfg.mode == "verify") {
        std::size_t checked = 0, full_mismatch = 0, core_mismatch = 0;
        for (const QueryRecord& q : queries) {
            try {
                const Distance expected = dso.fallback(q.u, q.v, q.failure);
                const Distance got = dso.query(q.u, q.v, q.failure);
                const auto core = static_cast<Distance>(dso.core().query(q.u, q.v, q.failure));
                const Distance clipped = std::min<Distance>(expected, static_cast<Distance>(r));
                ++checked;
                if (got != expected || core != clipped) {
                    if (got != expected) ++full_mismatch;
                    if (core != clipped) ++core_mismatch;
                    err << "mismatch: " << q.u + 1 << ' ' << q.v + 1 << ' ' << failure_token(q.failure)
                        << " expected " << expected << " full " << got << " truncated " << core << '\n';
                }
            } catch (const InvalidQuery& e) {
                warn_skip(q, e);
            }
        }
        if (cfg.format == "json") {
            nlohmann::ordered_json doc;
            doc["radius"] = r;
            doc["checked"] = checked;
            doc["full_mismatches"] = full_mismatch;
            doc["truncated_mismatches"] = core_mismatch;
            doc["fallbacks"] = dso.fallback_count();
            *sink << doc.dump(2) << '\n';
        } else {
            *sink << "radius " << r << '\n'
                  << "checked " << checked << '\n'
                  << "full_mismatches " << full_mismatch << '\n'
                  << "truncated_mismatches " << core_mismatch << '\n'
                  << "fallbacks " << dso.fallback_count() << '\n';
        }
        return (full_mismatch || core_mismatch) ? kMismatch : kOk;
    }

    // bench
    std::size_t answered = 0;
    const auto t2 = std::chrono::steady_clock::now();
    for (const QueryRecord& q : queries) {
        try {
            (void)dso.query(q.u, q.v, q.failure);
            ++answered;
        } catch (const InvalidQuery& e) {
            warn_skip(q, e);
        }
    }
    const auto t3 = std::chrono::steady_clock::now();
    const auto ms = [](auto a, auto b) { return std::chrono::duration<double, std::milli>(b - a).count(); };
    if (cfg.format == "json") {
        nlohmann::ordered_json doc;
        doc["n"] = n;
        doc["m"] = g.edge_count();
        doc["M"] = g.max_weight();
        doc["radius"] = r;
        doc["queries"] = answered;
        doc["core_answers"] = dso.core_count();
        doc["fallbacks"] = dso.fallback_count();
        doc["escalations"] = dso.paths().escalations;
        *sink << doc.dump(2) << '\n';
    } else {
        *sink << "n " << n << '\n'
              << "m " << g.edge_count() << '\n'
              << "M " << g.max_weight() << '\n'
              << "radius " << r << '\n'
              << "queries " << answered << '\n'
              << "core_answers " << dso.core_count() << '\n'
              << "fallbacks " << dso.fallback_count() << '\n'
              << "escalations " << dso.paths().escalations << '\n';
    }
    err << "preprocess_ms " << ms(t0, t1) << '\n'
        << "query_ms " << ms(t2, t3) << '\n'
        << "query_us_mean " << (answered ? 1000.0 * ms(t2, t3) / static_cast<double>(answered) : 0.0) << '\n';
    return kOk;
}

}  // namespace failsafe::cli

#include "spikemon/quantiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "csv_util.hpp"
#include "spikemon/errors.hpp"
#include "spikemon/parallel.hpp"
#include "spikemon/rng.hpp"

namespace spikemon {

namespace {

struct Kahan {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

void check_mt(int m, int T) {
    if (m < 2) throw std::invalid_argument("limit statistic: m must be >= 2");
    if (T < 1) throw std::invalid_argument("limit statistic: T must be >= 1");
}

}  // namespace

void QuantileRequest::validate() const {
    check_mt(m, T);
    if (replications < 1)
        throw std::invalid_argument("QuantileRequest: replications must be >= 1");
    if (alphas.empty()) throw std::invalid_argument("QuantileRequest: need at least one alpha");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("QuantileRequest: alpha must lie in (0, 1)");
}

double L_from_normals(int m, int T, std::span<const double> normals) {
    check_mt(m, T);
    if (normals.size() != static_cast<std::size_t>(m) + static_cast<std::size_t>(T))
        throw std::invalid_argument("L_from_normals: need exactly m + T increments");

    const double md = static_cast<double>(m);
    std::vector<double> walk(static_cast<std::size_t>(m));
    Kahan run;
    for (int t = 0; t < m; ++t) {
        run.add(normals[static_cast<std::size_t>(t)]);
        walk[static_cast<std::size_t>(t)] = run.sum;
    }
    const double wm = walk.back();

    Kahan den;
    for (int t = 1; t <= m; ++t)
        den.add(std::fabs(walk[static_cast<std::size_t>(t - 1)] - (static_cast<double>(t) / md) * wm));
    if (den.sum == 0.0) throw std::domain_error("L_from_normals: zero denominator");

    const double m2 = md * md;
    Kahan tail = run;  // continues the walk past t = m
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 1; k <= T; ++k) {
        tail.add(normals[static_cast<std::size_t>(m + k - 1)]);
        const double lk = static_cast<double>(m + k);
        const double num = m2 / lk * (tail.sum - (lk / md) * wm);
        best = std::max(best, num);
    }
    return best / den.sum;
}

double simulate_L(int m, int T, std::uint64_t seed, std::uint64_t replication_index) {
    check_mt(m, T);
    std::vector<double> normals(static_cast<std::size_t>(m) + static_cast<std::size_t>(T));
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt == 64)
            throw std::runtime_error("simulate_L: resample limit hit (degenerate stream)");
        // Retries move to an unused substream far above ordinary replication
        // indices, so resampling never perturbs other replications.
        rng::Stream s(seed, replication_index + (attempt << 48));
        for (double& x : normals) x = s.next_normal();
        try {
            return L_from_normals(m, T, normals);
        } catch (const std::domain_error&) {
            std::cerr << "simulate_L: zero denominator at replication " << replication_index
                      << ", resampling\n";
        }
    }
}

std::vector<double> draw_L(const QuantileRequest& req, int threads) {
    req.validate();
    std::vector<double> out(static_cast<std::size_t>(req.replications));
    parallel_for(req.replications, threads, [&](std::int64_t i) {
        out[static_cast<std::size_t>(i)] =
            simulate_L(req.m, req.T, req.seed, static_cast<std::uint64_t>(i));
    });
    return out;
}

double nearest_rank_quantile(std::span<const double> sorted_draws, double p) {
    if (sorted_draws.empty())
        throw std::invalid_argument("nearest_rank_quantile: empty sample");
    if (!(p > 0.0 && p <= 1.0))
        throw std::invalid_argument("nearest_rank_quantile: p must lie in (0, 1]");
    const auto r = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(sorted_draws.size())));
    const std::size_t rank = std::clamp<std::size_t>(r, 1, sorted_draws.size());
    return sorted_draws[rank - 1];
}

QuantileTable quantiles_of_L(const QuantileRequest& req, int threads) {
    std::vector<double> draws = draw_L(req, threads);
    std::sort(draws.begin(), draws.end());

    std::vector<double> alphas = req.alphas;
    std::sort(alphas.begin(), alphas.end());
    alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

    QuantileTable table;
    for (double a : alphas) {
        QuantileRow row;
        row.m = req.m;
        row.T = req.T;
        row.alpha = a;
        row.quantile = nearest_rank_quantile(draws, 1.0 - a);
        row.replications = req.replications;
        row.seed = req.seed;
        table.rows.push_back(row);
    }
    return table;
}

const QuantileRow* QuantileTable::find(int m, int T, double alpha, int replications,
                                       std::uint64_t seed) const {
    for (const QuantileRow& r : rows)
        if (r.m == m && r.T == T && r.alpha == alpha && r.replications == replications &&
            r.seed == seed)
            return &r;
    return nullptr;
}

const QuantileRow* QuantileTable::best_for_alpha(double alpha) const {
    const QuantileRow* best = nullptr;
    for (const QuantileRow& r : rows) {
        if (r.alpha != alpha) continue;
        if (!best || std::tie(r.m, r.T, r.replications, r.seed) >
                         std::tie(best->m, best->T, best->replications, best->seed))
            best = &r;
    }
    return best;
}

void QuantileTable::upsert(const QuantileRow& row) {
    for (QuantileRow& r : rows) {
        if (r.m == row.m && r.T == row.T && r.alpha == row.alpha &&
            r.replications == row.replications && r.seed == row.seed) {
            r.quantile = row.quantile;
            return;
        }
    }
    rows.push_back(row);
}

QuantileTable read_quantile_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw ParseError("empty file, expected header m,T,alpha,quantile,replications,seed", 0);
    ++lineno;
    detail::strip_cr(line);
    if (line != "m,T,alpha,quantile,replications,seed")
        throw ParseError("bad header '" + line + "'", lineno);

    QuantileTable table;
    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto f = detail::split_fields(line);
        if (f.size() != 6) throw ParseError("expected 6 fields", lineno);
        QuantileRow row;
        long long m = 0, T = 0, reps = 0;
        if (!detail::parse_long(f[0], m) || !detail::parse_long(f[1], T) ||
            !detail::parse_double(f[2], row.alpha) || !detail::parse_double(f[3], row.quantile) ||
            !detail::parse_long(f[4], reps) || !detail::parse_u64(f[5], row.seed))
            throw ParseError("malformed row '" + line + "'", lineno);
        row.m = static_cast<int>(m);
        row.T = static_cast<int>(T);
        row.replications = static_cast<int>(reps);
        if (row.m < 2 || row.T < 1 || row.replications < 1)
            throw ParseError("row out of range (need m >= 2, T >= 1, replications >= 1)", lineno);
        if (!(row.alpha > 0.0 && row.alpha < 1.0))
            throw ParseError("alpha must lie in (0, 1)", lineno);
        if (!std::isfinite(row.quantile)) throw ParseError("quantile must be finite", lineno);
        table.rows.push_back(row);
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return table;
}

void write_quantile_table(const QuantileTable& table, std::ostream& out) {
    QuantileTable sorted = table;
    std::sort(sorted.rows.begin(), sorted.rows.end(), [](const QuantileRow& a, const QuantileRow& b) {
        return std::tie(a.m, a.T, a.replications, a.seed, a.alpha) <
               std::tie(b.m, b.T, b.replications, b.seed, b.alpha);
    });
    out << "m,T,alpha,quantile,replications,seed\n";
    for (const QuantileRow& r : sorted.rows) {
        out << r.m << ',' << r.T << ',' << detail::format_double(r.alpha) << ','
            << detail::format_double(r.quantile) << ',' << r.replications << ',' << r.seed
            << '\n';
    }
}

void write_quantile_table(const QuantileTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_quantile_table(table, out);
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace spikemon

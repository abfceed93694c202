#pragma once

// Run configuration, CSV formatting, atomic file output, SHA-256 checksums
// and the orbit-ensemble cache.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "errors.hpp"
#include "map_core.hpp"
#include "thermo.hpp"

namespace henonmf {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr const char* version_string = "0.1.0";

/// Shortest rendering that parses back to the same double.
inline std::string fmt_double(double v) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: " + std::string(s));
    return v;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) { row_strings(header); }

    CsvWriter& cell(double v) { return raw(fmt_double(v)); }
    CsvWriter& cell(long long v) { return raw(std::to_string(v)); }
    CsvWriter& cell(int v) { return raw(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return raw(std::to_string(v)); }
    CsvWriter& cell(bool v) { return raw(v ? "1" : "0"); }
    CsvWriter& cell(const std::string& s) { return raw(s); }
    CsvWriter& cell(const char* s) { return raw(s); }

    void end_row() {
        buf_ << '\n';
        first_ = true;
    }

    std::string str() const { return buf_.str(); }

private:
    CsvWriter& raw(const std::string& s) {
        if (!first_) buf_ << ',';
        buf_ << s;
        first_ = false;
        return *this;
    }
    void row_strings(const std::vector<std::string>& cells) {
        for (const auto& c : cells) raw(c);
        end_row();
    }

    std::ostringstream buf_;
    bool first_ = true;
};

inline std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Minimal CSV reader for files written by CsvWriter (no quoting).
inline std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    const std::string text = read_text(path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != ',' && text[i] != '\n') continue;
        cells.emplace_back(text, start, i - start);
        start = i + 1;
        if (text[i] == '\n') rows.push_back(std::exchange(cells, {}));
    }
    if (start < text.size()) {
        cells.emplace_back(text, start);
        rows.push_back(std::move(cells));
    }
    return rows;
}

/// Write through a temporary file and rename into place.
inline void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

struct ObservableSpec {
    std::string name = "coord_x";
    Point2 center{0.0, 0.0};  // gauss_bump
    double width = 0.1;       // gauss_bump
    double value = 1.0;       // constant

    Observable make() const {
        if (name == "coord_x") return coord_x();
        if (name == "coord_y") return coord_y();
        if (name == "symbol_indicator") return symbol_indicator();
        if (name == "gauss_bump") return gauss_bump(center, width);
        if (name == "constant") return constant_observable(value);
        throw ConfigError("unknown observable: " + name);
    }

    /// Name that also encodes the parameters; used as the Birkhoff-sum key.
    std::string key() const {
        if (name == "gauss_bump")
            return name + "[" + fmt_double(center.x) + ";" + fmt_double(center.y) + ";" + fmt_double(width) + "]";
        if (name == "constant") return name + "[" + fmt_double(value) + "]";
        return name;
    }

    Observable make_keyed() const {
        Observable o = make();
        o.name = key();
        return o;
    }

    json to_json() const {
        json j{{"name", name}};
        if (name == "gauss_bump") {
            j["center"] = {center.x, center.y};
            j["width"] = width;
        }
        if (name == "constant") j["value"] = value;
        return j;
    }
};

/// Every numeric default of a run lives here.
struct RunConfig {
    Family family = Family::henon_classical;
    std::optional<double> a = 5.0;  // empty: resolve a*(b) first
    double b = 0.3;
    double lambda_u = 3.0;
    double c_s = 1.0 / 3.0;
    double tol_fp = 1e-10;

    double a_lo = 1.8, a_hi = 2.2, tol_a = 1e-9;
    double delta = 0.1;
    double wu_length = 8.0;

    int n = 12;
    int n_max = 16;

    double t_lo = 0.0, t_hi = 1.0;
    int t_count = 101;

    std::optional<double> beta_lo, beta_hi;
    double beta_pad = 0.05;  // fraction of the empirical range trimmed at each end
    int beta_count = 51;

    ObservableSpec observable;

    int direct_k = 4;
    std::optional<double> direct_epsilon;

    int horizon = 40;
    std::size_t grid = 2'000'000;
    std::optional<double> window;
    double branch_length = 4.0;
    int gm_m = 0;  // G_m flag checked from step m to the sampling horizon

    std::string output_dir = "out";
    bool cache = true;
    std::string cache_dir;  // empty: <output_dir>/cache
    int threads = 1;

    MapParams base_params() const {
        if (family == Family::affine_horseshoe) return MapParams::affine(lambda_u, c_s);
        return MapParams::henon(a.value_or(0.0), b, tol_fp);
    }

    fs::path cache_path() const { return cache_dir.empty() ? fs::path(output_dir) / "cache" : fs::path(cache_dir); }

    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError(m); };
        if (family == Family::affine_horseshoe) {
            if (!(lambda_u > 2.0)) fail("lambda_u must exceed 2");
            if (!(c_s > 0.0 && c_s < 0.5)) fail("c_s must lie in (0, 1/2)");
        } else {
            if (!(b >= 0.0 && b < 1.0)) fail("b must lie in [0, 1)");
            if (a && !(*a > 0.0)) fail("a must be positive");
            if (!a && !(a_lo < a_hi)) fail("a_star bracket must satisfy a_lo < a_hi");
            if (!(tol_a > 0.0)) fail("tol_a must be positive");
        }
        if (!(tol_fp > 0.0)) fail("tol_fp must be positive");
        if (!(delta > 0.0)) fail("delta must be positive");
        if (n_max < 1 || n_max > 24) fail("n_max must lie in [1, 24]");
        if (n < 1 || n > n_max) fail("n must lie in [1, n_max]");
        if (t_count < 2 || !(t_lo < t_hi)) fail("t grid needs t_lo < t_hi and at least 2 points");
        if (beta_count < 1) fail("beta_count must be positive");
        if (!(beta_pad >= 0.0 && beta_pad < 0.5)) fail("beta_pad must lie in [0, 1/2)");
        if (beta_lo && beta_hi && !(*beta_lo <= *beta_hi)) fail("beta_lo must not exceed beta_hi");
        if (direct_k < 0 || direct_k >= n || direct_k > 10) fail("direct.k must lie in [0, min(n-1, 10)]");
        if (direct_epsilon && !(*direct_epsilon >= 0.0)) fail("direct.epsilon must be nonnegative");
        if (horizon < 1) fail("levelsets.horizon must be positive");
        if (grid < 1) fail("levelsets.grid must be positive");
        if (window && !(*window > 0.0)) fail("levelsets.window must be positive");
        if (!(branch_length > 0.0)) fail("levelsets.branch_length must be positive");
        if (gm_m < 0 || gm_m > horizon) fail("g_m.m must lie in [0, levelsets.horizon]");
        if (threads < 1) fail("threads must be positive");
        observable.make();
    }

    json to_json() const {
        json j;
        j["family"] = to_string(family);
        if (family == Family::affine_horseshoe) {
            j["lambda_u"] = lambda_u;
            j["c_s"] = c_s;
        } else {
            if (a)
                j["a"] = *a;
            else
                j["a"] = "a_star";
            j["b"] = b;
        }
        j["tol_fp"] = tol_fp;
        j["a_star"] = {{"a_lo", a_lo}, {"a_hi", a_hi}, {"tol_a", tol_a}, {"wu_length", wu_length}};
        j["delta"] = delta;
        j["n"] = n;
        j["n_max"] = n_max;
        j["t_grid"] = {{"lo", t_lo}, {"hi", t_hi}, {"count", t_count}};
        json bg{{"count", beta_count}, {"pad", beta_pad}};
        bg["lo"] = beta_lo ? json(*beta_lo) : json(nullptr);
        bg["hi"] = beta_hi ? json(*beta_hi) : json(nullptr);
        j["beta_grid"] = bg;
        j["observable"] = observable.to_json();
        j["direct"] = {{"k", direct_k}, {"epsilon", direct_epsilon ? json(*direct_epsilon) : json(nullptr)}};
        j["levelsets"] = {{"horizon", horizon},
                          {"grid", grid},
                          {"window", window ? json(*window) : json(nullptr)},
                          {"branch_length", branch_length}};
        j["g_m"] = {{"m", gm_m}};
        j["output_dir"] = output_dir;
        j["cache"] = cache;
        j["cache_dir"] = cache_dir;
        j["threads"] = threads;
        return j;
    }

    static RunConfig from_json(const json& j) {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        RunConfig c;
        auto check_keys = [](const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                bool known = false;
                for (const char* k : keys) known = known || it.key() == k;
                if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
            }
        };
        check_keys(j,
                   {"family", "a", "b", "lambda_u", "c_s", "tol_fp", "a_star", "delta", "n", "n_max", "t_grid",
                    "beta_grid", "observable", "direct", "levelsets", "g_m", "output_dir", "cache", "cache_dir",
                    "threads"},
                   "config");
        try {
            if (j.contains("family")) c.family = family_from_string(j.at("family").get<std::string>());
            if (j.contains("a")) {
                if (j.at("a").is_string()) {
                    if (j.at("a").get<std::string>() != "a_star") throw ConfigError("a must be a number or \"a_star\"");
                    c.a.reset();
                } else {
                    c.a = j.at("a").get<double>();
                }
            }
            auto num = [&](const json& o, const char* k, auto& dst) {
                if (o.contains(k)) dst = o.at(k).get<std::decay_t<decltype(dst)>>();
            };
            auto opt_num = [&](const json& o, const char* k, std::optional<double>& dst) {
                if (o.contains(k)) {
                    if (o.at(k).is_null())
                        dst.reset();
                    else
                        dst = o.at(k).get<double>();
                }
            };
            num(j, "b", c.b);
            num(j, "lambda_u", c.lambda_u);
            num(j, "c_s", c.c_s);
            num(j, "tol_fp", c.tol_fp);
            num(j, "delta", c.delta);
            num(j, "n", c.n);
            num(j, "n_max", c.n_max);
            if (j.contains("a_star")) {
                const json& s = j.at("a_star");
                check_keys(s, {"a_lo", "a_hi", "tol_a", "wu_length"}, "a_star");
                num(s, "a_lo", c.a_lo);
                num(s, "a_hi", c.a_hi);
                num(s, "tol_a", c.tol_a);
                num(s, "wu_length", c.wu_length);
            }
            if (j.contains("t_grid")) {
                const json& s = j.at("t_grid");
                check_keys(s, {"lo", "hi", "count"}, "t_grid");
                num(s, "lo", c.t_lo);
                num(s, "hi", c.t_hi);
                num(s, "count", c.t_count);
            }
            if (j.contains("beta_grid")) {
                const json& s = j.at("beta_grid");
                check_keys(s, {"lo", "hi", "count", "pad"}, "beta_grid");
                opt_num(s, "lo", c.beta_lo);
                opt_num(s, "hi", c.beta_hi);
                num(s, "count", c.beta_count);
                num(s, "pad", c.beta_pad);
            }
            if (j.contains("observable")) {
                const json& s = j.at("observable");
                check_keys(s, {"name", "center", "width", "value"}, "observable");
                num(s, "name", c.observable.name);
                if (s.contains("center")) {
                    const auto v = s.at("center").get<std::vector<double>>();
                    if (v.size() != 2) throw ConfigError("observable.center must have two entries");
                    c.observable.center = {v[0], v[1]};
                }
                num(s, "width", c.observable.width);
                num(s, "value", c.observable.value);
            }
            if (j.contains("direct")) {
                const json& s = j.at("direct");
                check_keys(s, {"k", "epsilon"}, "direct");
                num(s, "k", c.direct_k);
                opt_num(s, "epsilon", c.direct_epsilon);
            }
            if (j.contains("levelsets")) {
                const json& s = j.at("levelsets");
                check_keys(s, {"horizon", "grid", "window", "branch_length"}, "levelsets");
                num(s, "horizon", c.horizon);
                if (s.contains("grid")) c.grid = static_cast<std::size_t>(s.at("grid").get<double>());
                opt_num(s, "window", c.window);
                num(s, "branch_length", c.branch_length);
            }
            if (j.contains("g_m")) {
                const json& s = j.at("g_m");
                check_keys(s, {"m"}, "g_m");
                num(s, "m", c.gm_m);
            }
            num(j, "output_dir", c.output_dir);
            num(j, "cache", c.cache);
            num(j, "cache_dir", c.cache_dir);
            num(j, "threads", c.threads);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config type error: ") + e.what());
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
        return c;
    }

    static RunConfig load(const fs::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config " + path.string());
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        return from_json(j);
    }
};

/// Cache file name for an ensemble keyed by (family, a, b, n).
inline std::string ensemble_cache_name(const MapParams& p, int n) {
    std::string s = "orbits_" + to_string(p.family);
    if (p.is_affine())
        s += "_l" + fmt_double(p.lambda_u) + "_c" + fmt_double(p.c_s);
    else
        s += "_a" + fmt_double(p.a) + "_b" + fmt_double(p.b);
    return s + "_n" + std::to_string(n) + ".csv";
}

inline std::string ensemble_csv(const OrbitEnsemble& ens, const std::vector<std::string>& observables) {
    std::vector<std::string> header{"word", "residual", "log_mult"};
    for (const auto& o : observables) header.push_back("S_" + o);
    CsvWriter w(header);
    for (const auto& e : ens.entries) {
        w.cell(e.word.bits).cell(e.residual).cell(e.log_mult);
        for (const auto& o : observables) w.cell(e.sums.at(o));
        w.end_row();
    }
    return w.str();
}

namespace detail {

inline void split_view(std::string_view line, char sep, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
        if (i == line.size() || line[i] == sep) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
}

}  // namespace detail

/// Ensemble from cache text, or nothing when it lacks a requested column.
inline std::optional<OrbitEnsemble> parse_ensemble_csv(std::string_view text, const MapParams& params, int n,
                                                       const std::vector<std::string>& observables) {
    auto next_line = [&text]() {
        const std::size_t end = std::min(text.find('\n'), text.size());
        const std::string_view line = text.substr(0, end);
        text.remove_prefix(std::min(end + 1, text.size()));
        return line;
    };
    std::vector<std::string_view> header, row;
    detail::split_view(next_line(), ',', header);
    if (header.size() < 3 || header[0] != "word") return std::nullopt;
    std::vector<std::size_t> col;
    for (const auto& o : observables) {
        auto it = std::find(header.begin(), header.end(), "S_" + o);
        if (it == header.end()) return std::nullopt;
        col.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    OrbitEnsemble ens;
    ens.n = n;
    ens.params = params;
    ens.entries.reserve(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')));
    try {
        while (!text.empty()) {
            detail::split_view(next_line(), ',', row);
            if (row.size() != header.size()) return std::nullopt;
            EnsembleEntry& e = ens.entries.emplace_back();
            e.word = SymbolWord(std::string(row[0]));
            if (static_cast<int>(e.word.size()) != n) return std::nullopt;
            e.period = e.word.primitive_period();
            e.residual = parse_double(row[1]);
            e.log_mult = parse_double(row[2]);
            for (std::size_t i = 0; i < observables.size(); ++i)
                e.sums.emplace_hint(e.sums.end(), observables[i], parse_double(row[col[i]]));
        }
    } catch (const std::exception&) {
        return std::nullopt;
    }
    return ens;
}

inline std::optional<OrbitEnsemble> load_ensemble_csv(const fs::path& path, const MapParams& params, int n,
                                                      const std::vector<std::string>& observables) {
    if (!fs::exists(path)) return std::nullopt;
    return parse_ensemble_csv(read_text(path), params, n, observables);
}

}  // namespace henonmf

#pragma once

// Batch commands behind the command-line tool. Each command writes its
// tables atomically into the output directory and finishes with a manifest.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "io.hpp"
#include "levelsets.hpp"
#include "manifolds.hpp"
#include "markov.hpp"
#include "symbolic.hpp"
#include "thermo.hpp"

namespace henonmf {

class Pipeline {
public:
    explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)), out_(cfg_.output_dir) { cfg_.validate(); }

    const RunConfig& config() const { return cfg_; }
    const fs::path& output_dir() const { return out_; }

    /// Runs `body` as the named command; on failure the files written so far
    /// are renamed with a .partial suffix and the manifest records the stage.
    template <class F>
    void run(const std::string& command, F&& body) {
        command_ = command;
        const auto t0 = clock::now();
        try {
            body();
            manifest_["status"] = "ok";
        } catch (const Error& e) {
            for (const fs::path& p : written_) {
                if (!fs::exists(p)) continue;
                fs::path partial = p;
                partial += ".partial";
                fs::rename(p, partial);
            }
            manifest_["status"] = "failed";
            manifest_["failure"] = {{"stage", stage_}, {"kind", e.kind()}, {"message", e.what()}};
            manifest_["wall_time_total"] = seconds_since(t0);
            write_manifest();
            throw;
        }
        manifest_["wall_time_total"] = seconds_since(t0);
        write_manifest();
    }

    // individual stages ----------------------------------------------------

    MapParams params() {
        if (params_) return *params_;
        if (cfg_.family == Family::henon_classical && !cfg_.a) {
            const AStarResult& s = a_star();
            params_ = MapParams::henon(s.hi, cfg_.b, cfg_.tol_fp);
        } else {
            params_ = cfg_.base_params();
        }
        params_->validate();
        return *params_;
    }

    const AStarResult& a_star() {
        if (astar_) return *astar_;
        if (cfg_.family != Family::henon_classical) throw ConfigError("find-a-star needs the henon_classical family");
        stage("a_star", [&] {
            TangencyOptions opt;
            opt.delta = cfg_.delta;
            opt.wu_length = cfg_.wu_length;
            astar_ = find_a_star(cfg_.b, cfg_.a_lo, cfg_.a_hi, cfg_.tol_a, opt, cfg_.tol_fp);
            json sweep = json::array();
            for (const TangencyReport& r : astar_->sweep)
                sweep.push_back({{"a", r.a},
                                 {"gap", r.gap},
                                 {"crossings", r.crossings},
                                 {"fold_point", {r.fold_point.x, r.fold_point.y}},
                                 {"fold_vertex", {r.fold_vertex.x, r.fold_vertex.y}}});
            json j{{"b", cfg_.b},
                   {"a_star", astar_->value},
                   {"bracket", {astar_->lo, astar_->hi}},
                   {"crossings_lo", astar_->at_lo.crossings},
                   {"crossings_hi", astar_->at_hi.crossings},
                   {"gap_lo", astar_->at_lo.gap},
                   {"gap_hi", astar_->at_hi.gap},
                   {"sweep", sweep}};
            emit_json("a_star.json", j);
        });
        return *astar_;
    }

    void fixed_points_stage() {
        const MapParams p = params();
        stage("fixed_points", [&] {
            const auto [P, Q] = fixed_points(p);
            auto saddle = [](const FixedSaddle& s) {
                return json{{"x", s.point.x},
                            {"y", s.point.y},
                            {"eig_u", s.eig_u},
                            {"eig_s", s.eig_s},
                            {"vec_u", {s.vec_u.x, s.vec_u.y}},
                            {"vec_s", {s.vec_s.x, s.vec_s.y}}};
            };
            emit_json("fixed_points.json", {{"params", params_json(p)}, {"P", saddle(P)}, {"Q", saddle(Q)}});
        });
    }

    const OrbitEnsemble& ensemble() {
        if (ensemble_) return *ensemble_;
        const MapParams p = params();
        stage("orbits", [&] {
            const Observable phi = cfg_.observable.make_keyed();
            const std::vector<std::string> names{phi.name};
            const fs::path cache_file = cfg_.cache_path() / ensemble_cache_name(p, cfg_.n);
            std::string cached;
            if (cfg_.cache && fs::exists(cache_file)) {
                cached = read_text(cache_file);
                ensemble_ = parse_ensemble_csv(cached, p, cfg_.n, names);
            }
            const bool hit = ensemble_.has_value();
            if (!hit) {
                OrbitOptions oo;
                oo.n_max = cfg_.n_max;
                ensemble_ = OrbitEnsemble::from(enumerate_orbits(p, cfg_.n, {phi}, oo));
            }
            const std::string csv = hit ? std::move(cached) : ensemble_csv(*ensemble_, names);
            if (cfg_.cache && !hit) write_atomic(cache_file, csv);
            manifest_["cache_hit"] = hit;
            emit("orbits.csv", csv);
            // words without a converged orbit; none when the 2^n fixed points are all covered
            CsvWriter miss({"word"});
            std::size_t misses = 0;
            if (ensemble_->fixed_point_count() != std::size_t{1} << cfg_.n) {
                std::vector<std::string> have;
                for (const auto& e : ensemble_->entries) have.push_back(e.word.bits);
                std::sort(have.begin(), have.end());
                for (const SymbolWord& w : necklaces(cfg_.n))
                    if (!std::binary_search(have.begin(), have.end(), w.bits)) {
                        miss.cell(w.bits).end_row();
                        ++misses;
                    }
            }
            emit("misses.csv", miss.str());
            manifest_["orbits"] = {{"n", cfg_.n},
                                   {"orbits", ensemble_->entries.size()},
                                   {"fixed_points", ensemble_->fixed_point_count()},
                                   {"misses", misses}};
        });
        return *ensemble_;
    }

    const DimensionRoot& pressure_stage() {
        if (root_) return *root_;
        const OrbitEnsemble& ens = ensemble();
        stage("pressure", [&] {
            const PressureCurve pc = pressure_curve(ens, linspace(cfg_.t_lo, cfg_.t_hi, cfg_.t_count));
            CsvWriter w({"t", "P"});
            for (std::size_t i = 0; i < pc.t_grid.size(); ++i) {
                w.cell(pc.t_grid[i]).cell(pc.values[i]);
                w.end_row();
            }
            emit("pressure.csv", w.str());
            root_ = dimension_root(ens);
            emit_json("dimension.json", {{"n", ens.n},
                                         {"t_u", root_->t},
                                         {"bracket", {root_->lo, root_->hi}},
                                         {"P_lo", root_->p_lo},
                                         {"P_hi", root_->p_hi},
                                         {"P_minus_1e-6", pressure(ens, root_->t - 1e-6)},
                                         {"P_plus_1e-6", pressure(ens, root_->t + 1e-6)},
                                         {"P_0", pressure(ens, 0.0)}});
            CsvWriter tu({"n", "t_u"});
            tu.cell(ens.n).cell(root_->t);
            tu.end_row();
            emit("dimension.csv", tu.str());
        });
        return *root_;
    }

    std::vector<double> beta_grid() {
        const OrbitEnsemble& ens = ensemble();
        const auto [lo, hi] = empirical_range(ens, cfg_.observable.key());
        const double pad = cfg_.beta_pad * (hi - lo);
        return linspace(cfg_.beta_lo.value_or(lo + pad), cfg_.beta_hi.value_or(hi - pad), cfg_.beta_count);
    }

    const SpectrumCurve& spectrum_stage() {
        if (spectrum_) return *spectrum_;
        const OrbitEnsemble& ens = ensemble();
        const std::vector<double> grid = beta_grid();
        stage("spectrum", [&] {
            const std::string key = cfg_.observable.key();
            spectrum_ = spectrum_legendre(ens, key, grid);
            DirectOptions dopt;
            dopt.k = cfg_.direct_k;
            dopt.epsilon = cfg_.direct_epsilon.value_or(-1.0);
            direct_.clear();
            CsvWriter w({"beta", "B", "q_star", "t_star", "mean_phi", "mean_lambda", "entropy", "below_threshold",
                         "out_of_range", "direct", "direct_feasible"});
            for (const SpectrumPoint& sp : spectrum_->points) {
                DirectResult d;
                if (!sp.out_of_range) d = spectrum_direct(ens, key, sp.beta, dopt);
                direct_.push_back(d.feasible ? d.value : std::numeric_limits<double>::quiet_NaN());
                w.cell(sp.beta).cell(sp.B).cell(sp.q_star).cell(sp.t_star);
                w.cell(sp.witness.mean_phi).cell(sp.witness.mean_lambda).cell(sp.witness.entropy);
                w.cell(sp.below_threshold).cell(sp.out_of_range).cell(direct_.back()).cell(d.feasible);
                w.end_row();
            }
            emit("spectrum.csv", w.str());
            manifest_["spectrum"] = {{"observable", key},
                                     {"threshold", spectrum_->threshold},
                                     {"phi_range", {spectrum_->phi_min, spectrum_->phi_max}},
                                     {"direct_k", cfg_.direct_k}};
        });
        return *spectrum_;
    }

    const std::vector<DimensionEstimate>& levelsets_stage() {
        if (levelsets_) return *levelsets_;
        const MapParams p = params();
        const std::vector<double> grid = beta_grid();
        stage("levelsets", [&] {
            const Observable phi = cfg_.observable.make_keyed();
            const Curve wu = unstable_slice(p, cfg_.branch_length);
            SampleOptions so;
            so.horizon = cfg_.horizon;
            so.grid = cfg_.grid;
            so.threads = cfg_.threads;
            so.delta = cfg_.delta;
            so.gm_m = cfg_.gm_m;
            if (p.is_henon()) {
                // folds of the slice inside I(delta), if any
                for (int br : {+1, -1}) {
                    const Curve c = grow_unstable(p, fixed_points(p).first, cfg_.branch_length, br);
                    for (const Fold& f : detect_folds(p, c, cfg_.delta, 30)) so.folds.push_back(f);
                }
            }
            const SampleSet ss = sample_omega_u(p, wu, phi, so);
            CsvWriter w({"s", "x", "y", "survival", "A_N", "g_m"});
            for (const SampleEntry& e : ss.entries) {
                w.cell(e.s).cell(e.point.x).cell(e.point.y).cell(e.survival).cell(e.average).cell(e.g_m);
                w.end_row();
            }
            emit("samples.csv", w.str());
            const double win = cfg_.window.value_or(default_window(ss));
            const DimensionEstimate whole = level_set_dimension(ss, 0.0, std::numeric_limits<double>::infinity());
            levelsets_.emplace();
            json per = json::array();
            CsvWriter lw({"beta", "box_dim", "stderr", "samples", "insufficient"});
            for (double beta : grid) {
                levelsets_->push_back(level_set_dimension(ss, beta, win));
                const DimensionEstimate& d = levelsets_->back();
                lw.cell(beta).cell(d.value).cell(d.stderr_).cell(d.samples).cell(d.insufficient);
                lw.end_row();
            }
            emit("levelsets.csv", lw.str());
            json surv = json::array();
            for (std::size_t j = 0; j < ss.survival_counts.size(); ++j) surv.push_back(ss.survival_counts[j]);
            emit_json("levelsets.json", {{"estimator", "box (upper) dimension"},
                                         {"horizon", ss.horizon},
                                         {"grid", ss.grid},
                                         {"slice_length", ss.length},
                                         {"window", win},
                                         {"survivors", ss.survivors()},
                                         {"survival_counts", surv},
                                         {"whole", estimate_json(whole)}});
        });
        return *levelsets_;
    }

    void routes_stage() {
        const SpectrumCurve& sc = spectrum_stage();
        const std::vector<DimensionEstimate>& ls = levelsets_stage();
        stage("compare_routes", [&] {
            const RouteReport rep = compare_routes(sc, direct_, ls);
            CsvWriter w({"beta", "legendre", "direct", "box", "box_stderr", "below_threshold", "interior"});
            for (const RouteRow& r : rep.rows) {
                w.cell(r.beta).cell(r.legendre).cell(r.direct).cell(r.box).cell(r.box_stderr);
                w.cell(r.below_threshold).cell(r.interior);
                w.end_row();
            }
            emit("routes.csv", w.str());
            manifest_["routes"] = {{"compared_unflagged", rep.compared},
                                   {"max_direct_gap", rep.max_direct_gap},
                                   {"max_box_gap", rep.max_box_gap},
                                   {"max_direct_gap_all_interior", rep.max_direct_gap_all},
                                   {"max_box_gap_all_interior", rep.max_box_gap_all}};
        });
    }

    // commands -------------------------------------------------------------

    void cmd_fixed_points() {
        run("fixed-points", [&] { fixed_points_stage(); });
    }
    void cmd_find_a_star() {
        run("find-a-star", [&] { a_star(); });
    }
    void cmd_orbits() {
        run("orbits", [&] { ensemble(); });
    }
    void cmd_pressure() {
        run("pressure", [&] { pressure_stage(); });
    }
    void cmd_spectrum() {
        run("spectrum", [&] { spectrum_stage(); });
    }
    void cmd_levelsets() {
        run("levelsets", [&] { levelsets_stage(); });
    }
    void cmd_report() {
        run("report", [&] {
            fixed_points_stage();
            pressure_stage();
            spectrum_stage();
            levelsets_stage();
            routes_stage();
        });
    }

private:
    using clock = std::chrono::steady_clock;

    static double seconds_since(clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    }

    template <class F>
    void stage(const std::string& name, F&& body) {
        const std::string outer = stage_;
        stage_ = name;
        const auto t0 = clock::now();
        body();
        manifest_["wall_time"][name] = seconds_since(t0);
        stage_ = outer;
    }

    static json params_json(const MapParams& p) {
        json j{{"family", to_string(p.family)}};
        if (p.is_affine()) {
            j["lambda_u"] = p.lambda_u;
            j["c_s"] = p.c_s;
        } else {
            j["a"] = p.a;
            j["b"] = p.b;
        }
        j["tol_fp"] = p.tol_fp;
        return j;
    }

    static json estimate_json(const DimensionEstimate& d) {
        json counts = json::array(), scales = json::array();
        for (std::size_t i = 0; i < d.counts.size(); ++i) {
            counts.push_back(d.counts[i]);
            scales.push_back(d.scales[i]);
        }
        return {{"value", std::isnan(d.value) ? json(nullptr) : json(d.value)},
                {"stderr", std::isnan(d.stderr_) ? json(nullptr) : json(d.stderr_)},
                {"scale_range", {d.s_min, d.s_max}},
                {"samples", d.samples},
                {"clusters", d.clusters},
                {"insufficient", d.insufficient},
                {"scales", scales},
                {"counts", counts}};
    }

    void emit(const std::string& name, const std::string& content) {
        const fs::path p = out_ / name;
        write_atomic(p, content);
        written_.push_back(p);
    }

    void emit_json(const std::string& name, const json& j) { emit(name, j.dump(2) + "\n"); }

    void write_manifest() {
        manifest_["command"] = command_;
        manifest_["version"] = version_string;
        manifest_["config"] = cfg_.to_json();
        if (params_) manifest_["params"] = params_json(*params_);
        fs::create_directories(out_);
        json files = json::array();
        std::vector<fs::path> all;
        for (const auto& entry : fs::recursive_directory_iterator(out_))
            if (entry.is_regular_file() && entry.path().filename() != "manifest.json") all.push_back(entry.path());
        std::sort(all.begin(), all.end());
        for (const fs::path& p : all)
            files.push_back({{"path", fs::relative(p, out_).generic_string()},
                             {"bytes", static_cast<std::uintmax_t>(fs::file_size(p))},
                             {"sha256", sha256_file(p)}});
        manifest_["files"] = files;
        write_atomic(out_ / "manifest.json", manifest_.dump(2) + "\n");
    }

    RunConfig cfg_;
    fs::path out_;
    json manifest_ = json::object();
    std::string command_;
    std::string stage_ = "setup";
    std::vector<fs::path> written_;

    std::optional<MapParams> params_;
    std::optional<AStarResult> astar_;
    std::optional<OrbitEnsemble> ensemble_;
    std::optional<DimensionRoot> root_;
    std::optional<SpectrumCurve> spectrum_;
    std::vector<double> direct_;
    std::optional<std::vector<DimensionEstimate>> levelsets_;
};

}  // namespace henonmf

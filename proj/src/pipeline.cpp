#include "mrn/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mrn/csv.hpp"
#include "mrn/errors.hpp"
#include "mrn/metrics.hpp"
#include "mrn/pricing.hpp"

namespace mrn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string label(int i) { return std::to_string(i + 1); }

// ---- artifact writers -------------------------------------------------------

CsvTable states_table(const Trajectory& traj) {
    const int k = traj.states.front().k;
    CsvTable t;
    t.header = {"step", "t_s"};
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) t.header.push_back("n_" + label(i) + "_" + label(j));
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        std::vector<double> row{static_cast<double>(s), static_cast<double>(s) * traj.dt};
        row.insert(row.end(), traj.states[s].n.begin(), traj.states[s].n.end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable flows_table(const Trajectory& traj, const Topology& topo) {
    const auto triples = transfer_triples(topo);
    const auto pairs = ordered_border_pairs(topo);
    CsvTable t;
    t.header = {"step", "t_s"};
    for (int i = 0; i < topo.k; ++i) t.header.push_back("mii_" + label(i));
    for (const auto& tr : triples)
        t.header.push_back("m_" + label(tr.i) + "_" + label(tr.h) + "_" + label(tr.j));
    for (const auto& [i, h] : pairs) t.header.push_back("b_" + label(i) + "_" + label(h));
    for (std::size_t s = 0; s < traj.flows.size(); ++s) {
        const FlowRecord& f = traj.flows[s];
        std::vector<double> row{static_cast<double>(s), static_cast<double>(s) * traj.dt};
        for (int i = 0; i < topo.k; ++i) row.push_back(f.m_ii[static_cast<std::size_t>(i)]);
        for (const auto& tr : triples) row.push_back(f.transfer(tr.i, tr.h, tr.j));
        for (const auto& [i, h] : pairs) row.push_back(f.border_flow(i, h));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable splits_table(const std::vector<SplitRates>& splits, const Topology& topo, double dt) {
    const auto triples = transfer_triples(topo);
    CsvTable t;
    t.header = {"step", "t_s"};
    for (const auto& tr : triples)
        t.header.push_back("th_" + label(tr.i) + "_" + label(tr.h) + "_" + label(tr.j));
    for (std::size_t s = 0; s < splits.size(); ++s) {
        std::vector<double> row{static_cast<double>(s), static_cast<double>(s) * dt};
        for (const auto& tr : triples) row.push_back(splits[s].at(tr.i, tr.h, tr.j));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable costs_table(const std::vector<CostMatrix>& costs, int k, double dt) {
    CsvTable t;
    t.header = {"step", "t_s"};
    for (int i = 0; i < k; ++i)
        for (int h = 0; h < k; ++h) t.header.push_back("c_" + label(i) + "_" + label(h));
    for (std::size_t s = 0; s < costs.size(); ++s) {
        std::vector<double> row{static_cast<double>(s), static_cast<double>(s) * dt};
        row.insert(row.end(), costs[s].c.begin(), costs[s].c.end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---- artifact readers -------------------------------------------------------

void check_columns(const CsvTable& t, std::size_t expected, const std::string& path) {
    if (t.header.size() != expected)
        throw IoError("artifact " + path + " has " + std::to_string(t.header.size()) + " columns, expected " +
                      std::to_string(expected) + "; rerun the producing stage");
}

std::vector<NetworkState> load_states(const std::string& path, int k, double dt) {
    const CsvTable t = read_csv(path);
    check_columns(t, 2 + static_cast<std::size_t>(k) * k, path);
    std::vector<NetworkState> states;
    for (std::size_t s = 0; s < t.rows.size(); ++s) {
        if (std::abs(t.rows[s][1] - static_cast<double>(s) * dt) > 1e-9)
            throw IoError("artifact " + path + " uses a different step length; rerun the producing stage");
        NetworkState st;
        st.k = k;
        st.n.assign(t.rows[s].begin() + 2, t.rows[s].end());
        states.push_back(std::move(st));
    }
    return states;
}

std::vector<FlowRecord> load_flows(const std::string& path, const Topology& topo) {
    const auto triples = transfer_triples(topo);
    const auto pairs = ordered_border_pairs(topo);
    const CsvTable t = read_csv(path);
    check_columns(t, 2 + static_cast<std::size_t>(topo.k) + triples.size() + pairs.size(), path);
    std::vector<FlowRecord> flows;
    for (const auto& row : t.rows) {
        FlowRecord f;
        f.k = topo.k;
        f.m_ii.assign(row.begin() + 2, row.begin() + 2 + topo.k);
        f.m_ihj.assign(static_cast<std::size_t>(topo.k) * topo.k * topo.k, 0.0);
        for (std::size_t x = 0; x < triples.size(); ++x) {
            const auto& tr = triples[x];
            f.m_ihj[(static_cast<std::size_t>(tr.i) * topo.k + tr.h) * topo.k + tr.j] =
                row[2 + static_cast<std::size_t>(topo.k) + x];
        }
        f.cap_clamped.assign(f.m_ihj.size(), 0);
        f.rescaled.assign(static_cast<std::size_t>(topo.k) * topo.k, 0);
        flows.push_back(std::move(f));
    }
    return flows;
}

Trajectory load_trajectory(const std::string& states_path, const std::string& flows_path, const Topology& topo,
                           double dt) {
    Trajectory traj;
    traj.dt = dt;
    traj.states = load_states(states_path, topo.k, dt);
    traj.flows = load_flows(flows_path, topo);
    if (traj.states.size() != traj.flows.size() + 1)
        throw IoError("artifacts " + states_path + " and " + flows_path + " disagree on step count");
    traj.injected.assign(traj.flows.size(), 0.0);
    return traj;
}

std::vector<SplitRates> load_split_rows(const CsvTable& t, const Topology& topo, std::size_t first_col,
                                        const std::string& path) {
    const auto triples = transfer_triples(topo);
    check_columns(t, first_col + triples.size(), path);
    std::vector<SplitRates> out;
    for (const auto& row : t.rows) {
        SplitRates sr;
        sr.k = topo.k;
        sr.theta.assign(static_cast<std::size_t>(topo.k) * topo.k * topo.k, 0.0);
        for (int i = 0; i < topo.k; ++i) sr.at(i, i, i) = 1.0;
        for (std::size_t x = 0; x < triples.size(); ++x)
            sr.at(triples[x].i, triples[x].h, triples[x].j) = row[first_col + x];
        out.push_back(std::move(sr));
    }
    return out;
}

std::vector<CostMatrix> load_costs(const std::string& path, int k) {
    const CsvTable t = read_csv(path);
    check_columns(t, 2 + static_cast<std::size_t>(k) * k, path);
    std::vector<CostMatrix> out;
    for (const auto& row : t.rows) {
        CostMatrix c;
        c.k = k;
        c.c.assign(row.begin() + 2, row.end());
        out.push_back(std::move(c));
    }
    return out;
}

void require_artifact(const fs::path& p, const std::string& needed_by, const std::string& producer) {
    if (!fs::exists(p))
        throw IoError("stage '" + needed_by + "' needs " + p.filename().string() + "; run the '" + producer +
                      "' stage first");
}

// ---- manifest ---------------------------------------------------------------

json load_or_init_manifest(const fs::path& path) {
    if (fs::exists(path)) {
        std::ifstream in(path);
        json doc;
        try {
            in >> doc;
            if (doc.is_object()) return doc;
        } catch (const json::exception&) {
            // fall through: a broken manifest is rebuilt from scratch
        }
    }
    return json::object();
}

void describe_artifact(json& manifest, const std::string& stage, const std::string& file,
                       const std::string& columns) {
    manifest["stages"][stage]["artifacts"][file] = columns;
}

void save_manifest(const json& manifest, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("manifest: cannot open " + path.string());
    out << manifest.dump(1) << '\n';
    if (!out) throw IoError("manifest: write failed for " + path.string());
}

std::string triple_columns_doc() {
    return "transfer triples ordered by origin, then destination, then stop-over (1-based region ids)";
}

} // namespace

StageSet parse_stages(const std::string& list) {
    StageSet s;
    std::stringstream ss(list);
    std::string item;
    bool any = false;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        any = true;
        if (item == "all") {
            s.qdue = s.dso = s.train = s.priced = s.compare = true;
        } else if (item == "qdue") {
            s.qdue = true;
        } else if (item == "dso") {
            s.dso = true;
        } else if (item == "train") {
            s.train = true;
        } else if (item == "priced") {
            s.priced = true;
        } else if (item == "compare") {
            s.compare = true;
        } else {
            throw ConfigError("unknown stage '" + item + "' (expected qdue, dso, train, priced, compare, all)");
        }
    }
    if (!any) throw ConfigError("no stages selected");
    return s;
}

std::vector<PwaMfd> build_pwa_set(const std::vector<RegionParams>& regions, int lines) {
    std::vector<PwaMfd> out;
    out.reserve(regions.size());
    for (const auto& r : regions) out.push_back(pwa_approximate(r.mfd, lines));
    return out;
}

void run_pipeline(const ScenarioConfig& cfg,
                  const std::string& config_bytes,
                  const std::string& out_dir,
                  const StageSet& stages) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    json manifest = load_or_init_manifest(dir / "manifest.json");
    manifest["format_version"] = 1;
    manifest["tool"] = "mrn";
    manifest["tool_version"] = kToolVersion;
    manifest["scenario"] = cfg.name;
    manifest["seed"] = cfg.seed;
    manifest["config_fingerprint"] = content_fingerprint(config_bytes);
    manifest["horizon_steps"] = cfg.steps();
    manifest["step_s"] = cfg.step_s;

    const int steps = cfg.steps();
    const double dt = cfg.step_s;

    if (stages.qdue) {
        const QdueRun run = run_qdue(cfg.topo, cfg.regions, cfg.demand, cfg.choice, steps, dt);
        write_csv((dir / "qdue_states.csv").string(), states_table(run.trajectory));
        write_csv((dir / "qdue_flows.csv").string(), flows_table(run.trajectory, cfg.topo));
        write_csv((dir / "qdue_splits.csv").string(), splits_table(run.splits, cfg.topo, dt));
        write_csv((dir / "qdue_costs.csv").string(), costs_table(run.costs, cfg.topo.k, dt));
        describe_artifact(manifest, "qdue", "qdue_states.csv",
                          "step, t_s, then per-cell accumulations n_i_j (vehicles in i destined for j)");
        describe_artifact(manifest, "qdue", "qdue_flows.csv",
                          "step, t_s, internal outflow mii_i, transfer flows m_i_h_j (" + triple_columns_doc() +
                              "), border flows b_i_h (veh/s)");
        describe_artifact(manifest, "qdue", "qdue_splits.csv", "step, t_s, split rates th_i_h_j (" +
                                                                   triple_columns_doc() + ")");
        describe_artifact(manifest, "qdue", "qdue_costs.csv",
                          "step, t_s, untolled generalized costs c_i_h (CHF, row-major)");
    }

    if (stages.dso) {
        const auto pwa = build_pwa_set(cfg.regions, cfg.pwa_lines);
        const LrhoResult res = run_lrho(cfg.topo, cfg.regions, cfg.demand, pwa, cfg.lrho, steps, dt);
        write_csv((dir / "dso_states.csv").string(), states_table(res.trajectory));
        write_csv((dir / "dso_flows.csv").string(), flows_table(res.trajectory, cfg.topo));
        CsvTable theta;
        {
            const auto triples = transfer_triples(cfg.topo);
            theta.header = {"cycle", "step", "t_s"};
            for (const auto& tr : triples)
                theta.header.push_back("th_" + label(tr.i) + "_" + label(tr.h) + "_" + label(tr.j));
            for (std::size_t c = 0; c < res.theta_schedule.size(); ++c) {
                const double step0 = static_cast<double>(c) * cfg.lrho.n_c;
                std::vector<double> row{static_cast<double>(c), step0, step0 * dt};
                for (const auto& tr : triples) row.push_back(res.theta_schedule[c].at(tr.i, tr.h, tr.j));
                theta.rows.push_back(std::move(row));
            }
        }
        write_csv((dir / "dso_theta.csv").string(), theta);
        CsvTable lp;
        lp.header = {"cycle", "step", "t_s", "objective", "lp_iterations"};
        for (std::size_t c = 0; c < res.objectives.size(); ++c) {
            const double step0 = static_cast<double>(c) * cfg.lrho.n_c;
            lp.rows.push_back({static_cast<double>(c), step0, step0 * dt, res.objectives[c],
                               static_cast<double>(res.lp_iterations[c])});
        }
        write_csv((dir / "dso_lp.csv").string(), lp);
        describe_artifact(manifest, "dso", "dso_states.csv", "step, t_s, per-cell accumulations n_i_j");
        describe_artifact(manifest, "dso", "dso_flows.csv",
                          "step, t_s, internal outflow mii_i, transfer flows m_i_h_j, border flows b_i_h (veh/s)");
        describe_artifact(manifest, "dso", "dso_theta.csv",
                          "cycle, first step, t_s, optimal split rates th_i_h_j held for the cycle");
        describe_artifact(manifest, "dso", "dso_lp.csv", "cycle, first step, t_s, LP objective, simplex pivots");
    }

    if (stages.train) {
        require_artifact(dir / "qdue_states.csv", "train", "qdue");
        require_artifact(dir / "qdue_flows.csv", "train", "qdue");
        require_artifact(dir / "qdue_splits.csv", "train", "qdue");
        require_artifact(dir / "qdue_costs.csv", "train", "qdue");
        QdueRun run;
        run.trajectory =
            load_trajectory((dir / "qdue_states.csv").string(), (dir / "qdue_flows.csv").string(), cfg.topo, dt);
        const CsvTable sp = read_csv((dir / "qdue_splits.csv").string());
        run.splits = load_split_rows(sp, cfg.topo, 2, (dir / "qdue_splits.csv").string());
        run.costs = load_costs((dir / "qdue_costs.csv").string(), cfg.topo.k);
        if (run.trajectory.steps() != steps)
            throw IoError("qdue artifacts cover " + std::to_string(run.trajectory.steps()) +
                          " steps but the config asks for " + std::to_string(steps) + "; rerun the qdue stage");

        const PricingData data = build_dataset(run, cfg.topo, cfg.regions, cfg.seed);
        const TrainedModels trained = train_models(data, cfg.hidden_sizes, cfg.training, cfg.seed);
        save_models(trained.set, (dir / "models.json").string());

        CsvTable hist;
        hist.header = {"from_region", "to_region", "epoch", "train_mae", "val_mae"};
        CsvTable report;
        report.header = {"from_region", "to_region", "test_mae", "first_val_mae", "last_val_mae"};
        for (std::size_t p = 0; p < trained.set.models.size(); ++p) {
            const auto& pm = trained.set.models[p];
            const auto& h = trained.reports[p].history;
            for (std::size_t e = 0; e < h.train_mae.size(); ++e)
                hist.rows.push_back({static_cast<double>(pm.i + 1), static_cast<double>(pm.h + 1),
                                     static_cast<double>(e + 1), h.train_mae[e], h.val_mae[e]});
            report.rows.push_back({static_cast<double>(pm.i + 1), static_cast<double>(pm.h + 1),
                                   trained.reports[p].test_mae, h.val_mae.empty() ? 0.0 : h.val_mae.front(),
                                   h.val_mae.empty() ? 0.0 : h.val_mae.back()});
        }
        write_csv((dir / "loss_history.csv").string(), hist);
        write_csv((dir / "train_report.csv").string(), report);
        describe_artifact(manifest, "train", "models.json",
                          "per border pair: scaler bounds, layer sizes, weights, biases");
        describe_artifact(manifest, "train", "loss_history.csv",
                          "from_region, to_region, epoch, train MAE, validation MAE (CHF)");
        describe_artifact(manifest, "train", "train_report.csv",
                          "from_region, to_region, held-out test MAE, first/last validation MAE (CHF)");
        manifest["stages"]["train"]["samples"] = static_cast<int>(data.features.size());
        manifest["stages"]["train"]["train_samples"] = static_cast<int>(data.n_train);
    }

    if (stages.priced) {
        require_artifact(dir / "models.json", "priced", "train");
        require_artifact(dir / "dso_states.csv", "priced", "dso");
        require_artifact(dir / "dso_flows.csv", "priced", "dso");
        require_artifact(dir / "dso_theta.csv", "priced", "dso");
        const ModelSet set = load_models((dir / "models.json").string());
        LrhoResult reference;
        reference.trajectory =
            load_trajectory((dir / "dso_states.csv").string(), (dir / "dso_flows.csv").string(), cfg.topo, dt);
        const CsvTable th = read_csv((dir / "dso_theta.csv").string());
        reference.theta_schedule = load_split_rows(th, cfg.topo, 3, (dir / "dso_theta.csv").string());
        if (reference.trajectory.steps() != steps)
            throw IoError("dso artifacts cover " + std::to_string(reference.trajectory.steps()) +
                          " steps but the config asks for " + std::to_string(steps) + "; rerun the dso stage");

        const PricedRun priced =
            run_priced(cfg.topo, cfg.regions, cfg.demand, cfg.choice, reference, set, cfg.lrho, steps, dt);
        write_csv((dir / "priced_states.csv").string(), states_table(priced.run.trajectory));
        write_csv((dir / "priced_flows.csv").string(), flows_table(priced.run.trajectory, cfg.topo));
        write_csv((dir / "priced_splits.csv").string(), splits_table(priced.run.splits, cfg.topo, dt));

        const auto pairs = ordered_border_pairs(cfg.topo);
        CsvTable prices;
        prices.header = {"step", "t_s"};
        for (const auto& [i, h] : pairs) prices.header.push_back("p_" + label(i) + "_" + label(h));
        for (std::size_t s = 0; s < priced.run.prices.size(); ++s) {
            std::vector<double> row{static_cast<double>(s), static_cast<double>(s) * dt};
            for (const auto& [i, h] : pairs) row.push_back(priced.run.prices[s].at(i, h));
            prices.rows.push_back(std::move(row));
        }
        write_csv((dir / "priced_prices.csv").string(), prices);

        CsvTable cyc;
        cyc.header = {"cycle", "step", "t_s", "coverage"};
        for (const auto& [i, h] : pairs) cyc.header.push_back("p_" + label(i) + "_" + label(h));
        for (std::size_t c = 0; c < priced.cycle_prices.size(); ++c) {
            const double step0 = static_cast<double>(c) * cfg.lrho.n_c;
            std::vector<double> row{static_cast<double>(c), step0, step0 * dt, priced.cycle_coverage[c]};
            for (const auto& [i, h] : pairs) row.push_back(priced.cycle_prices[c].at(i, h));
            cyc.rows.push_back(std::move(row));
        }
        write_csv((dir / "priced_cycles.csv").string(), cyc);

        double cov_mean = 0.0;
        double cov_min = 1.0;
        for (double c : priced.cycle_coverage) {
            cov_mean += c;
            cov_min = std::min(cov_min, c);
        }
        cov_mean /= priced.cycle_coverage.empty() ? 1.0 : static_cast<double>(priced.cycle_coverage.size());
        describe_artifact(manifest, "priced", "priced_states.csv", "step, t_s, per-cell accumulations n_i_j");
        describe_artifact(manifest, "priced", "priced_flows.csv",
                          "step, t_s, internal outflow mii_i, transfer flows m_i_h_j, border flows b_i_h (veh/s)");
        describe_artifact(manifest, "priced", "priced_splits.csv",
                          "step, t_s, tolled split rates th_i_h_j");
        describe_artifact(manifest, "priced", "priced_prices.csv", "step, t_s, applied tolls p_i_h (CHF)");
        describe_artifact(manifest, "priced", "priced_cycles.csv",
                          "cycle, first step, t_s, feature coverage of the training range, held tolls p_i_h (CHF)");
        manifest["stages"]["priced"]["feature_coverage_mean"] = cov_mean;
        manifest["stages"]["priced"]["feature_coverage_min"] = cov_min;
    }

    if (stages.compare) {
        const char* names[3] = {"qdue", "dso", "priced"};
        for (const char* n : names) {
            require_artifact(dir / (std::string(n) + "_states.csv"), "compare", n[0] == 'p' ? "priced" : n);
            require_artifact(dir / (std::string(n) + "_flows.csv"), "compare", n[0] == 'p' ? "priced" : n);
        }
        std::vector<MetricsReport> reports;
        for (const char* n : names) {
            const Trajectory traj = load_trajectory((dir / (std::string(n) + "_states.csv")).string(),
                                                    (dir / (std::string(n) + "_flows.csv")).string(), cfg.topo, dt);
            reports.push_back(compute_metrics(traj, cfg.regions));
        }

        CsvTable metrics;
        metrics.header = {"run_id"};
        for (int i = 0; i < cfg.topo.k; ++i) metrics.header.push_back("ts_" + label(i) + "_veh_h");
        metrics.header.insert(metrics.header.end(),
                              {"tts_veh_h", "ttd_veh_km", "served_veh", "final_accumulation_veh"});
        for (std::size_t r = 0; r < reports.size(); ++r) {
            std::vector<double> row{static_cast<double>(r)};
            row.insert(row.end(), reports[r].ts_per_region.begin(), reports[r].ts_per_region.end());
            row.insert(row.end(), {reports[r].tts, reports[r].ttd, reports[r].served,
                                   reports[r].final_accumulation});
            metrics.rows.push_back(std::move(row));
        }
        write_csv((dir / "metrics.csv").string(), metrics);

        const double volume = total_volume(cfg.demand);
        CsvTable conservation;
        conservation.header = {"run_id", "served_veh", "demand_veh", "relative_gap", "final_accumulation_veh"};
        for (std::size_t r = 0; r < reports.size(); ++r)
            conservation.rows.push_back({static_cast<double>(r), reports[r].served, volume,
                                         volume > 0.0 ? (reports[r].served - volume) / volume : 0.0,
                                         reports[r].final_accumulation});
        write_csv((dir / "conservation.csv").string(), conservation);

        const auto emit_cmp = [&](const MetricsReport& base, const MetricsReport& variant,
                                  const std::string& variant_name, const std::string& stem) {
            const auto rows = compare_reports(base, variant);
            CsvTable t;
            t.header = {"metric_id", "baseline", "variant", "improvement_pct"};
            for (std::size_t r = 0; r < rows.size(); ++r)
                t.rows.push_back({static_cast<double>(r + 1), rows[r].baseline, rows[r].variant,
                                  rows[r].improvement_pct});
            write_csv((dir / (stem + ".csv")).string(), t);
            std::ofstream txt(dir / (stem + ".txt"), std::ios::binary);
            if (!txt) throw IoError("cannot write " + stem + ".txt");
            txt << comparison_text(rows, "qdue", variant_name);
        };
        emit_cmp(reports[0], reports[1], "dso", "comparison_dso");
        emit_cmp(reports[0], reports[2], "priced", "comparison_priced");

        if (fs::exists(dir / "priced_cycles.csv")) {
            const CsvTable cyc = read_csv((dir / "priced_cycles.csv").string());
            const auto pairs = ordered_border_pairs(cfg.topo);
            std::vector<PriceMatrix> cycle_prices;
            for (const auto& row : cyc.rows) {
                PriceMatrix pm = zero_prices(cfg.topo.k);
                for (std::size_t p = 0; p < pairs.size(); ++p)
                    pm.at(pairs[p].first, pairs[p].second) = row[4 + p];
                cycle_prices.push_back(std::move(pm));
            }
            const PriceSummary summary = summarize_prices(cycle_prices, pairs);
            CsvTable pt;
            pt.header = {"from_region", "to_region", "average_active_chf", "active_cycles"};
            for (std::size_t p = 0; p < pairs.size(); ++p)
                pt.rows.push_back({static_cast<double>(pairs[p].first + 1), static_cast<double>(pairs[p].second + 1),
                                   summary.average_active[p], static_cast<double>(summary.active_cycles[p])});
            pt.rows.push_back({0.0, 0.0, summary.overall_average_active,
                               static_cast<double>(summary.total_active)});
            write_csv((dir / "price_summary.csv").string(), pt);
            describe_artifact(manifest, "compare", "price_summary.csv",
                              "per border pair: mean active toll and active-cycle count; final row (0,0) is the "
                              "overall mean over active tolls");
        }

        describe_artifact(manifest, "compare", "metrics.csv",
                          "run_id 0=qdue 1=dso 2=priced; per-region time spent, TTS, TTD, vehicles served");
        describe_artifact(manifest, "compare", "conservation.csv",
                          "run_id, vehicles served vs integrated demand, relative gap, vehicles left at the end");
        describe_artifact(manifest, "compare", "comparison_dso.csv",
                          "metric_id 1..k=TS_i, k+1=TTS, k+2=TTD, k+3=N; baseline qdue vs dso, improvement percent");
        describe_artifact(manifest, "compare", "comparison_priced.csv",
                          "metric_id as in comparison_dso.csv; baseline qdue vs priced");
    }

    save_manifest(manifest, dir / "manifest.json");
}

void emit_plot_data(const ScenarioConfig& cfg, const std::string& out_dir) {
    const fs::path dir(out_dir);
    const double dt = cfg.step_s;
    json manifest = load_or_init_manifest(dir / "manifest.json");
    const char* names[3] = {"qdue", "dso", "priced"};

    bool any = false;
    std::vector<std::string> emitted;

    // Region accumulations with the critical level alongside, per run.
    for (const char* n : names) {
        const fs::path src = dir / (std::string(n) + "_states.csv");
        if (!fs::exists(src)) continue;
        any = true;
        const auto states = load_states(src.string(), cfg.topo.k, dt);
        CsvTable t;
        t.header = {"step", "t_s"};
        for (int i = 0; i < cfg.topo.k; ++i) t.header.push_back("n_" + label(i));
        for (int i = 0; i < cfg.topo.k; ++i) t.header.push_back("ncrit_" + label(i));
        for (std::size_t s = 0; s < states.size(); ++s) {
            std::vector<double> row{static_cast<double>(s), static_cast<double>(s) * dt};
            for (int i = 0; i < cfg.topo.k; ++i) row.push_back(region_total(states[s], i));
            for (int i = 0; i < cfg.topo.k; ++i) row.push_back(cfg.regions[static_cast<std::size_t>(i)].critical);
            t.rows.push_back(std::move(row));
        }
        const std::string file = "plot_accumulation_" + std::string(n) + ".csv";
        write_csv((dir / file).string(), t);
        emitted.push_back(file);
    }

    // Cumulative trip endings for every run with flow records.
    {
        CsvTable t;
        t.header = {"step", "t_s"};
        std::vector<std::vector<double>> cums;
        std::size_t rows = 0;
        for (const char* n : names) {
            const fs::path src = dir / (std::string(n) + "_flows.csv");
            if (!fs::exists(src)) continue;
            const auto flows = load_flows(src.string(), cfg.topo);
            std::vector<double> cum;
            double acc = 0.0;
            for (const auto& f : flows) {
                for (int i = 0; i < cfg.topo.k; ++i) acc += f.m_ii[static_cast<std::size_t>(i)] * dt;
                cum.push_back(acc);
            }
            t.header.push_back("cum_endings_" + std::string(n));
            rows = std::max(rows, cum.size());
            cums.push_back(std::move(cum));
        }
        if (!cums.empty()) {
            any = true;
            for (std::size_t s = 0; s < rows; ++s) {
                std::vector<double> row{static_cast<double>(s), static_cast<double>(s) * dt};
                for (const auto& cum : cums) row.push_back(s < cum.size() ? cum[s] : cum.back());
                t.rows.push_back(std::move(row));
            }
            write_csv((dir / "plot_trip_endings.csv").string(), t);
            emitted.push_back("plot_trip_endings.csv");
        }
    }

    // Long-format split comparison between the equilibrium and optimal runs.
    if (fs::exists(dir / "qdue_splits.csv") && fs::exists(dir / "dso_theta.csv")) {
        any = true;
        const CsvTable qs = read_csv((dir / "qdue_splits.csv").string());
        const CsvTable th = read_csv((dir / "dso_theta.csv").string());
        const auto qdue_splits = load_split_rows(qs, cfg.topo, 2, (dir / "qdue_splits.csv").string());
        const auto dso_theta = load_split_rows(th, cfg.topo, 3, (dir / "dso_theta.csv").string());
        const auto triples = transfer_triples(cfg.topo);
        CsvTable t;
        t.header = {"step", "t_s", "origin", "stopover", "destination", "theta_qdue", "theta_dso"};
        for (std::size_t s = 0; s < qdue_splits.size(); ++s) {
            const std::size_t cycle = std::min(dso_theta.size() - 1, s / static_cast<std::size_t>(cfg.lrho.n_c));
            for (const auto& tr : triples)
                t.rows.push_back({static_cast<double>(s), static_cast<double>(s) * dt,
                                  static_cast<double>(tr.i + 1), static_cast<double>(tr.h + 1),
                                  static_cast<double>(tr.j + 1), qdue_splits[s].at(tr.i, tr.h, tr.j),
                                  dso_theta[cycle].at(tr.i, tr.h, tr.j)});
        }
        write_csv((dir / "plot_split_comparison.csv").string(), t);
        emitted.push_back("plot_split_comparison.csv");
    }

    // Loss curves and price series are already tabular; re-emit under plot names.
    if (fs::exists(dir / "loss_history.csv")) {
        any = true;
        write_csv((dir / "plot_loss_curves.csv").string(), read_csv((dir / "loss_history.csv").string()));
        emitted.push_back("plot_loss_curves.csv");
    }
    if (fs::exists(dir / "priced_prices.csv")) {
        any = true;
        write_csv((dir / "plot_prices.csv").string(), read_csv((dir / "priced_prices.csv").string()));
        emitted.push_back("plot_prices.csv");
    }

    if (!any) throw IoError("emit-plots: no stage artifacts found in " + out_dir);

    for (const auto& f : emitted) manifest["stages"]["plots"]["artifacts"][f] = "derived plot data";
    save_manifest(manifest, dir / "manifest.json");
}

} // namespace mrn

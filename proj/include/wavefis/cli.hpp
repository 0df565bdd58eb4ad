#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wavefis/config_file.hpp"
#include "wavefis/csv.hpp"
#include "wavefis/datagen.hpp"
#include "wavefis/metrics.hpp"
#include "wavefis/model_io.hpp"
#include "wavefis/training.hpp"

namespace wavefis {

namespace cli_detail {

inline WindowDataset dataset_for_model(const std::vector<HouseholdPanel>& panels,
                                       const std::vector<std::string>& channel_names,
                                       const ModelState& model) {
    if (channel_names != model.config.channel_names)
        fail(Errc::dimension_mismatch, "data channels do not match the model's channels");
    const std::string regression_channel =
        model.config.task == Task::regression ? model.config.target_channel : channel_names[0];
    return to_dataset(panels, model.config.window, model.config.horizon, model.config.task,
                      model.config.depth, channel_names, regression_channel);
}

inline std::vector<double> score_windows(const WindowDataset& dataset, const ModelState& model) {
    std::vector<double> out;
    out.reserve(dataset.windows.size());
    for (const SupervisedWindow& w : dataset.windows)
        out.push_back(forward(w, model).prediction);
    return out;
}

inline std::vector<double> window_targets(const WindowDataset& dataset) {
    std::vector<double> out;
    out.reserve(dataset.windows.size());
    for (const SupervisedWindow& w : dataset.windows) out.push_back(w.target);
    return out;
}

/// Maps per-window scores onto (panel index, window-end day) records for the
/// DAI sweep.
inline std::vector<WindowScore> to_window_scores(const WindowDataset& dataset,
                                                 const std::vector<double>& scores,
                                                 const std::vector<HouseholdPanel>& panels) {
    std::vector<WindowScore> out;
    out.reserve(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        int panel_idx = -1;
        for (size_t p = 0; p < panels.size(); ++p)
            if (panels[p].household_id == dataset.meta[i].household_id) {
                panel_idx = static_cast<int>(p);
                break;
            }
        if (panel_idx < 0) fail(Errc::dimension_mismatch, "window household not in panel list");
        out.push_back(WindowScore{panel_idx, dataset.meta[i].start + dataset.window - 1,
                                  scores[i]});
    }
    return out;
}

inline int cmd_generate(const std::string& config_path, const std::string& out_path,
                        GenConfig cfg, const CLI::App& sub) {
    if (!config_path.empty()) {
        // config file fills in whatever was not given as a flag
        const ConfigFile file = ConfigFile::parse_file(config_path);
        auto flag_given = [&sub](const std::string& name) { return sub.count(name) > 0; };
        if (!flag_given("--households"))
            cfg.n_households = static_cast<int>(file.get_int("n_households", cfg.n_households));
        if (!flag_given("--days"))
            cfg.n_days = static_cast<int>(file.get_int("n_days", cfg.n_days));
        if (!flag_given("--fraud-rate"))
            cfg.fraud_rate = file.get_double("fraud_rate", cfg.fraud_rate);
        if (!flag_given("--income-low"))
            cfg.income_low = file.get_double("income_low", cfg.income_low);
        if (!flag_given("--income-high"))
            cfg.income_high = file.get_double("income_high", cfg.income_high);
        if (!flag_given("--seed"))
            cfg.seed = static_cast<uint64_t>(file.get_int("seed", static_cast<long>(cfg.seed)));
        if (!flag_given("--spike"))
            cfg.shock.spend_spike_factor =
                file.get_double("shock.spend_spike_factor", cfg.shock.spend_spike_factor);
        if (!flag_given("--post-drop"))
            cfg.shock.post_drop_factor =
                file.get_double("shock.post_drop_factor", cfg.shock.post_drop_factor);
        if (!flag_given("--recovery-days"))
            cfg.shock.recovery_days =
                static_cast<int>(file.get_int("shock.recovery_days", cfg.shock.recovery_days));
        if (!flag_given("--debt-drift"))
            cfg.shock.debt_drift = file.get_double("shock.debt_drift", cfg.shock.debt_drift);
    }
    const std::vector<HouseholdPanel> panels = generate(cfg);
    write_panels_csv(out_path, panels);
    std::printf("wrote %d households x %d days to %s\n", cfg.n_households, cfg.n_days,
                out_path.c_str());
    return 0;
}

struct TrainCli {
    std::string data, out, report, config_path;
    std::string task = "classification";
    std::string basis = "haar";
    bool basis_sweep = false;
    int window = 32, horizon = 1, depth = 2, rules = 16, dk = 8, dv = 8;
    int epochs = 50, batch_size = 128, patience = 10;
    double lr = 1e-3, ridge = 1e-6, val_fraction = 0.2;
    long seed = 0;
    std::string target_channel = "spend_total";
};

inline int cmd_train(TrainCli opts, const CLI::App& sub) {
    TrainConfig tc;
    ArchConfig arch;
    // config file first, explicit flags override it
    if (!opts.config_path.empty()) {
        const ConfigFile file = ConfigFile::parse_file(opts.config_path);
        auto flag_given = [&sub](const std::string& name) { return sub.count(name) > 0; };
        if (!flag_given("--task")) opts.task = file.get_string("task", opts.task);
        if (!flag_given("--window"))
            opts.window = static_cast<int>(file.get_int("window", opts.window));
        if (!flag_given("--horizon"))
            opts.horizon = static_cast<int>(file.get_int("horizon", opts.horizon));
        if (!flag_given("--depth")) opts.depth = static_cast<int>(file.get_int("depth", opts.depth));
        if (!flag_given("--rules")) opts.rules = static_cast<int>(file.get_int("rules", opts.rules));
        if (!flag_given("--dk")) opts.dk = static_cast<int>(file.get_int("key_dim", opts.dk));
        if (!flag_given("--dv")) opts.dv = static_cast<int>(file.get_int("value_dim", opts.dv));
        if (!flag_given("--epochs"))
            opts.epochs = static_cast<int>(file.get_int("epochs", opts.epochs));
        if (!flag_given("--lr")) opts.lr = file.get_double("learning_rate", opts.lr);
        if (!flag_given("--batch-size"))
            opts.batch_size = static_cast<int>(file.get_int("batch_size", opts.batch_size));
        if (!flag_given("--ridge")) opts.ridge = file.get_double("ridge_lambda", opts.ridge);
        if (!flag_given("--seed")) opts.seed = file.get_int("seed", opts.seed);
        if (!flag_given("--val-fraction"))
            opts.val_fraction = file.get_double("validation_fraction", opts.val_fraction);
        if (!flag_given("--patience"))
            opts.patience = static_cast<int>(file.get_int("early_stop_patience", opts.patience));
        if (!flag_given("--target-channel"))
            opts.target_channel = file.get_string("target_channel", opts.target_channel);
        if (!flag_given("--basis") && !opts.basis_sweep)
            opts.basis = file.get_string("basis", opts.basis);
        if (!opts.basis_sweep && file.has("basis_candidates")) {
            tc.basis_candidates = file.get_string_list("basis_candidates", {opts.basis});
        } else {
            tc.basis_candidates = {opts.basis};
        }
    } else {
        tc.basis_candidates = {opts.basis};
    }
    if (opts.basis_sweep) tc.basis_candidates = wavelet_basis_names();

    tc.task = parse_task(opts.task);
    tc.epochs = opts.epochs;
    tc.learning_rate = opts.lr;
    tc.batch_size = opts.batch_size;
    tc.ridge_lambda = opts.ridge;
    tc.seed = static_cast<uint64_t>(opts.seed);
    tc.validation_fraction = opts.val_fraction;
    tc.early_stop_patience = opts.patience;
    arch.depth = opts.depth;
    arch.key_dim = opts.dk;
    arch.value_dim = opts.dv;
    arch.rule_count = opts.rules;

    const std::vector<HouseholdPanel> panels = read_panels_csv(opts.data);
    const std::vector<std::string> names = csv_channel_names(opts.data);
    const WindowDataset dataset = to_dataset(panels, opts.window, opts.horizon, tc.task,
                                             arch.depth, names, opts.target_channel);

    auto [model, report] = train(dataset, arch, tc);
    save_model(model, opts.out);
    if (!opts.report.empty()) write_report_csv(opts.report, report);

    std::printf("trained %s model on %zu windows (%zu households)\n", task_name(tc.task),
                dataset.windows.size(), panels.size());
    std::printf("chosen basis: %s\n", report.chosen_basis.c_str());
    for (const auto& [basis, val] : report.per_basis_val)
        std::printf("  %-6s best val loss %.6g\n", basis.c_str(), val);
    std::printf("epochs run: %d (best %d), final train loss %.6g, val loss %.6g\n",
                report.epochs_run, report.best_epoch, report.final_train_loss,
                report.final_val_loss);
    std::printf("wall time: %.1f s\n", report.wall_seconds);
    std::printf("model written to %s\n", opts.out.c_str());
    return 0;
}

inline int cmd_predict(const std::string& model_path, const std::string& data_path,
                       const std::string& out_path) {
    const ModelState model = load_model(model_path);
    const std::vector<HouseholdPanel> panels = read_panels_csv(data_path);
    const WindowDataset dataset = dataset_for_model(panels, csv_channel_names(data_path), model);
    const std::vector<double> scores = score_windows(dataset, model);
    write_scores_csv(out_path, dataset.meta, window_targets(dataset), scores, dataset.window);
    std::printf("wrote %zu window scores to %s\n", scores.size(), out_path.c_str());
    return 0;
}

inline int cmd_eval(const std::string& model_path, const std::string& data_path,
                    const std::string& out_dir, int dai_window) {
    const ModelState model = load_model(model_path);
    const std::vector<HouseholdPanel> panels = read_panels_csv(data_path);
    const WindowDataset dataset = dataset_for_model(panels, csv_channel_names(data_path), model);
    const std::vector<double> scores = score_windows(dataset, model);
    const std::vector<double> targets = window_targets(dataset);

    std::filesystem::create_directories(out_dir);
    const std::string summary_path = out_dir + "/summary.txt";
    std::ofstream summary(summary_path, std::ios::binary);
    if (!summary) fail(Errc::invalid_config, "cannot open '" + summary_path + "' for writing");
    summary << "task=" << task_name(model.config.task) << "\n";
    summary << "n_windows=" << dataset.windows.size() << "\n";

    if (model.config.task == Task::classification) {
        const RocCurve curve = roc_auc(scores, targets);
        write_roc_csv(out_dir + "/roc.csv", curve);
        const double f1_half = f1(scores, targets, 0.5);
        std::vector<double> thresholds;
        for (int i = 1; i <= 9; ++i) thresholds.push_back(i / 10.0);
        const DaiSweep sweep =
            dai_sweep(panels, to_window_scores(dataset, scores, panels), thresholds, dai_window);
        write_dai_csv(out_dir + "/dai.csv", sweep);
        summary << "auc=" << format_double(curve.auc) << "\n";
        summary << "f1_at_0.5=" << format_double(f1_half) << "\n";
        std::printf("auc %.4f, f1@0.5 %.4f on %zu windows; curves in %s\n", curve.auc, f1_half,
                    scores.size(), out_dir.c_str());
    } else {
        const double model_rmse = rmse(scores, targets);
        double mean = 0.0;
        for (double t : targets) mean += t;
        mean /= static_cast<double>(targets.size());
        const std::vector<double> baseline(targets.size(), mean);
        const double baseline_rmse = rmse(baseline, targets);
        summary << "rmse=" << format_double(model_rmse) << "\n";
        summary << "baseline_rmse=" << format_double(baseline_rmse) << "\n";
        summary << "rmse_ratio=" << format_double(model_rmse / baseline_rmse) << "\n";
        std::printf("rmse %.6g (constant-mean baseline %.6g, ratio %.3f) on %zu windows\n",
                    model_rmse, baseline_rmse, model_rmse / baseline_rmse, scores.size());
    }
    return 0;
}

inline int cmd_explain(const std::string& model_path) {
    const ModelState model = load_model(model_path);
    std::printf("%s model: basis %s, depth %d, %d rules over %d pooled dims\n",
                task_name(model.config.task), model.config.basis.c_str(), model.config.depth,
                model.rules.rule_count(), model.rules.input_dim());
    for (int i = 0; i < model.rules.rule_count(); ++i) {
        std::string line = "rule " + std::to_string(i) + ": centers=[";
        auto append = [&line](const Matrix& m, int row) {
            for (int j = 0; j < m.cols(); ++j) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.4g", m(row, j));
                line += buf;
                if (j + 1 < m.cols()) line += ", ";
            }
        };
        append(model.rules.centers, i);
        line += "] spreads=[";
        append(model.rules.spreads, i);
        line += "] p=[";
        append(model.rules.coeffs, i);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", model.rules.biases[i]);
        line += std::string("] r=") + buf;
        std::printf("%s\n", line.c_str());
    }
    return 0;
}

}  // namespace cli_detail

/// CLI entry point. Returns 0 on success, 1 on usage errors, 2 on data or
/// model errors; never throws out of malformed input files.
inline int run_command(std::vector<std::string> args) {
    CLI::App app{"wavelet + attention + Takagi-Sugeno fuzzy model for household fraud impact"};
    app.name("wavefis");
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic household panel CSV");
    GenConfig gen_cfg;
    std::string gen_config_path, gen_out;
    long gen_seed = 0;
    gen->add_option("--config", gen_config_path, "config file (key = value)");
    gen->add_option("--out", gen_out, "output CSV path")->required();
    gen->add_option("--households", gen_cfg.n_households, "number of households");
    gen->add_option("--days", gen_cfg.n_days, "days per household");
    gen->add_option("--fraud-rate", gen_cfg.fraud_rate, "fraction of households hit by fraud");
    gen->add_option("--income-low", gen_cfg.income_low, "income band low (USD/year)");
    gen->add_option("--income-high", gen_cfg.income_high, "income band high (USD/year)");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--spike", gen_cfg.shock.spend_spike_factor, "episode spend multiplier");
    gen->add_option("--post-drop", gen_cfg.shock.post_drop_factor, "recovery spend multiplier");
    gen->add_option("--recovery-days", gen_cfg.shock.recovery_days, "recovery stretch length");
    gen->add_option("--debt-drift", gen_cfg.shock.debt_drift, "recovery balance drift (USD/day)");

    // train
    auto* tr = app.add_subcommand("train", "train a model from a panel CSV");
    cli_detail::TrainCli tr_opts;
    tr->add_option("--data", tr_opts.data, "input CSV")->required();
    tr->add_option("--out", tr_opts.out, "output model path")->required();
    tr->add_option("--task", tr_opts.task, "regression|classification");
    tr->add_option("--config", tr_opts.config_path, "config file (key = value)");
    tr->add_option("--window", tr_opts.window, "input window length");
    tr->add_option("--horizon", tr_opts.horizon, "target horizon");
    tr->add_option("--depth", tr_opts.depth, "wavelet decomposition depth");
    tr->add_option("--basis", tr_opts.basis, "wavelet basis (haar|db2|db4|coif1)");
    tr->add_flag("--basis-sweep", tr_opts.basis_sweep, "search all four bases on validation loss");
    tr->add_option("--rules", tr_opts.rules, "fuzzy rule count");
    tr->add_option("--dk", tr_opts.dk, "attention key dimension");
    tr->add_option("--dv", tr_opts.dv, "attention value dimension");
    tr->add_option("--epochs", tr_opts.epochs, "training epochs");
    tr->add_option("--lr", tr_opts.lr, "learning rate");
    tr->add_option("--batch-size", tr_opts.batch_size, "minibatch size");
    tr->add_option("--ridge", tr_opts.ridge, "consequent ridge lambda");
    tr->add_option("--seed", tr_opts.seed, "training seed");
    tr->add_option("--val-fraction", tr_opts.val_fraction, "validation fraction");
    tr->add_option("--patience", tr_opts.patience, "early stopping patience");
    tr->add_option("--target-channel", tr_opts.target_channel,
                   "regression target channel (volatility source)");
    tr->add_option("--report", tr_opts.report, "write per-epoch loss curves CSV");

    // predict
    auto* pr = app.add_subcommand("predict", "score every window of a panel CSV");
    std::string pr_model, pr_data, pr_out;
    pr->add_option("--model", pr_model, "model path")->required();
    pr->add_option("--data", pr_data, "input CSV")->required();
    pr->add_option("--out", pr_out, "output scores CSV")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a model and write metric CSVs");
    std::string ev_model, ev_data, ev_dir;
    int ev_dai_window = 14;
    ev->add_option("--model", ev_model, "model path")->required();
    ev->add_option("--data", ev_data, "input CSV")->required();
    ev->add_option("--out-dir", ev_dir, "output directory")->required();
    ev->add_option("--dai-window", ev_dai_window, "DAI slope window (days)");

    // explain
    auto* ex = app.add_subcommand("explain", "print the fuzzy rule base");
    std::string ex_model;
    ex->add_option("--model", ex_model, "model path")->required();

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            gen_cfg.seed = static_cast<uint64_t>(gen_seed);
            return cli_detail::cmd_generate(gen_config_path, gen_out, gen_cfg, *gen);
        }
        if (tr->parsed()) return cli_detail::cmd_train(tr_opts, *tr);
        if (pr->parsed()) return cli_detail::cmd_predict(pr_model, pr_data, pr_out);
        if (ev->parsed()) return cli_detail::cmd_eval(ev_model, ev_data, ev_dir, ev_dai_window);
        if (ex->parsed()) return cli_detail::cmd_explain(ex_model);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}

}  // namespace wavefis

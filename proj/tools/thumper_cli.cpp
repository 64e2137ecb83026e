// Command-line front end: collect trial logs, select hyperparameters,
// evaluate policies and export campaign summaries.

#include "thumper/harness.hpp"
#include "thumper/model_selection.hpp"
#include "thumper/text_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace thumper;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kFile = 3, kConfig = 4, kFormat = 5 };

struct Common {
    std::string config_path;
    std::optional<std::string> task;
    std::optional<std::uint64_t> seed;
};

HarnessSettings load(const Common& c)
{
    HarnessSettings s = c.config_path.empty() ? HarnessSettings{} : load_settings(c.config_path);
    if (c.task)
        s.task = parse_task(*c.task);
    if (c.seed)
        s.seed = *c.seed;
    return s;
}

std::vector<double> parse_grid(const std::string& text, const char* what)
{
    std::vector<double> out;
    for (const auto& item : split(text, ','))
        out.push_back(parse_double(trim(item), what));
    return out;
}

std::string prefix_path(const std::string& dir, const std::string& policy, const char* kind)
{
    return (fs::path(dir) / (policy + "-" + kind + ".csv")).string();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Learning controller for an impulse-actuated die plate"};
    app.require_subcommand(1);

    Common collect_opts;
    std::size_t collect_n = 0;
    std::string collect_out;
    auto* collect_cmd = app.add_subcommand("collect", "Log random-policy trials");
    collect_cmd->add_option("--config", collect_opts.config_path, "Harness configuration file");
    collect_cmd->add_option("--n", collect_n, "Number of trials")->required();
    collect_cmd->add_option("--seed", collect_opts.seed, "Plate seed");
    collect_cmd->add_option("--out", collect_out, "Trial log to write")->required();

    Common select_opts;
    std::string select_log, select_out;
    std::string r_grid = "1,2,3,5,8,13", w_grid = "0,1,5,10";
    std::size_t folds = 10;
    auto* select_cmd = app.add_subcommand("select", "Cross-validated grid search over (r, w)");
    select_cmd->add_option("--config", select_opts.config_path, "Harness configuration file");
    select_cmd->add_option("--log", select_log, "Trial log")->required();
    select_cmd->add_option("--task", select_opts.task, "face-change or target-face");
    select_cmd->add_option("--r-grid", r_grid, "Comma-separated radii in mm");
    select_cmd->add_option("--w-grid", w_grid, "Comma-separated heading weights in mm/deg");
    select_cmd->add_option("--folds", folds, "Cross-validation folds");
    select_cmd->add_option("--seed", select_opts.seed, "Fold shuffle seed");
    select_cmd->add_option("--out", select_out, "Selection report to write")->required();

    Common eval_opts;
    std::string eval_log, eval_out_dir;
    std::optional<std::string> eval_policy;
    std::optional<std::size_t> eval_n;
    std::optional<double> eval_r, eval_w;
    auto* eval_cmd = app.add_subcommand("eval", "Run a goal campaign with one policy");
    eval_cmd->add_option("--config", eval_opts.config_path, "Harness configuration file");
    eval_cmd->add_option("--log", eval_log, "Trial log the learned policies are built from");
    eval_cmd->add_option("--policy", eval_policy, "random, greedy or mpc2");
    eval_cmd->add_option("--task", eval_opts.task, "face-change or target-face");
    eval_cmd->add_option("--n", eval_n, "Number of goals");
    eval_cmd->add_option("--seed", eval_opts.seed, "Campaign seed");
    eval_cmd->add_option("--r", eval_r, "Neighborhood radius in mm");
    eval_cmd->add_option("--w", eval_w, "Heading weight in mm/deg");
    eval_cmd->add_option("--out-dir", eval_out_dir, "Directory for <policy>-episodes.csv and <policy>-steps.csv")
        ->required();

    std::vector<std::string> campaigns;
    std::string report_out_dir;
    auto* report_cmd = app.add_subcommand("report", "Export curve, histogram and scatter files");
    report_cmd->add_option("--campaign", campaigns, "Campaign prefix (dir/policy) written by eval")->required();
    report_cmd->add_option("--out-dir", report_out_dir, "Directory for curve.csv, histogram.csv, scatter.csv")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*collect_cmd) {
            const HarnessSettings s = load(collect_opts);
            save_dataset(collect(s.plate, collect_n, s.seed), collect_out);
            std::cout << "wrote " << collect_n << " trials to " << collect_out << '\n';
        } else if (*select_cmd) {
            const HarnessSettings s = load(select_opts);
            SelectionOptions o;
            o.folds = folds;
            o.seed = s.seed;
            o.min_support = s.min_support;
            o.angle_mode = s.angle_mode;
            o.stratification = s.effective_stratification();
            const GoalsForTrial goals = s.task == Task::FaceChange ? face_change_goals() : target_face_goals();
            const auto sel = select_hyperparams(load_dataset(select_log), goals, parse_grid(r_grid, "--r-grid"),
                                                parse_grid(w_grid, "--w-grid"), o);
            write_file(select_out, selection_csv(sel));
            std::cout << "selected r=" << format_double(sel.r) << " w=" << format_double(sel.w) << '\n';
        } else if (*eval_cmd) {
            HarnessSettings s = load(eval_opts);
            if (eval_policy)
                s.policy = *eval_policy;
            if (eval_n)
                s.n_goals = *eval_n;
            if (eval_r)
                s.r = *eval_r;
            if (eval_w)
                s.w = *eval_w;
            std::shared_ptr<const NeighborModel> model;
            if (!eval_log.empty()) {
                const Hyperparams hp = s.hyperparams();
                model = std::make_shared<NeighborModel>(load_dataset(eval_log),
                                                        ScalarizedMetric{hp.w, s.angle_mode}, hp.r,
                                                        s.effective_stratification());
            }
            const PolicyKind policy = make_policy(s.policy, model, s);
            const CampaignOptions co{s.task, s.n_goals, {s.max_impulses, s.recovery_counts}};
            const CampaignReport rep = run_campaign(s.plate, policy, co, s.seed);
            fs::create_directories(eval_out_dir);
            write_file(prefix_path(eval_out_dir, rep.policy, "episodes"), episodes_csv(rep));
            write_file(prefix_path(eval_out_dir, rep.policy, "steps"), steps_csv(rep));
            std::cout << rep.policy << ' ' << task_name(rep.task) << ':';
            for (double p : rep.cumulative_success)
                std::cout << ' ' << format_double(p);
            std::cout << '\n';
        } else if (*report_cmd) {
            std::vector<CampaignReport> reports;
            for (const auto& prefix : campaigns)
                reports.push_back(
                    parse_campaign(read_file(prefix + "-episodes.csv"), read_file(prefix + "-steps.csv")));
            fs::create_directories(report_out_dir);
            write_file((fs::path(report_out_dir) / "curve.csv").string(), curve_csv(reports));
            write_file((fs::path(report_out_dir) / "histogram.csv").string(), histogram_csv(reports));
            write_file((fs::path(report_out_dir) / "scatter.csv").string(), scatter_csv(reports));
        }
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFile;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const ParseError& e) {
        std::cerr << "error: malformed input: " << e.what() << '\n';
        return kFormat;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kOk;
}

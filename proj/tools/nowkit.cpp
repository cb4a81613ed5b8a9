#include <CLI11.hpp>

#include "nowkit/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"nowkit: mixed-frequency nowcasting toolkit"};
    app.require_subcommand(1);

    nowkit::cli::Options opt;
    std::uint64_t seed = 0;
    int target_year = 0;
    std::string vintage, out, model, selection, catalog;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "run configuration (JSON)");
        sub->add_option("--out", out, "output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "run seed (overrides seed)");
        sub->add_option("--vintage", vintage, "data cutoff, YYYY-MM");
        sub->add_option("--target-year", target_year, "target year");
    };
    std::vector<CLI::App*> subs;
    auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        common(sub);
        subs.push_back(sub);
        return sub;
    };
    add("validate", "check data and config before a run");
    add("train", "fit a model and write model.json")->add_flag("--final", opt.final_fit, "fit on train + validation years");
    add("select", "random subset search + refinement; writes search.csv, selection.json");
    auto* backtest = add("backtest", "vintage backtest; writes metrics.csv");
    backtest->add_option("--schedule", opt.schedule, "checkpoint or trace")->check(CLI::IsMember({"checkpoint", "trace"}));
    backtest->add_option("--selection", selection, "selection.json to take the model from");
    auto* trace = add("trace", "nowcast over vintages for one year; writes trace_YYYY.csv");
    trace->add_option("--model", model, "model.json (default: fit from config on train + validation)");
    trace->add_option("--selection", selection, "selection.json to take the model from");
    add("classify", "feasibility labels for a catalog; writes catalog_labeled.csv")
        ->add_option("--catalog", catalog, "catalog CSV");
    for (auto* s : subs)
        if (s->get_name() == "train") s->add_option("--selection", selection, "selection.json to take the model from");

    CLI11_PARSE(app, argc, argv);

    CLI::App* chosen = app.get_subcommands().front();
    auto given = [&](const char* flag) { return chosen->count(flag) > 0; };
    if (given("--out")) opt.out_dir = out;
    if (given("--seed")) opt.seed = seed;
    if (given("--vintage")) opt.vintage = vintage;
    if (given("--target-year")) opt.target_year = target_year;
    if (!model.empty()) opt.model_path = model;
    if (!selection.empty()) opt.selection_path = selection;
    if (!catalog.empty()) opt.catalog_path = catalog;
    return nowkit::cli::run(chosen->get_name(), opt);
}

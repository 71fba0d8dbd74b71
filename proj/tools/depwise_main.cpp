#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "depwise/breadth.hpp"
#include "depwise/errors.hpp"
#include "depwise/io.hpp"
#include "depwise/model.hpp"
#include "depwise/props.hpp"
#include "depwise/taskgen.hpp"
#include "depwise/train.hpp"

namespace {

using namespace depwise;

NoiseKind parse_noise(const std::string& s) {
    auto kind = noise_from_string(s);
    if (!kind) throw ArgumentError("unknown noise kind: " + s +
                                   " (expected none|disconnected|irrelevant|supporting)");
    return *kind;
}

AggregatorKind parse_aggregator(const std::string& s) {
    auto kind = aggregator_from_string(s);
    if (!kind) throw ArgumentError("unknown aggregator: " + s +
                                   " (expected recurrent-gated|mean|max|sum-exact)");
    return *kind;
}

int run_gen(std::uint64_t seed, int k, const std::string& noise, int n,
            const std::string& out) {
    auto instances = generate(seed, k, parse_noise(noise), n);
    write_jsonl(out, instances);
    std::map<std::string, int> histogram;
    for (const auto& inst : instances) histogram[std::string(to_string(inst.gold))]++;
    std::cout << "wrote " << instances.size() << " instances to " << out << "\n";
    std::cout << "label histogram:\n";
    for (const auto& [label, count] : histogram) {
        std::cout << "  " << label << ": " << count << "\n";
    }
    return 0;
}

struct TrainFlags {
    std::string data;
    std::string val;
    std::string config;
    std::string out_ckpt = "checkpoint.json";
    std::string history = "history.csv";
    std::string resume;
    std::string aggregator = "recurrent-gated";
    int d = 64;
    std::uint64_t seed = 0;
    TrainConfig cfg;
};

void apply_config_file(const std::string& path, TrainConfig& cfg) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("config is not valid JSON: " + path + " (" + e.what() + ")");
    }
    if (j.contains("lr_engine")) cfg.lr_engine = j["lr_engine"].get<double>();
    if (j.contains("lr_embed")) cfg.lr_embed = j["lr_embed"].get<double>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("plateau_factor")) cfg.plateau_factor = j["plateau_factor"].get<double>();
    if (j.contains("plateau_patience")) cfg.plateau_patience = j["plateau_patience"].get<int>();
    if (j.contains("early_stop_patience")) {
        cfg.early_stop_patience = j["early_stop_patience"].get<int>();
    }
    if (j.contains("min_delta")) cfg.min_delta = j["min_delta"].get<double>();
    if (j.contains("max_epochs")) cfg.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
}

void split_validation(const std::vector<StoryInstance>& all,
                      std::vector<StoryInstance>& train_set,
                      std::vector<StoryInstance>& val_set) {
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (i % 10 == 9) {
            val_set.push_back(all[i]);
        } else {
            train_set.push_back(all[i]);
        }
    }
    if (val_set.empty() && !train_set.empty()) {
        val_set.push_back(train_set.back());
        train_set.pop_back();
    }
}

int run_train(const TrainFlags& flags) {
    TrainConfig cfg = flags.cfg;
    if (!flags.config.empty()) {
        TrainConfig from_file = flags.cfg;
        apply_config_file(flags.config, from_file);
        cfg = from_file;
    }
    cfg.seed = cfg.seed == 0 ? flags.seed : cfg.seed;

    std::vector<StoryInstance> train_set;
    std::vector<StoryInstance> val_set;
    auto data = read_jsonl(flags.data);
    if (flags.val.empty()) {
        split_validation(data, train_set, val_set);
    } else {
        train_set = std::move(data);
        val_set = read_jsonl(flags.val);
    }

    ModelParams params;
    if (!flags.resume.empty()) {
        Checkpoint ckpt = load_checkpoint(flags.resume);
        params = std::move(ckpt.params);
        if (ckpt.trainer) {
            cfg.start_epoch = ckpt.trainer->next_epoch;
            cfg.lr_engine = ckpt.trainer->lr_engine;
            cfg.lr_embed = ckpt.trainer->lr_embed;
        }
    } else {
        params = init_model(flags.d, parse_aggregator(flags.aggregator), flags.seed);
    }

    DepthTrainable trainable(params);
    auto tensors = params.parameters();
    std::vector<std::vector<double>> best_snapshot;
    auto on_best = [&](int, double) {
        best_snapshot.clear();
        best_snapshot.reserve(tensors.size());
        for (const auto& t : tensors) best_snapshot.push_back(t->data);
    };

    TrainResult result = train(trainable, train_set, val_set, cfg, on_best);

    if (!best_snapshot.empty()) {
        for (std::size_t i = 0; i < tensors.size(); ++i) tensors[i]->data = best_snapshot[i];
    }
    TrainerState state;
    state.next_epoch = result.history.empty() ? cfg.start_epoch
                                              : result.history.back().epoch + 1;
    state.lr_engine = result.final_lr_engine;
    state.lr_embed = result.final_lr_embed;
    save_checkpoint(flags.out_ckpt, params, state);
    write_history_csv(flags.history, result.history);

    std::cout << "trained " << result.history.size() << " epochs ("
              << train_set.size() << " train / " << val_set.size() << " val instances)\n";
    std::cout << "best validation loss " << result.best_val_loss << " at epoch "
              << result.best_epoch << (result.early_stopped ? " (early stop)" : "") << "\n";
    std::cout << "checkpoint: " << flags.out_ckpt << "\nhistory: " << flags.history << "\n";
    return 0;
}

void print_report(const EvalReport& report) {
    std::cout << "instances: " << report.total << ", accuracy: " << report.accuracy << "\n";
    std::cout << "per-k accuracy:\n";
    for (const auto& [k, acc] : report.per_k_accuracy) {
        std::cout << "  k=" << k << ": " << acc << "\n";
    }
    if (report.has_low) std::cout << "mean (k=1-5): " << report.mean_low << "\n";
    if (report.has_high) std::cout << "mean (k=6-10): " << report.mean_high << "\n";
    if (report.per_noise_accuracy.size() > 1) {
        std::cout << "per-noise accuracy:\n";
        for (const auto& [noise, acc] : report.per_noise_accuracy) {
            std::cout << "  " << noise << ": " << acc << "\n";
        }
    }
    std::cout << "runtime: " << report.runtime_seconds << " s\n";
}

int run_eval(const std::string& data_path, const std::string& ckpt_path, bool exact,
             const std::string& out_csv) {
    auto data = read_jsonl(data_path);
    EvalReport report;
    if (exact) {
        report = evaluate(
            [](const StoryInstance& inst) { return static_cast<int>(predict_exact(inst)); },
            data);
    } else {
        Checkpoint ckpt = load_checkpoint(ckpt_path);
        report = evaluate(
            [&](const StoryInstance& inst) { return model_predict(inst, ckpt.params); },
            data);
    }
    print_report(report);
    if (!out_csv.empty()) {
        write_eval_csv(out_csv, report);
        std::cout << "eval csv: " << out_csv << "\n";
    }
    return 0;
}

int run_prop(const std::string& suite) {
    auto results = run_prop_suite(suite);
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  ("
                  << r.millis << " ms)";
        if (!r.detail.empty()) std::cout << "  " << r.detail;
        std::cout << "\n";
    }
    return all_passed(results) ? 0 : 1;
}

int run_sweep(const SweepConfig& cfg, const std::string& out_csv) {
    auto rows = oversmoothing_sweep(cfg);
    std::cout << "model,layers,k,accuracy\n";
    for (const auto& r : rows) {
        std::cout << r.model << ',';
        if (r.layers > 0) std::cout << r.layers;
        std::cout << ',' << r.k << ',' << r.accuracy << "\n";
    }
    if (!out_csv.empty()) {
        write_sweep_csv(out_csv, rows);
        std::cout << "sweep csv: " << out_csv << "\n";
    }
    return 0;
}

int run_demo(const std::string& story_file, const std::string& inline_text) {
    std::string text;
    if (!inline_text.empty()) {
        text = inline_text;
    } else {
        text = read_text(story_file);
    }
    ParsedStory story;
    try {
        story = parse(text);
    } catch (const ParseError& e) {
        std::cerr << "parse error at sentence " << e.sentence_index << ": " << e.what()
                  << "\n";
        return 1;
    }

    std::cout << "triples:\n";
    for (const auto& t : story.triples) {
        std::cout << "  " << t.src << " " << to_string(t.label) << " " << t.dst << "\n";
    }
    std::cout << "question: relation of " << story.question.first << " to "
              << story.question.second << "\n";

    StoryInstance inst;
    inst.triples = story.triples;
    inst.question = story.question;

    ExactSetup setup = make_exact_setup(inst.triples);
    std::cout << "collection stage: " << connected_pairs(setup.graph).size()
              << " indirectly connected pairs\n";

    ExactTrace trace = exact_trace(inst);
    if (!trace.has_path) {
        std::cout << "no path between " << story.question.first << " and "
                  << story.question.second << "\n";
        return 0;
    }
    std::cout << "path:";
    for (const auto& name : trace.path) std::cout << " " << name;
    std::cout << " (" << trace.path.size() - 1 << " hops)\n";
    std::cout << "per-hop fillers:";
    for (const auto& o : trace.hop_offsets) {
        std::cout << " (" << o.dx << "," << o.dy << ")";
    }
    std::cout << "\ncomposed offset: (" << trace.composed.dx << "," << trace.composed.dy
              << ")\n";
    std::cout << "predicted relation: " << to_string(trace.predicted) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"depth-wise graph reasoning on synthetic spatial stories"};
    app.require_subcommand(1);
    int rc = 0;

    auto* gen = app.add_subcommand("gen", "generate a JSONL dataset");
    std::uint64_t gen_seed = 0;
    int gen_k = 1;
    int gen_n = 100;
    std::string gen_noise = "none";
    std::string gen_out = "data.jsonl";
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--k", gen_k, "hop count of the clean chain")->required();
    gen->add_option("--noise", gen_noise, "none|disconnected|irrelevant|supporting");
    gen->add_option("--n", gen_n, "instance count")->required();
    gen->add_option("--out", gen_out, "output JSONL path");
    gen->callback([&] { rc = run_gen(gen_seed, gen_k, gen_noise, gen_n, gen_out); });

    auto* tr = app.add_subcommand("train", "train the depth model");
    TrainFlags tf;
    tr->add_option("--data", tf.data, "training JSONL")->required();
    tr->add_option("--val", tf.val, "validation JSONL (default: 10% split of --data)");
    tr->add_option("--config", tf.config, "JSON file with trainer settings");
    tr->add_option("--out-ckpt", tf.out_ckpt, "checkpoint output path");
    tr->add_option("--history", tf.history, "history CSV output path");
    tr->add_option("--resume", tf.resume, "checkpoint to resume from");
    tr->add_option("--d", tf.d, "embedding width");
    tr->add_option("--aggregator", tf.aggregator,
                   "recurrent-gated|mean|max|sum-exact");
    tr->add_option("--seed", tf.seed, "rng seed");
    tr->add_option("--lr-engine", tf.cfg.lr_engine, "engine learning rate");
    tr->add_option("--lr-embed", tf.cfg.lr_embed, "embedding learning rate");
    tr->add_option("--batch-size", tf.cfg.batch_size, "batch size");
    tr->add_option("--max-epochs", tf.cfg.max_epochs, "epoch budget for this run");
    tr->add_option("--min-delta", tf.cfg.min_delta, "improvement threshold");
    tr->callback([&] { rc = run_train(tf); });

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint or the exact mode");
    std::string ev_data, ev_ckpt, ev_out;
    bool ev_exact = false;
    ev->add_option("--data", ev_data, "JSONL dataset")->required();
    auto* ckpt_opt = ev->add_option("--ckpt", ev_ckpt, "checkpoint path");
    auto* exact_opt = ev->add_flag("--exact", ev_exact, "parameter-free exact mode");
    ckpt_opt->excludes(exact_opt);
    ev->add_option("--out", ev_out, "eval CSV output path");
    ev->callback([&] {
        if (!ev_exact && ev_ckpt.empty()) {
            throw CLI::ValidationError("eval", "either --ckpt or --exact is required");
        }
        rc = run_eval(ev_data, ev_ckpt, ev_exact, ev_out);
    });

    auto* pr = app.add_subcommand("prop", "run property suites");
    std::string pr_suite = "all";
    pr->add_option("--suite", pr_suite, "tpr|grad|noise|bfs|all");
    pr->callback([&] { rc = run_prop(pr_suite); });

    auto* sw = app.add_subcommand("sweep", "layer sweep: breadth baseline vs depth engine");
    SweepConfig sc;
    sc.train.max_epochs = 6;
    std::string sw_out = "sweep.csv";
    sw->add_option("--d", sc.dim, "embedding width");
    sw->add_option("--max-layers", sc.max_layers, "baseline layer counts to try");
    sw->add_option("--max-k", sc.max_k, "hop counts 1..max-k");
    sw->add_option("--train-per-k", sc.train_per_k, "training instances per k");
    sw->add_option("--test-per-k", sc.test_per_k, "test instances per k");
    sw->add_option("--epochs", sc.train.max_epochs, "epochs per model");
    sw->add_option("--seed", sc.train.seed, "rng seed");
    sw->add_option("--lr", sc.train.lr_engine, "learning rate (both groups)");
    sw->add_option("--out", sw_out, "sweep CSV output path");
    sw->callback([&] {
        sc.train.lr_embed = sc.train.lr_engine;
        rc = run_sweep(sc, sw_out);
    });

    auto* dm = app.add_subcommand("demo", "trace one story through the exact engine");
    std::string dm_file, dm_text;
    auto* file_opt = dm->add_option("--story-file", dm_file, "text file with the story");
    auto* text_opt = dm->add_option("--inline-text", dm_text, "story text on the command line");
    file_opt->excludes(text_opt);
    dm->callback([&] {
        if (dm_file.empty() && dm_text.empty()) {
            throw CLI::ValidationError("demo", "either --story-file or --inline-text is required");
        }
        rc = run_demo(dm_file, dm_text);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const depwise::ArgumentError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}

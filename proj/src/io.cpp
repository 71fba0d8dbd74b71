#include "depwise/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "depwise/errors.hpp"

namespace depwise {

using ordered_json = nlohmann::ordered_json;

void atomic_write_text(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw IoError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw IoError("cannot rename into place: " + path);
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

ordered_json instance_to_json(const StoryInstance& inst) {
    ordered_json j;
    ordered_json triples = ordered_json::array();
    for (const auto& t : inst.triples) {
        triples.push_back({t.src, std::string(to_string(t.label)), t.dst});
    }
    j["triples"] = std::move(triples);
    j["sentences"] = inst.sentences;
    j["question"] = {inst.question.first, inst.question.second};
    j["gold"] = std::string(to_string(inst.gold));
    j["k"] = inst.k;
    j["noise"] = std::string(to_string(inst.noise));
    j["seed"] = inst.seed;
    return j;
}

StoryInstance instance_from_json(const ordered_json& j) {
    StoryInstance inst;
    for (const auto& t : j.at("triples")) {
        if (!t.is_array() || t.size() != 3) throw IoError("triple must be [src, label, dst]");
        auto label = label_from_string(t[1].get<std::string>());
        if (!label) throw IoError("unknown relation label: " + t[1].get<std::string>());
        inst.triples.push_back({t[0].get<std::string>(), *label, t[2].get<std::string>()});
    }
    inst.sentences = j.at("sentences").get<std::vector<std::string>>();
    const auto& q = j.at("question");
    if (!q.is_array() || q.size() != 2) throw IoError("question must be [source, target]");
    inst.question = {q[0].get<std::string>(), q[1].get<std::string>()};
    auto gold = label_from_string(j.at("gold").get<std::string>());
    if (!gold) throw IoError("unknown gold label: " + j.at("gold").get<std::string>());
    inst.gold = *gold;
    inst.k = j.at("k").get<int>();
    auto noise = noise_from_string(j.at("noise").get<std::string>());
    if (!noise) throw IoError("unknown noise kind: " + j.at("noise").get<std::string>());
    inst.noise = *noise;
    inst.seed = j.at("seed").get<std::uint64_t>();
    return inst;
}

}  // namespace

std::string instance_to_json_line(const StoryInstance& instance) {
    return instance_to_json(instance).dump();
}

StoryInstance instance_from_json_line(const std::string& line) {
    ordered_json j = ordered_json::parse(line);
    return instance_from_json(j);
}

void write_jsonl(const std::string& path, const std::vector<StoryInstance>& instances) {
    std::ostringstream out;
    for (const auto& inst : instances) out << instance_to_json_line(inst) << '\n';
    atomic_write_text(path, out.str());
}

std::vector<StoryInstance> read_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<StoryInstance> out;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
            out.push_back(instance_from_json_line(line));
        } catch (const std::exception& e) {
            throw IoError(path + ":" + std::to_string(line_number) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::vector<std::pair<std::string, Tensor>> named_tables(const ModelParams& p) {
    std::vector<std::pair<std::string, Tensor>> out;
    auto add_ffn = [&](const std::string& prefix, const FfnWeights& f) {
        for (std::size_t i = 0; i < f.layers.size(); ++i) {
            out.emplace_back(prefix + "." + std::to_string(i) + ".weight", f.layers[i].weight);
            out.emplace_back(prefix + "." + std::to_string(i) + ".bias", f.layers[i].bias);
        }
    };
    auto add_ln = [&](const std::string& prefix, const LayerNormParams& ln) {
        out.emplace_back(prefix + ".gamma", ln.gamma);
        out.emplace_back(prefix + ".beta", ln.beta);
    };
    add_ffn("engine.ffn_init", p.engine.ffn_init);
    out.emplace_back("engine.lstm.w_input", p.engine.lstm.w_input);
    out.emplace_back("engine.lstm.u_input", p.engine.lstm.u_input);
    out.emplace_back("engine.lstm.b_input", p.engine.lstm.b_input);
    out.emplace_back("engine.lstm.w_forget", p.engine.lstm.w_forget);
    out.emplace_back("engine.lstm.u_forget", p.engine.lstm.u_forget);
    out.emplace_back("engine.lstm.b_forget", p.engine.lstm.b_forget);
    out.emplace_back("engine.lstm.w_output", p.engine.lstm.w_output);
    out.emplace_back("engine.lstm.u_output", p.engine.lstm.u_output);
    out.emplace_back("engine.lstm.b_output", p.engine.lstm.b_output);
    out.emplace_back("engine.lstm.w_cell", p.engine.lstm.w_cell);
    out.emplace_back("engine.lstm.u_cell", p.engine.lstm.u_cell);
    out.emplace_back("engine.lstm.b_cell", p.engine.lstm.b_cell);
    add_ffn("engine.ffn_compose", p.engine.ffn_compose);
    add_ln("engine.ln_compose", p.engine.ln_compose);
    add_ffn("engine.ffn_readout", p.engine.ffn_readout);
    add_ln("engine.ln_readout", p.engine.ln_readout);
    add_ffn("head", p.head);
    add_ln("ln_head", p.ln_head);
    return out;
}

ordered_json table_json(const std::vector<int>& shape, const std::vector<double>& data) {
    ordered_json t;
    t["shape"] = shape;
    t["data"] = data;
    return t;
}

void load_table(const ordered_json& tables, const std::string& name,
                const std::vector<int>& shape, std::vector<double>& dst) {
    if (!tables.contains(name)) throw IoError("checkpoint missing table: " + name);
    const auto& t = tables.at(name);
    auto got_shape = t.at("shape").get<std::vector<int>>();
    if (got_shape != shape) throw IoError("checkpoint table has wrong shape: " + name);
    auto data = t.at("data").get<std::vector<double>>();
    std::size_t expect = 1;
    for (int s : shape) expect *= static_cast<std::size_t>(s);
    if (data.size() != expect) throw IoError("checkpoint table has wrong size: " + name);
    dst = std::move(data);
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const std::optional<TrainerState>& trainer) {
    ordered_json j;
    j["version"] = kCheckpointVersion;
    j["d"] = params.dim;
    j["aggregator"] = std::string(to_string(params.aggregator));

    ordered_json tables;
    {
        std::vector<double> flat;
        for (const auto& row : params.entity_embed) {
            flat.insert(flat.end(), row->data.begin(), row->data.end());
        }
        tables["entity_embed"] = table_json({kAlphabet, params.dim}, flat);
    }
    {
        std::vector<double> flat;
        for (const auto& row : params.relation_embed) {
            flat.insert(flat.end(), row->data.begin(), row->data.end());
        }
        tables["relation_embed"] = table_json({kNumRelationLabels, params.dim}, flat);
    }
    for (const auto& [name, tensor] : named_tables(params)) {
        tables[name] = table_json(tensor->shape, tensor->data);
    }
    j["tables"] = std::move(tables);

    if (trainer) {
        j["trainer"] = {{"next_epoch", trainer->next_epoch},
                        {"lr_engine", trainer->lr_engine},
                        {"lr_embed", trainer->lr_embed}};
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("checkpoint is not valid JSON: " + path + " (" + e.what() + ")");
    }
    if (!j.contains("version") || j.at("version").get<std::string>() != kCheckpointVersion) {
        throw IoError("checkpoint version mismatch: expected " +
                      std::string(kCheckpointVersion));
    }
    int d = j.at("d").get<int>();
    auto aggregator = aggregator_from_string(j.at("aggregator").get<std::string>());
    if (!aggregator) throw IoError("unknown aggregator in checkpoint");

    Checkpoint ckpt{init_model(d, *aggregator, 0), std::nullopt};
    const auto& tables = j.at("tables");
    {
        std::vector<double> flat;
        load_table(tables, "entity_embed", {kAlphabet, d}, flat);
        for (int i = 0; i < kAlphabet; ++i) {
            std::copy(flat.begin() + static_cast<std::ptrdiff_t>(i) * d,
                      flat.begin() + static_cast<std::ptrdiff_t>(i + 1) * d,
                      ckpt.params.entity_embed[i]->data.begin());
        }
    }
    {
        std::vector<double> flat;
        load_table(tables, "relation_embed", {kNumRelationLabels, d}, flat);
        for (int i = 0; i < kNumRelationLabels; ++i) {
            std::copy(flat.begin() + static_cast<std::ptrdiff_t>(i) * d,
                      flat.begin() + static_cast<std::ptrdiff_t>(i + 1) * d,
                      ckpt.params.relation_embed[i]->data.begin());
        }
    }
    for (auto& [name, tensor] : named_tables(ckpt.params)) {
        load_table(tables, name, tensor->shape, tensor->data);
    }

    if (j.contains("trainer")) {
        TrainerState state;
        state.next_epoch = j["trainer"].at("next_epoch").get<int>();
        state.lr_engine = j["trainer"].at("lr_engine").get<double>();
        state.lr_embed = j["trainer"].at("lr_embed").get<double>();
        ckpt.trainer = state;
    }
    return ckpt;
}

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history) {
    std::ostringstream out;
    out << "epoch,train_loss,val_loss,lr\n";
    out.precision(12);
    for (const auto& r : history) {
        out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.lr << '\n';
    }
    atomic_write_text(path, out.str());
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
    std::ostringstream out;
    out << "k,noise,n,accuracy\n";
    out.precision(12);
    for (const auto& [key, counts] : report.buckets) {
        double acc = counts.second == 0
                         ? 0.0
                         : static_cast<double>(counts.first) / counts.second;
        out << key.first << ',' << key.second << ',' << counts.second << ',' << acc << '\n';
    }
    atomic_write_text(path, out.str());
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "model,layers,k,accuracy\n";
    out.precision(12);
    for (const auto& r : rows) {
        out << r.model << ',';
        if (r.layers > 0) out << r.layers;
        out << ',' << r.k << ',' << r.accuracy << '\n';
    }
    atomic_write_text(path, out.str());
}

}  // namespace depwise

#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "depwise/io.hpp"

using namespace depwise;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(DEPWISE_BIN) + " " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) {
        result.output.append(buf.data(), n);
    }
    int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

struct TempDir {
    fs::path path;

    TempDir() {
        static int n = 0;
        path = fs::temp_directory_path() /
               ("depwise-cli-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("gen writes a deterministic dataset and prints a histogram") {
    TempDir dir;
    auto a = run_cli("gen --seed 7 --k 3 --noise irrelevant --n 18 --out " +
                     dir.file("a.jsonl"));
    auto b = run_cli("gen --seed 7 --k 3 --noise irrelevant --n 18 --out " +
                     dir.file("b.jsonl"));
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(a.output.find("wrote 18 instances") != std::string::npos);
    CHECK(a.output.find("label histogram:") != std::string::npos);
    CHECK(a.output.find("above: 2") != std::string::npos);
    CHECK(read_text(dir.file("a.jsonl")) == read_text(dir.file("b.jsonl")));
    CHECK(count_lines(read_text(dir.file("a.jsonl"))) == 18);
}

TEST_CASE("bad arguments exit with the usage code") {
    TempDir dir;
    CHECK(run_cli("gen --k 11 --n 5 --out " + dir.file("x.jsonl")).exit_code == 2);
    CHECK(run_cli("gen --k 2 --n 5 --noise sideways --out " + dir.file("x.jsonl"))
              .exit_code == 2);
    CHECK(run_cli("gen --n 5").exit_code == 2);       // --k is required
    CHECK(run_cli("frobnicate").exit_code == 2);      // unknown subcommand
    CHECK(run_cli("").exit_code == 2);                // a subcommand is required
    auto r = run_cli("eval --data " + dir.file("x.jsonl"));
    CHECK(r.exit_code == 2);  // neither --ckpt nor --exact
}

TEST_CASE("missing input files exit with the runtime-error code") {
    TempDir dir;
    auto r = run_cli("eval --exact --data " + dir.file("absent.jsonl"));
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("error:") != std::string::npos);
    CHECK(run_cli("train --data " + dir.file("absent.jsonl")).exit_code == 1);
    CHECK(run_cli("demo --story-file " + dir.file("absent.txt")).exit_code == 1);
}

TEST_CASE("gen, train, eval chain round-trips through files") {
    TempDir dir;
    auto data = dir.file("train.jsonl");
    auto ckpt = dir.file("model.json");
    auto history = dir.file("history.csv");

    REQUIRE(run_cli("gen --seed 3 --k 1 --n 40 --out " + data).exit_code == 0);

    auto tr = run_cli("train --data " + data + " --d 8 --max-epochs 2 --batch-size 8" +
                      " --seed 5 --out-ckpt " + ckpt + " --history " + history);
    CHECK(tr.exit_code == 0);
    CHECK(tr.output.find("trained 2 epochs (36 train / 4 val instances)") !=
          std::string::npos);
    CHECK(fs::exists(ckpt));

    auto hist = read_text(history);
    CHECK(hist.rfind("epoch,train_loss,val_loss,lr\n", 0) == 0);
    CHECK(count_lines(hist) == 3);
    CHECK(hist.find("\n0,") != std::string::npos);
    CHECK(hist.find("\n1,") != std::string::npos);

    auto ev = run_cli("eval --data " + data + " --ckpt " + ckpt + " --out " +
                      dir.file("eval.csv"));
    CHECK(ev.exit_code == 0);
    CHECK(ev.output.find("instances: 40") != std::string::npos);
    CHECK(ev.output.find("per-k accuracy:") != std::string::npos);
    auto csv = read_text(dir.file("eval.csv"));
    CHECK(csv.rfind("k,noise,n,accuracy\n", 0) == 0);
    CHECK(csv.find("1,none,40,") != std::string::npos);

    auto ex = run_cli("eval --exact --data " + data);
    CHECK(ex.exit_code == 0);
    CHECK(ex.output.find("accuracy: 1\n") != std::string::npos);

    CHECK(run_cli("eval --exact --ckpt " + ckpt + " --data " + data).exit_code == 2);
}

TEST_CASE("resume continues epoch numbering and learning rates") {
    TempDir dir;
    auto data = dir.file("train.jsonl");
    auto first = dir.file("first.json");
    auto second = dir.file("second.json");

    REQUIRE(run_cli("gen --seed 4 --k 1 --n 30 --out " + data).exit_code == 0);
    REQUIRE(run_cli("train --data " + data + " --d 8 --max-epochs 2 --seed 5" +
                    " --out-ckpt " + first + " --history " + dir.file("h1.csv"))
                .exit_code == 0);

    auto ckpt = load_checkpoint(first);
    REQUIRE(ckpt.trainer.has_value());
    CHECK(ckpt.trainer->next_epoch == 2);

    auto r = run_cli("train --data " + data + " --max-epochs 2 --resume " + first +
                     " --out-ckpt " + second + " --history " + dir.file("h2.csv"));
    CHECK(r.exit_code == 0);
    auto hist = read_text(dir.file("h2.csv"));
    CHECK(hist.find("\n2,") != std::string::npos);
    CHECK(hist.find("\n3,") != std::string::npos);
    CHECK(hist.find("\n0,") == std::string::npos);
    CHECK(load_checkpoint(second).trainer->next_epoch == 4);
}

TEST_CASE("config file supplies trainer settings") {
    TempDir dir;
    auto data = dir.file("train.jsonl");
    auto cfg = dir.file("cfg.json");
    REQUIRE(run_cli("gen --seed 6 --k 1 --n 20 --out " + data).exit_code == 0);
    atomic_write_text(cfg, "{\"max_epochs\": 1, \"batch_size\": 4, \"seed\": 9}\n");

    auto r = run_cli("train --data " + data + " --d 8 --config " + cfg +
                     " --out-ckpt " + dir.file("m.json") + " --history " +
                     dir.file("h.csv"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("trained 1 epochs") != std::string::npos);

    atomic_write_text(cfg, "{max_epochs: oops\n");
    CHECK(run_cli("train --data " + data + " --config " + cfg).exit_code == 1);
}

TEST_CASE("demo traces a story through the exact engine") {
    TempDir dir;
    auto story = dir.file("story.txt");
    atomic_write_text(story,
                      "C is to the right of Y and is on the same horizontal plane.\n"
                      "K is to the lower-left of C.\n"
                      "E is directly above Y.\n"
                      "Y is to the left of X and is on the same horizontal plane.\n"
                      "What is the relation of the agent K to the agent E?\n");

    auto r = run_cli("demo --story-file " + story);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("K lower-left C") != std::string::npos);
    CHECK(r.output.find("C right Y") != std::string::npos);
    CHECK(r.output.find("question: relation of K to E") != std::string::npos);
    CHECK(r.output.find("indirectly connected pairs") != std::string::npos);
    CHECK(r.output.find("path: K C Y E (3 hops)") != std::string::npos);
    CHECK(r.output.find("composed offset: (0,-2)") != std::string::npos);
    CHECK(r.output.find("predicted relation: below") != std::string::npos);
}

TEST_CASE("demo handles disconnected questions and parse failures") {
    auto no_path = run_cli("demo --inline-text \"A is directly above B.\n"
                           "C is directly above D.\n"
                           "What is the relation of the agent A to the agent D?\"");
    CHECK(no_path.exit_code == 0);
    CHECK(no_path.output.find("no path between A and D") != std::string::npos);

    auto bad = run_cli("demo --inline-text \"A is directly above B.\n"
                       "B is sideways of C.\n"
                       "What is the relation of the agent A to the agent C?\"");
    CHECK(bad.exit_code == 1);
    CHECK(bad.output.find("parse error at sentence 2") != std::string::npos);

    CHECK(run_cli("demo").exit_code == 2);
}

TEST_CASE("prop subcommand reports pass lines and exit zero") {
    auto r = run_cli("prop --suite bfs");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("PASS") != std::string::npos);
    CHECK(r.output.find("FAIL") == std::string::npos);
    CHECK(run_cli("prop --suite nonsense").exit_code == 2);
}

TEST_CASE("sweep emits one row per contestant and k") {
    TempDir dir;
    auto out = dir.file("sweep.csv");
    auto r = run_cli("sweep --d 8 --max-layers 2 --max-k 2 --train-per-k 16"
                     " --test-per-k 8 --epochs 1 --seed 1 --out " + out);
    CHECK(r.exit_code == 0);

    auto csv = read_text(out);
    CHECK(csv.rfind("model,layers,k,accuracy\n", 0) == 0);
    // 2 layer counts x 2 ks for the baseline, plus 2 depth rows
    CHECK(count_lines(csv) == 7);
    CHECK(csv.find("breadth-baseline,1,1,") != std::string::npos);
    CHECK(csv.find("breadth-baseline,2,2,") != std::string::npos);
    CHECK(csv.find("depth-engine,,1,") != std::string::npos);
    CHECK(csv.find("depth-engine,,2,") != std::string::npos);
}

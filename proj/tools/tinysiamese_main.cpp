// tinysiamese: command-line driver for feature-vector verification.
//
// Subcommands: gen, train, verify, classify, bench. Every command that
// takes --seed is reproducible in its numeric artifacts. Exit codes:
// 0 success, 1 usage error, 2 data/format error, 3 internal error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tinysiamese/data.hpp"
#include "tinysiamese/errors.hpp"
#include "tinysiamese/eval.hpp"
#include "tinysiamese/model.hpp"
#include "tinysiamese/training.hpp"

namespace ts = tinysiamese;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ts::FileFormat parse_format(const std::string& name) {
    if (name == "binary") return ts::FileFormat::Binary;
    if (name == "text") return ts::FileFormat::Text;
    throw UsageError("--format must be 'binary' or 'text', got '" + name + "'");
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ts::DataError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ts::DataError("write to '" + path + "' failed");
}

// Enough to re-execute the run: command, config, inputs, outputs.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value) {
        entries.emplace_back(key, value);
    }

    void print(double wall_seconds) const {
        std::cout << "-- run manifest --\n";
        std::cout << "command=" << command << "\n";
        for (const auto& [k, v] : entries) std::cout << k << "=" << v << "\n";
        std::cout << "wall_seconds=" << fmt_g(wall_seconds) << "\n";
    }
};

class WallTimer {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Labeled pair file: one pair per line, comma separated,
// "label, x1[0..n-1], x2[0..n-1]". '#' starts a comment.
struct PairFile {
    ts::Dataset records;          // 2 records per pair, file order
    std::vector<ts::Pair> pairs;  // labels from the file
};

PairFile load_pair_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ts::DataError("pair file: cannot open '" + path + "'");

    std::vector<ts::FeatureRecord> records;
    std::vector<ts::Pair> pairs;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        std::vector<double> values;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(field, &pos);
                if (field.find_first_not_of(" \t", pos) != std::string::npos) {
                    throw std::invalid_argument("");
                }
                values.push_back(v);
            } catch (const std::exception&) {
                throw ts::DataError("pair file: line " + std::to_string(line_no) +
                                    " has a non-numeric field '" + field + "'");
            }
        }
        if (values.size() < 3 || (values.size() - 1) % 2 != 0) {
            throw ts::DataError("pair file: line " + std::to_string(line_no) +
                                " must hold a label and two equal-length vectors");
        }
        const int label = static_cast<int>(values[0]);
        if (static_cast<double>(label) != values[0] || (label != 0 && label != 1)) {
            throw ts::DataError("pair file: line " + std::to_string(line_no) +
                                " label must be 0 or 1");
        }
        const std::size_t n = (values.size() - 1) / 2;
        if (dim == 0) {
            dim = n;
        } else if (n != dim) {
            throw ts::DataError("pair file: line " + std::to_string(line_no) + " has dim " +
                                std::to_string(n) + ", expected " + std::to_string(dim));
        }
        ts::FeatureRecord left;
        ts::FeatureRecord right;
        left.vector.assign(values.begin() + 1, values.begin() + 1 + static_cast<long>(n));
        right.vector.assign(values.begin() + 1 + static_cast<long>(n), values.end());
        pairs.push_back({records.size(), records.size() + 1, label});
        records.push_back(std::move(left));
        records.push_back(std::move(right));
    }
    if (pairs.empty()) throw ts::DataError("pair file: '" + path + "' has no pairs");
    PairFile pf;
    pf.records = ts::make_dataset(dim, std::move(records));
    pf.pairs = std::move(pairs);
    return pf;
}

void check_model_dim(const ts::TinyModel& model, std::size_t data_dim, const std::string& what) {
    if (model.dim != data_dim) {
        throw ts::DataError("dim mismatch: checkpoint has n=" + std::to_string(model.dim) +
                            " but " + what + " has n=" + std::to_string(data_dim));
    }
}

std::string trace_file_text(const ts::LossTrace& trace) {
    std::string out = "# epoch mean_loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += std::to_string(i + 1) + " " + fmt_g(trace[i].mean_loss) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------- gen ----

struct GenOpts {
    std::size_t subjects = 20;
    std::size_t samples = 6;
    std::size_t dim = 64;
    double spread = 1.0;
    double noise = 0.05;
    std::uint64_t seed = 0;
    std::string format = "binary";
    std::string out;
};

void run_gen(const GenOpts& o) {
    WallTimer timer;
    const ts::Dataset ds =
        ts::generate_synthetic(o.subjects, o.samples, o.dim, o.spread, o.noise, o.seed);
    ts::save_dataset(ds, o.out, parse_format(o.format));
    std::cout << "wrote " << ds.size() << " records, dim " << ds.dim << ", "
              << ds.subjects.size() << " subjects to " << o.out << "\n";

    RunManifest m;
    m.command = "gen";
    m.add("subjects", std::to_string(o.subjects));
    m.add("samples", std::to_string(o.samples));
    m.add("dim", std::to_string(o.dim));
    m.add("spread", fmt_g(o.spread));
    m.add("noise", fmt_g(o.noise));
    m.add("seed", std::to_string(o.seed));
    m.add("format", o.format);
    m.add("out", o.out);
    m.print(timer.seconds());
}

// -------------------------------------------------------------- train ----

struct TrainOpts {
    std::string train_path;
    std::string val_path;
    std::string format = "binary";
    int epochs = 120;
    int batch_size = 18;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    std::size_t pairs_per_epoch = 0;
    double threshold = 0.5;
    std::string out;
    std::string trace_out;
};

void run_train(const TrainOpts& o) {
    WallTimer timer;
    const ts::FileFormat format = parse_format(o.format);
    const ts::Dataset full = ts::load_dataset(o.train_path, format);

    ts::Dataset train_set = full;
    ts::Dataset val_set;
    if (!o.val_path.empty()) {
        val_set = ts::load_dataset(o.val_path, format);
        if (val_set.dim != train_set.dim) {
            throw ts::DataError("dim mismatch: train file has n=" +
                                std::to_string(train_set.dim) + " but validation file has n=" +
                                std::to_string(val_set.dim));
        }
    } else {
        // No validation file: hold out 40% of each subject's samples.
        auto [tr, held] = ts::split_by_sample(full, 0.6, o.seed);
        train_set = std::move(tr);
        val_set = std::move(held);
    }
    if (train_set.dim % 2 != 0) {
        throw ts::DataError("feature dim " + std::to_string(train_set.dim) +
                            " must be even for the half-size first layer");
    }
    if (train_set.subjects.size() < 2) {
        throw ts::DataError("training set needs >= 2 subjects, got " +
                            std::to_string(train_set.subjects.size()));
    }

    ts::TinyModel model = ts::init_model(train_set.dim, o.seed);
    ts::TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.batch_size = o.batch_size;
    cfg.adam.lr = o.lr;
    cfg.seed = o.seed;
    cfg.pairs_per_epoch = o.pairs_per_epoch;

    const ts::LossTrace trace = ts::train(model, train_set, cfg);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::printf("epoch %zu/%zu  mean_loss %.6f  %.3f s\n", i + 1, trace.size(),
                    trace[i].mean_loss, trace[i].seconds);
    }

    if (!o.out.empty()) {
        ts::save_model(model, o.out);
        std::cout << "checkpoint written to " << o.out << "\n";
    }
    if (!o.trace_out.empty()) {
        write_text_file(o.trace_out, trace_file_text(trace));
        std::cout << "loss trace written to " << o.trace_out << "\n";
    }

    // Final metrics on balanced held-out pairs at the requested threshold.
    bool can_pair = val_set.subjects.size() >= 2;
    bool any_anchor = false;
    for (std::uint32_t id : val_set.subjects) {
        if (val_set.positions(id).size() >= 2) any_anchor = true;
    }
    if (can_pair && any_anchor) {
        ts::Rng eval_rng(o.seed + 1);
        std::vector<ts::Pair> eval_pairs;
        const std::size_t eval_batches = 64;
        for (std::size_t b = 0; b < eval_batches; ++b) {
            const auto batch =
                ts::sample_balanced_batch(val_set, static_cast<std::size_t>(o.batch_size) / 2,
                                          eval_rng);
            eval_pairs.insert(eval_pairs.end(), batch.begin(), batch.end());
        }
        const ts::EvalReport report =
            ts::evaluate_verification(model, val_set, eval_pairs, o.threshold);
        std::cout << "validation metrics (" << eval_pairs.size() << " balanced pairs):\n"
                  << ts::format_report_table(report);
    } else {
        std::cout << "validation metrics skipped: the held-out set cannot form balanced pairs\n";
    }

    RunManifest m;
    m.command = "train";
    m.add("train", o.train_path);
    m.add("val", o.val_path.empty() ? "(held-out 40% split)" : o.val_path);
    m.add("epochs", std::to_string(o.epochs));
    m.add("batch_size", std::to_string(o.batch_size));
    m.add("lr", fmt_g(o.lr));
    m.add("seed", std::to_string(o.seed));
    m.add("threshold", fmt_g(o.threshold));
    if (!o.out.empty()) m.add("checkpoint", o.out);
    if (!o.trace_out.empty()) m.add("trace", o.trace_out);
    m.print(timer.seconds());
}

// ------------------------------------------------------------- verify ----

struct VerifyOpts {
    std::string checkpoint;
    std::string left;
    std::string right;
    std::string pairs;
    std::string format = "text";
    double threshold = 0.5;
    int sweep = 0;
    std::string report_format = "table";
};

void run_verify(const VerifyOpts& o) {
    WallTimer timer;
    const ts::TinyModel model = ts::load_model(o.checkpoint);

    RunManifest m;
    m.command = "verify";
    m.add("checkpoint", o.checkpoint);
    m.add("threshold", fmt_g(o.threshold));

    if (!o.pairs.empty()) {
        const PairFile pf = load_pair_file(o.pairs);
        check_model_dim(model, pf.records.dim, "pair file");
        for (const ts::Pair& pr : pf.pairs) {
            const double p = ts::score(model, pf.records.records[pr.left].vector,
                                       pf.records.records[pr.right].vector);
            std::cout << "p=" << fmt_g(p) << " label=" << pr.label << "\n";
        }
        const ts::EvalReport report =
            ts::evaluate_verification(model, pf.records, pf.pairs, o.threshold);
        std::cout << (o.report_format == "kv" ? ts::format_report_kv(report)
                                              : ts::format_report_table(report));
        if (o.sweep >= 2) {
            const auto sweep = ts::sweep_thresholds(model, pf.records, pf.pairs, o.sweep);
            std::cout << "threshold accuracy fpr fnr\n";
            for (const auto& [t, rep] : sweep) {
                std::printf("%.6f %.6f %.6f %.6f\n", t, rep.accuracy, rep.fpr, rep.fnr);
            }
        }
        m.add("pairs", o.pairs);
    } else if (!o.left.empty() && !o.right.empty()) {
        const ts::Dataset a = ts::load_dataset(o.left, ts::FileFormat::Text);
        const ts::Dataset b = ts::load_dataset(o.right, ts::FileFormat::Text);
        check_model_dim(model, a.dim, "'" + o.left + "'");
        check_model_dim(model, b.dim, "'" + o.right + "'");
        const double p = ts::score(model, a.records[0].vector, b.records[0].vector);
        std::cout << "p=" << fmt_g(p) << " similar=" << (p >= o.threshold ? 1 : 0) << "\n";
        m.add("left", o.left);
        m.add("right", o.right);
    } else {
        throw UsageError("verify needs either --pairs or both --left and --right");
    }
    m.print(timer.seconds());
}

// ----------------------------------------------------------- classify ----

struct ClassifyOpts {
    std::string checkpoint;
    std::string gallery;
    std::string probe;
    std::string format = "binary";
    std::string aggregate = "mean";
    std::string report_format = "table";
};

void run_classify(const ClassifyOpts& o) {
    WallTimer timer;
    const ts::TinyModel model = ts::load_model(o.checkpoint);
    const ts::FileFormat format = parse_format(o.format);
    const ts::Dataset gallery = ts::load_dataset(o.gallery, format);
    const ts::Dataset probes = ts::load_dataset(o.probe, format);
    check_model_dim(model, gallery.dim, "gallery");
    check_model_dim(model, probes.dim, "probe set");

    ts::Aggregation agg;
    if (o.aggregate == "mean") agg = ts::Aggregation::Mean;
    else if (o.aggregate == "max") agg = ts::Aggregation::Max;
    else throw UsageError("--aggregate must be 'mean' or 'max'");

    const ts::ClassifyReport report = ts::classify_gallery_probe(model, gallery, probes, agg);
    if (report.excluded > 0) {
        std::cerr << "warning: " << report.excluded
                  << " probe(s) belong to classes absent from the gallery and were excluded\n";
    }
    std::cout << (o.report_format == "kv" ? ts::format_classify_kv(report)
                                          : ts::format_classify_table(report));

    RunManifest m;
    m.command = "classify";
    m.add("checkpoint", o.checkpoint);
    m.add("gallery", o.gallery);
    m.add("probe", o.probe);
    m.add("aggregate", o.aggregate);
    m.print(timer.seconds());
}

// -------------------------------------------------------------- bench ----

struct BenchOpts {
    std::string checkpoint;
    std::string data;
    std::string format = "binary";
    std::size_t dim = 64;
    int trials = 10;
    std::uint64_t seed = 0;
    std::string report_format = "table";
};

void run_bench(const BenchOpts& o) {
    WallTimer timer;
    ts::Dataset ds = o.data.empty()
                         ? ts::generate_synthetic(10, 6, o.dim, 1.0, 0.05, o.seed)
                         : ts::load_dataset(o.data, parse_format(o.format));
    ts::TinyModel model =
        o.checkpoint.empty() ? ts::init_model(ds.dim, o.seed) : ts::load_model(o.checkpoint);
    check_model_dim(model, ds.dim, "benchmark data");

    ts::BenchReport report = ts::bench_matching(model, ds, o.trials, o.seed);

    // wall time of a 10-epoch training run on the same data
    ts::TinyModel scratch = ts::init_model(ds.dim, o.seed);
    ts::TrainConfig cfg;
    cfg.epochs = 10;
    cfg.seed = o.seed;
    const WallTimer train_timer;
    ts::train(scratch, ds, cfg);
    report.mean_train10_seconds = train_timer.seconds();

    std::cout << (o.report_format == "kv" ? ts::format_bench_kv(report)
                                          : ts::format_bench_table(report));

    RunManifest m;
    m.command = "bench";
    m.add("dim", std::to_string(ds.dim));
    m.add("trials", std::to_string(o.trials));
    m.add("seed", std::to_string(o.seed));
    if (!o.checkpoint.empty()) m.add("checkpoint", o.checkpoint);
    if (!o.data.empty()) m.add("data", o.data);
    m.print(timer.seconds());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TinySiamese feature-vector verification"};
    app.require_subcommand(1);

    GenOpts gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "generate a synthetic feature dataset");
    cmd_gen->add_option("--subjects", gen.subjects)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    cmd_gen->add_option("--samples", gen.samples)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    cmd_gen->add_option("--dim", gen.dim)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    cmd_gen->add_option("--spread", gen.spread)->check(CLI::PositiveNumber);
    cmd_gen->add_option("--noise", gen.noise)->check(CLI::PositiveNumber);
    cmd_gen->add_option("--seed", gen.seed);
    cmd_gen->add_option("--format", gen.format)->check(CLI::IsMember({"binary", "text"}));
    cmd_gen->add_option("--out", gen.out)->required();
    cmd_gen->callback([&] {
        if (!(gen.noise < gen.spread)) throw UsageError("--noise must be smaller than --spread");
        run_gen(gen);
    });

    TrainOpts train;
    CLI::App* cmd_train = app.add_subcommand("train", "train a verification head");
    cmd_train->add_option("--train", train.train_path)->required();
    cmd_train->add_option("--val", train.val_path);
    cmd_train->add_option("--format", train.format)->check(CLI::IsMember({"binary", "text"}));
    cmd_train->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber);
    cmd_train->add_option("--batch-size", train.batch_size)->check(CLI::Range(2, 1 << 20));
    cmd_train->add_option("--lr", train.lr)->check(CLI::PositiveNumber);
    cmd_train->add_option("--seed", train.seed);
    cmd_train->add_option("--pairs-per-epoch", train.pairs_per_epoch);
    cmd_train->add_option("--threshold", train.threshold)->check(CLI::Range(0.0, 1.0));
    cmd_train->add_option("--out", train.out);
    cmd_train->add_option("--trace-out", train.trace_out);
    cmd_train->callback([&] {
        if (train.batch_size % 2 != 0) throw UsageError("--batch-size must be even");
        run_train(train);
    });

    VerifyOpts verify;
    CLI::App* cmd_verify = app.add_subcommand("verify", "score pairs against a checkpoint");
    cmd_verify->add_option("--checkpoint", verify.checkpoint)->required();
    cmd_verify->add_option("--left", verify.left);
    cmd_verify->add_option("--right", verify.right);
    cmd_verify->add_option("--pairs", verify.pairs);
    cmd_verify->add_option("--threshold", verify.threshold)->check(CLI::Range(0.0, 1.0));
    cmd_verify->add_option("--sweep", verify.sweep)->check(CLI::Range(2, 1 << 20));
    cmd_verify->add_option("--report-format", verify.report_format)
        ->check(CLI::IsMember({"table", "kv"}));
    cmd_verify->callback([&] { run_verify(verify); });

    ClassifyOpts classify;
    CLI::App* cmd_classify =
        app.add_subcommand("classify", "gallery-probe classification with a checkpoint");
    cmd_classify->add_option("--checkpoint", classify.checkpoint)->required();
    cmd_classify->add_option("--gallery", classify.gallery)->required();
    cmd_classify->add_option("--probe", classify.probe)->required();
    cmd_classify->add_option("--format", classify.format)
        ->check(CLI::IsMember({"binary", "text"}));
    cmd_classify->add_option("--aggregate", classify.aggregate)
        ->check(CLI::IsMember({"mean", "max"}));
    cmd_classify->add_option("--report-format", classify.report_format)
        ->check(CLI::IsMember({"table", "kv"}));
    cmd_classify->callback([&] { run_classify(classify); });

    BenchOpts bench;
    CLI::App* cmd_bench = app.add_subcommand("bench", "matching and training time benchmark");
    cmd_bench->add_option("--checkpoint", bench.checkpoint);
    cmd_bench->add_option("--data", bench.data);
    cmd_bench->add_option("--format", bench.format)->check(CLI::IsMember({"binary", "text"}));
    cmd_bench->add_option("--dim", bench.dim)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    cmd_bench->add_option("--trials", bench.trials)->check(CLI::PositiveNumber);
    cmd_bench->add_option("--seed", bench.seed);
    cmd_bench->add_option("--report-format", bench.report_format)
        ->check(CLI::IsMember({"table", "kv"}));
    cmd_bench->callback([&] { run_bench(bench); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ts::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

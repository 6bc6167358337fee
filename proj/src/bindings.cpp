#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tinysiamese/data.hpp"
#include "tinysiamese/eval.hpp"
#include "tinysiamese/model.hpp"
#include "tinysiamese/training.hpp"

namespace py = pybind11;
namespace ts = tinysiamese;

PYBIND11_MODULE(_core, m) {
    m.doc() = "TinySiamese feature-vector verification core";

    py::class_<ts::TinyModel>(m, "TinyModel")
        .def_readonly("dim", &ts::TinyModel::dim)
        .def("parameter_count", &ts::TinyModel::parameter_count);

    m.def("init_model", &ts::init_model, py::arg("n"), py::arg("seed"),
          py::arg("backbone_layers") = 2);
    m.def("save_model", &ts::save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &ts::load_model, py::arg("path"));

    m.def("embed", &ts::embed, py::arg("model"), py::arg("x"));
    m.def("distance_vector", &ts::distance_vector, py::arg("e1"), py::arg("e2"),
          py::arg("use_hadamard") = ts::kDefaultUseHadamard);
    m.def("score", &ts::score, py::arg("model"), py::arg("x1"), py::arg("x2"),
          py::arg("use_hadamard") = ts::kDefaultUseHadamard);

    py::class_<ts::FeatureRecord>(m, "FeatureRecord")
        .def(py::init([](std::uint32_t subject_id, ts::Vec vector) {
                 ts::FeatureRecord r;
                 r.subject_id = subject_id;
                 r.vector = std::move(vector);
                 return r;
             }),
             py::arg("subject_id"), py::arg("vector"))
        .def_readonly("subject_id", &ts::FeatureRecord::subject_id)
        .def_readonly("vector", &ts::FeatureRecord::vector);

    py::class_<ts::Dataset>(m, "Dataset")
        .def_readonly("dim", &ts::Dataset::dim)
        .def_readonly("subjects", &ts::Dataset::subjects)
        .def("__len__", &ts::Dataset::size)
        .def("record", [](const ts::Dataset& ds, std::size_t i) { return ds.records.at(i); });

    m.def(
        "make_dataset",
        [](std::size_t dim, const std::vector<std::pair<std::uint32_t, ts::Vec>>& rows) {
            std::vector<ts::FeatureRecord> records;
            records.reserve(rows.size());
            for (const auto& [id, vec] : rows) {
                ts::FeatureRecord r;
                r.subject_id = id;
                r.vector = vec;
                records.push_back(std::move(r));
            }
            return ts::make_dataset(dim, std::move(records));
        },
        py::arg("dim"), py::arg("rows"));

    m.def(
        "load_dataset",
        [](const std::string& path, const std::string& format) {
            return ts::load_dataset(path, format == "text" ? ts::FileFormat::Text
                                                           : ts::FileFormat::Binary);
        },
        py::arg("path"), py::arg("format") = "binary");
    m.def(
        "save_dataset",
        [](const ts::Dataset& ds, const std::string& path, const std::string& format) {
            ts::save_dataset(ds, path,
                             format == "text" ? ts::FileFormat::Text : ts::FileFormat::Binary);
        },
        py::arg("dataset"), py::arg("path"), py::arg("format") = "binary");

    m.def("generate_synthetic", &ts::generate_synthetic, py::arg("subjects"),
          py::arg("samples_per_subject"), py::arg("dim"), py::arg("spread"), py::arg("noise"),
          py::arg("seed"));

    py::class_<ts::EpochStat>(m, "EpochStat")
        .def_readonly("mean_loss", &ts::EpochStat::mean_loss)
        .def_readonly("seconds", &ts::EpochStat::seconds);

    m.def(
        "train",
        [](ts::TinyModel& model, const ts::Dataset& ds, int epochs, int batch_size, double lr,
           std::uint64_t seed, std::size_t pairs_per_epoch, bool use_hadamard) {
            ts::TrainConfig cfg;
            cfg.epochs = epochs;
            cfg.batch_size = batch_size;
            cfg.adam.lr = lr;
            cfg.seed = seed;
            cfg.pairs_per_epoch = pairs_per_epoch;
            cfg.use_hadamard = use_hadamard;
            return ts::train(model, ds, cfg);
        },
        py::arg("model"), py::arg("dataset"), py::arg("epochs") = 120,
        py::arg("batch_size") = 18, py::arg("lr") = 1e-3, py::arg("seed") = 0,
        py::arg("pairs_per_epoch") = 0, py::arg("use_hadamard") = ts::kDefaultUseHadamard);

    py::class_<ts::Confusion>(m, "Confusion")
        .def_readonly("tp", &ts::Confusion::tp)
        .def_readonly("fp", &ts::Confusion::fp)
        .def_readonly("tn", &ts::Confusion::tn)
        .def_readonly("fn", &ts::Confusion::fn);

    py::class_<ts::EvalReport>(m, "EvalReport")
        .def_readonly("accuracy", &ts::EvalReport::accuracy)
        .def_readonly("precision", &ts::EvalReport::precision)
        .def_readonly("recall", &ts::EvalReport::recall)
        .def_readonly("f1", &ts::EvalReport::f1)
        .def_readonly("fpr", &ts::EvalReport::fpr)
        .def_readonly("fnr", &ts::EvalReport::fnr)
        .def_readonly("threshold", &ts::EvalReport::threshold)
        .def_readonly("confusion", &ts::EvalReport::confusion);

    m.def(
        "evaluate_balanced",
        [](const ts::TinyModel& model, const ts::Dataset& ds, std::size_t batches,
           std::size_t n_similar, double threshold, std::uint64_t seed, bool use_hadamard) {
            ts::Rng rng(seed);
            std::vector<ts::Pair> pairs;
            for (std::size_t b = 0; b < batches; ++b) {
                const auto batch = ts::sample_balanced_batch(ds, n_similar, rng);
                pairs.insert(pairs.end(), batch.begin(), batch.end());
            }
            return ts::evaluate_verification(model, ds, pairs, threshold, use_hadamard);
        },
        py::arg("model"), py::arg("dataset"), py::arg("batches") = 100,
        py::arg("n_similar") = 9, py::arg("threshold") = 0.5, py::arg("seed") = 0,
        py::arg("use_hadamard") = ts::kDefaultUseHadamard);

    py::class_<ts::ClassifyReport>(m, "ClassifyReport")
        .def_readonly("accuracy", &ts::ClassifyReport::accuracy)
        .def_readonly("evaluated", &ts::ClassifyReport::evaluated)
        .def_readonly("excluded", &ts::ClassifyReport::excluded)
        .def_readonly("predicted", &ts::ClassifyReport::predicted);

    m.def(
        "classify_gallery_probe",
        [](const ts::TinyModel& model, const ts::Dataset& gallery, const ts::Dataset& probes,
           const std::string& aggregation, bool use_hadamard) {
            return ts::classify_gallery_probe(
                model, gallery, probes,
                aggregation == "max" ? ts::Aggregation::Max : ts::Aggregation::Mean,
                use_hadamard);
        },
        py::arg("model"), py::arg("gallery"), py::arg("probes"), py::arg("aggregation") = "mean",
        py::arg("use_hadamard") = ts::kDefaultUseHadamard);

    py::class_<ts::BenchReport>(m, "BenchReport")
        .def_readonly("mean_match_seconds", &ts::BenchReport::mean_match_seconds)
        .def_readonly("mean_cached_match_seconds", &ts::BenchReport::mean_cached_match_seconds)
        .def_readonly("trials", &ts::BenchReport::trials);

    m.def("bench_matching", &ts::bench_matching, py::arg("model"), py::arg("dataset"),
          py::arg("trials") = 10, py::arg("seed") = 0);

#ifdef TINYSIAMESE_VERSION
#define TS_STR_IMPL(x) #x
#define TS_STR(x) TS_STR_IMPL(x)
    m.attr("__version__") = TS_STR(TINYSIAMESE_VERSION);
#else
    m.attr("__version__") = "dev";
#endif
}

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tinysiamese/data.hpp"
#include "tinysiamese/eval.hpp"
#include "tinysiamese/training.hpp"

using namespace tinysiamese;

namespace {

// Exhaustive argmax over per-class aggregated scores, written from scratch.
std::vector<std::uint32_t> brute_force_classify(const TinyModel& model, const Dataset& gallery,
                                                const Dataset& probes) {
    std::vector<std::uint32_t> out;
    for (const FeatureRecord& probe : probes.records) {
        if (!gallery.has_subject(probe.subject_id)) continue;
        double best = -1.0;
        std::uint32_t best_cls = 0;
        bool first = true;
        for (std::uint32_t cls : gallery.subjects) {
            double total = 0.0;
            std::size_t count = 0;
            for (std::size_t gi = 0; gi < gallery.size(); ++gi) {
                if (gallery.records[gi].subject_id != cls) continue;
                total += score(model, probe.vector, gallery.records[gi].vector);
                ++count;
            }
            const double mean = total / static_cast<double>(count);
            if (first || mean > best) {
                best = mean;
                best_cls = cls;
                first = false;
            }
        }
        out.push_back(best_cls);
    }
    return out;
}

}  // namespace

TEST_CASE("perfect scorer metrics") {
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        scores.push_back(0.9);
        labels.push_back(1);
    }
    for (int i = 0; i < 10; ++i) {
        scores.push_back(0.1);
        labels.push_back(0);
    }
    const EvalReport r = report_from_scores(scores, labels, 0.5);
    CHECK(r.accuracy == 1.0);
    CHECK(r.fpr == 0.0);
    CHECK(r.fnr == 0.0);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
}

TEST_CASE("constant 0.5 scorer at threshold 0.5 accepts everything") {
    std::vector<double> scores(20, 0.5);
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) labels.push_back(1);
    for (int i = 0; i < 10; ++i) labels.push_back(0);
    const EvalReport r = report_from_scores(scores, labels, 0.5);
    CHECK(r.recall == 1.0);
    CHECK(r.fpr == 1.0);
    CHECK(r.accuracy == 0.5);
}

TEST_CASE("hand-built confusion arithmetic") {
    // tp=3, fp=1, tn=4, fn=2
    const std::vector<double> scores{0.9, 0.9, 0.9, 0.1, 0.1, 0.9, 0.1, 0.1, 0.1, 0.1};
    const std::vector<int> labels{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const EvalReport r = report_from_scores(scores, labels, 0.5);
    CHECK(r.confusion.tp == 3);
    CHECK(r.confusion.fp == 1);
    CHECK(r.confusion.tn == 4);
    CHECK(r.confusion.fn == 2);
    CHECK(r.precision == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.recall == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r.f1 == doctest::Approx(2.0 * 0.75 * 0.6 / 1.35).epsilon(1e-12));
    CHECK(r.accuracy == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("metric identities against confusion counts") {
    Rng rng(61);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> scores;
        std::vector<int> labels;
        for (int i = 0; i < 40; ++i) {
            scores.push_back(rng.uniform());
            labels.push_back(i < 20 ? 1 : 0);
        }
        const EvalReport r = report_from_scores(scores, labels, rng.uniform(0.1, 0.9));
        const Confusion& c = r.confusion;
        CHECK(c.total() == 40);
        CHECK(r.accuracy ==
              static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total()));
        const double specificity =
            c.fp + c.tn == 0 ? 1.0
                             : static_cast<double>(c.tn) / static_cast<double>(c.fp + c.tn);
        if (c.fp + c.tn > 0) CHECK(std::fabs(r.fpr + specificity - 1.0) <= 1e-15);
        if (c.fn + c.tp > 0) CHECK(std::fabs(r.recall + r.fnr - 1.0) <= 1e-15);

        // scores live in (0, 1), so nothing is accepted at threshold 1
        CHECK(report_from_scores(scores, labels, 1.0).fpr == 0.0);
    }
}

TEST_CASE("zero-denominator conventions yield zeros, not NaN") {
    const std::vector<double> scores{0.1, 0.2};
    const std::vector<int> labels{0, 0};  // no positives at all
    const EvalReport r = report_from_scores(scores, labels, 0.5);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
    CHECK(r.fnr == 0.0);
    CHECK(r.accuracy == 1.0);
}

TEST_CASE("sweep threshold spacing and monotonicity") {
    const Dataset ds = generate_synthetic(4, 3, 8, 1.0, 0.1, 31);
    const TinyModel model = init_model(8, 31);
    Rng rng(32);
    std::vector<Pair> pairs;
    for (int b = 0; b < 20; ++b) {
        const auto batch = sample_balanced_batch(ds, 3, rng);
        pairs.insert(pairs.end(), batch.begin(), batch.end());
    }

    const auto two = sweep_thresholds(model, ds, pairs, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].first == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(two[1].first == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

    const auto sweep = sweep_thresholds(model, ds, pairs, 19);
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        CHECK(sweep[i].second.fpr <= sweep[i - 1].second.fpr);
        CHECK(sweep[i].second.fnr >= sweep[i - 1].second.fnr);
    }
    CHECK_THROWS_AS((sweep_thresholds(model, ds, pairs, 1)), std::invalid_argument);
}

TEST_CASE("classification picks the class of an identical gallery vector") {
    // head scores by negated squared differences only: self-match maximal
    TinyModel model = init_model(4, 3);
    for (std::size_t j = 0; j < 4; ++j) model.head.weight.data[j] = -8.0;
    for (std::size_t j = 4; j < 8; ++j) model.head.weight.data[j] = 0.0;
    model.head.bias[0] = 0.0;

    std::vector<FeatureRecord> gal;
    for (std::uint32_t s = 0; s < 3; ++s) {
        FeatureRecord r;
        r.subject_id = s;
        r.vector = {0.25 * s, 1.0 - 0.3 * s, 0.5, 0.1 + 0.2 * s};
        gal.push_back(r);
    }
    std::vector<FeatureRecord> probe;
    probe.push_back(gal[1]);  // identical to the class-1 gallery vector
    const ClassifyReport rep = classify_gallery_probe(
        model, make_dataset(4, std::move(gal)), make_dataset(4, std::move(probe)));
    REQUIRE(rep.predicted.size() == 1);
    CHECK(rep.predicted[0] == 1);
    CHECK(rep.accuracy == 1.0);
}

TEST_CASE("classification ties break toward the lowest class id") {
    const TinyModel model = init_model(4, 5);
    const Vec v{0.1, 0.2, 0.3, 0.4};
    std::vector<FeatureRecord> gal;
    for (std::uint32_t s : {5u, 2u}) {
        FeatureRecord r;
        r.subject_id = s;
        r.vector = v;  // identical gallery vectors -> identical mean scores
        gal.push_back(r);
    }
    std::vector<FeatureRecord> probe;
    FeatureRecord pr;
    pr.subject_id = 5;
    pr.vector = v;
    probe.push_back(pr);
    const ClassifyReport rep = classify_gallery_probe(
        model, make_dataset(4, std::move(gal)), make_dataset(4, std::move(probe)));
    CHECK(rep.predicted[0] == 2);
}

TEST_CASE("probes of unknown classes are excluded and reported") {
    const TinyModel model = init_model(4, 5);
    std::vector<FeatureRecord> gal;
    FeatureRecord g;
    g.subject_id = 0;
    g.vector = {0.1, 0.2, 0.3, 0.4};
    gal.push_back(g);
    std::vector<FeatureRecord> probe;
    FeatureRecord p0 = g;
    FeatureRecord p1 = g;
    p1.subject_id = 9;  // not in the gallery
    probe.push_back(p0);
    probe.push_back(p1);
    const ClassifyReport rep = classify_gallery_probe(
        model, make_dataset(4, std::move(gal)), make_dataset(4, std::move(probe)));
    CHECK(rep.evaluated == 1);
    CHECK(rep.excluded == 1);
}

TEST_CASE("classification equals the brute-force oracle on a trained model") {
    const Dataset ds = generate_synthetic(4, 6, 16, 1.0, 0.05, 17);
    // 4 gallery + 2 probe records per class
    std::vector<FeatureRecord> gal;
    std::vector<FeatureRecord> probe;
    for (std::uint32_t id : ds.subjects) {
        const auto& pos = ds.positions(id);
        for (std::size_t i = 0; i < pos.size(); ++i) {
            (i < 4 ? gal : probe).push_back(ds.records[pos[i]]);
        }
    }
    const Dataset gallery = make_dataset(16, std::move(gal));
    const Dataset probes = make_dataset(16, std::move(probe));

    TinyModel model = init_model(16, 17);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 8;
    cfg.seed = 17;
    train(model, gallery, cfg);

    const ClassifyReport rep = classify_gallery_probe(model, gallery, probes);
    const std::vector<std::uint32_t> want = brute_force_classify(model, gallery, probes);
    REQUIRE(rep.predicted.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(rep.predicted[i] == want[i]);
}

TEST_CASE("bench produces the requested number of samples with a sane mean") {
    const Dataset ds = generate_synthetic(4, 3, 16, 1.0, 0.1, 23);
    const TinyModel model = init_model(16, 23);
    const BenchReport r = bench_matching(model, ds, 10, 23);
    CHECK(r.trials == 10);
    CHECK(r.match_seconds.size() == 10);
    CHECK(r.cached_match_seconds.size() == 10);

    double lo = r.match_seconds[0];
    double hi = r.match_seconds[0];
    for (double s : r.match_seconds) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    CHECK(r.mean_match_seconds >= lo);
    CHECK(r.mean_match_seconds <= hi);
    CHECK(r.mean_match_seconds > 0.0);
}

TEST_CASE("matching time grows with model size") {
    const Dataset small = generate_synthetic(3, 2, 64, 1.0, 0.05, 29);
    const Dataset big = generate_synthetic(3, 2, 4096, 1.0, 0.05, 29);
    const BenchReport fast = bench_matching(init_model(64, 1), small, 10, 29);
    const BenchReport slow = bench_matching(init_model(4096, 1), big, 10, 29);
    CHECK(slow.mean_match_seconds >= fast.mean_match_seconds);
}

TEST_CASE("report serializers carry the headline numbers") {
    const std::vector<double> scores{0.9, 0.1};
    const std::vector<int> labels{1, 0};
    const EvalReport r = report_from_scores(scores, labels, 0.5);
    const std::string table = format_report_table(r);
    CHECK(table.find("accuracy") != std::string::npos);
    const std::string kv = format_report_kv(r);
    CHECK(kv.find("accuracy=1") != std::string::npos);
    CHECK(kv.find("tp=1") != std::string::npos);
}

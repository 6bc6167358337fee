#include "tinysiamese/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace tinysiamese {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::vector<double> score_pairs(const TinyModel& model, const Dataset& ds,
                                std::span<const Pair> pairs, bool use_hadamard) {
    std::vector<double> scores;
    scores.reserve(pairs.size());
    for (const Pair& pr : pairs) {
        scores.push_back(
            score(model, ds.records[pr.left].vector, ds.records[pr.right].vector, use_hadamard));
    }
    return scores;
}

}  // namespace

EvalReport report_from_scores(std::span<const double> scores, std::span<const int> labels,
                              double threshold) {
    if (scores.empty()) throw std::invalid_argument("report_from_scores: no pairs");
    if (scores.size() != labels.size()) {
        throw std::invalid_argument("report_from_scores: score/label count mismatch");
    }
    EvalReport r;
    r.threshold = threshold;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++r.confusion.tp;
        else if (predicted && !actual) ++r.confusion.fp;
        else if (!predicted && !actual) ++r.confusion.tn;
        else ++r.confusion.fn;
    }
    const Confusion& c = r.confusion;
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    r.fpr = ratio(c.fp, c.fp + c.tn);
    r.fnr = ratio(c.fn, c.fn + c.tp);
    return r;
}

EvalReport evaluate_verification(const TinyModel& model, const Dataset& ds,
                                 std::span<const Pair> pairs, double threshold,
                                 bool use_hadamard) {
    const std::vector<double> scores = score_pairs(model, ds, pairs, use_hadamard);
    std::vector<int> labels;
    labels.reserve(pairs.size());
    for (const Pair& pr : pairs) labels.push_back(pr.label);
    return report_from_scores(scores, labels, threshold);
}

std::vector<std::pair<double, EvalReport>> sweep_thresholds(const TinyModel& model,
                                                            const Dataset& ds,
                                                            std::span<const Pair> pairs,
                                                            int steps, bool use_hadamard) {
    if (steps < 2) throw std::invalid_argument("sweep_thresholds: steps must be >= 2");
    const std::vector<double> scores = score_pairs(model, ds, pairs, use_hadamard);
    std::vector<int> labels;
    labels.reserve(pairs.size());
    for (const Pair& pr : pairs) labels.push_back(pr.label);

    std::vector<std::pair<double, EvalReport>> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int k = 1; k <= steps; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(steps + 1);
        out.emplace_back(t, report_from_scores(scores, labels, t));
    }
    return out;
}

ClassifyReport classify_gallery_probe(const TinyModel& model, const Dataset& gallery,
                                      const Dataset& probes, Aggregation aggregation,
                                      bool use_hadamard) {
    if (gallery.dim != probes.dim) {
        throw std::invalid_argument("classify_gallery_probe: gallery dim " +
                                    std::to_string(gallery.dim) + " vs probe dim " +
                                    std::to_string(probes.dim));
    }

    std::vector<Vec> gallery_emb;
    gallery_emb.reserve(gallery.size());
    for (const FeatureRecord& rec : gallery.records) gallery_emb.push_back(embed(model, rec.vector));

    ClassifyReport report;
    std::unordered_map<std::uint32_t, ClassSummary> per_class;
    std::size_t correct = 0;
    for (const FeatureRecord& probe : probes.records) {
        if (!gallery.has_subject(probe.subject_id)) {
            ++report.excluded;
            continue;
        }
        const Vec pe = embed(model, probe.vector);
        std::uint32_t best_class = 0;
        double best_score = 0.0;
        bool first = true;
        // subjects is sorted, so ties resolve toward the lowest class id.
        for (std::uint32_t cls : gallery.subjects) {
            const std::vector<std::size_t>& pos = gallery.positions(cls);
            double agg = aggregation == Aggregation::Mean ? 0.0 : -1.0;
            for (std::size_t gi : pos) {
                const double s = score_from_embeddings(model, pe, gallery_emb[gi], use_hadamard);
                if (aggregation == Aggregation::Mean) agg += s;
                else agg = std::max(agg, s);
            }
            if (aggregation == Aggregation::Mean) agg /= static_cast<double>(pos.size());
            if (first || agg > best_score) {
                best_score = agg;
                best_class = cls;
                first = false;
            }
        }
        report.predicted.push_back(best_class);
        ++report.evaluated;
        ClassSummary& cs = per_class[probe.subject_id];
        cs.subject = probe.subject_id;
        ++cs.probes;
        if (best_class == probe.subject_id) {
            ++cs.correct;
            ++correct;
        }
    }
    report.accuracy = report.evaluated == 0
                          ? 0.0
                          : static_cast<double>(correct) / static_cast<double>(report.evaluated);
    for (std::uint32_t id : probes.subjects) {
        const auto it = per_class.find(id);
        if (it != per_class.end()) report.per_class.push_back(it->second);
    }
    return report;
}

BenchReport bench_matching(const TinyModel& model, const Dataset& ds, int trials,
                           std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("bench_matching: trials must be >= 1");
    if (ds.dim != model.dim) {
        throw std::invalid_argument("bench_matching: dataset dim " + std::to_string(ds.dim) +
                                    " does not match model dim " + std::to_string(model.dim));
    }

    Rng rng(seed);
    using clock = std::chrono::steady_clock;
    BenchReport report;
    report.trials = trials;

    volatile double sink = 0.0;  // keep the timed work observable
    for (int i = 0; i < trials; ++i) {
        const Vec& a = ds.records[rng.index(ds.size())].vector;
        const Vec& b = ds.records[rng.index(ds.size())].vector;

        const auto t0 = clock::now();
        sink = score(model, a, b);
        const auto t1 = clock::now();
        report.match_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

        const Vec ea = embed(model, a);
        const Vec eb = embed(model, b);
        const auto t2 = clock::now();
        sink = score_from_embeddings(model, ea, eb);
        const auto t3 = clock::now();
        report.cached_match_seconds.push_back(std::chrono::duration<double>(t3 - t2).count());
    }
    (void)sink;

    for (double s : report.match_seconds) report.mean_match_seconds += s;
    report.mean_match_seconds /= static_cast<double>(trials);
    for (double s : report.cached_match_seconds) report.mean_cached_match_seconds += s;
    report.mean_cached_match_seconds /= static_cast<double>(trials);
    return report;
}

std::string format_report_table(const EvalReport& r) {
    std::string out;
    out += "metric      value\n";
    out += "accuracy    " + fmt("%.6f", r.accuracy) + "\n";
    out += "precision   " + fmt("%.6f", r.precision) + "\n";
    out += "recall      " + fmt("%.6f", r.recall) + "\n";
    out += "f1          " + fmt("%.6f", r.f1) + "\n";
    out += "fpr         " + fmt("%.6f", r.fpr) + "\n";
    out += "fnr         " + fmt("%.6f", r.fnr) + "\n";
    out += "threshold   " + fmt("%.6f", r.threshold) + "\n";
    out += "tp=" + std::to_string(r.confusion.tp) + " fp=" + std::to_string(r.confusion.fp) +
           " tn=" + std::to_string(r.confusion.tn) + " fn=" + std::to_string(r.confusion.fn) +
           "\n";
    return out;
}

std::string format_report_kv(const EvalReport& r) {
    std::string out;
    out += "accuracy=" + fmt("%.17g", r.accuracy) + "\n";
    out += "precision=" + fmt("%.17g", r.precision) + "\n";
    out += "recall=" + fmt("%.17g", r.recall) + "\n";
    out += "f1=" + fmt("%.17g", r.f1) + "\n";
    out += "fpr=" + fmt("%.17g", r.fpr) + "\n";
    out += "fnr=" + fmt("%.17g", r.fnr) + "\n";
    out += "threshold=" + fmt("%.17g", r.threshold) + "\n";
    out += "tp=" + std::to_string(r.confusion.tp) + "\n";
    out += "fp=" + std::to_string(r.confusion.fp) + "\n";
    out += "tn=" + std::to_string(r.confusion.tn) + "\n";
    out += "fn=" + std::to_string(r.confusion.fn) + "\n";
    return out;
}

std::string format_classify_table(const ClassifyReport& r) {
    std::string out;
    out += "accuracy    " + fmt("%.6f", r.accuracy) + "\n";
    out += "evaluated   " + std::to_string(r.evaluated) + "\n";
    out += "excluded    " + std::to_string(r.excluded) + "\n";
    out += "class  probes  correct\n";
    for (const ClassSummary& c : r.per_class) {
        out += std::to_string(c.subject) + "  " + std::to_string(c.probes) + "  " +
               std::to_string(c.correct) + "\n";
    }
    return out;
}

std::string format_classify_kv(const ClassifyReport& r) {
    std::string out;
    out += "accuracy=" + fmt("%.17g", r.accuracy) + "\n";
    out += "evaluated=" + std::to_string(r.evaluated) + "\n";
    out += "excluded=" + std::to_string(r.excluded) + "\n";
    for (const ClassSummary& c : r.per_class) {
        out += "class." + std::to_string(c.subject) + ".probes=" + std::to_string(c.probes) +
               "\n";
        out += "class." + std::to_string(c.subject) + ".correct=" + std::to_string(c.correct) +
               "\n";
    }
    return out;
}

std::string format_bench_table(const BenchReport& r) {
    std::string out;
    out += "trials               " + std::to_string(r.trials) + "\n";
    out += "mean_match_s         " + fmt("%.9f", r.mean_match_seconds) + "\n";
    out += "mean_cached_match_s  " + fmt("%.9f", r.mean_cached_match_seconds) + "\n";
    if (r.mean_train10_seconds > 0.0) {
        out += "mean_train10_s       " + fmt("%.6f", r.mean_train10_seconds) + "\n";
    }
    return out;
}

std::string format_bench_kv(const BenchReport& r) {
    std::string out;
    out += "trials=" + std::to_string(r.trials) + "\n";
    out += "mean_match_seconds=" + fmt("%.17g", r.mean_match_seconds) + "\n";
    out += "mean_cached_match_seconds=" + fmt("%.17g", r.mean_cached_match_seconds) + "\n";
    if (r.mean_train10_seconds > 0.0) {
        out += "mean_train10_seconds=" + fmt("%.17g", r.mean_train10_seconds) + "\n";
    }
    return out;
}

}  // namespace tinysiamese

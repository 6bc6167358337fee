#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tinysiamese/data.hpp"
#include "tinysiamese/model.hpp"

namespace tinysiamese {

struct Confusion {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

// Verification metrics at one decision threshold. Zero-denominator
// convention: precision/recall/f1 are 0 when undefined, fpr is 0 when
// there are no negatives, fnr is 0 when there are no positives.
struct EvalReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double fpr = 0.0;
    double fnr = 0.0;
    double threshold = 0.5;
    Confusion confusion;
};

// Metrics from precomputed scores; predicted similar iff p >= threshold.
EvalReport report_from_scores(std::span<const double> scores, std::span<const int> labels,
                              double threshold);

EvalReport evaluate_verification(const TinyModel& model, const Dataset& ds,
                                 std::span<const Pair> pairs, double threshold,
                                 bool use_hadamard = kDefaultUseHadamard);

// Reports at `steps` thresholds evenly spaced in (0, 1): k/(steps+1).
// Pairs are scored once and reused across thresholds.
std::vector<std::pair<double, EvalReport>> sweep_thresholds(
    const TinyModel& model, const Dataset& ds, std::span<const Pair> pairs, int steps,
    bool use_hadamard = kDefaultUseHadamard);

// How per-class gallery scores are combined into a class score.
enum class Aggregation { Mean, Max };

struct ClassSummary {
    std::uint32_t subject = 0;
    std::size_t probes = 0;
    std::size_t correct = 0;
};

struct ClassifyReport {
    double accuracy = 0.0;       // over evaluated probes
    std::size_t evaluated = 0;
    std::size_t excluded = 0;    // probes whose class is absent from the gallery
    std::vector<ClassSummary> per_class;
    std::vector<std::uint32_t> predicted;  // one entry per evaluated probe, in probe order
};

// Scores every probe against every gallery record; predicted class is the
// argmax of the aggregated per-class score, ties broken toward the lowest
// class id.
ClassifyReport classify_gallery_probe(const TinyModel& model, const Dataset& gallery,
                                      const Dataset& probes,
                                      Aggregation aggregation = Aggregation::Mean,
                                      bool use_hadamard = kDefaultUseHadamard);

// Matching-time benchmark over random pairs. The full variant embeds both
// inputs inside the timed region; the cached variant times only the
// distance layer, head and final sigmoid on precomputed embeddings.
struct BenchReport {
    std::vector<double> match_seconds;
    std::vector<double> cached_match_seconds;
    double mean_match_seconds = 0.0;
    double mean_cached_match_seconds = 0.0;
    double mean_train10_seconds = 0.0;  // filled by the bench command, 0 when not measured
    int trials = 0;
};

BenchReport bench_matching(const TinyModel& model, const Dataset& ds, int trials,
                           std::uint64_t seed);

// Plain-text table and line-oriented key=value serializations.
std::string format_report_table(const EvalReport& r);
std::string format_report_kv(const EvalReport& r);
std::string format_classify_table(const ClassifyReport& r);
std::string format_classify_kv(const ClassifyReport& r);
std::string format_bench_table(const BenchReport& r);
std::string format_bench_kv(const BenchReport& r);

}  // namespace tinysiamese

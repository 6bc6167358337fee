#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "tinysiamese/numerics.hpp"
#include "tinysiamese/rng.hpp"

namespace tinysiamese {

// One precomputed embedding with its subject identity.
struct FeatureRecord {
    std::uint32_t subject_id = 0;
    Vec vector;
};

// Immutable collection of feature records sharing one dimension.
struct Dataset {
    std::size_t dim = 0;
    std::vector<FeatureRecord> records;
    std::vector<std::uint32_t> subjects;  // sorted unique ids
    std::unordered_map<std::uint32_t, std::vector<std::size_t>> by_subject;

    std::size_t size() const { return records.size(); }
    const std::vector<std::size_t>& positions(std::uint32_t subject) const;
    bool has_subject(std::uint32_t subject) const { return by_subject.count(subject) != 0; }
};

// Validates dims and finiteness and builds the subject index.
Dataset make_dataset(std::size_t dim, std::vector<FeatureRecord> records);

enum class FileFormat { Binary, Text };

// Binary feature format "TSFV" v1: magic, version u16 LE, dim u32 LE,
// count u32 LE, then per record subject_id u32 LE + dim f32 LE values.
// Text format: one record per line, comma separated, subject id first;
// '#' starts a comment line. Values are stored in 32-bit precision either
// way and promoted to 64-bit on load.
Dataset load_dataset(const std::string& path, FileFormat format);
void save_dataset(const Dataset& ds, const std::string& path, FileFormat format);

// Synthetic clustered features: subject centers uniform in [0, spread]^dim,
// samples = center + gaussian noise of the given scale. Deterministic by seed.
Dataset generate_synthetic(std::size_t subjects, std::size_t samples_per_subject,
                           std::size_t dim, double spread, double noise, std::uint64_t seed);

// Two record positions in a dataset plus the same-subject label.
struct Pair {
    std::size_t left = 0;
    std::size_t right = 0;
    int label = 0;  // 1 same subject, 0 different
};

// One balanced iteration: picks a random anchor user with >= 2 samples,
// returns n_similar same-user pairs followed by n_similar pairs of the
// anchor against random other-user records. Positives never pair a record
// with itself.
std::vector<Pair> sample_balanced_batch(const Dataset& ds, std::size_t n_similar, Rng& rng);

// Deterministic per-subject split: about train_fraction of every subject's
// samples (at least one, and at least one held out where possible) go to
// the first dataset, the rest to the second.
std::pair<Dataset, Dataset> split_by_sample(const Dataset& ds, double train_fraction,
                                            std::uint64_t seed);

}  // namespace tinysiamese

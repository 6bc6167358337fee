#include "tinysiamese/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "binio.hpp"
#include "tinysiamese/errors.hpp"

namespace tinysiamese {

namespace {

constexpr char kMagic[4] = {'T', 'S', 'F', 'V'};
constexpr std::uint16_t kFormatVersion = 1;

Dataset load_binary(const std::string& path) {
    const auto buf = binio::read_file(path, "feature file");
    if (buf.empty()) throw DataError("feature file: '" + path + "' is empty");
    binio::Reader r(buf, "feature file");

    unsigned char magic[4];
    r.raw(magic, 4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw DataError("feature file: bad magic, not a TSFV file: '" + path + "'");
    }
    const std::uint16_t version = r.u16("version");
    if (version != kFormatVersion) {
        throw DataError("feature file: unsupported format version " + std::to_string(version));
    }
    const std::uint32_t dim = r.u32("dim");
    const std::uint32_t count = r.u32("record count");
    if (dim == 0) throw DataError("feature file: dim is zero");

    std::vector<FeatureRecord> records;
    records.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        FeatureRecord rec;
        rec.subject_id = r.u32("record subject id");
        rec.vector.resize(dim);
        for (std::uint32_t j = 0; j < dim; ++j) {
            rec.vector[j] = static_cast<double>(r.f32("record value"));
        }
        records.push_back(std::move(rec));
    }
    r.expect_end();
    return make_dataset(dim, std::move(records));
}

Dataset load_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("feature file: cannot open '" + path + "'");

    std::vector<FeatureRecord> records;
    std::size_t dim = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 2) {
            throw DataError("feature file: line " + std::to_string(line_no) +
                            " has no feature values");
        }

        FeatureRecord rec;
        std::size_t pos = 0;
        try {
            const long long id = std::stoll(fields[0], &pos);
            if (id < 0 || fields[0].find_first_not_of(" \t", pos) != std::string::npos) {
                throw std::invalid_argument("");
            }
            rec.subject_id = static_cast<std::uint32_t>(id);
        } catch (const std::exception&) {
            throw DataError("feature file: line " + std::to_string(line_no) +
                            " has a non-numeric subject id '" + fields[0] + "'");
        }
        for (std::size_t i = 1; i < fields.size(); ++i) {
            try {
                const double v = std::stod(fields[i], &pos);
                if (fields[i].find_first_not_of(" \t", pos) != std::string::npos) {
                    throw std::invalid_argument("");
                }
                rec.vector.push_back(static_cast<double>(static_cast<float>(v)));
            } catch (const std::exception&) {
                throw DataError("feature file: line " + std::to_string(line_no) +
                                " field " + std::to_string(i + 1) + " is not numeric: '" +
                                fields[i] + "'");
            }
        }

        if (dim == 0) {
            dim = rec.vector.size();
        } else if (rec.vector.size() != dim) {
            throw DataError("feature file: line " + std::to_string(line_no) + " has " +
                            std::to_string(rec.vector.size()) + " values, expected " +
                            std::to_string(dim));
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw DataError("feature file: '" + path + "' has no records");
    return make_dataset(dim, std::move(records));
}

}  // namespace

const std::vector<std::size_t>& Dataset::positions(std::uint32_t subject) const {
    const auto it = by_subject.find(subject);
    if (it == by_subject.end()) {
        throw std::invalid_argument("dataset: unknown subject id " + std::to_string(subject));
    }
    return it->second;
}

Dataset make_dataset(std::size_t dim, std::vector<FeatureRecord> records) {
    if (dim == 0) throw std::invalid_argument("make_dataset: dim must be positive");
    if (records.empty()) throw std::invalid_argument("make_dataset: no records");
    Dataset ds;
    ds.dim = dim;
    ds.records = std::move(records);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        const FeatureRecord& rec = ds.records[i];
        if (rec.vector.size() != dim) {
            throw DataError("dataset: record " + std::to_string(i) + " has dim " +
                            std::to_string(rec.vector.size()) + ", expected " +
                            std::to_string(dim));
        }
        for (double v : rec.vector) {
            if (!std::isfinite(v)) {
                throw DataError("dataset: record " + std::to_string(i) +
                                " contains a non-finite value");
            }
        }
        ds.by_subject[rec.subject_id].push_back(i);
    }
    for (const auto& [id, _] : ds.by_subject) ds.subjects.push_back(id);
    std::sort(ds.subjects.begin(), ds.subjects.end());
    return ds;
}

Dataset load_dataset(const std::string& path, FileFormat format) {
    return format == FileFormat::Binary ? load_binary(path) : load_text(path);
}

void save_dataset(const Dataset& ds, const std::string& path, FileFormat format) {
    if (format == FileFormat::Binary) {
        binio::Writer w;
        w.raw(reinterpret_cast<const unsigned char*>(kMagic), 4);
        w.u16(kFormatVersion);
        w.u32(static_cast<std::uint32_t>(ds.dim));
        w.u32(static_cast<std::uint32_t>(ds.records.size()));
        for (const FeatureRecord& rec : ds.records) {
            w.u32(rec.subject_id);
            for (double v : rec.vector) w.f32(static_cast<float>(v));
        }
        binio::write_file(path, w.buffer(), "feature file");
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("feature file: cannot open '" + path + "' for writing");
    out << "# subject_id, " << ds.dim << " feature values\n";
    char buf[64];
    for (const FeatureRecord& rec : ds.records) {
        out << rec.subject_id;
        for (double v : rec.vector) {
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(v)));
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw DataError("feature file: write to '" + path + "' failed");
}

Dataset generate_synthetic(std::size_t subjects, std::size_t samples_per_subject,
                           std::size_t dim, double spread, double noise, std::uint64_t seed) {
    if (subjects < 2) throw std::invalid_argument("generate_synthetic: need >= 2 subjects");
    if (samples_per_subject < 2) {
        throw std::invalid_argument("generate_synthetic: need >= 2 samples per subject");
    }
    if (dim == 0) throw std::invalid_argument("generate_synthetic: dim must be positive");
    if (!(noise > 0.0) || !(noise < spread)) {
        throw std::invalid_argument("generate_synthetic: need 0 < noise < spread");
    }

    Rng rng(seed);
    std::vector<FeatureRecord> records;
    records.reserve(subjects * samples_per_subject);
    Vec center(dim);
    for (std::size_t s = 0; s < subjects; ++s) {
        for (std::size_t d = 0; d < dim; ++d) center[d] = rng.uniform(0.0, spread);
        for (std::size_t k = 0; k < samples_per_subject; ++k) {
            FeatureRecord rec;
            rec.subject_id = static_cast<std::uint32_t>(s);
            rec.vector.resize(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                // Store in 32-bit precision, like features read from disk.
                rec.vector[d] = static_cast<double>(
                    static_cast<float>(center[d] + noise * rng.gaussian()));
            }
            records.push_back(std::move(rec));
        }
    }
    return make_dataset(dim, std::move(records));
}

std::vector<Pair> sample_balanced_batch(const Dataset& ds, std::size_t n_similar, Rng& rng) {
    if (n_similar == 0) throw std::invalid_argument("sample_balanced_batch: N must be positive");
    if (ds.subjects.size() < 2) {
        throw std::invalid_argument(
            "sample_balanced_batch: need >= 2 subjects to form dissimilar pairs");
    }
    std::vector<std::uint32_t> anchors;
    for (std::uint32_t id : ds.subjects) {
        if (ds.positions(id).size() >= 2) anchors.push_back(id);
    }
    if (anchors.empty()) {
        throw std::invalid_argument(
            "sample_balanced_batch: no subject has >= 2 samples, cannot form similar pairs");
    }

    const std::uint32_t anchor = anchors[rng.index(anchors.size())];
    const std::vector<std::size_t>& own = ds.positions(anchor);
    std::vector<std::size_t> others;
    others.reserve(ds.size() - own.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.records[i].subject_id != anchor) others.push_back(i);
    }

    std::vector<Pair> batch;
    batch.reserve(2 * n_similar);
    for (std::size_t k = 0; k < n_similar; ++k) {
        const std::size_t i = rng.index(own.size());
        std::size_t j = rng.index(own.size() - 1);
        if (j >= i) ++j;  // distinct record instances
        batch.push_back({own[i], own[j], 1});
    }
    for (std::size_t k = 0; k < n_similar; ++k) {
        const std::size_t i = rng.index(own.size());
        const std::size_t j = rng.index(others.size());
        batch.push_back({own[i], others[j], 0});
    }
    return batch;
}

std::pair<Dataset, Dataset> split_by_sample(const Dataset& ds, double train_fraction,
                                            std::uint64_t seed) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw std::invalid_argument("split_by_sample: fraction must be in (0, 1)");
    }
    Rng rng(seed);
    std::vector<FeatureRecord> train;
    std::vector<FeatureRecord> held;
    for (std::uint32_t id : ds.subjects) {
        std::vector<std::size_t> pos = ds.positions(id);
        for (std::size_t i = pos.size(); i-- > 1;) {
            std::swap(pos[i], pos[rng.index(i + 1)]);
        }
        const std::size_t k = pos.size();
        std::size_t take = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(k)));
        take = std::clamp<std::size_t>(take, 1, k > 1 ? k - 1 : 1);
        for (std::size_t i = 0; i < k; ++i) {
            (i < take ? train : held).push_back(ds.records[pos[i]]);
        }
    }
    if (held.empty()) throw std::invalid_argument("split_by_sample: held-out side is empty");
    return {make_dataset(ds.dim, std::move(train)), make_dataset(ds.dim, std::move(held))};
}

}  // namespace tinysiamese

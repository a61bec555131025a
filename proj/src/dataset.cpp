#include "paprlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "paprlab/parallel.hpp"
#include "paprlab/rng.hpp"

namespace paprlab {

namespace {

// XOR'd into the per-row stream seed to give the label search its own
// stream, disjoint from the bit-drawing stream.
constexpr std::uint64_t kMcsaSeedXor = 0x6D6373612D736565ULL;
constexpr std::uint32_t kMaxRedraws = 1000;

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const void* bytes, std::size_t len, std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double constellation_mean_energy(Modulation mod) {
    const int nbits = bits_per_symbol(mod);
    const int points = 1 << nbits;
    std::vector<ComplexSample> all;
    all.reserve(points);
    for (int c = 0; c < points; ++c) {
        std::vector<int> bits(nbits);
        for (int b = 0; b < nbits; ++b) bits[b] = (c >> (nbits - 1 - b)) & 1;
        all.push_back(map_bits(mod, bits)[0]);
    }
    return mean_energy(all);
}

std::uint64_t row_stream_seed(const DatasetMeta& meta, std::size_t row,
                              std::uint32_t attempt) {
    const std::uint64_t base = derive_seed(meta.master_seed, row);
    return attempt == 0 ? base : derive_seed(base, attempt);
}

std::vector<double> feature_row_from_seed(const DatasetMeta& meta, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const int nbits = bits_per_symbol(meta.modulation);
    const std::size_t n_data = meta.data_subcarriers();
    std::vector<int> bits(n_data * static_cast<std::size_t>(nbits));
    for (auto& b : bits) b = rng.next_bit();
    const auto points = map_bits(meta.modulation, bits);

    std::vector<double> out(meta.feature_width());
    for (std::size_t i = 0; i < n_data; ++i) {
        out[2 * i] = points[i].real();
        out[2 * i + 1] = points[i].imag();
    }
    return out;
}

McsaConfig mcsa_config_of(const DatasetMeta& meta) {
    McsaConfig cfg;
    cfg.target_papr_db = meta.mcsa_target_db;
    cfg.max_trials = meta.mcsa_max_trials;
    cfg.pilot_magnitude_mode = PilotMagnitudeMode::DATA_MEAN_ENERGY;
    cfg.pin_first_trial = true;
    return cfg;
}

std::uint64_t hash_row(const double* row, std::size_t width) {
    return fnv1a(row, width * sizeof(double));
}

} // namespace

std::size_t DatasetMeta::split_index() const {
    return static_cast<std::size_t>(
        std::llround(split_fraction * static_cast<double>(num_samples)));
}

void DatasetMeta::finalize() {
    if (pilot_indices.empty() && n_pilots > 0)
        pilot_indices = default_pilot_indices(k, n_pilots);
    pilot_magnitude = std::sqrt(constellation_mean_energy(modulation));
}

void DatasetMeta::validate() const {
    if (k < 2) throw std::domain_error("K must be >= 2");
    if (n_pilots < 1) throw std::domain_error("dataset needs at least one pilot");
    if (n_pilots >= k) throw std::domain_error("pilot count must be < K");
    if (pilot_indices.size() != n_pilots)
        throw std::domain_error("pilot_indices size does not match n_pilots");
    for (std::size_t i = 0; i < pilot_indices.size(); ++i) {
        if (pilot_indices[i] >= k) throw std::domain_error("pilot index out of range");
        if (i > 0 && pilot_indices[i] <= pilot_indices[i - 1])
            throw std::domain_error("pilot indices must be strictly increasing");
    }
    if (num_samples < 10) throw std::domain_error("num_samples must be >= 10");
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw std::domain_error("split_fraction must be in (0, 1)");
    const std::size_t split = split_index();
    if (split < 1 || split >= num_samples)
        throw std::domain_error("split leaves an empty partition");
    if (mcsa_max_trials < 1) throw std::domain_error("mcsa_max_trials must be >= 1");
}

SpectrumSymbol symbol_from_features(const DatasetMeta& meta, const double* row) {
    SpectrumSymbol symbol;
    symbol.modulation = meta.modulation;
    symbol.pilot_indices = meta.pilot_indices;
    symbol.values.assign(meta.k, {0.0, 0.0});
    const auto data_idx = symbol.data_indices();
    for (std::size_t i = 0; i < data_idx.size(); ++i)
        symbol.values[data_idx[i]] = {row[2 * i], row[2 * i + 1]};
    return symbol;
}

std::vector<double> generate_feature_row(const DatasetMeta& meta, std::size_t row,
                                         std::uint32_t attempt) {
    return feature_row_from_seed(meta, row_stream_seed(meta, row, attempt));
}

McsaResult label_row(const DatasetMeta& meta, std::size_t row, std::uint32_t attempt) {
    const std::uint64_t seed = row_stream_seed(meta, row, attempt);
    const auto feats = feature_row_from_seed(meta, seed);
    const auto symbol = symbol_from_features(meta, feats.data());
    return mcsa_search(symbol, mcsa_config_of(meta), seed ^ kMcsaSeedXor);
}

PaprDataset generate(const DatasetMeta& meta_in, unsigned threads) {
    DatasetMeta meta = meta_in;
    meta.finalize();
    meta.validate();

    PaprDataset ds;
    ds.meta = meta;
    ds.split_index = meta.split_index();
    ds.features = Matrix(meta.num_samples, meta.feature_width());
    ds.labels = Matrix(meta.num_samples, meta.n_pilots);

    const std::size_t width = meta.feature_width();
    const McsaConfig cfg = mcsa_config_of(meta);

    auto emit_row = [&](std::size_t r, std::uint32_t attempt) {
        const std::uint64_t seed = row_stream_seed(meta, r, attempt);
        const auto feats = feature_row_from_seed(meta, seed);
        std::copy(feats.begin(), feats.end(), ds.features.row_ptr(r));
        const auto symbol = symbol_from_features(meta, feats.data());
        const McsaResult res = mcsa_search(symbol, cfg, seed ^ kMcsaSeedXor);
        for (std::size_t i = 0; i < meta.n_pilots; ++i)
            ds.labels(r, i) = res.pilots.value(i);
    };

    parallel_for(ds.split_index, threads, [&](std::size_t r) { emit_row(r, 0); });

    // Index the training rows so test rows that duplicate one can be redrawn.
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> train_index;
    train_index.reserve(ds.split_index * 2);
    for (std::size_t r = 0; r < ds.split_index; ++r)
        train_index[hash_row(ds.features.row_ptr(r), width)].push_back(r);

    auto duplicates_training_row = [&](const double* row) {
        const auto it = train_index.find(hash_row(row, width));
        if (it == train_index.end()) return false;
        for (std::size_t r : it->second) {
            if (std::memcmp(row, ds.features.row_ptr(r), width * sizeof(double)) == 0)
                return true;
        }
        return false;
    };

    const std::size_t n_test = meta.num_samples - ds.split_index;
    parallel_for(n_test, threads, [&](std::size_t i) {
        const std::size_t r = ds.split_index + i;
        std::uint32_t attempt = 0;
        while (true) {
            const auto feats = generate_feature_row(meta, r, attempt);
            if (!duplicates_training_row(feats.data())) break;
            if (++attempt > kMaxRedraws)
                throw std::runtime_error(
                    "could not draw a test row distinct from the training set; "
                    "sample space too small for the requested corpus");
        }
        emit_row(r, attempt);
    });

    return ds;
}

BigUint modulation_power(unsigned order, unsigned exponent) {
    BigUint result = 1;
    for (unsigned i = 0; i < exponent; ++i) result *= order;
    return result;
}

BigUint sample_space_size(const DatasetMeta& meta) {
    const unsigned order = 1u << bits_per_symbol(meta.modulation);
    return modulation_power(order, static_cast<unsigned>(meta.data_subcarriers()));
}

double coverage_fraction(std::uint64_t train_rows, const BigUint& space) {
    if (space == 0) throw std::domain_error("empty sample space");
    return static_cast<double>(train_rows) / space.convert_to<double>();
}

std::uint64_t meta_hash(const DatasetMeta& meta) {
    std::ostringstream canon;
    canon << "v1|k=" << meta.k << "|np=" << meta.n_pilots << "|pidx=";
    for (std::size_t i = 0; i < meta.pilot_indices.size(); ++i)
        canon << (i ? "," : "") << meta.pilot_indices[i];
    canon << "|mod=" << modulation_name(meta.modulation)
          << "|n=" << meta.num_samples
          << "|split=" << format_double(meta.split_fraction)
          << "|seed=" << meta.master_seed
          << "|target=" << format_double(meta.mcsa_target_db)
          << "|trials=" << meta.mcsa_max_trials
          << "|mag=" << format_double(meta.pilot_magnitude);
    const std::string s = canon.str();
    return fnv1a(s.data(), s.size());
}

std::string meta_to_json(const DatasetMeta& meta) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["k"] = meta.k;
    j["n_pilots"] = meta.n_pilots;
    j["pilot_indices"] = meta.pilot_indices;
    j["modulation"] = modulation_name(meta.modulation);
    j["num_samples"] = meta.num_samples;
    j["split_fraction"] = meta.split_fraction;
    j["split_index"] = meta.split_index();
    j["master_seed"] = meta.master_seed;
    j["mcsa_target_db"] = meta.mcsa_target_db;
    j["mcsa_max_trials"] = meta.mcsa_max_trials;
    j["pilot_magnitude"] = meta.pilot_magnitude;
    j["rng"] = "splitmix64-v1";
    j["feature_encoding"] = "interleaved re/im of data subcarriers, ascending index";
    return j.dump(2) + "\n";
}

DatasetMeta meta_from_json(const std::string& text) {
    DatasetMeta meta;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("schema_version").get<int>() != 1)
            throw ParseError("unsupported dataset schema version");
        meta.k = j.at("k").get<std::size_t>();
        meta.n_pilots = j.at("n_pilots").get<std::size_t>();
        meta.pilot_indices = j.at("pilot_indices").get<std::vector<std::size_t>>();
        meta.modulation = modulation_from_name(j.at("modulation").get<std::string>());
        meta.num_samples = j.at("num_samples").get<std::size_t>();
        meta.split_fraction = j.at("split_fraction").get<double>();
        meta.master_seed = j.at("master_seed").get<std::uint64_t>();
        meta.mcsa_target_db = j.at("mcsa_target_db").get<double>();
        meta.mcsa_max_trials = j.at("mcsa_max_trials").get<std::uint32_t>();
        meta.pilot_magnitude = j.at("pilot_magnitude").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("dataset meta: ") + e.what());
    }
    return meta;
}

namespace {

void write_matrix_csv(const Matrix& m, const std::string& path,
                      const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c)
            out << (c ? "," : "") << format_double(row[c]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix read_matrix_csv(const std::string& path, std::size_t rows, std::size_t cols) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": missing header row");

    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!std::getline(in, line))
            throw ParseError(path + ": truncated at row " + std::to_string(r) + " of " +
                             std::to_string(rows));
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (std::size_t c = 0; c < cols; ++c) {
            if (c > 0) {
                if (p >= end || *p != ',')
                    throw ParseError(path + ": row " + std::to_string(r) +
                                     ": expected ',' before column " + std::to_string(c));
                ++p;
            }
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc{})
                throw ParseError(path + ": row " + std::to_string(r) + " column " +
                                 std::to_string(c) + ": bad float");
            p = res.ptr;
            m(r, c) = v;
        }
        if (p != end)
            throw ParseError(path + ": row " + std::to_string(r) + ": trailing content");
    }
    while (std::getline(in, line))
        if (!line.empty())
            throw ParseError(path + ": more than " + std::to_string(rows) + " data rows");
    return m;
}

constexpr char kBinaryMagic[8] = {'P', 'A', 'P', 'R', 'D', 'S', '1', '\n'};

void write_matrix_block(std::ofstream& out, const Matrix& m) {
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
}

void read_matrix_block(std::ifstream& in, Matrix& m, const std::string& path,
                       const char* which) {
    in.read(reinterpret_cast<char*>(m.data().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != m.size() * sizeof(double))
        throw ParseError(path + ": truncated " + which + " block");
}

std::vector<std::string> feature_header(const DatasetMeta& meta) {
    SpectrumSymbol probe;
    probe.values.assign(meta.k, {0.0, 0.0});
    probe.pilot_indices = meta.pilot_indices;
    std::vector<std::string> names;
    for (std::size_t k : probe.data_indices()) {
        names.push_back("re" + std::to_string(k));
        names.push_back("im" + std::to_string(k));
    }
    return names;
}

std::vector<std::string> label_header(const DatasetMeta& meta) {
    std::vector<std::string> names;
    for (std::size_t k : meta.pilot_indices) names.push_back("pilot" + std::to_string(k));
    return names;
}

bool file_exists(const std::string& path) {
    std::ifstream f(path);
    return f.good();
}

void validate_loaded(const PaprDataset& ds) {
    const DatasetMeta& meta = ds.meta;
    if (ds.features.rows() != meta.num_samples || ds.labels.rows() != meta.num_samples)
        throw ParseError("dataset row count does not match metadata");
    if (ds.features.cols() != meta.feature_width())
        throw ParseError("feature width does not match metadata");
    if (ds.labels.cols() != meta.n_pilots)
        throw ParseError("label width does not match metadata");
    if (meta.modulation == Modulation::QPSK) {
        const double mag = meta.pilot_magnitude;
        for (std::size_t r = 0; r < ds.labels.rows(); ++r) {
            for (std::size_t c = 0; c < ds.labels.cols(); ++c) {
                const double v = ds.labels(r, c);
                if (v != mag && v != -mag)
                    throw ParseError("labels: row " + std::to_string(r) + " column " +
                                     std::to_string(c) +
                                     ": value is not a valid pilot (+-sqrt(E))");
            }
        }
    }
}

} // namespace

void save(const PaprDataset& dataset, const std::string& prefix, bool binary) {
    {
        std::ofstream meta(prefix + ".meta.json");
        if (!meta) throw std::runtime_error("cannot open for writing: " + prefix + ".meta.json");
        meta << meta_to_json(dataset.meta);
    }
    if (binary) {
        const std::string path = prefix + ".bin";
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out.write(kBinaryMagic, sizeof kBinaryMagic);
        write_matrix_block(out, dataset.features);
        write_matrix_block(out, dataset.labels);
        if (!out) throw std::runtime_error("write failed: " + path);
    } else {
        write_matrix_csv(dataset.features, prefix + ".features.csv",
                         feature_header(dataset.meta));
        write_matrix_csv(dataset.labels, prefix + ".labels.csv", label_header(dataset.meta));
    }
}

PaprDataset load(const std::string& prefix) {
    PaprDataset ds;
    {
        std::ifstream meta_file(prefix + ".meta.json");
        if (!meta_file) throw ParseError("cannot open: " + prefix + ".meta.json");
        std::ostringstream text;
        text << meta_file.rdbuf();
        ds.meta = meta_from_json(text.str());
    }
    ds.meta.validate();
    ds.split_index = ds.meta.split_index();

    if (file_exists(prefix + ".features.csv")) {
        ds.features = read_matrix_csv(prefix + ".features.csv", ds.meta.num_samples,
                                      ds.meta.feature_width());
        ds.labels =
            read_matrix_csv(prefix + ".labels.csv", ds.meta.num_samples, ds.meta.n_pilots);
    } else {
        const std::string path = prefix + ".bin";
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ParseError("cannot open: " + path + " (no .features.csv either)");
        char magic[sizeof kBinaryMagic];
        in.read(magic, sizeof magic);
        if (in.gcount() != sizeof magic || std::memcmp(magic, kBinaryMagic, sizeof magic) != 0)
            throw ParseError(path + ": bad magic");
        ds.features = Matrix(ds.meta.num_samples, ds.meta.feature_width());
        ds.labels = Matrix(ds.meta.num_samples, ds.meta.n_pilots);
        read_matrix_block(in, ds.features, path, "features");
        read_matrix_block(in, ds.labels, path, "labels");
    }

    validate_loaded(ds);
    return ds;
}

} // namespace paprlab

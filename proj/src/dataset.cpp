#include "distfit/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <unordered_set>

#include "distfit/error.hpp"
#include "text_util.hpp"

namespace distfit {

std::size_t Corpus::total_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.size();
    return n;
}

const AbundanceSample& Corpus::at(std::string_view label) const {
    for (const auto& s : samples) {
        if (s.species_label == label) return s;
    }
    throw ValidationError("no sample labelled '" + std::string(label) + "'");
}

bool Corpus::contains(std::string_view label) const noexcept {
    return std::any_of(samples.begin(), samples.end(),
                       [&](const AbundanceSample& s) { return s.species_label == label; });
}

AbundanceSample make_sample(std::string label, std::vector<double> values, std::string species_name,
                            std::string source_ref) {
    if (values.empty()) throw ValidationError("sample '" + label + "' has no values");
    for (double v : values) {
        if (!(v > 0.0) || v > 100.0) {
            throw ValidationError("sample '" + label + "': abundance " + detail::format_shortest(v) +
                                  " outside (0, 100]");
        }
    }
    std::stable_sort(values.begin(), values.end(), std::greater<>());
    return AbundanceSample{std::move(label), std::move(species_name), std::move(source_ref),
                           std::move(values)};
}

Corpus parse_corpus(std::istream& in) {
    struct Pending {
        std::string label;
        std::vector<double> values;
    };
    std::vector<Pending> pending;
    std::unordered_set<std::string> seen;
    bool header_seen = false;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = detail::split_csv(view);
        if (!header_seen) {
            if (fields.size() != 2 || fields[0] != "species" || fields[1] != "abundance") {
                throw ParseError(line_no, "expected header 'species,abundance'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 2 || fields[0].empty()) {
            throw ParseError(line_no, "expected 'species,abundance'");
        }
        double value = 0.0;
        if (!detail::parse_double(fields[1], value)) {
            throw ParseError(line_no, "invalid abundance '" + std::string(fields[1]) + "'");
        }
        const std::string label(fields[0]);
        if (pending.empty() || pending.back().label != label) {
            if (!seen.insert(label).second) {
                throw ValidationError("duplicate species label '" + label + "' (line " +
                                      std::to_string(line_no) + ")");
            }
            pending.push_back({label, {}});
        }
        pending.back().values.push_back(value);
    }
    if (!header_seen) throw ParseError(0, "missing header 'species,abundance'");

    Corpus corpus;
    corpus.samples.reserve(pending.size());
    for (auto& p : pending) corpus.samples.push_back(make_sample(std::move(p.label), std::move(p.values)));
    return corpus;
}

Corpus parse_corpus(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_corpus(in);
}

void apply_metadata(Corpus& corpus, std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = detail::split_csv(view);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "species") {
                throw ParseError(line_no, "expected header 'species,species_name,source_ref'");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields");
        for (auto& s : corpus.samples) {
            if (s.species_label == fields[0]) {
                s.species_name = std::string(fields[1]);
                s.source_ref = std::string(fields[2]);
            }
        }
    }
}

Corpus load_corpus(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw Error("cannot open corpus file '" + csv_path.string() + "'");
    Corpus corpus = parse_corpus(in);
    auto meta_path = csv_path;
    meta_path.replace_extension(".meta.csv");
    if (std::ifstream meta(meta_path); meta) apply_metadata(corpus, meta);
    return corpus;
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out = "species,abundance\n";
    for (const auto& s : corpus.samples) {
        for (double v : s.values) {
            out += s.species_label;
            out += ',';
            out += detail::format_shortest(v);
            out += '\n';
        }
    }
    return out;
}

std::string serialize_metadata(const Corpus& corpus) {
    std::string out = "species,species_name,source_ref\n";
    for (const auto& s : corpus.samples) {
        out += s.species_label + ',' + s.species_name + ',' + s.source_ref + '\n';
    }
    return out;
}

AbundanceSample pool(const Corpus& corpus, std::string label) {
    if (corpus.empty()) throw ValidationError("cannot pool an empty corpus");
    std::vector<double> all;
    all.reserve(corpus.total_count());
    for (const auto& s : corpus.samples) all.insert(all.end(), s.values.begin(), s.values.end());
    std::string name = corpus.samples.size() == 1 ? corpus.samples.front().species_name : std::string{};
    return make_sample(std::move(label), std::move(all), std::move(name), "pooled");
}

// Table of compound abundances as printed, one row per species.
Corpus builtin_corpus() {
    struct Row {
        const char* label;
        const char* name;
        const char* ref;
        std::vector<double> values;
    };
    static const Row rows[] = {
        {"OCBA", "Ocimum basilicum", "Sokovic et al. 2007",
         {69.25, 2.56, 2.48, 2.38, 2.10, 1.87, 1.66, 1.42, 1.13, 1.11, 1.05, 1.02,
          0.91,  0.82, 0.82, 0.63, 0.58, 0.56, 0.51, 0.46, 0.43, 0.43, 0.39, 0.38,
          0.31,  0.30, 0.30, 0.27, 0.19, 0.12, 0.11, 0.10, 0.09, 0.06, 0.06, 0.05}},
        {"SPPU", "Spondias purpurea", "Koziol & Macia 1998",
         {38.99, 18.51, 6.95, 3.07, 1.30, 1.29, 1.19, 0.89, 0.88, 0.76, 0.66, 0.55, 0.52, 0.49, 0.47,
          0.45,  0.40,  0.26, 0.22, 0.21, 0.20, 0.19, 0.12, 0.11, 0.08, 0.07, 0.05, 0.04, 0.03}},
        {"MEPI", "Mentha piperita", "Sokovic et al. 2007",
         {37.40, 17.37, 12.70, 6.85, 6.82, 5.59, 2.52, 1.29, 1.23, 0.81, 0.79, 0.69, 0.50,
          0.48,  0.47,  0.41,  0.29, 0.28, 0.19, 0.17, 0.17, 0.13, 0.13, 0.12, 0.10, 0.10}},
        {"MESP3", "Mentha spicata", "Sokovic et al. 2007",
         {49.52, 21.92, 5.77, 3.06, 2.28, 1.36, 1.27, 0.99, 0.71, 0.71, 0.68, 0.57,
          0.52,  0.49,  0.49, 0.48, 0.45, 0.40, 0.33, 0.31, 0.30, 0.26, 0.22, 0.07}},
        {"THVU", "Thymus vulgaris", "Sokovic et al. 2007",
         {48.92, 18.99, 4.08, 3.45, 3.45, 2.23, 1.78, 1.73, 1.72, 1.30, 1.21, 1.17,
          1.06,  0.83,  0.76, 0.74, 0.65, 0.58, 0.46, 0.41, 0.33, 0.30, 0.17, 0.16}},
        {"SAOF2", "Salvia officinalis", "Sokovic et al. 2007",
         {31.65, 16.67, 8.70, 6.90, 4.77, 4.61, 3.41, 3.03, 2.64, 2.56, 2.20, 1.74,
          1.09,  0.99,  0.37, 0.35, 0.30, 0.29, 0.14, 0.12, 0.11, 0.07, 0.03}},
        {"MARE6", "Matricaria chamomilla", "Sokovic et al. 2007",
         {43.47, 9.09, 8.50, 8.48, 6.06, 5.62, 5.21, 1.92, 1.65, 0.39,
          0.38,  0.35, 0.35, 0.32, 0.29, 0.16, 0.15, 0.12, 0.10, 0.08}},
        {"LAAN81", "Lavandula angustifolia", "Sokovic et al. 2007",
         {27.54, 27.21, 8.50, 6.54, 4.20, 3.34, 2.95, 2.51, 2.44, 2.09,
          2.02,  1.07,  0.59, 0.58, 0.25, 0.19, 0.16, 0.09, 0.06, 0.04}},
        {"CILI5", "Citrus limon", "Sokovic et al. 2007",
         {59.68, 17.25, 11.21, 2.85, 1.72, 1.29, 0.87, 0.84, 0.64, 0.55, 0.44, 0.39, 0.29, 0.27, 0.21,
          0.17, 0.13}},
        {"ORVU", "Origanum vulgare", "Sokovic et al. 2007", {64.50, 10.90, 10.80, 3.50, 2.50, 2.20, 2.20, 1.90}},
    };
    Corpus corpus;
    for (const auto& r : rows) corpus.samples.push_back(make_sample(r.label, r.values, r.name, r.ref));
    return corpus;
}

}  // namespace distfit

#pragma once

// Abundance corpora: one sample per species, values in percent units, sorted
// descending. Corpora come from CSV text (`species,abundance` rows) or from the
// built-in ten-species table.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace distfit {

struct AbundanceSample {
    std::string species_label;
    std::string species_name;
    std::string source_ref;
    std::vector<double> values;  // percent, strictly descending-or-equal

    std::size_t size() const noexcept { return values.size(); }
    bool operator==(const AbundanceSample&) const = default;
};

struct Corpus {
    std::vector<AbundanceSample> samples;

    std::size_t total_count() const noexcept;
    const AbundanceSample& at(std::string_view label) const;
    bool contains(std::string_view label) const noexcept;
    bool empty() const noexcept { return samples.empty(); }
    bool operator==(const Corpus&) const = default;
};

// Validates values (0 < v <= 100, non-empty) and sorts descending with a stable
// sort. Throws ValidationError naming the species and offending value.
AbundanceSample make_sample(std::string label, std::vector<double> values,
                            std::string species_name = {}, std::string source_ref = {});

// Parses the `species,abundance` CSV format. Lines starting with '#' and blank
// lines are ignored. Samples keep first-appearance order; all rows of a species
// must be contiguous, a label reappearing after another species is a duplicate.
Corpus parse_corpus(std::istream& in);
Corpus parse_corpus(std::string_view text);

// Attaches `species,species_name,source_ref` metadata rows to matching samples.
void apply_metadata(Corpus& corpus, std::istream& in);

// Reads a corpus CSV, plus `<stem>.meta.csv` next to it when present.
Corpus load_corpus(const std::filesystem::path& csv_path);

// Inverse of parse_corpus (values only; metadata goes to the .meta.csv form).
std::string serialize_corpus(const Corpus& corpus);
std::string serialize_metadata(const Corpus& corpus);

// Ten-species corpus of compound abundances, 227 observations in total.
Corpus builtin_corpus();

// All observations of all samples in one sample, re-sorted descending.
AbundanceSample pool(const Corpus& corpus, std::string label);

}  // namespace distfit

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vstemma/distance_matrix.hpp"
#include "vstemma/stemma.hpp"

namespace vstemma {

// Text is handled as sequences of Unicode scalar values after NFC.
struct NormalizationOptions {
    bool lowercase = true;
    bool strip_whitespace = true;
    bool strip_combining = true;

    static NormalizationOptions none() { return {false, false, false}; }
};

/// NFC, then lowercase, whitespace removal and removal of nonspacing marks
/// (category Mn), each when enabled, then NFC again. Mark removal works on
/// the canonical decomposition so that precomposed letters lose their accents
/// too. The result is a fixpoint: normalising it again changes nothing.
std::u32string normalize_text(std::u32string_view text, const NormalizationOptions& opts);
std::string normalize_text(std::string_view utf8, const NormalizationOptions& opts);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view utf8_a, std::string_view utf8_b);

// levenshtein(norm(ref), norm(hyp)) / |norm(ref)|; may exceed 1.
double cer(std::string_view ref, std::string_view hyp, const NormalizationOptions& opts = {});

// Projects both texts (canonically decomposed) onto their Mn characters and
// scores the projected sequences.
double diacritics_cer(std::string_view ref, std::string_view hyp);

struct ConfusionStats {
    std::map<std::pair<char32_t, char32_t>, long long> substitutions;  // (ref, hyp)
    std::map<char32_t, long long> insertions;                           // hyp char
    std::map<char32_t, long long> deletions;                            // ref char

    long long total() const;
    bool empty() const { return total() == 0; }
};

// DP backtrace preferring the diagonal (match/substitution), then deletion,
// then insertion at equal cost.
ConfusionStats edit_alignment(std::u32string_view ref, std::u32string_view hyp);

struct ConfusionVocabulary {
    std::vector<std::pair<char32_t, char32_t>> substitutions;
    std::vector<char32_t> insertions;
    std::vector<char32_t> deletions;

    std::size_t dimension() const { return substitutions.size() + insertions.size() + deletions.size(); }
};

ConfusionVocabulary build_vocabulary(std::span<const ConfusionStats> systems);

// Counts in vocabulary order (substitutions, insertions, deletions), L2-normalised.
std::vector<double> confusion_vector(const ConfusionStats& stats, const ConfusionVocabulary& vocab);

// 1 - cosine similarity; two zero vectors are at distance 0, a zero and a
// nonzero vector at distance 1.
DistanceMatrix cosine_distance_matrix(std::span<const std::vector<double>> vectors, std::span<const std::string> labels);

PhyloTree model_similarity_tree(std::span<const std::vector<double>> vectors, std::span<const std::string> labels);

using LetterDistribution = std::map<char32_t, double>;

LetterDistribution letter_distribution(std::string_view utf8, const NormalizationOptions& opts = {});

// Mean absolute frequency difference over the union alphabet.
double distribution_distance(const LetterDistribution& p, const LetterDistribution& q);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(std::span<const double> values);

double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

struct RankRow {
    std::string a;
    std::string b;
    double test = 0.0;
    double test_rank = 0.0;
    double gold = 0.0;
    double gold_rank = 0.0;
};

struct RankReport {
    std::vector<RankRow> rows;
    std::optional<double> rho;  // absent when fewer than two pairs or a constant rank vector
};

RankReport rank_report(const DistanceMatrix& gold, const DistanceMatrix& test);

// Pairwise Levenshtein distances of normalised texts.
DistanceMatrix levenshtein_matrix(std::span<const std::string> utf8_texts, std::span<const std::string> labels,
                                  const NormalizationOptions& opts = {});

DistanceMatrix distribution_distance_matrix(std::span<const std::string> utf8_texts, std::span<const std::string> labels,
                                            const NormalizationOptions& opts = {});

}  // namespace vstemma

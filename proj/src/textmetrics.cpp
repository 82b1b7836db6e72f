#include "vstemma/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "vstemma/error.hpp"
#include "vstemma/unicode.hpp"

namespace vstemma {

namespace {

std::u32string normalize_once(std::u32string_view text, const NormalizationOptions& opts) {
    std::u32string s = unicode::nfc(text);
    if (opts.lowercase) s = unicode::to_lower(s);
    if (opts.strip_whitespace) std::erase_if(s, unicode::is_whitespace);
    if (opts.strip_combining) {
        s = unicode::nfd(s);
        std::erase_if(s, unicode::is_nonspacing_mark);
    }
    return unicode::nfc(s);
}

}  // namespace

std::u32string normalize_text(std::u32string_view text, const NormalizationOptions& opts) {
    std::u32string current = normalize_once(text, opts);
    // Repeat until a pass changes nothing.
    for (int guard = 0; guard < 8; ++guard) {
        std::u32string next = normalize_once(current, opts);
        if (next == current) return current;
        current = std::move(next);
    }
    return current;
}

std::string normalize_text(std::string_view utf8, const NormalizationOptions& opts) {
    return unicode::encode_utf8(normalize_text(unicode::decode_utf8(utf8), opts));
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::size_t levenshtein(std::string_view utf8_a, std::string_view utf8_b) {
    return levenshtein(unicode::nfc(unicode::decode_utf8(utf8_a)), unicode::nfc(unicode::decode_utf8(utf8_b)));
}

double cer(std::string_view ref, std::string_view hyp, const NormalizationOptions& opts) {
    const auto r = normalize_text(unicode::decode_utf8(ref), opts);
    const auto h = normalize_text(unicode::decode_utf8(hyp), opts);
    if (r.empty()) throw InputError("cer: reference is empty after normalization");
    return static_cast<double>(levenshtein(r, h)) / static_cast<double>(r.size());
}

namespace {

std::u32string project_marks(std::string_view utf8) {
    std::u32string s = unicode::nfd(unicode::nfc(unicode::decode_utf8(utf8)));
    std::erase_if(s, [](char32_t c) { return !unicode::is_nonspacing_mark(c); });
    return s;
}

}  // namespace

double diacritics_cer(std::string_view ref, std::string_view hyp) {
    const auto r = project_marks(ref);
    const auto h = project_marks(hyp);
    if (r.empty()) throw InputError("diacritics_cer: reference contains no combining marks");
    return static_cast<double>(levenshtein(r, h)) / static_cast<double>(r.size());
}

long long ConfusionStats::total() const {
    long long t = 0;
    for (const auto& [k, n] : substitutions) t += n;
    for (const auto& [k, n] : insertions) t += n;
    for (const auto& [k, n] : deletions) t += n;
    return t;
}

ConfusionStats edit_alignment(std::u32string_view ref, std::u32string_view hyp) {
    const std::size_t n = ref.size(), m = hyp.size();
    std::vector<std::size_t> table((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return table[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1), at(i - 1, j) + 1, at(i, j - 1) + 1});
        }
    }
    ConfusionStats stats;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const bool same = ref[i - 1] == hyp[j - 1];
            if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
                if (!same) ++stats.substitutions[{ref[i - 1], hyp[j - 1]}];
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            ++stats.deletions[ref[i - 1]];
            --i;
            continue;
        }
        ++stats.insertions[hyp[j - 1]];
        --j;
    }
    return stats;
}

ConfusionVocabulary build_vocabulary(std::span<const ConfusionStats> systems) {
    std::set<std::pair<char32_t, char32_t>> subs;
    std::set<char32_t> ins, dels;
    for (const auto& s : systems) {
        for (const auto& [k, n] : s.substitutions) subs.insert(k);
        for (const auto& [k, n] : s.insertions) ins.insert(k);
        for (const auto& [k, n] : s.deletions) dels.insert(k);
    }
    return {{subs.begin(), subs.end()}, {ins.begin(), ins.end()}, {dels.begin(), dels.end()}};
}

std::vector<double> confusion_vector(const ConfusionStats& stats, const ConfusionVocabulary& vocab) {
    std::vector<double> v;
    v.reserve(vocab.dimension());
    auto lookup = [](const auto& map, const auto& key) -> double {
        auto it = map.find(key);
        return it == map.end() ? 0.0 : static_cast<double>(it->second);
    };
    for (const auto& k : vocab.substitutions) v.push_back(lookup(stats.substitutions, k));
    for (const auto& k : vocab.insertions) v.push_back(lookup(stats.insertions, k));
    for (const auto& k : vocab.deletions) v.push_back(lookup(stats.deletions, k));
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm > 0.0) {
        for (double& x : v) x /= norm;
    }
    return v;
}

DistanceMatrix cosine_distance_matrix(std::span<const std::vector<double>> vectors, std::span<const std::string> labels) {
    if (vectors.size() != labels.size()) throw InputError("cosine_distance_matrix: label count differs from vector count");
    DistanceMatrix m(std::vector<std::string>(labels.begin(), labels.end()));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            const auto& a = vectors[i];
            const auto& b = vectors[j];
            if (a.size() != b.size()) throw InputError("cosine_distance_matrix: vector dimensions differ");
            double d = 0.0;
            if (a != b) {
                const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
                const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
                if (na == 0.0 && nb == 0.0) {
                    d = 0.0;
                } else if (na == 0.0 || nb == 0.0) {
                    d = 1.0;
                } else {
                    const double cos = std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (na * nb);
                    d = std::clamp(1.0 - cos, 0.0, 2.0);
                }
            }
            m.set(i, j, d);
        }
    }
    return m;
}

PhyloTree model_similarity_tree(std::span<const std::vector<double>> vectors, std::span<const std::string> labels) {
    if (vectors.size() < 2) throw InputError("model_similarity_tree needs at least 2 systems");
    return upgma(cosine_distance_matrix(vectors, labels));
}

LetterDistribution letter_distribution(std::string_view utf8, const NormalizationOptions& opts) {
    const auto text = normalize_text(unicode::decode_utf8(utf8), opts);
    if (text.empty()) throw InputError("letter_distribution: text is empty after normalization");
    std::map<char32_t, long long> counts;
    for (char32_t c : text) ++counts[c];
    LetterDistribution dist;
    for (const auto& [c, n] : counts) dist[c] = static_cast<double>(n) / static_cast<double>(text.size());
    return dist;
}

double distribution_distance(const LetterDistribution& p, const LetterDistribution& q) {
    if (p.empty() || q.empty()) throw InputError("distribution_distance: empty distribution");
    std::set<char32_t> alphabet;
    for (const auto& [c, f] : p) alphabet.insert(c);
    for (const auto& [c, f] : q) alphabet.insert(c);
    double sum = 0.0;
    for (char32_t c : alphabet) {
        const auto ip = p.find(c);
        const auto iq = q.find(c);
        sum += std::abs((ip == p.end() ? 0.0 : ip->second) - (iq == q.end() ? 0.0 : iq->second));
    }
    return sum / static_cast<double>(alphabet.size());
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("correlation: length mismatch (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 2) throw InputError("correlation needs at least 2 values");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw NumericalError("correlation undefined: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("spearman: length mismatch (" + std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    return pearson(rx, ry);
}

RankReport rank_report(const DistanceMatrix& gold, const DistanceMatrix& test) {
    if (gold.labels != test.labels) {
        // Same label set in a different order is fine; anything else is not.
        auto a = gold.labels, b = test.labels;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b) throw InputError("rank_report: gold and test matrices have different labels");
    }
    RankReport report;
    std::vector<double> g, t;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        for (std::size_t j = i + 1; j < gold.size(); ++j) {
            const std::size_t ti = test.index_of(gold.labels[i]);
            const std::size_t tj = test.index_of(gold.labels[j]);
            report.rows.push_back({gold.labels[i], gold.labels[j], test(ti, tj), 0.0, gold(i, j), 0.0});
            g.push_back(gold(i, j));
            t.push_back(test(ti, tj));
        }
    }
    const auto gr = midranks(g);
    const auto tr = midranks(t);
    for (std::size_t p = 0; p < report.rows.size(); ++p) {
        report.rows[p].gold_rank = gr[p];
        report.rows[p].test_rank = tr[p];
    }
    if (report.rows.size() >= 2) {
        try {
            report.rho = pearson(tr, gr);
        } catch (const NumericalError&) {
            report.rho.reset();
        }
    }
    return report;
}

DistanceMatrix levenshtein_matrix(std::span<const std::string> utf8_texts, std::span<const std::string> labels,
                                  const NormalizationOptions& opts) {
    if (utf8_texts.size() != labels.size()) throw InputError("levenshtein_matrix: label count differs from text count");
    std::vector<std::u32string> norm;
    for (const auto& t : utf8_texts) norm.push_back(normalize_text(unicode::decode_utf8(t), opts));
    DistanceMatrix m(std::vector<std::string>(labels.begin(), labels.end()));
    for (std::size_t i = 0; i < norm.size(); ++i) {
        for (std::size_t j = i + 1; j < norm.size(); ++j) m.set(i, j, static_cast<double>(levenshtein(norm[i], norm[j])));
    }
    return m;
}

DistanceMatrix distribution_distance_matrix(std::span<const std::string> utf8_texts, std::span<const std::string> labels,
                                            const NormalizationOptions& opts) {
    if (utf8_texts.size() != labels.size()) throw InputError("distribution_distance_matrix: label count differs from text count");
    std::vector<LetterDistribution> dists;
    for (const auto& t : utf8_texts) dists.push_back(letter_distribution(t, opts));
    DistanceMatrix m(std::vector<std::string>(labels.begin(), labels.end()));
    for (std::size_t i = 0; i < dists.size(); ++i) {
        for (std::size_t j = i + 1; j < dists.size(); ++j) m.set(i, j, distribution_distance(dists[i], dists[j]));
    }
    return m;
}

}  // namespace vstemma

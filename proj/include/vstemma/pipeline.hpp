#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vstemma/clustering.hpp"
#include "vstemma/distance_matrix.hpp"
#include "vstemma/embedding.hpp"
#include "vstemma/imaging.hpp"
#include "vstemma/mapping.hpp"
#include "vstemma/stemma.hpp"
#include "vstemma/synth.hpp"

namespace vstemma::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kToolName = "vstemma";
inline constexpr const char* kVersion = "0.1.0";

struct RunParameters {
    int k = 0;  // required before clustering
    std::uint64_t seed = 42;
    double discard_fraction = 0.1;
    NConvention n_convention = NConvention::retained;
    EmbeddingConfig embedding;
    SegmentParams imaging;
    int max_iter = 300;
    double tol = 1e-6;
    int jobs = 1;
};

struct ManuscriptEntry {
    std::string id;
    std::vector<fs::path> image_paths;
    std::optional<fs::path> gold_transcript_path;
};

// Relative paths are resolved against the manifest's directory when loaded.
struct CorpusManifest {
    std::vector<ManuscriptEntry> manuscripts;
    RunParameters parameters;

    void validate(bool check_files) const;
    std::vector<std::string> ids() const;
};

CorpusManifest load_manifest(const fs::path& path);
void save_manifest(const fs::path& path, const CorpusManifest& manifest);

// Stage outputs, all under one work directory:
//   <out>/<id>/crops/<id>_NNNNN.png, <out>/<id>/crops.json
//   <out>/<id>/embeddings.txt
//   <out>/<id>/clusters.json (+ clusters/cluster_<i>/ when requested)
//   <out>/distances.csv, <out>/mappings/mapping_<A>_<B>.json
//   <out>/stemma_nj.nwk, <out>/tree_upgma.nwk
//   <out>/run_record.json
fs::path manuscript_dir(const fs::path& out, const std::string& id);

struct StageFailure {
    std::string manuscript_id;
    std::string message;
};

struct SegmentSummary {
    std::vector<std::pair<std::string, int>> glyph_counts;
    std::vector<StageFailure> failures;
};

// Segments every manuscript; a failing manuscript is reported and skipped.
SegmentSummary run_segment(const CorpusManifest& manifest, const fs::path& out);

void run_embed(const CorpusManifest& manifest, const fs::path& out);

std::vector<Clustering> run_cluster(const CorpusManifest& manifest, const fs::path& out, bool copy_crops = false);

PairwiseResult run_distances(const CorpusManifest& manifest, const fs::path& out);

enum class TreeMethod { nj, upgma };
TreeMethod parse_tree_method(const std::string& name);

// Builds a tree from a distance CSV and writes its Newick form to `out_file`.
PhyloTree run_tree(const fs::path& distances_csv, TreeMethod method, const fs::path& out_file);

// Persisted stage artefacts.
std::vector<GlyphCrop> load_crops(const fs::path& manuscript_directory);
void save_clustering(const fs::path& path, const Clustering& c, const RunParameters& params);
Clustering load_clustering(const fs::path& path);
void save_mapping(const fs::path& path, const ClusterMapping& m);

// Merges a stage entry into <out>/run_record.json.
void record_stage(const fs::path& out, const CorpusManifest& manifest, const std::string& stage);

std::string read_text_file(const fs::path& path);

struct RunSummary {
    SegmentSummary segmentation;
    std::optional<PhyloTree> nj;
    std::optional<PhyloTree> upgma;
};

// Every stage in sequence, then both trees (stemma_nj.nwk, tree_upgma.nwk).
// Stops after segmentation if any manuscript failed.
RunSummary run_all(const CorpusManifest& manifest, const fs::path& out);

struct SyntheticCorpus {
    synth::Tradition tradition;
    CorpusManifest manifest;
    DistanceMatrix gold_levenshtein;
    DistanceMatrix letter_distances;
};

// Writes texts/, pages/, manifest.json, gold_levenshtein.csv, letter_distances.csv and tradition.json.
SyntheticCorpus write_synthetic_corpus(const fs::path& out, const synth::TraditionParams& tp,
                                       const synth::PageLayout& layout, std::uint64_t run_seed);

}  // namespace vstemma::pipeline

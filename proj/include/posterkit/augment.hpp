#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "posterkit/dataset_io.hpp"

namespace posterkit::augment {

struct EndpointConfig {
  std::string base_url;
  std::string route;
  std::string api_key_env;
};

struct AugmentConfig {
  int n_candidates = 10;
  int k_selected = 3;
  std::string caption_template = "Please generate {Caption} in advertisement poster.";
  EndpointConfig captioner;
  EndpointConfig depth_estimator;
  EndpointConfig image_generator;
  EndpointConfig similarity_scorer;
  int max_retries = 2;
  int timeout_ms = 60000;
  std::string images_root = "aug";  // candidates land at <root>/<source_id>/<i>.png
};

// Minimal TOML subset: [section] headers with string/int/float keys.
AugmentConfig load_augment_config(const std::string& path);

struct Candidate {
  std::string image_path;
  double score = 0.0;  // higher = more similar to the original
};

struct AugmentJob {
  std::string source_id;
  std::string caption;
  std::string prompt;
  std::vector<Candidate> candidates;
  std::vector<std::size_t> selected;  // indices into candidates, best first
};

// Indices of the k largest scores, descending, ties broken by index.
// Throws std::invalid_argument for k > scores.size().
std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k);

// Renders the caption script for one caption string.
std::string caption_prompt(const AugmentConfig& cfg, const std::string& caption);

// Runs one augmentation job: caption -> depth -> n candidate images ->
// similarity against the original -> top-k selection. Candidate images
// are stored under cfg.images_root. Throws on endpoint failure after
// retries; nothing is emitted for a failed job.
AugmentJob run_job(const data::SampleRecord& source, const AugmentConfig& cfg,
                   const std::string& source_images_dir);

// The k SampleRecords for a completed job: provenance=augmented,
// parent_id=source.id, elements copied unchanged.
std::vector<data::SampleRecord> records_from_job(const data::SampleRecord& source,
                                                 const AugmentJob& job);

}  // namespace posterkit::augment

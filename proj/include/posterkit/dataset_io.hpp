#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "posterkit/layout.hpp"

namespace posterkit::data {

enum class Split { Train, Val, Test };
enum class Provenance { Original, Augmented };

std::string_view split_name(Split s);
std::optional<Split> split_from_name(std::string_view name);
std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view name);

inline constexpr int kSchemaVersion = 1;

struct SampleRecord {
  std::string id;
  Profile dataset = Profile::CGL;
  Canvas canvas;
  std::vector<Element> elements;
  std::optional<std::vector<std::string>> texts;
  Split split = Split::Train;
  Provenance provenance = Provenance::Original;
  std::optional<std::string> parent_id;

  Layout layout() const { return Layout{canvas, elements, texts}; }
};

// Stable 64-bit id hash (FNV-1a mixed through a splitmix64 finalizer
// with a fixed seed); the basis for split assignment and per-record
// seeding.
std::uint64_t stable_id_hash(std::string_view id);

// Stable hash split: 80% train / 10% val / 10% test, a pure function of
// the id.
Split assign_split(std::string_view id);

struct IngestStats {
  std::size_t ingested = 0;
  std::size_t dropped_category = 0;
  std::size_t dropped_bounds = 0;
  std::size_t skipped_missing_image = 0;
};

// Reads a COCO-style annotation file (images / annotations / categories
// arrays) and emits one record per poster whose image file exists under
// images_dir. Records containing categories outside the profile are
// dropped and counted. Throws std::runtime_error on malformed files.
std::vector<SampleRecord> ingest(const std::string& annotation_file,
                                 const std::string& images_dir, Profile profile,
                                 IngestStats& stats, std::ostream* log = nullptr);

std::string record_to_json_line(const SampleRecord& record);
SampleRecord record_from_json_line(std::string_view line);

std::vector<SampleRecord> read_records_jsonl(const std::string& path);
void write_records_jsonl(const std::string& path, std::span<const SampleRecord> records);

}  // namespace posterkit::data

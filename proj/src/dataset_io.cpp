#include "posterkit/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace posterkit::data {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Seed for the split hash; changing it re-shuffles every split.
constexpr std::uint64_t kSplitSeed = 0x706f737465726b31ULL;

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64_finalize(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::optional<Category> category_from_dataset_name(const std::string& name) {
  const std::string n = lower(name);
  if (n == "logo") return Category::Logo;
  if (n == "text") return Category::Text;
  if (n == "underlay") return Category::Underlay;
  if (n == "embellishment") return Category::Embellishment;
  return std::nullopt;
}

ordered_json canvas_to_json(const Canvas& c) {
  ordered_json j;
  j["width"] = c.width;
  j["height"] = c.height;
  j["image_ref"] = c.image_ref;
  if (c.saliency_ref) j["saliency_ref"] = *c.saliency_ref;
  return j;
}

Canvas canvas_from_json(const json& j) {
  Canvas c;
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.image_ref = j.value("image_ref", std::string());
  if (j.contains("saliency_ref") && !j["saliency_ref"].is_null())
    c.saliency_ref = j["saliency_ref"].get<std::string>();
  if (c.width <= 0 || c.height <= 0)
    throw std::runtime_error("canvas dimensions must be positive");
  return c;
}

ordered_json elements_to_json(const std::vector<Element>& elements) {
  ordered_json arr = ordered_json::array();
  for (const Element& e : elements) {
    ordered_json je;
    je["category"] = std::string(category_name(e.category));
    je["x"] = e.x;
    je["y"] = e.y;
    je["w"] = e.w;
    je["h"] = e.h;
    arr.push_back(je);
  }
  return arr;
}

std::vector<Element> elements_from_json(const json& arr) {
  std::vector<Element> out;
  for (const json& je : arr) {
    const auto cat = category_from_name(je.at("category").get<std::string>());
    if (!cat) throw std::runtime_error("unknown category in record");
    out.push_back(Element{*cat, je.at("x").get<int>(), je.at("y").get<int>(),
                          je.at("w").get<int>(), je.at("h").get<int>()});
  }
  return out;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

std::optional<Split> split_from_name(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  return std::nullopt;
}

std::string_view provenance_name(Provenance p) {
  return p == Provenance::Original ? "original" : "augmented";
}

std::optional<Provenance> provenance_from_name(std::string_view name) {
  if (name == "original") return Provenance::Original;
  if (name == "augmented") return Provenance::Augmented;
  return std::nullopt;
}

std::uint64_t stable_id_hash(std::string_view id) {
  return splitmix64_finalize(fnv1a64(id) ^ kSplitSeed);
}

Split assign_split(std::string_view id) {
  const std::uint64_t h = stable_id_hash(id);
  // Map to [0,1): 0.8 / 0.1 / 0.1.
  const double u = double(h >> 11) * 0x1.0p-53;
  if (u < 0.8) return Split::Train;
  if (u < 0.9) return Split::Val;
  return Split::Test;
}

std::vector<SampleRecord> ingest(const std::string& annotation_file,
                                 const std::string& images_dir, Profile profile,
                                 IngestStats& stats, std::ostream* log) {
  std::ifstream in(annotation_file);
  if (!in) throw std::runtime_error("cannot open " + annotation_file);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed annotation file: " + std::string(e.what()));
  }
  if (!root.contains("images") || !root.contains("annotations"))
    throw std::runtime_error("annotation file missing images/annotations arrays");

  std::map<std::int64_t, std::string> category_names;
  if (root.contains("categories")) {
    for (const json& c : root["categories"])
      category_names[c.at("id").get<std::int64_t>()] = c.at("name").get<std::string>();
  }

  struct PendingElement {
    Element element;
    std::optional<std::string> text;
  };
  std::map<std::int64_t, std::vector<PendingElement>> by_image;
  std::map<std::int64_t, bool> image_droppable;
  for (const json& a : root["annotations"]) {
    const std::int64_t image_id = a.at("image_id").get<std::int64_t>();
    std::optional<Category> cat;
    if (a.contains("category_id")) {
      const auto it = category_names.find(a.at("category_id").get<std::int64_t>());
      if (it != category_names.end()) cat = category_from_dataset_name(it->second);
    } else if (a.contains("category")) {
      cat = category_from_dataset_name(a.at("category").get<std::string>());
    }
    if (cat && !profile_allows(profile, *cat)) cat = std::nullopt;
    if (!cat) {
      image_droppable[image_id] = true;
      continue;
    }
    const json& bbox = a.at("bbox");
    PendingElement pe;
    pe.element = Element{*cat, int(std::llround(bbox.at(0).get<double>())),
                         int(std::llround(bbox.at(1).get<double>())),
                         int(std::llround(bbox.at(2).get<double>())),
                         int(std::llround(bbox.at(3).get<double>()))};
    if (a.contains("text") && a["text"].is_string())
      pe.text = a["text"].get<std::string>();
    by_image[image_id].push_back(std::move(pe));
  }

  const std::filesystem::path img_root(images_dir);
  std::vector<SampleRecord> records;
  for (const json& im : root["images"]) {
    const std::int64_t image_id = im.at("id").get<std::int64_t>();
    const std::string file_name = im.at("file_name").get<std::string>();
    if (image_droppable.count(image_id)) {
      ++stats.dropped_category;
      if (log) *log << "drop " << file_name << ": category outside profile\n";
      continue;
    }
    if (!std::filesystem::exists(img_root / file_name)) {
      ++stats.skipped_missing_image;
      if (log) *log << "skip " << file_name << ": image file missing\n";
      continue;
    }
    SampleRecord rec;
    rec.id = std::string(profile_name(profile)) + ":" + std::to_string(image_id);
    rec.dataset = profile;
    rec.canvas.width = im.at("width").get<int>();
    rec.canvas.height = im.at("height").get<int>();
    rec.canvas.image_ref = file_name;
    if (im.contains("saliency_file_name"))
      rec.canvas.saliency_ref = im["saliency_file_name"].get<std::string>();
    std::vector<std::string> texts;
    bool out_of_bounds = false;
    for (const PendingElement& pe : by_image[image_id]) {
      if (!bounds_ok(pe.element, rec.canvas)) {
        out_of_bounds = true;
        break;
      }
      rec.elements.push_back(pe.element);
      if (pe.element.category == Category::Text)
        texts.push_back(pe.text.value_or(""));
    }
    if (out_of_bounds) {
      // Boxes are never clamped; a record that does not fit its canvas
      // is dropped like any other unusable annotation.
      ++stats.dropped_bounds;
      if (log) *log << "drop " << file_name << ": element out of canvas bounds\n";
      continue;
    }
    const bool any_text_payload =
        std::any_of(texts.begin(), texts.end(), [](const std::string& t) { return !t.empty(); });
    if (any_text_payload) rec.texts = texts;
    rec.split = assign_split(rec.id);
    rec.provenance = Provenance::Original;
    records.push_back(std::move(rec));
    ++stats.ingested;
  }
  return records;
}

std::string record_to_json_line(const SampleRecord& record) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = record.id;
  j["dataset"] = std::string(profile_name(record.dataset));
  j["canvas"] = canvas_to_json(record.canvas);
  j["elements"] = elements_to_json(record.elements);
  if (record.texts) j["texts"] = *record.texts;
  j["split"] = std::string(split_name(record.split));
  j["provenance"] = std::string(provenance_name(record.provenance));
  if (record.parent_id) j["parent_id"] = *record.parent_id;
  return j.dump();
}

SampleRecord record_from_json_line(std::string_view line) {
  const json j = json::parse(line);
  SampleRecord rec;
  rec.id = j.at("id").get<std::string>();
  const auto profile = profile_from_name(j.value("dataset", "CGL"));
  if (!profile) throw std::runtime_error("unknown dataset profile");
  rec.dataset = *profile;
  rec.canvas = canvas_from_json(j.at("canvas"));
  rec.elements = elements_from_json(j.at("elements"));
  if (j.contains("texts") && !j["texts"].is_null())
    rec.texts = j["texts"].get<std::vector<std::string>>();
  const auto split = split_from_name(j.value("split", "train"));
  if (!split) throw std::runtime_error("unknown split");
  rec.split = *split;
  const auto prov = provenance_from_name(j.value("provenance", "original"));
  if (!prov) throw std::runtime_error("unknown provenance");
  rec.provenance = *prov;
  if (j.contains("parent_id") && !j["parent_id"].is_null())
    rec.parent_id = j["parent_id"].get<std::string>();
  return rec;
}

std::vector<SampleRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<SampleRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json_line(line));
  }
  return out;
}

void write_records_jsonl(const std::string& path, std::span<const SampleRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const SampleRecord& r : records) out << record_to_json_line(r) << "\n";
}

}  // namespace posterkit::data

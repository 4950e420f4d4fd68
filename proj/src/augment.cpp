#include "posterkit/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "posterkit/base64.hpp"

namespace posterkit::augment {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(bytes.data(), std::streamsize(bytes.size()));
}

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(std::uint8_t(s.front()))) s.erase(s.begin());
  while (!s.empty() && is_space(std::uint8_t(s.back()))) s.pop_back();
  return s;
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
    return s.substr(1, s.size() - 2);
  return s;
}

// One round trip against an endpoint, JSON in / JSON out, with retries
// on transport failure.
json call_endpoint(const EndpointConfig& ep, const json& request, int max_retries,
                   int timeout_ms) {
  httplib::Client client(ep.base_url);
  client.set_connection_timeout(0, timeout_ms * 1000LL);
  client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!ep.api_key_env.empty()) {
    if (const char* key = std::getenv(ep.api_key_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string payload = request.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    auto res = client.Post(ep.route, headers, payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    json j = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      last_error = "malformed endpoint response";
      continue;
    }
    return j;
  }
  throw std::runtime_error("endpoint " + ep.base_url + ep.route + " failed: " + last_error);
}

}  // namespace

AugmentConfig load_augment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  AugmentConfig cfg;
  EndpointConfig* section = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "captioner") section = &cfg.captioner;
      else if (name == "depth_estimator") section = &cfg.depth_estimator;
      else if (name == "image_generator") section = &cfg.image_generator;
      else if (name == "similarity_scorer") section = &cfg.similarity_scorer;
      else throw std::runtime_error("unknown config section: " + name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + " has no '='");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (section) {
      if (key == "base_url") section->base_url = value;
      else if (key == "route") section->route = value;
      else if (key == "api_key_env") section->api_key_env = value;
      else throw std::runtime_error("unknown endpoint key: " + key);
    } else {
      if (key == "n_candidates") cfg.n_candidates = std::stoi(value);
      else if (key == "k_selected") cfg.k_selected = std::stoi(value);
      else if (key == "caption_template") cfg.caption_template = value;
      else if (key == "max_retries") cfg.max_retries = std::stoi(value);
      else if (key == "timeout_ms") cfg.timeout_ms = std::stoi(value);
      else if (key == "images_root") cfg.images_root = value;
      else throw std::runtime_error("unknown config key: " + key);
    }
  }
  if (cfg.k_selected < 1 || cfg.k_selected > cfg.n_candidates)
    throw std::runtime_error("k_selected must be in [1, n_candidates]");
  return cfg;
}

std::vector<std::size_t> select_top_k(std::span<const double> scores, std::size_t k) {
  if (k > scores.size())
    throw std::invalid_argument("cannot select more samples than scored");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t(0));
  std::partial_sort(idx.begin(), idx.begin() + std::ptrdiff_t(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;  // stable tie-break by candidate index
                    });
  idx.resize(k);
  return idx;
}

std::string caption_prompt(const AugmentConfig& cfg, const std::string& caption) {
  std::string prompt = cfg.caption_template;
  const std::string placeholder = "{Caption}";
  const auto pos = prompt.find(placeholder);
  if (pos == std::string::npos)
    throw std::runtime_error("caption_template lacks the {Caption} placeholder");
  prompt.replace(pos, placeholder.size(), caption);
  return prompt;
}

AugmentJob run_job(const data::SampleRecord& source, const AugmentConfig& cfg,
                   const std::string& source_images_dir) {
  if (cfg.k_selected < 1 || cfg.k_selected > cfg.n_candidates)
    throw std::invalid_argument("k_selected must be in [1, n_candidates]");

  const std::string original_bytes =
      read_file_bytes(source_images_dir + "/" + source.canvas.image_ref);
  const std::string original_b64 = base64_encode(original_bytes);

  AugmentJob job;
  job.source_id = source.id;

  json caption_res = call_endpoint(cfg.captioner, json{{"image_b64", original_b64}},
                                   cfg.max_retries, cfg.timeout_ms);
  job.caption = caption_res.at("caption").get<std::string>();
  job.prompt = caption_prompt(cfg, job.caption);

  json depth_res = call_endpoint(cfg.depth_estimator, json{{"image_b64", original_b64}},
                                 cfg.max_retries, cfg.timeout_ms);
  const std::string depth_b64 = depth_res.at("depth_b64").get<std::string>();

  const std::filesystem::path job_dir =
      std::filesystem::path(cfg.images_root) / job.source_id;
  std::filesystem::create_directories(job_dir);

  std::vector<double> scores;
  scores.reserve(std::size_t(cfg.n_candidates));
  for (int i = 0; i < cfg.n_candidates; ++i) {
    ordered_json gen_req;
    gen_req["prompt"] = job.prompt;
    gen_req["depth_b64"] = depth_b64;
    gen_req["index"] = i;
    json gen_res =
        call_endpoint(cfg.image_generator, gen_req, cfg.max_retries, cfg.timeout_ms);
    const std::string image_bytes = base64_decode(gen_res.at("image_b64").get<std::string>());
    const std::string path = (job_dir / (std::to_string(i) + ".png")).string();
    write_file_bytes(path, image_bytes);

    ordered_json score_req;
    score_req["image_b64"] = base64_encode(image_bytes);
    score_req["reference_b64"] = original_b64;
    json score_res =
        call_endpoint(cfg.similarity_scorer, score_req, cfg.max_retries, cfg.timeout_ms);
    const double score = score_res.at("score").get<double>();
    job.candidates.push_back(Candidate{path, score});
    scores.push_back(score);
  }

  job.selected = select_top_k(scores, std::size_t(cfg.k_selected));
  return job;
}

std::vector<data::SampleRecord> records_from_job(const data::SampleRecord& source,
                                                 const AugmentJob& job) {
  std::vector<data::SampleRecord> out;
  out.reserve(job.selected.size());
  for (std::size_t rank = 0; rank < job.selected.size(); ++rank) {
    const std::size_t idx = job.selected[rank];
    data::SampleRecord rec = source;
    rec.id = source.id + "-aug-" + std::to_string(idx);
    rec.provenance = data::Provenance::Augmented;
    rec.parent_id = source.id;
    rec.canvas.image_ref = job.candidates[idx].image_path;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace posterkit::augment

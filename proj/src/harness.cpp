#include "posterkit/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "posterkit/frechet.hpp"
#include "posterkit/html_codec.hpp"

namespace posterkit::harness {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct ParsedUrl {
  std::string host_port;  // scheme://host:port for httplib
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("backend url must start with http://");
  const auto path_begin = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_begin == std::string::npos) {
    out.host_port = url;
    out.path = "/";
  } else {
    out.host_port = url.substr(0, path_begin);
    out.path = url.substr(path_begin);
  }
  return out;
}

bool retryable_status(int status) {
  return status == 408 || status == 429 || status == 500 || status == 502 ||
         status == 503 || status == 504;
}

// Extracts the completion text from a backend response body.
std::optional<std::string> completion_text(const std::string& body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) return std::nullopt;
  if (j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const json& c = j["choices"][0];
    if (c.contains("text") && c["text"].is_string()) return c["text"].get<std::string>();
  }
  return std::nullopt;
}

void classify(LedgerEntry& entry, const tasks::TaskSample& sample) {
  const auto outcome = codec::parse(entry.raw_output, sample.canvas, sample.profile);
  if (outcome.ok()) {
    entry.outcome = Outcome::Ok;
    entry.elements = outcome.layout->elements;
  } else {
    entry.outcome = outcome.failure_kind == codec::FailureKind::Overflow
                        ? Outcome::Overflow
                        : Outcome::AbnormalFormat;
    entry.detail = outcome.detail;
  }
}

}  // namespace

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Ok: return "ok";
    case Outcome::AbnormalFormat: return "abnormal_format";
    case Outcome::Overflow: return "overflow";
    case Outcome::Transport: return "transport";
  }
  return "transport";
}

std::optional<Outcome> outcome_from_name(std::string_view name) {
  if (name == "ok") return Outcome::Ok;
  if (name == "abnormal_format") return Outcome::AbnormalFormat;
  if (name == "overflow") return Outcome::Overflow;
  if (name == "transport") return Outcome::Transport;
  return std::nullopt;
}

std::size_t RunLedger::count(Outcome o) const {
  std::size_t n = 0;
  for (const LedgerEntry& e : entries) n += e.outcome == o;
  return n;
}

RunLedger generate(std::span<const tasks::TaskSample> samples,
                   const BackendConfig& backend, const SamplingConfig& sc) {
  const ParsedUrl url = split_url(backend.url);
  std::string bearer;
  if (!backend.api_key_env.empty()) {
    if (const char* key = std::getenv(backend.api_key_env.c_str())) bearer = key;
  }

  RunLedger ledger;
  ledger.entries.resize(samples.size());

  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(sc.parallelism, int(samples.size())));

  auto worker = [&]() {
    httplib::Client client(url.host_port);
    client.set_connection_timeout(0, sc.timeout_ms * 1000LL);
    client.set_read_timeout(sc.timeout_ms / 1000, (sc.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!bearer.empty()) headers.emplace("Authorization", "Bearer " + bearer);

    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= samples.size()) break;
      const tasks::TaskSample& sample = samples[i];

      ordered_json body;
      body["model"] = backend.model;
      body["prompt"] = tasks::prompt_for(sample);
      body["top_p"] = sc.top_p;
      body["temperature"] = sc.temperature;
      body["max_tokens"] = sc.max_tokens;
      if (backend.attach_image_ref) body["image_ref"] = sample.canvas.image_ref;
      const std::string payload = body.dump();

      LedgerEntry entry;
      entry.id = sample.source_id.empty() ? "sample-" + std::to_string(i) : sample.source_id;
      entry.request_id = i;
      entry.canvas = sample.canvas;
      entry.profile = sample.profile;

      const auto start = std::chrono::steady_clock::now();
      bool done = false;
      for (int attempt = 0; attempt <= sc.max_retries && !done; ++attempt) {
        entry.retries = attempt;
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
          entry.outcome = Outcome::Transport;
          entry.detail = "connection failed: " + httplib::to_string(res.error());
          continue;  // retry
        }
        if (res->status != 200) {
          entry.outcome = Outcome::Transport;
          entry.detail = "http status " + std::to_string(res->status);
          if (retryable_status(res->status)) continue;
          break;  // non-retryable status
        }
        const auto text = completion_text(res->body);
        if (!text) {
          entry.outcome = Outcome::Transport;
          entry.detail = "malformed backend response";
          break;
        }
        entry.raw_output = *text;
        classify(entry, sample);  // parse failures are terminal, never retried
        done = true;
      }
      entry.latency_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - start)
                             .count();
      ledger.entries[i] = std::move(entry);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return ledger;
}

metrics::MetricReport evaluate(const RunLedger& ledger,
                               std::span<const data::SampleRecord> ground_truth,
                               const EvalOptions& options, std::ostream* log) {
  std::map<std::string, const data::SampleRecord*> gt_by_id;
  for (const data::SampleRecord& r : ground_truth) gt_by_id[r.id] = &r;

  std::vector<Layout> generated;
  std::vector<const data::SampleRecord*> aligned;
  std::size_t n_failures = 0;
  for (const LedgerEntry& e : ledger.entries) {
    if (e.outcome != Outcome::Ok) {
      ++n_failures;
      continue;
    }
    Layout l;
    l.canvas = e.canvas;
    l.elements = *e.elements;
    generated.push_back(std::move(l));
    const auto it = gt_by_id.find(e.id);
    aligned.push_back(it == gt_by_id.end() ? nullptr : it->second);
  }
  if (generated.empty())
    throw std::invalid_argument("no successfully parsed layouts to evaluate");

  // FD between generated layouts and their aligned ground truth, under
  // the shared geometric featurizer.
  std::optional<double> fd;
  {
    metrics::FeatureSet gen_set, gt_set;
    for (std::size_t i = 0; i < generated.size(); ++i) {
      if (!aligned[i]) continue;
      gen_set.vectors.push_back(
          metrics::geometric_featurizer(generated[i], options.featurizer_max_elems).values);
      gt_set.vectors.push_back(
          metrics::geometric_featurizer(aligned[i]->layout(), options.featurizer_max_elems)
              .values);
    }
    if (gen_set.vectors.size() >= 2) {
      fd = metrics::frechet_distance(gen_set, gt_set);
    } else if (log) {
      *log << "warning: fewer than two aligned samples, FD omitted\n";
    }
  }

  // Content metrics need the per-sample assets. A deque keeps the
  // references stable while loading.
  std::deque<GrayImage> images;
  std::vector<const GrayImage*> saliency(generated.size(), nullptr);
  std::vector<const GrayImage*> canvases(generated.size(), nullptr);
  if (!options.assets_dir.empty()) {
    for (std::size_t i = 0; i < generated.size(); ++i) {
      if (!aligned[i]) continue;
      const Canvas& c = aligned[i]->canvas;
      if (!c.image_ref.empty()) {
        try {
          images.push_back(load_gray_image(options.assets_dir + "/" + c.image_ref));
          canvases[i] = &images.back();
        } catch (const std::exception& e) {
          if (log) *log << "warning: canvas image unavailable (" << e.what() << "), rea omitted\n";
        }
      }
      if (c.saliency_ref) {
        try {
          images.push_back(load_gray_image(options.assets_dir + "/" + *c.saliency_ref));
          saliency[i] = &images.back();
        } catch (const std::exception& e) {
          if (log) *log << "warning: saliency unavailable (" << e.what() << "), occ omitted\n";
        }
      }
    }
  }

  return metrics::aggregate(generated, saliency, canvases, fd, n_failures);
}

std::string ledger_entry_to_json_line(const LedgerEntry& entry) {
  ordered_json j;
  j["id"] = entry.id;
  j["request_id"] = entry.request_id;
  j["outcome"] = std::string(outcome_name(entry.outcome));
  if (!entry.detail.empty()) j["detail"] = entry.detail;
  j["retries"] = entry.retries;
  j["latency_ms"] = entry.latency_ms;
  j["canvas"]["width"] = entry.canvas.width;
  j["canvas"]["height"] = entry.canvas.height;
  j["canvas"]["image_ref"] = entry.canvas.image_ref;
  j["profile"] = std::string(profile_name(entry.profile));
  j["raw_output"] = entry.raw_output;
  if (entry.elements) {
    ordered_json arr = ordered_json::array();
    for (const Element& e : *entry.elements) {
      ordered_json je;
      je["category"] = std::string(category_name(e.category));
      je["x"] = e.x;
      je["y"] = e.y;
      je["w"] = e.w;
      je["h"] = e.h;
      arr.push_back(je);
    }
    j["elements"] = arr;
  }
  return j.dump();
}

LedgerEntry ledger_entry_from_json_line(std::string_view line) {
  const json j = json::parse(line);
  LedgerEntry e;
  e.id = j.at("id").get<std::string>();
  e.request_id = j.value("request_id", std::uint64_t(0));
  const auto outcome = outcome_from_name(j.at("outcome").get<std::string>());
  if (!outcome) throw std::runtime_error("unknown ledger outcome");
  e.outcome = *outcome;
  e.detail = j.value("detail", std::string());
  e.retries = j.value("retries", 0);
  e.latency_ms = j.value("latency_ms", 0.0);
  e.canvas.width = j.at("canvas").at("width").get<int>();
  e.canvas.height = j.at("canvas").at("height").get<int>();
  e.canvas.image_ref = j.at("canvas").value("image_ref", std::string());
  const auto profile = profile_from_name(j.value("profile", "CGL"));
  e.profile = profile.value_or(Profile::CGL);
  e.raw_output = j.value("raw_output", std::string());
  if (j.contains("elements")) {
    std::vector<Element> elems;
    for (const json& je : j["elements"]) {
      const auto cat = category_from_name(je.at("category").get<std::string>());
      if (!cat) throw std::runtime_error("unknown category in ledger");
      elems.push_back(Element{*cat, je.at("x").get<int>(), je.at("y").get<int>(),
                              je.at("w").get<int>(), je.at("h").get<int>()});
    }
    e.elements = std::move(elems);
  }
  return e;
}

RunLedger read_ledger_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  RunLedger ledger;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ledger.entries.push_back(ledger_entry_from_json_line(line));
  }
  return ledger;
}

void write_ledger_jsonl(const std::string& path, const RunLedger& ledger) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const LedgerEntry& e : ledger.entries) out << ledger_entry_to_json_line(e) << "\n";
}

}  // namespace posterkit::harness

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posterkit/dataset_io.hpp"
#include "posterkit/metrics.hpp"
#include "posterkit/task_builder.hpp"

namespace posterkit::harness {

struct SamplingConfig {
  double top_p = 0.9;
  double temperature = 0.7;
  int max_tokens = 1024;
  int max_retries = 2;      // transport errors only; parse failures are terminal
  int timeout_ms = 30000;
  int parallelism = 4;      // bound on in-flight requests
};

struct BackendConfig {
  std::string url;          // e.g. http://127.0.0.1:8080/complete
  std::string model;
  std::string api_key_env;  // env var holding the bearer token; never logged
  bool attach_image_ref = false;  // add the canvas image reference for
                                  // multimodal backends
};

enum class Outcome { Ok, AbnormalFormat, Overflow, Transport };

std::string_view outcome_name(Outcome o);
std::optional<Outcome> outcome_from_name(std::string_view name);

struct LedgerEntry {
  std::string id;
  std::uint64_t request_id = 0;
  std::string raw_output;   // verbatim completion (empty on transport failure)
  Outcome outcome = Outcome::Transport;
  std::string detail;
  int retries = 0;
  double latency_ms = 0.0;
  Canvas canvas;
  Profile profile = Profile::CGL;
  std::optional<std::vector<Element>> elements;  // set iff outcome == Ok
};

struct RunLedger {
  std::vector<LedgerEntry> entries;  // one terminal entry per dispatched sample

  std::size_t count(Outcome o) const;
};

// Dispatches every sample's assembled prompt once (plus transport
// retries), stores completions verbatim, and parses them against each
// sample's canvas. Entry order follows the input order, independent of
// completion order.
RunLedger generate(std::span<const tasks::TaskSample> samples,
                   const BackendConfig& backend, const SamplingConfig& sc);

struct EvalOptions {
  int featurizer_max_elems = 20;
  std::string assets_dir;  // empty: skip content metrics
};

// Metrics over successfully parsed layouts, aligned with ground truth
// by id. Missing saliency/canvas assets drop rea/occ with a warning;
// the graphic metrics are always computed. Throws when the ledger holds
// no successes.
metrics::MetricReport evaluate(const RunLedger& ledger,
                               std::span<const data::SampleRecord> ground_truth,
                               const EvalOptions& options, std::ostream* log = nullptr);

std::string ledger_entry_to_json_line(const LedgerEntry& entry);
LedgerEntry ledger_entry_from_json_line(std::string_view line);
RunLedger read_ledger_jsonl(const std::string& path);
void write_ledger_jsonl(const std::string& path, const RunLedger& ledger);

}  // namespace posterkit::harness

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "posterkit/augment.hpp"
#include "posterkit/dataset_io.hpp"
#include "posterkit/harness.hpp"
#include "posterkit/metrics.hpp"
#include "posterkit/render.hpp"
#include "posterkit/task_builder.hpp"

namespace {

using namespace posterkit;

int cmd_ingest(const std::string& profile_str, const std::string& annotations,
               const std::string& images, const std::string& out) {
  const auto profile = profile_from_name(profile_str);
  if (!profile) {
    std::cerr << "unknown profile: " << profile_str << "\n";
    return 1;
  }
  data::IngestStats stats;
  const auto records = data::ingest(annotations, images, *profile, stats, &std::cerr);
  data::write_records_jsonl(out, records);
  std::cerr << "ingested " << stats.ingested << " records ("
            << stats.dropped_category << " dropped by category, "
            << stats.dropped_bounds << " dropped by bounds, "
            << stats.skipped_missing_image << " missing images)\n";
  return 0;
}

int cmd_tasks(const std::string& in, const std::string& kind_str, std::uint64_t seed,
              const std::string& out, bool recover_mask_category, int count_hint) {
  std::vector<tasks::TaskKind> kinds;
  if (kind_str == "all") {
    kinds = {tasks::TaskKind::GenI,       tasks::TaskKind::GenIT,
             tasks::TaskKind::GenITS,     tasks::TaskKind::GenITP,
             tasks::TaskKind::Completion, tasks::TaskKind::Recover,
             tasks::TaskKind::Refinement};
  } else {
    const auto kind = tasks::task_kind_from_name(kind_str);
    if (!kind) {
      std::cerr << "unknown task kind: " << kind_str << "\n";
      return 1;
    }
    kinds.push_back(*kind);
  }
  const auto records = data::read_records_jsonl(in);
  std::vector<tasks::TaskSample> samples;
  std::size_t skipped = 0;
  for (const auto& rec : records) {
    for (const auto kind : kinds) {
      tasks::TaskParams params;
      params.recover_mask_category = recover_mask_category;
      if (count_hint >= 0) params.gen_i_count_hint = count_hint;
      try {
        auto sample = tasks::build(kind, rec.layout(), seed ^ data::stable_id_hash(rec.id),
                                   params);
        sample.source_id = rec.id;
        sample.profile = rec.dataset;
        samples.push_back(std::move(sample));
      } catch (const std::exception& e) {
        ++skipped;  // e.g. completion over a single-element layout
      }
    }
  }
  tasks::write_task_samples_jsonl(out, samples);
  std::cerr << "built " << samples.size() << " task samples (" << skipped
            << " skipped)\n";
  return 0;
}

int cmd_generate(const std::string& tasks_path, const harness::BackendConfig& backend,
                 const harness::SamplingConfig& sc, const std::string& out) {
  const auto samples = tasks::read_task_samples_jsonl(tasks_path);
  const auto ledger = harness::generate(samples, backend, sc);
  harness::write_ledger_jsonl(out, ledger);
  std::cerr << "generated " << ledger.entries.size() << " completions: "
            << ledger.count(harness::Outcome::Ok) << " ok, "
            << ledger.count(harness::Outcome::AbnormalFormat) << " abnormal, "
            << ledger.count(harness::Outcome::Overflow) << " overflow, "
            << ledger.count(harness::Outcome::Transport) << " transport\n";
  return 0;
}

int cmd_evaluate(const std::string& ledger_path, const std::string& gt_path,
                 const std::string& assets, const std::string& out, bool table,
                 int max_elems) {
  const auto ledger = harness::read_ledger_jsonl(ledger_path);
  const auto gt = data::read_records_jsonl(gt_path);
  harness::EvalOptions options;
  options.assets_dir = assets;
  options.featurizer_max_elems = max_elems;
  const auto report = harness::evaluate(ledger, gt, options, &std::cerr);
  std::ofstream f(out, std::ios::binary);
  if (!f) {
    std::cerr << "cannot open " << out << " for writing\n";
    return 1;
  }
  f << metrics::report_to_json(report);
  if (table) std::cout << metrics::report_to_table(report, "generated");
  return 0;
}

int cmd_render(const std::string& layouts_path, const std::string& assets,
               const std::string& out_dir, bool masks, bool labels) {
  const auto records = data::read_records_jsonl(layouts_path);
  std::filesystem::create_directories(out_dir);
  auto style = render::RenderStyle::defaults();
  style.labels = labels;
  for (const auto& rec : records) {
    const Layout layout = rec.layout();
    std::optional<std::string> background;
    if (!rec.canvas.image_ref.empty() && !assets.empty()) {
      const auto path = std::filesystem::path(assets) / rec.canvas.image_ref;
      if (std::filesystem::exists(path)) background = path.string();
    }
    const std::string svg = render::render_svg(layout, style, background);
    std::ofstream f(std::filesystem::path(out_dir) / (rec.id + ".svg"), std::ios::binary);
    f << svg;
    if (masks) {
      const auto mask = render::build_text_mask(layout);
      save_mask_png(mask, (std::filesystem::path(out_dir) / (rec.id + ".mask.png")).string());
    }
  }
  std::cerr << "rendered " << records.size() << " layouts\n";
  return 0;
}

int cmd_augment(const std::string& in, const std::string& cfg_path, const std::string& out,
                const std::string& images_dir) {
  auto cfg = augment::load_augment_config(cfg_path);
  const auto records = data::read_records_jsonl(in);

  // Re-running is idempotent: sources that already produced augmented
  // records in the output file are skipped.
  std::set<std::string> completed;
  std::vector<data::SampleRecord> existing;
  if (std::filesystem::exists(out)) {
    existing = data::read_records_jsonl(out);
    for (const auto& rec : existing)
      if (rec.parent_id) completed.insert(*rec.parent_id);
  }

  std::vector<data::SampleRecord> all = existing;
  std::size_t ran = 0, failed = 0;
  for (const auto& rec : records) {
    if (rec.provenance != data::Provenance::Original) continue;
    if (completed.count(rec.id)) continue;
    try {
      const auto job = augment::run_job(rec, cfg, images_dir);
      for (auto& aug : augment::records_from_job(rec, job)) all.push_back(std::move(aug));
      ++ran;
    } catch (const std::exception& e) {
      std::cerr << "job " << rec.id << " failed: " << e.what() << "\n";
      ++failed;
    }
  }
  data::write_records_jsonl(out, all);
  std::cerr << "augmented " << ran << " sources (" << failed << " failed, "
            << completed.size() << " already done)\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poster layout toolkit: dataset ingestion, conditional task "
               "construction, generation harness, metrics, rendering, and "
               "depth-guided augmentation orchestration"};
  app.require_subcommand(1);

  // ingest
  std::string profile = "cgl", annotations, images, out;
  auto* ingest = app.add_subcommand("ingest", "Ingest annotations into JSONL records");
  ingest->add_option("--profile", profile, "Dataset profile: cgl or pku")->required();
  ingest->add_option("--annotations", annotations, "Annotation JSON file")->required();
  ingest->add_option("--images", images, "Directory with poster images")->required();
  ingest->add_option("--out", out, "Output records JSONL")->required();

  // tasks
  std::string tasks_in, tasks_kind = "all", tasks_out;
  std::uint64_t tasks_seed = 0;
  bool recover_mask_category = false;
  int count_hint = -1;
  auto* taskcmd = app.add_subcommand("tasks", "Build conditional task samples");
  taskcmd->add_option("--in", tasks_in, "Records JSONL")->required();
  taskcmd->add_option("--kind", tasks_kind,
                      "gen_i|gen_it|gen_its|gen_itp|completion|recover|refinement|all");
  taskcmd->add_option("--seed", tasks_seed, "Base seed");
  taskcmd->add_option("--out", tasks_out, "Output tasks JSONL")->required();
  taskcmd->add_flag("--recover-mask-category", recover_mask_category,
                    "Allow Recover to mask the category slot");
  taskcmd->add_option("--count-hint", count_hint,
                      "Render this many placeholder rects for gen_i");

  // generate
  std::string gen_tasks, gen_out;
  harness::BackendConfig backend;
  harness::SamplingConfig sc;
  auto* gen = app.add_subcommand("generate", "Run a backend over task samples");
  gen->add_option("--tasks", gen_tasks, "Tasks JSONL")->required();
  gen->add_option("--backend-url", backend.url, "Completion endpoint URL")->required();
  gen->add_option("--model", backend.model, "Model name")->required();
  gen->add_option("--api-key-env", backend.api_key_env,
                  "Env var holding the bearer token");
  gen->add_flag("--attach-image-ref", backend.attach_image_ref,
                "Send the canvas image reference to multimodal backends");
  gen->add_option("--top-p", sc.top_p, "Nucleus sampling p");
  gen->add_option("--temperature", sc.temperature, "Sampling temperature");
  gen->add_option("--max-tokens", sc.max_tokens, "Completion token budget");
  gen->add_option("--max-retries", sc.max_retries, "Transport retries per sample");
  gen->add_option("--timeout-ms", sc.timeout_ms, "Per-request timeout");
  gen->add_option("--parallel", sc.parallelism, "Max in-flight requests");
  gen->add_option("--out", gen_out, "Output ledger JSONL")->required();

  // evaluate
  std::string eval_ledger, eval_gt, eval_assets, eval_out;
  bool eval_table = false;
  int eval_max_elems = 20;
  auto* eval = app.add_subcommand("evaluate", "Score a ledger against ground truth");
  eval->add_option("--ledger", eval_ledger, "Ledger JSONL")->required();
  eval->add_option("--gt", eval_gt, "Ground-truth records JSONL")->required();
  eval->add_option("--assets", eval_assets, "Directory with canvas/saliency images");
  eval->add_option("--out", eval_out, "Output report JSON")->required();
  eval->add_flag("--table", eval_table, "Also print the metric table");
  eval->add_option("--featurizer-max-elems", eval_max_elems,
                   "Feature vector capacity per layout");

  // render
  std::string render_layouts, render_assets, render_out;
  bool render_masks = false, render_labels = false;
  auto* rendercmd = app.add_subcommand("render", "Render layouts as SVG overlays");
  rendercmd->add_option("--layouts", render_layouts, "Records JSONL")->required();
  rendercmd->add_option("--assets", render_assets, "Directory with poster images");
  rendercmd->add_option("--out", render_out, "Output directory")->required();
  rendercmd->add_flag("--masks", render_masks, "Also write <id>.mask.png text masks");
  rendercmd->add_flag("--labels", render_labels, "Draw category labels");

  // augment
  std::string aug_in, aug_cfg, aug_out, aug_images = ".";
  auto* augcmd = app.add_subcommand("augment", "Run depth-guided augmentation jobs");
  augcmd->add_option("--in", aug_in, "Records JSONL")->required();
  augcmd->add_option("--cfg", aug_cfg, "Config file (augment.toml)")->required();
  augcmd->add_option("--out", aug_out, "Output records JSONL")->required();
  augcmd->add_option("--images", aug_images, "Directory with source images");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(profile, annotations, images, out);
    if (*taskcmd)
      return cmd_tasks(tasks_in, tasks_kind, tasks_seed, tasks_out, recover_mask_category,
                       count_hint);
    if (*gen) return cmd_generate(gen_tasks, backend, sc, gen_out);
    if (*eval)
      return cmd_evaluate(eval_ledger, eval_gt, eval_assets, eval_out, eval_table,
                          eval_max_elems);
    if (*rendercmd)
      return cmd_render(render_layouts, render_assets, render_out, render_masks,
                        render_labels);
    if (*augcmd) return cmd_augment(aug_in, aug_cfg, aug_out, aug_images);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

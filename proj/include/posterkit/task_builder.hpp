#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posterkit/html_codec.hpp"
#include "posterkit/layout.hpp"

namespace posterkit::tasks {

enum class TaskKind {
  GenI,        // image only
  GenIT,       // + categories
  GenITS,      // + categories and sizes
  GenITP,      // + categories and positions
  Completion,  // a strict non-empty subset of elements given in full
  Recover,     // random attribute slots masked, up to 80%
  Refinement,  // input geometry perturbed by Gaussian noise
};

std::string_view task_kind_name(TaskKind k);
std::optional<TaskKind> task_kind_from_name(std::string_view name);

struct TaskParams {
  // Recover: fixed mask ratio in (0, 0.8]; default draws one per sample.
  std::optional<double> recover_ratio;
  // Recover: also allow the category slot to be masked.
  bool recover_mask_category = false;
  // Completion: number of given elements in [1, N-1]; default seeded draw.
  std::optional<int> completion_given;
  // GenI: render this many fully-masked placeholder rects as a count hint.
  std::optional<int> gen_i_count_hint;
  // Refinement: noise scale in normalized coordinates.
  double refinement_sigma = 0.01;
};

struct TaskSample {
  std::string source_id;  // id of the ground-truth record, when known
  TaskKind kind = TaskKind::GenI;
  Profile profile = Profile::CGL;
  Canvas canvas;
  std::string input_html;
  std::string target_html;
  std::optional<std::string> text_constraint;  // joined payload
  std::string task_definition;
  std::uint64_t seed = 0;
};

// The per-kind instruction string. Recover's is a fixed wire string.
std::string task_definition(TaskKind k);

// Uniform subset of attribute slots of size round(ratio * n_attrs),
// floored at one slot. Throws for ratio outside (0, 0.8].
std::vector<std::size_t> mask_schedule_recover(std::size_t n_attrs, double ratio,
                                               std::uint64_t seed);

// Shifts each coordinate by N(0, sigma) in normalized coordinates,
// re-discretizes, and clamps the element back inside the canvas.
Layout perturb_refinement(const Layout& gt, std::uint64_t seed, double sigma = 0.01);

// Builds the (input, target) pair for one task kind. Deterministic in
// (gt, kind, seed, params). Throws std::invalid_argument on parameter
// misuse (e.g. Completion over a single-element layout).
TaskSample build(TaskKind kind, const Layout& gt, std::uint64_t seed,
                 const TaskParams& params = {});

// Full prompt for a sample (task definition + constraint + HTML body).
std::string prompt_for(const TaskSample& sample);

std::string task_sample_to_json_line(const TaskSample& sample);
TaskSample task_sample_from_json_line(std::string_view line);
std::vector<TaskSample> read_task_samples_jsonl(const std::string& path);
void write_task_samples_jsonl(const std::string& path,
                              const std::vector<TaskSample>& samples);

}  // namespace posterkit::tasks

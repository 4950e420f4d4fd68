#include "posterkit/task_builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "posterkit/rng.hpp"

namespace posterkit::tasks {

namespace {

constexpr std::string_view kPrefix = "I want to generate layout in poster design format. ";

// Uniform subset of size k from {0..n-1}: first k slots of a permutation.
std::vector<std::size_t> subset_of_size(rng::Engine& eng, std::size_t n, std::size_t k) {
  auto idx = rng::permutation(eng, n);
  idx.resize(std::min(k, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

// Reorders the texts list to follow the permuted element order.
std::optional<std::vector<std::string>> realign_texts(const Layout& gt,
                                                      const std::vector<std::size_t>& perm) {
  if (!gt.texts) return std::nullopt;
  std::vector<std::size_t> text_ordinal(gt.elements.size(), std::size_t(-1));
  std::size_t ord = 0;
  for (std::size_t i = 0; i < gt.elements.size(); ++i)
    if (gt.elements[i].category == Category::Text) text_ordinal[i] = ord++;
  std::vector<std::string> out;
  out.reserve(gt.texts->size());
  for (std::size_t i : perm)
    if (text_ordinal[i] != std::size_t(-1)) out.push_back((*gt.texts)[text_ordinal[i]]);
  return out;
}

}  // namespace

std::string_view task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::GenI: return "gen_i";
    case TaskKind::GenIT: return "gen_it";
    case TaskKind::GenITS: return "gen_its";
    case TaskKind::GenITP: return "gen_itp";
    case TaskKind::Completion: return "completion";
    case TaskKind::Recover: return "recover";
    case TaskKind::Refinement: return "refinement";
  }
  return "gen_i";
}

std::optional<TaskKind> task_kind_from_name(std::string_view name) {
  if (name == "gen_i") return TaskKind::GenI;
  if (name == "gen_it") return TaskKind::GenIT;
  if (name == "gen_its") return TaskKind::GenITS;
  if (name == "gen_itp") return TaskKind::GenITP;
  if (name == "completion") return TaskKind::Completion;
  if (name == "recover") return TaskKind::Recover;
  if (name == "refinement") return TaskKind::Refinement;
  return std::nullopt;
}

std::string task_definition(TaskKind k) {
  std::string out(kPrefix);
  switch (k) {
    case TaskKind::GenI:
      out += "Please generate the layout html according to the image I provide";
      break;
    case TaskKind::GenIT:
      out += "Please generate the layout html according to the categories and image I provide";
      break;
    case TaskKind::GenITS:
      out += "Please generate the layout html according to the categories, size, image I provide";
      break;
    case TaskKind::GenITP:
      out += "Please generate the layout html according to the categories, position, image I provide";
      break;
    case TaskKind::Completion:
      out += "Please complete the layout html according to the partial layout, image I provide";
      break;
    case TaskKind::Recover:
      // Fixed wire string, spacing included.
      out += "Please recover the layout html according to the bbox , categories, size, image I provide";
      break;
    case TaskKind::Refinement:
      out += "Please refine the layout html according to the distorted layout, image I provide";
      break;
  }
  out += " (in html format)";
  return out;
}

std::vector<std::size_t> mask_schedule_recover(std::size_t n_attrs, double ratio,
                                               std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 0.8))
    throw std::invalid_argument("recover mask ratio outside (0, 0.8]");
  if (n_attrs == 0) throw std::invalid_argument("no attribute slots to mask");
  const auto k = std::max<std::size_t>(1, std::size_t(std::llround(ratio * double(n_attrs))));
  auto eng = rng::make_engine(seed);
  return subset_of_size(eng, n_attrs, k);
}

Layout perturb_refinement(const Layout& gt, std::uint64_t seed, double sigma) {
  validate_layout(gt);
  auto eng = rng::make_engine(seed);
  Layout out;
  out.canvas = gt.canvas;
  out.texts = gt.texts;
  out.elements.reserve(gt.elements.size());
  const double w_extent = gt.canvas.width;
  const double h_extent = gt.canvas.height;
  for (const Element& e : gt.elements) {
    const double xn = std::clamp(e.x / w_extent + rng::normal(eng, 0.0, sigma), 0.0, 1.0);
    const double yn = std::clamp(e.y / h_extent + rng::normal(eng, 0.0, sigma), 0.0, 1.0);
    const double wn = std::clamp(e.w / w_extent + rng::normal(eng, 0.0, sigma), 0.0, 1.0);
    const double hn = std::clamp(e.h / h_extent + rng::normal(eng, 0.0, sigma), 0.0, 1.0);
    Element p = e;
    p.w = discretize(wn, gt.canvas.width);
    p.h = discretize(hn, gt.canvas.height);
    p.x = std::min(discretize(xn, gt.canvas.width), gt.canvas.width - p.w);
    p.y = std::min(discretize(yn, gt.canvas.height), gt.canvas.height - p.h);
    out.elements.push_back(p);
  }
  return out;
}

TaskSample build(TaskKind kind, const Layout& gt, std::uint64_t seed,
                 const TaskParams& params) {
  validate_layout(gt);
  const std::size_t n = gt.elements.size();
  auto eng = rng::make_engine(seed);
  const std::uint64_t perm_seed = eng();

  // Masking happens in ground-truth order; the synchronized permutation
  // is applied to the (input, target) pair afterwards.
  std::vector<MaskedElement> input;
  input.reserve(n);
  std::size_t completion_given = 0;

  switch (kind) {
    case TaskKind::GenI:
      for (const Element& e : gt.elements) input.push_back(to_masked(e));
      break;
    case TaskKind::GenIT:
      for (const Element& e : gt.elements)
        input.push_back(MaskedElement{e.category, {}, {}, {}, {}});
      break;
    case TaskKind::GenITS:
      for (const Element& e : gt.elements)
        input.push_back(MaskedElement{e.category, {}, {}, e.w, e.h});
      break;
    case TaskKind::GenITP:
      for (const Element& e : gt.elements)
        input.push_back(MaskedElement{e.category, e.x, e.y, {}, {}});
      break;
    case TaskKind::Completion: {
      if (n < 2)
        throw std::invalid_argument("completion needs at least two elements");
      if (params.completion_given) {
        const int g = *params.completion_given;
        if (g < 1 || std::size_t(g) >= n)
          throw std::invalid_argument("completion subset must be strict and non-empty");
        completion_given = std::size_t(g);
      } else {
        completion_given = 1 + std::size_t(rng::bounded(eng, n - 1));
      }
      for (const Element& e : gt.elements) input.push_back(to_masked(e));
      break;
    }
    case TaskKind::Recover: {
      double ratio;
      if (params.recover_ratio) {
        ratio = *params.recover_ratio;
        if (!(ratio > 0.0 && ratio <= 0.8))
          throw std::invalid_argument("recover mask ratio outside (0, 0.8]");
      } else {
        ratio = rng::uniform01_open_low(eng) * 0.8;
      }
      const std::size_t slots_per = params.recover_mask_category ? 5 : 4;
      const std::size_t n_slots = n * slots_per;
      // The sampled fraction may never exceed 0.8, so the rounded count
      // is capped at floor(0.8 * slots).
      std::size_t count = std::size_t(std::llround(ratio * double(n_slots)));
      count = std::min(count, std::size_t(0.8 * double(n_slots)));
      count = std::max<std::size_t>(count, 1);
      const auto slots = subset_of_size(eng, n_slots, count);
      for (const Element& e : gt.elements) input.push_back(to_masked(e));
      for (std::size_t s : slots) {
        MaskedElement& m = input[s / slots_per];
        std::size_t a = s % slots_per;
        if (!params.recover_mask_category) ++a;  // skip the category slot
        switch (a) {
          case 0: m.category.reset(); break;
          case 1: m.x.reset(); break;
          case 2: m.y.reset(); break;
          case 3: m.w.reset(); break;
          case 4: m.h.reset(); break;
        }
      }
      break;
    }
    case TaskKind::Refinement: {
      const std::uint64_t perturb_seed = eng();
      const Layout perturbed =
          perturb_refinement(gt, perturb_seed, params.refinement_sigma);
      for (const Element& e : perturbed.elements) input.push_back(to_masked(e));
      break;
    }
  }

  auto [perm_input, perm_target] = permute_synchronized(input, gt.elements, perm_seed);
  auto perm_eng = rng::make_engine(perm_seed);
  const auto perm = rng::permutation(perm_eng, n);

  Layout target;
  target.canvas = gt.canvas;
  target.elements = std::move(perm_target);
  target.texts = realign_texts(gt, perm);

  if (kind == TaskKind::Completion) {
    perm_input.resize(completion_given);
  } else if (kind == TaskKind::GenI) {
    perm_input.clear();
    if (params.gen_i_count_hint && *params.gen_i_count_hint > 0)
      perm_input.assign(std::size_t(*params.gen_i_count_hint), MaskedElement{});
  }

  TaskSample sample;
  sample.kind = kind;
  sample.canvas = gt.canvas;
  sample.seed = seed;
  sample.task_definition = task_definition(kind);
  sample.input_html = codec::serialize_masked(gt.canvas, perm_input);
  sample.target_html = codec::serialize(target);
  if (target.texts && !target.texts->empty())
    sample.text_constraint = codec::join_texts(*target.texts);
  return sample;
}

std::string prompt_for(const TaskSample& sample) {
  codec::PromptParts parts;
  parts.task_definition = sample.task_definition;
  parts.text_constraint = sample.text_constraint;
  parts.html_body = sample.input_html;
  return codec::assemble_prompt(parts);
}

std::string task_sample_to_json_line(const TaskSample& sample) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["id"] = sample.source_id;
  j["kind"] = std::string(task_kind_name(sample.kind));
  j["profile"] = std::string(profile_name(sample.profile));
  j["seed"] = sample.seed;
  j["canvas"]["width"] = sample.canvas.width;
  j["canvas"]["height"] = sample.canvas.height;
  j["canvas"]["image_ref"] = sample.canvas.image_ref;
  if (sample.canvas.saliency_ref) j["canvas"]["saliency_ref"] = *sample.canvas.saliency_ref;
  j["task_definition"] = sample.task_definition;
  if (sample.text_constraint) j["text_constraint"] = *sample.text_constraint;
  j["input_html"] = sample.input_html;
  j["target_html"] = sample.target_html;
  return j.dump();
}

TaskSample task_sample_from_json_line(std::string_view line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  TaskSample s;
  s.source_id = j.value("id", std::string());
  const auto kind = task_kind_from_name(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown task kind");
  s.kind = *kind;
  s.profile = profile_from_name(j.value("profile", "CGL")).value_or(Profile::CGL);
  s.seed = j.value("seed", std::uint64_t(0));
  s.canvas.width = j.at("canvas").at("width").get<int>();
  s.canvas.height = j.at("canvas").at("height").get<int>();
  s.canvas.image_ref = j.at("canvas").value("image_ref", std::string());
  if (j.at("canvas").contains("saliency_ref"))
    s.canvas.saliency_ref = j.at("canvas").at("saliency_ref").get<std::string>();
  s.task_definition = j.value("task_definition", std::string());
  if (j.contains("text_constraint"))
    s.text_constraint = j.at("text_constraint").get<std::string>();
  s.input_html = j.at("input_html").get<std::string>();
  s.target_html = j.at("target_html").get<std::string>();
  return s;
}

std::vector<TaskSample> read_task_samples_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<TaskSample> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(task_sample_from_json_line(line));
  }
  return out;
}

void write_task_samples_jsonl(const std::string& path,
                              const std::vector<TaskSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const TaskSample& s : samples) out << task_sample_to_json_line(s) << "\n";
}

}  // namespace posterkit::tasks

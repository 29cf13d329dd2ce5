#include "zpd/sim_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "zpd/error.hpp"

namespace zpd::sim {

namespace {

using boost::property_tree::ptree;

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
  fail(ErrorKind::config, fmt::format("{}: {}", key, what));
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string text = raw;
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) bad_key(key, fmt::format("cannot parse '{}'", raw));
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) bad_key(key, "must be finite");
  }
  return value;
}

class Reader {
 public:
  explicit Reader(const ptree& tree) : tree_(tree) {
    for (const auto& [section, body] : tree_) {
      if (!body.data().empty() && body.empty()) bad_key(section, "key outside any section");
      for (const auto& kv : body) pending_.insert(section + "." + kv.first);
    }
  }

  template <typename T>
  void read(const std::string& section, const std::string& name, T& out) {
    const std::string key = section + "." + name;
    const auto node = tree_.get_child_optional(ptree::path_type(key, '.'));
    if (!node) return;
    pending_.erase(key);
    const std::string raw = node->data();
    if constexpr (std::is_same_v<T, std::string>) {
      out = raw;
    } else {
      out = parse_number<T>(key, raw);
    }
  }

  void finish() const {
    if (!pending_.empty()) bad_key(*pending_.begin(), "unknown key");
  }

 private:
  const ptree& tree_;
  std::set<std::string> pending_;
};

}  // namespace

void SimConfig::validate() const {
  const auto positive_count = [](const char* key, std::size_t v) {
    if (v < 1) bad_key(key, "must be at least 1");
  };
  const auto positive = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) bad_key(key, "must be positive and finite");
  };
  const auto nonnegative = [](const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) bad_key(key, "must be nonnegative and finite");
  };
  positive_count("world.num_problems", world.num_problems);
  positive_count("world.num_anchors", world.num_anchors);
  positive_count("world.feature_dim", world.feature_dim);
  if (world.vocab_size < 2) bad_key("world.vocab_size", "must be at least 2");
  nonnegative("world.difficulty_spread", world.difficulty_spread);
  nonnegative("world.knowledge_offset", world.knowledge_offset);
  nonnegative("world.confusion_scale", world.confusion_scale);
  positive("world.difficulty_power", world.difficulty_power);
  nonnegative("world.misconception_strength", world.misconception_strength);
  if (!(world.skill_loading >= 0.0 && world.skill_loading <= 1.0)) bad_key("world.skill_loading", "must be in [0, 1]");
  if (!(world.skill_falloff >= 0.0 && world.skill_falloff <= 1.0)) bad_key("world.skill_falloff", "must be in [0, 1]");
  positive("world.teacher_sharpness", world.teacher_sharpness);
  nonnegative("world.teacher_tail_sd", world.teacher_tail_sd);
  nonnegative("world.init_noise", world.init_noise);
  if (rollout_count < 1) bad_key("rollout.count", "must be at least 1");
  positive("rollout.temperature", rollout_temperature);
  try {
    validate_scheme(weighting);
  } catch (const Error& e) {
    bad_key("weighting", e.what());
  }
  if (!(schedule.stage1_fraction > 0.0 && schedule.stage1_fraction < 1.0))
    bad_key("training.stage1_fraction", "must be in (0, 1)");
  if (schedule.kind == ScheduleKind::two_stage && steps < 2)
    bad_key("training.steps", "a two-stage schedule needs at least 2 steps");
  if (reverse_kl_samples < 1) bad_key("training.reverse_kl_samples", "must be at least 1");
  positive("training.learning_rate", learning_rate);
  if (steps < 1) bad_key("training.steps", "must be at least 1");
  if (recompute_interval < 0) bad_key("training.recompute_interval", "must be nonnegative");
  if (eval_interval < 1) bad_key("training.eval_interval", "must be at least 1");
  positive("training.weight_scale", weight_scale);
}

SimConfig parse_sim_config(std::istream& in) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::config, fmt::format("line {}: {}", e.line(), e.message()));
  }
  static const std::set<std::string> sections{"world", "rollout", "weighting", "training", "run"};
  for (const auto& [name, body] : tree)
    if (!sections.contains(name)) bad_key(name, "unknown section");

  SimConfig c;
  Reader r(tree);
  WorldParams& w = c.world;
  r.read("world", "num_problems", w.num_problems);
  r.read("world", "num_anchors", w.num_anchors);
  r.read("world", "feature_dim", w.feature_dim);
  r.read("world", "vocab_size", w.vocab_size);
  r.read("world", "difficulty_spread", w.difficulty_spread);
  r.read("world", "knowledge_offset", w.knowledge_offset);
  r.read("world", "confusion_scale", w.confusion_scale);
  r.read("world", "difficulty_power", w.difficulty_power);
  r.read("world", "misconception_strength", w.misconception_strength);
  r.read("world", "skill_loading", w.skill_loading);
  r.read("world", "skill_falloff", w.skill_falloff);
  r.read("world", "teacher_sharpness", w.teacher_sharpness);
  r.read("world", "teacher_tail_sd", w.teacher_tail_sd);
  r.read("world", "init_noise", w.init_noise);

  r.read("rollout", "count", c.rollout_count);
  r.read("rollout", "temperature", c.rollout_temperature);

  std::string scheme = "beta";
  BetaScheme beta;
  HardFilterScheme hard;
  r.read("weighting", "scheme", scheme);
  r.read("weighting", "alpha", beta.params.alpha);
  r.read("weighting", "beta", beta.params.beta);
  r.read("weighting", "floor", beta.floor);
  r.read("weighting", "lo", hard.lo);
  r.read("weighting", "hi", hard.hi);
  if (scheme == "beta") {
    c.weighting = beta;
  } else if (scheme == "hard_filter") {
    c.weighting = hard;
  } else if (scheme == "unweighted") {
    c.weighting = UnweightedScheme{};
  } else {
    bad_key("weighting.scheme", fmt::format("expected beta, hard_filter or unweighted, got '{}'", scheme));
  }

  std::string loss = "forward";
  r.read("training", "loss", loss);
  if (loss == "forward") {
    c.schedule.kind = ScheduleKind::forward;
  } else if (loss == "reverse") {
    c.schedule.kind = ScheduleKind::reverse;
  } else if (loss == "two_stage") {
    c.schedule.kind = ScheduleKind::two_stage;
  } else {
    bad_key("training.loss", fmt::format("expected forward, reverse or two_stage, got '{}'", loss));
  }
  r.read("training", "stage1_fraction", c.schedule.stage1_fraction);
  std::string estimator = "exact";
  r.read("training", "reverse_kl", estimator);
  if (estimator == "exact") {
    c.reverse_kl_estimator = ReverseKlEstimator::exact;
  } else if (estimator == "sampled") {
    c.reverse_kl_estimator = ReverseKlEstimator::sampled;
  } else {
    bad_key("training.reverse_kl", fmt::format("expected exact or sampled, got '{}'", estimator));
  }
  r.read("training", "reverse_kl_samples", c.reverse_kl_samples);
  r.read("training", "learning_rate", c.learning_rate);
  r.read("training", "steps", c.steps);
  r.read("training", "recompute_interval", c.recompute_interval);
  r.read("training", "eval_interval", c.eval_interval);
  r.read("training", "batch_size", c.batch_size);
  r.read("training", "weight_scale", c.weight_scale);

  r.read("run", "seed", c.seed);
  r.finish();
  c.validate();
  return c;
}

SimConfig parse_sim_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_sim_config(in);
}

SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, fmt::format("cannot open config '{}'", path));
  return parse_sim_config(in);
}

std::string format_sim_config(const SimConfig& c) {
  const WorldParams& w = c.world;
  std::string out;
  auto line = [&out](std::string_view key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  out += "[world]\n";
  line("num_problems", w.num_problems);
  line("num_anchors", w.num_anchors);
  line("feature_dim", w.feature_dim);
  line("vocab_size", w.vocab_size);
  line("difficulty_spread", w.difficulty_spread);
  line("knowledge_offset", w.knowledge_offset);
  line("confusion_scale", w.confusion_scale);
  line("difficulty_power", w.difficulty_power);
  line("misconception_strength", w.misconception_strength);
  line("skill_loading", w.skill_loading);
  line("skill_falloff", w.skill_falloff);
  line("teacher_sharpness", w.teacher_sharpness);
  line("teacher_tail_sd", w.teacher_tail_sd);
  line("init_noise", w.init_noise);
  out += "\n[rollout]\n";
  line("count", c.rollout_count);
  line("temperature", c.rollout_temperature);
  out += "\n[weighting]\n";
  if (const auto* b = std::get_if<BetaScheme>(&c.weighting)) {
    line("scheme", "beta");
    line("alpha", b->params.alpha);
    line("beta", b->params.beta);
    line("floor", b->floor);
  } else if (const auto* h = std::get_if<HardFilterScheme>(&c.weighting)) {
    line("scheme", "hard_filter");
    line("lo", h->lo);
    line("hi", h->hi);
  } else {
    line("scheme", "unweighted");
  }
  out += "\n[training]\n";
  line("loss", to_string(c.schedule.kind));
  line("stage1_fraction", c.schedule.stage1_fraction);
  line("learning_rate", c.learning_rate);
  line("steps", c.steps);
  line("eval_interval", c.eval_interval);
  line("recompute_interval", c.recompute_interval);
  line("batch_size", c.batch_size);
  line("reverse_kl", c.reverse_kl_estimator == ReverseKlEstimator::exact ? "exact" : "sampled");
  line("reverse_kl_samples", c.reverse_kl_samples);
  line("weight_scale", c.weight_scale);
  out += "\n[run]\n";
  line("seed", c.seed);
  return out;
}

}  // namespace zpd::sim

#include "toolrank/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include "toolrank/error.hpp"

namespace toolrank {

const std::vector<SubsetKind>& benchmark_subsets() {
  static const std::vector<SubsetKind> kinds{
      {"I1-Inst", true, false, false, false}, {"I2-Inst", true, true, false, false},
      {"I3-Inst", true, true, false, true},   {"I1-Tool", false, false, false, false},
      {"I1-Cat", false, false, true, false},  {"I2-Cat", false, true, true, false},
  };
  return kinds;
}

namespace {

using Rng = std::mt19937_64;

const std::vector<std::string>& action_words() {
  static const std::vector<std::string> words{"get",    "list",    "create",  "update",   "delete",  "search",
                                              "fetch",  "convert", "send",    "check",    "validate", "compute",
                                              "track",  "schedule", "translate", "analyze"};
  return words;
}

const std::vector<std::string>& openers() {
  static const std::vector<std::string> words{"I need to", "Please", "Help me", "Can you", "I want to"};
  return words;
}

const std::vector<std::string>& multi_joiners() {
  static const std::vector<std::string> words{"and", "then", "also", "additionally", "and then"};
  return words;
}

const std::vector<std::string>& name_suffixes() {
  static const std::vector<std::string> words{"API", "Hub", "Pro", "Kit", "Service", "Cloud"};
  return words;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[uniform_index(rng, items.size())];
}

/// k distinct indices from [0, n) in ascending order.
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {
    for (const auto& w : action_words()) used_.insert(w);
    for (const char* w : {"and", "also", "then", "additionally", "as", "well", "the", "for", "of", "to", "me",
                          "you", "can", "need", "want", "help", "please", "api", "hub", "pro", "kit", "service",
                          "cloud", "i", "a"})
      used_.insert(w);
  }

  std::string next() {
    static const std::string consonants = "bdfgklmnprstvz";
    static const std::string vowels = "aeiou";
    for (;;) {
      const std::size_t syllables = 2 + uniform_index(rng_, 2);
      std::string word;
      for (std::size_t i = 0; i < syllables; ++i) {
        word += consonants[uniform_index(rng_, consonants.size())];
        word += vowels[uniform_index(rng_, vowels.size())];
      }
      if (uniform_index(rng_, 3) == 0) word += consonants[uniform_index(rng_, consonants.size())];
      if (used_.insert(word).second) return word;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

std::string capitalized(std::string word) {
  if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] = static_cast<char>(word[0] - 'a' + 'A');
  return word;
}

std::string padded_id(char prefix, std::size_t index, std::size_t width) {
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

std::vector<double> random_unit(Rng& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  while (norm < 1e-12) {
    norm = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& v, double w) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
}

std::vector<double> normalized(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm < 1e-12) throw Error("synthetic embedding collapsed to zero");
  for (auto& x : v) x /= norm;
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct ApiPlan {
  std::string api_id;
  std::string action;
  std::string object;
  std::vector<std::string> words;
  std::string own_word;
};

struct ToolPlan {
  std::string tool_id;
  std::string name;
  std::size_t category = 0;
  std::size_t group = 0;
  bool seen = true;
  bool clustered = false;
  std::optional<std::size_t> twin;
  bool copies_twin = false;
  std::vector<std::string> topics;
  std::vector<ApiPlan> apis;
};

struct World {
  std::vector<std::string> category_names;
  std::vector<std::vector<std::string>> category_pools;
  std::vector<std::vector<std::size_t>> category_tools;
  std::vector<bool> category_unseen;
  std::vector<ToolPlan> tools;
  std::map<std::string, std::vector<double>> doc_vectors;
};

void validate_spec(const SynthSpec& spec) {
  if (spec.tools == 0) throw ConfigError("synth: tools must be positive");
  if (spec.apis_per_tool < 2) throw ConfigError("synth: apis_per_tool must be at least 2");
  if (spec.apis_per_tool > action_words().size() * 4)
    throw ConfigError("synth: apis_per_tool too large for the action vocabulary");
  if (spec.categories == 0 || spec.categories > spec.tools)
    throw ConfigError("synth: categories must be in [1, tools]");
  if (spec.clusters > 0 && spec.cluster_size < 2) throw ConfigError("synth: cluster_size must be at least 2");
  if (spec.clusters * spec.cluster_size > spec.tools)
    throw ConfigError("synth: clusters * cluster_size exceeds the tool count");
  if (!(spec.seen_fraction >= 0.0 && spec.seen_fraction <= 1.0))
    throw ConfigError("synth: seen_fraction must be in [0, 1]");
  if (!(spec.unseen_category_share >= 0.0 && spec.unseen_category_share <= 1.0))
    throw ConfigError("synth: unseen_category_share must be in [0, 1]");
  if (spec.dimension < 2) throw ConfigError("synth: dimension must be at least 2");
  if (spec.phrase_words == 0) throw ConfigError("synth: phrase_words must be positive");
  if (!(spec.twin_affinity >= 0.0 && spec.twin_affinity < 1.0))
    throw ConfigError("synth: twin_affinity must be in [0, 1)");
  if (!(spec.topic_rate >= 0.0 && spec.topic_rate <= 1.0)) throw ConfigError("synth: topic_rate must be in [0, 1]");
  if (!(spec.distractor_rate >= 0.0 && spec.distractor_rate <= 1.0))
    throw ConfigError("synth: distractor_rate must be in [0, 1]");
  for (const auto& [label, count] : spec.queries_per_subset) {
    (void)count;
    const auto& kinds = benchmark_subsets();
    if (std::none_of(kinds.begin(), kinds.end(), [&](const SubsetKind& k) { return k.label == label; }))
      throw ConfigError("synth: unknown subset '" + label + "'");
  }
}

void assign_structure(const SynthSpec& spec, World& w) {
  const std::size_t base = spec.tools / spec.categories;
  const std::size_t extra = spec.tools % spec.categories;
  w.category_tools.assign(spec.categories, {});
  std::size_t next = 0;
  for (std::size_t c = 0; c < spec.categories; ++c) {
    const std::size_t size = base + (c < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) w.category_tools[c].push_back(next++);
  }
  w.tools.resize(spec.tools);
  const std::size_t width = std::max<std::size_t>(3, std::to_string(spec.tools).size());
  for (std::size_t c = 0; c < spec.categories; ++c)
    for (std::size_t t : w.category_tools[c]) {
      w.tools[t].tool_id = padded_id('t', t + 1, width);
      w.tools[t].category = c;
      w.tools[t].group = t;
    }

  const auto n_seen = static_cast<std::size_t>(std::llround(spec.seen_fraction * static_cast<double>(spec.tools)));
  const std::size_t n_unseen = spec.tools - n_seen;
  std::size_t budget =
      static_cast<std::size_t>(std::floor(spec.unseen_category_share * static_cast<double>(n_unseen) + 1e-9));
  w.category_unseen.assign(spec.categories, false);
  std::size_t assigned = 0;
  for (std::size_t c = spec.categories; c-- > 0;) {
    const std::size_t size = w.category_tools[c].size();
    if (size <= budget && c > 0) {
      w.category_unseen[c] = true;
      budget -= size;
      assigned += size;
      for (std::size_t t : w.category_tools[c]) w.tools[t].seen = false;
    }
  }
  std::size_t remaining = n_unseen - assigned;
  std::vector<std::size_t> depth(spec.categories, 0);
  while (remaining > 0) {
    bool progressed = false;
    for (std::size_t c = spec.categories; c-- > 0 && remaining > 0;) {
      if (w.category_unseen[c]) continue;
      const auto& members = w.category_tools[c];
      if (depth[c] >= members.size()) continue;
      w.tools[members[members.size() - 1 - depth[c]]].seen = false;
      ++depth[c];
      --remaining;
      progressed = true;
    }
    if (!progressed) throw ConfigError("synth: cannot place unseen tools");
  }

  std::vector<std::size_t> free_from(spec.categories, 0);
  std::size_t c = 0;
  for (std::size_t k = 0; k < spec.clusters; ++k) {
    std::size_t tried = 0;
    while (w.category_tools[c].size() - free_from[c] < spec.cluster_size) {
      c = (c + 1) % spec.categories;
      if (++tried > spec.categories) throw ConfigError("synth: categories too small to hold the tool clusters");
    }
    const std::size_t template_tool = w.category_tools[c][free_from[c]];
    for (std::size_t i = 0; i < spec.cluster_size; ++i) {
      auto& member = w.tools[w.category_tools[c][free_from[c] + i]];
      member.group = template_tool;
      member.clustered = true;
    }
    free_from[c] += spec.cluster_size;
    c = (c + 1) % spec.categories;
  }

  std::size_t placed = 0;
  bool progressed = true;
  while (placed < spec.twin_pairs && progressed) {
    progressed = false;
    for (std::size_t cat = 0; cat < spec.categories && placed < spec.twin_pairs; ++cat) {
      const auto& members = w.category_tools[cat];
      std::optional<std::size_t> source, copier;
      for (std::size_t t : members)
        if (!w.tools[t].twin) {
          source = t;
          break;
        }
      for (auto it = members.rbegin(); it != members.rend(); ++it)
        if (!w.tools[*it].clustered && !w.tools[*it].twin) {
          copier = *it;
          break;
        }
      if (!source || !copier || *source >= *copier || w.tools[*source].group == w.tools[*copier].group) continue;
      w.tools[*source].twin = *copier;
      w.tools[*copier].twin = *source;
      w.tools[*copier].copies_twin = true;
      ++placed;
      progressed = true;
    }
  }
  if (placed < spec.twin_pairs) throw ConfigError("synth: not enough tools for the requested twin pairs");
}

void make_vocabulary(const SynthSpec& spec, Rng& rng, World& w) {
  WordMaker words(rng);
  const std::size_t pool_size = std::max<std::size_t>(40, spec.apis_per_tool * 4);
  for (std::size_t c = 0; c < spec.categories; ++c) {
    w.category_names.push_back(capitalized(words.next()));
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < pool_size; ++i) pool.push_back(words.next());
    w.category_pools.push_back(std::move(pool));
  }
  for (auto& tool : w.tools) {
    tool.topics = {words.next(), words.next()};
    tool.name = capitalized(tool.topics[0]) + pick(rng, name_suffixes());
  }
}

void make_apis(const SynthSpec& spec, Rng& rng, World& w) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(spec.tools * spec.apis_per_tool).size());
  std::size_t api_counter = 0;
  for (std::size_t t = 0; t < w.tools.size(); ++t) {
    auto& tool = w.tools[t];
    const auto& pool = w.category_pools[tool.category];
    if (tool.copies_twin) {
      for (const auto& original : w.tools[*tool.twin].apis) {
        ApiPlan api = original;
        api.words.pop_back();
        tool.apis.push_back(std::move(api));
      }
    } else if (tool.group == t) {
      std::set<std::pair<std::string, std::string>> used;
      for (std::size_t k = 0; k < spec.apis_per_tool; ++k) {
        ApiPlan api;
        do {
          api.action = pick(rng, action_words());
          api.object = pick(rng, pool);
        } while (!used.insert({api.action, api.object}).second);
        std::set<std::string> chosen{api.object};
        while (api.words.size() < 3) {
          const auto& word = pick(rng, pool);
          if (chosen.insert(word).second) api.words.push_back(word);
        }
        tool.apis.push_back(std::move(api));
      }
    } else {
      const auto& source = w.tools[tool.group];
      for (const auto& original : source.apis) {
        ApiPlan api = original;
        const std::size_t swaps = 1 + uniform_index(rng, 2);
        for (std::size_t s = 0; s < swaps; ++s) {
          const std::size_t pos = uniform_index(rng, api.words.size());
          for (;;) {
            const auto& word = pick(rng, pool);
            if (word != api.object && std::find(api.words.begin(), api.words.end(), word) == api.words.end()) {
              api.words[pos] = word;
              break;
            }
          }
        }
        tool.apis.push_back(std::move(api));
      }
    }
    if (tool.group == t) {
      for (std::size_t k = 0; k < tool.apis.size(); ++k) {
        auto& api = tool.apis[k];
        const ApiPlan* partner = tool.copies_twin ? &w.tools[*tool.twin].apis[k] : nullptr;
        for (;;) {
          const auto& word = pick(rng, pool);
          if (word == api.object || std::find(api.words.begin(), api.words.end(), word) != api.words.end()) continue;
          if (partner && word == partner->own_word) continue;
          api.own_word = word;
          api.words.push_back(word);
          break;
        }
      }
    }
    for (auto& api : tool.apis) api.api_id = padded_id('a', ++api_counter, width);
  }
}

std::string describe(const ApiPlan& api, const ToolPlan& tool) {
  std::string text = capitalized(api.action) + " the " + api.object;
  for (const auto& word : api.words) text += " " + word;
  text += " for " + tool.topics[0] + " " + tool.topics[1] + ".";
  return text;
}

void make_embeddings(const SynthSpec& spec, Rng& rng, World& w) {
  std::vector<std::vector<double>> category_dirs;
  for (std::size_t c = 0; c < spec.categories; ++c) category_dirs.push_back(random_unit(rng, spec.dimension));
  std::map<std::size_t, std::vector<double>> group_dirs;
  for (const auto& tool : w.tools) {
    if (group_dirs.count(tool.group)) continue;
    auto dir = random_unit(rng, spec.dimension);
    if (tool.copies_twin) {
      const double rho = spec.twin_affinity;
      std::vector<double> mixed(spec.dimension, 0.0);
      add_scaled(mixed, group_dirs.at(w.tools[*tool.twin].group), rho);
      add_scaled(mixed, dir, std::sqrt(1.0 - rho * rho));
      dir = normalized(std::move(mixed));
    }
    group_dirs[tool.group] = std::move(dir);
  }
  for (const auto& tool : w.tools) {
    const auto tool_dir = random_unit(rng, spec.dimension);
    for (const auto& api : tool.apis) {
      std::vector<double> v(spec.dimension, 0.0);
      add_scaled(v, category_dirs[tool.category], spec.category_weight);
      add_scaled(v, group_dirs[tool.group], spec.group_weight);
      add_scaled(v, tool_dir, spec.tool_weight);
      add_scaled(v, random_unit(rng, spec.dimension), spec.api_weight);
      w.doc_vectors[api.api_id] = normalized(std::move(v));
    }
  }
}

struct QueryPlan {
  std::vector<std::pair<std::size_t, std::size_t>> gold;  // (tool index, api index)
};

std::vector<std::size_t> eligible_tools(const World& w, const SubsetKind& kind) {
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < w.tools.size(); ++t) {
    const auto& tool = w.tools[t];
    const bool unseen_cat = w.category_unseen[tool.category];
    if (kind.seen && tool.seen && !unseen_cat) out.push_back(t);
    if (!kind.seen && !tool.seen && kind.unseen_category == unseen_cat) out.push_back(t);
  }
  return out;
}

/// Picks gold tools from distinct groups, within one category or across categories.
std::vector<std::size_t> pick_multi_tools(Rng& rng, const World& w, const std::vector<std::size_t>& eligible,
                                          const SubsetKind& kind) {
  const std::size_t wanted = 2 + uniform_index(rng, 2);
  std::vector<std::size_t> order = eligible;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> chosen;
  std::set<std::size_t> groups, categories;
  if (kind.cross_category) {
    for (std::size_t t : order) {
      if (chosen.size() == wanted) break;
      if (categories.count(w.tools[t].category) || groups.count(w.tools[t].group)) continue;
      chosen.push_back(t);
      categories.insert(w.tools[t].category);
      groups.insert(w.tools[t].group);
    }
  } else {
    std::map<std::size_t, std::vector<std::size_t>> by_category;
    for (std::size_t t : order) by_category[w.tools[t].category].push_back(t);
    std::vector<std::size_t> usable;
    for (const auto& [c, members] : by_category) {
      std::set<std::size_t> g;
      for (std::size_t t : members) g.insert(w.tools[t].group);
      if (g.size() >= 2) usable.push_back(c);
    }
    if (usable.empty()) return {};
    for (std::size_t t : by_category[pick(rng, usable)]) {
      if (chosen.size() == wanted) break;
      if (groups.count(w.tools[t].group)) continue;
      chosen.push_back(t);
      groups.insert(w.tools[t].group);
    }
  }
  return chosen.size() >= 2 ? chosen : std::vector<std::size_t>{};
}

QueryPlan plan_query(Rng& rng, const SynthSpec& spec, const World& w, const SubsetKind& kind) {
  const auto eligible = eligible_tools(w, kind);
  if (eligible.empty()) throw ConfigError("synth: no tools available for subset '" + kind.label + "'");
  QueryPlan plan;
  if (!kind.multi_tool) {
    const std::size_t t = pick(rng, eligible);
    const std::size_t count = std::min<std::size_t>(2 + uniform_index(rng, 2), spec.apis_per_tool);
    for (std::size_t a : sample_indices(rng, spec.apis_per_tool, count)) plan.gold.emplace_back(t, a);
    return plan;
  }
  const auto tools = pick_multi_tools(rng, w, eligible, kind);
  if (tools.empty())
    throw ConfigError("synth: subset '" + kind.label + "' needs at least two tools from distinct groups");
  std::vector<std::size_t> counts(tools.size(), 1);
  std::size_t total = tools.size();
  const std::size_t target = std::min<std::size_t>(std::max<std::size_t>(3, total + uniform_index(rng, 3)), 5);
  std::vector<std::size_t> room(tools.size());
  std::iota(room.begin(), room.end(), 0);
  std::shuffle(room.begin(), room.end(), rng);
  for (std::size_t i : room) {
    if (total >= target) break;
    ++counts[i];
    ++total;
  }
  for (std::size_t i = 0; i < tools.size(); ++i)
    for (std::size_t a : sample_indices(rng, spec.apis_per_tool, counts[i])) plan.gold.emplace_back(tools[i], a);
  std::shuffle(plan.gold.begin(), plan.gold.end(), rng);
  return plan;
}

std::string phrase_for(Rng& rng, const SynthSpec& spec, const World& w, std::size_t t, std::size_t a) {
  const auto& tool = w.tools[t];
  const auto& api = tool.apis[a];
  std::string text = api.action + " " + api.object;
  const std::size_t n = std::min(spec.phrase_words, api.words.size());
  for (std::size_t i : sample_indices(rng, api.words.size(), n)) text += " " + api.words[i];
  if (std::bernoulli_distribution(spec.topic_rate)(rng)) text += " " + pick(rng, tool.topics);
  if (std::bernoulli_distribution(spec.distractor_rate)(rng)) {
    if (tool.twin) {
      text += " " + w.tools[*tool.twin].apis[a].own_word;
    } else {
      const auto& pool = w.category_pools[tool.category];
      for (;;) {
        const auto& word = pick(rng, pool);
        if (word != api.object && std::find(api.words.begin(), api.words.end(), word) == api.words.end()) {
          text += " " + word;
          break;
        }
      }
    }
  }
  return text;
}

std::string query_text(Rng& rng, const SynthSpec& spec, const World& w, const QueryPlan& plan, bool multi) {
  std::vector<std::string> phrases;
  for (const auto& [t, a] : plan.gold) phrases.push_back(phrase_for(rng, spec, w, t, a));
  std::string text = pick(rng, openers()) + " " + phrases[0];
  for (std::size_t i = 1; i < phrases.size(); ++i) {
    if (multi)
      text += " " + pick(rng, multi_joiners()) + " " + phrases[i];
    else if (i + 1 == phrases.size())
      text += " and " + phrases[i];
    else
      text += ", " + phrases[i];
  }
  return text;
}

/// 0-based position of `id` in the dense ranking (score desc, id asc).
std::size_t dense_rank(const World& w, const std::vector<double>& q, const std::string& id) {
  const double target = dot(q, w.doc_vectors.at(id));
  std::size_t rank = 0;
  for (const auto& [other, v] : w.doc_vectors) {
    if (other == id) continue;
    const double s = dot(q, v);
    if (s > target || (s == target && other < id)) ++rank;
  }
  return rank;
}

std::vector<double> gold_centroid(const SynthSpec& spec, const World& w, const QueryPlan& plan) {
  std::map<std::size_t, std::vector<double>> per_tool;
  for (const auto& [t, a] : plan.gold) {
    auto& acc = per_tool.try_emplace(t, spec.dimension, 0.0).first->second;
    add_scaled(acc, w.doc_vectors.at(w.tools[t].apis[a].api_id), 1.0);
  }
  std::vector<double> centroid(spec.dimension, 0.0);
  for (auto& [t, acc] : per_tool) add_scaled(centroid, normalized(std::move(acc)), 1.0);
  return normalized(std::move(centroid));
}

std::vector<double> noisy_query(Rng& rng, const std::vector<double>& centroid, double noise) {
  std::vector<double> q = centroid;
  add_scaled(q, random_unit(rng, q.size()), noise);
  return normalized(std::move(q));
}

/// Noise draws for one gold set under a rank limit; the noise halves after
/// every batch of failures and the final draw is noise-free.
std::optional<std::vector<double>> place_query(Rng& rng, const SynthSpec& spec, const World& w,
                                               const std::vector<double>& centroid,
                                               const std::vector<std::string>& gold, double noise) {
  constexpr std::size_t kAttemptsPerLevel = 50;
  constexpr std::size_t kLevels = 6;
  for (std::size_t level = 0; level <= kLevels; ++level) {
    const double scale = level == kLevels ? 0.0 : std::pow(0.5, static_cast<double>(level));
    const std::size_t attempts = level == kLevels ? 1 : kAttemptsPerLevel;
    for (std::size_t i = 0; i < attempts; ++i) {
      auto q = noisy_query(rng, centroid, noise * scale);
      if (std::all_of(gold.begin(), gold.end(),
                      [&](const std::string& id) { return dense_rank(w, q, id) < spec.gold_rank_limit; }))
        return q;
    }
  }
  return std::nullopt;
}

EvalRecord make_query(Rng& rng, const SynthSpec& spec, const World& w, const SubsetKind& kind, std::string query_id,
                      EmbeddingStore& store) {
  const double noise = kind.seen ? spec.seen_query_noise : spec.unseen_query_noise;
  constexpr std::size_t kMaxPlans = 200;
  const std::size_t plans = spec.gold_rank_limit == 0 ? 1 : kMaxPlans;
  for (std::size_t p = 0; p < plans; ++p) {
    const QueryPlan plan = plan_query(rng, spec, w, kind);
    EvalRecord record;
    record.query_id = query_id;
    record.subset = kind.label;
    record.query_text = query_text(rng, spec, w, plan, kind.multi_tool);
    for (const auto& [t, a] : plan.gold) record.gold_api_ids.push_back(w.tools[t].apis[a].api_id);
    std::sort(record.gold_api_ids.begin(), record.gold_api_ids.end());
    record.gold_query_type = kind.multi_tool ? QueryType::multi_tool : QueryType::single_tool;

    const auto centroid = gold_centroid(spec, w, plan);
    if (spec.gold_rank_limit == 0) {
      store.add(record.query_id, noisy_query(rng, centroid, noise));
      return record;
    }
    if (auto q = place_query(rng, spec, w, centroid, record.gold_api_ids, noise)) {
      store.add(record.query_id, std::move(*q));
      return record;
    }
  }
  throw ConfigError("synth: cannot place the gold APIs of " + query_id + " within the top " +
                    std::to_string(spec.gold_rank_limit) + " dense results");
}

}  // namespace

SynthBenchmark generate_synthetic_benchmark(const SynthSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed);
  World w;
  assign_structure(spec, w);
  make_vocabulary(spec, rng, w);
  make_apis(spec, rng, w);
  make_embeddings(spec, rng, w);

  std::vector<Tool> tools;
  std::vector<ApiDoc> apis;
  std::vector<std::string> seen;
  for (const auto& plan : w.tools) {
    Tool tool{plan.tool_id, plan.name, w.category_names[plan.category], {}};
    for (const auto& api : plan.apis) {
      tool.api_ids.push_back(api.api_id);
      apis.push_back(ApiDoc{api.api_id, plan.tool_id, api.action + "_" + api.object, describe(api, plan), ""});
    }
    tools.push_back(std::move(tool));
    if (plan.seen) seen.push_back(plan.tool_id);
  }

  SynthBenchmark bench;
  bench.library = ToolLibrary::build(std::move(tools), std::move(apis), std::move(seen));
  bench.embeddings = EmbeddingStore(spec.dimension);
  for (const auto& [id, v] : w.doc_vectors) bench.embeddings.add(id, v);

  std::vector<const SubsetKind*> active;
  std::size_t total = 0;
  for (const auto& kind : benchmark_subsets()) {
    auto it = spec.queries_per_subset.find(kind.label);
    if (it == spec.queries_per_subset.end()) continue;
    active.push_back(&kind);
    total += it->second;
  }
  const std::size_t qwidth = std::max<std::size_t>(4, std::to_string(std::max(total, spec.dev_queries)).size());
  std::size_t counter = 0;
  for (const SubsetKind* kind : active)
    for (std::size_t i = 0; i < spec.queries_per_subset.at(kind->label); ++i)
      bench.records.push_back(make_query(rng, spec, w, *kind, padded_id('q', ++counter, qwidth), bench.embeddings));
  if (spec.dev_queries > 0 && active.empty()) throw ConfigError("synth: dev queries need at least one subset");
  for (std::size_t i = 0; i < spec.dev_queries; ++i) {
    std::string id = "dev" + padded_id('x', i + 1, qwidth).substr(1);
    bench.dev_records.push_back(make_query(rng, spec, w, *active[i % active.size()], std::move(id), bench.embeddings));
  }
  for (const auto& r : bench.records) validate_record(r, bench.library);
  for (const auto& r : bench.dev_records) validate_record(r, bench.library);
  return bench;
}

void SynthBenchmark::save(const std::string& directory) const {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  save_library(library, (dir / "library.jsonl").string());
  save_records(records, (dir / "queries.jsonl").string());
  save_records(dev_records, (dir / "dev_queries.jsonl").string());
  embeddings.save((dir / "embeddings.tsv").string());
}

SynthBenchmark SynthBenchmark::load(const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path dir(directory);
  SynthBenchmark bench;
  bench.library = load_library((dir / "library.jsonl").string());
  bench.records = load_records((dir / "queries.jsonl").string(), &bench.library);
  if (fs::exists(dir / "dev_queries.jsonl"))
    bench.dev_records = load_records((dir / "dev_queries.jsonl").string(), &bench.library);
  bench.embeddings = EmbeddingStore::load((dir / "embeddings.tsv").string());
  return bench;
}

}  // namespace toolrank
